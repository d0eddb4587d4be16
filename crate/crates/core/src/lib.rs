//! An instrumented laboratory for 3SUM, k-SUM and k-LDT decision procedures.
//!
//! Every input-dependent branch taken by an algorithm in this crate is a sign
//! test of an affine form over the original inputs, executed through a
//! [`ledger::ComparisonLedger`]. The ledger counts the tests, tracks the
//! largest number of variable terms in any test (the `r` of an `r`-linear
//! decision tree), and splits the count by phase, so decision-tree depth and
//! linearity become measured quantities rather than asymptotic claims.
//!
//! Algorithms:
//!
//! * [`baseline`]: the quadratic three-set scan and its contours.
//! * [`gp_tree`]: the block decision tree with `g = sqrt(n log n)`.
//! * [`rfc_tree`]: the randomized fractional-cascading decision tree with
//!   `g = sqrt(n)`.
//! * [`ksum`]: odd-`k` k-LDT through unbalanced 3SUM.
//! * [`subq`]: the deterministic uniform-model algorithm built on partial
//!   contours and dominance reporting.
//!
//! Supporting pieces live in [`instance`] (inputs, generators, oracles),
//! [`fredman`] (difference-set sorting and free box orders),
//! [`dominance`] (bichromatic dominating pairs) and [`experiment`] (the
//! seeded experiment harness used by the CLI and the acceptance suite).

pub mod baseline;
pub mod dominance;
pub mod error;
pub mod experiment;
pub mod fredman;
pub mod gp_tree;
pub mod instance;
pub mod ksum;
pub mod ledger;
pub mod operand;
pub mod rfc_tree;
pub mod subq;

pub use error::{Error, Result};
pub use instance::{KLdtInstance, Scalar, SetId, ThreeSumInstance, Witness};
pub use ledger::{ComparisonLedger, LinearForm, Snapshot};

use std::str::FromStr;

/// Block size selection shared by the block-based algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BlockSize {
    /// Algorithm-specific default (`sqrt(n log n)` for the GP tree,
    /// `sqrt(n)` for the fractional-cascading tree).
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for BlockSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BlockSize::Auto);
        }
        s.parse::<usize>()
            .map(BlockSize::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("block size must be an integer or `auto`, got `{s}`")))
    }
}

impl std::fmt::Display for BlockSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockSize::Auto => f.write_str("auto"),
            BlockSize::Fixed(g) => write!(f, "{g}"),
        }
    }
}

/// `ceil(sqrt(x))` on integers.
pub(crate) fn ceil_sqrt(x: usize) -> usize {
    if x == 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as usize;
    while r * r < x {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) >= x {
        r -= 1;
    }
    r
}

/// `ceil(log2(x))` for `x >= 1`.
pub(crate) fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}
