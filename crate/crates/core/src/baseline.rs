//! The quadratic three-set scan and contour extraction.

use std::cmp::Ordering;

use crate::error::Result;
use crate::instance::{Scalar, SetId, ThreeSumInstance, Witness};
use crate::ledger::{phase, ComparisonLedger, InputRef, LinearForm};
use crate::operand::{sign3, SumProblem};

/// Positions `(lo, hi)` visited while searching a value in `A + B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    pub positions: Vec<(usize, usize)>,
}

impl Contour {
    /// Smallest and largest row visited in column `col`, if any.
    pub fn rows_in_column(&self, col: usize) -> Option<(usize, usize)> {
        let mut it = self.positions.iter().filter(|&&(_, c)| c == col).map(|&(r, _)| r);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), r| (lo.min(r), hi.max(r))))
    }
}

/// Solves the three-set instance with the quadratic scan.
pub fn solve_quadratic(inst: &ThreeSumInstance, ledger: &mut ComparisonLedger) -> Result<Option<Witness>> {
    let problem = SumProblem::from_instance(inst);
    problem.charge_input_sort(ledger)?;
    Ok(quadratic_scan(&problem, ledger)?.map(|(i, j, l)| inst.witness(i, j, l)))
}

/// For every `c`, walks `lo` up and `hi` down through `A + B` looking for
/// `-c`. On equality the witness is recorded and `hi` is decremented, so the
/// scan visits exactly the contour of `-c`. Returns the first witness found.
pub(crate) fn quadratic_scan(p: &SumProblem, ledger: &mut ComparisonLedger) -> Result<Option<(usize, usize, usize)>> {
    let (na, nb) = (p.a.len(), p.b.len());
    let mut found = None;
    for l in 0..p.c.len() {
        let (mut lo, mut hi) = (0usize, nb);
        while lo < na && hi > 0 {
            match sign3(p, lo, hi - 1, l, ledger, phase::SCAN)? {
                Ordering::Less => lo += 1,
                Ordering::Equal => {
                    found.get_or_insert((lo, hi - 1, l));
                    hi -= 1;
                }
                Ordering::Greater => hi -= 1,
            }
        }
    }
    Ok(found)
}

/// `CONTOUR(x, A + B)`: the exact position trace of the scan for `x`.
pub fn contour(x: Scalar, a: &[Scalar], b: &[Scalar], ledger: &mut ComparisonLedger) -> Result<Contour> {
    let mut positions = Vec::with_capacity(a.len() + b.len());
    let (mut lo, mut hi) = (0usize, b.len());
    while lo < a.len() && hi > 0 {
        positions.push((lo, hi - 1));
        let f = LinearForm::with_constant(-(x as i128))
            .term(1, InputRef::new(SetId::A, lo), a[lo])
            .term(1, InputRef::new(SetId::B, hi - 1), b[hi - 1]);
        match ledger.resolve(&f, phase::CONTOUR)? {
            Ordering::Less => lo += 1,
            _ => hi -= 1,
        }
    }
    Ok(Contour { positions })
}
