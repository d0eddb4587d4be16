//! The decision-tree cost model.
//!
//! A [`LinearForm`] is an affine expression over original inputs. Every
//! input-dependent branch in this crate evaluates the sign of one form
//! through [`ComparisonLedger::compare`]; reusing an order that is already
//! known (difference-set ranks, box permutations, bridge links) never touches
//! the ledger and so costs nothing.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::instance::{Scalar, SetId};

/// Standard phase labels.
pub mod phase {
    pub const SORT_INPUT: &str = "sort-input";
    pub const SORT_D: &str = "sort-D";
    pub const SCAN: &str = "scan";
    pub const PATH: &str = "path";
    pub const BOX_SEARCH: &str = "box-search";
    pub const MERGE: &str = "merge";
    pub const CONTOUR: &str = "contour";
}

/// An original input: set and sorted position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputRef {
    pub set: SetId,
    pub index: u32,
}

impl InputRef {
    pub fn new(set: SetId, index: usize) -> Self {
        Self { set, index: index as u32 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub coef: i64,
    pub input: InputRef,
    pub value: Scalar,
}

/// `constant + sum coef * input`. Terms on the same input are merged, and
/// terms whose coefficient cancels to zero are dropped, so [`arity`] is the
/// number of distinct inputs the sign actually depends on.
///
/// [`arity`]: LinearForm::arity
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm {
    terms: SmallVec<[Term; 8]>,
    constant: i128,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_constant(constant: i128) -> Self {
        Self { terms: SmallVec::new(), constant }
    }

    /// Builder form of [`push`](Self::push).
    pub fn term(mut self, coef: i64, input: InputRef, value: Scalar) -> Self {
        self.push(coef, input, value);
        self
    }

    pub fn push(&mut self, coef: i64, input: InputRef, value: Scalar) {
        if coef == 0 {
            return;
        }
        if let Some(pos) = self.terms.iter().position(|t| t.input == input) {
            let merged = self.terms[pos].coef + coef;
            if merged == 0 {
                self.terms.swap_remove(pos);
            } else {
                self.terms[pos].coef = merged;
            }
        } else {
            self.terms.push(Term { coef, input, value });
        }
    }

    pub fn add_constant(&mut self, c: i128) {
        self.constant += c;
    }

    pub fn constant(&self) -> i128 {
        self.constant
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    /// Exact value in checked 128-bit arithmetic.
    pub fn evaluate(&self) -> Result<i128> {
        self.terms.iter().try_fold(self.constant, |acc, t| {
            (t.coef as i128).checked_mul(t.value as i128).and_then(|x| acc.checked_add(x)).ok_or(Error::Overflow)
        })
    }
}

/// Per-phase counter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCount {
    pub count: u64,
    pub max_arity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub phase: &'static str,
    pub arity: usize,
    pub sign: Ordering,
}

/// Counts executed sign tests. One ledger per run.
#[derive(Clone, Debug, Default)]
pub struct ComparisonLedger {
    total: u64,
    phases: Vec<(&'static str, PhaseCount)>,
    max_arity: usize,
    trace: Option<Vec<TraceEntry>>,
    last_slot: usize,
}

impl ComparisonLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// A ledger that also records every executed test.
    pub fn with_trace() -> Self {
        Self { trace: Some(Vec::new()), ..Self::default() }
    }

    /// Sign of `form`, counted against `phase`.
    ///
    /// Fails on forms with no variable terms (their sign does not depend on
    /// the input, so they are not decision-tree branches) and on overflow.
    pub fn compare(&mut self, form: &LinearForm, phase: &'static str) -> Result<Ordering> {
        let arity = form.arity();
        if arity == 0 {
            return Err(Error::EmptyForm);
        }
        let sign = form.evaluate()?.cmp(&0);
        self.record(arity, sign, phase);
        Ok(sign)
    }

    /// Records one test of the given arity whose form evaluates to `value`.
    #[inline]
    pub(crate) fn record_value(&mut self, arity: usize, value: i128, phase: &'static str) -> Ordering {
        let sign = value.cmp(&0);
        self.record(arity, sign, phase);
        sign
    }

    #[inline]
    fn record(&mut self, arity: usize, sign: Ordering, phase: &'static str) {
        self.total += 1;
        self.max_arity = self.max_arity.max(arity);
        let same = |p: &&'static str| std::ptr::eq(p.as_ptr(), phase.as_ptr()) && p.len() == phase.len();
        let slot = match self.phases.get(self.last_slot) {
            Some((p, _)) if same(p) => self.last_slot,
            _ => match self.phases.iter().position(|(p, _)| same(p)).or_else(|| self.phases.iter().position(|(p, _)| *p == phase)) {
                Some(i) => i,
                None => {
                    self.phases.push((phase, PhaseCount::default()));
                    self.phases.len() - 1
                }
            },
        };
        self.last_slot = slot;
        let pc = &mut self.phases[slot].1;
        pc.count += 1;
        pc.max_arity = pc.max_arity.max(arity);
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEntry { phase, arity, sign });
        }
    }

    /// Like [`compare`](Self::compare), but a form whose variable terms all
    /// cancelled is answered from its constant without being counted.
    pub fn resolve(&mut self, form: &LinearForm, phase: &'static str) -> Result<Ordering> {
        if form.arity() == 0 {
            Ok(form.constant().cmp(&0))
        } else {
            self.compare(form, phase)
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn phase(&self, phase: &str) -> PhaseCount {
        self.phases.iter().find(|(p, _)| *p == phase).map(|(_, c)| *c).unwrap_or_default()
    }

    pub fn trace(&self) -> Option<&[TraceEntry]> {
        self.trace.as_deref()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            total: self.total,
            per_phase: self.phases.iter().map(|(p, c)| (p.to_string(), *c)).collect(),
            max_arity: self.max_arity,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub total: u64,
    pub per_phase: BTreeMap<String, PhaseCount>,
    pub max_arity: usize,
}

impl Snapshot {
    /// `phase=count` pairs joined by `;`, in phase-name order.
    pub fn phase_summary(&self) -> String {
        self.per_phase.iter().map(|(p, c)| format!("{p}={}", c.count)).collect::<Vec<_>>().join(";")
    }
}
