//! Sorted operand sets whose elements expand to affine forms over original
//! inputs.
//!
//! For a plain 3SUM instance element `i` of set `A` is just input `(A, i)`.
//! For a reduced k-LDT instance an element is a weighted tuple sum, and
//! every comparison that touches it is charged with the full expansion.

use std::cell::Cell;
use std::cmp::Ordering;

use smallvec::SmallVec;

use crate::error::Result;
use crate::instance::{Scalar, SetId, ThreeSumInstance};
use crate::ledger::{phase, ComparisonLedger, InputRef, LinearForm};

#[derive(Clone, Debug)]
enum Expansion {
    Unit { inputs: Vec<Scalar> },
    Affine { source: SetId, inputs: Vec<Scalar>, terms: Vec<SmallVec<[(i64, u32); 4]>>, constants: Vec<i128> },
}

/// A sorted list of operands with their input expansions.
#[derive(Clone, Debug)]
pub struct OperandSet {
    id: SetId,
    values: Vec<i128>,
    expansion: Expansion,
}

impl OperandSet {
    /// Operand `i` is input `(id, i)`. `values` must be sorted.
    pub fn unit(id: SetId, values: &[Scalar]) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self {
            id,
            values: values.iter().map(|&v| v as i128).collect(),
            expansion: Expansion::Unit { inputs: values.to_vec() },
        }
    }

    /// Operands given as `(terms, constant)` over inputs of `source`, already
    /// sorted by value.
    pub fn affine(id: SetId, source: SetId, inputs: Vec<Scalar>, elems: Vec<(Vec<(i64, usize)>, i128)>) -> Self {
        let mut values = Vec::with_capacity(elems.len());
        let mut terms = Vec::with_capacity(elems.len());
        let mut constants = Vec::with_capacity(elems.len());
        for (t, c) in elems {
            let v = t.iter().fold(c, |acc, &(coef, i)| acc + coef as i128 * inputs[i] as i128);
            values.push(v);
            terms.push(t.into_iter().map(|(coef, i)| (coef, i as u32)).collect());
            constants.push(c);
        }
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self { id, values, expansion: Expansion::Affine { source, inputs, terms, constants } }
    }

    pub fn id(&self) -> SetId {
        self.id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> i128 {
        self.values[i]
    }

    pub fn values(&self) -> &[i128] {
        &self.values
    }
    /// Adds `sign * operand(i)` to `form`.
    #[inline]
    pub fn push_into(&self, i: usize, sign: i64, form: &mut LinearForm) {
        match &self.expansion {
            Expansion::Unit { inputs } => form.push(sign, InputRef::new(self.id, i), inputs[i]),
            Expansion::Affine { source, inputs, terms, constants } => {
                for &(coef, idx) in &terms[i] {
                    form.push(sign * coef, InputRef { set: *source, index: idx }, inputs[idx as usize]);
                }
                form.add_constant(sign as i128 * constants[i]);
            }
        }
    }
}

/// The three operand sets of a (possibly unbalanced, possibly reduced)
/// 3SUM problem.
#[derive(Clone, Debug)]
pub struct SumProblem {
    pub a: OperandSet,
    pub b: OperandSet,
    pub c: OperandSet,
}

impl SumProblem {
    pub fn from_instance(inst: &ThreeSumInstance) -> Self {
        Self {
            a: OperandSet::unit(SetId::A, inst.a()),
            b: OperandSet::unit(SetId::B, inst.b()),
            c: OperandSet::unit(SetId::C, inst.c()),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a.is_empty() || self.b.is_empty() || self.c.is_empty()
    }

    /// Charges a comparison sort of every set, starting from a fixed
    /// scrambled order so the count reflects sorting rather than a check of
    /// sortedness. The resulting order is the stored one (ties by index).
    pub fn charge_input_sort(&self, ledger: &mut ComparisonLedger) -> Result<()> {
        for set in [&self.a, &self.b, &self.c] {
            charge_sort(set, ledger)?;
        }
        Ok(())
    }
}

fn scramble(i: usize) -> u64 {
    (i as u64 ^ 0x5851_f42d_4c95_7f2d).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(29)
}

fn charge_sort(set: &OperandSet, ledger: &mut ComparisonLedger) -> Result<()> {
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by_key(|&i| scramble(i));
    let failure = Cell::new(None);
    order.sort_by(|&i, &j| {
        let mut f = LinearForm::new();
        set.push_into(i, 1, &mut f);
        set.push_into(j, -1, &mut f);
        match ledger.resolve(&f, phase::SORT_INPUT) {
            Ok(Ordering::Equal) => i.cmp(&j),
            Ok(o) => o,
            Err(e) => {
                failure.set(Some(e));
                i.cmp(&j)
            }
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    debug_assert!(order.iter().enumerate().all(|(k, &i)| k == i));
    Ok(())
}

/// `a_i + b_j + c_l`.
#[inline]
pub fn sum3(p: &SumProblem, i: usize, j: usize, l: usize) -> LinearForm {
    let mut f = LinearForm::new();
    p.a.push_into(i, 1, &mut f);
    p.b.push_into(j, 1, &mut f);
    p.c.push_into(l, 1, &mut f);
    f
}

/// Sign of `a_i + b_j + c_l`, charged to `phase`.
#[inline]
pub(crate) fn sign3(p: &SumProblem, i: usize, j: usize, l: usize, ledger: &mut ComparisonLedger, phase: &'static str) -> Result<Ordering> {
    if let (Expansion::Unit { inputs: a }, Expansion::Unit { inputs: b }, Expansion::Unit { inputs: c }) =
        (&p.a.expansion, &p.b.expansion, &p.c.expansion)
    {
        if p.a.id != p.b.id && p.b.id != p.c.id && p.a.id != p.c.id {
            let value = a[i] as i128 + b[j] as i128 + c[l] as i128;
            return Ok(ledger.record_value(3, value, phase));
        }
    }
    ledger.resolve(&sum3(p, i, j, l), phase)
}

/// Sign of `(x_p - x_q) - (y_r - y_s)`, charged to `phase`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn sign_diff_vs_diff(
    x: &OperandSet,
    p: usize,
    q: usize,
    y: &OperandSet,
    r: usize,
    s: usize,
    ledger: &mut ComparisonLedger,
    phase: &'static str,
) -> Result<Ordering> {
    if let (Expansion::Unit { inputs: xs }, Expansion::Unit { inputs: ys }) = (&x.expansion, &y.expansion) {
        if x.id != y.id {
            let arity = 2 * (p != q) as usize + 2 * (r != s) as usize;
            if arity == 0 {
                return Ok(Ordering::Equal);
            }
            let value = xs[p] as i128 - xs[q] as i128 - ys[r] as i128 + ys[s] as i128;
            return Ok(ledger.record_value(arity, value, phase));
        }
    }
    ledger.resolve(&diff_vs_diff(x, p, q, y, r, s), phase)
}

/// `(x_p - x_q) - (y_r - y_s)`.
#[inline]
pub fn diff_vs_diff(x: &OperandSet, p: usize, q: usize, y: &OperandSet, r: usize, s: usize) -> LinearForm {
    let mut f = LinearForm::new();
    x.push_into(p, 1, &mut f);
    x.push_into(q, -1, &mut f);
    y.push_into(r, -1, &mut f);
    y.push_into(s, 1, &mut f);
    f
}
