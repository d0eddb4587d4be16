//! Odd-`k` k-LDT through unbalanced 3SUM.
//!
//! With `h = (k-1)/2`, `X` holds every weighted `h`-tuple sum
//! `alpha_1 x_1 + .. + alpha_h x_h`, `Y` the tuples weighted by
//! `alpha_{h+1}..alpha_{k-1}`, and `Z = alpha_k A + alpha_0`. Each element
//! keeps its expansion over the original inputs, so a 3-term or 4-term
//! comparison in the reduced instance is charged as the up to `2k - 2` input
//! terms it really is.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gp_tree::resolve_block_size;
use crate::instance::{KLdtInstance, Scalar, SetId, ThreeSumInstance, Witness};
use crate::ledger::ComparisonLedger;
use crate::operand::{OperandSet, SumProblem};
use crate::rfc_tree::{rfc_search, RfcConfig, RfcStats};
use crate::{ceil_sqrt, BlockSize};

/// A weighted tuple sum with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TupleSum {
    pub value: i128,
    /// `(input index, coefficient)` pairs.
    pub provenance: Vec<(usize, Scalar)>,
    pub constant: i128,
}

/// The reduced instance, each side sorted by value (ties by provenance).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedInstance {
    pub x: Vec<TupleSum>,
    pub y: Vec<TupleSum>,
    pub z: Vec<TupleSum>,
    inputs: Vec<Scalar>,
}

fn tuples(a: &[Scalar], weights: &[Scalar]) -> Vec<TupleSum> {
    let n = a.len();
    let mut out = Vec::with_capacity(n.pow(weights.len() as u32));
    let mut idx = vec![0usize; weights.len()];
    if n == 0 {
        return out;
    }
    loop {
        let provenance: Vec<(usize, Scalar)> = idx.iter().zip(weights).map(|(&i, &w)| (i, w)).collect();
        let value = provenance.iter().map(|&(i, w)| w as i128 * a[i] as i128).sum();
        out.push(TupleSum { value, provenance, constant: 0 });
        let mut t = idx.len();
        loop {
            if t == 0 {
                return out;
            }
            t -= 1;
            idx[t] += 1;
            if idx[t] < n {
                break;
            }
            idx[t] = 0;
        }
    }
}

fn sort_sums(v: &mut [TupleSum]) {
    v.sort_by(|p, q| p.value.cmp(&q.value).then_with(|| p.provenance.cmp(&q.provenance)));
}

pub fn reduce_kldt(inst: &KLdtInstance) -> Result<ReducedInstance> {
    let k = inst.k();
    if k < 3 || k % 2 == 0 {
        return Err(Error::InvalidKLdt(format!("k must be odd and at least 3, got {k}")));
    }
    let h = (k - 1) / 2;
    let al = inst.alphas();
    let a = inst.a();
    let mut x = tuples(a, &al[1..=h]);
    let mut y = tuples(a, &al[h + 1..k]);
    let mut z: Vec<TupleSum> = (0..a.len())
        .map(|i| TupleSum {
            value: al[k] as i128 * a[i] as i128 + al[0] as i128,
            provenance: vec![(i, al[k])],
            constant: al[0] as i128,
        })
        .collect();
    sort_sums(&mut x);
    sort_sums(&mut y);
    sort_sums(&mut z);
    Ok(ReducedInstance { x, y, z, inputs: a.to_vec() })
}

impl ReducedInstance {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.x.len(), self.y.len(), self.z.len())
    }

    /// Operand sets whose elements expand over the original inputs.
    pub fn problem(&self) -> SumProblem {
        let set = |id: SetId, v: &[TupleSum]| {
            let elems = v
                .iter()
                .map(|t| (t.provenance.iter().map(|&(i, w)| (w, i)).collect::<Vec<_>>(), t.constant))
                .collect();
            OperandSet::affine(id, SetId::A, self.inputs.clone(), elems)
        };
        SumProblem { a: set(SetId::A, &self.x), b: set(SetId::B, &self.y), c: set(SetId::C, &self.z) }
    }

    /// The reduced values as a plain three-set instance, when they fit.
    pub fn to_three_sum(&self) -> Result<ThreeSumInstance> {
        let vals = |v: &[TupleSum]| -> Result<Vec<Scalar>> {
            v.iter().map(|t| crate::instance::check_scalar(t.value)).collect()
        };
        ThreeSumInstance::new(vals(&self.x)?, vals(&self.y)?, vals(&self.z)?)
    }

    /// The `k` input positions behind reduced positions `(i, j, l)`.
    pub fn lift(&self, i: usize, j: usize, l: usize) -> Vec<usize> {
        self.x[i]
            .provenance
            .iter()
            .chain(&self.y[j].provenance)
            .chain(&self.z[l].provenance)
            .map(|&(idx, _)| idx)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct KLdtOutcome {
    pub witness: Option<Witness>,
    pub stats: RfcStats,
    pub reduced_sizes: (usize, usize, usize),
}

pub fn solve_kldt(inst: &KLdtInstance, g: BlockSize, seed: u64, ledger: &mut ComparisonLedger) -> Result<Option<Witness>> {
    Ok(run_kldt(inst, g, seed, ledger)?.witness)
}

/// Runs the fractional-cascading tree on the reduced instance. The automatic
/// block size is `ceil(sqrt(n))` for the original `n = |A|`.
pub fn run_kldt(inst: &KLdtInstance, g: BlockSize, seed: u64, ledger: &mut ComparisonLedger) -> Result<KLdtOutcome> {
    let reduced = reduce_kldt(inst)?;
    let sizes = reduced.sizes();
    let n = inst.a().len();
    let g = resolve_block_size(g, sizes.0.max(sizes.1).max(sizes.2), |_| ceil_sqrt(n).max(1))?;
    let problem = reduced.problem();
    problem.charge_input_sort(ledger)?;
    let cfg = RfcConfig { g: BlockSize::Fixed(g), ..RfcConfig::default() };
    let (found, stats) = rfc_search(&problem, g, &cfg, seed, ledger)?;
    let witness = found.map(|(i, j, l)| inst.witness(reduced.lift(i, j, l)));
    Ok(KLdtOutcome { witness, stats, reduced_sizes: sizes })
}
