//! Seeded experiment harness: generate, solve, cross-check, record.
//!
//! A run is fully determined by its [`Config`]. Wall-clock time is only
//! measured when asked for, so the default output is byte-for-byte
//! reproducible.
//!
//! CSV columns, in order: `algo, dist, n, g, k, seed, trial, comparisons_total,
//! comparisons_per_phase, max_arity, witness_found, oracle, wall_ns`.
//! `g` is empty for algorithms without blocks and `k` is 3 for 3SUM runs.
//! `comparisons_per_phase` is `phase=count` pairs joined by `;`. `oracle` is
//! `match`, `mismatch` or `skipped`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::solve_quadratic;
use crate::error::{Error, Result};
use crate::gp_tree::{run_gp, GpConfig};
use crate::instance::{
    generate, generate_kldt, k_ldt_oracle, three_sum_oracle, three_sum_two_pointer, AnyInstance, Distribution,
    KLdtInstance, Scalar, ThreeSumInstance, Witness,
};
use crate::ksum::run_kldt;
use crate::ledger::ComparisonLedger;
use crate::operand::{sign3, SumProblem};
use crate::rfc_tree::{run_rfc, RfcConfig};
use crate::subq::run_subq;
use crate::BlockSize;

/// Largest `n` checked with the triple-loop oracle.
pub const TRIPLE_LOOP_LIMIT: usize = 512;
/// Default largest `n` checked at all (two-pointer above the triple loop).
pub const DEFAULT_ORACLE_LIMIT: usize = 4096;
/// Largest `n^k` the k-LDT oracle enumerates.
const KLDT_ORACLE_TUPLES: f64 = 2e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Brute,
    Quad,
    Gp,
    Rfc,
    Subq,
    Kldt,
}

impl Algo {
    pub const ALL: [Algo; 6] = [Algo::Brute, Algo::Quad, Algo::Gp, Algo::Rfc, Algo::Subq, Algo::Kldt];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Brute => "brute",
            Algo::Quad => "quad",
            Algo::Gp => "gp",
            Algo::Rfc => "rfc",
            Algo::Subq => "subq",
            Algo::Kldt => "kldt",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleStatus {
    Match,
    Mismatch,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algo: Algo,
    pub dist: String,
    pub n: usize,
    pub g: Option<usize>,
    pub k: usize,
    pub seed: u64,
    pub trial: usize,
    pub comparisons_total: u64,
    pub comparisons_per_phase: String,
    pub max_arity: usize,
    pub witness_found: bool,
    pub oracle: OracleStatus,
    pub wall_ns: u64,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub algo: Algo,
    pub ns: Vec<usize>,
    pub g: BlockSize,
    pub k: usize,
    pub alphas: Option<Vec<Scalar>>,
    pub dist: Distribution,
    pub seed: u64,
    pub trials: usize,
    pub oracle_limit: usize,
    pub timing: bool,
    /// Run on this instance instead of generating (one trial).
    pub input: Option<AnyInstance>,
}

impl Config {
    pub fn new(algo: Algo, ns: Vec<usize>) -> Self {
        Config {
            algo,
            ns,
            g: BlockSize::Auto,
            k: 3,
            alphas: None,
            dist: Distribution::Uniform,
            seed: 0,
            trials: 1,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
            timing: false,
            input: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.input.is_none() && (self.ns.is_empty() || self.ns.contains(&0)) {
            return Err(Error::InvalidArgument("every n must be positive".into()));
        }
        if self.algo == Algo::Subq {
            if let BlockSize::Fixed(g) = self.g {
                if !(2..=4).contains(&g) {
                    return Err(Error::InvalidArgument(format!("subq needs g in {{2, 3, 4}}, got {g}")));
                }
            }
        }
        let kldt_input = matches!(self.input, Some(AnyInstance::KLdt(_)));
        if (self.algo == Algo::Kldt) != kldt_input && self.input.is_some() {
            return Err(Error::InvalidArgument("input instance kind does not match the algorithm".into()));
        }
        if self.algo == Algo::Kldt && (self.k < 3 || self.k % 2 == 0) {
            return Err(Error::InvalidKLdt(format!("k must be odd and at least 3, got {}", self.k)));
        }
        if let Some(al) = &self.alphas {
            if self.algo != Algo::Kldt {
                return Err(Error::InvalidArgument("--alphas only applies to kldt".into()));
            }
            if al.len() != self.k + 1 {
                return Err(Error::InvalidKLdt(format!("expected {} coefficients, got {}", self.k + 1, al.len())));
            }
        }
        Ok(())
    }
}

/// Seed of the instance for one `(n, trial)` cell of the grid.
pub fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    let mut z = seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (trial as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Every triple, one 3-term test each.
pub fn solve_brute(inst: &ThreeSumInstance, ledger: &mut ComparisonLedger) -> Result<Option<Witness>> {
    let p = SumProblem::from_instance(inst);
    for i in 0..inst.a().len() {
        for j in 0..inst.b().len() {
            for l in 0..inst.c().len() {
                if sign3(&p, i, j, l, ledger, "scan")?.is_eq() {
                    return Ok(Some(inst.witness(i, j, l)));
                }
            }
        }
    }
    Ok(None)
}

enum Inst {
    Three(ThreeSumInstance),
    K(KLdtInstance),
}

fn oracle3(inst: &ThreeSumInstance, limit: usize) -> Option<bool> {
    let n = inst.size();
    if n <= TRIPLE_LOOP_LIMIT.min(limit) {
        Some(three_sum_oracle(inst).is_some())
    } else if n <= limit {
        Some(three_sum_two_pointer(inst).is_some())
    } else {
        None
    }
}

fn oracle_k(inst: &KLdtInstance, limit: usize) -> Option<bool> {
    let n = inst.a().len();
    let tuples = (n as f64).powi(inst.k() as i32);
    (n <= limit && tuples <= KLDT_ORACLE_TUPLES).then(|| k_ldt_oracle(inst).is_some())
}

fn run_one(cfg: &Config, inst: &Inst, n: usize, trial: usize, seed: u64) -> Result<RunRecord> {
    let mut ledger = ComparisonLedger::new();
    let start = Instant::now();
    let (witness, g, k) = match (cfg.algo, inst) {
        (Algo::Brute, Inst::Three(i)) => (solve_brute(i, &mut ledger)?, None, 3),
        (Algo::Quad, Inst::Three(i)) => (solve_quadratic(i, &mut ledger)?, None, 3),
        (Algo::Gp, Inst::Three(i)) => {
            let out = run_gp(i, &GpConfig { g: cfg.g, audit: false }, &mut ledger)?;
            (out.witness, Some(out.stats.g), 3)
        }
        (Algo::Rfc, Inst::Three(i)) => {
            let out = run_rfc(i, &RfcConfig { g: cfg.g, ..RfcConfig::default() }, seed, &mut ledger)?;
            (out.witness, Some(out.stats.g), 3)
        }
        (Algo::Subq, Inst::Three(i)) => {
            let g = match cfg.g {
                BlockSize::Fixed(g) => g,
                BlockSize::Auto => 2,
            };
            (run_subq(i, g, &mut ledger)?.witness, Some(g), 3)
        }
        (Algo::Kldt, Inst::K(i)) => {
            let out = run_kldt(i, cfg.g, seed, &mut ledger)?;
            (out.witness, Some(out.stats.g), i.k())
        }
        _ => return Err(Error::InvalidArgument("instance kind does not match the algorithm".into())),
    };
    let wall_ns = if cfg.timing { start.elapsed().as_nanos() as u64 } else { 0 };
    let (valid, expected) = match inst {
        Inst::Three(i) => (witness.as_ref().is_none_or(|w| i.verifies(w)), oracle3(i, cfg.oracle_limit)),
        Inst::K(i) => (witness.as_ref().is_none_or(|w| i.verifies(w)), oracle_k(i, cfg.oracle_limit)),
    };
    let oracle = match expected {
        _ if !valid => OracleStatus::Mismatch,
        Some(e) if e == witness.is_some() => OracleStatus::Match,
        Some(_) => OracleStatus::Mismatch,
        None => OracleStatus::Skipped,
    };
    let snap = ledger.snapshot();
    Ok(RunRecord {
        algo: cfg.algo,
        dist: if cfg.input.is_some() { "input".into() } else { cfg.dist.name().into() },
        n,
        g,
        k,
        seed: cfg.seed,
        trial,
        comparisons_total: snap.total,
        comparisons_per_phase: snap.phase_summary(),
        max_arity: snap.max_arity,
        witness_found: witness.is_some(),
        oracle,
        wall_ns,
    })
}

/// Runs the `(n, trial)` grid in key order.
pub fn run(cfg: &Config) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    if let Some(input) = &cfg.input {
        let (inst, n) = match input {
            AnyInstance::ThreeSum(i) => (Inst::Three(i.clone()), i.size()),
            AnyInstance::KLdt(i) => (Inst::K(i.clone()), i.a().len()),
        };
        return Ok(vec![run_one(cfg, &inst, n, 0, cfg.seed)?]);
    }
    let mut ns = cfg.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut out = Vec::with_capacity(ns.len() * cfg.trials);
    for &n in &ns {
        for trial in 0..cfg.trials {
            let seed = trial_seed(cfg.seed, n, trial);
            let inst = if cfg.algo == Algo::Kldt {
                Inst::K(generate_kldt(cfg.k, n, seed, cfg.alphas.as_deref())?)
            } else {
                Inst::Three(generate(cfg.dist, n, seed)?)
            };
            out.push(run_one(cfg, &inst, n, trial, seed)?);
        }
    }
    Ok(out)
}

pub fn has_mismatch(records: &[RunRecord]) -> bool {
    records.iter().any(|r| r.oracle == OracleStatus::Mismatch)
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn write_json<W: Write>(records: &[RunRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out).map_err(|e| Error::Format(e.to_string()))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn power_law_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::InsufficientData("need two or more positive points".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values equal".into()));
    }
    Ok(sxy / sxx)
}

/// Mean total comparisons per `n`, in increasing `n`.
pub fn mean_by_n(records: &[RunRecord]) -> Vec<(usize, f64, usize)> {
    let mut groups: BTreeMap<usize, (u128, usize)> = BTreeMap::new();
    for r in records {
        let e = groups.entry(r.n).or_default();
        e.0 += r.comparisons_total as u128;
        e.1 += 1;
    }
    groups.into_iter().map(|(n, (sum, c))| (n, sum as f64 / c as f64, c)).collect()
}

/// Slope of log mean comparisons against log `n`. Needs at least three
/// distinct `n` with five or more records each.
pub fn fit_exponent(records: &[RunRecord]) -> Result<f64> {
    let means = mean_by_n(records);
    if means.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct n, need 3", means.len())));
    }
    if let Some(&(n, _, c)) = means.iter().find(|m| m.2 < 5) {
        return Err(Error::InsufficientData(format!("n = {n} has {c} trials, need 5")));
    }
    power_law_slope(&means.iter().map(|&(n, m, _)| (n as f64, m)).collect::<Vec<_>>())
}
