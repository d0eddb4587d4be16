//! Acceptance suite. Runs every criterion in sequence, prints one
//! `PASS`/`FAIL` line per criterion and exits non-zero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumlab::baseline::{contour, solve_quadratic};
use sumlab::dominance::{report_dominances, PointSet};
use sumlab::experiment::{fit_exponent, mean_by_n, run, Algo, Config};
use sumlab::gp_tree::{run_gp, GpConfig};
use sumlab::instance::{
    generate, generate_distinct_sums, generate_kldt, k_ldt_oracle, three_sum_oracle, Distribution,
};
use sumlab::ksum::run_kldt;
use sumlab::rfc_tree::{run_rfc, RfcConfig};
use sumlab::subq::{build_profiles, solve_subq};
use sumlab::{BlockSize, ComparisonLedger, ThreeSumInstance};

const DISTS: [Distribution; 3] = [Distribution::Uniform, Distribution::Planted, Distribution::NoSolutionParity];

/// Size-growth grid shared by the two growth criteria.
const GROWTH_NS: [usize; 5] = [1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// `n` in `[lo, hi]`, log-uniform so that small and large sizes are both common.
fn log_uniform(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    let x: f64 = rng.gen_range((lo as f64).ln()..=((hi + 1) as f64).ln());
    (x.exp() as usize).clamp(lo, hi)
}

fn oracle_equivalence() -> Outcome {
    // one extra instance per family covers n = 3, where subq cannot use g = 4
    const PER_DIST: usize = 1001;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11);
    let mut checked = [[0usize; 3]; 6];
    let mut mismatches = Vec::new();
    for (di, dist) in DISTS.into_iter().enumerate() {
        for t in 0..PER_DIST {
            let n = match t {
                0 => 3,
                1 => 512,
                _ => log_uniform(&mut rng, 4, 512),
            };
            let seed = rng.gen();
            let inst = generate(dist, n, seed).unwrap();
            let want = three_sum_oracle(&inst).is_some();
            let mut check = |slot: usize, name: String, got: Option<sumlab::Witness>| {
                checked[slot][di] += 1;
                let valid = got.as_ref().map_or(true, |w| inst.verifies(w));
                if got.is_some() != want || !valid {
                    mismatches.push(format!("{name} {} n={n} seed={seed}", dist.name()));
                }
            };
            check(0, "quad".into(), solve_quadratic(&inst, &mut ComparisonLedger::new()).unwrap());
            let gp = run_gp(&inst, &GpConfig::default(), &mut ComparisonLedger::new()).unwrap();
            check(1, "gp".into(), gp.witness);
            let rfc = run_rfc(&inst, &RfcConfig::default(), seed, &mut ComparisonLedger::new()).unwrap();
            check(2, "rfc".into(), rfc.witness);
            for g in (2..=4).filter(|&g| g <= n) {
                let got = solve_subq(&inst, g, &mut ComparisonLedger::new()).unwrap();
                check(1 + g, format!("subq g={g}"), got);
            }
        }
    }
    let fewest = checked.iter().flatten().copied().min().unwrap_or(0);
    let detail = format!(
        "runs per family quad/gp/rfc/subq(g=2,3,4) = {:?}, fewest {fewest} (>= 1000), mismatches={} {:?}",
        checked,
        mismatches.len(),
        mismatches.iter().take(5).collect::<Vec<_>>()
    );
    Outcome::new(mismatches.is_empty() && fewest >= 1000, detail)
}

fn arity_caps() -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    for dist in DISTS {
        for n in [16, 64, 256, 1024] {
            for seed in 0..3 {
                let inst = generate(dist, n, seed).unwrap();
                let mut l = ComparisonLedger::new();
                run_gp(&inst, &GpConfig::default(), &mut l).unwrap();
                runs += 1;
                if l.max_arity() != 4 {
                    bad.push(format!("gp {} n={n} seed={seed}: {}", dist.name(), l.max_arity()));
                }
                let mut l = ComparisonLedger::new();
                run_rfc(&inst, &RfcConfig::default(), seed, &mut l).unwrap();
                runs += 1;
                if l.max_arity() != 4 {
                    bad.push(format!("rfc {} n={n} seed={seed}: {}", dist.name(), l.max_arity()));
                }
            }
        }
    }
    for seed in 0..40u64 {
        let n = 10 + (seed as usize % 16);
        let inst = generate_kldt(5, n, seed, None).unwrap();
        let mut l = ComparisonLedger::new();
        run_kldt(&inst, BlockSize::Auto, seed, &mut l).unwrap();
        runs += 1;
        if l.max_arity() != 8 {
            bad.push(format!("kldt k=5 n={n} seed={seed}: {}", l.max_arity()));
        }
    }
    Outcome::new(bad.is_empty(), format!("{runs} runs, gp/rfc arity 4, k=5 arity 8, violations {bad:?}"))
}

fn growth(algo: Algo, trials: usize, seed: u64) -> (f64, Vec<(usize, f64, usize)>) {
    let mut cfg = Config::new(algo, GROWTH_NS.to_vec());
    cfg.dist = Distribution::NoSolutionParity;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.oracle_limit = 0;
    let records = run(&cfg).unwrap();
    (fit_exponent(&records).unwrap(), mean_by_n(&records))
}

fn rfc_growth() -> Outcome {
    let budget = Duration::from_secs(15 * 60);
    let start = Instant::now();
    let (rfc, rfc_means) = growth(Algo::Rfc, 10, 3);
    let (quad, _) = growth(Algo::Quad, 5, 3);
    let elapsed = start.elapsed();
    let pass = rfc <= 1.65 && quad >= 1.85 && elapsed <= budget;
    let means: Vec<String> = rfc_means.iter().map(|(n, m, t)| format!("{n}:{m:.0}x{t}")).collect();
    Outcome::new(
        pass,
        format!("rfc slope {rfc:.4} (<= 1.65), quad slope {quad:.4} (>= 1.85), means [{}], {elapsed:.0?} (<= 15 min)", means.join(" ")),
    )
}

fn gp_growth() -> Outcome {
    let (gp, means) = growth(Algo::Gp, 5, 4);
    let means: Vec<String> = means.iter().map(|(n, m, t)| format!("{n}:{m:.0}x{t}")).collect();
    Outcome::new(gp <= 1.7, format!("gp slope {gp:.4} (<= 1.7), means [{}]", means.join(" ")))
}

fn free_box_orders() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x05);
    let (mut built, mut delta, mut audited, mut mismatched) = (0u64, 0u64, 0u64, 0u64);
    for t in 0..300 {
        let dist = DISTS[t % 3];
        let n = rng.gen_range(3..=256);
        let inst = generate(dist, n, rng.gen()).unwrap();
        let gp = run_gp(&inst, &GpConfig { g: BlockSize::Auto, audit: true }, &mut ComparisonLedger::new()).unwrap();
        built += gp.stats.box_orders_built;
        delta += gp.stats.box_order_ledger_delta;
        audited += gp.stats.audited_boxes;
        mismatched += gp.stats.audit_mismatches;
        let cfg = RfcConfig { audit: true, ..RfcConfig::default() };
        let rfc = run_rfc(&inst, &cfg, t as u64, &mut ComparisonLedger::new()).unwrap();
        built += rfc.stats.box_orders_built;
        delta += rfc.stats.box_order_ledger_delta;
        audited += rfc.stats.audited_boxes;
        mismatched += rfc.stats.audit_mismatches;
    }
    for (n, seed) in [(1024, 1), (2048, 2), (4096, 3)] {
        let inst = generate(Distribution::Uniform, n, seed).unwrap();
        let gp = run_gp(&inst, &GpConfig::default(), &mut ComparisonLedger::new()).unwrap();
        built += gp.stats.box_orders_built;
        delta += gp.stats.box_order_ledger_delta;
        let rfc = run_rfc(&inst, &RfcConfig::default(), seed, &mut ComparisonLedger::new()).unwrap();
        built += rfc.stats.box_orders_built;
        delta += rfc.stats.box_order_ledger_delta;
    }
    Outcome::new(
        delta == 0 && mismatched == 0 && audited > 0,
        format!("{built} box orders, ledger delta {delta}, {audited} audited against a direct sort, {mismatched} mismatches"),
    )
}

fn contour_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x06);
    let mut violations = 0;
    let mut shared = 0;
    for _ in 0..1000 {
        let range = rng.gen_range(1..=1000i64);
        let mut a: Vec<i64> = (0..rng.gen_range(1..=48)).map(|_| rng.gen_range(-range..=range)).collect();
        let mut b: Vec<i64> = (0..rng.gen_range(1..=48)).map(|_| rng.gen_range(-range..=range)).collect();
        a.sort_unstable();
        b.sort_unstable();
        let x = rng.gen_range(-3 * range..3 * range);
        let y = rng.gen_range(x + 1..=3 * range);
        let cx = contour(x, &a, &b, &mut ComparisonLedger::new()).unwrap();
        let cy = contour(y, &a, &b, &mut ComparisonLedger::new()).unwrap();
        for col in 0..b.len() {
            if let (Some((xlo, xhi)), Some((ylo, yhi))) = (cx.rows_in_column(col), cy.rows_in_column(col)) {
                shared += 1;
                if xlo > ylo || xhi > yhi {
                    violations += 1;
                }
            }
        }
    }
    Outcome::new(violations == 0, format!("1000 triples, {shared} shared columns, {violations} violations"))
}

fn cascading_structure() -> Outcome {
    let g = 64;
    let cfg = RfcConfig { g: BlockSize::Fixed(g), p: 0.25, gap_census: true, ..RfcConfig::default() };
    let (mut aug, mut brackets, mut lines, mut gaps, mut gap_lines, mut contiguity) = (0.0, 0u64, 0u64, 0u64, 0u64, 0);
    let seeds = 100;
    for seed in 0..seeds {
        let inst = generate(Distribution::Uniform, 2048, seed).unwrap();
        let out = run_rfc(&inst, &cfg, seed, &mut ComparisonLedger::new()).unwrap();
        aug += out.stats.mean_augmented_size();
        brackets += out.stats.brackets;
        lines += out.stats.gap_lines;
        gaps += out.stats.sampled_gaps;
        gap_lines += out.stats.sampled_gap_lines;
        contiguity += out.stats.contiguity_violations;
    }
    let aug = aug / seeds as f64;
    let per_query = lines as f64 / brackets.max(1) as f64;
    let per_gap = gap_lines as f64 / gaps.max(1) as f64;
    let size_ok = (g as f64..=1.5 * g as f64).contains(&aug);
    let gap_ok = per_query <= 4.0;
    Outcome::new(
        size_ok && gap_ok && contiguity == 0,
        format!(
            "g={g} p=1/4 {seeds} seeds: mean augmented size {aug:.2} in [{g}, {}] {}; mean |R_c| per query {per_query:.3} (<= 4) {}; mean rows per sampled gap {per_gap:.3}; contiguity violations {contiguity}",
            1.5 * g as f64,
            if size_ok { "ok" } else { "out of range" },
            if gap_ok { "ok" } else { "exceeded" },
        ),
    )
}

/// Cells of box `(i, j)` sorted by their sums, ties by row then column.
fn direct_order(inst: &ThreeSumInstance, g: usize, i: usize, j: usize) -> Vec<(usize, usize)> {
    let rows = (i * g..((i + 1) * g).min(inst.a().len())).count();
    let cols = (j * g..((j + 1) * g).min(inst.b().len())).count();
    let mut cells: Vec<(usize, usize)> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
    cells.sort_by_key(|&(r, c)| (inst.a()[i * g + r] as i128 + inst.b()[j * g + c] as i128, r, c));
    cells
}

fn firing_count() -> Outcome {
    let mut bad = Vec::new();
    let mut boxes = 0;
    for g in 2..=4usize {
        let largest = 1024 / g * g;
        for (n, seed) in [(12 * g, 1), (12 * g, 2), (60, 3), (240, 4), (largest, 5)] {
            let inst = generate_distinct_sums(n, seed).unwrap();
            let p = build_profiles(&inst, g).unwrap();
            let expected = (p.h * (n / g) * (n / g)) as u64;
            if p.firings != expected {
                bad.push(format!("g={g} n={n}: {} firings, expected {expected}", p.firings));
            }
            for i in 0..p.rows {
                for j in 0..p.cols {
                    boxes += 1;
                    let bx = p.get(i, j);
                    let want = direct_order(&inst, g, i, j);
                    let groups_ok = bx.group_perms.len() == p.h
                        && bx.group_perms.iter().enumerate().all(|(k, grp)| {
                            let lo = (k * p.s).min(want.len());
                            *grp == want[lo..(lo + p.s).min(want.len())]
                        });
                    if !groups_ok {
                        bad.push(format!("g={g} n={n} box ({i}, {j}) differs from direct sort"));
                    }
                }
            }
        }
    }
    Outcome::new(bad.is_empty(), format!("{boxes} boxes, failures {:?}", bad.iter().take(5).collect::<Vec<_>>()))
}

fn brute_dominances(ps: &PointSet) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..ps.red_len() {
        for b in 0..ps.blue_len() {
            if ps.red(r).iter().zip(ps.blue(b)).all(|(x, y)| x >= y) {
                out.push((r, b));
            }
        }
    }
    out
}

fn dominance_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x09);
    let mut mismatches = 0;
    let mut pairs = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=16);
        let total = rng.gen_range(0..=512);
        let red_len = rng.gen_range(0..=total);
        let range = if rng.gen_bool(0.5) { 4 } else { 1 << 40 };
        let mut draw = |len: usize| -> Vec<Vec<i64>> {
            (0..len).map(|_| (0..d).map(|_| rng.gen_range(-range..=range)).collect()).collect()
        };
        let red = draw(red_len);
        let blue = draw(total - red_len);
        let ps = PointSet::new(d, &red, &blue).unwrap();
        let want = brute_dominances(&ps);
        pairs += want.len();
        if report_dominances(&ps).unwrap() != want {
            mismatches += 1;
        }
    }
    Outcome::new(mismatches == 0, format!("1000 point sets, {pairs} dominating pairs, {mismatches} mismatches"))
}

fn kldt_end_to_end() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10);
    let (mut found, mut mismatches) = (0, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=25);
        let seed = rng.gen();
        let inst = generate_kldt(5, n, seed, None).unwrap();
        let want = k_ldt_oracle(&inst).is_some();
        let got = run_kldt(&inst, BlockSize::Auto, seed, &mut ComparisonLedger::new()).unwrap().witness;
        found += want as usize;
        if got.is_some() != want || got.as_ref().is_some_and(|w| !inst.verifies(w)) {
            mismatches += 1;
        }
    }
    Outcome::new(mismatches == 0, format!("1000 draws (k=5, n<=25), {found} with a zero, {mismatches} mismatches"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("oracle equivalence", oracle_equivalence, Some(Duration::from_secs(5 * 60))),
        ("arity caps", arity_caps, None),
        ("rfc growth", rfc_growth, None),
        ("gp growth", gp_growth, None),
        ("free box sorting", free_box_orders, None),
        ("contour monotonicity", contour_monotonicity, None),
        ("fractional cascading structure", cascading_structure, None),
        ("dominance firing count", firing_count, None),
        ("dominance engine", dominance_engine, None),
        ("k-LDT end to end", kldt_end_to_end, None),
    ];
    let mut failed = 0;
    for (idx, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut out = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                out.pass = false;
                out.detail.push_str(&format!(", over the {limit:?} budget"));
            }
        }
        failed += !out.pass as usize;
        println!("{} criterion {:>2} {name}: {} [{elapsed:.1?}]", if out.pass { "PASS" } else { "FAIL" }, idx + 1, out.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
