use proptest::prelude::*;
use sumlab::baseline::{contour, solve_quadratic};
use sumlab::dominance::{report_dominances, CellLess, PointSet};
use sumlab::gp_tree::{gp_box_orders, run_gp, GpConfig};
use sumlab::instance::{generate, generate_distinct_sums, generate_kldt, k_ldt_oracle, Distribution};
use sumlab::ksum::solve_kldt;
use sumlab::rfc_tree::{run_rfc, RfcConfig};
use sumlab::subq::{build_profiles, enumerate_in, group_params};
use sumlab::{BlockSize, ComparisonLedger, Scalar, ThreeSumInstance};

fn sorted_vec(len: std::ops::RangeInclusive<usize>, range: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-range..=range, len).prop_map(|mut v| {
        v.sort_unstable();
        v
    })
}

fn instance(min_len: usize, max_len: usize) -> impl Strategy<Value = ThreeSumInstance> {
    prop_oneof![Just(8i64), Just(1000), Just(1 << 40)].prop_flat_map(move |r| {
        let len = min_len..=max_len;
        (sorted_vec(len.clone(), r), sorted_vec(len.clone(), r), sorted_vec(len, r))
            .prop_map(|(a, b, c)| ThreeSumInstance::new(a, b, c).unwrap())
    })
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

fn point_set(max_points: usize) -> impl Strategy<Value = (usize, Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    (1usize..=16, prop_oneof![Just(3i64), Just(1 << 40)]).prop_flat_map(move |(d, r)| {
        let pt = prop::collection::vec(-r..=r, d);
        (Just(d), prop::collection::vec(pt.clone(), 0..=max_points), prop::collection::vec(pt, 0..=max_points))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn contour_of_smaller_value_stays_above(
        a in sorted_vec(1..=40, 200),
        b in sorted_vec(1..=40, 200),
        x in -700i64..700,
        gap in 1i64..400,
    ) {
        let y = x + gap;
        let cx = contour(x, &a, &b, &mut ComparisonLedger::new()).unwrap();
        let cy = contour(y, &a, &b, &mut ComparisonLedger::new()).unwrap();
        prop_assert!(cx.positions.len() <= a.len() + b.len());
        for col in 0..b.len() {
            if let (Some((xlo, xhi)), Some((ylo, yhi))) = (cx.rows_in_column(col), cy.rows_in_column(col)) {
                prop_assert!(xlo <= ylo && xhi <= yhi, "column {col}: x rows {xlo}..={xhi}, y rows {ylo}..={yhi}");
            }
        }
    }

    #[test]
    fn box_orders_equal_direct_sort(inst in instance(8, 40), g in prop::sample::select(vec![2usize, 4, 8])) {
        let run = gp_box_orders(&inst, BlockSize::Fixed(g), &mut ComparisonLedger::new()).unwrap();
        let blocks = |len: usize| len.div_ceil(g);
        let (ra, rb) = (blocks(inst.a().len()), blocks(inst.b().len()));
        prop_assert_eq!(run.box_orders.len(), ra * rb);
        for i in 0..ra {
            for j in 0..rb {
                let rows: Vec<usize> = (i * g..((i + 1) * g).min(inst.a().len())).collect();
                let cols: Vec<usize> = (j * g..((j + 1) * g).min(inst.b().len())).collect();
                let mut want: Vec<(usize, usize)> =
                    (0..rows.len()).flat_map(|r| (0..cols.len()).map(move |c| (r, c))).collect();
                want.sort_by_key(|&(r, c)| (inst.a()[rows[r]] as i128 + inst.b()[cols[c]] as i128, rows[r], cols[c]));
                let got: Vec<(usize, usize)> = run.box_orders[i * rb + j].cells().collect();
                prop_assert_eq!(got, want, "box ({}, {})", i, j);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dominance_equals_brute_force((d, red, blue) in point_set(120)) {
        let ps = PointSet::new(d, &red, &blue).unwrap();
        prop_assert_eq!(report_dominances(&ps).unwrap(), brute_dominances(&ps));
    }

    #[test]
    fn swapping_colors_transposes_pairs((d, red, blue) in point_set(80)) {
        let neg = |pts: &[Vec<i64>]| pts.iter().map(|p| p.iter().map(|&x| -x).collect()).collect::<Vec<Vec<i64>>>();
        let forward = report_dominances(&PointSet::new(d, &red, &blue).unwrap()).unwrap();
        let swapped = report_dominances(&PointSet::new(d, &neg(&blue), &neg(&red)).unwrap()).unwrap();
        let mut transposed: Vec<(usize, usize)> = swapped.into_iter().map(|(b, r)| (r, b)).collect();
        transposed.sort_unstable();
        prop_assert_eq!(forward, transposed);
    }

    #[test]
    fn algorithms_agree_with_quadratic_scan(inst in instance(1, 48), seed in any::<u64>()) {
        let want = solve_quadratic(&inst, &mut ComparisonLedger::new()).unwrap().is_some();
        let gp = run_gp(&inst, &GpConfig::default(), &mut ComparisonLedger::new()).unwrap();
        prop_assert_eq!(gp.witness.is_some(), want);
        let rfc = run_rfc(&inst, &RfcConfig::default(), seed, &mut ComparisonLedger::new()).unwrap();
        prop_assert_eq!(rfc.witness.is_some(), want);
        for w in gp.witness.iter().chain(&rfc.witness) {
            prop_assert!(inst.verifies(w));
        }
    }

    #[test]
    fn parity_instances_have_no_witness(n in 1usize..200, seed in any::<u64>()) {
        let inst = generate(Distribution::NoSolutionParity, n, seed).unwrap();
        prop_assert!(solve_quadratic(&inst, &mut ComparisonLedger::new()).unwrap().is_none());
        prop_assert!(run_gp(&inst, &GpConfig::default(), &mut ComparisonLedger::new()).unwrap().witness.is_none());
        prop_assert!(run_rfc(&inst, &RfcConfig::default(), seed, &mut ComparisonLedger::new()).unwrap().witness.is_none());
    }

    #[test]
    fn replay_gives_identical_snapshots(n in 2usize..300, seed in any::<u64>()) {
        let inst = generate(Distribution::Uniform, n, seed).unwrap();
        let once = |s: u64| {
            let mut l = ComparisonLedger::new();
            let out = run_rfc(&inst, &RfcConfig::default(), s, &mut l).unwrap();
            (out.witness, l.snapshot())
        };
        prop_assert_eq!(once(seed), once(seed));
    }

    #[test]
    fn kldt_matches_exhaustive_search(k in prop::sample::select(vec![3usize, 5]), n in 1usize..=14, seed in any::<u64>()) {
        let inst = generate_kldt(k, n, seed, None).unwrap();
        let mut l = ComparisonLedger::new();
        let got = solve_kldt(&inst, BlockSize::Auto, seed, &mut l).unwrap();
        prop_assert_eq!(got.is_some(), k_ldt_oracle(&inst).is_some());
        if let Some(w) = got {
            prop_assert!(inst.verifies(&w));
        }
        prop_assert!(l.max_arity() <= 2 * k - 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn profile_splits_are_rank_cells(g in 2usize..=4, blocks in 1usize..=6, seed in any::<u64>()) {
        let n = g * blocks;
        let inst = generate_distinct_sums(n, seed).unwrap();
        let p = build_profiles(&inst, g).unwrap();
        let (s, h) = group_params(g);
        prop_assert!(h * s >= g * g);
        prop_assert_eq!(p.firings, (h * blocks * blocks) as u64);
        for i in 0..blocks {
            for j in 0..blocks {
                let mut want: Vec<(usize, usize)> = (0..g).flat_map(|r| (0..g).map(move |c| (r, c))).collect();
                want.sort_by_key(|&(r, c)| inst.a()[i * g + r] as i128 + inst.b()[j * g + c] as i128);
                let bx = p.get(i, j);
                for (k, &cell) in bx.split_positions.iter().enumerate() {
                    prop_assert_eq!(cell, want[(k + 1) * s], "box ({}, {}) split {}", i, j, k);
                }
                prop_assert_eq!(bx.order(), want);
            }
        }
    }

    /// Among the partial contours that have `p` as a corner, exactly one
    /// passes all cell tests against `p`; its row prefixes hold only smaller
    /// cells and everything after them is at least `p`.
    #[test]
    fn defining_cell_selects_one_contour(
        rows in 1usize..=4,
        cols in 1usize..=4,
        seed in any::<u64>(),
        pick in any::<prop::sample::Index>(),
    ) {
        let inst = generate_distinct_sums(rows.max(cols), seed).unwrap();
        let a: Vec<Scalar> = inst.a()[..rows].to_vec();
        let b: Vec<Scalar> = inst.b()[..cols].to_vec();
        let value = |(r, c): (usize, usize)| a[r] as i128 + b[c] as i128;
        let p = (pick.index(rows * cols) / cols, pick.index(rows * cols) % cols);
        let holds = |t: &CellLess| t.red(&b) >= t.blue(&a);
        let mut accepted = Vec::new();
        for sum in 0..=rows * cols {
            for mu in enumerate_in(rows, cols, sum) {
                if mu.corners(rows, cols).contains(&p) && mu.tests(p, rows, cols).iter().all(holds) {
                    accepted.push(mu);
                }
            }
        }
        prop_assert_eq!(accepted.len(), 1);
        let mu = &accepted[0];
        for r in 0..rows {
            for c in 0..cols {
                if c < mu.width(r) {
                    prop_assert!(value((r, c)) < value(p), "prefix cell ({r}, {c})");
                } else {
                    prop_assert!(value((r, c)) >= value(p), "suffix cell ({r}, {c})");
                }
            }
        }
    }
}

/// The difference sort is a comparison sort, so its cost per difference
/// grows like `log(n g)`; over a 64-fold range of `n g` that keeps the
/// log-log slope near 1.
#[test]
fn difference_sort_cost_grows_almost_linearly() {
    let points: Vec<(f64, f64)> = [256usize, 1024, 4096]
        .iter()
        .map(|&n| {
            let inst = generate(Distribution::Uniform, n, 7).unwrap();
            let g = (n as f64).sqrt() as usize;
            let mut l = ComparisonLedger::new();
            gp_box_orders(&inst, BlockSize::Fixed(g), &mut l).unwrap();
            ((n * g) as f64, l.phase("sort-D").count as f64)
        })
        .collect();
    let slope = sumlab::experiment::power_law_slope(&points).unwrap();
    assert!(slope <= 1.15, "sort-D against n*g: {points:?}, slope {slope:.3}");
}
