//! The deterministic uniform-model algorithm built on partial contours.
//!
//! Every box is cut by value rank into `h` groups of at most `s` cells. For a
//! threshold cell `P`, the cells of a box below `P` form a staircase (a
//! partial contour: a weakly decreasing count of cells per row, rows from the
//! top). Guessing the two staircases that bound a group, their threshold
//! cells, and the order of the cells in between gives a conjunction of cell
//! comparisons, which [`crate::dominance`] evaluates for all boxes at once.
//! Each box and group fires for exactly one guess.
//!
//! A query then needs one binary search over the `h` group minima and one
//! inside a group.

use std::cmp::Ordering;

use serde::Serialize;

use crate::dominance::{firing_boxes, CellLess};
use crate::error::{Error, Result};
use crate::fredman::BlockPartition;
use crate::gp_tree::{trace_paths, Traced};
use crate::instance::{Scalar, ThreeSumInstance, Witness};
use crate::ledger::{phase, ComparisonLedger};
use crate::operand::{sign3, SumProblem};
use crate::ceil_log2;

/// `(s, h)` with `s = ceil(g / log2 g)` and `h = ceil(g^2 / s)`, for `g >= 2`.
pub fn group_params(g: usize) -> (usize, usize) {
    assert!(g >= 2, "group parameters need g >= 2");
    let s = (g as f64 / (g as f64).log2()).ceil() as usize;
    (s, (g * g).div_ceil(s))
}

/// Columns (1-indexed) of the staircase entries, one per row from the top,
/// weakly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialContour {
    pub entries: Vec<usize>,
}

impl PartialContour {
    /// `(row, col)` positions, 1-indexed.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        self.entries.iter().enumerate().map(|(r, &c)| (r + 1, c)).collect()
    }

    pub fn column_sum(&self) -> usize {
        self.entries.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    /// Cells strictly below the threshold in row `r` (0-indexed).
    pub fn width(&self, r: usize) -> usize {
        self.entries.get(r).copied().unwrap_or(0)
    }

    pub fn is_valid(&self, rows: usize, cols: usize) -> bool {
        self.entries.len() <= rows
            && self.entries.iter().all(|&c| (1..=cols).contains(&c))
            && self.entries.windows(2).all(|w| w[1] <= w[0])
    }

    /// Cells `(row, col)` (0-indexed) where the staircase can grow by one.
    pub fn corners(&self, rows: usize, cols: usize) -> Vec<(usize, usize)> {
        (0..rows)
            .filter(|&r| {
                let w = self.width(r);
                w < cols && (r == 0 || self.width(r - 1) > w)
            })
            .map(|r| (r, self.width(r)))
            .collect()
    }

    pub fn contains(&self, (r, c): (usize, usize)) -> bool {
        c < self.width(r)
    }

    /// Tests that hold iff this staircase is exactly the set of cells below
    /// threshold `p`: the last staircase cell of each row is below `p`, the
    /// next cell of the row is above it, and so is the first cell of the
    /// first empty row. The test that would compare `p` with itself is
    /// skipped.
    pub fn tests(&self, p: (usize, usize), rows: usize, cols: usize) -> Vec<CellLess> {
        let mut out = Vec::with_capacity(2 * self.rows() + 1);
        for (r, &w) in self.entries.iter().enumerate() {
            out.push(CellLess::new((r, w - 1), p));
            if w < cols && (r, w) != p {
                out.push(CellLess::new(p, (r, w)));
            }
        }
        let t = self.rows();
        if t < rows && (t, 0) != p {
            out.push(CellLess::new(p, (t, 0)));
        }
        out
    }
}

/// All valid partial contours of a `g x g` box with the given column sum.
pub fn enumerate_partial_contours(g: usize, column_sum: usize) -> Vec<PartialContour> {
    enumerate_in(g, g, column_sum)
}

/// All valid partial contours of a `rows x cols` box with the given column
/// sum, in lexicographic order of their entries.
pub fn enumerate_in(rows: usize, cols: usize, column_sum: usize) -> Vec<PartialContour> {
    fn go(rows: usize, max: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<PartialContour>) {
        if left == 0 {
            out.push(PartialContour { entries: cur.clone() });
            return;
        }
        if rows == 0 || left > rows * max {
            return;
        }
        for w in 1..=max.min(left) {
            cur.push(w);
            go(rows - 1, w, left - w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(rows, cols, column_sum, &mut Vec::new(), &mut out);
    out
}

/// One guess for group `k` of a box shape.
#[derive(Clone, Debug)]
struct Guess {
    k: usize,
    /// Cells of the group in ascending order; the first is the lower threshold.
    perm: Vec<(usize, usize)>,
    /// Upper threshold (smallest cell of the next group), if any.
    split: Option<(usize, usize)>,
    tests: Vec<CellLess>,
}

/// Orders of the cells of `cells` compatible with sorted rows and columns,
/// starting with `first`.
fn linear_extensions(cells: &[(usize, usize)], first: (usize, usize)) -> Vec<Vec<(usize, usize)>> {
    fn go(
        cells: &[(usize, usize)],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if cur.len() == cells.len() {
            out.push(cur.clone());
            return;
        }
        for t in 0..cells.len() {
            if used[t] {
                continue;
            }
            let (r, c) = cells[t];
            // a smaller neighbour inside the set must come first
            let blocked = cells.iter().enumerate().any(|(u, &x)| {
                !used[u] && u != t && ((r > 0 && x == (r - 1, c)) || (c > 0 && x == (r, c - 1)))
            });
            if blocked {
                continue;
            }
            used[t] = true;
            cur.push(cells[t]);
            go(cells, used, cur, out);
            cur.pop();
            used[t] = false;
        }
    }
    let Some(start) = cells.iter().position(|&c| c == first) else { return Vec::new() };
    let (r, c) = first;
    if cells.iter().any(|&x| (r > 0 && x == (r - 1, c)) || (c > 0 && x == (r, c - 1))) {
        return Vec::new();
    }
    let mut used = vec![false; cells.len()];
    used[start] = true;
    let mut out = Vec::new();
    go(cells, &mut used, &mut vec![first], &mut out);
    out
}

fn shape_guesses(rows: usize, cols: usize, s: usize) -> Vec<Guess> {
    let n = rows * cols;
    let mut out = Vec::new();
    for k in 0..n.div_ceil(s) {
        let (k1, k2) = (k * s, ((k + 1) * s).min(n));
        let lows = enumerate_in(rows, cols, k1);
        let highs = enumerate_in(rows, cols, k2);
        for lo in &lows {
            for hi in &highs {
                if (0..rows).any(|r| hi.width(r) < lo.width(r)) {
                    continue;
                }
                let cells: Vec<(usize, usize)> =
                    (0..rows).flat_map(|r| (lo.width(r)..hi.width(r)).map(move |c| (r, c))).collect();
                let splits: Vec<Option<(usize, usize)>> =
                    if k2 < n { hi.corners(rows, cols).into_iter().map(Some).collect() } else { vec![None] };
                for p1 in lo.corners(rows, cols) {
                    if !hi.contains(p1) {
                        continue;
                    }
                    let lo_tests = lo.tests(p1, rows, cols);
                    for &p2 in &splits {
                        let mut base = lo_tests.clone();
                        if let Some(p2) = p2 {
                            base.extend(hi.tests(p2, rows, cols));
                        }
                        for perm in linear_extensions(&cells, p1) {
                            let mut tests = base.clone();
                            tests.extend(perm.windows(2).map(|w| CellLess::new(w[0], w[1])));
                            out.push(Guess { k, perm, split: p2, tests });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Group structure of one box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxProfile {
    pub rows: usize,
    pub cols: usize,
    pub s: usize,
    pub h: usize,
    /// Smallest cell of group `k + 1`, for every group but the last.
    pub split_positions: Vec<(usize, usize)>,
    /// Cells of each group in ascending order.
    pub group_perms: Vec<Vec<(usize, usize)>>,
}

impl BoxProfile {
    /// The whole box in ascending order.
    pub fn order(&self) -> Vec<(usize, usize)> {
        self.group_perms.concat()
    }
}

#[derive(Clone, Debug)]
pub struct Profiles {
    pub g: usize,
    pub s: usize,
    pub h: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major over the block grid.
    pub boxes: Vec<BoxProfile>,
    /// Guesses handed to the dominance engine.
    pub guesses: u64,
    /// Total dominating pairs reported.
    pub firings: u64,
}

impl Profiles {
    pub fn get(&self, i: usize, j: usize) -> &BoxProfile {
        &self.boxes[i * self.cols + j]
    }
}

fn check_g(g: usize, inst: &ThreeSumInstance) -> Result<()> {
    if !(2..=4).contains(&g) {
        return Err(Error::InvalidArgument(format!("block size must be 2, 3 or 4, got {g}")));
    }
    let max = inst.a().len().max(inst.b().len());
    if g > max.max(1) {
        return Err(Error::BlockSizeOutOfRange { g, max });
    }
    Ok(())
}

/// Builds every box profile through dominance reporting. Fails with
/// [`Error::Distinctness`] if some box and group does not fire exactly once.
pub fn build_profiles(inst: &ThreeSumInstance, g: usize) -> Result<Profiles> {
    check_g(g, inst)?;
    let (s, h) = group_params(g);
    let pa = BlockPartition::new(inst.a().len(), g);
    let pb = BlockPartition::new(inst.b().len(), g);
    let (ra, rb) = (pa.count(), pb.count());
    let mut hit: Vec<Vec<Option<usize>>> = Vec::with_capacity(ra * rb);
    let mut counts: Vec<Vec<usize>> = Vec::with_capacity(ra * rb);
    for i in 0..ra {
        for j in 0..rb {
            let groups = (pa.block(i).len() * pb.block(j).len()).div_ceil(s);
            hit.push(vec![None; groups]);
            counts.push(vec![0; groups]);
        }
    }
    let mut row_shapes: Vec<usize> = pa.blocks().map(|r| r.len()).collect();
    let mut col_shapes: Vec<usize> = pb.blocks().map(|r| r.len()).collect();
    row_shapes.dedup();
    col_shapes.dedup();
    let mut tables: Vec<Vec<Guess>> = Vec::new();
    let (mut guesses, mut firings) = (0u64, 0u64);
    for &rows in &row_shapes {
        for &cols in &col_shapes {
            let a_ids: Vec<usize> = (0..ra).filter(|&i| pa.block(i).len() == rows).collect();
            let b_ids: Vec<usize> = (0..rb).filter(|&j| pb.block(j).len() == cols).collect();
            let a_blocks: Vec<&[Scalar]> = a_ids.iter().map(|&i| &inst.a()[pa.block(i)]).collect();
            let b_blocks: Vec<&[Scalar]> = b_ids.iter().map(|&j| &inst.b()[pb.block(j)]).collect();
            let table = shape_guesses(rows, cols, s);
            let t_id = tables.len();
            for (gi, guess) in table.iter().enumerate() {
                guesses += 1;
                for (x, y) in firing_boxes(&guess.tests, &a_blocks, &b_blocks)? {
                    firings += 1;
                    let b = a_ids[x] * rb + b_ids[y];
                    counts[b][guess.k] += 1;
                    hit[b][guess.k] = Some(t_id << 32 | gi);
                }
            }
            tables.push(table);
        }
    }
    let mut boxes = Vec::with_capacity(ra * rb);
    for (b, per_group) in hit.into_iter().enumerate() {
        let (i, j) = (b / rb, b % rb);
        for (k, &c) in counts[b].iter().enumerate() {
            if c != 1 {
                return Err(Error::Distinctness { i, j, k, fired: c });
            }
        }
        let mut split_positions = Vec::new();
        let mut group_perms = Vec::new();
        for id in per_group.into_iter().map(|x| x.expect("fired once")) {
            let guess = &tables[id >> 32][id & 0xffff_ffff];
            group_perms.push(guess.perm.clone());
            if let Some(p) = guess.split {
                split_positions.push(p);
            }
        }
        let (rows, cols) = (pa.block(i).len(), pb.block(j).len());
        boxes.push(BoxProfile { rows, cols, s, h: group_perms.len(), split_positions, group_perms });
    }
    Ok(Profiles { g, s, h, rows: ra, cols: rb, boxes, guesses, firings })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SubqStats {
    pub g: usize,
    pub s: usize,
    pub h: usize,
    pub guesses: u64,
    pub firings: u64,
    pub box_probes: u64,
    /// Most comparisons spent in one box probe.
    pub max_probe: u64,
    /// `ceil(log2 h) + ceil(log2 s) + 2`.
    pub probe_bound: u64,
}

#[derive(Clone, Debug)]
pub struct SubqOutcome {
    pub witness: Option<Witness>,
    pub stats: SubqStats,
}

pub fn solve_subq(inst: &ThreeSumInstance, g: usize, ledger: &mut ComparisonLedger) -> Result<Option<Witness>> {
    Ok(run_subq(inst, g, ledger)?.witness)
}

pub fn run_subq(inst: &ThreeSumInstance, g: usize, ledger: &mut ComparisonLedger) -> Result<SubqOutcome> {
    check_g(g, inst)?;
    let (s, h) = group_params(g);
    let mut stats = SubqStats { g, s, h, probe_bound: (ceil_log2(h) + ceil_log2(s) + 2) as u64, ..SubqStats::default() };
    let p = SumProblem::from_instance(inst);
    p.charge_input_sort(ledger)?;
    if p.is_degenerate() {
        return Ok(SubqOutcome { witness: None, stats });
    }
    let profiles = build_profiles(inst, g)?;
    stats.guesses = profiles.guesses;
    stats.firings = profiles.firings;
    let pa = BlockPartition::new(p.a.len(), g);
    let pb = BlockPartition::new(p.b.len(), g);
    let paths = match trace_paths(&p, &pa, &pb, ledger)? {
        Traced::Witness(i, j, l) => return Ok(SubqOutcome { witness: Some(inst.witness(i, j, l)), stats }),
        Traced::Paths(paths) => paths,
    };
    for i in 0..pa.count() {
        for j in 0..pb.count() {
            let prof = profiles.get(i, j);
            let (r0, c0) = (pa.block(i).start, pb.block(j).start);
            for &l in paths.queries(i, j) {
                stats.box_probes += 1;
                let before = ledger.total();
                let hit = probe(&p, prof, r0, c0, l as usize, ledger)?;
                stats.max_probe = stats.max_probe.max(ledger.total() - before);
                if let Some((r, c)) = hit {
                    return Ok(SubqOutcome { witness: Some(inst.witness(r0 + r, c0 + c, l as usize)), stats });
                }
            }
        }
    }
    Ok(SubqOutcome { witness: None, stats })
}

/// Locates `-c_l` in a box: binary search over group minima, then inside
/// the one group that can hold it.
fn probe(
    p: &SumProblem,
    prof: &BoxProfile,
    r0: usize,
    c0: usize,
    l: usize,
    ledger: &mut ComparisonLedger,
) -> Result<Option<(usize, usize)>> {
    let mut sign = |(r, c): (usize, usize), label: &'static str| sign3(p, r0 + r, c0 + c, l, ledger, label);
    let (mut lo, mut hi) = (0usize, prof.group_perms.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        let cell = prof.group_perms[mid][0];
        match sign(cell, phase::PATH)? {
            Ordering::Less => lo = mid + 1,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return Ok(Some(cell)),
        }
    }
    if lo == 0 {
        return Ok(None);
    }
    let group = &prof.group_perms[lo - 1];
    let (mut a, mut b) = (1usize, group.len());
    while a < b {
        let mid = (a + b) / 2;
        match sign(group[mid], phase::BOX_SEARCH)? {
            Ordering::Less => a = mid + 1,
            Ordering::Greater => b = mid,
            Ordering::Equal => return Ok(Some(group[mid])),
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, three_sum_oracle, Distribution};

    #[test]
    fn parameters() {
        assert_eq!(group_params(2), (2, 2));
        assert_eq!(group_params(3), (2, 5));
        assert_eq!(group_params(4), (2, 8));
    }

    #[test]
    fn contour_enumeration_examples() {
        assert_eq!(enumerate_partial_contours(1, 1), vec![PartialContour { entries: vec![1] }]);
        assert_eq!(enumerate_partial_contours(1, 1)[0].positions(), vec![(1, 1)]);
        assert_eq!(enumerate_partial_contours(2, 0), vec![PartialContour { entries: vec![] }]);
        let total: usize = (0..=4).map(|k| enumerate_partial_contours(2, k).len()).sum();
        assert_eq!(total, 6);
        assert!(total <= 1 << 8);
    }

    #[test]
    fn enumerated_contours_are_valid() {
        for (rows, cols) in [(3, 3), (4, 4), (2, 4), (4, 1)] {
            for k in 0..=rows * cols {
                for pc in enumerate_in(rows, cols, k) {
                    assert!(pc.is_valid(rows, cols));
                    assert_eq!(pc.column_sum(), k);
                }
            }
        }
    }

    #[test]
    fn corners_of_staircase() {
        let pc = PartialContour { entries: vec![3, 1] };
        assert_eq!(pc.corners(3, 4), vec![(0, 3), (1, 1), (2, 0)]);
    }

    #[test]
    fn extensions_respect_rows_and_columns() {
        let cells = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let ext = linear_extensions(&cells, (0, 0));
        assert_eq!(ext.len(), 2);
        assert!(linear_extensions(&cells, (1, 1)).is_empty());
    }

    #[test]
    fn profiles_sort_every_box() {
        let inst = generate(Distribution::Uniform, 24, 3).unwrap();
        for g in [2, 3, 4] {
            let prof = build_profiles(&inst, g).unwrap();
            for i in 0..prof.rows {
                for j in 0..prof.cols {
                    let bx = prof.get(i, j);
                    let (r0, c0) = (i * g, j * g);
                    let mut want: Vec<(usize, usize)> =
                        (0..bx.rows).flat_map(|r| (0..bx.cols).map(move |c| (r, c))).collect();
                    want.sort_by_key(|&(r, c)| (inst.a()[r0 + r] + inst.b()[c0 + c], r, c));
                    assert_eq!(bx.order(), want, "g {g} box ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn planted_found() {
        let inst = generate(Distribution::Planted, 128, 5).unwrap();
        let w = solve_subq(&inst, 2, &mut ComparisonLedger::new()).unwrap().unwrap();
        assert!(inst.verifies(&w));
    }

    #[test]
    fn agrees_with_oracle_with_ragged_blocks() {
        for seed in 0..10 {
            let inst = generate(Distribution::Uniform, 23, seed).unwrap();
            for g in [2, 3, 4] {
                let out = run_subq(&inst, g, &mut ComparisonLedger::new()).unwrap();
                assert_eq!(out.witness.is_some(), three_sum_oracle(&inst).is_some());
                assert!(out.stats.max_probe <= out.stats.probe_bound);
            }
        }
    }

    #[test]
    fn rejects_other_block_sizes() {
        let inst = generate(Distribution::Uniform, 16, 1).unwrap();
        assert!(solve_subq(&inst, 5, &mut ComparisonLedger::new()).is_err());
        assert!(solve_subq(&inst, 1, &mut ComparisonLedger::new()).is_err());
    }
}
