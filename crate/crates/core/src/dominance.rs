//! Bichromatic dominating pairs and the all-permutations box encoding.
//!
//! A comparison between two cells `U = (r, c)` and `V = (r', c')` of a box
//! `A_i + B_j` splits by Fredman's trick into a part that depends only on
//! `B_j` (a red coordinate) and a part that depends only on `A_i` (a blue
//! coordinate): `U < V` iff `B(c') - B(c) >= A(r) - A(r') + e`, where `e` is
//! 1 when the index tie-break alone would put `U` after `V`. A conjunction of
//! such tests holds for box `(i, j)` exactly when red point `j` dominates
//! blue point `i`.

use crate::error::{Error, Result};
use crate::fredman::{BlockPartition, BoxOrder};
use crate::instance::{Scalar, ThreeSumInstance};

/// Red and blue points in `d` dimensions, stored flat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    d: usize,
    red: Vec<i64>,
    blue: Vec<i64>,
}

impl PointSet {
    pub fn new(d: usize, red: &[Vec<i64>], blue: &[Vec<i64>]) -> Result<Self> {
        for p in red.iter().chain(blue) {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
        }
        Ok(Self { d, red: red.concat(), blue: blue.concat() })
    }

    /// Points given as consecutive runs of `d` coordinates.
    pub fn from_flat(d: usize, red: Vec<i64>, blue: Vec<i64>) -> Result<Self> {
        for v in [&red, &blue] {
            if d == 0 && !v.is_empty() || d > 0 && v.len() % d != 0 {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() % d.max(1) });
            }
        }
        Ok(Self { d, red, blue })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn red_len(&self) -> usize {
        if self.d == 0 { 0 } else { self.red.len() / self.d }
    }

    pub fn blue_len(&self) -> usize {
        if self.d == 0 { 0 } else { self.blue.len() / self.d }
    }

    pub fn red(&self, i: usize) -> &[i64] {
        &self.red[i * self.d..(i + 1) * self.d]
    }

    pub fn blue(&self, i: usize) -> &[i64] {
        &self.blue[i * self.d..(i + 1) * self.d]
    }
}

const BASE_CASE: usize = 32;

/// All `(red, blue)` pairs with `red >= blue` in every coordinate, sorted.
pub fn report_dominances(ps: &PointSet) -> Result<Vec<(usize, usize)>> {
    if ps.d == 0 {
        return Err(Error::InvalidArgument("dominance needs at least one dimension".into()));
    }
    let mut reds: Vec<u32> = (0..ps.red_len() as u32).collect();
    let mut blues: Vec<u32> = (0..ps.blue_len() as u32).collect();
    let mut out = Vec::new();
    recurse(ps, &mut reds, &mut blues, ps.d, &mut out);
    out.sort_unstable();
    Ok(out)
}

fn dominates(r: &[i64], b: &[i64], dims: usize) -> bool {
    r[..dims].iter().zip(&b[..dims]).all(|(x, y)| x >= y)
}

/// Reports pairs among `reds x blues` dominating in coordinates `0..dims`
/// (the rest are already known to hold).
fn recurse(ps: &PointSet, reds: &mut [u32], blues: &mut [u32], dims: usize, out: &mut Vec<(usize, usize)>) {
    if reds.is_empty() || blues.is_empty() {
        return;
    }
    if dims == 0 {
        for &r in reds.iter() {
            out.extend(blues.iter().map(|&b| (r as usize, b as usize)));
        }
        return;
    }
    if reds.len() + blues.len() <= BASE_CASE {
        for &r in reds.iter() {
            let rp = ps.red(r as usize);
            for &b in blues.iter() {
                if dominates(rp, ps.blue(b as usize), dims) {
                    out.push((r as usize, b as usize));
                }
            }
        }
        return;
    }
    let c = dims - 1;
    let mut vals: Vec<i64> = reds
        .iter()
        .map(|&r| ps.red(r as usize)[c])
        .chain(blues.iter().map(|&b| ps.blue(b as usize)[c]))
        .collect();
    let mid = vals.len() / 2;
    let (_, &mut median, _) = vals.select_nth_unstable(mid);
    let min = *vals.iter().min().expect("nonempty");
    let max = *vals.iter().max().expect("nonempty");
    if min == max {
        recurse(ps, reds, blues, c, out);
        return;
    }
    // low half is `< split`, high half `>= split`; both nonempty
    let split = if median == min { min + 1 } else { median };
    let rh = partition(reds, |r| ps.red(r as usize)[c] < split);
    let bh = partition(blues, |b| ps.blue(b as usize)[c] < split);
    let (red_low, red_high) = reds.split_at_mut(rh);
    let (blue_low, blue_high) = blues.split_at_mut(bh);
    recurse(ps, red_high, blue_low, c, out);
    recurse(ps, red_high, blue_high, dims, out);
    recurse(ps, red_low, blue_low, dims, out);
}

/// Moves elements satisfying `low` to the front; returns their count.
fn partition(v: &mut [u32], low: impl Fn(u32) -> bool) -> usize {
    let mut k = 0;
    for t in 0..v.len() {
        if low(v[t]) {
            v.swap(k, t);
            k += 1;
        }
    }
    k
}

/// `U < V` for two local cells of a box under the index tie-break.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellLess {
    pub u: (usize, usize),
    pub v: (usize, usize),
}

impl CellLess {
    pub fn new(u: (usize, usize), v: (usize, usize)) -> Self {
        Self { u, v }
    }

    fn strict(&self) -> i64 {
        i64::from(self.u > self.v)
    }

    /// Red coordinate from column block values.
    pub fn red(&self, b: &[Scalar]) -> i64 {
        b[self.v.1] - b[self.u.1]
    }

    /// Blue coordinate from row block values.
    pub fn blue(&self, a: &[Scalar]) -> i64 {
        a[self.u.0] - a[self.v.0] + self.strict()
    }
}

/// Red points (one per column block) and blue points (one per row block)
/// encoding a conjunction of cell tests.
pub(crate) fn encode(tests: &[CellLess], a_blocks: &[&[Scalar]], b_blocks: &[&[Scalar]]) -> PointSet {
    let d = tests.len();
    let red = b_blocks.iter().flat_map(|b| tests.iter().map(move |t| t.red(b))).collect();
    let blue = a_blocks.iter().flat_map(|a| tests.iter().map(move |t| t.blue(a))).collect();
    PointSet { d, red, blue }
}

/// Boxes `(i, j)` (indices into the given block lists) for which every test
/// holds. A test list of length zero holds everywhere.
pub(crate) fn firing_boxes(tests: &[CellLess], a_blocks: &[&[Scalar]], b_blocks: &[&[Scalar]]) -> Result<Vec<(usize, usize)>> {
    if tests.is_empty() {
        return Ok((0..a_blocks.len()).flat_map(|i| (0..b_blocks.len()).map(move |j| (i, j))).collect());
    }
    let ps = encode(tests, a_blocks, b_blocks);
    Ok(report_dominances(&ps)?.into_iter().map(|(j, i)| (i, j)).collect())
}

/// Box orders found by the all-permutations encoding.
#[derive(Clone, Debug)]
pub struct A1Result {
    pub g: usize,
    pub rows: usize,
    pub cols: usize,
    pub permutations: usize,
    /// Row-major over the block grid.
    pub box_orders: Vec<BoxOrder>,
    /// Dominance firings per box (1 everywhere on success).
    pub firings: Vec<usize>,
    /// Dimension of the encoded points for full `g x g` boxes.
    pub dimension: usize,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Enumerates every permutation of the cells of each box shape, encodes "this
/// permutation sorts the box" as a dominance test, and reads off the box
/// orders from the firing pairs. Only `g <= 2` is accepted.
pub fn solve_a1(inst: &ThreeSumInstance, g: usize) -> Result<A1Result> {
    if g > 2 {
        return Err(Error::PermutationBlowup(g));
    }
    let max = inst.a().len().max(inst.b().len()).max(1);
    if g == 0 {
        return Err(Error::BlockSizeOutOfRange { g, max });
    }
    let pa = BlockPartition::new(inst.a().len(), g);
    let pb = BlockPartition::new(inst.b().len(), g);
    let (ra, rb) = (pa.count(), pb.count());
    let mut box_orders: Vec<Option<BoxOrder>> = vec![None; ra * rb];
    let mut firings = vec![0usize; ra * rb];
    let mut count = 0;
    let mut row_shapes: Vec<usize> = pa.blocks().map(|r| r.len()).collect();
    let mut col_shapes: Vec<usize> = pb.blocks().map(|r| r.len()).collect();
    row_shapes.dedup();
    col_shapes.dedup();
    for &rows in &row_shapes {
        for &cols in &col_shapes {
            let a_ids: Vec<usize> = (0..ra).filter(|&i| pa.block(i).len() == rows).collect();
            let b_ids: Vec<usize> = (0..rb).filter(|&j| pb.block(j).len() == cols).collect();
            let a_blocks: Vec<&[Scalar]> = a_ids.iter().map(|&i| &inst.a()[pa.block(i)]).collect();
            let b_blocks: Vec<&[Scalar]> = b_ids.iter().map(|&j| &inst.b()[pb.block(j)]).collect();
            for perm in permutations(rows * cols) {
                count += 1;
                let cells: Vec<(usize, usize)> = perm.iter().map(|&u| (u / cols, u % cols)).collect();
                let tests: Vec<CellLess> = cells.windows(2).map(|w| CellLess::new(w[0], w[1])).collect();
                for (x, y) in firing_boxes(&tests, &a_blocks, &b_blocks)? {
                    let (i, j) = (a_ids[x], b_ids[y]);
                    firings[i * rb + j] += 1;
                    let order = cells.iter().map(|&(r, c)| (r << 16 | c) as u32).collect();
                    box_orders[i * rb + j] = Some(BoxOrder { rows, cols, order });
                }
            }
        }
    }
    for (b, &f) in firings.iter().enumerate() {
        if f != 1 {
            return Err(Error::Distinctness { i: b / rb, j: b % rb, k: 0, fired: f });
        }
    }
    Ok(A1Result {
        g,
        rows: ra,
        cols: rb,
        permutations: count,
        box_orders: box_orders.into_iter().map(|o| o.expect("every box fired")).collect(),
        firings,
        dimension: (g * g).saturating_sub(1),
    })
}
