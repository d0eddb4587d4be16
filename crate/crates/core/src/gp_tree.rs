//! The block decision tree: sort the within-block difference sets, derive
//! every box order for free, then walk each `-c` through the grid of boxes
//! with one boundary test per step and a binary search in every visited box.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fredman::{box_order, BlockPartition, BoxOrder, DifferenceOrder, Group};
use crate::instance::{ThreeSumInstance, Witness};
use crate::ledger::{phase, ComparisonLedger, Snapshot};
use crate::operand::{sign3, OperandSet, SumProblem};
use crate::{ceil_log2, ceil_sqrt, BlockSize};

/// `ceil(sqrt(n log2 n))`, at least 1.
pub fn auto_block_size(n: usize) -> usize {
    ceil_sqrt(n * ceil_log2(n.max(1)) as usize).max(1)
}

pub(crate) fn resolve_block_size(g: BlockSize, n: usize, auto: impl Fn(usize) -> usize) -> Result<usize> {
    let max = n.max(1);
    let g = match g {
        BlockSize::Auto => auto(n).min(max),
        BlockSize::Fixed(g) => g,
    };
    if g == 0 || g > max {
        return Err(Error::BlockSizeOutOfRange { g, max });
    }
    Ok(g)
}

/// The `c` indices whose box path visits each box of the `A x B` grid.
#[derive(Clone, Debug)]
pub struct BoxPaths {
    pub rows: usize,
    pub cols: usize,
    lists: Vec<Vec<u32>>,
    /// Longest path, in boxes.
    pub max_steps: usize,
}

impl BoxPaths {
    /// Ascending `c` indices visiting box `(i, j)`.
    pub fn queries(&self, i: usize, j: usize) -> &[u32] {
        &self.lists[i * self.cols + j]
    }

    pub fn visits(&self, i: usize, j: usize, l: usize) -> bool {
        self.queries(i, j).binary_search(&(l as u32)).is_ok()
    }

    /// `sum kappa_{i,j}`.
    pub fn kappa_sum(&self) -> u64 {
        self.lists.iter().map(|l| l.len() as u64).sum()
    }

    /// Boxes whose query set is not an interval of consecutive indices.
    pub fn contiguity_violations(&self) -> usize {
        self.lists
            .iter()
            .filter(|l| match (l.first(), l.last()) {
                (Some(&f), Some(&e)) => (e - f + 1) as usize != l.len(),
                _ => false,
            })
            .count()
    }
}

pub(crate) enum Traced {
    Witness(usize, usize, usize),
    Paths(BoxPaths),
}

/// For every `c`, the box path of `-c`: start in the top-right box, and while
/// inside the grid test `max(A_lo) + min(B_hi) + c`; positive moves left,
/// negative moves down, zero is a witness.
pub(crate) fn trace_paths(
    p: &SumProblem,
    pa: &BlockPartition,
    pb: &BlockPartition,
    ledger: &mut ComparisonLedger,
) -> Result<Traced> {
    let (ra, rb) = (pa.count(), pb.count());
    let mut lists = vec![Vec::new(); ra * rb];
    let mut max_steps = 0;
    for l in 0..p.c.len() {
        let (mut lo, mut hi) = (0usize, rb);
        let mut steps = 0;
        while lo < ra && hi > 0 {
            lists[lo * rb + hi - 1].push(l as u32);
            steps += 1;
            let (a, b) = (pa.block(lo).end - 1, pb.block(hi - 1).start);
            match sign3(p, a, b, l, ledger, phase::PATH)? {
                Ordering::Greater => hi -= 1,
                Ordering::Less => lo += 1,
                Ordering::Equal => return Ok(Traced::Witness(a, b, l)),
            }
        }
        max_steps = max_steps.max(steps);
    }
    Ok(Traced::Paths(BoxPaths { rows: ra, cols: rb, lists, max_steps }))
}

/// Outcome of locating `-c` in a sorted box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Probe {
    /// The cell at this rank sums with `c` to zero.
    Hit(usize),
    /// Rank of the first cell above `-c`; the predecessor is the rank before.
    Miss(usize),
}

/// Binary search of `-c_l` in a box order with 3-term tests. `rows` and
/// `cols` map local positions to operand indices.
pub(crate) fn search_box(
    p: &SumProblem,
    order: &BoxOrder,
    rows: &[usize],
    cols: &[usize],
    l: usize,
    ledger: &mut ComparisonLedger,
    label: &'static str,
) -> Result<Probe> {
    let (mut lo, mut hi) = (0usize, order.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (r, c) = order.cell(mid);
        match sign3(p, rows[r], cols[c], l, ledger, label)? {
            Ordering::Less => lo = mid + 1,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return Ok(Probe::Hit(mid)),
        }
    }
    Ok(Probe::Miss(lo))
}

/// Sorts the cells of a box directly by sum value, ties by operand indices.
pub(crate) fn direct_box_order(x: &OperandSet, rows: &[usize], y: &OperandSet, cols: &[usize]) -> Vec<u32> {
    let nc = cols.len();
    let mut order: Vec<(usize, usize)> = (0..rows.len()).flat_map(|r| (0..nc).map(move |c| (r, c))).collect();
    order.sort_by_key(|&(r, c)| (x.value(rows[r]) + y.value(cols[c]), rows[r], cols[c]));
    order.into_iter().map(|(r, c)| (r << 16 | c) as u32).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GpStats {
    pub g: usize,
    pub boxes_searched: u64,
    pub box_orders_built: u64,
    /// Ledger comparisons executed while deriving box orders.
    pub box_order_ledger_delta: u64,
    pub audited_boxes: u64,
    pub audit_mismatches: u64,
    pub max_path_steps: usize,
    /// Grid rows plus columns: no path can be longer.
    pub path_step_bound: usize,
    /// Most comparisons spent in one box search.
    pub max_box_search: u64,
}

#[derive(Clone, Debug)]
pub struct GpOutcome {
    pub witness: Option<Witness>,
    pub stats: GpStats,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GpConfig {
    pub g: BlockSize,
    /// Check every derived box order against a direct sort.
    pub audit: bool,
}

/// All box orders of one instance.
#[derive(Clone, Debug)]
pub struct GpRun {
    pub g: usize,
    /// Row-major over the `A x B` block grid.
    pub box_orders: Vec<BoxOrder>,
    pub stats: Snapshot,
}

pub fn solve_gp(inst: &ThreeSumInstance, g: BlockSize, ledger: &mut ComparisonLedger) -> Result<Option<Witness>> {
    Ok(run_gp(inst, &GpConfig { g, audit: false }, ledger)?.witness)
}

pub fn run_gp(inst: &ThreeSumInstance, cfg: &GpConfig, ledger: &mut ComparisonLedger) -> Result<GpOutcome> {
    let g = resolve_block_size(cfg.g, inst.size(), auto_block_size)?;
    let problem = SumProblem::from_instance(inst);
    problem.charge_input_sort(ledger)?;
    let (found, stats) = gp_search(&problem, g, cfg.audit, ledger)?;
    Ok(GpOutcome { witness: found.map(|(i, j, l)| inst.witness(i, j, l)), stats })
}

fn block_indices(part: &BlockPartition) -> Vec<Vec<usize>> {
    part.blocks().map(|r| r.collect()).collect()
}

fn sort_blocks(
    p: &SumProblem,
    ia: &[Vec<usize>],
    ib: &[Vec<usize>],
    ledger: &mut ComparisonLedger,
) -> Result<DifferenceOrder> {
    let groups: Vec<Group<'_>> = ia
        .iter()
        .map(|idx| Group { set: &p.a, indices: idx })
        .chain(ib.iter().map(|idx| Group { set: &p.b, indices: idx }))
        .collect();
    DifferenceOrder::sort(&groups, ledger)
}

pub(crate) fn gp_search(
    p: &SumProblem,
    g: usize,
    audit: bool,
    ledger: &mut ComparisonLedger,
) -> Result<(Option<(usize, usize, usize)>, GpStats)> {
    let mut stats = GpStats { g, ..GpStats::default() };
    if p.is_degenerate() {
        return Ok((None, stats));
    }
    let (pa, pb) = (BlockPartition::new(p.a.len(), g), BlockPartition::new(p.b.len(), g));
    let (ia, ib) = (block_indices(&pa), block_indices(&pb));
    let d = sort_blocks(p, &ia, &ib, ledger)?;
    stats.path_step_bound = pa.count() + pb.count();
    let paths = match trace_paths(p, &pa, &pb, ledger)? {
        Traced::Witness(i, j, l) => return Ok((Some((i, j, l)), stats)),
        Traced::Paths(paths) => paths,
    };
    stats.max_path_steps = paths.max_steps;
    let ra = pa.count();
    for i in 0..ra {
        for j in 0..pb.count() {
            let queries = paths.queries(i, j);
            if queries.is_empty() {
                continue;
            }
            let before = ledger.total();
            let order = box_order(&d, i, ra + j, ledger)?;
            stats.box_order_ledger_delta += ledger.total() - before;
            stats.box_orders_built += 1;
            if audit {
                stats.audited_boxes += 1;
                if direct_box_order(&p.a, &ia[i], &p.b, &ib[j]) != order.order {
                    stats.audit_mismatches += 1;
                }
            }
            for &l in queries {
                stats.boxes_searched += 1;
                let before = ledger.total();
                let probe = search_box(p, &order, &ia[i], &ib[j], l as usize, ledger, phase::BOX_SEARCH)?;
                stats.max_box_search = stats.max_box_search.max(ledger.total() - before);
                if let Probe::Hit(rank) = probe {
                    let (r, c) = order.cell(rank);
                    return Ok((Some((ia[i][r], ib[j][c], l as usize)), stats));
                }
            }
        }
    }
    Ok((None, stats))
}

/// Sorts `D` and derives every box order of the grid, without searching.
pub fn gp_box_orders(inst: &ThreeSumInstance, g: BlockSize, ledger: &mut ComparisonLedger) -> Result<GpRun> {
    let g = resolve_block_size(g, inst.size(), auto_block_size)?;
    let p = SumProblem::from_instance(inst);
    let (pa, pb) = (BlockPartition::new(p.a.len(), g), BlockPartition::new(p.b.len(), g));
    let (ia, ib) = (block_indices(&pa), block_indices(&pb));
    let d = sort_blocks(&p, &ia, &ib, ledger)?;
    let mut box_orders = Vec::with_capacity(pa.count() * pb.count());
    for i in 0..pa.count() {
        for j in 0..pb.count() {
            box_orders.push(box_order(&d, i, pa.count() + j, ledger)?);
        }
    }
    Ok(GpRun { g, box_orders, stats: ledger.snapshot() })
}
