//! The randomized fractional-cascading decision tree.
//!
//! Row blocks are augmented backwards (`A'_i` receives a `p`-sample of
//! `A'_{i+1}`), column blocks forwards (`B'_j` receives a sample of
//! `B'_{j-1}`). One difference set over `A'`, `B'` and the blocks of `C` is
//! sorted through the ledger; after that every augmented box, and every box
//! `A'_i + C_s` or `B'_j + C_s`, is ordered for free.
//!
//! Each `-c` follows its box path. The first box is binary searched; in every
//! later box the bracket handed over through sampled rows (or columns)
//! leaves a gap of unsampled rows, and the sums `-a_k - c` of all cursors in
//! the box are merged with `B'_j` block by block of `C`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fredman::{box_order, BlockPartition, BoxOrder, DifferenceOrder, Group};
use crate::gp_tree::{direct_box_order, resolve_block_size, search_box, trace_paths, BoxPaths, Probe, Traced};
use crate::instance::{ThreeSumInstance, Witness};
use crate::ledger::{phase, ComparisonLedger};
use crate::operand::{sign3, SumProblem};
use crate::{ceil_sqrt, BlockSize};

/// `ceil(sqrt(n))`, at least 1.
pub fn auto_block_size(n: usize) -> usize {
    ceil_sqrt(n).max(1)
}

/// Which keys of `A'_{i+1}` may be copied into `A'_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Sampling {
    /// Any key of the augmented neighbour, so samples of samples propagate.
    #[default]
    Cascade,
    /// Only the neighbour's own block elements.
    OriginalsOnly,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfcConfig {
    pub g: BlockSize,
    pub p: f64,
    pub sampling: Sampling,
    /// Check every derived box order against a direct sort.
    pub audit: bool,
    /// Count the lines of every sampled gap in the boxes entered, not only
    /// of the gaps queries fall into.
    pub gap_census: bool,
}

impl Default for RfcConfig {
    fn default() -> Self {
        Self { g: BlockSize::Auto, p: 0.25, sampling: Sampling::Cascade, audit: false, gap_census: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `A` blocks, augmented from the last block backwards.
    Rows,
    /// `B` blocks, augmented from the first block forwards.
    Columns,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AugKey {
    /// Index into the (sorted) operand set.
    pub index: usize,
    pub synthetic: bool,
    /// Block the element belongs to originally.
    pub origin: usize,
    /// Position of the same element in the neighbour it was sampled from.
    pub bridge: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedBlock {
    pub direction: Direction,
    /// Ascending by operand index, hence by value.
    pub keys: Vec<AugKey>,
}

impl AugmentedBlock {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.keys.iter().map(|k| k.index).collect()
    }

    pub fn synthetic_count(&self) -> usize {
        self.keys.iter().filter(|k| k.synthetic).count()
    }
}

/// Augments the blocks of `part`. Sampling decisions are drawn from `rng`
/// block by block in build order, each block's keys in ascending order. No
/// comparisons are needed: copied keys come from a neighbouring block, so
/// they sort entirely after (rows) or before (columns) the block's own
/// elements.
pub fn build_augmented_blocks(
    part: &BlockPartition,
    direction: Direction,
    p: f64,
    sampling: Sampling,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<AugmentedBlock>> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("sampling probability must lie in [0, 1), got {p}")));
    }
    let count = part.count();
    let own = |b: usize| -> Vec<AugKey> {
        part.block(b).map(|index| AugKey { index, synthetic: false, origin: b, bridge: None }).collect()
    };
    let mut out: Vec<Option<AugmentedBlock>> = vec![None; count];
    let order: Vec<usize> = match direction {
        Direction::Rows => (0..count).rev().collect(),
        Direction::Columns => (0..count).collect(),
    };
    let mut prev: Option<usize> = None;
    for &b in &order {
        let mut sampled = Vec::new();
        if let Some(src) = prev {
            let src_keys = &out[src].as_ref().expect("built in order").keys;
            for (pos, key) in src_keys.iter().enumerate() {
                if sampling == Sampling::OriginalsOnly && key.synthetic {
                    continue;
                }
                if rng.gen_bool(p) {
                    sampled.push(AugKey { index: key.index, synthetic: true, origin: key.origin, bridge: Some(pos) });
                }
            }
        }
        let keys = match direction {
            Direction::Rows => {
                let mut k = own(b);
                k.extend(sampled);
                k
            }
            Direction::Columns => {
                sampled.extend(own(b));
                sampled
            }
        };
        out[b] = Some(AugmentedBlock { direction, keys });
        prev = Some(b);
    }
    Ok(out.into_iter().map(|b| b.expect("every block built")).collect())
}

/// Augmented blocks of both directions plus the sorted combined difference
/// set. Group ids in `d`: `A'_i` is `i`, `B'_j` is `ra + j`, `C_s` is
/// `ra + rb + s`.
struct Layout<'a> {
    p: &'a SumProblem,
    g: usize,
    a_aug: Vec<AugmentedBlock>,
    b_aug: Vec<AugmentedBlock>,
    a_idx: Vec<Vec<usize>>,
    b_idx: Vec<Vec<usize>>,
    c_idx: Vec<Vec<usize>>,
    d: DifferenceOrder,
    /// Rows of `A'_i` copied into `A'_{i-1}`.
    a_sent: Vec<Vec<bool>>,
    /// Columns of `B'_j` copied into `B'_{j+1}`.
    b_sent: Vec<Vec<bool>>,
}

fn sent_flags(aug: &[AugmentedBlock], receiver: impl Fn(usize) -> Option<usize>) -> Vec<Vec<bool>> {
    (0..aug.len())
        .map(|b| {
            let mut flags = vec![false; aug[b].len()];
            if let Some(r) = receiver(b) {
                for key in aug[r].keys.iter().filter(|k| k.synthetic) {
                    flags[key.bridge.expect("synthetic keys are bridged")] = true;
                }
            }
            flags
        })
        .collect()
}

impl<'a> Layout<'a> {
    fn build(p: &'a SumProblem, g: usize, cfg: &RfcConfig, seed: u64, ledger: &mut ComparisonLedger) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pa = BlockPartition::new(p.a.len(), g);
        let pb = BlockPartition::new(p.b.len(), g);
        let pc = BlockPartition::new(p.c.len(), g);
        let a_aug = build_augmented_blocks(&pa, Direction::Rows, cfg.p, cfg.sampling, &mut rng)?;
        let b_aug = build_augmented_blocks(&pb, Direction::Columns, cfg.p, cfg.sampling, &mut rng)?;
        let a_idx: Vec<Vec<usize>> = a_aug.iter().map(|b| b.indices()).collect();
        let b_idx: Vec<Vec<usize>> = b_aug.iter().map(|b| b.indices()).collect();
        let c_idx: Vec<Vec<usize>> = pc.blocks().map(|r| r.collect()).collect();
        let groups: Vec<Group<'_>> = a_idx
            .iter()
            .map(|i| Group { set: &p.a, indices: i })
            .chain(b_idx.iter().map(|i| Group { set: &p.b, indices: i }))
            .chain(c_idx.iter().map(|i| Group { set: &p.c, indices: i }))
            .collect();
        let d = DifferenceOrder::sort(&groups, ledger)?;
        let a_sent = sent_flags(&a_aug, |i| i.checked_sub(1));
        let rb = b_aug.len();
        let b_sent = sent_flags(&b_aug, |j| (j + 1 < rb).then_some(j + 1));
        Ok(Self { p, g, a_aug, b_aug, a_idx, b_idx, c_idx, d, a_sent, b_sent })
    }

    fn ra(&self) -> usize {
        self.a_aug.len()
    }

    fn rb(&self) -> usize {
        self.b_aug.len()
    }

    fn c_group(&self, s: usize) -> usize {
        self.ra() + self.rb() + s
    }
}

const NONE: u32 = u32::MAX;

/// One augmented box `A'_i + B'_j` with its sorted catalog and cascading
/// links.
#[derive(Clone, Debug)]
pub struct CatalogBox {
    pub i: usize,
    pub j: usize,
    pub order: BoxOrder,
    ranks: Vec<u32>,
    row_pred: Vec<u32>,
    row_succ: Vec<u32>,
    col_pred: Vec<u32>,
    col_succ: Vec<u32>,
}

fn links(order: &BoxOrder, synthetic: impl Fn((usize, usize)) -> bool) -> (Vec<u32>, Vec<u32>) {
    let m = order.len();
    let mut pred = vec![NONE; m];
    let mut succ = vec![NONE; m];
    let mut last = NONE;
    for t in 0..m {
        if synthetic(order.cell(t)) {
            last = t as u32;
        }
        pred[t] = last;
    }
    last = NONE;
    for t in (0..m).rev() {
        if synthetic(order.cell(t)) {
            last = t as u32;
        }
        succ[t] = last;
    }
    (pred, succ)
}

impl CatalogBox {
    fn build(layout: &Layout<'_>, i: usize, j: usize, ledger: &ComparisonLedger) -> Result<Self> {
        let order = box_order(&layout.d, i, layout.ra() + j, ledger)?;
        let ranks = order.ranks();
        let (ra, rb) = (&layout.a_aug[i].keys, &layout.b_aug[j].keys);
        let (row_pred, row_succ) = links(&order, |(r, _)| ra[r].synthetic);
        let (col_pred, col_succ) = links(&order, |(_, c)| rb[c].synthetic);
        Ok(Self { i, j, order, ranks, row_pred, row_succ, col_pred, col_succ })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn rank(&self, (r, c): (usize, usize)) -> usize {
        self.ranks[r * self.order.cols + c] as usize
    }

    fn link(v: &[u32], rank: usize) -> Option<usize> {
        let t = v[rank];
        (t != NONE).then_some(t as usize)
    }

    /// Nearest rank at or below `rank` whose row also lies in the box below.
    pub fn row_pred(&self, rank: usize) -> Option<usize> {
        Self::link(&self.row_pred, rank)
    }

    /// Nearest rank at or above `rank` whose row also lies in the box below.
    pub fn row_succ(&self, rank: usize) -> Option<usize> {
        Self::link(&self.row_succ, rank)
    }

    /// Nearest rank at or below `rank` whose column also lies in the box to the left.
    pub fn col_pred(&self, rank: usize) -> Option<usize> {
        Self::link(&self.col_pred, rank)
    }

    /// Nearest rank at or above `rank` whose column also lies in the box to the left.
    pub fn col_succ(&self, rank: usize) -> Option<usize> {
        Self::link(&self.col_succ, rank)
    }
}

/// Every augmented box of an instance, materialized at once (for small
/// inputs and inspection).
#[derive(Clone, Debug)]
pub struct CatalogGrid {
    pub rows: usize,
    pub cols: usize,
    pub g: usize,
    pub a_blocks: Vec<AugmentedBlock>,
    pub b_blocks: Vec<AugmentedBlock>,
    /// Row-major over the block grid.
    pub boxes: Vec<CatalogBox>,
    /// `A'_i + C_s`, row-major over `(i, s)`.
    pub ac_orders: Vec<BoxOrder>,
    /// `B'_j + C_s`, row-major over `(j, s)`.
    pub bc_orders: Vec<BoxOrder>,
    pub c_blocks: usize,
}

impl CatalogGrid {
    pub fn get(&self, i: usize, j: usize) -> &CatalogBox {
        &self.boxes[i * self.cols + j]
    }

    /// Cell of the box below that a row-synthetic cell bridges to.
    pub fn bridge_down(&self, i: usize, (r, c): (usize, usize)) -> Option<(usize, usize)> {
        self.a_blocks[i].keys[r].bridge.map(|r2| (r2, c))
    }

    /// Cell of the box to the left that a column-synthetic cell bridges to.
    pub fn bridge_left(&self, j: usize, (r, c): (usize, usize)) -> Option<(usize, usize)> {
        self.b_blocks[j].keys[c].bridge.map(|c2| (r, c2))
    }
}

pub fn build_catalog_grid(
    inst: &ThreeSumInstance,
    cfg: &RfcConfig,
    seed: u64,
    ledger: &mut ComparisonLedger,
) -> Result<CatalogGrid> {
    let n = inst.a().len().max(inst.b().len()).max(inst.c().len());
    let g = resolve_block_size(cfg.g, n, auto_block_size)?;
    let p = SumProblem::from_instance(inst);
    let layout = Layout::build(&p, g, cfg, seed, ledger)?;
    let (ra, rb, rc) = (layout.ra(), layout.rb(), layout.c_idx.len());
    let mut boxes = Vec::with_capacity(ra * rb);
    for i in 0..ra {
        for j in 0..rb {
            boxes.push(CatalogBox::build(&layout, i, j, ledger)?);
        }
    }
    let mut ac_orders = Vec::new();
    for i in 0..ra {
        for s in 0..rc {
            ac_orders.push(box_order(&layout.d, i, layout.c_group(s), ledger)?);
        }
    }
    let mut bc_orders = Vec::new();
    for j in 0..rb {
        for s in 0..rc {
            bc_orders.push(box_order(&layout.d, ra + j, layout.c_group(s), ledger)?);
        }
    }
    Ok(CatalogGrid {
        rows: ra,
        cols: rb,
        g,
        a_blocks: layout.a_aug,
        b_blocks: layout.b_aug,
        boxes,
        ac_orders,
        bc_orders,
        c_blocks: rc,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RfcStats {
    pub g: usize,
    pub augmented_rows: usize,
    pub augmented_cols: usize,
    pub row_blocks: usize,
    pub col_blocks: usize,
    /// `sum kappa_{i,j}` over the grid.
    pub kappa_sum: u64,
    /// `(row blocks + column blocks) * |C|`.
    pub path_budget: u64,
    pub max_path_steps: usize,
    pub contiguity_violations: usize,
    pub first_box_searches: u64,
    /// Sorted sequences `S_{i,s}` merged with a block.
    pub merges: u64,
    /// `sum (ceil(kappa/g) + 2)` over visited boxes.
    pub merge_budget: u64,
    /// Brackets resolved in non-initial boxes.
    pub brackets: u64,
    /// Total gap rows (or columns) over all brackets: `sum |R_c|`.
    pub gap_lines: u64,
    /// Gaps between consecutive sampled cells in the boxes entered, counted
    /// once each whether or not a query falls into them.
    pub sampled_gaps: u64,
    /// Distinct rows (or columns) over those gaps.
    pub sampled_gap_lines: u64,
    pub box_orders_built: u64,
    pub box_order_ledger_delta: u64,
    pub audited_boxes: u64,
    pub audit_mismatches: u64,
}

impl RfcStats {
    pub fn mean_gap_lines(&self) -> f64 {
        if self.brackets == 0 {
            0.0
        } else {
            self.gap_lines as f64 / self.brackets as f64
        }
    }

    /// Mean distinct lines per gap, every gap weighted equally. Queries land
    /// in long gaps more often, so this sits below [`Self::mean_gap_lines`].
    pub fn mean_sampled_gap_lines(&self) -> f64 {
        if self.sampled_gaps == 0 {
            0.0
        } else {
            self.sampled_gap_lines as f64 / self.sampled_gaps as f64
        }
    }

    pub fn mean_augmented_size(&self) -> f64 {
        let blocks = self.row_blocks + self.col_blocks;
        if blocks == 0 {
            0.0
        } else {
            (self.augmented_rows + self.augmented_cols) as f64 / blocks as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct RfcOutcome {
    pub witness: Option<Witness>,
    pub stats: RfcStats,
}

pub fn solve_rfc(
    inst: &ThreeSumInstance,
    g: BlockSize,
    seed: u64,
    ledger: &mut ComparisonLedger,
) -> Result<Option<Witness>> {
    Ok(run_rfc(inst, &RfcConfig { g, ..RfcConfig::default() }, seed, ledger)?.witness)
}

pub fn run_rfc(inst: &ThreeSumInstance, cfg: &RfcConfig, seed: u64, ledger: &mut ComparisonLedger) -> Result<RfcOutcome> {
    let n = inst.a().len().max(inst.b().len()).max(inst.c().len());
    let g = resolve_block_size(cfg.g, n, auto_block_size)?;
    let problem = SumProblem::from_instance(inst);
    problem.charge_input_sort(ledger)?;
    let (found, stats) = rfc_search(&problem, g, cfg, seed, ledger)?;
    Ok(RfcOutcome { witness: found.map(|(i, j, l)| inst.witness(i, j, l)), stats })
}

type Found = Option<(usize, usize, usize)>;

/// Bracket carried into the next box: cells local to that box, `None` for
/// an infinite end.
#[derive(Clone, Copy, Debug, Default)]
struct Bracket {
    lo: Option<(usize, usize)>,
    hi: Option<(usize, usize)>,
}

pub(crate) fn rfc_search(
    p: &SumProblem,
    g: usize,
    cfg: &RfcConfig,
    seed: u64,
    ledger: &mut ComparisonLedger,
) -> Result<(Found, RfcStats)> {
    let mut stats = RfcStats { g, ..RfcStats::default() };
    if p.is_degenerate() {
        return Ok((None, stats));
    }
    let layout = Layout::build(p, g, cfg, seed, ledger)?;
    let (ra, rb) = (layout.ra(), layout.rb());
    stats.row_blocks = ra;
    stats.col_blocks = rb;
    stats.augmented_rows = layout.a_aug.iter().map(|b| b.len()).sum();
    stats.augmented_cols = layout.b_aug.iter().map(|b| b.len()).sum();

    let pa = BlockPartition::new(p.a.len(), g);
    let pb = BlockPartition::new(p.b.len(), g);
    let paths = match trace_paths(p, &pa, &pb, ledger)? {
        Traced::Witness(i, j, l) => return Ok((Some((i, j, l)), stats)),
        Traced::Paths(paths) => paths,
    };
    stats.kappa_sum = paths.kappa_sum();
    stats.path_budget = ((ra + rb) * p.c.len()) as u64;
    stats.max_path_steps = paths.max_steps;
    stats.contiguity_violations = paths.contiguity_violations();

    let mut search = Search { layout: &layout, paths: &paths, brackets: vec![Bracket::default(); p.c.len()], cfg };
    // (i - j) ascending is a topological order of the down/left moves
    for diag in 0..ra + rb - 1 {
        for j in (0..rb).rev() {
            let Some(i) = (j + diag).checked_sub(rb - 1) else { continue };
            if i >= ra || paths.queries(i, j).is_empty() {
                continue;
            }
            if let Some(w) = search.process_box(i, j, ledger, &mut stats)? {
                return Ok((Some(w), stats));
            }
        }
    }
    Ok((None, stats))
}

struct Search<'l, 'a> {
    layout: &'l Layout<'a>,
    paths: &'l BoxPaths,
    brackets: Vec<Bracket>,
    cfg: &'l RfcConfig,
}

/// Located `-c` inside a box: ranks of the last cell below and the first
/// cell above (`None` past either end).
#[derive(Clone, Copy, Debug)]
struct Located {
    pred: Option<usize>,
    succ: Option<usize>,
}

impl Search<'_, '_> {
    fn process_box(&mut self, i: usize, j: usize, ledger: &mut ComparisonLedger, stats: &mut RfcStats) -> Result<Found> {
        let layout = self.layout;
        let p = layout.p;
        let queries = self.paths.queries(i, j);
        let before = ledger.total();
        let cat = CatalogBox::build(layout, i, j, ledger)?;
        stats.box_order_ledger_delta += ledger.total() - before;
        stats.box_orders_built += 1;
        if self.cfg.audit {
            stats.audited_boxes += 1;
            if direct_box_order(&p.a, &layout.a_idx[i], &p.b, &layout.b_idx[j]) != cat.order.order {
                stats.audit_mismatches += 1;
            }
        }
        stats.merge_budget += (queries.len().div_ceil(layout.g) + 2) as u64;
        let (rows, cols) = (&layout.a_idx[i], &layout.b_idx[j]);
        let m = cat.len();

        let mut located = vec![Located { pred: None, succ: None }; queries.len()];
        if i == 0 && j == layout.rb() - 1 {
            for (q, &l) in queries.iter().enumerate() {
                stats.first_box_searches += 1;
                match search_box(p, &cat.order, rows, cols, l as usize, ledger, phase::BOX_SEARCH)? {
                    Probe::Hit(rank) => {
                        let (r, c) = cat.order.cell(rank);
                        return Ok(Some((rows[r], cols[c], l as usize)));
                    }
                    Probe::Miss(rank) => {
                        located[q] = Located { pred: rank.checked_sub(1), succ: (rank < m).then_some(rank) };
                    }
                }
            }
        } else {
            let (mut down, mut left) = (Vec::new(), Vec::new());
            for (q, &l) in queries.iter().enumerate() {
                if i > 0 && self.paths.visits(i - 1, j, l as usize) {
                    down.push(q);
                } else {
                    left.push(q);
                }
            }
            for (arrivals, rows_gap) in [(down, true), (left, false)] {
                if arrivals.is_empty() {
                    continue;
                }
                if self.cfg.gap_census {
                    let (gaps, lines) = if rows_gap {
                        sampled_gaps(&cat, &layout.a_sent[i], true)
                    } else {
                        sampled_gaps(&cat, &layout.b_sent[j], false)
                    };
                    stats.sampled_gaps += gaps;
                    stats.sampled_gap_lines += lines;
                }
                if let Some(w) = self.resolve_gaps(&cat, queries, &arrivals, rows_gap, &mut located, ledger, stats)? {
                    return Ok(Some(w));
                }
            }
        }

        for (q, &l) in queries.iter().enumerate() {
            let loc = located[q];
            let adjacent = match (loc.pred, loc.succ) {
                (Some(a), Some(b)) => a + 1 == b,
                (None, Some(b)) => b == 0,
                (Some(a), None) => a + 1 == m,
                (None, None) => m == 0,
            };
            if !adjacent {
                return Err(Error::Invariant(format!("bracket of c#{l} in box ({i}, {j}) is not tight")));
            }
            let l = l as usize;
            let next = if i + 1 < layout.ra() && self.paths.visits(i + 1, j, l) {
                let keys = &layout.a_aug[i].keys;
                let bridge = |rank: usize| {
                    let (r, c) = cat.order.cell(rank);
                    (keys[r].bridge.expect("row-synthetic key has a bridge"), c)
                };
                Some(Bracket {
                    lo: loc.pred.and_then(|t| cat.row_pred(t)).map(bridge),
                    hi: loc.succ.and_then(|t| cat.row_succ(t)).map(bridge),
                })
            } else if j > 0 && self.paths.visits(i, j - 1, l) {
                let keys = &layout.b_aug[j].keys;
                let bridge = |rank: usize| {
                    let (r, c) = cat.order.cell(rank);
                    (r, keys[c].bridge.expect("column-synthetic key has a bridge"))
                };
                Some(Bracket {
                    lo: loc.pred.and_then(|t| cat.col_pred(t)).map(bridge),
                    hi: loc.succ.and_then(|t| cat.col_succ(t)).map(bridge),
                })
            } else {
                None
            };
            if let Some(b) = next {
                self.brackets[l] = b;
            }
        }
        Ok(None)
    }

    /// Resolves the brackets of cursors that entered from above (gap rows,
    /// `rows_gap`) or from the right (gap columns).
    #[allow(clippy::too_many_arguments)]
    fn resolve_gaps(
        &self,
        cat: &CatalogBox,
        queries: &[u32],
        arrivals: &[usize],
        rows_gap: bool,
        located: &mut [Located],
        ledger: &mut ComparisonLedger,
        stats: &mut RfcStats,
    ) -> Result<Found> {
        let layout = self.layout;
        let p = layout.p;
        let (i, j, g) = (cat.i, cat.j, layout.g);
        let (rows, cols) = (&layout.a_idx[i], &layout.b_idx[j]);
        let m = cat.len();
        // lines: rows of A'_i or columns of B'_j; targets: the other side
        let (lines, targets) = if rows_gap { (rows, cols) } else { (cols, rows) };
        let line_group = if rows_gap { i } else { layout.ra() + j };
        let mut seen = vec![usize::MAX; lines.len()];

        // (query position, line) pairs, grouped by the C block of the query
        let mut entries: Vec<(usize, usize)> = Vec::new();
        let mut bounds: Vec<(i64, i64)> = Vec::with_capacity(arrivals.len());
        for &q in arrivals {
            let b = self.brackets[queries[q] as usize];
            let lo = b.lo.map_or(-1, |c| cat.rank(c) as i64);
            let hi = b.hi.map_or(m as i64, |c| cat.rank(c) as i64);
            bounds.push((lo, hi));
            let mut count = 0;
            for t in (lo + 1)..hi {
                let (r, c) = cat.order.cell(t as usize);
                let line = if rows_gap { r } else { c };
                if seen[line] != q {
                    seen[line] = q;
                    count += 1;
                    entries.push((q, line));
                }
            }
            stats.brackets += 1;
            stats.gap_lines += count;
        }

        let mut pos_of = vec![0usize; entries.len()];
        let mut start = 0;
        while start < entries.len() {
            let s = queries[entries[start].0] as usize / g;
            let mut end = start;
            while end < entries.len() && queries[entries[end].0] as usize / g == s {
                end += 1;
            }
            // order the sums line + c of this C block for free, descending,
            // which is -line - c ascending
            let base = s * g;
            let cmp = layout.d.comparator(line_group, layout.c_group(s))?;
            let cell_of = |e: usize| (entries[e].1, queries[entries[e].0] as usize - base);
            let mut ids: Vec<usize> = (start..end).collect();
            ids.sort_by(|&x, &y| cmp.cmp(cell_of(y), cell_of(x)));
            stats.merges += 1;
            let mut t = 0usize;
            for e in ids {
                let (line, lc) = cell_of(e);
                let l = base + lc;
                while t < targets.len() {
                    let (a, b) = if rows_gap { (lines[line], targets[t]) } else { (targets[t], lines[line]) };
                    match sign3(p, a, b, l, ledger, phase::MERGE)? {
                        Ordering::Less => t += 1,
                        Ordering::Equal => return Ok(Some((a, b, l))),
                        Ordering::Greater => break,
                    }
                }
                pos_of[e] = t;
            }
            start = end;
        }

        for (k, &q) in arrivals.iter().enumerate() {
            let (lo, hi) = bounds[k];
            located[q] = Located { pred: (lo >= 0).then_some(lo as usize), succ: ((hi as usize) < m).then_some(hi as usize) };
        }
        for (e, &(q, line)) in entries.iter().enumerate() {
            let t = pos_of[e];
            let cell = |t: usize| if rows_gap { (line, t) } else { (t, line) };
            let loc = &mut located[q];
            if t > 0 {
                let r = cat.rank(cell(t - 1));
                if loc.pred.is_none_or(|x| r > x) {
                    loc.pred = Some(r);
                }
            }
            if t < targets.len() {
                let r = cat.rank(cell(t));
                if loc.succ.is_none_or(|x| r < x) {
                    loc.succ = Some(r);
                }
            }
        }
        Ok(None)
    }
}

/// Gaps between consecutive sampled cells of `cat` and their total count of
/// distinct lines.
fn sampled_gaps(cat: &CatalogBox, sent: &[bool], rows: bool) -> (u64, u64) {
    let mut stamp = vec![u64::MAX; sent.len()];
    let (mut gaps, mut lines, mut id, mut current) = (0u64, 0u64, 0u64, 0u64);
    for t in 0..cat.len() {
        let (r, c) = cat.order.cell(t);
        let line = if rows { r } else { c };
        if sent[line] {
            if id > 0 {
                gaps += 1;
                lines += current;
            }
            id += 1;
            current = 0;
        } else if stamp[line] != id {
            stamp[line] = id;
            current += 1;
        }
    }
    (gaps, lines)
}
