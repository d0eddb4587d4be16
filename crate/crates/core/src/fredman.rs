//! Difference-set sorting and comparison-free box orders.
//!
//! Once `D = union_i (X_i - X_i)` is sorted through the ledger, any two cells
//! of a box `X_i + Y_j` compare by looking up two difference ranks:
//! `x + y < x' + y'` iff `x - x' < y' - y`. Deriving a box order therefore
//! takes no ledger comparisons at all.

use std::cell::Cell;
use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::ledger::{phase, ComparisonLedger, LinearForm};
use crate::operand::{sign_diff_vs_diff, OperandSet};

/// Partition of a sorted set into runs of `g` consecutive elements; only the
/// last block may be shorter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    len: usize,
    g: usize,
}

impl BlockPartition {
    pub fn new(len: usize, g: usize) -> Self {
        assert!(g >= 1, "block size must be positive");
        Self { len, g }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self) -> usize {
        self.len.div_ceil(self.g)
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        let start = i * self.g;
        start..(start + self.g).min(self.len)
    }

    pub fn block_of(&self, index: usize) -> usize {
        index / self.g
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.count()).map(|i| self.block(i))
    }
}

/// A block handed to [`DifferenceOrder::sort`]: ascending element indices of
/// one operand set.
#[derive(Clone, Copy, Debug)]
pub struct Group<'a> {
    pub set: &'a OperandSet,
    pub indices: &'a [usize],
}

#[derive(Clone, Debug)]
struct GroupClasses {
    len: usize,
    /// `classes[p * len + q]` is the dense value rank of `x_p - x_q`;
    /// negation mirrors it, zero differences have rank 0.
    classes: Vec<i32>,
    global: Vec<usize>,
}

/// Sorted order of the union of within-block difference sets, stored as
/// dense value ranks so that equal differences share a rank.
#[derive(Clone, Debug)]
pub struct DifferenceOrder {
    groups: Vec<GroupClasses>,
}

#[derive(Clone, Copy)]
struct Entry {
    group: u32,
    p: u32,
    q: u32,
}

impl DifferenceOrder {
    /// Sorts the differences of all `groups` into one order.
    ///
    /// Only the differences `x_p - x_q` with `p > q` are sorted (they are
    /// nonnegative since each group is ascending); the rest follow by
    /// negation. Every executed comparison is `(x_p - x_q) - (y_r - y_s)`,
    /// charged to phase `sort-D`, plus one pass over adjacent entries to
    /// detect equal values and one test of the smallest difference against
    /// zero.
    pub fn sort(groups: &[Group<'_>], ledger: &mut ComparisonLedger) -> Result<Self> {
        let mut entries = Vec::with_capacity(groups.iter().map(|g| g.indices.len() * g.indices.len() / 2).sum());
        for (gid, g) in groups.iter().enumerate() {
            let m = g.indices.len();
            // for a fixed q the run over p is already ascending
            for q in 0..m {
                for p in q + 1..m {
                    entries.push(Entry { group: gid as u32, p: p as u32, q: q as u32 });
                }
            }
        }
        let sign = |e: &Entry, f: &Entry, ledger: &mut ComparisonLedger| -> Result<Ordering> {
            let (x, y) = (&groups[e.group as usize], &groups[f.group as usize]);
            sign_diff_vs_diff(
                x.set,
                x.indices[e.p as usize],
                x.indices[e.q as usize],
                y.set,
                y.indices[f.p as usize],
                y.indices[f.q as usize],
                ledger,
                phase::SORT_D,
            )
        };
        let failure = Cell::new(None);
        entries.sort_by(|e, f| match sign(e, f, ledger) {
            Ok(Ordering::Equal) => (e.group, e.p, e.q).cmp(&(f.group, f.p, f.q)),
            Ok(o) => o,
            Err(err) => {
                failure.set(Some(err));
                Ordering::Equal
            }
        });
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }

        let mut out: Vec<GroupClasses> = groups
            .iter()
            .map(|g| {
                let m = g.indices.len();
                GroupClasses { len: m, classes: vec![0; m * m], global: g.indices.to_vec() }
            })
            .collect();
        if let Some(first) = entries.first() {
            let g = &groups[first.group as usize];
            let mut f = LinearForm::new();
            g.set.push_into(g.indices[first.p as usize], 1, &mut f);
            g.set.push_into(g.indices[first.q as usize], -1, &mut f);
            let mut class: i32 = match ledger.resolve(&f, phase::SORT_D)? {
                Ordering::Equal => 0,
                _ => 1,
            };
            for t in 0..entries.len() {
                if t > 0 && sign(&entries[t - 1], &entries[t], ledger)? != Ordering::Equal {
                    class += 1;
                }
                let e = entries[t];
                let gc = &mut out[e.group as usize];
                let (p, q, m) = (e.p as usize, e.q as usize, gc.len);
                gc.classes[p * m + q] = class;
                gc.classes[q * m + p] = -class;
            }
        }
        Ok(Self { groups: out })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group_len(&self, group: usize) -> usize {
        self.groups[group].len
    }

    /// Dense rank of `x_p - x_q` in `group` (positions local to the group).
    pub fn class(&self, group: usize, p: usize, q: usize) -> i32 {
        let g = &self.groups[group];
        g.classes[p * g.len + q]
    }

    /// Every difference `(group, p, q)` including `p <= q`, in sorted order
    /// (ties by group then positions).
    pub fn sorted_entries(&self) -> Vec<(usize, usize, usize)> {
        let mut all: Vec<(i32, usize, usize, usize)> = Vec::new();
        for (gid, g) in self.groups.iter().enumerate() {
            for p in 0..g.len {
                for q in 0..g.len {
                    all.push((g.classes[p * g.len + q], gid, p, q));
                }
            }
        }
        all.sort_unstable();
        all.into_iter().map(|(_, g, p, q)| (g, p, q)).collect()
    }

    /// Comparator over cells `(row, col)` of the box `group x + group y`.
    pub fn comparator(&self, x: usize, y: usize) -> Result<CellComparator<'_>> {
        let gx = self.groups.get(x).ok_or(Error::MissingRank(x))?;
        let gy = self.groups.get(y).ok_or(Error::MissingRank(y))?;
        Ok(CellComparator { x: gx, y: gy })
    }
}

/// Compares box cells through difference ranks only. Equal sums are ordered
/// by the global `(row, col)` indices, which keeps shared cells of
/// neighbouring boxes in the same relative order.
#[derive(Clone, Copy)]
pub struct CellComparator<'a> {
    x: &'a GroupClasses,
    y: &'a GroupClasses,
}

impl CellComparator<'_> {
    pub fn rows(&self) -> usize {
        self.x.len
    }

    pub fn cols(&self) -> usize {
        self.y.len
    }

    /// `u < v`, without building an [`Ordering`].
    #[inline(always)]
    pub fn less(&self, (r1, c1): (usize, usize), (r2, c2): (usize, usize)) -> bool {
        let cx = self.x.classes[r1 * self.x.len + r2];
        let cy = self.y.classes[c2 * self.y.len + c1];
        cx < cy || (cx == cy && (self.x.global[r1], self.y.global[c1]) < (self.x.global[r2], self.y.global[c2]))
    }

    /// [`less`](Self::less) on cells packed as `row << 16 | col`, which must
    /// lie inside the box.
    #[inline(always)]
    fn less_packed(&self, u: u32, v: u32) -> bool {
        let (r1, c1) = ((u >> 16) as usize, (u & 0xffff) as usize);
        let (r2, c2) = ((v >> 16) as usize, (v & 0xffff) as usize);
        debug_assert!(r1.max(r2) < self.x.len && c1.max(c2) < self.y.len);
        // SAFETY: the class tables are len * len
        let (cx, cy) = unsafe {
            (*self.x.classes.get_unchecked(r1 * self.x.len + r2), *self.y.classes.get_unchecked(c2 * self.y.len + c1))
        };
        cx < cy || (cx == cy && (self.x.global[r1], self.y.global[c1]) < (self.x.global[r2], self.y.global[c2]))
    }

    #[inline]
    pub fn cmp(&self, (r1, c1): (usize, usize), (r2, c2): (usize, usize)) -> Ordering {
        let cx = self.x.classes[r1 * self.x.len + r2];
        let cy = self.y.classes[c2 * self.y.len + c1];
        cx.cmp(&cy).then_with(|| (self.x.global[r1], self.y.global[c1]).cmp(&(self.x.global[r2], self.y.global[c2])))
    }
}

/// Sorting permutation of one box, cells packed as `row << 16 | col`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxOrder {
    pub rows: usize,
    pub cols: usize,
    pub order: Vec<u32>,
}

impl BoxOrder {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn cell(&self, rank: usize) -> (usize, usize) {
        let u = self.order[rank];
        ((u >> 16) as usize, (u & 0xffff) as usize)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(|r| self.cell(r))
    }

    /// Inverse permutation: `ranks()[row * cols + col]`.
    pub fn ranks(&self) -> Vec<u32> {
        let mut inv = vec![0u32; self.order.len()];
        for (rank, &u) in self.order.iter().enumerate() {
            inv[(u >> 16) as usize * self.cols + (u & 0xffff) as usize] = rank as u32;
        }
        inv
    }
}

/// Sorting permutation of `group x + group y`, resolved entirely through
/// difference ranks. The ledger is only borrowed: this never executes a
/// comparison.
pub fn box_order(d: &DifferenceOrder, x: usize, y: usize, _ledger: &ComparisonLedger) -> Result<BoxOrder> {
    let cmp = d.comparator(x, y)?;
    let (rows, cols) = (cmp.rows(), cmp.cols());
    let len = rows * cols;
    // row-major layout: each row is an ascending run; merge runs bottom-up
    if rows > 1 << 16 || cols > 1 << 16 {
        return Err(Error::InvalidArgument(format!("box {rows} x {cols} is too large")));
    }
    let mut order: Vec<u32> = (0..rows as u32).flat_map(|r| (0..cols as u32).map(move |c| r << 16 | c)).collect();
    let mut buf = vec![0u32; len];
    let mut width = cols.max(1);
    while width < len {
        for lo in (0..len).step_by(2 * width) {
            let mid = (lo + width).min(len);
            let hi = (lo + 2 * width).min(len);
            merge_runs(&cmp, &order[lo..hi], mid - lo, &mut buf[lo..hi]);
        }
        std::mem::swap(&mut order, &mut buf);
        width *= 2;
    }
    Ok(BoxOrder { rows, cols, order })
}

/// Merges the sorted runs `src[..mid]` and `src[mid..]` into `dst`, taking the
/// smallest cells from the front and the largest from the back in the same
/// loop so the two dependency chains overlap.
fn merge_runs(cmp: &CellComparator<'_>, src: &[u32], mid: usize, dst: &mut [u32]) {
    let n = src.len();
    assert_eq!(dst.len(), n);
    // src[a..ea] and src[b..eb] are still unplaced; dst[..kf] and dst[kb..] are done
    let (mut a, mut ea, mut b, mut eb) = (0, mid, mid, n);
    let (mut kf, mut kb) = (0, n);
    while a < ea && b < eb && kf + 2 <= kb {
        // SAFETY: every cursor indexes a nonempty remaining range, and kf < kb
        unsafe {
            let (oa, ob) = (*src.get_unchecked(a), *src.get_unchecked(b));
            let (la, lb) = (*src.get_unchecked(ea - 1), *src.get_unchecked(eb - 1));
            let take_b = cmp.less_packed(ob, oa);
            let take_a = cmp.less_packed(lb, la);
            *dst.get_unchecked_mut(kf) = if take_b { ob } else { oa };
            *dst.get_unchecked_mut(kb - 1) = if take_a { la } else { lb };
            b += take_b as usize;
            a += !take_b as usize;
            ea -= take_a as usize;
            eb -= !take_a as usize;
        }
        kf += 1;
        kb -= 1;
    }
    while a < ea && b < eb {
        let take_b = cmp.less_packed(src[b], src[a]);
        dst[kf] = if take_b { src[b] } else { src[a] };
        b += take_b as usize;
        a += !take_b as usize;
        kf += 1;
    }
    dst[kf..kf + ea - a].copy_from_slice(&src[a..ea]);
    kf += ea - a;
    dst[kf..kf + eb - b].copy_from_slice(&src[b..eb]);
}

/// Sorts an arbitrary subset of cells of `group x + group y` with the same
/// comparator as [`box_order`]; the result equals the box order filtered to
/// the subset.
pub fn sorted_subset(d: &DifferenceOrder, x: usize, y: usize, cells: &mut [(usize, usize)]) -> Result<()> {
    let cmp = d.comparator(x, y)?;
    cells.sort_by(|&u, &v| cmp.cmp(u, v));
    Ok(())
}
