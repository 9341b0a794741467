//! Backtracking over the free blocks of the multiplicity tensor.
//!
//! Notation: `H` is the Cartan matrix of `A`, `C` the unknown `cartanB`, and
//! `M_ij` the `r×r` block `m[i][j]`. The composition law reads
//! `M_ij C M_kl = H_jk M_il`.
//!
//! For a faithful solution every block is nonzero (a nonzero `M_il` forces
//! `M_ij ≠ 0` and `M_kl ≠ 0` for all `j`, `k`, because `H_jj ≥ 1`), and
//! `M_il = M_i1 C M_1l / H_11`. So only `M_11`, the first block column and
//! the first block row are enumerated; the rest is derived and then checked.
//! Rows of `M_i1` lie in the row space of `M_11` and columns of `M_1l` in its
//! column space, by the equations `(i,1,1,1)` and `(1,1,1,l)`.
//!
//! Stacking the blocks `M_ij` over `j` and `M_kl` over `k` gives
//! `(stack) C (stack) = H ⊗ M_il`, so `rank(H) · rank(M_il) ≤ r`. The
//! search enumerates `M_11` only up to that rank.
//!
//! Once the free blocks are fixed, the equations among them are linear in
//! `C`; they are solved exactly by integer elimination and bounded
//! back-substitution. Rows `t` of `C` for which column `t` of every block is
//! zero enter no equation and no matrix `[F_ij]`; they are reported as the
//! unit row `e_t`.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

use super::candidate::{canonical_form, for_each_permutation, CandidateRep};
use super::rank_one::rank_one_solutions;
use crate::algebra::Algebra;
use crate::linalg::{rank, to_rational};

type Block = Vec<i64>;

pub(crate) struct Budget {
    limit: u64,
    used: AtomicU64,
    exceeded: AtomicBool,
}

impl Budget {
    pub(crate) fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
            exceeded: AtomicBool::new(false),
        }
    }

    pub(crate) fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    pub(crate) fn exceeded(&self) -> bool {
        self.exceeded.load(Ordering::Relaxed)
    }
}

#[derive(Debug)]
pub(super) struct Abort;

const FLUSH: u64 = 1 << 12;

pub(super) struct Meter<'a> {
    budget: &'a Budget,
    local: u64,
}

impl<'a> Meter<'a> {
    pub(super) fn new(budget: &'a Budget) -> Self {
        Meter { budget, local: 0 }
    }

    #[inline]
    pub(super) fn tick(&mut self) -> Result<(), Abort> {
        self.local += 1;
        if self.local == FLUSH {
            self.flush()?;
        }
        Ok(())
    }

    pub(super) fn flush(&mut self) -> Result<(), Abort> {
        let total = self.budget.used.fetch_add(self.local, Ordering::Relaxed) + self.local;
        self.local = 0;
        if total > self.budget.limit {
            self.budget.exceeded.store(true, Ordering::Relaxed);
        }
        if self.budget.exceeded() {
            Err(Abort)
        } else {
            Ok(())
        }
    }
}

/// Rank of a small integer matrix by fraction-free elimination.
fn int_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            if m[i][c] != 0 {
                let (a, b) = (m[rank][c], m[i][c]);
                for k in c..cols {
                    m[i][k] = m[i][k] * a - m[rank][k] * b;
                }
                let g = m[i].iter().fold(0i128, |g, &x| gcd(g, x));
                if g > 1 {
                    m[i].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Tuples in `0..=cap` of length `len`, in lexicographic order.
pub(super) fn all_vectors(len: usize, cap: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=cap).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Row-echelon system over the integers, built incrementally.
#[derive(Clone)]
pub(super) struct Echelon {
    width: usize,
    /// Rows `(coefficients, rhs)` sorted by pivot column.
    rows: Vec<(Vec<i128>, i128)>,
}

impl Echelon {
    pub(super) fn new(width: usize) -> Self {
        Echelon {
            width,
            rows: Vec::new(),
        }
    }

    fn pivot(row: &[i128]) -> Option<usize> {
        row.iter().position(|&x| x != 0)
    }

    /// Adds an equation; returns false if the system became inconsistent.
    pub(super) fn insert(&mut self, mut coef: Vec<i128>, mut rhs: i128) -> bool {
        for (row, row_rhs) in &self.rows {
            let p = Self::pivot(row).expect("stored rows are nonzero");
            if coef[p] != 0 {
                let (a, b) = (row[p], coef[p]);
                for k in 0..self.width {
                    coef[k] = coef[k] * a - row[k] * b;
                }
                rhs = rhs * a - row_rhs * b;
                let g = coef.iter().fold(rhs, |g, &x| gcd(g, x));
                if g > 1 {
                    coef.iter_mut().for_each(|x| *x /= g);
                    rhs /= g;
                }
            }
        }
        match Self::pivot(&coef) {
            None => rhs == 0,
            Some(p) => {
                if coef[p] < 0 {
                    coef.iter_mut().for_each(|x| *x = -*x);
                    rhs = -rhs;
                }
                let at = self
                    .rows
                    .iter()
                    .position(|(row, _)| Self::pivot(row).unwrap() > p)
                    .unwrap_or(self.rows.len());
                self.rows.insert(at, (coef, rhs));
                true
            }
        }
    }

    /// Necessary condition for an integer solution with every variable `v`
    /// in `lo(v)..=hi`: each row is attainable on its own.
    pub(super) fn row_feasible(&self, lo: impl Fn(usize) -> i128, hi: i128) -> bool {
        self.rows.iter().all(|(row, rhs)| {
            let (mut min, mut max, mut g) = (0i128, 0i128, 0i128);
            for (v, &a) in row.iter().enumerate() {
                if a > 0 {
                    min += a * lo(v);
                    max += a * hi;
                } else if a < 0 {
                    min += a * hi;
                    max += a * lo(v);
                }
                g = gcd(g, a);
            }
            min <= *rhs && *rhs <= max && rhs % g == 0
        })
    }
}

struct Choices<'c> {
    rows: &'c [Vec<i64>],
    cols: &'c [Vec<i64>],
}

/// The block being filled: row by row for `M_i1`, column by column for `M_1l`.
struct Line {
    step: usize,
    slot: usize,
    by_rows: bool,
}

pub(crate) struct RankSearch<'a> {
    pub(super) n: usize,
    pub(super) r: usize,
    pub(super) cap: i64,
    pub(super) h: Vec<Vec<i64>>,
    pub(super) rank_bound: usize,
    require_dichotomy: bool,
    /// Free blocks in assignment order; step 0 is `M_11`.
    free_order: Vec<(usize, usize)>,
    /// Equations `(a,b,c,d)` among free blocks that become complete at each step.
    eqs_at_step: Vec<Vec<(usize, usize, usize, usize)>>,
    /// Derived blocks `(i,l)` whose defining pair is complete at each step.
    derived_at_step: Vec<Vec<(usize, usize)>>,
    pub(super) budget: &'a Budget,
}

impl<'a> RankSearch<'a> {
    pub(crate) fn new(alg: &Algebra, r: usize, cap: i64, require_dichotomy: bool, budget: &'a Budget) -> Self {
        let n = alg.n();
        let h: Vec<Vec<i64>> = alg.cartan_matrix().to_rows();
        let h_rank = rank(&to_rational(&alg.cartan_matrix()));
        let rank_bound = (r / h_rank).min(r);

        let mut free_order = vec![(0, 0)];
        for i in 1..n {
            free_order.push((i, 0));
            free_order.push((0, i));
        }
        let step_of = |a: usize, b: usize| free_order.iter().position(|&x| x == (a, b));
        let mut eqs_at_step = vec![Vec::new(); free_order.len()];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if let (Some(x), Some(y), Some(z)) = (step_of(a, b), step_of(c, d), step_of(a, d)) {
                            eqs_at_step[x.max(y).max(z)].push((a, b, c, d));
                        }
                    }
                }
            }
        }
        let mut derived_at_step = vec![Vec::new(); free_order.len()];
        for i in 1..n {
            for l in 1..n {
                let s = step_of(i, 0).unwrap().max(step_of(0, l).unwrap());
                derived_at_step[s].push((i, l));
            }
        }
        RankSearch {
            n,
            r,
            cap,
            h,
            rank_bound,
            require_dichotomy,
            free_order,
            eqs_at_step,
            derived_at_step,
            budget,
        }
    }

    fn k1(&self) -> i64 {
        self.h[0][0]
    }

    fn mul(&self, x: &[i64], y: &[i64]) -> Block {
        let r = self.r;
        let mut out = vec![0; r * r];
        for s in 0..r {
            for t in 0..r {
                let a = x[s * r + t];
                if a == 0 {
                    continue;
                }
                for v in 0..r {
                    out[s * r + v] += a * y[t * r + v];
                }
            }
        }
        out
    }

    /// Nonzero `M_11` candidates, canonical under simultaneous permutation.
    pub(crate) fn first_blocks(&self) -> Result<Vec<Block>, Abort> {
        let r = self.r;
        let mut meter = Meter::new(self.budget);
        let mut out = Vec::new();
        let mut cur = vec![0i64; r * r];
        self.fill_first(0, &mut cur, &mut out, &mut meter)?;
        meter.flush()?;
        Ok(out)
    }

    fn fill_first(&self, pos: usize, cur: &mut Block, out: &mut Vec<Block>, meter: &mut Meter) -> Result<(), Abort> {
        let r = self.r;
        if pos == r * r {
            if self.first_block_ok(cur) {
                out.push(cur.clone());
            }
            return Ok(());
        }
        let (s, v) = (pos / r, pos % r);
        for x in 0..=self.cap {
            meter.tick()?;
            cur[pos] = x;
            if self.rank_bound == 1 {
                // all 2×2 minors with both corners already placed
                let ok = (0..s).all(|s2| (0..v).all(|v2| x * cur[s2 * r + v2] == cur[s * r + v2] * cur[s2 * r + v]));
                if !ok {
                    continue;
                }
            }
            self.fill_first(pos + 1, cur, out, meter)?;
        }
        cur[pos] = 0;
        Ok(())
    }

    fn first_block_ok(&self, m: &Block) -> bool {
        let r = self.r;
        if m.iter().all(|&x| x == 0) {
            return false;
        }
        let k1 = self.k1();
        let sq = self.mul(m, m);
        let rows: Vec<i64> = (0..r).map(|s| m[s * r..(s + 1) * r].iter().sum()).collect();
        let cols: Vec<i64> = (0..r).map(|v| (0..r).map(|s| m[s * r + v]).sum()).collect();
        for s in 0..r {
            for v in 0..r {
                let rhs = k1 * m[s * r + v];
                if sq[s * r + v] > rhs || rhs > self.cap * rows[s] * cols[v] {
                    return false;
                }
            }
        }
        if self.rank_bound > 1 && self.rank_bound < r {
            let rows: Vec<Vec<i64>> = m.chunks(r).map(<[i64]>::to_vec).collect();
            if int_rank(&rows) > self.rank_bound {
                return false;
            }
        }
        let mut canonical = true;
        for_each_permutation(r, |p| {
            if canonical {
                let permuted = (0..r * r).map(|idx| m[p[idx / r] * r + p[idx % r]]);
                if permuted.lt(m.iter().copied()) {
                    canonical = false;
                }
            }
        });
        canonical
    }

    /// All solutions with the given `M_11`.
    pub(crate) fn explore(&self, m11: &Block) -> Result<Vec<CandidateRep>, Abort> {
        let r = self.r;
        let k1 = self.k1();
        let m11_rows: Vec<Vec<i64>> = m11.chunks(r).map(<[i64]>::to_vec).collect();
        let m11_cols: Vec<Vec<i64>> = (0..r).map(|v| (0..r).map(|s| m11[s * r + v]).collect()).collect();
        let base = int_rank(&m11_rows);
        let row_sums: Vec<i64> = m11_rows.iter().map(|x| x.iter().sum()).collect();
        let col_sums: Vec<i64> = m11_cols.iter().map(|x| x.iter().sum()).collect();

        let candidates = all_vectors(r, self.cap);
        let in_span = |basis: &[Vec<i64>], x: &Vec<i64>| {
            let mut rows = basis.to_vec();
            rows.push(x.clone());
            int_rank(&rows) == base
        };
        // rows x of M_i1: x M_11 ≤ k1 x and k1 x ≤ cap |x| colsum(M_11)
        let row_choices: Vec<Vec<i64>> = candidates
            .iter()
            .filter(|x| in_span(&m11_rows, x))
            .filter(|x| {
                let total: i64 = x.iter().sum();
                (0..r).all(|v| {
                    let lhs: i64 = (0..r).map(|t| x[t] * m11[t * r + v]).sum();
                    lhs <= k1 * x[v] && k1 * x[v] <= self.cap * total * col_sums[v]
                })
            })
            .cloned()
            .collect();
        let col_choices: Vec<Vec<i64>> = candidates
            .iter()
            .filter(|y| in_span(&m11_cols, y))
            .filter(|y| {
                let total: i64 = y.iter().sum();
                (0..r).all(|s| {
                    let lhs: i64 = (0..r).map(|u| m11[s * r + u] * y[u]).sum();
                    lhs <= k1 * y[s] && k1 * y[s] <= self.cap * row_sums[s] * total
                })
            })
            .cloned()
            .collect();

        let mut blocks: Vec<Block> = vec![vec![0; r * r]; self.n * self.n];
        blocks[0] = m11.clone();
        let mut stabilizer = Vec::new();
        for_each_permutation(r, |p| {
            if (0..r * r).all(|idx| m11[p[idx / r] * r + p[idx % r]] == m11[idx]) {
                stabilizer.push(p.to_vec());
            }
        });
        let mut meter = Meter::new(self.budget);
        let mut out = Vec::new();
        let system = if self.step_ok(0, &blocks) {
            self.extend_system(0, &blocks, &Echelon::new(r * r))
        } else {
            None
        };
        if let Some(system) = system {
            let choices = Choices {
                rows: &row_choices,
                cols: &col_choices,
            };
            self.assign(1, &mut blocks, &choices, &stabilizer, &system, &mut out, &mut meter)?;
        }
        meter.flush()?;
        Ok(out)
    }

    fn assign(
        &self,
        step: usize,
        blocks: &mut Vec<Block>,
        choices: &Choices,
        stabilizer: &[Vec<usize>],
        system: &Echelon,
        out: &mut Vec<CandidateRep>,
        meter: &mut Meter,
    ) -> Result<(), Abort> {
        if step == self.free_order.len() {
            return self.leaf(blocks, system, out, meter);
        }
        let (a, b) = self.free_order[step];
        let line = Line {
            step,
            slot: a * self.n + b,
            by_rows: b == 0,
        };
        self.fill_block(&line, 0, blocks, choices, stabilizer, system, out, meter)
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_block(
        &self,
        line: &Line,
        pos: usize,
        blocks: &mut Vec<Block>,
        choices: &Choices,
        stabilizer: &[Vec<usize>],
        system: &Echelon,
        out: &mut Vec<CandidateRep>,
        meter: &mut Meter,
    ) -> Result<(), Abort> {
        let r = self.r;
        if pos == r {
            let block = &blocks[line.slot];
            if block.iter().all(|&x| x == 0) || !self.step_ok(line.step, blocks) {
                return Ok(());
            }
            // Lex-leader under the permutations fixing the blocks chosen so far.
            let mut next = Vec::new();
            for p in stabilizer {
                let image = (0..r * r).map(|idx| block[p[idx / r] * r + p[idx % r]]);
                match image.cmp(block.iter().copied()) {
                    std::cmp::Ordering::Less => return Ok(()),
                    std::cmp::Ordering::Equal => next.push(p.clone()),
                    std::cmp::Ordering::Greater => {}
                }
            }
            let Some(system) = self.extend_system(line.step, blocks, system) else {
                return Ok(());
            };
            return self.assign(line.step + 1, blocks, choices, &next, &system, out, meter);
        }
        let options = if line.by_rows { choices.rows } else { choices.cols };
        for x in options {
            meter.tick()?;
            let block = &mut blocks[line.slot];
            for (k, &value) in x.iter().enumerate() {
                if line.by_rows {
                    block[pos * r + k] = value;
                } else {
                    block[k * r + pos] = value;
                }
            }
            if self.partial_ok(line, pos + 1, blocks) {
                self.fill_block(line, pos + 1, blocks, choices, stabilizer, system, out, meter)?;
            }
        }
        let block = &mut blocks[line.slot];
        for k in 0..r {
            if line.by_rows {
                block[pos * r + k] = 0;
            } else {
                block[k * r + pos] = 0;
            }
        }
        Ok(())
    }

    /// Lower bounds `(M_ab M_cd)[s][v] ≤ H_bc M_ad[s][v]` while the block in
    /// `line` has only its first `filled` rows (or columns) set. Unset
    /// entries are zero, so the left side only grows as the block fills up.
    fn partial_ok(&self, line: &Line, filled: usize, blocks: &[Block]) -> bool {
        let (n, r) = (self.n, self.r);
        for &(a, b, c, d) in &self.eqs_at_step[line.step] {
            let (x, y, z) = (&blocks[a * n + b], &blocks[c * n + d], &blocks[a * n + d]);
            let rhs_partial = a * n + d == line.slot;
            let hbc = self.h[b][c];
            for s in 0..r {
                for v in 0..r {
                    if rhs_partial && (if line.by_rows { s >= filled } else { v >= filled }) {
                        continue;
                    }
                    let lower: i64 = (0..r).map(|t| x[s * r + t] * y[t * r + v]).sum();
                    if lower > hbc * z[s * r + v] {
                        return false;
                    }
                }
            }
        }
        let k1 = self.k1();
        for &(i, l) in &self.derived_at_step[line.step] {
            let (x, y) = (&blocks[i * n], &blocks[l]);
            for s in 0..r {
                for v in 0..r {
                    let lower: i64 = (0..r).map(|t| x[s * r + t] * y[t * r + v]).sum();
                    if lower > k1 * self.cap {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `C`-free bounds for the equations completed at `step`, using
    /// `I ≤ C` on the diagonal and `C ≤ cap`.
    fn step_ok(&self, step: usize, blocks: &[Block]) -> bool {
        let (n, r) = (self.n, self.r);
        for &(a, b, c, d) in &self.eqs_at_step[step] {
            let (x, y, z) = (&blocks[a * n + b], &blocks[c * n + d], &blocks[a * n + d]);
            let lower = self.mul(x, y);
            let hbc = self.h[b][c];
            for s in 0..r {
                let xs: i64 = x[s * r..(s + 1) * r].iter().sum();
                for v in 0..r {
                    let rhs = hbc * z[s * r + v];
                    if lower[s * r + v] > rhs {
                        return false;
                    }
                    if rhs > 0 {
                        let yv: i64 = (0..r).map(|u| y[u * r + v]).sum();
                        if rhs > self.cap * xs * yv {
                            return false;
                        }
                    }
                }
            }
        }
        let k1 = self.k1();
        for &(i, l) in &self.derived_at_step[step] {
            let lower = self.mul(&blocks[i * n], &blocks[l]);
            if lower.iter().any(|&x| x > k1 * self.cap) {
                return false;
            }
        }
        true
    }

    /// `system` plus the equations completed at `step`, or `None` if the
    /// result has no solution with `C` in range.
    fn extend_system(&self, step: usize, blocks: &[Block], system: &Echelon) -> Option<Echelon> {
        let (n, r) = (self.n, self.r);
        let mut system = system.clone();
        for &(a, b, c, d) in &self.eqs_at_step[step] {
            let (x, y, z) = (&blocks[a * n + b], &blocks[c * n + d], &blocks[a * n + d]);
            let hbc = self.h[b][c] as i128;
            for s in 0..r {
                for v in 0..r {
                    let mut coef = vec![0i128; r * r];
                    let mut any = false;
                    for t in 0..r {
                        let xs = x[s * r + t];
                        if xs == 0 {
                            continue;
                        }
                        for u in 0..r {
                            let yv = y[u * r + v];
                            if yv != 0 {
                                coef[t * r + u] += (xs * yv) as i128;
                                any = true;
                            }
                        }
                    }
                    let rhs = hbc * z[s * r + v] as i128;
                    if !any && rhs == 0 {
                        continue;
                    }
                    if !system.insert(coef, rhs) {
                        return None;
                    }
                }
            }
        }
        let lo = |v: usize| i128::from(v / r == v % r);
        system.row_feasible(lo, self.cap as i128).then_some(system)
    }

    pub(super) fn leaf(
        &self,
        blocks: &[Block],
        system: &Echelon,
        out: &mut Vec<CandidateRep>,
        meter: &mut Meter,
    ) -> Result<(), Abort> {
        let (n, r) = (self.n, self.r);
        let get = |a: usize, b: usize| &blocks[a * n + b];

        // X and Y unions; transitivity needs every object in some X_i.
        let mut ux = vec![false; r];
        let mut uy = vec![false; r];
        for k in 0..n {
            let (col_block, row_block) = (get(k, 0), get(0, k));
            for s in 0..r {
                for t in 0..r {
                    if col_block[s * r + t] > 0 {
                        ux[s] = true;
                    }
                    if row_block[s * r + t] > 0 {
                        uy[t] = true;
                    }
                }
            }
        }
        if r > 1 && !ux.iter().all(|&x| x) {
            return Ok(());
        }

        let var_of = |t: usize, u: usize| t * r + u;
        let width = r * r;
        let visible = |var: usize| uy[var / r];
        let mut c = vec![0i64; width];
        for t in 0..r {
            if !uy[t] {
                c[var_of(t, t)] = 1;
            }
        }
        let mut pivot_row = vec![None; width];
        for (idx, (row, _)) in system.rows.iter().enumerate() {
            pivot_row[Echelon::pivot(row).unwrap()] = Some(idx);
        }
        let order: Vec<usize> = (0..width).rev().filter(|&v| visible(v)).collect();
        self.solve_c(0, &order, &pivot_row, system, &mut c, blocks, out, meter)
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_c(
        &self,
        idx: usize,
        order: &[usize],
        pivot_row: &[Option<usize>],
        system: &Echelon,
        c: &mut Vec<i64>,
        blocks: &[Block],
        out: &mut Vec<CandidateRep>,
        meter: &mut Meter,
    ) -> Result<(), Abort> {
        if idx == order.len() {
            // Rows of the system whose pivot is not a visible variable must
            // still be satisfied (their columns are all assigned now).
            for (row, rhs) in &system.rows {
                let lhs: i128 = row.iter().zip(c.iter()).map(|(&a, &x)| a * x as i128).sum();
                if lhs != *rhs {
                    return Ok(());
                }
            }
            if let Some(rep) = self.complete(blocks, c) {
                out.push(rep);
            }
            return Ok(());
        }
        meter.tick()?;
        let var = order[idx];
        let lo = if var / self.r == var % self.r { 1 } else { 0 };
        match pivot_row[var] {
            Some(ri) => {
                let (row, rhs) = &system.rows[ri];
                let rest: i128 = (var + 1..row.len()).map(|k| row[k] * c[k] as i128).sum();
                let num = rhs - rest;
                let p = row[var];
                if num % p != 0 {
                    return Ok(());
                }
                let x = num / p;
                if x < lo as i128 || x > self.cap as i128 {
                    return Ok(());
                }
                c[var] = x as i64;
                self.solve_c(idx + 1, order, pivot_row, system, c, blocks, out, meter)?;
            }
            None => {
                for x in lo..=self.cap {
                    c[var] = x;
                    self.solve_c(idx + 1, order, pivot_row, system, c, blocks, out, meter)?;
                }
            }
        }
        c[var] = 0;
        Ok(())
    }

    /// Derives the remaining blocks from `C` and checks every condition.
    fn complete(&self, blocks: &[Block], c: &[i64]) -> Option<CandidateRep> {
        let (n, r) = (self.n, self.r);
        let k1 = self.k1();
        let mut all: Vec<Block> = Vec::with_capacity(n * n);
        for i in 0..n {
            for l in 0..n {
                match i == 0 || l == 0 {
                    true => all.push(blocks[i * n + l].clone()),
                    false => {
                        let prod = self.mul(&self.mul(&blocks[i * n], c), &blocks[l]);
                        if prod.iter().any(|&x| x % k1 != 0 || x / k1 > self.cap) {
                            return None;
                        }
                        let derived: Block = prod.iter().map(|&x| x / k1).collect();
                        if derived.iter().all(|&x| x == 0) {
                            return None;
                        }
                        all.push(derived);
                    }
                }
            }
        }
        let with_c: Vec<Block> = all.iter().map(|m| self.mul(m, c)).collect();
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let lhs = self.mul(&with_c[a * n + b], &all[cc * n + d]);
                        let h = self.h[b][cc];
                        let rhs = &all[a * n + d];
                        if lhs.iter().zip(rhs).any(|(&x, &y)| x != h * y) {
                            return None;
                        }
                    }
                }
            }
        }
        let mut total = vec![0i64; r * r];
        for m in &with_c {
            for (t, x) in total.iter_mut().zip(m) {
                *t += x;
            }
        }
        for s in 0..r {
            total[s * r + s] += 1;
        }
        if total.iter().any(|&x| x <= 0) {
            return None;
        }
        if self.require_dichotomy {
            for i in 0..n {
                let f = &with_c[i * n + i];
                let k = self.h[i][i];
                if (0..r).any(|s| f[s * r + s] != 0 && f[s * r + s] != k) {
                    return None;
                }
            }
        }
        let cartan_b = c.chunks(r).map(<[i64]>::to_vec).collect();
        let m = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| all[i * n + j].chunks(r).map(<[i64]>::to_vec).collect())
                    .collect()
            })
            .collect();
        let rep = CandidateRep::new(cartan_b, m).expect("search builds well-formed candidates");
        Some(canonical_form(&rep))
    }
}

/// Faithful solutions of rank `r`, canonical and sorted.
pub(crate) fn faithful_solutions(
    alg: &Algebra,
    r: usize,
    cap: i64,
    require_dichotomy: bool,
    budget: &Budget,
) -> Result<Vec<CandidateRep>, Abort> {
    let rs = RankSearch::new(alg, r, cap, require_dichotomy, budget);
    match rs.rank_bound {
        0 => Ok(Vec::new()),
        1 => sorted(rank_one_solutions(&rs)?),
        _ => general_solutions(&rs),
    }
}

fn sorted(found: Vec<CandidateRep>) -> Result<Vec<CandidateRep>, Abort> {
    let set: BTreeSet<CandidateRep> = found.into_iter().collect();
    Ok(set.into_iter().collect())
}

/// The block search without the rank-one specialisation.
pub(super) fn general_solutions(rs: &RankSearch) -> Result<Vec<CandidateRep>, Abort> {
    if rs.rank_bound == 0 {
        return Ok(Vec::new());
    }
    let firsts = rs.first_blocks()?;
    let found: Vec<Vec<CandidateRep>> = firsts.par_iter().map(|m11| rs.explore(m11)).collect::<Result<_, _>>()?;
    sorted(found.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_rank() {
        assert_eq!(int_rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(int_rank(&[vec![1, 2], vec![2, 3]]), 2);
        assert_eq!(int_rank(&[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(int_rank(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 2]]), 2);
    }

    #[test]
    fn echelon_detects_inconsistency() {
        let mut e = Echelon::new(2);
        assert!(e.insert(vec![1, 1], 2));
        assert!(e.insert(vec![2, 2], 4));
        assert_eq!(e.rows.len(), 1);
        assert!(!e.insert(vec![1, 1], 3));
    }

    #[test]
    fn echelon_scales_columns_left_of_the_pivot() {
        // x1 + x2 = 1 is stored first; 2 x0 + 2 x1 = 2 must not lose its x0 term.
        let mut e = Echelon::new(3);
        assert!(e.insert(vec![0, 1, 1], 1));
        assert!(e.insert(vec![2, 2, 0], 2));
        let (x0, x1, x2) = (1i128, 0i128, 1i128);
        for (row, rhs) in &e.rows {
            assert_eq!(row[0] * x0 + row[1] * x1 + row[2] * x2, *rhs);
        }
    }

    #[test]
    fn vectors_are_enumerated_in_order() {
        let v = all_vectors(2, 1);
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
