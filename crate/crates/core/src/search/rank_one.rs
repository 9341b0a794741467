//! The block search specialised to rank-one blocks.
//!
//! When `r < 2 rank(H)` every block of a faithful solution has rank one.
//! Blocks in one block row share their column space and blocks in one block
//! column share their row space, so `M_ij = μ_ij x_i y_jᵀ` with primitive
//! nonnegative `x_i`, `y_j` and positive integers `μ_ij`. The composition law
//! turns into scalar equations: `μ_il = μ_i1 μ_1l / μ_11` and
//! `y_jᵀ C x_k = H_jk μ_11 / (μ_1j μ_k1)`, which is `n²` linear equations in
//! `C` instead of `n⁴ r²`.
//!
//! The vectors are chosen in the order `(x_1, y_1), x_2, y_2, …`, each one a
//! lex-leader under the permutations of objects fixing the earlier ones.

use super::candidate::{for_each_permutation, CandidateRep};
use super::engine::{all_vectors, Abort, Echelon, Meter, RankSearch};

struct Vector {
    v: Vec<i64>,
    max: i64,
}

struct Walk<'a, 'b> {
    rs: &'a RankSearch<'b>,
    vectors: Vec<Vector>,
    xs: Vec<usize>,
    ys: Vec<usize>,
    /// `μ_k1`, with `μ_11` at index 0.
    mu_col: Vec<i64>,
    /// `μ_1l`, with `μ_11` at index 0.
    mu_row: Vec<i64>,
    out: Vec<CandidateRep>,
}

pub(super) fn rank_one_solutions(rs: &RankSearch) -> Result<Vec<CandidateRep>, Abort> {
    let (n, r) = (rs.n, rs.r);
    let vectors: Vec<Vector> = all_vectors(r, rs.cap)
        .into_iter()
        .filter(|v| v.iter().fold(0, |g, &x| gcd(g, x)) == 1)
        .map(|v| Vector {
            max: *v.iter().max().unwrap(),
            v,
        })
        .collect();
    let mut walk = Walk {
        rs,
        vectors,
        xs: Vec::with_capacity(n),
        ys: Vec::with_capacity(n),
        mu_col: Vec::with_capacity(n),
        mu_row: Vec::with_capacity(n),
        out: Vec::new(),
    };
    let mut meter = Meter::new(rs.budget);
    let mut all_perms = Vec::new();
    for_each_permutation(r, |p| all_perms.push(p.to_vec()));
    walk.first(&all_perms, &mut meter)?;
    meter.flush()?;
    Ok(walk.out)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Splits `stab` by comparing `v` with its images: `None` if some image is
/// lexicographically larger, otherwise the permutations fixing `v`.
fn leader(v: &[i64], stab: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
    let mut fixed = Vec::new();
    for p in stab {
        match p.iter().map(|&t| v[t]).cmp(v.iter().copied()) {
            std::cmp::Ordering::Greater => return None,
            std::cmp::Ordering::Equal => fixed.push(p.clone()),
            std::cmp::Ordering::Less => {}
        }
    }
    Some(fixed)
}

impl Walk<'_, '_> {
    fn mu(&self, i: usize, l: usize) -> Option<i64> {
        let num = self.mu_col[i] * self.mu_row[l];
        (num % self.mu_col[0] == 0).then(|| num / self.mu_col[0])
    }

    /// `μ_il` is integral and `μ_il x_i y_lᵀ` stays within the cap.
    fn block_ok(&self, i: usize, l: usize) -> bool {
        self.mu(i, l)
            .is_some_and(|m| m * self.vectors[self.xs[i]].max * self.vectors[self.ys[l]].max <= self.rs.cap)
    }

    /// Adds `y_jᵀ C x_k = H_jk μ_11 / (μ_1j μ_k1)` to `system`.
    fn equation(&self, j: usize, k: usize, system: &mut Echelon) -> bool {
        let r = self.rs.r;
        let target = self.rs.h[j][k] * self.mu_col[0];
        let den = self.mu_row[j] * self.mu_col[k];
        if target % den != 0 {
            return false;
        }
        let g = target / den;
        let (y, x) = (&self.vectors[self.ys[j]].v, &self.vectors[self.xs[k]].v);
        // C ≥ I on the diagonal and C ≤ cap bound the left side.
        let lower: i64 = (0..r).map(|t| y[t] * x[t]).sum();
        let upper = self.rs.cap * y.iter().sum::<i64>() * x.iter().sum::<i64>();
        if g < lower || g > upper {
            return false;
        }
        let mut coef = vec![0i128; r * r];
        for t in 0..r {
            for u in 0..r {
                coef[t * r + u] = (y[t] * x[u]) as i128;
            }
        }
        system.insert(coef, g as i128)
    }

    fn feasible(&self, system: &Echelon) -> bool {
        let r = self.rs.r;
        system.row_feasible(|v| i128::from(v / r == v % r), self.rs.cap as i128)
    }

    fn first(&mut self, perms: &[Vec<usize>], meter: &mut Meter) -> Result<(), Abort> {
        let r = self.rs.r;
        let count = self.vectors.len();
        for xi in 0..count {
            for yi in 0..count {
                meter.tick()?;
                let (x, y) = (&self.vectors[xi], &self.vectors[yi]);
                // Pairs (x[t], y[t]) non-increasing: one representative per orbit.
                if (1..r).any(|t| (x.v[t], y.v[t]) > (x.v[t - 1], y.v[t - 1])) {
                    continue;
                }
                let stab: Vec<Vec<usize>> = perms
                    .iter()
                    .filter(|p| p.iter().enumerate().all(|(t, &s)| x.v[t] == x.v[s] && y.v[t] == y.v[s]))
                    .cloned()
                    .collect();
                for mu in 1..=self.rs.cap / (x.max * y.max) {
                    self.xs.push(xi);
                    self.ys.push(yi);
                    self.mu_col.push(mu);
                    self.mu_row.push(mu);
                    let mut system = Echelon::new(r * r);
                    if self.equation(0, 0, &mut system) && self.feasible(&system) {
                        self.add_x(1, &stab, &system, meter)?;
                    }
                    self.xs.pop();
                    self.ys.pop();
                    self.mu_col.pop();
                    self.mu_row.pop();
                }
            }
        }
        Ok(())
    }

    fn add_x(&mut self, k: usize, stab: &[Vec<usize>], system: &Echelon, meter: &mut Meter) -> Result<(), Abort> {
        if k == self.rs.n {
            return self.leaf(system, meter);
        }
        for xi in 0..self.vectors.len() {
            meter.tick()?;
            let Some(next) = leader(&self.vectors[xi].v, stab) else {
                continue;
            };
            for mu in 1..=self.rs.cap / self.vectors[xi].max {
                self.xs.push(xi);
                self.mu_col.push(mu);
                let mut sys = system.clone();
                let ok = (0..k).all(|l| self.block_ok(k, l)) && (0..k).all(|j| self.equation(j, k, &mut sys));
                if ok && self.feasible(&sys) {
                    self.add_y(k, &next, &sys, meter)?;
                }
                self.xs.pop();
                self.mu_col.pop();
            }
        }
        Ok(())
    }

    fn add_y(&mut self, k: usize, stab: &[Vec<usize>], system: &Echelon, meter: &mut Meter) -> Result<(), Abort> {
        for yi in 0..self.vectors.len() {
            meter.tick()?;
            let Some(next) = leader(&self.vectors[yi].v, stab) else {
                continue;
            };
            for mu in 1..=self.rs.cap / self.vectors[yi].max {
                self.ys.push(yi);
                self.mu_row.push(mu);
                let mut sys = system.clone();
                let ok = (0..=k).all(|i| self.block_ok(i, k)) && (0..=k).all(|i| self.equation(k, i, &mut sys));
                if ok && self.feasible(&sys) {
                    self.add_x(k + 1, &next, &sys, meter)?;
                }
                self.ys.pop();
                self.mu_row.pop();
            }
        }
        Ok(())
    }

    fn leaf(&mut self, system: &Echelon, meter: &mut Meter) -> Result<(), Abort> {
        let (n, r) = (self.rs.n, self.rs.r);
        let mut blocks = Vec::with_capacity(n * n);
        for i in 0..n {
            for l in 0..n {
                let m = self.mu(i, l).expect("checked when the block was completed");
                let (x, y) = (&self.vectors[self.xs[i]].v, &self.vectors[self.ys[l]].v);
                blocks.push((0..r * r).map(|idx| m * x[idx / r] * y[idx % r]).collect());
            }
        }
        self.rs.leaf(&blocks, system, &mut self.out, meter)
    }
}
