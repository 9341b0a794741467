//! Reference computations for the integration tests, written without the
//! library's algorithms: the algebra is rebuilt from its presentation, the
//! search is redone by brute force, and normal forms are re-verified from
//! their definition.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use qdpa::tree::ValidatedInstance;
use rand::Rng;

pub type Q = BigRational;

pub fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// A tree given by adjacency lists on `1..=n` and a special-leaf flag.
#[derive(Clone, Debug)]
pub struct Tree {
    pub n: usize,
    pub adj: Vec<Vec<usize>>,
    pub special: Vec<bool>,
}

impl Tree {
    pub fn new(n: usize, edges: &[(usize, usize)], special: &[usize]) -> Self {
        let mut adj = vec![Vec::new(); n + 1];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut flags = vec![false; n + 1];
        for &s in special {
            flags[s] = true;
        }
        Tree { n, adj, special: flags }
    }

    pub fn of(inst: &ValidatedInstance) -> Self {
        let edges: Vec<(usize, usize)> = inst.edges().iter().copied().collect();
        let special: Vec<usize> = inst.special().iter().copied().collect();
        Tree::new(inst.n(), &edges, &special)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }
}

/// Rank over the rationals by plain Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &pivot;
                for k in c..cols {
                    let sub = &f * &rows[r][k];
                    rows[i][k] -= sub;
                }
            }
        }
        r += 1;
    }
    r
}

/// Walks with `len` arrows in the doubled quiver, as vertex sequences.
fn walks(t: &Tree, len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1..=t.n).map(|v| vec![v]).collect();
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().unwrap();
                t.adj[last].iter().map(move |&x| {
                    let mut w2 = w.clone();
                    w2.push(x);
                    w2
                })
            })
            .collect();
    }
    out
}

/// The quadratic relations, each a combination of length-two walks.
fn relations(t: &Tree) -> Vec<Vec<(i64, [usize; 3])>> {
    let mut out = Vec::new();
    for v2 in 1..=t.n {
        for &v1 in &t.adj[v2] {
            for &v3 in &t.adj[v2] {
                if v1 != v3 {
                    // through three distinct vertices
                    out.push(vec![(1, [v1, v2, v3])]);
                    // the two loops at v2 agree
                    out.push(vec![(1, [v2, v1, v2]), (-1, [v2, v3, v2])]);
                }
            }
        }
        if t.special[v2] {
            for &v in &t.adj[v2] {
                out.push(vec![(1, [v2, v, v2])]);
            }
        }
    }
    out
}

/// `dims[d][a][b]`: dimension of the degree-`d` part of `kQ/I` spanned by
/// walks from `a` to `b`, for `d <= max_deg`.
pub fn graded_dims(t: &Tree, max_deg: usize) -> Vec<Vec<Vec<usize>>> {
    let rels = relations(t);
    let mut dims = Vec::new();
    for d in 0..=max_deg {
        let ws = walks(t, d);
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for w in &ws {
            index.insert(w.clone(), index.len());
        }
        // generators u · ρ · w of the ideal in degree d
        let mut gens: Vec<BTreeMap<usize, i64>> = Vec::new();
        if d >= 2 {
            for rel in &rels {
                let (x, z) = (rel[0].1[0], rel[0].1[2]);
                for p in 0..=d - 2 {
                    let prefixes: Vec<Vec<usize>> =
                        walks(t, p).into_iter().filter(|u| *u.last().unwrap() == x).collect();
                    let suffixes: Vec<Vec<usize>> = walks(t, d - 2 - p).into_iter().filter(|w| w[0] == z).collect();
                    for u in &prefixes {
                        for w in &suffixes {
                            let mut g = BTreeMap::new();
                            for &(c, mid) in rel {
                                let mut full = u.clone();
                                full.extend_from_slice(&mid[1..]);
                                full.extend_from_slice(&w[1..]);
                                *g.entry(index[&full]).or_insert(0) += c;
                            }
                            g.retain(|_, c| *c != 0);
                            if !g.is_empty() {
                                gens.push(g);
                            }
                        }
                    }
                }
            }
        }
        let mut level = vec![vec![0; t.n + 1]; t.n + 1];
        for a in 1..=t.n {
            for b in 1..=t.n {
                let cols: Vec<usize> = ws
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| w[0] == a && *w.last().unwrap() == b)
                    .map(|(i, _)| i)
                    .collect();
                if cols.is_empty() {
                    continue;
                }
                let rows: Vec<Vec<Q>> = gens
                    .iter()
                    .filter(|g| g.keys().next().is_some_and(|k| cols.contains(k)))
                    .map(|g| cols.iter().map(|c| q(*g.get(c).unwrap_or(&0))).collect())
                    .collect();
                level[a][b] = cols.len() - rank(rows);
            }
        }
        dims.push(level);
    }
    dims
}

/// `dim e_l A e_k` from the presentation: walks from `k` to `l` of degree
/// at most three, after checking that degree three already vanishes.
pub struct PathOracle {
    pub dims: Vec<Vec<Vec<usize>>>,
}

impl PathOracle {
    pub fn new(t: &Tree) -> Self {
        let dims = graded_dims(t, 3);
        PathOracle { dims }
    }

    pub fn degree_three_vanishes(&self) -> bool {
        self.dims[3].iter().flatten().all(|&x| x == 0)
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().flatten().flatten().sum()
    }

    pub fn hom(&self, l: usize, k: usize) -> usize {
        self.dims.iter().map(|level| level[k][l]).sum()
    }

    pub fn cartan(&self, n: usize) -> Vec<Vec<i64>> {
        (1..=n)
            .map(|s| (1..=n).map(|t| self.hom(s, t) as i64).collect())
            .collect()
    }
}

/// Every permutation of `0..r`.
pub fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(r - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, r - 1);
            out.push(q);
        }
    }
    out
}

/// Candidate data with 0-based vertex and object indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rep {
    pub r: usize,
    pub c: Vec<Vec<i64>>,
    /// `m[i][j][s][t]`
    pub m: Vec<Vec<Vec<Vec<i64>>>>,
}

impl Rep {
    pub fn from_library(rep: &qdpa::search::CandidateRep) -> Self {
        let (n, r) = (rep.n(), rep.r());
        Rep {
            r,
            c: (0..r)
                .map(|t| (0..r).map(|u| rep.cartan_entry(t, u)).collect())
                .collect(),
            m: (1..=n)
                .map(|i| {
                    (1..=n)
                        .map(|j| (0..r).map(|s| (0..r).map(|t| rep.mult(i, j, s, t)).collect()).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// `r = n`, `cartanB = H`, `m[i][j]` the unit matrix at `(i, j)`.
    pub fn cell(h: &[Vec<i64>]) -> Self {
        let n = h.len();
        let unit = |i: usize, j: usize| {
            let mut b = vec![vec![0; n]; n];
            b[i][j] = 1;
            b
        };
        Rep {
            r: n,
            c: h.to_vec(),
            m: (0..n).map(|i| (0..n).map(|j| unit(i, j)).collect()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// `[F_ij] = m[i][j] · cartanB`.
    pub fn action(&self, i: usize, j: usize) -> Vec<Vec<i64>> {
        mat_mul(&self.m[i][j], &self.c)
    }

    pub fn faithful(&self) -> bool {
        self.m.iter().flatten().all(|b| b.iter().flatten().any(|&x| x != 0))
    }

    /// Rows of `cartanB` that only ever meet zero columns of the blocks are
    /// replaced by unit rows.
    pub fn normalized(mut self) -> Self {
        for t in 0..self.r {
            let hidden = self.m.iter().flatten().all(|b| b.iter().all(|row| row[t] == 0));
            if hidden {
                self.c[t] = (0..self.r).map(|u| i64::from(u == t)).collect();
            }
        }
        self
    }

    /// Lexicographically least serialisation over renumberings of objects.
    pub fn key(&self) -> Vec<i64> {
        let r = self.r;
        permutations(r)
            .into_iter()
            .map(|p| {
                let mut v = vec![r as i64];
                for s in 0..r {
                    for t in 0..r {
                        v.push(self.c[p[s]][p[t]]);
                    }
                }
                for row in &self.m {
                    for b in row {
                        for s in 0..r {
                            for t in 0..r {
                                v.push(b[p[s]][p[t]]);
                            }
                        }
                    }
                }
                v
            })
            .min()
            .unwrap()
    }
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (rows, inner, cols) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..rows)
        .map(|s| (0..cols).map(|v| (0..inner).map(|t| a[s][t] * b[t][v]).sum()).collect())
        .collect()
}

/// Every `F_ij` sends every object to a sum containing every other object
/// (together with the identity on the diagonal).
pub fn transitive(rep: &Rep) -> bool {
    let r = rep.r;
    let n = rep.n();
    let actions: Vec<Vec<Vec<i64>>> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| rep.action(i, j))
        .collect();
    (0..r).all(|s| (0..r).all(|v| s == v || actions.iter().any(|f| f[s][v] > 0)))
}

pub fn composition_holds(rep: &Rep, h: &[Vec<i64>]) -> bool {
    let n = rep.n();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let left = rep.action(i, j);
            (0..n).all(|k| {
                (0..n).all(|l| {
                    let lhs = mat_mul(&left, &rep.m[k][l]);
                    let rhs = &rep.m[i][l];
                    lhs.iter()
                        .flatten()
                        .zip(rhs.iter().flatten())
                        .all(|(&x, &y)| x == h[j][k] * y)
                })
            })
        })
    })
}

/// Faithfulness, `[F_ii]² = k_i [F_ii]`, matching zero rows and columns of
/// every `m[i][i]`, and diagonal entries of `[F_ii]` in `{0, k_i}`.
pub fn derived_constraints(rep: &Rep, h: &[Vec<i64>]) -> bool {
    let r = rep.r;
    rep.faithful()
        && (0..rep.n()).all(|i| {
            let k = h[i][i];
            let f = rep.action(i, i);
            let sq = mat_mul(&f, &f);
            let quasi = sq.iter().flatten().zip(f.iter().flatten()).all(|(&x, &y)| x == k * y);
            let b = &rep.m[i][i];
            let symmetric = (0..r).all(|s| b[s].iter().all(|&x| x == 0) == (0..r).all(|t| b[t][s] == 0));
            let dichotomy = (0..r).all(|s| f[s][s] == 0 || f[s][s] == k);
            quasi && symmetric && dichotomy
        })
}

/// Every candidate with `r` objects and entries in `0..=cap` satisfying the
/// composition law and transitivity, normalised and keyed by [`Rep::key`].
///
/// `cartanB` runs over all matrices with positive diagonal; the blocks are
/// filled one whole block at a time, and each equation is tested as soon as
/// its three blocks are known.
pub fn brute_force(h: &[Vec<i64>], r: usize, cap: i64) -> BTreeMap<Vec<i64>, Rep> {
    let n = h.len();
    let all_blocks: Vec<Vec<Vec<i64>>> = {
        let mut out = vec![vec![vec![0; r]; r]];
        for pos in 0..r * r {
            out = out
                .into_iter()
                .flat_map(|b| {
                    (0..=cap).map(move |x| {
                        let mut b2 = b.clone();
                        b2[pos / r][pos % r] = x;
                        b2
                    })
                })
                .collect();
        }
        out
    };
    let cartans: Vec<Vec<Vec<i64>>> = all_blocks
        .iter()
        .filter(|c| (0..r).all(|t| c[t][t] >= 1))
        .cloned()
        .collect();
    // equations to test once block number `step` (row-major) is placed
    let mut due: Vec<Vec<(usize, usize, usize, usize)>> = vec![Vec::new(); n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let last = (a * n + b).max(c * n + d).max(a * n + d);
                    due[last].push((a, b, c, d));
                }
            }
        }
    }

    let mut found = BTreeMap::new();
    for c in &cartans {
        let with_c: Vec<Vec<Vec<i64>>> = all_blocks.iter().map(|b| mat_mul(b, c)).collect();
        let mut chosen = vec![0usize; n * n];
        fill(0, &mut chosen, &all_blocks, &with_c, &due, h, r, &mut |chosen| {
            let rep = Rep {
                r,
                c: c.clone(),
                m: (0..n)
                    .map(|i| (0..n).map(|j| all_blocks[chosen[i * n + j]].clone()).collect())
                    .collect(),
            };
            if transitive(&rep) {
                let rep = rep.normalized();
                found.insert(rep.key(), rep);
            }
        });
    }
    found
}

#[allow(clippy::too_many_arguments)]
fn fill(
    step: usize,
    chosen: &mut Vec<usize>,
    blocks: &[Vec<Vec<i64>>],
    with_c: &[Vec<Vec<i64>>],
    due: &[Vec<(usize, usize, usize, usize)>],
    h: &[Vec<i64>],
    r: usize,
    emit: &mut dyn FnMut(&[usize]),
) {
    let n = h.len();
    if step == n * n {
        emit(chosen);
        return;
    }
    for option in 0..blocks.len() {
        chosen[step] = option;
        let ok = due[step].iter().all(|&(a, b, c, d)| {
            let left = &with_c[chosen[a * n + b]];
            let right = &blocks[chosen[c * n + d]];
            let target = &blocks[chosen[a * n + d]];
            (0..r).all(|s| {
                (0..r).all(|v| (0..r).map(|t| left[s][t] * right[t][v]).sum::<i64>() == h[b][c] * target[s][v])
            })
        });
        if ok {
            fill(step + 1, chosen, blocks, with_c, due, h, r, emit);
        }
    }
}

/// A nonnegative idempotent assembled from known blocks, then scaled and
/// scrambled. Returns the matrix, the scale, and for each input index its
/// block (0 first, 1 core, 2 last) and its core class.
pub struct Assembled {
    pub m: Vec<Vec<Q>>,
    pub lambda: Q,
    pub block_of: Vec<u8>,
    pub class_of: Vec<Option<usize>>,
}

pub fn assemble<R: Rng>(rng: &mut R, max_size: usize) -> Assembled {
    let size = rng.gen_range(1..=max_size);
    let mut kinds: Vec<u8> = (0..size).map(|_| rng.gen_range(0..3)).collect();
    kinds.sort_unstable();
    let core: Vec<usize> = (0..size).filter(|&i| kinds[i] == 1).collect();
    // split the core into consecutive classes
    let mut class = vec![None; size];
    let mut next = 0;
    for (pos, &i) in core.iter().enumerate() {
        if pos > 0 && rng.gen_bool(0.4) {
            next += 1;
        }
        class[i] = Some(next);
    }
    let small = |rng: &mut R| q(rng.gen_range(1..=4));
    let x: Vec<Q> = (0..size).map(|_| small(rng)).collect();
    let y: Vec<Q> = (0..size).map(|_| small(rng)).collect();
    let classes = core.iter().filter_map(|&i| class[i]).max().map_or(0, |c| c + 1);
    let norm: Vec<Q> = (0..classes)
        .map(|c| {
            core.iter()
                .filter(|&&i| class[i] == Some(c))
                .map(|&i| &x[i] * &y[i])
                .sum()
        })
        .collect();
    let mut j = vec![vec![Q::zero(); size]; size];
    for &a in &core {
        for &b in &core {
            if class[a] == class[b] {
                j[a][b] = &x[a] * &y[b] / &norm[class[a].unwrap()];
            }
        }
    }
    let sparse = |rng: &mut R| if rng.gen_bool(0.5) { Q::zero() } else { small(rng) };
    // E = (P + I_core) J (I_core + B) restricted to the right blocks
    let mut left = vec![vec![Q::zero(); size]; size];
    let mut right = vec![vec![Q::zero(); size]; size];
    for i in 0..size {
        if kinds[i] == 1 {
            left[i][i] = q(1);
            right[i][i] = q(1);
        }
        for k in 0..size {
            if kinds[i] == 0 && kinds[k] == 1 {
                left[i][k] = sparse(rng);
            }
            if kinds[i] == 1 && kinds[k] == 2 {
                right[i][k] = sparse(rng);
            }
        }
    }
    let e = q_mul(&q_mul(&left, &j), &right);
    let lambda = Q::new(BigInt::from(rng.gen_range(1..=6)), BigInt::from(rng.gen_range(1..=3)));
    let mut perm: Vec<usize> = (0..size).collect();
    for i in (1..size).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    // input index p[a] carries block index a
    let mut m = vec![vec![Q::zero(); size]; size];
    let mut block_of = vec![0; size];
    let mut class_of = vec![None; size];
    for a in 0..size {
        block_of[perm[a]] = kinds[a];
        class_of[perm[a]] = class[a];
        for b in 0..size {
            m[perm[a]][perm[b]] = &e[a][b] * &lambda;
        }
    }
    Assembled {
        m,
        lambda,
        block_of,
        class_of,
    }
}

pub fn q_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let (rows, inner, cols) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..rows)
        .map(|s| {
            (0..cols)
                .map(|v| (0..inner).fold(Q::zero(), |acc, t| acc + &a[s][t] * &b[t][v]))
                .collect()
        })
        .collect()
}

/// Checks a claimed normal form against the definition: the scalar, the
/// block of every index, the zero pattern of the permuted matrix, and that
/// each core class carries a positive rank-one idempotent.
pub fn verify_normal_form(
    m: &[Vec<Q>],
    scalar: &Q,
    first: &[usize],
    core_classes: &[Vec<usize>],
    last: &[usize],
) -> Result<(), String> {
    let size = m.len();
    if !scalar.is_positive() {
        return Err("scalar is not positive".into());
    }
    let e: Vec<Vec<Q>> = m.iter().map(|row| row.iter().map(|x| x / scalar).collect()).collect();
    if q_mul(&e, &e) != e {
        return Err("M/λ is not idempotent".into());
    }
    let core: Vec<usize> = core_classes.iter().flatten().copied().collect();
    let mut all: Vec<usize> = first.iter().chain(&core).chain(last).copied().collect();
    all.sort_unstable();
    if all != (0..size).collect::<Vec<_>>() {
        return Err("blocks do not partition the indices".into());
    }
    let zero_row = |i: usize| e[i].iter().all(Zero::is_zero);
    let zero_col = |i: usize| e.iter().all(|row| row[i].is_zero());
    for &i in &core {
        if !e[i][i].is_positive() {
            return Err(format!("core index {i} has zero diagonal"));
        }
    }
    for &i in first {
        if !zero_col(i) || zero_row(i) || e[i][i].is_positive() {
            return Err(format!("first-block index {i} is misplaced"));
        }
    }
    for &i in last {
        if !zero_row(i) {
            return Err(format!("last-block index {i} has a nonzero row"));
        }
    }
    for (ca, class_a) in core_classes.iter().enumerate() {
        for (cb, class_b) in core_classes.iter().enumerate() {
            for &a in class_a {
                for &b in class_b {
                    let positive = e[a][b].is_positive();
                    if positive != (ca == cb) {
                        return Err(format!("core entry ({a}, {b}) breaks the class structure"));
                    }
                }
            }
        }
        // rank one: every 2×2 minor vanishes
        for &a in class_a {
            for &b in class_a {
                for &c in class_a {
                    for &d in class_a {
                        if &e[a][c] * &e[b][d] != &e[a][d] * &e[b][c] {
                            return Err(format!("class {ca} is not rank one"));
                        }
                    }
                }
            }
        }
        let trace: Q = class_a.iter().map(|&a| e[a][a].clone()).sum();
        if !trace.is_one() {
            return Err(format!("class {ca} has trace {trace}"));
        }
    }
    Ok(())
}
