//! Finite-dimensional left `A`-modules given by arrow actions.
//!
//! A module is a graded vector space (each basis vector sits at a vertex)
//! with one integer matrix per arrow. Matrices act on column vectors.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, BasisElement};
use crate::linalg::{self, q, IntMatrix, QMatrix, Rational};
use crate::tree::{doubled_quiver, Arrow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisVector {
    pub label: String,
    pub grade: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Module {
    name: String,
    n: usize,
    basis: Vec<BasisVector>,
    action: BTreeMap<Arrow, IntMatrix>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModuleError {
    #[error("arrow {arrow} does not respect the grading")]
    GradingViolation { arrow: Arrow },
    #[error("action matrix for {arrow} has the wrong shape")]
    Shape { arrow: Arrow },
    #[error("isomorphism test inconclusive for {left} and {right}")]
    Inconclusive { left: String, right: String },
}

impl Module {
    /// Builds a module and checks that every arrow maps grade `source`
    /// into grade `target` and kills all other grades.
    pub fn from_parts(
        name: impl Into<String>,
        n: usize,
        basis: Vec<BasisVector>,
        action: BTreeMap<Arrow, IntMatrix>,
    ) -> Result<Module, ModuleError> {
        let d = basis.len();
        for (&arrow, m) in &action {
            if m.rows() != d || m.cols() != d {
                return Err(ModuleError::Shape { arrow });
            }
            for col in 0..d {
                for row in 0..d {
                    if m[(row, col)] != 0 && (basis[col].grade != arrow.source || basis[row].grade != arrow.target) {
                        return Err(ModuleError::GradingViolation { arrow });
                    }
                }
            }
        }
        Ok(Module {
            name: name.into(),
            n,
            basis,
            action,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn action(&self, arrow: &Arrow) -> Option<&IntMatrix> {
        self.action.get(arrow)
    }

    pub fn arrows(&self) -> impl Iterator<Item = &Arrow> {
        self.action.keys()
    }

    /// Entry `v - 1` counts basis vectors at vertex `v`.
    pub fn dim_vector(&self) -> Vec<usize> {
        let mut dv = vec![0; self.n];
        for b in &self.basis {
            dv[b.grade - 1] += 1;
        }
        dv
    }

    fn indices_at(&self, v: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.basis[i].grade == v).collect()
    }

    /// Checks that the defining relations of `A` act as zero: paths through
    /// three distinct vertices vanish, loops at special vertices vanish, and
    /// the loops at any other vertex agree whichever neighbour they pass.
    pub fn satisfies_relations(&self, alg: &Algebra) -> bool {
        let inst = alg.instance();
        let mat = |a: Arrow| {
            self.action
                .get(&a)
                .cloned()
                .unwrap_or_else(|| IntMatrix::zeros(self.dim(), self.dim()))
        };
        for u in 1..=alg.n() {
            let mut loop_at_u: Option<IntMatrix> = None;
            for &v in inst.neighbors(u) {
                let out = mat(Arrow { source: u, target: v });
                for &w in inst.neighbors(v) {
                    let back = mat(Arrow { source: v, target: w });
                    let path = back.mul(&out);
                    if w != u || inst.is_special(u) {
                        if !path.is_zero() {
                            return false;
                        }
                    } else {
                        match &loop_at_u {
                            None => loop_at_u = Some(path),
                            Some(prev) if *prev != path => return false,
                            Some(_) => {}
                        }
                    }
                }
            }
        }
        true
    }
}

/// `P_i = A e_i`: basis elements starting at `i`, acted on by left
/// multiplication.
pub fn projective_module(alg: &Algebra, i: usize) -> Module {
    let members: Vec<usize> = (0..alg.dim()).filter(|&b| alg.basis()[b].source() == i).collect();
    let position: BTreeMap<usize, usize> = members.iter().enumerate().map(|(p, &b)| (b, p)).collect();
    let basis = members
        .iter()
        .map(|&b| BasisVector {
            label: alg.basis()[b].to_string(),
            grade: alg.basis()[b].target(),
        })
        .collect();
    let d = members.len();
    let mut action = BTreeMap::new();
    for arrow in doubled_quiver(alg.instance()).arrows {
        let a = alg.index_of(&BasisElement::arrow(arrow)).expect("arrow in basis");
        let mut m = IntMatrix::zeros(d, d);
        for (col, &b) in members.iter().enumerate() {
            if let Some(p) = alg.mult(a, b) {
                m[(position[&p], col)] = 1;
            }
        }
        action.insert(arrow, m);
    }
    Module::from_parts(format!("P{i}"), alg.n(), basis, action).expect("projective is graded")
}

/// The dual `D(e_i A)` of the right projective at `i`, with
/// `(a f)(b) = f(b a)`. Its socle is `L_i`.
pub fn injective_module(alg: &Algebra, i: usize) -> Module {
    let members: Vec<usize> = (0..alg.dim()).filter(|&b| alg.basis()[b].target() == i).collect();
    let position: BTreeMap<usize, usize> = members.iter().enumerate().map(|(p, &b)| (b, p)).collect();
    let basis = members
        .iter()
        .map(|&b| BasisVector {
            label: format!("D({})", alg.basis()[b]),
            grade: alg.basis()[b].source(),
        })
        .collect();
    let d = members.len();
    let mut action = BTreeMap::new();
    for arrow in doubled_quiver(alg.instance()).arrows {
        let a = alg.index_of(&BasisElement::arrow(arrow)).expect("arrow in basis");
        let mut m = IntMatrix::zeros(d, d);
        // (a f_c)(b) = f_c(b a) = [b a == c]
        for (row, &b) in members.iter().enumerate() {
            if let Some(c) = alg.mult(b, a) {
                m[(row, position[&c])] = 1;
            }
        }
        action.insert(arrow, m);
    }
    Module::from_parts(format!("I{i}"), alg.n(), basis, action).expect("injective is graded")
}

/// The simple module `L_i`.
pub fn simple_module(alg: &Algebra, i: usize) -> Module {
    let action = doubled_quiver(alg.instance())
        .arrows
        .into_iter()
        .map(|a| (a, IntMatrix::zeros(1, 1)))
        .collect();
    Module::from_parts(
        format!("L{i}"),
        alg.n(),
        vec![BasisVector {
            label: format!("L{i}"),
            grade: i,
        }],
        action,
    )
    .expect("simple is graded")
}

/// Radical layers, socle and top, each as a sorted list of simple labels
/// with repetitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoewyReport {
    pub layers: Vec<Vec<usize>>,
    pub socle: Vec<usize>,
    pub top: Vec<usize>,
    pub loewy_length: usize,
}

fn multiset(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(v, &c)| std::iter::repeat_n(v + 1, c))
        .collect()
}

/// Independent rows of `vectors` (a row-space basis).
fn span_basis(vectors: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    if vectors.is_empty() {
        return vectors;
    }
    let mut m = QMatrix::from_rows(vectors);
    let r = linalg::rref(&mut m).len();
    (0..r).map(|i| m.row(i).to_vec()).collect()
}

fn apply(m: &QMatrix, v: &[Rational]) -> Vec<Rational> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .zip(v)
                .filter(|(a, _)| !a.is_zero())
                .fold(Rational::zero(), |acc, (a, x)| acc + a * x)
        })
        .collect()
}

pub fn loewy_report(module: &Module) -> LoewyReport {
    let n = module.n;
    let d = module.dim();
    let actions: Vec<(Arrow, QMatrix)> = module
        .action
        .iter()
        .map(|(&a, m)| (a, linalg::to_rational(m)))
        .collect();

    // Radical powers are graded, so track a basis per vertex.
    let mut current: Vec<Vec<Vec<Rational>>> = (1..=n)
        .map(|v| {
            module
                .indices_at(v)
                .into_iter()
                .map(|i| {
                    let mut e = vec![Rational::zero(); d];
                    e[i] = Rational::one();
                    e
                })
                .collect()
        })
        .collect();
    let mut layers = Vec::new();
    while current.iter().any(|vs| !vs.is_empty()) {
        let mut next: Vec<Vec<Vec<Rational>>> = vec![Vec::new(); n];
        for (arrow, m) in &actions {
            for v in &current[arrow.source - 1] {
                let image = apply(m, v);
                if image.iter().any(|x| !x.is_zero()) {
                    next[arrow.target - 1].push(image);
                }
            }
        }
        let next: Vec<Vec<Vec<Rational>>> = next.into_iter().map(span_basis).collect();
        let counts: Vec<usize> = (0..n).map(|v| current[v].len() - next[v].len()).collect();
        layers.push(multiset(&counts));
        current = next;
    }

    let socle_counts: Vec<usize> = (1..=n)
        .map(|v| {
            let cols = module.indices_at(v);
            if cols.is_empty() {
                return 0;
            }
            let stacked: Vec<Vec<Rational>> = actions
                .iter()
                .flat_map(|(_, m)| (0..d).map(|row| cols.iter().map(|&c| m[(row, c)].clone()).collect::<Vec<_>>()))
                .collect();
            if stacked.is_empty() {
                cols.len()
            } else {
                cols.len() - linalg::rank(&QMatrix::from_rows(stacked))
            }
        })
        .collect();

    LoewyReport {
        top: layers.first().cloned().unwrap_or_default(),
        loewy_length: layers.len(),
        layers,
        socle: multiset(&socle_counts),
    }
}

/// Grading-preserving intertwiners `M -> N`; each basis map is a
/// `dim N x dim M` matrix.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub dim: usize,
    pub basis: Vec<QMatrix>,
}

pub fn hom_space(m: &Module, n: &Module) -> HomSpace {
    // Unknown phi[p][q] for p in N, q in M of equal grade.
    let mut var_of = BTreeMap::new();
    for p in 0..n.dim() {
        for q in 0..m.dim() {
            if n.basis[p].grade == m.basis[q].grade {
                let idx = var_of.len();
                var_of.insert((p, q), idx);
            }
        }
    }
    let nvars = var_of.len();
    let mut equations: Vec<Vec<Rational>> = Vec::new();
    for (arrow, am) in &m.action {
        let an = n
            .action
            .get(arrow)
            .cloned()
            .unwrap_or_else(|| IntMatrix::zeros(n.dim(), n.dim()));
        // (phi A_M)[p][c] - (A_N phi)[p][c] = 0
        for p in 0..n.dim() {
            for c in 0..m.dim() {
                let mut row = vec![Rational::zero(); nvars];
                let mut nonzero = false;
                for qq in 0..m.dim() {
                    let coef = am[(qq, c)];
                    if coef != 0 {
                        if let Some(&x) = var_of.get(&(p, qq)) {
                            row[x] += q(coef);
                            nonzero = true;
                        }
                    }
                }
                for pp in 0..n.dim() {
                    let coef = an[(p, pp)];
                    if coef != 0 {
                        if let Some(&x) = var_of.get(&(pp, c)) {
                            row[x] -= q(coef);
                            nonzero = true;
                        }
                    }
                }
                if nonzero && row.iter().any(|x| !x.is_zero()) {
                    equations.push(row);
                }
            }
        }
    }
    let solutions = if equations.is_empty() {
        (0..nvars)
            .map(|i| {
                let mut v = vec![Rational::zero(); nvars];
                v[i] = Rational::one();
                v
            })
            .collect()
    } else {
        let mut sys = QMatrix::from_rows(equations);
        // rref first keeps the nullspace call on a small matrix
        let r = linalg::rref(&mut sys).len();
        let reduced = QMatrix::from_rows((0..r).map(|i| sys.row(i).to_vec()).collect());
        if r == 0 {
            linalg::nullspace(&QMatrix::zeros(1, nvars))
        } else {
            linalg::nullspace(&reduced)
        }
    };
    let basis = solutions
        .into_iter()
        .map(|sol| {
            let mut phi = QMatrix::zeros(n.dim(), m.dim());
            for (&(p, qq), &x) in &var_of {
                phi[(p, qq)] = sol[x].clone();
            }
            phi
        })
        .collect::<Vec<_>>();
    HomSpace {
        dim: basis.len(),
        basis,
    }
}

const COEFF_RANGE: std::ops::RangeInclusive<i64> = -3..=3;
const RANDOM_TRIALS: usize = 64;
const EXHAUSTIVE_MAX_HOM_DIM: usize = 5;

fn combination(basis: &[QMatrix], coeffs: &[i64]) -> QMatrix {
    let mut acc = QMatrix::zeros(basis[0].rows(), basis[0].cols());
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != 0 {
            acc = acc.add(&b.scale(&q(c)));
        }
    }
    acc
}

/// Searches `Hom(M, N)` for an invertible map. Differences in dimension
/// vector or radical/socle layers settle non-isomorphism immediately.
///
/// If no witness turns up, the answer is still definite when every
/// coefficient vector in `{-3..3}^d` was tried and `dim M <= 6`: the
/// determinant is a polynomial of degree at most `dim M` in each
/// coordinate, so it vanishes on that grid only if it vanishes
/// identically. Otherwise the test reports [`ModuleError::Inconclusive`].
pub fn is_isomorphic(m: &Module, n: &Module) -> Result<bool, ModuleError> {
    if m.dim_vector() != n.dim_vector() {
        return Ok(false);
    }
    if m.dim() == 0 {
        return Ok(true);
    }
    let (lm, ln) = (loewy_report(m), loewy_report(n));
    if lm.layers != ln.layers || lm.socle != ln.socle {
        return Ok(false);
    }
    let hom = hom_space(m, n);
    if hom.dim == 0 {
        return Ok(false);
    }
    if hom.basis.iter().any(linalg::is_invertible) {
        return Ok(true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x150_1501);
    for _ in 0..RANDOM_TRIALS {
        let coeffs: Vec<i64> = (0..hom.dim).map(|_| rng.gen_range(COEFF_RANGE)).collect();
        if linalg::is_invertible(&combination(&hom.basis, &coeffs)) {
            return Ok(true);
        }
    }
    if hom.dim <= EXHAUSTIVE_MAX_HOM_DIM {
        let side = (*COEFF_RANGE.end() - *COEFF_RANGE.start() + 1) as usize;
        let mut coeffs = vec![*COEFF_RANGE.start(); hom.dim];
        for _ in 0..side.pow(hom.dim as u32) {
            if linalg::is_invertible(&combination(&hom.basis, &coeffs)) {
                return Ok(true);
            }
            for c in coeffs.iter_mut() {
                if *c < *COEFF_RANGE.end() {
                    *c += 1;
                    break;
                }
                *c = *COEFF_RANGE.start();
            }
        }
        if m.dim() < side {
            return Ok(false);
        }
    }
    Err(ModuleError::Inconclusive {
        left: m.name.clone(),
        right: n.name.clone(),
    })
}

/// Every `P_i` is compared against every injective `I_j`.
pub fn is_self_injective(alg: &Algebra) -> Result<bool, ModuleError> {
    let injectives: Vec<Module> = (1..=alg.n()).map(|j| injective_module(alg, j)).collect();
    for i in 1..=alg.n() {
        let p = projective_module(alg, i);
        let mut inconclusive = None;
        let mut found = false;
        for inj in &injectives {
            match is_isomorphic(&p, inj) {
                Ok(true) => {
                    found = true;
                    break;
                }
                Ok(false) => {}
                Err(e) => inconclusive = Some(e),
            }
        }
        if !found {
            return match inconclusive {
                Some(e) => Err(e),
                None => Ok(false),
            };
        }
    }
    Ok(true)
}

/// `dim (e_j A ⊗_A A e_k)`, computed as the quotient of `e_j A ⊗ A e_k` by
/// the balancing relations `x a ⊗ y - x ⊗ a y`.
pub fn tensor_dim(alg: &Algebra, j: usize, k: usize) -> usize {
    let basis = alg.basis();
    let left: Vec<usize> = (0..alg.dim()).filter(|&x| basis[x].target() == j).collect();
    let right: Vec<usize> = (0..alg.dim()).filter(|&y| basis[y].source() == k).collect();
    let pair_index = |x: usize, y: usize| -> Option<usize> {
        let px = left.iter().position(|&l| l == x)?;
        let py = right.iter().position(|&r| r == y)?;
        Some(px * right.len() + py)
    };
    let width = left.len() * right.len();
    let mut relations = Vec::new();
    for &x in &left {
        for a in 0..alg.dim() {
            for &y in &right {
                let mut row = vec![Rational::zero(); width];
                if let Some(xa) = alg.mult(x, a) {
                    row[pair_index(xa, y).expect("x a stays in e_j A")] += Rational::one();
                }
                if let Some(ay) = alg.mult(a, y) {
                    row[pair_index(x, ay).expect("a y stays in A e_k")] -= Rational::one();
                }
                if row.iter().any(|v| !v.is_zero()) {
                    relations.push(row);
                }
            }
        }
    }
    if relations.is_empty() {
        return width;
    }
    width - linalg::rank(&QMatrix::from_rows(relations))
}
