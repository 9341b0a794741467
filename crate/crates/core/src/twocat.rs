//! Split Grothendieck data of the 2-category of projective functors.
//!
//! Indecomposable 1-morphisms are the identity and the functors `F_ij`
//! given by tensoring with `A e_i ⊗ e_j A`. Composition is
//! `F_ij ∘ F_kl = F_il^{⊕ dim e_j A e_k}`.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::Algebra;
use crate::linalg::IntMatrix;
use crate::search::CandidateRep;

/// Formal direct sum `id_mult · 1 ⊕ ⨁ f_mult[i-1][j-1] · F_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OneMorphism {
    pub id_mult: u64,
    pub f_mult: Vec<Vec<u64>>,
}

impl OneMorphism {
    pub fn zero(n: usize) -> Self {
        OneMorphism {
            id_mult: 0,
            f_mult: vec![vec![0; n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        OneMorphism {
            id_mult: 1,
            ..OneMorphism::zero(n)
        }
    }

    /// The indecomposable `F_ij` (labels are 1-based).
    pub fn f(n: usize, i: usize, j: usize) -> Self {
        let mut m = OneMorphism::zero(n);
        m.f_mult[i - 1][j - 1] = 1;
        m
    }

    pub fn n(&self) -> usize {
        self.f_mult.len()
    }

    pub fn is_zero(&self) -> bool {
        self.id_mult == 0 && self.f_mult.iter().flatten().all(|&x| x == 0)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        OneMorphism {
            id_mult: self.id_mult + other.id_mult,
            f_mult: self
                .f_mult
                .iter()
                .zip(&other.f_mult)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    /// Multiplicity of an indecomposable summand.
    pub fn multiplicity(&self, label: Indecomposable) -> u64 {
        match label {
            Indecomposable::Identity => self.id_mult,
            Indecomposable::F(i, j) => self.f_mult[i - 1][j - 1],
        }
    }

    fn of(n: usize, label: Indecomposable) -> Self {
        match label {
            Indecomposable::Identity => OneMorphism::identity(n),
            Indecomposable::F(i, j) => OneMorphism::f(n, i, j),
        }
    }
}

/// `f ∘ g` (apply `g` first).
pub fn compose(alg: &Algebra, f: &OneMorphism, g: &OneMorphism) -> OneMorphism {
    let n = alg.n();
    let mut out = OneMorphism::zero(n);
    out.id_mult = f.id_mult * g.id_mult;
    for i in 0..n {
        for l in 0..n {
            out.f_mult[i][l] = f.id_mult * g.f_mult[i][l] + g.id_mult * f.f_mult[i][l];
        }
    }
    for i in 0..n {
        for j in 0..n {
            let a = f.f_mult[i][j];
            if a == 0 {
                continue;
            }
            for k in 0..n {
                let h = alg.hom_dim(j + 1, k + 1) as u64;
                if h == 0 {
                    continue;
                }
                for l in 0..n {
                    out.f_mult[i][l] += a * g.f_mult[k][l] * h;
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Indecomposable {
    Identity,
    F(usize, usize),
}

impl fmt::Display for Indecomposable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indecomposable::Identity => write!(f, "1"),
            Indecomposable::F(i, j) => write!(f, "F({i},{j})"),
        }
    }
}

impl Serialize for Indecomposable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn indecomposables(n: usize) -> Vec<Indecomposable> {
    std::iter::once(Indecomposable::Identity)
        .chain((1..=n).flat_map(|i| (1..=n).map(move |j| Indecomposable::F(i, j))))
        .collect()
}

/// Left, right and two-sided cells, each a partition of the indecomposables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellStructure {
    pub left: Vec<Vec<Indecomposable>>,
    pub right: Vec<Vec<Indecomposable>>,
    pub two_sided: Vec<Vec<Indecomposable>>,
}

fn classes(labels: &[Indecomposable], leq: &[Vec<bool>]) -> Vec<Vec<Indecomposable>> {
    let mut assigned = vec![false; labels.len()];
    let mut out = Vec::new();
    for a in 0..labels.len() {
        if assigned[a] {
            continue;
        }
        let class: Vec<usize> = (a..labels.len())
            .filter(|&b| !assigned[b] && leq[a][b] && leq[b][a])
            .collect();
        for &b in &class {
            assigned[b] = true;
        }
        out.push(class.into_iter().map(|b| labels[b]).collect());
    }
    out
}

/// Cells from the one-step preorders: `H ≤_L G` iff `H` is a summand of
/// `K ∘ G` for an indecomposable `K` (identity included), and similarly on
/// the right and on both sides.
pub fn cells(alg: &Algebra) -> CellStructure {
    let n = alg.n();
    let labels = indecomposables(n);
    let morphisms: Vec<OneMorphism> = labels.iter().map(|&l| OneMorphism::of(n, l)).collect();
    let count = labels.len();

    let mut leq_left = vec![vec![false; count]; count];
    let mut leq_right = vec![vec![false; count]; count];
    let mut leq_two = vec![vec![false; count]; count];
    for g in 0..count {
        for k in 0..count {
            let kg = compose(alg, &morphisms[k], &morphisms[g]);
            let gk = compose(alg, &morphisms[g], &morphisms[k]);
            for h in 0..count {
                if kg.multiplicity(labels[h]) > 0 {
                    leq_left[h][g] = true;
                }
                if gk.multiplicity(labels[h]) > 0 {
                    leq_right[h][g] = true;
                }
            }
            for k2 in 0..count {
                let kgk = compose(alg, &kg, &morphisms[k2]);
                for h in 0..count {
                    if kgk.multiplicity(labels[h]) > 0 {
                        leq_two[h][g] = true;
                    }
                }
            }
        }
    }
    CellStructure {
        left: classes(&labels, &leq_left),
        right: classes(&labels, &leq_right),
        two_sided: classes(&labels, &leq_two),
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CellError {
    #[error("left cell index {0} is outside 1..={1}")]
    OutOfRange(usize, usize),
}

/// Matrices of the cell 2-representation for the left cell `L_j`.
///
/// Every `C_{L_j}` is equivalent to the defining action on `A`-proj; `j`
/// only fixes which projective is named first. `matrices[i-1][k-1]` is
/// `[F_ik]` with entry `(s, t)` equal to `δ_{s,i} · dim e_k A e_t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellMatrices {
    pub left_cell: usize,
    pub matrices: Vec<Vec<IntMatrix>>,
}

pub fn cell_rep_matrices(alg: &Algebra, j: usize) -> Result<CellMatrices, CellError> {
    let n = alg.n();
    if j < 1 || j > n {
        return Err(CellError::OutOfRange(j, n));
    }
    let matrices = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|k| IntMatrix::from_fn(n, n, |s, t| if s + 1 == i { alg.hom_dim(k, t + 1) as i64 } else { 0 }))
                .collect()
        })
        .collect();
    Ok(CellMatrices { left_cell: j, matrices })
}

/// `[H]` in a candidate representation: multiplicity of `Q_s` in `H Q_v`.
pub fn matrix_of(h: &OneMorphism, rep: &CandidateRep) -> IntMatrix {
    let r = rep.r();
    let mut out = IntMatrix::identity(r).scale(&(h.id_mult as i64));
    for i in 1..=rep.n() {
        for j in 1..=rep.n() {
            let mult = h.f_mult[i - 1][j - 1] as i64;
            if mult != 0 {
                out = out.add(&rep.action_matrix(i, j).scale(&mult));
            }
        }
    }
    out
}
