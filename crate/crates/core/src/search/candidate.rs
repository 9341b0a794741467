use serde::Serialize;

use crate::algebra::Algebra;
use crate::linalg::IntMatrix;

/// Decategorified data of a candidate transitive 2-representation.
///
/// `r` objects `Q_1..Q_r`, the table `cartan_b[t][u] = dim ε_t B ε_u` and
/// multiplicities `m[i][j][s][t]` of `G_st` in `M(F_ij)`. Vertex labels
/// `i, j` are 1-based in the accessors; object positions `s, t` are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CandidateRep {
    r: usize,
    #[serde(rename = "cartanB")]
    cartan_b: Vec<Vec<i64>>,
    m: Vec<Vec<Vec<Vec<i64>>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("inconsistent candidate shape: {0}")]
pub struct ShapeError(pub String);

impl CandidateRep {
    pub fn new(cartan_b: Vec<Vec<i64>>, m: Vec<Vec<Vec<Vec<i64>>>>) -> Result<Self, ShapeError> {
        let r = cartan_b.len();
        if r == 0 {
            return Err(ShapeError("rank must be at least 1".into()));
        }
        if cartan_b.iter().any(|row| row.len() != r) {
            return Err(ShapeError("cartanB is not square".into()));
        }
        let n = m.len();
        if n == 0 {
            return Err(ShapeError("no vertices".into()));
        }
        for row in &m {
            if row.len() != n {
                return Err(ShapeError("m is not n×n in its vertex indices".into()));
            }
            for block in row {
                if block.len() != r || block.iter().any(|b| b.len() != r) {
                    return Err(ShapeError("a block of m is not r×r".into()));
                }
            }
        }
        if cartan_b
            .iter()
            .flatten()
            .chain(m.iter().flatten().flatten().flatten())
            .any(|&x| x < 0)
        {
            return Err(ShapeError("negative entry".into()));
        }
        Ok(CandidateRep { r, cartan_b, m })
    }

    /// The cell 2-representation: `r = n`, `cartanB = Cartan(A)` and
    /// `m[i][j][s][t] = δ_{s,i} δ_{t,j}`.
    pub fn cell(alg: &Algebra) -> Self {
        let n = alg.n();
        let m = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|s| (0..n).map(|t| i64::from(s == i && t == j)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CandidateRep {
            r: n,
            cartan_b: alg.cartan_matrix().to_rows(),
            m,
        }
    }

    /// The rank-one representation on which every `F_ij` acts by zero.
    pub fn zero(n: usize) -> Self {
        CandidateRep {
            r: 1,
            cartan_b: vec![vec![1]],
            m: vec![vec![vec![vec![0]]; n]; n],
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn cartan_b(&self) -> IntMatrix {
        IntMatrix::from_rows(self.cartan_b.clone())
    }

    pub fn cartan_entry(&self, t: usize, u: usize) -> i64 {
        self.cartan_b[t][u]
    }

    pub fn mult(&self, i: usize, j: usize, s: usize, t: usize) -> i64 {
        self.m[i - 1][j - 1][s][t]
    }

    /// The block `m[i][j]` as an `r×r` matrix.
    pub fn block(&self, i: usize, j: usize) -> IntMatrix {
        IntMatrix::from_rows(self.m[i - 1][j - 1].clone())
    }

    /// `[F_ij]`: entry `(s, v)` is the multiplicity of `Q_s` in `F_ij Q_v`,
    /// that is `Σ_t m[i][j][s][t] · cartanB[t][v]`.
    pub fn action_matrix(&self, i: usize, j: usize) -> IntMatrix {
        self.block(i, j).mul(&self.cartan_b())
    }

    pub fn is_faithful(&self) -> bool {
        self.m.iter().flatten().flatten().flatten().any(|&x| x > 0)
    }

    /// Relabel objects: new object `a` is old object `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let r = self.r;
        let cartan_b = (0..r)
            .map(|a| (0..r).map(|b| self.cartan_b[perm[a]][perm[b]]).collect())
            .collect();
        let m = self
            .m
            .iter()
            .map(|row| {
                row.iter()
                    .map(|block| {
                        (0..r)
                            .map(|a| (0..r).map(|b| block[perm[a]][perm[b]]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CandidateRep { r, cartan_b, m }
    }

    /// Key compared lexicographically by [`canonical_form`].
    fn key(&self) -> impl Iterator<Item = i64> + '_ {
        self.cartan_b
            .iter()
            .flatten()
            .chain(self.m.iter().flatten().flatten().flatten())
            .copied()
    }
}

/// Calls `f` on every permutation of `0..r` (Heap's algorithm).
pub(crate) fn for_each_permutation(r: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..r).collect();
    let mut c = vec![0usize; r];
    f(&perm);
    let mut i = 0;
    while i < r {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// The lexicographically smallest relabelling of `rep` (cartanB first, then
/// `m` in index order `i, j, s, t`).
pub fn canonical_form(rep: &CandidateRep) -> CandidateRep {
    let mut best = rep.clone();
    for_each_permutation(rep.r, |perm| {
        let cand = rep.permuted(perm);
        if cand.key().lt(best.key()) {
            best = cand;
        }
    });
    best
}
