use std::collections::BTreeSet;

use serde::Serialize;

use super::candidate::{canonical_form, CandidateRep};
use crate::algebra::Algebra;

/// Object sets of a candidate. Objects are reported 1-based (`Q_1..Q_r`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XYReport {
    /// `x[i-1][j-1] = {s : ∃t, m[i][j][s][t] > 0}`.
    pub x: Vec<Vec<BTreeSet<usize>>>,
    /// `y[i-1][j-1] = {t : ∃s, m[i][j][s][t] > 0}`.
    pub y: Vec<Vec<BTreeSet<usize>>>,
    pub x_independent_of_j: bool,
    pub y_independent_of_i: bool,
    /// `X_i` when `x_independent_of_j`.
    pub x_reduced: Option<Vec<BTreeSet<usize>>>,
    /// `Y_j` when `y_independent_of_i`.
    pub y_reduced: Option<Vec<BTreeSet<usize>>>,
    /// `X_q = Y_q` for all `q`, when both reductions exist.
    pub x_equals_y: Option<bool>,
    /// `X_1 ∪ ... ∪ X_n = {1..r}`, when `X_i` exists.
    pub union_is_everything: Option<bool>,
}

pub fn xy_sets(rep: &CandidateRep) -> XYReport {
    let (n, r) = (rep.n(), rep.r());
    let mut x = vec![vec![BTreeSet::new(); n]; n];
    let mut y = vec![vec![BTreeSet::new(); n]; n];
    for i in 1..=n {
        for j in 1..=n {
            for s in 0..r {
                for t in 0..r {
                    if rep.mult(i, j, s, t) > 0 {
                        x[i - 1][j - 1].insert(s + 1);
                        y[i - 1][j - 1].insert(t + 1);
                    }
                }
            }
        }
    }
    let x_independent_of_j = x.iter().all(|row| row.iter().all(|set| *set == row[0]));
    let y_independent_of_i = (0..n).all(|j| (0..n).all(|i| y[i][j] == y[0][j]));
    let x_reduced = x_independent_of_j.then(|| x.iter().map(|row| row[0].clone()).collect::<Vec<_>>());
    let y_reduced = y_independent_of_i.then(|| y[0].clone());
    let x_equals_y = match (&x_reduced, &y_reduced) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    let union_is_everything = x_reduced.as_ref().map(|xs| {
        let union: BTreeSet<usize> = xs.iter().flatten().copied().collect();
        union == (1..=r).collect()
    });
    XYReport {
        x,
        y,
        x_independent_of_j,
        y_independent_of_i,
        x_reduced,
        y_reduced,
        x_equals_y,
        union_is_everything,
    }
}

/// Pass/fail per constraint. The first two are the decategorified axioms;
/// the next four are the constraints derived for simple transitive
/// representations; the last four are the conclusions that single out the
/// cell representation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub composition: bool,
    pub transitivity: bool,
    pub faithful: bool,
    pub quasi_idempotent: bool,
    pub support_symmetry: bool,
    pub diagonal_dichotomy: bool,
    pub singleton_x: bool,
    pub disjoint_x: bool,
    pub rank_equals_n: bool,
    pub cartan_equal: bool,
    pub is_cell: bool,
    /// Human-readable witnesses for failed checks.
    pub notes: Vec<String>,
}

impl CheckReport {
    /// Composition law and transitivity.
    pub fn axioms_hold(&self) -> bool {
        self.composition && self.transitivity
    }

    /// Axioms plus faithfulness, quasi-idempotency, support symmetry and the
    /// diagonal dichotomy.
    pub fn derived_constraints_hold(&self) -> bool {
        self.axioms_hold() && self.faithful && self.quasi_idempotent && self.support_symmetry && self.diagonal_dichotomy
    }

    /// Names of the cell-characterising conclusions that fail.
    pub fn violated_conclusions(&self) -> Vec<&'static str> {
        [
            ("|X_i| = 1", self.singleton_x),
            ("X_i pairwise disjoint", self.disjoint_x),
            ("r = n", self.rank_equals_n),
            ("cartanB = Cartan(A)", self.cartan_equal),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }

    /// Names of every failed check.
    pub fn failed(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = [
            ("composition", self.composition),
            ("transitivity", self.transitivity),
            ("faithful", self.faithful),
            ("quasi_idempotent", self.quasi_idempotent),
            ("support_symmetry", self.support_symmetry),
            ("diagonal_dichotomy", self.diagonal_dichotomy),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect();
        out.extend(self.violated_conclusions());
        out
    }
}

/// Evaluates every constraint on `rep` directly from the definitions.
pub fn check_candidate(alg: &Algebra, rep: &CandidateRep) -> CheckReport {
    let (n, r) = (rep.n(), rep.r());
    let mut notes = Vec::new();
    let h = |a: usize, b: usize| alg.hom_dim(a, b) as i64;
    let k = |i: usize| h(i, i);

    let mut composition = n == alg.n();
    if !composition {
        notes.push(format!("candidate has {n} vertices, the algebra has {}", alg.n()));
    }
    'outer: for i in 1..=n {
        for j in 1..=n {
            for kk in 1..=n {
                for l in 1..=n {
                    for s in 0..r {
                        for v in 0..r {
                            if !composition {
                                break 'outer;
                            }
                            let mut lhs = 0;
                            for t in 0..r {
                                for u in 0..r {
                                    lhs += rep.mult(i, j, s, t) * rep.cartan_entry(t, u) * rep.mult(kk, l, u, v);
                                }
                            }
                            let rhs = h(j, kk) * rep.mult(i, l, s, v);
                            if lhs != rhs {
                                composition = false;
                                notes.push(format!(
                                    "composition fails at (i,j,k,l,s,v) = ({i},{j},{kk},{l},{},{}): {lhs} != {rhs}",
                                    s + 1,
                                    v + 1
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    let diag_ok = (0..r).all(|t| rep.cartan_entry(t, t) >= 1);
    if !diag_ok {
        notes.push("cartanB has a zero diagonal entry".into());
    }
    composition &= diag_ok;

    let mut total = crate::linalg::IntMatrix::identity(r);
    for i in 1..=n {
        for j in 1..=n {
            total = total.add(&rep.action_matrix(i, j));
        }
    }
    let transitivity = total.entries().all(|&x| x > 0);
    if !transitivity {
        notes.push("identity plus the sum of all [F_ij] has a zero entry".into());
    }

    let faithful = rep.is_faithful();

    let mut quasi_idempotent = true;
    let mut diagonal_dichotomy = true;
    let mut support_symmetry = true;
    for i in 1..=n.min(alg.n()) {
        let f = rep.action_matrix(i, i);
        if f.mul(&f) != f.scale(&k(i)) {
            quasi_idempotent = false;
            notes.push(format!("[F_{i}{i}]^2 != {} [F_{i}{i}]", k(i)));
        }
        for s in 0..r {
            let d = f[(s, s)];
            if d != 0 && d != k(i) {
                diagonal_dichotomy = false;
                notes.push(format!("[F_{i}{i}] has diagonal entry {d} at {}", s + 1));
            }
        }
        let block = rep.block(i, i);
        for s in 0..r {
            let row_zero = (0..r).all(|t| block[(s, t)] == 0);
            let col_zero = (0..r).all(|t| block[(t, s)] == 0);
            if row_zero != col_zero {
                support_symmetry = false;
                notes.push(format!(
                    "m[{i}][{i}] has row {} zero but not column, or vice versa",
                    s + 1
                ));
            }
        }
    }

    let xy = xy_sets(rep);
    let (singleton_x, disjoint_x, bijection) = match &xy.x_reduced {
        Some(xs) if faithful => {
            let singleton = xs.iter().all(|s| s.len() == 1);
            let mut seen = BTreeSet::new();
            let disjoint = xs.iter().flatten().all(|&s| seen.insert(s));
            let bij =
                (singleton && disjoint).then(|| xs.iter().map(|s| *s.iter().next().unwrap() - 1).collect::<Vec<_>>());
            (singleton, disjoint, bij)
        }
        _ => (false, false, None),
    };
    let rank_equals_n = r == n;
    let cartan_equal = match &bijection {
        Some(pi) if rank_equals_n => {
            (1..=n).all(|a| (1..=n).all(|b| rep.cartan_entry(pi[a - 1], pi[b - 1]) == h(a, b)))
        }
        _ => false,
    };
    let is_cell = alg.n() == n && canonical_form(rep) == canonical_form(&CandidateRep::cell(alg));

    CheckReport {
        composition,
        transitivity,
        faithful,
        quasi_idempotent,
        support_symmetry,
        diagonal_dichotomy,
        singleton_x,
        disjoint_x,
        rank_equals_n,
        cartan_equal,
        is_cell,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn cell_passes_everything() {
        for inst in [fixtures::edge_s2(), fixtures::path3_s3(), fixtures::example2()] {
            let alg = Algebra::build(&inst);
            let report = check_candidate(&alg, &CandidateRep::cell(&alg));
            assert!(report.derived_constraints_hold(), "{report:?}");
            assert!(report.violated_conclusions().is_empty());
            assert!(report.is_cell);
            assert!(report.notes.is_empty());
        }
    }

    #[test]
    fn zero_rep() {
        let alg = Algebra::build(&fixtures::edge_s2());
        let report = check_candidate(&alg, &CandidateRep::zero(2));
        assert!(report.composition && report.transitivity);
        assert!(!report.faithful);
        let xy = xy_sets(&CandidateRep::zero(2));
        assert!(xy.x_independent_of_j && xy.y_independent_of_i);
        assert!(xy.x.iter().flatten().all(|s| s.is_empty()));
    }

    #[test]
    fn injected_multiplicity_breaks_composition() {
        let alg = Algebra::build(&fixtures::edge_s2());
        let cell = CandidateRep::cell(&alg);
        let mut m: Vec<Vec<Vec<Vec<i64>>>> = (1..=2)
            .map(|i| (1..=2).map(|j| cell.block(i, j).to_rows()).collect())
            .collect();
        m[0][0][0][0] = 2;
        let bad = CandidateRep::new(cell.cartan_b().to_rows(), m).unwrap();
        let report = check_candidate(&alg, &bad);
        assert!(!report.composition);
        assert!(report.notes[0].starts_with("composition fails"));
    }

    #[test]
    fn cell_xy_sets() {
        let alg = Algebra::build(&fixtures::edge_s2());
        let xy = xy_sets(&CandidateRep::cell(&alg));
        let expected: Vec<BTreeSet<usize>> = vec![[1].into(), [2].into()];
        assert_eq!(xy.x_reduced.as_ref(), Some(&expected));
        assert_eq!(xy.x_equals_y, Some(true));
        assert_eq!(xy.union_is_everything, Some(true));
    }
}
