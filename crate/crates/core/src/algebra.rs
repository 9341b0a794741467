//! The finite-dimensional algebra `A = kQ/I` of a tree with special leaves.
//!
//! Products are written right to left: `x * y` means "first `y`, then `x`",
//! so the path `1 -> 2 -> 3` is the product `(2->3) * (1->2)`. Under the
//! defining relations every path of length two through three distinct
//! vertices vanishes, the back-and-forth paths at a vertex all coincide
//! (giving one basis element `Loop(i)`), `Loop(s)` vanishes for special `s`,
//! and every path of length three or more vanishes. The algebra therefore
//! has the basis
//!
//! ```text
//! e_i  (one per vertex)   i->j  (one per arrow)   loop_i  (one per i not in S)
//! ```
//!
//! and every product of basis elements is either zero or again a basis
//! element with coefficient one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::IntMatrix;
use crate::tree::{Arrow, ValidatedInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisElement {
    Idem { vertex: usize },
    Arrow { source: usize, target: usize },
    Loop { vertex: usize },
}

impl BasisElement {
    pub fn arrow(a: Arrow) -> Self {
        BasisElement::Arrow {
            source: a.source,
            target: a.target,
        }
    }

    pub fn source(&self) -> usize {
        match *self {
            BasisElement::Idem { vertex } | BasisElement::Loop { vertex } => vertex,
            BasisElement::Arrow { source, .. } => source,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            BasisElement::Idem { vertex } | BasisElement::Loop { vertex } => vertex,
            BasisElement::Arrow { target, .. } => target,
        }
    }

    /// Length of the underlying path.
    pub fn length(&self) -> usize {
        match self {
            BasisElement::Idem { .. } => 0,
            BasisElement::Arrow { .. } => 1,
            BasisElement::Loop { .. } => 2,
        }
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisElement::Idem { vertex } => write!(f, "e{vertex}"),
            BasisElement::Arrow { source, target } => write!(f, "{source}->{target}"),
            BasisElement::Loop { vertex } => write!(f, "loop{vertex}"),
        }
    }
}

/// Finitely supported integer combination of basis elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinComb(BTreeMap<BasisElement, i64>);

impl LinComb {
    pub fn zero() -> Self {
        LinComb::default()
    }

    pub fn basis(b: BasisElement) -> Self {
        LinComb(BTreeMap::from([(b, 1)]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, b: &BasisElement) -> i64 {
        self.0.get(b).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, b: BasisElement, c: i64) {
        let entry = self.0.entry(b).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.0.remove(&b);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisElement, &i64)> {
        self.0.iter()
    }

    /// The single basis element with coefficient one, if that is what this is.
    pub fn as_basis(&self) -> Option<BasisElement> {
        match self.0.iter().next() {
            Some((&b, &1)) if self.0.len() == 1 => Some(b),
            _ => None,
        }
    }
}

impl std::ops::Add for LinComb {
    type Output = LinComb;
    fn add(mut self, rhs: LinComb) -> LinComb {
        for (b, c) in rhs.0 {
            self.add_term(b, c);
        }
        self
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(b, &c)| if c == 1 { b.to_string() } else { format!("{c}*{b}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("{0} is not an arrow of the doubled quiver")]
    NotAnArrow(Arrow),
    #[error("word is not a path: {prev} is followed by {next}")]
    NonComposable { prev: Arrow, next: Arrow },
    #[error("word starting at vertex {start} begins with {first}")]
    WrongStart { start: usize, first: Arrow },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
}

/// `A = A_{T,S}` with an explicit basis and full multiplication table.
#[derive(Clone, Debug)]
pub struct Algebra {
    instance: ValidatedInstance,
    basis: Vec<BasisElement>,
    index: HashMap<BasisElement, usize>,
    /// `table[x * dim + y]` is the index of `basis[x] * basis[y]`, if nonzero.
    table: Vec<Option<usize>>,
}

impl Algebra {
    pub fn build(instance: &ValidatedInstance) -> Algebra {
        let n = instance.n();
        let mut basis: Vec<BasisElement> = (1..=n).map(|vertex| BasisElement::Idem { vertex }).collect();
        for &(a, b) in instance.edges() {
            basis.push(BasisElement::Arrow { source: a, target: b });
            basis.push(BasisElement::Arrow { source: b, target: a });
        }
        basis.extend(
            (1..=n)
                .filter(|&v| !instance.is_special(v))
                .map(|vertex| BasisElement::Loop { vertex }),
        );
        basis.sort();

        let index: HashMap<BasisElement, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let dim = basis.len();
        let mut table = vec![None; dim * dim];
        for (x, bx) in basis.iter().enumerate() {
            for (y, by) in basis.iter().enumerate() {
                table[x * dim + y] = basis_product(instance, bx, by).map(|p| index[&p]);
            }
        }
        Algebra {
            instance: instance.clone(),
            basis,
            index,
            table,
        }
    }

    pub fn instance(&self) -> &ValidatedInstance {
        &self.instance
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn index_of(&self, b: &BasisElement) -> Option<usize> {
        self.index.get(b).copied()
    }

    /// Product of basis elements by index, `basis[x] * basis[y]`.
    pub fn mult(&self, x: usize, y: usize) -> Option<usize> {
        self.table[x * self.dim() + y]
    }

    pub fn mult_basis(&self, x: &BasisElement, y: &BasisElement) -> Option<BasisElement> {
        let (xi, yi) = (self.index_of(x)?, self.index_of(y)?);
        self.mult(xi, yi).map(|p| self.basis[p])
    }

    /// Nonzero products as `(x, y, x*y)` index triples, in row-major order.
    pub fn nonzero_products(&self) -> Vec<(usize, usize, usize)> {
        let dim = self.dim();
        (0..dim)
            .flat_map(|x| (0..dim).map(move |y| (x, y)))
            .filter_map(|(x, y)| self.mult(x, y).map(|p| (x, y, p)))
            .collect()
    }

    /// Reduces a word of arrows, listed in the order they are traversed and
    /// starting at `start`, to its normal form.
    pub fn normal_form(&self, start: usize, word: &[Arrow]) -> Result<LinComb, AlgebraError> {
        if start < 1 || start > self.n() {
            return Err(AlgebraError::VertexOutOfRange(start));
        }
        if let Some(&first) = word.first() {
            if first.source != start {
                return Err(AlgebraError::WrongStart { start, first });
            }
        }
        for pair in word.windows(2) {
            if pair[0].target != pair[1].source {
                return Err(AlgebraError::NonComposable {
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        let mut current = Some(self.index[&BasisElement::Idem { vertex: start }]);
        for &a in word {
            let ai = self
                .index_of(&BasisElement::arrow(a))
                .ok_or(AlgebraError::NotAnArrow(a))?;
            current = current.and_then(|c| self.mult(ai, c));
        }
        Ok(current.map_or_else(LinComb::zero, |c| LinComb::basis(self.basis[c])))
    }

    pub fn multiply(&self, x: &LinComb, y: &LinComb) -> LinComb {
        let mut out = LinComb::zero();
        for (bx, cx) in x.terms() {
            for (by, cy) in y.terms() {
                if let Some(p) = self.mult_basis(bx, by) {
                    out.add_term(p, cx * cy);
                }
            }
        }
        out
    }

    /// `dim e_l A e_k`: basis elements that are paths from `k` to `l`.
    pub fn hom_dim(&self, l: usize, k: usize) -> usize {
        self.basis.iter().filter(|b| b.target() == l && b.source() == k).count()
    }

    /// Entry `(s-1, t-1)` is `hom_dim(s, t)`.
    pub fn cartan_matrix(&self) -> IntMatrix {
        IntMatrix::from_fn(self.n(), self.n(), |s, t| self.hom_dim(s + 1, t + 1) as i64)
    }

    /// `k_i = dim e_i A e_i`: 2 off `S`, 1 on `S`.
    pub fn loop_scalar(&self, i: usize) -> usize {
        self.hom_dim(i, i)
    }
}

/// `x * y` on basis elements (first `y`, then `x`).
fn basis_product(inst: &ValidatedInstance, x: &BasisElement, y: &BasisElement) -> Option<BasisElement> {
    if x.source() != y.target() {
        return None;
    }
    match (x, y) {
        (BasisElement::Idem { .. }, _) => Some(*y),
        (_, BasisElement::Idem { .. }) => Some(*x),
        (BasisElement::Arrow { target, .. }, BasisElement::Arrow { source, .. }) => {
            // y: source -> mid, x: mid -> target
            if target == source && !inst.is_special(*source) {
                Some(BasisElement::Loop { vertex: *source })
            } else {
                None
            }
        }
        _ => None,
    }
}
