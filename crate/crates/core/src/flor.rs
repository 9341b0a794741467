//! Normal form of nonnegative (quasi-)idempotent matrices.
//!
//! A nonnegative idempotent `E` is, after a simultaneous permutation of rows
//! and columns,
//!
//! ```text
//! [ 0  AJ  AJB ]
//! [ 0  J   JB  ]
//! [ 0  0   0   ]
//! ```
//!
//! with `J` a direct sum of positive rank-one idempotents. A quasi-idempotent
//! `M` (`M² = λM`, `λ > 0`) is handled through `E = M/λ`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{QMatrix, Rational};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FlorError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("entry ({0}, {1}) is negative")]
    Negative(usize, usize),
    #[error("not quasi-idempotent: no positive scalar λ with M² = λM")]
    NotQuasiIdempotent,
    #[error("not idempotent: {0}")]
    NotIdempotent(String),
}

/// A square matrix of exact nonnegative rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonnegMatrix(QMatrix);

impl NonnegMatrix {
    pub fn new(m: QMatrix) -> Result<Self, FlorError> {
        if !m.is_square() {
            return Err(FlorError::NotSquare(m.rows(), m.cols()));
        }
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)].is_negative() {
                    return Err(FlorError::Negative(i, j));
                }
            }
        }
        Ok(NonnegMatrix(m))
    }

    pub fn from_int_rows(rows: Vec<Vec<i64>>) -> Result<Self, FlorError> {
        let m = crate::linalg::to_rational(&crate::linalg::IntMatrix::from_rows(rows));
        NonnegMatrix::new(m)
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MatrixParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn parse_rational(token: &str) -> Option<Rational> {
    let (num, den) = match token.split_once('/') {
        Some((a, b)) => (
            a.parse::<num_bigint::BigInt>().ok()?,
            b.parse::<num_bigint::BigInt>().ok()?,
        ),
        None => (token.parse().ok()?, num_bigint::BigInt::one()),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Parses the matrix file format: a size line, then that many rows of
/// whitespace-separated rationals (`3`, `-1`, `1/2`). Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_matrix(text: &str) -> Result<QMatrix, MatrixParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line, message: String| MatrixParseError::Syntax { line, message };
    let (line, first) = lines.next().ok_or_else(|| err(1, "missing size line".into()))?;
    let size: usize = first
        .parse()
        .map_err(|_| err(line, format!("expected a matrix size, found {first:?}")))?;
    let mut rows = Vec::with_capacity(size);
    for (line, text) in lines {
        if rows.len() == size {
            return Err(err(line, "more rows than the declared size".into()));
        }
        let row: Vec<Rational> = text
            .split_whitespace()
            .map(|t| parse_rational(t).ok_or_else(|| err(line, format!("bad rational {t:?}"))))
            .collect::<Result<_, _>>()?;
        if row.len() != size {
            return Err(err(line, format!("expected {size} entries, found {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != size {
        return Err(err(
            text.lines().count(),
            format!("expected {size} rows, found {}", rows.len()),
        ));
    }
    Ok(QMatrix::from_fn(size, size, |i, j| rows[i][j].clone()))
}

/// The unique `λ > 0` with `M² = λM`, if any. `None` for the zero matrix.
pub fn quasi_idempotent_scalar(m: &NonnegMatrix) -> Option<Rational> {
    let m = m.matrix();
    let (i, j) = (0..m.rows())
        .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| !m[(i, j)].is_zero())?;
    let sq = m.mul(m);
    let lambda = &sq[(i, j)] / &m[(i, j)];
    if lambda.is_positive() && sq == m.scale(&lambda) {
        Some(lambda)
    } else {
        None
    }
}

fn ser_rational_matrix<S: Serializer>(m: &QMatrix, s: S) -> Result<S::Ok, S::Error> {
    m.map(|x| x.to_string()).serialize(s)
}

fn ser_rational<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

/// Certificate for the normal form. All indices are 0-based positions of the
/// input matrix; `permutation` lists them in block order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlorForm {
    #[serde(serialize_with = "ser_rational")]
    pub scalar: Rational,
    pub permutation: Vec<usize>,
    pub first_block: Vec<usize>,
    pub core: Vec<usize>,
    pub last_block: Vec<usize>,
    pub core_classes: Vec<Vec<usize>>,
    #[serde(serialize_with = "ser_rational_matrix")]
    pub aj: QMatrix,
    #[serde(serialize_with = "ser_rational_matrix")]
    pub j: QMatrix,
    #[serde(serialize_with = "ser_rational_matrix")]
    pub jb: QMatrix,
    #[serde(serialize_with = "ser_rational_matrix")]
    pub ajb: QMatrix,
}

impl FlorForm {
    /// Indices of the core in block order (classes concatenated).
    pub fn core_order(&self) -> Vec<usize> {
        self.core_classes.iter().flatten().copied().collect()
    }

    /// `P^T M P` for the certificate's permutation.
    pub fn permuted(&self, m: &QMatrix) -> QMatrix {
        m.select(&self.permutation, &self.permutation)
    }

    /// Aligned display of the permuted matrix with block separators.
    pub fn display_blocks(&self, m: &QMatrix) -> String {
        let p = self.permuted(m);
        let cells: Vec<Vec<String>> = p
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        let cuts = [self.first_block.len(), self.first_block.len() + self.core.len()];
        let size = self.permutation.len();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "order: {}",
            self.permutation
                .iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        let rule = |out: &mut String| {
            let mut line = String::new();
            for c in 0..size {
                if c > 0 && cuts.contains(&c) {
                    line.push_str("-+");
                }
                line.push_str(&"-".repeat(width + 1));
            }
            let _ = writeln!(out, "{line}");
        };
        for (r, row) in cells.iter().enumerate() {
            if r > 0 && cuts.contains(&r) && r < size {
                rule(&mut out);
            }
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 && cuts.contains(&c) {
                    line.push_str(" |");
                }
                let _ = write!(line, " {cell:>width$}");
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }
}

fn row_is_zero(e: &QMatrix, i: usize) -> bool {
    (0..e.cols()).all(|j| e[(i, j)].is_zero())
}

fn col_is_zero(e: &QMatrix, j: usize) -> bool {
    (0..e.rows()).all(|i| e[(i, j)].is_zero())
}

/// Computes the normal form with its certificate, verifying it before
/// returning. The zero matrix gets `λ = 1` and everything in `last_block`.
pub fn flor_decompose(m: &NonnegMatrix) -> Result<FlorForm, FlorError> {
    let size = m.size();
    let lambda = if m.matrix().is_zero() {
        Rational::one()
    } else {
        quasi_idempotent_scalar(m).ok_or(FlorError::NotQuasiIdempotent)?
    };
    let e = m.matrix().scale(&lambda.recip());

    let core: Vec<usize> = (0..size).filter(|&i| e[(i, i)].is_positive()).collect();
    let mut first_block = Vec::new();
    let mut last_block = Vec::new();
    for i in (0..size).filter(|i| !core.contains(i)) {
        if row_is_zero(&e, i) {
            last_block.push(i);
        } else if col_is_zero(&e, i) {
            first_block.push(i);
        } else {
            return Err(FlorError::NotIdempotent(format!(
                "index {} is outside the core but has a nonzero row and column",
                i + 1
            )));
        }
    }

    let mut core_classes: Vec<Vec<usize>> = Vec::new();
    let mut seen = BTreeSet::new();
    for &start in &core {
        if !seen.insert(start) {
            continue;
        }
        let mut class = vec![start];
        let mut k = 0;
        while k < class.len() {
            let a = class[k];
            for &b in &core {
                if !seen.contains(&b) && (e[(a, b)].is_positive() || e[(b, a)].is_positive()) {
                    seen.insert(b);
                    class.push(b);
                }
            }
            k += 1;
        }
        class.sort_unstable();
        core_classes.push(class);
    }

    let core_order: Vec<usize> = core_classes.iter().flatten().copied().collect();
    let permutation: Vec<usize> = first_block
        .iter()
        .chain(&core_order)
        .chain(&last_block)
        .copied()
        .collect();
    let form = FlorForm {
        scalar: lambda,
        aj: e.select(&first_block, &core_order),
        j: e.select(&core_order, &core_order),
        jb: e.select(&core_order, &last_block),
        ajb: e.select(&first_block, &last_block),
        permutation,
        first_block,
        core,
        last_block,
        core_classes,
    };
    if verify_flor(m.matrix(), &form) {
        Ok(form)
    } else {
        Err(FlorError::NotIdempotent("block identities fail".into()))
    }
}

fn is_rank_one_idempotent(b: &QMatrix) -> bool {
    let k = b.rows();
    if b.entries().any(|x| !x.is_positive()) || !b.trace().is_one() {
        return false;
    }
    for i in 0..k {
        for i2 in i + 1..k {
            for j in 0..k {
                for j2 in j + 1..k {
                    if &b[(i, j)] * &b[(i2, j2)] != &b[(i, j2)] * &b[(i2, j)] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Re-checks every invariant of `form` against `m` from scratch.
pub fn verify_flor(m: &QMatrix, form: &FlorForm) -> bool {
    if !m.is_square() || m.entries().any(|x| x.is_negative()) || !form.scalar.is_positive() {
        return false;
    }
    let size = m.rows();

    let mut core_sorted = form.core_order();
    core_sorted.sort_unstable();
    if core_sorted != form.core {
        return false;
    }
    let expected_perm: Vec<usize> = form
        .first_block
        .iter()
        .chain(&form.core_order())
        .chain(&form.last_block)
        .copied()
        .collect();
    if expected_perm != form.permutation {
        return false;
    }
    let mut all = form.permutation.clone();
    all.sort_unstable();
    if all != (0..size).collect::<Vec<_>>() {
        return false;
    }

    let e = m.scale(&form.scalar.recip());
    if e.mul(&e) != e {
        return false;
    }
    let core = form.core_order();
    let (f, l) = (&form.first_block, &form.last_block);
    let everything: Vec<usize> = (0..size).collect();

    if !e.select(&everything, f).is_zero() || !e.select(l, &everything).is_zero() {
        return false;
    }
    if e.select(&core, &core) != form.j
        || e.select(f, &core) != form.aj
        || e.select(&core, l) != form.jb
        || e.select(f, l) != form.ajb
    {
        return false;
    }

    // J is block diagonal over the classes, each block a positive rank-one idempotent.
    let mut offset = 0;
    for class in &form.core_classes {
        if class.is_empty() {
            return false;
        }
        if !is_rank_one_idempotent(&e.select(class, class)) {
            return false;
        }
        for &a in class {
            for &b in core.iter().filter(|b| !class.contains(b)) {
                if !e[(a, b)].is_zero() {
                    return false;
                }
            }
        }
        offset += class.len();
    }
    if offset != core.len() {
        return false;
    }

    let j = &form.j;
    j.mul(j) == *j && form.aj.mul(j) == form.aj && j.mul(&form.jb) == form.jb && form.aj.mul(&form.jb) == form.ajb
}

/// A random matrix built from the block form: returns `(M, λ)` with
/// `M = λ · P (block form) P^T`. Sizes of the three blocks sum to at most
/// `max_size`; entries are small positive rationals.
pub fn random_block_form<R: Rng + ?Sized>(rng: &mut R, max_size: usize) -> (QMatrix, Rational) {
    let size = rng.gen_range(1..=max_size);
    let core_len = rng.gen_range(0..=size);
    let first_len = rng.gen_range(0..=size - core_len);
    let last_len = size - core_len - first_len;

    let mut class_sizes = Vec::new();
    let mut left = core_len;
    while left > 0 {
        let c = rng.gen_range(1..=left);
        class_sizes.push(c);
        left -= c;
    }

    let small = |rng: &mut R| Rational::from_integer(rng.gen_range(1..=3).into());
    let mut j = QMatrix::zeros(core_len, core_len);
    let mut offset = 0;
    for c in class_sizes {
        let x: Vec<Rational> = (0..c).map(|_| small(rng)).collect();
        let y: Vec<Rational> = (0..c).map(|_| small(rng)).collect();
        let dot: Rational = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        for a in 0..c {
            for b in 0..c {
                j[(offset + a, offset + b)] = &x[a] * &y[b] / &dot;
            }
        }
        offset += c;
    }
    let sparse = |rng: &mut R| {
        if rng.gen_bool(0.4) {
            Rational::zero()
        } else {
            small(rng)
        }
    };
    let a = QMatrix::from_fn(first_len, core_len, |_, _| sparse(rng));
    let b = QMatrix::from_fn(core_len, last_len, |_, _| sparse(rng));
    let aj = a.mul(&j);
    let jb = j.mul(&b);
    let ajb = aj.mul(&b);

    let mut block = QMatrix::zeros(size, size);
    let (c0, l0) = (first_len, first_len + core_len);
    for r in 0..core_len {
        for c in 0..core_len {
            block[(c0 + r, c0 + c)] = j[(r, c)].clone();
        }
        for c in 0..last_len {
            block[(c0 + r, l0 + c)] = jb[(r, c)].clone();
        }
    }
    for r in 0..first_len {
        for c in 0..core_len {
            block[(r, c0 + c)] = aj[(r, c)].clone();
        }
        for c in 0..last_len {
            block[(r, l0 + c)] = ajb[(r, c)].clone();
        }
    }

    let mut perm: Vec<usize> = (0..size).collect();
    perm.shuffle(rng);
    let lambda = Rational::new(rng.gen_range(1..=4).into(), rng.gen_range(1..=3).into());
    let m = QMatrix::from_fn(size, size, |r, c| &block[(perm[r], perm[c])] * &lambda);
    (m, lambda)
}
