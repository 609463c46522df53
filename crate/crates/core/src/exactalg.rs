//! Exact rational scalars and sparse linear algebra.
//!
//! Everything downstream (mode matrices, coinvariant spans, presentation
//! membership checks) is expressed through [`SparseVector`], [`SparseMatrix`]
//! and [`Subspace`]. Basis indices are opaque: this module never interprets
//! them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Scalar = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactAlgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseScalarError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}; expected \"p\" or \"p/q\"")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p"` or `"p/q"` with optional sign on `p`. Decimal notation is
/// rejected on purpose: rational parameters stay exact at the boundary.
pub fn parse_scalar(text: &str) -> Result<Scalar, ParseScalarError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseScalarError::Empty);
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let well_formed = |s: &str, signed: bool| {
        let digits = if signed {
            s.strip_prefix(['-', '+']).unwrap_or(s)
        } else {
            s
        };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !well_formed(num, true) || den.is_some_and(|d| !well_formed(d, false)) {
        return Err(ParseScalarError::Malformed(text.to_string()));
    }
    let n = BigInt::from_str(num).map_err(|_| ParseScalarError::Malformed(text.to_string()))?;
    let d = match den {
        Some(d) => BigInt::from_str(d).map_err(|_| ParseScalarError::Malformed(text.to_string()))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(ParseScalarError::ZeroDenominator(text.to_string()));
    }
    Ok(Scalar::new(n, d))
}

/// `p/q` text form, or `p` for integers.
pub fn format_scalar(x: &Scalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A vector of fixed dimension storing only nonzero entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseVector {
    dim: usize,
    entries: BTreeMap<usize, Scalar>,
}

impl fmt::Debug for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseVector[{}]{{", self.dim)?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {}", format_scalar(v))?;
        }
        write!(f, "}}")
    }
}

impl SparseVector {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        assert!(index < dim, "unit index {index} out of range for {dim}");
        let mut v = Self::zero(dim);
        v.entries.insert(index, Scalar::one());
        v
    }

    pub fn from_dense(values: &[Scalar]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, x.clone()))
            .collect();
        Self {
            dim: values.len(),
            entries,
        }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self::from_dense(&values.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    /// Builds a vector from `(index, value)` pairs, summing repeated indices.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, Scalar)>,
    ) -> Result<Self, ExactAlgError> {
        let mut v = Self::zero(dim);
        for (i, x) in entries {
            if i >= dim {
                return Err(ExactAlgError::IndexOutOfRange {
                    index: i,
                    dimension: dim,
                });
            }
            v.add_to(i, &x);
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Scalar {
        self.entries.get(&index).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.entries.iter().map(|(&i, x)| (i, x))
    }

    /// Smallest index carrying a nonzero entry.
    pub fn leading(&self) -> Option<(usize, &Scalar)> {
        self.entries.iter().next().map(|(&i, x)| (i, x))
    }

    pub fn add_to(&mut self, index: usize, value: &Scalar) {
        if value.is_zero() {
            return;
        }
        debug_assert!(index < self.dim);
        let slot = self.entries.entry(index).or_insert_with(Scalar::zero);
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&index);
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &SparseVector, c: &Scalar) {
        debug_assert_eq!(self.dim, other.dim);
        if c.is_zero() {
            return;
        }
        for (i, x) in other.iter() {
            self.add_to(i, &(x * c));
        }
    }

    pub fn scaled(&self, c: &Scalar) -> SparseVector {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|(&i, x)| (i, x * c)).collect(),
        }
    }

    pub fn neg(&self) -> SparseVector {
        self.scaled(&-Scalar::one())
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        out.add_scaled(other, &-Scalar::one());
        out
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        out.add_scaled(other, &Scalar::one());
        out
    }

    pub fn dot(&self, other: &SparseVector) -> Scalar {
        let (small, large) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .iter()
            .filter_map(|(i, x)| large.entries.get(&i).map(|y| x * y))
            .fold(Scalar::zero(), |acc, t| acc + t)
    }

    /// Keeps only entries whose index satisfies `keep`.
    pub fn filtered(&self, keep: impl Fn(usize) -> bool) -> SparseVector {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(&i, _)| keep(i))
                .map(|(&i, x)| (i, x.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.dim];
        for (i, x) in self.iter() {
            out[i] = x.clone();
        }
        out
    }
}

/// A linear map stored column by column: column `j` is the image of the
/// `j`-th source basis vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseMatrix {
    rows: usize,
    columns: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            columns: vec![SparseVector::zero(rows); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            columns: (0..n).map(|j| SparseVector::unit(n, j)).collect(),
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseVector>) -> Result<Self, ExactAlgError> {
        if let Some(bad) = columns.iter().find(|c| c.dim() != rows) {
            return Err(ExactAlgError::DimensionMismatch {
                expected: rows,
                found: bad.dim(),
            });
        }
        Ok(Self { rows, columns })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &SparseVector {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        self.columns[j].get(i)
    }

    pub fn add_to_entry(&mut self, i: usize, j: usize, value: &Scalar) {
        self.columns[j].add_to(i, value);
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseVector::is_zero)
    }

    pub fn apply(&self, v: &SparseVector) -> Result<SparseVector, ExactAlgError> {
        if v.dim() != self.cols() {
            return Err(ExactAlgError::DimensionMismatch {
                expected: self.cols(),
                found: v.dim(),
            });
        }
        let mut out = SparseVector::zero(self.rows);
        for (j, x) in v.iter() {
            out.add_scaled(&self.columns[j], x);
        }
        Ok(out)
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, ExactAlgError> {
        let columns = rhs
            .columns
            .iter()
            .map(|c| self.apply(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SparseMatrix {
            rows: self.rows,
            columns,
        })
    }

    pub fn add_scaled(&mut self, other: &SparseMatrix, c: &Scalar) -> Result<(), ExactAlgError> {
        if self.rows != other.rows || self.cols() != other.cols() {
            return Err(ExactAlgError::DimensionMismatch {
                expected: self.rows * self.cols(),
                found: other.rows * other.cols(),
            });
        }
        for (a, b) in self.columns.iter_mut().zip(&other.columns) {
            a.add_scaled(b, c);
        }
        Ok(())
    }

    pub fn scaled(&self, c: &Scalar) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            columns: self.columns.iter().map(|col| col.scaled(c)).collect(),
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut out = SparseMatrix::zero(self.cols(), self.rows);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, x) in col.iter() {
                out.columns[i].add_to(j, x);
            }
        }
        out
    }
}

/// A subspace held as its reduced row-echelon basis, keyed by pivot column.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient: usize,
    rows: BTreeMap<usize, SparseVector>,
}

impl Subspace {
    pub fn new(ambient: usize) -> Self {
        Self {
            ambient,
            rows: BTreeMap::new(),
        }
    }

    pub fn spanned_by<'a>(
        ambient: usize,
        vectors: impl IntoIterator<Item = &'a SparseVector>,
    ) -> Result<Self, ExactAlgError> {
        let mut s = Self::new(ambient);
        for v in vectors {
            s.insert(v)?;
        }
        Ok(s)
    }

    pub fn ambient_dimension(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient
    }

    /// Echelon rows in increasing pivot order.
    pub fn echelon_rows(&self) -> impl Iterator<Item = &SparseVector> {
        self.rows.values()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    fn check_dim(&self, v: &SparseVector) -> Result<(), ExactAlgError> {
        if v.dim() != self.ambient {
            return Err(ExactAlgError::DimensionMismatch {
                expected: self.ambient,
                found: v.dim(),
            });
        }
        Ok(())
    }

    /// Remainder of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &SparseVector) -> Result<SparseVector, ExactAlgError> {
        self.check_dim(v)?;
        let mut r = v.clone();
        // Rows vanish on each other's pivots, so only pivots already present
        // in `v` need clearing.
        let hits: Vec<usize> = v
            .iter()
            .map(|(i, _)| i)
            .filter(|i| self.rows.contains_key(i))
            .collect();
        for p in hits {
            let c = r.get(p);
            if !c.is_zero() {
                r.add_scaled(&self.rows[&p], &-c);
            }
        }
        Ok(r)
    }

    /// In-place insertion. Returns `true` when the rank grew.
    pub fn insert(&mut self, v: &SparseVector) -> Result<bool, ExactAlgError> {
        let r = self.reduce(v)?;
        let Some((pivot, lead)) = r.leading() else {
            return Ok(false);
        };
        let r = r.scaled(&lead.recip());
        for row in self.rows.values_mut() {
            let c = row.get(pivot);
            if !c.is_zero() {
                row.add_scaled(&r, &-c);
            }
        }
        self.rows.insert(pivot, r);
        Ok(true)
    }

    /// Functional form of [`Subspace::insert`].
    pub fn span_insert(&self, v: &SparseVector) -> Result<Subspace, ExactAlgError> {
        let mut s = self.clone();
        s.insert(v)?;
        Ok(s)
    }

    pub fn contains(&self, v: &SparseVector) -> Result<bool, ExactAlgError> {
        Ok(self.reduce(v)?.is_zero())
    }

    /// Basis of the functionals vanishing on this subspace, one per
    /// non-pivot column.
    pub fn annihilator_basis(&self) -> Vec<SparseVector> {
        (0..self.ambient)
            .filter(|j| !self.rows.contains_key(j))
            .map(|j| {
                let mut phi = SparseVector::unit(self.ambient, j);
                for (&p, row) in &self.rows {
                    let c = row.get(j);
                    if !c.is_zero() {
                        phi.add_to(p, &-c);
                    }
                }
                phi
            })
            .collect()
    }
}

pub fn membership(space: &Subspace, v: &SparseVector) -> Result<bool, ExactAlgError> {
    space.contains(v)
}

pub fn quotient_dim(ambient_dimension: usize, image: &Subspace) -> Result<usize, ExactAlgError> {
    if image.ambient_dimension() != ambient_dimension {
        return Err(ExactAlgError::DimensionMismatch {
            expected: ambient_dimension,
            found: image.ambient_dimension(),
        });
    }
    Ok(ambient_dimension - image.rank())
}

/// Generalized binomial coefficient `n choose k` for any integer `n`.
pub fn binomial(n: i64, k: i64) -> Scalar {
    if k < 0 {
        return Scalar::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    Scalar::new(num, den)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `x^e` for any integer exponent; panics on `0^negative`.
pub fn pow_scalar(x: &Scalar, e: i64) -> Scalar {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        assert!(!x.is_zero(), "zero raised to a negative power");
        num_traits::pow(x.recip(), e.unsigned_abs() as usize)
    }
}

pub fn sign(e: i64) -> Scalar {
    if e.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

pub fn is_negative(x: &Scalar) -> bool {
    x.is_negative()
}
