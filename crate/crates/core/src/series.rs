//! Truncated Laurent series over the rationals, base-point preserving disc
//! automorphisms, differentials on the punctured disc and their residues.
//!
//! Every value carries its truncation order `N`: coefficients at exponents
//! `>= N` are unknown. Operations propagate the smallest order that is still
//! exact and never extend precision.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactalg::{binomial, format_scalar, int, pow_scalar, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("insufficient truncation: {operation} needs order > {needed}, have {available}")]
    InsufficientTruncation {
        operation: &'static str,
        needed: i64,
        available: i64,
    },
    #[error("disc automorphism needs a nonzero linear coefficient")]
    ZeroLinearCoefficient,
    #[error("disc automorphism needs truncation order >= 2, got {0}")]
    TruncationTooSmall(i64),
    #[error("series has no known nonzero leading term below order {0}")]
    NoLeadingTerm(i64),
}

/// `Σ c_k t^k + O(t^N)` with finitely many negative exponents.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedLaurent {
    coefficients: BTreeMap<i64, Scalar>,
    truncation: i64,
}

impl fmt::Debug for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.coefficients {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})t^{k}", format_scalar(c))?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.truncation)
    }
}

impl TruncatedLaurent {
    pub fn zero(truncation: i64) -> Self {
        Self {
            coefficients: BTreeMap::new(),
            truncation,
        }
    }

    pub fn monomial(coefficient: Scalar, exponent: i64, truncation: i64) -> Self {
        let mut s = Self::zero(truncation);
        s.add_term(exponent, &coefficient);
        s
    }

    /// Terms at or above `truncation` are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Scalar)>, truncation: i64) -> Self {
        let mut s = Self::zero(truncation);
        for (k, c) in terms {
            s.add_term(k, &c);
        }
        s
    }

    /// Polynomial `c_0 + c_1 t + ...` from consecutive integer coefficients.
    pub fn from_ints(start: i64, coefficients: &[i64], truncation: i64) -> Self {
        Self::from_terms(
            coefficients
                .iter()
                .enumerate()
                .map(|(i, &c)| (start + i as i64, int(c))),
            truncation,
        )
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    /// Smallest stored exponent, or the truncation order for the zero series.
    pub fn min_exponent(&self) -> i64 {
        self.coefficients
            .keys()
            .next()
            .copied()
            .unwrap_or(self.truncation)
    }

    pub fn coefficient(&self, exponent: i64) -> Scalar {
        self.coefficients
            .get(&exponent)
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.coefficients.iter().map(|(&k, c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn add_term(&mut self, exponent: i64, c: &Scalar) {
        if exponent >= self.truncation || c.is_zero() {
            return;
        }
        let slot = self
            .coefficients
            .entry(exponent)
            .or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.coefficients.remove(&exponent);
        }
    }

    /// Lowers the truncation order, discarding terms above it.
    pub fn truncate(&self, truncation: i64) -> Self {
        let truncation = truncation.min(self.truncation);
        Self {
            coefficients: self
                .coefficients
                .range(..truncation)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
            truncation,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.truncate(other.truncation);
        for (k, c) in other.terms() {
            out.add_term(k, c);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_terms(self.terms().map(|(k, x)| (k, x * c)), self.truncation)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Scalar::one()))
    }

    /// Multiplication by `t^shift`.
    pub fn shift(&self, shift: i64) -> Self {
        Self {
            coefficients: self
                .coefficients
                .iter()
                .map(|(&k, c)| (k + shift, c.clone()))
                .collect(),
            truncation: self.truncation + shift,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let truncation = (self.truncation + other.min_exponent())
            .min(other.truncation + self.min_exponent());
        let mut out = Self::zero(truncation);
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                if i + j < truncation {
                    out.add_term(i + j, &(a * b));
                }
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms().map(|(k, c)| (k - 1, c * int(k))),
            self.truncation - 1,
        )
    }

    /// `self^k` for any integer `k`; negative powers need a known nonzero
    /// leading coefficient.
    pub fn pow(&self, k: i64) -> Result<Self, SeriesError> {
        if k == 0 {
            return Ok(Self::monomial(Scalar::one(), 0, i64::MAX / 4));
        }
        let v = self.min_exponent();
        if v >= self.truncation {
            return Err(SeriesError::NoLeadingTerm(self.truncation));
        }
        let lead = self.coefficient(v);
        // self = lead * t^v * (1 + h), h = O(t), known mod t^(N - v)
        let rel = self.truncation - v;
        let h = self
            .shift(-v)
            .scale(&lead.recip())
            .sub(&Self::monomial(Scalar::one(), 0, rel));
        let mut acc = Self::monomial(Scalar::one(), 0, rel);
        let mut h_pow = Self::monomial(Scalar::one(), 0, rel);
        for j in 1..rel {
            h_pow = h_pow.mul(&h).truncate(rel);
            if h_pow.is_zero() {
                break;
            }
            acc = acc.add(&h_pow.scale(&binomial(k, j)));
        }
        Ok(acc.scale(&pow_scalar(&lead, k)).shift(v * k))
    }

    /// `self(g(t))`.
    pub fn compose(&self, g: &DiscAuto) -> Result<Self, SeriesError> {
        let g_series = g.as_series();
        let v = self.min_exponent();
        let truncation = self.truncation.min(v + g.truncation() - 1);
        if !self.is_zero() && truncation <= v {
            return Err(SeriesError::InsufficientTruncation {
                operation: "compose",
                needed: v,
                available: truncation,
            });
        }
        let mut out = Self::zero(truncation);
        for (k, c) in self.terms() {
            let gk = g_series.pow(k)?;
            out = out.add(&gk.scale(c).truncate(truncation));
        }
        Ok(out.truncate(truncation))
    }
}

/// `a₁t + a₂t² + … + O(t^N)` with `a₁ ≠ 0`: a coordinate change fixing the
/// base point of the disc.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DiscAuto {
    // coefficients[i] = a_{i+1}
    coefficients: Vec<Scalar>,
}

impl DiscAuto {
    /// `coefficients = [a₁, …, a_{N−1}]`, giving truncation order `N`.
    pub fn new(coefficients: Vec<Scalar>) -> Result<Self, SeriesError> {
        match coefficients.first() {
            None => Err(SeriesError::TruncationTooSmall(1)),
            Some(a1) if a1.is_zero() => Err(SeriesError::ZeroLinearCoefficient),
            Some(_) => Ok(Self { coefficients }),
        }
    }

    pub fn from_ints(coefficients: &[i64]) -> Result<Self, SeriesError> {
        Self::new(coefficients.iter().map(|&c| int(c)).collect())
    }

    pub fn identity(truncation: i64) -> Self {
        assert!(truncation >= 2);
        let mut c = vec![Scalar::zero(); (truncation - 1) as usize];
        c[0] = Scalar::one();
        Self { coefficients: c }
    }

    /// Reads a series `a₁t + …`; rejects a constant term or vanishing `a₁`.
    pub fn from_series(s: &TruncatedLaurent) -> Result<Self, SeriesError> {
        if s.truncation() < 2 {
            return Err(SeriesError::TruncationTooSmall(s.truncation()));
        }
        if s.min_exponent() < 1 {
            return Err(SeriesError::ZeroLinearCoefficient);
        }
        Self::new((1..s.truncation()).map(|k| s.coefficient(k)).collect())
    }

    pub fn truncation(&self) -> i64 {
        self.coefficients.len() as i64 + 1
    }

    /// `a_k` for `1 <= k < N`.
    pub fn coefficient(&self, k: usize) -> Scalar {
        self.coefficients
            .get(k.wrapping_sub(1))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.coefficients
    }

    pub fn as_series(&self) -> TruncatedLaurent {
        TruncatedLaurent::from_terms(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| (i as i64 + 1, c.clone())),
            self.truncation(),
        )
    }

    pub fn truncate(&self, truncation: i64) -> Self {
        let n = (truncation.min(self.truncation()) - 1).max(1) as usize;
        Self {
            coefficients: self.coefficients[..n].to_vec(),
        }
    }

    /// `self(g(t))` as an automorphism.
    pub fn compose(&self, g: &DiscAuto) -> DiscAuto {
        let s = self
            .as_series()
            .compose(g)
            .expect("power series composition with a disc automorphism is always defined");
        DiscAuto::from_series(&s).expect("composite of automorphisms has a unit linear term")
    }
}

/// Compositional inverse by a triangular coefficient solve.
pub fn invert_auto(g: &DiscAuto) -> DiscAuto {
    let n = g.truncation();
    let g_series = g.as_series();
    // powers[k] = g^k mod t^n, k = 1..n-1
    let mut powers = vec![TruncatedLaurent::zero(n)];
    for k in 1..n {
        let next = if k == 1 {
            g_series.clone()
        } else {
            powers[(k - 1) as usize].mul(&g_series).truncate(n)
        };
        powers.push(next);
    }
    let a1 = g.coefficient(1);
    let mut b = vec![a1.recip()];
    for m in 2..n {
        let mut acc = Scalar::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += bk * powers[k + 1].coefficient(m);
        }
        b.push(-acc / pow_scalar(&a1, m));
    }
    DiscAuto::new(b).expect("inverse has linear coefficient 1/a1")
}

/// Which standard differential a [`DiscForm`]'s series multiplies.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FormBasis {
    Dt,
    DtOverT,
}

/// A differential `s(t)·dt` or `s(t)·dt/t` on the punctured disc.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DiscForm {
    pub series: TruncatedLaurent,
    pub basis: FormBasis,
}

impl DiscForm {
    pub fn dt(series: TruncatedLaurent) -> Self {
        Self {
            series,
            basis: FormBasis::Dt,
        }
    }

    pub fn dt_over_t(series: TruncatedLaurent) -> Self {
        Self {
            series,
            basis: FormBasis::DtOverT,
        }
    }

    /// `E(t)·dt⁻¹/t⁻¹`, which equals `−E(t)·dt/t`.
    pub fn inverse_log(series: TruncatedLaurent) -> Self {
        Self::dt_over_t(series.scale(&-Scalar::one()))
    }

    /// Rewrites in the `dt` basis: `t^k dt/t = t^(k-1) dt`.
    pub fn to_dt(&self) -> DiscForm {
        match self.basis {
            FormBasis::Dt => self.clone(),
            FormBasis::DtOverT => DiscForm::dt(self.series.shift(-1)),
        }
    }

    pub fn truncation(&self) -> i64 {
        self.to_dt().series.truncation()
    }
}

pub fn residue(form: &DiscForm) -> Result<Scalar, SeriesError> {
    let s = form.to_dt().series;
    if s.truncation() <= -1 {
        return Err(SeriesError::InsufficientTruncation {
            operation: "residue",
            needed: -1,
            available: s.truncation(),
        });
    }
    Ok(s.coefficient(-1))
}

/// Chain rule: `s(t) dt ↦ s(g(t))·g′(t) dt`, returned in the `dt` basis.
pub fn pullback_form(form: &DiscForm, g: &DiscAuto) -> Result<DiscForm, SeriesError> {
    let s = form.to_dt().series;
    let composed = s.compose(g)?;
    let out = composed.mul(&g.as_series().derivative());
    Ok(DiscForm::dt(out))
}
