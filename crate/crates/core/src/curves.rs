//! The projective line and the nodal curve `xy = 0`, their punctures, global
//! log 1-forms, and restriction of forms to the punctured disc at each
//! puncture.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactalg::{binomial, format_scalar, int, pow_scalar, Scalar};
use crate::logmonoid::{nodal_presentation, LogDiffPresentation, RingElement, SupportedRing};
use crate::series::{DiscForm, TruncatedLaurent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("puncture {0} does not lie on this curve")]
    ForeignPuncture(String),
    #[error("form and curve disagree: {0}")]
    WrongFormKind(&'static str),
    #[error("truncation {truncation} leaves nothing of a form with leading exponent {valuation}")]
    TruncationTooSmall { truncation: i64, valuation: i64 },
    #[error("invalid puncture configuration: {0}")]
    BadPunctures(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CurveKind {
    ProjectiveLine,
    NodalPair,
}

impl CurveKind {
    pub fn id(&self) -> &'static str {
        match self {
            CurveKind::ProjectiveLine => "p1",
            CurveKind::NodalPair => "nodal",
        }
    }
}

/// How a disc form at a puncture is turned into a mode sum.
///
/// For a form `Σ c_m t^m dt` in the puncture coordinate:
/// - `Standard`: `Σ c_m v_{[m]}`.
/// - `Branch`: `Σ −c_m v_{[−m−2]}`, the residue taken in the inverted
///   coordinate `s = 1/t` (the nodal branch coordinate `x` or `y`).
/// - `Inversion`: `ϑ` applied to the `Branch` sum; used at `u = ∞` on the
///   projective line.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FiberFrame {
    Standard,
    Branch,
    Inversion,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum PunctureLocation {
    /// `u = ∞` on the projective line, coordinate `t = 1/u`.
    Infinity,
    /// `u = p`, coordinate `t = u − p`.
    Finite(Scalar),
    /// `(1,0,0)` on `xy = 0`, coordinate `t = 1/x` on the branch `y = 0`.
    NodalInfinity1,
    /// `(0,1,0)`, coordinate `t = 1/y` on the branch `x = 0`.
    NodalInfinity2,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Puncture {
    pub name: String,
    pub location: PunctureLocation,
    pub frame: FiberFrame,
}

impl Puncture {
    pub fn infinity() -> Self {
        Self {
            name: "inf".into(),
            location: PunctureLocation::Infinity,
            frame: FiberFrame::Inversion,
        }
    }

    pub fn finite(p: Scalar) -> Self {
        Self {
            name: format!("u={}", format_scalar(&p)),
            location: PunctureLocation::Finite(p),
            frame: FiberFrame::Standard,
        }
    }

    pub fn nodal_infinity(branch: u8) -> Self {
        let (name, location) = match branch {
            1 => ("inf1", PunctureLocation::NodalInfinity1),
            _ => ("inf2", PunctureLocation::NodalInfinity2),
        };
        Self {
            name: name.into(),
            location,
            frame: FiberFrame::Branch,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveModel {
    pub kind: CurveKind,
    pub punctures: Vec<Puncture>,
    pub presentation: Option<LogDiffPresentation>,
}

impl CurveModel {
    /// `xy = 0` punctured at both points at infinity.
    pub fn nodal() -> Self {
        Self::nodal_with(&[1, 2]).expect("both branches")
    }

    /// `xy = 0` punctured at a nonempty subset of `{∞₁, ∞₂}`.
    pub fn nodal_with(branches: &[u8]) -> Result<Self, CurveError> {
        let mut seen = Vec::new();
        for &b in branches {
            if !(b == 1 || b == 2) || seen.contains(&b) {
                return Err(CurveError::BadPunctures(format!("nodal branches must be distinct values in {{1, 2}}, got {branches:?}")));
            }
            seen.push(b);
        }
        if seen.is_empty() {
            return Err(CurveError::BadPunctures("at least one puncture is required".into()));
        }
        Ok(Self {
            kind: CurveKind::NodalPair,
            punctures: seen.into_iter().map(Puncture::nodal_infinity).collect(),
            presentation: Some(nodal_presentation()),
        })
    }

    /// The projective line punctured at `∞, 0, 1, 2, …` (`points` of them).
    pub fn projective_line(points: usize) -> Result<Self, CurveError> {
        if points == 0 {
            return Err(CurveError::BadPunctures("at least one puncture is required".into()));
        }
        let mut punctures = vec![Puncture::infinity()];
        punctures.extend((0..points as i64 - 1).map(|p| Puncture::finite(int(p))));
        Ok(Self {
            kind: CurveKind::ProjectiveLine,
            punctures,
            presentation: None,
        })
    }

    pub fn id(&self) -> &'static str {
        self.kind.id()
    }

    fn has(&self, loc: &PunctureLocation) -> bool {
        self.punctures.iter().any(|p| &p.location == loc)
    }
}

/// One term of a form on the projective line.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LineTerm {
    /// `u^k du`.
    Power(u32),
    /// `(u − p)^{−j} du`.
    Pole(Scalar, u32),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GlobalLogForm {
    /// `f·dx/x + g·dy/y` with `f, g ∈ ℚ[x,y]/(xy)`.
    Nodal { f: RingElement, g: RingElement },
    /// `h(u) du`.
    Line(BTreeMap<LineTerm, Scalar>),
}

impl GlobalLogForm {
    pub fn nodal(f: RingElement, g: RingElement) -> Self {
        let ring = SupportedRing::NodalQuotient;
        GlobalLogForm::Nodal {
            f: ring.normalize(&f),
            g: ring.normalize(&g),
        }
    }

    pub fn line_term(term: LineTerm) -> Self {
        GlobalLogForm::Line(BTreeMap::from([(term, int(1))]))
    }

    pub fn add(&self, other: &GlobalLogForm) -> Result<GlobalLogForm, CurveError> {
        match (self, other) {
            (GlobalLogForm::Nodal { f, g }, GlobalLogForm::Nodal { f: f2, g: g2 }) => {
                Ok(GlobalLogForm::nodal(f.add(f2), g.add(g2)))
            }
            (GlobalLogForm::Line(a), GlobalLogForm::Line(b)) => {
                let mut out = a.clone();
                for (k, c) in b {
                    let slot = out.entry(k.clone()).or_insert_with(Scalar::zero);
                    *slot += c;
                    if slot.is_zero() {
                        out.remove(k);
                    }
                }
                Ok(GlobalLogForm::Line(out))
            }
            _ => Err(CurveError::WrongFormKind("cannot add forms on different curves")),
        }
    }

    pub fn scale(&self, c: &Scalar) -> GlobalLogForm {
        match self {
            GlobalLogForm::Nodal { f, g } => GlobalLogForm::nodal(f.scale(c), g.scale(c)),
            GlobalLogForm::Line(h) => GlobalLogForm::Line(
                h.iter()
                    .filter(|_| !c.is_zero())
                    .map(|(k, x)| (k.clone(), x * c))
                    .collect(),
            ),
        }
    }

    /// For `h(u)·du` on the projective line, the form `h′(u)·du`. Together
    /// with `Tv ⊗ h du` it gives the total derivative `∇(v ⊗ h)` in the
    /// global coordinate `u`. The nodal curve has no global coordinate.
    pub fn coefficient_derivative(&self) -> Result<GlobalLogForm, CurveError> {
        match self {
            GlobalLogForm::Nodal { .. } => Err(CurveError::WrongFormKind("no global coordinate on the nodal curve")),
            GlobalLogForm::Line(h) => {
                let mut out = BTreeMap::new();
                for (term, c) in h {
                    match term {
                        LineTerm::Power(k) => {
                            if *k > 0 {
                                *out.entry(LineTerm::Power(k - 1)).or_insert_with(Scalar::zero) += c * int(*k as i64);
                            }
                        }
                        LineTerm::Pole(p, j) => {
                            *out.entry(LineTerm::Pole(p.clone(), j + 1)).or_insert_with(Scalar::zero) += c * int(-(*j as i64));
                        }
                    }
                }
                out.retain(|_, c: &mut Scalar| !c.is_zero());
                Ok(GlobalLogForm::Line(out))
            }
        }
    }
}

impl fmt::Display for GlobalLogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalLogForm::Nodal { f: a, g: b } => {
                let vars = SupportedRing::NodalQuotient.variables();
                write!(f, "({})dx/x + ({})dy/y", a.render(&vars), b.render(&vars))
            }
            GlobalLogForm::Line(h) => {
                if h.is_empty() {
                    return write!(f, "0");
                }
                let parts: Vec<String> = h
                    .iter()
                    .map(|(t, c)| {
                        let term = match t {
                            LineTerm::Power(0) => "du".to_string(),
                            LineTerm::Power(1) => "u du".to_string(),
                            LineTerm::Power(k) => format!("u^{k} du"),
                            LineTerm::Pole(p, j) if p.is_zero() => format!("u^-{j} du"),
                            LineTerm::Pole(p, j) => format!("(u-{})^-{j} du", format_scalar(p)),
                        };
                        if c.is_one() {
                            term
                        } else {
                            format!("{}*{term}", format_scalar(c))
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
        }
    }
}

/// Monomial forms spanning the global log 1-forms with the given bounds.
///
/// Nodal: `xⁱ dx/x` (`1 ≤ i ≤ max_deg`) when `∞₁` is punctured, `yʲ dy/y`
/// (`1 ≤ j ≤ max_deg`) when `∞₂` is, and `dx/x` when both are; the constant
/// in the `dy/y` slot is absorbed by `dx/x + dy/y = 0`.
/// Projective line: `uᵏ du` (`0 ≤ k ≤ max_deg`) and `(u−p)^{−j} du`
/// (`1 ≤ j ≤ max_pole`) for each finite puncture `p`.
pub fn global_form_basis(curve: &CurveModel, max_pole: u32, max_deg: u32) -> Vec<GlobalLogForm> {
    match curve.kind {
        CurveKind::NodalPair => {
            let ring = SupportedRing::NodalQuotient;
            let has1 = curve.has(&PunctureLocation::NodalInfinity1);
            let has2 = curve.has(&PunctureLocation::NodalInfinity2);
            let mut out = Vec::new();
            if has1 && has2 {
                out.push(GlobalLogForm::nodal(ring.one(), RingElement::zero()));
            }
            if has1 {
                for i in 1..=max_deg {
                    out.push(GlobalLogForm::nodal(RingElement::monomial(int(1), vec![i as i64, 0]), RingElement::zero()));
                }
            }
            if has2 {
                for j in 1..=max_deg {
                    out.push(GlobalLogForm::nodal(RingElement::zero(), RingElement::monomial(int(1), vec![0, j as i64])));
                }
            }
            out
        }
        CurveKind::ProjectiveLine => {
            let mut out: Vec<GlobalLogForm> = Vec::new();
            if curve.has(&PunctureLocation::Infinity) {
                out.extend((0..=max_deg).map(|k| GlobalLogForm::line_term(LineTerm::Power(k))));
            }
            for p in &curve.punctures {
                if let PunctureLocation::Finite(q) = &p.location {
                    out.extend((1..=max_pole).map(|j| GlobalLogForm::line_term(LineTerm::Pole(q.clone(), j))));
                }
            }
            out
        }
    }
}

/// `(1 − a·t)^{−j}` modulo `t^n`.
fn inverse_power_series(a: &Scalar, j: u32, n: i64) -> TruncatedLaurent {
    TruncatedLaurent::from_terms(
        (0..n.max(0)).map(|m| (m, binomial(j as i64 + m - 1, m) * pow_scalar(a, m))),
        n,
    )
}

/// Pulls a global form back to the punctured disc at `p` and returns it in
/// the `dt` basis, known modulo `t^truncation`.
pub fn restrict_to_disc(omega: &GlobalLogForm, p: &Puncture, truncation: i64) -> Result<DiscForm, CurveError> {
    let n = truncation;
    let series = match (omega, &p.location) {
        (GlobalLogForm::Nodal { f, g }, PunctureLocation::NodalInfinity1 | PunctureLocation::NodalInfinity2) => {
            // E(t) = f(t⁻¹,0) − g(t⁻¹,0) at ∞₁ and g(0,t⁻¹) − f(0,t⁻¹) at ∞₂;
            // the form is E·dt⁻¹/t⁻¹ = −E·dt/t = −t⁻¹E·dt.
            let (own, other, var) = match p.location {
                PunctureLocation::NodalInfinity1 => (f, g, 0),
                _ => (g, f, 1),
            };
            let mut e = BTreeMap::<i64, Scalar>::new();
            for (src, sgn) in [(own, int(1)), (other, int(-1))] {
                for (k, c) in src.terms() {
                    if k[1 - var] != 0 {
                        continue;
                    }
                    *e.entry(-k[var]).or_insert_with(Scalar::zero) += c * &sgn;
                }
            }
            let valuation = e.iter().filter(|(_, c)| !c.is_zero()).map(|(k, _)| k - 1).min();
            if let Some(v) = valuation {
                if n <= v {
                    return Err(CurveError::TruncationTooSmall { truncation: n, valuation: v });
                }
            }
            TruncatedLaurent::from_terms(e.into_iter().map(|(k, c)| (k - 1, -c)), n)
        }
        (GlobalLogForm::Line(h), PunctureLocation::Infinity) => {
            // t = 1/u, du = −t⁻² dt.
            let mut out = TruncatedLaurent::zero(n);
            for (term, c) in h {
                let piece = match term {
                    LineTerm::Power(k) => TruncatedLaurent::monomial(-c.clone(), -(*k as i64) - 2, n),
                    LineTerm::Pole(q, j) => {
                        // (1/t − q)^{−j} = t^j (1 − qt)^{−j}
                        let shift = *j as i64 - 2;
                        inverse_power_series(q, *j, n - shift).shift(shift).scale(&-c.clone())
                    }
                };
                out = out.add(&piece);
            }
            check_valuation(&out, n)?;
            out
        }
        (GlobalLogForm::Line(h), PunctureLocation::Finite(q)) => {
            // t = u − q.
            let mut out = TruncatedLaurent::zero(n);
            for (term, c) in h {
                let piece = match term {
                    LineTerm::Power(k) => TruncatedLaurent::from_terms(
                        (0..=*k as i64).map(|i| (i, binomial(*k as i64, i) * pow_scalar(q, *k as i64 - i) * c)),
                        n,
                    ),
                    LineTerm::Pole(p0, j) if p0 == q => TruncatedLaurent::monomial(c.clone(), -(*j as i64), n),
                    LineTerm::Pole(p0, j) => {
                        // (t + q − p)^{−j} = (q−p)^{−j} (1 − at)^{−j} with a = −1/(q−p)
                        let d = q - p0;
                        let a = -d.recip();
                        inverse_power_series(&a, *j, n).scale(&(pow_scalar(&d, -(*j as i64)) * c))
                    }
                };
                out = out.add(&piece);
            }
            check_valuation(&out, n)?;
            out
        }
        _ => return Err(CurveError::ForeignPuncture(p.name.clone())),
    };
    Ok(DiscForm::dt(series))
}

fn check_valuation(s: &TruncatedLaurent, n: i64) -> Result<(), CurveError> {
    if !s.is_zero() && s.min_exponent() >= n {
        return Err(CurveError::TruncationTooSmall {
            truncation: n,
            valuation: s.min_exponent(),
        });
    }
    Ok(())
}
