//! Free commutative monoids, charts into the supported rings, and the
//! presentation of log differentials `(O ⊗ M^gp) / (R₁ + R₂)` for the curve
//! families used here.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactalg::{format_scalar, int, Scalar, SparseVector, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogError {
    #[error("unsupported chart family: {0}")]
    UnsupportedFamily(String),
    #[error("monoid rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("ring element has {found} exponents, ring has {expected} variables")]
    ArityMismatch { expected: usize, found: usize },
}

/// The monoid `ℕ^rank`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FreeMonoid {
    pub rank: usize,
}

impl FreeMonoid {
    pub fn new(rank: usize) -> Self {
        Self { rank }
    }

    /// Rank of the associated lattice `ℤ^rank`.
    pub fn groupify(&self) -> usize {
        self.rank
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    /// `m + m1 = m + m2` implies `m1 = m2`.
    pub fn cancels(&self, m: &[u64], m1: &[u64], m2: &[u64]) -> bool {
        self.add(m, m1) != self.add(m, m2) || m1 == m2
    }

    /// If `n·g` lies in the monoid then so does `g`.
    pub fn saturated_at(&self, g: &[i64], n: u64) -> bool {
        let scaled_in = n > 0 && g.iter().all(|&x| x * n as i64 >= 0);
        !scaled_in || g.iter().all(|&x| x >= 0)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FsReport {
    pub rank: usize,
    pub integral: bool,
    pub saturated: bool,
    pub cancellation_triples_checked: usize,
    pub saturation_points_checked: usize,
    pub witnesses: Vec<String>,
}

/// Samples cancellation triples and lattice points; free monoids pass both.
pub fn integrality_saturation_report(m: &FreeMonoid, samples: usize, seed: u64) -> FsReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses = Vec::new();
    let mut integral = true;
    let mut saturated = true;
    for _ in 0..samples {
        let pick = |rng: &mut ChaCha8Rng| (0..m.rank).map(|_| rng.gen_range(0..6)).collect::<Vec<u64>>();
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        let c = if rng.gen_bool(0.5) { b.clone() } else { pick(&mut rng) };
        if !m.cancels(&a, &b, &c) {
            integral = false;
            witnesses.push(format!("cancellation fails for {a:?}, {b:?}, {c:?}"));
        }
        let g: Vec<i64> = (0..m.rank).map(|_| rng.gen_range(-4..5)).collect();
        let n = rng.gen_range(1..5);
        if !m.saturated_at(&g, n) {
            saturated = false;
            witnesses.push(format!("saturation fails for {g:?} with n = {n}"));
        }
    }
    FsReport {
        rank: m.rank,
        integral,
        saturated,
        cancellation_triples_checked: samples,
        saturation_points_checked: samples,
        witnesses,
    }
}

/// A monoid map `ℕ^source → ℕ^target` given by a `target × source` matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MonoidHom {
    source: usize,
    target: usize,
    matrix: Vec<Vec<u64>>,
}

impl MonoidHom {
    pub fn new(source: usize, target: usize, matrix: Vec<Vec<u64>>) -> Result<Self, LogError> {
        if matrix.len() != target {
            return Err(LogError::RankMismatch {
                expected: target,
                found: matrix.len(),
            });
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != source) {
            return Err(LogError::RankMismatch {
                expected: source,
                found: row.len(),
            });
        }
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    pub fn identity(rank: usize) -> Self {
        let matrix = (0..rank)
            .map(|i| (0..rank).map(|j| u64::from(i == j)).collect())
            .collect();
        Self {
            source: rank,
            target: rank,
            matrix,
        }
    }

    pub fn source_rank(&self) -> usize {
        self.source
    }

    pub fn target_rank(&self) -> usize {
        self.target
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    pub fn apply(&self, m: &[u64]) -> Vec<u64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(m).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MonoidHom) -> Result<MonoidHom, LogError> {
        if inner.target != self.source {
            return Err(LogError::RankMismatch {
                expected: self.source,
                found: inner.target,
            });
        }
        let matrix = (0..self.target)
            .map(|i| {
                (0..inner.source)
                    .map(|j| (0..self.source).map(|k| self.matrix[i][k] * inner.matrix[k][j]).sum())
                    .collect()
            })
            .collect();
        Ok(MonoidHom {
            source: inner.source,
            target: self.target,
            matrix,
        })
    }

    /// For free monoids the map is an isomorphism exactly when the matrix is
    /// a permutation matrix.
    pub fn is_strict(&self) -> bool {
        self.source == self.target
            && self.matrix.iter().all(|r| r.iter().filter(|&&x| x != 0).count() == 1 && r.contains(&1))
            && (0..self.source).all(|j| self.matrix.iter().filter(|r| r[j] != 0).count() == 1)
    }
}

/// The rings charts land in. Elements are sparse maps from exponent tuples
/// (one entry per variable) to scalars.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SupportedRing {
    /// `ℚ[vars]`; with no variables this is the ground field.
    Polynomial(Vec<String>),
    /// `ℚ[x, y] / (xy)`.
    NodalQuotient,
    LaurentPolynomial(String),
    TruncatedPowerSeries(String, i64),
}

impl SupportedRing {
    pub fn ground_field() -> Self {
        SupportedRing::Polynomial(Vec::new())
    }

    pub fn variables(&self) -> Vec<String> {
        match self {
            SupportedRing::Polynomial(vars) => vars.clone(),
            SupportedRing::NodalQuotient => vec!["x".into(), "y".into()],
            SupportedRing::LaurentPolynomial(v) | SupportedRing::TruncatedPowerSeries(v, _) => {
                vec![v.clone()]
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.variables().len()
    }

    fn keeps(&self, exps: &[i64]) -> bool {
        match self {
            SupportedRing::NodalQuotient => !(exps[0] > 0 && exps[1] > 0),
            SupportedRing::TruncatedPowerSeries(_, n) => exps[0] < *n,
            _ => true,
        }
    }

    /// Normal form: drops monomials that vanish in the ring.
    pub fn normalize(&self, e: &RingElement) -> RingElement {
        RingElement {
            terms: e
                .terms
                .iter()
                .filter(|(k, c)| !c.is_zero() && self.keeps(k))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn one(&self) -> RingElement {
        RingElement::monomial(int(1), vec![0; self.arity()])
    }

    pub fn variable(&self, i: usize) -> RingElement {
        let mut e = vec![0; self.arity()];
        e[i] = 1;
        RingElement::monomial(int(1), e)
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let mut out = RingElement::zero();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if self.keeps(&e) {
                    out.add_term(e, &(ca * cb));
                }
            }
        }
        out
    }

    /// `a^n` with `a^0 = 1`, so `0^0 = 1` and `0^n = 0` for `n > 0`.
    pub fn pow(&self, a: &RingElement, n: u64) -> RingElement {
        (0..n).fold(self.one(), |acc, _| self.mul(&acc, a))
    }

    fn monomials_up_to(&self, degree: i64) -> Vec<Vec<i64>> {
        match self {
            SupportedRing::NodalQuotient => {
                let mut out = vec![vec![0, 0]];
                for i in 1..=degree {
                    out.push(vec![i, 0]);
                    out.push(vec![0, i]);
                }
                out
            }
            SupportedRing::TruncatedPowerSeries(_, n) => (0..degree.min(n - 1) + 1).map(|i| vec![i]).collect(),
            SupportedRing::LaurentPolynomial(_) => (-degree..=degree).map(|i| vec![i]).collect(),
            SupportedRing::Polynomial(vars) => {
                let mut out: Vec<Vec<i64>> = vec![vec![]];
                for _ in vars {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            (0..=degree).map(move |i| {
                                let mut q = p.clone();
                                q.push(i);
                                q
                            })
                        })
                        .collect();
                }
                out.retain(|p| p.iter().sum::<i64>() <= degree);
                out
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct RingElement {
    terms: BTreeMap<Vec<i64>, Scalar>,
}

impl RingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Scalar, arity: usize) -> Self {
        Self::monomial(c, vec![0; arity])
    }

    pub fn monomial(c: Scalar, exponents: Vec<i64>) -> Self {
        let mut e = Self::zero();
        e.add_term(exponents, &c);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<i64>, Scalar)>) -> Self {
        let mut e = Self::zero();
        for (k, c) in terms {
            e.add_term(k, &c);
        }
        e
    }

    pub fn add_term(&mut self, exponents: Vec<i64>, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exponents.clone()).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&exponents);
        }
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> RingElement {
        RingElement::from_terms(self.terms.iter().map(|(k, x)| (k.clone(), x * c)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[i64]) -> Scalar {
        self.terms.get(exponents).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Scalar)> {
        self.terms.iter()
    }

    /// Constant term, when the element is a constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (k, c) = self.terms.iter().next()?;
                k.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Total degree (sum of absolute exponents) of the largest monomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|k| k.iter().map(|e| e.abs()).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn render(&self, vars: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(k, c)| {
                let mono: Vec<String> = k
                    .iter()
                    .zip(vars)
                    .filter(|(e, _)| **e != 0)
                    .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                    .collect();
                match (mono.is_empty(), c.is_one()) {
                    (true, _) => format_scalar(c),
                    (false, true) => mono.join("*"),
                    (false, false) => format!("{}*{}", format_scalar(c), mono.join("*")),
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// A chart `ℕ^k → ring`, `e_i ↦ generator_images[i]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chart {
    pub source: FreeMonoid,
    pub ring: SupportedRing,
    pub generator_images: Vec<RingElement>,
}

impl Chart {
    pub fn new(ring: SupportedRing, generator_images: Vec<RingElement>) -> Self {
        let generator_images = generator_images.iter().map(|g| ring.normalize(g)).collect::<Vec<_>>();
        Self {
            source: FreeMonoid::new(generator_images.len()),
            ring,
            generator_images,
        }
    }

    /// `ℕ² → ℚ[x,y]/(xy)`, `(m, n) ↦ xᵐyⁿ`.
    pub fn nodal() -> Self {
        let ring = SupportedRing::NodalQuotient;
        let images = vec![ring.variable(0), ring.variable(1)];
        Self::new(ring, images)
    }

    /// The log point `ℕ → ℚ`, `n ↦ 0ⁿ`.
    pub fn log_point() -> Self {
        Self::new(SupportedRing::ground_field(), vec![RingElement::zero()])
    }

    /// `ℕ → ℚ[x]`, `1 ↦ x`.
    pub fn smooth_patch() -> Self {
        let ring = SupportedRing::Polynomial(vec!["x".into()]);
        let images = vec![ring.variable(0)];
        Self::new(ring, images)
    }

    /// Empty chart on the affine line: trivial log structure.
    pub fn trivial(var: &str) -> Self {
        Self::new(SupportedRing::Polynomial(vec![var.into()]), Vec::new())
    }

    /// Empty chart on the ground field.
    pub fn trivial_point() -> Self {
        Self::new(SupportedRing::ground_field(), Vec::new())
    }

    /// `ℕ → ℚ[[t]]/(t^N)`, `n ↦ tⁿ`.
    pub fn disc(truncation: i64) -> Self {
        let ring = SupportedRing::TruncatedPowerSeries("t".into(), truncation);
        let images = vec![ring.variable(0)];
        Self::new(ring, images)
    }

    pub fn image(&self, m: &[u64]) -> Result<RingElement, LogError> {
        if m.len() != self.source.rank {
            return Err(LogError::RankMismatch {
                expected: self.source.rank,
                found: m.len(),
            });
        }
        Ok(m.iter()
            .zip(&self.generator_images)
            .fold(self.ring.one(), |acc, (&e, g)| self.ring.mul(&acc, &self.ring.pow(g, e))))
    }

    /// Checks `α(a + b) = α(a)·α(b)` on `samples` random pairs.
    pub fn check_multiplicativity(&self, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).all(|_| {
            let a: Vec<u64> = (0..self.source.rank).map(|_| rng.gen_range(0..5)).collect();
            let b: Vec<u64> = (0..self.source.rank).map(|_| rng.gen_range(0..5)).collect();
            let lhs = self.image(&self.source.add(&a, &b)).unwrap();
            let rhs = self.ring.mul(&self.image(&a).unwrap(), &self.image(&b).unwrap());
            lhs == rhs
        })
    }

    fn generator_label(&self, i: usize) -> String {
        let vars = self.ring.variables();
        let g = self.generator_images[i].render(&vars);
        format!("d{g}/{g}")
    }
}

/// An element of the free module on the chart generators: one ring
/// coefficient per `d(e_i)`.
pub type ModuleElement = Vec<RingElement>;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CurveFamily {
    Nodal,
    SmoothPatch,
    Trivial,
    Disc,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LogDiffPresentation {
    pub family: CurveFamily,
    pub ring: SupportedRing,
    /// `d(e_i)` labels, one per chart generator.
    pub generators: Vec<String>,
    /// Differentials of ring coordinates not reached through the chart.
    pub classical_generators: Vec<String>,
    pub relations: Vec<ModuleElement>,
    pub curve_chart: Chart,
    pub base_chart: Chart,
    pub base_relation_source: MonoidHom,
}

fn classify(curve: &Chart, base: &Chart, hom: &MonoidHom) -> Option<CurveFamily> {
    let ring = &curve.ring;
    let same_gens = |r: &SupportedRing| {
        curve.generator_images.len() == r.arity()
            && (0..r.arity()).all(|i| curve.generator_images[i] == r.variable(i))
    };
    let log_point_base = base.ring == SupportedRing::ground_field()
        && base.generator_images.len() == 1
        && base.generator_images[0].is_zero();
    let trivial_base = base.generator_images.is_empty();
    match ring {
        SupportedRing::NodalQuotient
            if same_gens(ring) && log_point_base && hom.matrix() == [vec![1], vec![1]] =>
        {
            Some(CurveFamily::Nodal)
        }
        SupportedRing::Polynomial(v) if v.len() == 1 && same_gens(ring) && trivial_base => {
            Some(CurveFamily::SmoothPatch)
        }
        SupportedRing::Polynomial(_) if curve.generator_images.is_empty() && trivial_base => {
            Some(CurveFamily::Trivial)
        }
        SupportedRing::TruncatedPowerSeries(..)
            if same_gens(ring) && log_point_base && hom.matrix() == [vec![0]] =>
        {
            Some(CurveFamily::Disc)
        }
        _ => None,
    }
}

/// Builds the generator/relation presentation of `Ω¹` for a supported
/// chart family. Relations are the images of the base chart generators
/// under the structure map; at the chart level `R₁` contributes nothing on
/// these families, which [`relation_membership_check`] confirms by sampling.
pub fn kato_presentation(
    curve_chart: &Chart,
    base_chart: &Chart,
    structure_hom: &MonoidHom,
) -> Result<LogDiffPresentation, LogError> {
    if structure_hom.source_rank() != base_chart.source.rank {
        return Err(LogError::RankMismatch {
            expected: base_chart.source.rank,
            found: structure_hom.source_rank(),
        });
    }
    if structure_hom.target_rank() != curve_chart.source.rank {
        return Err(LogError::RankMismatch {
            expected: curve_chart.source.rank,
            found: structure_hom.target_rank(),
        });
    }
    let family = classify(curve_chart, base_chart, structure_hom).ok_or_else(|| {
        LogError::UnsupportedFamily(
            "expected one of: nodal xy=0 over the log point, smooth patch 1↦x, trivial log structure, disc over the log point"
                .into(),
        )
    })?;
    let ring = curve_chart.ring.clone();
    let arity = ring.arity();
    let generators = (0..curve_chart.source.rank)
        .map(|i| curve_chart.generator_label(i))
        .collect();
    let classical_generators = match family {
        CurveFamily::Trivial => ring.variables().iter().map(|v| format!("d{v}")).collect(),
        _ => Vec::new(),
    };
    let relations = (0..base_chart.source.rank)
        .map(|j| {
            let mut e = vec![0; base_chart.source.rank];
            e[j] = 1;
            structure_hom
                .apply(&e)
                .iter()
                .map(|&c| RingElement::constant(int(c as i64), arity))
                .collect::<ModuleElement>()
        })
        .filter(|r| r.iter().any(|c| !c.is_zero()))
        .collect();
    Ok(LogDiffPresentation {
        family,
        ring,
        generators,
        classical_generators,
        relations,
        curve_chart: curve_chart.clone(),
        base_chart: base_chart.clone(),
        base_relation_source: structure_hom.clone(),
    })
}

/// Nodal family over the log point with structure map `n ↦ (n, n)`.
pub fn nodal_presentation() -> LogDiffPresentation {
    let hom = MonoidHom::new(1, 2, vec![vec![1], vec![1]]).expect("2x1 matrix");
    kato_presentation(&Chart::nodal(), &Chart::log_point(), &hom).expect("nodal family is supported")
}

impl LogDiffPresentation {
    fn flatten(&self, element: &ModuleElement, monomials: &[Vec<i64>]) -> SparseVector {
        let index: BTreeMap<&Vec<i64>, usize> = monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let width = monomials.len();
        let mut v = SparseVector::zero(width * element.len());
        for (g, coeff) in element.iter().enumerate() {
            for (m, c) in coeff.terms() {
                let i = index[m];
                v.add_to(g * width + i, c);
            }
        }
        v
    }

    /// `true` when `target` lies in the ring span of `generators`, checked
    /// over monomial multiples up to `degree`.
    fn in_ring_span(&self, generators: &[ModuleElement], target: &ModuleElement, degree: i64) -> bool {
        let monomials = self.ring.monomials_up_to(degree);
        let mut span = Subspace::new(monomials.len() * self.generators.len());
        for g in generators {
            for m in &monomials {
                let shift = RingElement::monomial(int(1), m.clone());
                let prod: ModuleElement = g.iter().map(|c| self.ring.mul(&shift, c)).collect();
                let deg = prod.iter().map(RingElement::degree).max().unwrap_or(0);
                if deg <= degree {
                    span.insert(&self.flatten(&prod, &monomials)).expect("consistent width");
                }
            }
        }
        span.contains(&self.flatten(target, &monomials)).expect("consistent width")
    }

    fn random_ring_element(&self, rng: &mut ChaCha8Rng) -> RingElement {
        let monomials = self.ring.monomials_up_to(2);
        let mut e = RingElement::zero();
        for m in monomials {
            if rng.gen_bool(0.4) {
                e.add_term(m, &int(rng.gen_range(-3..4)));
            }
        }
        self.ring.normalize(&e)
    }

    /// Random `R₁ + R₂` elements, always including the unit multiples of
    /// the base generator images.
    pub fn sample_relations(&self, count: usize, seed: u64) -> Vec<ModuleElement> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.curve_chart.source.rank;
        let base_rank = self.base_chart.source.rank;
        let arity = self.ring.arity();
        let mut out = Vec::new();
        for j in 0..base_rank {
            let mut e = vec![0; base_rank];
            e[j] = 1;
            let img = self.base_relation_source.apply(&e);
            out.push(img.iter().map(|&c| RingElement::constant(int(c as i64), arity)).collect());
        }
        for _ in 0..count {
            // R₂: r ⊗ f(n)
            if base_rank > 0 {
                let r = self.random_ring_element(&mut rng);
                let n: Vec<u64> = (0..base_rank).map(|_| rng.gen_range(0..4)).collect();
                let img = self.base_relation_source.apply(&n);
                out.push(img.iter().map(|&c| r.scale(&int(c as i64))).collect());
            }
            // R₁: Σα(mᵢ)⊗mᵢ − Σα(mᵢ')⊗mᵢ' with equal α-sums. The primed
            // multiset permutes the first and swaps elements for others with
            // the same image under α.
            let size = rng.gen_range(1..4);
            let first: Vec<Vec<u64>> = (0..size)
                .map(|_| (0..k).map(|_| rng.gen_range(0..4)).collect())
                .collect();
            let mut second = first.clone();
            second.reverse();
            for m in second.iter_mut() {
                let alpha = self.curve_chart.image(m).unwrap();
                let candidate: Vec<u64> = m.iter().map(|&x| x + rng.gen_range(0..2)).collect();
                if self.curve_chart.image(&candidate).unwrap() == alpha {
                    *m = candidate;
                }
            }
            let side = |ms: &[Vec<u64>]| {
                let mut acc: ModuleElement = vec![RingElement::zero(); k];
                for m in ms {
                    let alpha = self.curve_chart.image(m).unwrap();
                    for (g, &mult) in m.iter().enumerate() {
                        acc[g] = acc[g].add(&alpha.scale(&int(mult as i64)));
                    }
                }
                acc
            };
            let lhs = side(&first);
            let rhs = side(&second);
            out.push(
                lhs.iter()
                    .zip(&rhs)
                    .map(|(a, b)| self.ring.normalize(&a.add(&b.scale(&-Scalar::one()))))
                    .collect(),
            );
        }
        out
    }

    /// Rewrites `element` modulo relations whose coefficient on some
    /// generator is a nonzero constant, eliminating that generator.
    pub fn reduce(&self, element: &ModuleElement) -> ModuleElement {
        let mut out = element.clone();
        for rel in &self.relations {
            let Some((pivot, c)) = rel
                .iter()
                .enumerate()
                .rev()
                .find_map(|(i, r)| r.as_constant().filter(|c| !c.is_zero()).map(|c| (i, c)))
            else {
                continue;
            };
            let factor = out[pivot].scale(&c.recip());
            for (slot, r) in out.iter_mut().zip(rel) {
                *slot = self.ring.normalize(&slot.add(&self.ring.mul(&factor, r).scale(&-Scalar::one())));
            }
        }
        out
    }
}

/// Checks listed relations against sampled `R₁ + R₂` elements in both
/// directions.
pub fn relation_membership_check(p: &LogDiffPresentation, sample_count: usize) -> bool {
    relation_membership_check_seeded(p, sample_count, 0x5eed)
}

pub fn relation_membership_check_seeded(p: &LogDiffPresentation, sample_count: usize, seed: u64) -> bool {
    let samples = p.sample_relations(sample_count, seed);
    let degree = samples
        .iter()
        .chain(&p.relations)
        .flat_map(|e| e.iter().map(RingElement::degree))
        .max()
        .unwrap_or(0)
        + 1;
    let listed_generated = p.relations.iter().all(|r| p.in_ring_span(&samples, r, degree));
    let samples_reduce = samples.iter().all(|s| p.in_ring_span(&p.relations, s, degree));
    listed_generated && samples_reduce
}

impl fmt::Display for LogDiffPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = self.ring.variables();
        writeln!(f, "family: {:?}", self.family)?;
        let ring = match &self.ring {
            SupportedRing::NodalQuotient => "Q[x,y]/(xy)".to_string(),
            SupportedRing::Polynomial(v) if v.is_empty() => "Q".to_string(),
            SupportedRing::Polynomial(v) => format!("Q[{}]", v.join(",")),
            SupportedRing::LaurentPolynomial(v) => format!("Q[{v},{v}^-1]"),
            SupportedRing::TruncatedPowerSeries(v, n) => format!("Q[[{v}]]/({v}^{n})"),
        };
        writeln!(f, "ring: {ring}")?;
        let mut gens: Vec<String> = self.generators.clone();
        gens.extend(self.classical_generators.iter().cloned());
        writeln!(f, "generators: {}", if gens.is_empty() { "(none)".into() } else { gens.join(", ") })?;
        if self.relations.is_empty() {
            writeln!(f, "relations: (none)")?;
        } else {
            writeln!(f, "relations:")?;
            for rel in &self.relations {
                let terms: Vec<String> = rel
                    .iter()
                    .zip(&self.generators)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, g)| match c.as_constant() {
                        Some(k) if k.is_one() => g.clone(),
                        _ => format!("({})*{g}", c.render(&vars)),
                    })
                    .collect();
                writeln!(f, "  {} = 0", terms.join(" + "))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groupify_ranks() {
        assert_eq!(FreeMonoid::new(1).groupify(), 1);
        assert_eq!(FreeMonoid::new(2).groupify(), 2);
        assert_eq!(FreeMonoid::new(0).groupify(), 0);
    }

    #[test]
    fn free_monoids_are_fs() {
        for rank in [1, 2] {
            let r = integrality_saturation_report(&FreeMonoid::new(rank), 200, 7);
            assert!(r.integral && r.saturated, "{r:?}");
            assert!(r.witnesses.is_empty());
        }
        let m = FreeMonoid::new(2);
        assert!(m.cancels(&[1, 2], &[0, 3], &[0, 3]));
    }

    #[test]
    fn nodal_presentation_has_one_relation() {
        let p = nodal_presentation();
        assert_eq!(p.generators, vec!["dx/x", "dy/y"]);
        assert_eq!(p.relations.len(), 1);
        let rel = &p.relations[0];
        assert_eq!(rel[0].as_constant(), Some(int(1)));
        assert_eq!(rel[1].as_constant(), Some(int(1)));
        assert!(relation_membership_check(&p, 40));
        let text = p.to_string();
        assert!(text.contains("dx/x + dy/y = 0"), "{text}");
    }

    #[test]
    fn emptied_or_spurious_relations_fail() {
        let mut p = nodal_presentation();
        p.relations.clear();
        assert!(!relation_membership_check(&p, 20));

        let mut p = nodal_presentation();
        let arity = p.ring.arity();
        p.relations
            .push(vec![RingElement::constant(int(1), arity), RingElement::zero()]);
        assert!(!relation_membership_check(&p, 20));
    }

    #[test]
    fn trivial_log_structure_is_classical() {
        let hom = MonoidHom::new(0, 0, vec![]).unwrap();
        let p = kato_presentation(&Chart::trivial("u"), &Chart::trivial_point(), &hom).unwrap();
        assert_eq!(p.family, CurveFamily::Trivial);
        assert!(p.generators.is_empty());
        assert_eq!(p.classical_generators, vec!["du"]);
        assert!(p.relations.is_empty());
        assert!(relation_membership_check(&p, 10));
    }

    #[test]
    fn disc_family_has_no_relation() {
        let hom = MonoidHom::new(1, 1, vec![vec![0]]).unwrap();
        let p = kato_presentation(&Chart::disc(6), &Chart::log_point(), &hom).unwrap();
        assert_eq!(p.generators, vec!["dt/t"]);
        assert!(p.relations.is_empty());
        assert!(relation_membership_check(&p, 30));
    }

    #[test]
    fn smooth_patch() {
        let hom = MonoidHom::new(0, 1, vec![vec![]]).unwrap();
        let p = kato_presentation(&Chart::smooth_patch(), &Chart::trivial_point(), &hom).unwrap();
        assert_eq!(p.generators, vec!["dx/x"]);
        assert!(p.relations.is_empty());
    }

    #[test]
    fn unsupported_family_rejected() {
        let hom = MonoidHom::new(1, 2, vec![vec![2], vec![1]]).unwrap();
        let err = kato_presentation(&Chart::nodal(), &Chart::log_point(), &hom).unwrap_err();
        assert!(matches!(err, LogError::UnsupportedFamily(_)));
        let bad = MonoidHom::new(1, 1, vec![vec![1]]).unwrap();
        assert!(matches!(
            kato_presentation(&Chart::nodal(), &Chart::log_point(), &bad),
            Err(LogError::RankMismatch { .. })
        ));
    }

    #[test]
    fn charts_are_multiplicative() {
        for chart in [Chart::nodal(), Chart::log_point(), Chart::smooth_patch(), Chart::disc(7)] {
            assert!(chart.check_multiplicativity(100, 3));
        }
        let lp = Chart::log_point();
        assert_eq!(lp.image(&[0]).unwrap(), SupportedRing::ground_field().one());
        assert!(lp.image(&[2]).unwrap().is_zero());
        assert!(Chart::nodal().image(&[1, 1]).unwrap().is_zero());
    }

    #[test]
    fn strictness_is_permutation() {
        assert!(MonoidHom::identity(2).is_strict());
        assert!(MonoidHom::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap().is_strict());
        assert!(!MonoidHom::new(1, 2, vec![vec![1], vec![1]]).unwrap().is_strict());
        assert!(!MonoidHom::new(2, 2, vec![vec![2, 0], vec![0, 1]]).unwrap().is_strict());
    }

    #[test]
    fn nodal_reduction_normal_form() {
        let p = nodal_presentation();
        let ring = &p.ring;
        let f = ring.one().add(&ring.variable(0));
        let g = RingElement::constant(int(2), 2).add(&ring.variable(1));
        let reduced = p.reduce(&vec![f.clone(), g.clone()]);
        assert!(reduced[1].is_zero());
        assert_eq!(reduced[0], f.add(&g.scale(&int(-1))));
        assert_eq!(p.reduce(&reduced), reduced);
    }
}
