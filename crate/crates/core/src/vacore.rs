//! Truncated conformal vertex algebras: the Heisenberg Fock space and the
//! universal Virasoro vacuum module, with exact mode matrices.
//!
//! Basis vectors are partitions. For Heisenberg, `λ = (λ₁ ≥ … ≥ λₖ ≥ 1)`
//! stands for `b_{−λ₁}⋯b_{−λₖ}|0⟩`; for Virasoro, parts are `≥ 2` and `λ`
//! stands for `L_{−λ₁}⋯L_{−λₖ}|0⟩`.
//!
//! Modes use the `(n)`-product indexing, `Y(A,z) = Σ A_{(n)} z^{−n−1}`, so
//! `ω_{(n)} = L_{n−1}`. Modes of composite vectors are built recursively
//! from the generator field and memoized per `(vector, n, source degree)`.
//! Intermediate degrees may exceed the truncation; only the public entry
//! points enforce the window.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactalg::{binomial, factorial, format_scalar, int, sign, Scalar, SparseMatrix, SparseVector, Subspace};

pub type Partition = Vec<u32>;

/// Vectors of unbounded degree keyed by basis partition.
type State = BTreeMap<Partition, Scalar>;

/// A vector with components in several degrees.
pub type GradedVec = BTreeMap<usize, SparseVector>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VaError {
    #[error("{operation}: degree {degree} lies outside the truncation window [0, {truncation}]")]
    Window {
        operation: String,
        degree: i64,
        truncation: usize,
    },
    #[error("vector length {found} does not match dim V_{degree} = {expected}")]
    BadVector {
        degree: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum VaKind {
    Heisenberg,
    Virasoro(Scalar),
}

impl fmt::Display for VaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VaKind::Heisenberg => write!(f, "heisenberg"),
            VaKind::Virasoro(c) => write!(f, "virasoro(c={})", format_scalar(c)),
        }
    }
}

pub fn partition_degree(p: &[u32]) -> usize {
    p.iter().map(|&x| x as usize).sum()
}

/// Partitions of `d` with all parts `≥ min_part`, largest first part first.
pub fn partitions(d: usize, min_part: u32) -> Vec<Partition> {
    fn go(rest: u32, max: u32, min: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        let top = max.min(rest);
        for part in (min..=top).rev() {
            prefix.push(part);
            go(rest - part, part, min, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(d as u32, d as u32, min_part.max(1), &mut Vec::new(), &mut out);
    out
}

/// The basis of one graded piece.
#[derive(Debug)]
pub struct DegreeBasis {
    pub degree: usize,
    parts: Vec<Partition>,
    index: HashMap<Partition, usize>,
}

impl DegreeBasis {
    fn new(degree: usize, min_part: u32) -> Self {
        let parts = partitions(degree, min_part);
        let index = parts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Self { degree, parts, index }
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn partition(&self, i: usize) -> &Partition {
        &self.parts[i]
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.parts
    }

    pub fn index_of(&self, p: &[u32]) -> Option<usize> {
        self.index.get(p).copied()
    }
}

/// A homogeneous vector: coordinates in the partition basis of `V_degree`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomVec {
    pub degree: usize,
    pub coords: SparseVector,
}

impl HomVec {
    pub fn new(degree: usize, coords: SparseVector) -> Self {
        Self { degree, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }
}

/// A finite sum `Σ c·A_{[n]}` with `A` a basis partition.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct LieElement {
    terms: BTreeMap<(Partition, i64), Scalar>,
}

impl LieElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn mode(a: Partition, n: i64) -> Self {
        let mut x = Self::zero();
        x.add_term(a, n, &int(1));
        x
    }

    pub fn add_term(&mut self, a: Partition, n: i64, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let key = (a, n);
        let slot = self.terms.entry(key.clone()).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        let mut out = self.clone();
        for ((a, n), c) in &other.terms {
            out.add_term(a.clone(), *n, c);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> LieElement {
        let mut out = LieElement::zero();
        for ((a, n), x) in &self.terms {
            out.add_term(a.clone(), *n, &(x * c));
        }
        out
    }

    pub fn sub(&self, other: &LieElement) -> LieElement {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Partition, i64, &Scalar)> {
        self.terms.iter().map(|((a, n), c)| (a, *n, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, n), c)| format!("{}*{:?}[{}]", format_scalar(c), a, n))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

type ModeKey = (Partition, i64, usize);

pub struct VertexAlgebra {
    kind: VaKind,
    truncation: usize,
    bases: RwLock<HashMap<usize, Arc<DegreeBasis>>>,
    modes: RwLock<HashMap<ModeKey, Arc<SparseMatrix>>>,
    straighten: RwLock<HashMap<(i64, Partition), State>>,
}

impl fmt::Debug for VertexAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VertexAlgebra")
            .field("kind", &self.kind)
            .field("truncation", &self.truncation)
            .finish()
    }
}

fn add_state(out: &mut State, p: Partition, c: &Scalar) {
    if c.is_zero() {
        return;
    }
    let slot = out.entry(p.clone()).or_insert_with(Scalar::zero);
    *slot += c;
    if slot.is_zero() {
        out.remove(&p);
    }
}

fn insert_part(p: &[u32], part: u32) -> Partition {
    let mut q = p.to_vec();
    let at = q.iter().position(|&x| x < part).unwrap_or(q.len());
    q.insert(at, part);
    q
}

impl VertexAlgebra {
    pub fn heisenberg(truncation: usize) -> Self {
        Self::new(VaKind::Heisenberg, truncation)
    }

    pub fn virasoro(c: Scalar, truncation: usize) -> Self {
        Self::new(VaKind::Virasoro(c), truncation)
    }

    pub fn new(kind: VaKind, truncation: usize) -> Self {
        Self {
            kind,
            truncation,
            bases: RwLock::new(HashMap::new()),
            modes: RwLock::new(HashMap::new()),
            straighten: RwLock::new(HashMap::new()),
        }
    }

    pub fn kind(&self) -> &VaKind {
        &self.kind
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn central_charge(&self) -> Scalar {
        match &self.kind {
            VaKind::Heisenberg => int(1),
            VaKind::Virasoro(c) => c.clone(),
        }
    }

    fn min_part(&self) -> u32 {
        match self.kind {
            VaKind::Heisenberg => 1,
            VaKind::Virasoro(_) => 2,
        }
    }

    /// The strong generator: `b = b_{−1}|0⟩` or `ω = L_{−2}|0⟩`.
    pub fn generator(&self) -> Partition {
        vec![self.min_part()]
    }

    /// Basis of `V_d`. Defined for every `d`, not only inside the window.
    pub fn basis(&self, d: usize) -> Arc<DegreeBasis> {
        if let Some(b) = self.bases.read().unwrap().get(&d) {
            return b.clone();
        }
        let b = Arc::new(DegreeBasis::new(d, self.min_part()));
        self.bases.write().unwrap().entry(d).or_insert(b).clone()
    }

    pub fn dim(&self, d: usize) -> usize {
        self.basis(d).dim()
    }

    pub fn vacuum(&self) -> HomVec {
        HomVec::new(0, SparseVector::unit(1, 0))
    }

    pub fn basis_vector(&self, p: &[u32]) -> HomVec {
        let d = partition_degree(p);
        let b = self.basis(d);
        let i = b.index_of(p).expect("partition belongs to this basis");
        HomVec::new(d, SparseVector::unit(b.dim(), i))
    }

    /// `ω`, with `L_n = ω_{(n+1)}`.
    pub fn conformal_vector(&self) -> HomVec {
        match self.kind {
            VaKind::Heisenberg => {
                let b = self.basis(2);
                let i = b.index_of(&[1, 1]).unwrap();
                HomVec::new(2, SparseVector::unit(b.dim(), i).scaled(&Scalar::new(1.into(), 2.into())))
            }
            VaKind::Virasoro(_) => self.basis_vector(&[2]),
        }
    }

    fn state_to_vec(&self, state: &State, d: usize) -> SparseVector {
        let b = self.basis(d);
        let mut v = SparseVector::zero(b.dim());
        for (p, c) in state {
            debug_assert_eq!(partition_degree(p), d);
            v.add_to(b.index_of(p).expect("state stays in the basis"), c);
        }
        v
    }

    fn heisenberg_mode(&self, n: i64, p: &[u32]) -> State {
        let mut out = State::new();
        if n < 0 {
            out.insert(insert_part(p, (-n) as u32), int(1));
        } else if n > 0 {
            let k = p.iter().filter(|&&x| x as i64 == n).count() as i64;
            if k > 0 {
                let at = p.iter().position(|&x| x as i64 == n).unwrap();
                let mut q = p.to_vec();
                q.remove(at);
                out.insert(q, int(n * k));
            }
        }
        out
    }

    /// `L_n` on a PBW word, by straightening against the leftmost letter.
    fn virasoro_mode(&self, n: i64, word: &[u32]) -> State {
        let c = self.central_charge();
        let mut out = State::new();
        if word.is_empty() {
            if n <= -2 {
                out.insert(vec![(-n) as u32], int(1));
            }
            return out;
        }
        let first = word[0] as i64;
        if n <= -2 && -n >= first {
            let mut q = vec![(-n) as u32];
            q.extend_from_slice(word);
            out.insert(q, int(1));
            return out;
        }
        let key = (n, word.to_vec());
        if let Some(s) = self.straighten.read().unwrap().get(&key) {
            return s.clone();
        }
        let rest = &word[1..];
        for (w, x) in self.virasoro_mode(n, rest) {
            for (w2, y) in self.virasoro_mode(-first, &w) {
                add_state(&mut out, w2, &(&x * &y));
            }
        }
        if n + first != 0 {
            for (w, x) in self.virasoro_mode(n - first, rest) {
                add_state(&mut out, w, &(x * int(n + first)));
            }
        }
        if n == first {
            let central = &c * int(n * n * n - n) / int(12);
            add_state(&mut out, rest.to_vec(), &central);
        }
        self.straighten.write().unwrap().entry(key).or_insert_with(|| out.clone());
        out
    }

    fn generator_block(&self, n: i64, d: usize) -> SparseMatrix {
        let g = self.min_part() as i64;
        let target = d as i64 + g - n - 1;
        let src = self.basis(d);
        if target < 0 {
            return SparseMatrix::zero(0, src.dim());
        }
        let target = target as usize;
        let columns = src
            .partitions()
            .iter()
            .map(|p| {
                let s = match self.kind {
                    VaKind::Heisenberg => self.heisenberg_mode(n, p),
                    VaKind::Virasoro(_) => self.virasoro_mode(n - 1, p),
                };
                self.state_to_vec(&s, target)
            })
            .collect();
        SparseMatrix::from_columns(self.dim(target), columns).expect("columns sized to target")
    }

    /// Matrix of `A_{(n)}: V_d → V_{d+|A|−n−1}` for a basis partition `A`.
    /// A zero-row matrix when the target degree is negative. No window check.
    pub fn mode_block(&self, a: &[u32], n: i64, d: usize) -> Arc<SparseMatrix> {
        let key = (a.to_vec(), n, d);
        if let Some(m) = self.modes.read().unwrap().get(&key) {
            return m.clone();
        }
        let m = Arc::new(self.compute_block(a, n, d));
        self.modes.write().unwrap().entry(key).or_insert(m).clone()
    }

    fn compute_block(&self, a: &[u32], n: i64, d: usize) -> SparseMatrix {
        let deg_a = partition_degree(a) as i64;
        let target = d as i64 + deg_a - n - 1;
        let src_dim = self.dim(d);
        if target < 0 {
            return SparseMatrix::zero(0, src_dim);
        }
        let tdim = self.dim(target as usize);
        if a.is_empty() {
            return if n == -1 {
                SparseMatrix::identity(src_dim)
            } else {
                SparseMatrix::zero(tdim, src_dim)
            };
        }
        if a.len() == 1 && a[0] == self.min_part() {
            return self.generator_block(n, d);
        }
        // A = g_{(−p)} B with g the generator; expand by the Borcherds
        // identity. Both sums stop once the inner mode lowers below degree 0.
        let g = self.generator();
        let deg_g = g[0] as i64;
        let p = match self.kind {
            VaKind::Heisenberg => a[0] as i64,
            VaKind::Virasoro(_) => a[0] as i64 - 1,
        };
        let b = &a[1..];
        let deg_b = partition_degree(b) as i64;
        let mut out = SparseMatrix::zero(tdim, src_dim);
        let mut j = 0;
        loop {
            let mid = d as i64 + deg_b - (n + j) - 1;
            if mid < 0 {
                break;
            }
            let inner = self.mode_block(b, n + j, d);
            let outer = self.mode_block(&g, -p - j, mid as usize);
            let term = outer.compose(&inner).expect("degrees chain");
            out.add_scaled(&term, &binomial(p + j - 1, j)).expect("same shape");
            j += 1;
        }
        let sgn = -sign(p);
        let mut j = 0;
        loop {
            let mid = d as i64 + deg_g - j - 1;
            if mid < 0 {
                break;
            }
            let inner = self.mode_block(&g, j, d);
            let outer = self.mode_block(b, n - p - j, mid as usize);
            let term = outer.compose(&inner).expect("degrees chain");
            out.add_scaled(&term, &(binomial(p + j - 1, j) * &sgn)).expect("same shape");
            j += 1;
        }
        out
    }

    /// Overwrites a cached mode block. Blocks computed later from it see
    /// the corrupted value. Used to exercise the axiom checker.
    pub fn corrupt_mode_cache(&self, a: &[u32], n: i64, d: usize, block: SparseMatrix) {
        self.modes.write().unwrap().insert((a.to_vec(), n, d), Arc::new(block));
    }

    fn window(&self, operation: &str, degree: i64) -> Result<usize, VaError> {
        if degree < 0 || degree > self.truncation as i64 {
            return Err(VaError::Window {
                operation: operation.into(),
                degree,
                truncation: self.truncation,
            });
        }
        Ok(degree as usize)
    }

    fn check_vec(&self, v: &HomVec) -> Result<(), VaError> {
        let expected = self.dim(v.degree);
        if v.coords.dim() != expected {
            return Err(VaError::BadVector {
                degree: v.degree,
                expected,
                found: v.coords.dim(),
            });
        }
        Ok(())
    }

    /// Block of `Σ cᵢ·(Aᵢ)_{(n)}` for a homogeneous `A = Σ cᵢ Aᵢ`, without a
    /// window check.
    pub fn vector_mode_block(&self, a: &HomVec, n: i64, d: usize) -> SparseMatrix {
        let target = d as i64 + a.degree as i64 - n - 1;
        let rows = if target < 0 { 0 } else { self.dim(target as usize) };
        let mut out = SparseMatrix::zero(rows, self.dim(d));
        let b = self.basis(a.degree);
        for (i, c) in a.coords.iter() {
            out.add_scaled(&self.mode_block(b.partition(i), n, d), c).expect("same shape");
        }
        out
    }

    /// `A_{(n)}: V_d → V_{d+m−n−1}` for homogeneous `A ∈ V_m`; both degrees
    /// must lie in the window.
    pub fn mode_matrix(&self, a: &HomVec, n: i64, d: usize) -> Result<SparseMatrix, VaError> {
        self.check_vec(a)?;
        self.window("mode_matrix source", d as i64)?;
        self.window("mode_matrix vector", a.degree as i64)?;
        self.window("mode_matrix target", d as i64 + a.degree as i64 - n - 1)?;
        Ok(self.vector_mode_block(a, n, d))
    }

    /// `L_n: V_d → V_{d−n}`, unchecked.
    pub fn virasoro_block(&self, n: i64, d: usize) -> SparseMatrix {
        self.vector_mode_block(&self.conformal_vector(), n + 1, d)
    }

    /// Applies a Lie element to a homogeneous vector. Any nonzero component
    /// outside the window is an error.
    pub fn apply_lie(&self, x: &LieElement, u: &HomVec) -> Result<GradedVec, VaError> {
        self.check_vec(u)?;
        let mut out = GradedVec::new();
        for (a, n, c) in x.terms() {
            let target = u.degree as i64 + partition_degree(a) as i64 - n - 1;
            if target < 0 {
                continue;
            }
            let img = self.mode_block(a, n, u.degree).apply(&u.coords).expect("sized");
            if img.is_zero() {
                continue;
            }
            let t = self.window("apply_lie", target)?;
            let slot = out.entry(t).or_insert_with(|| SparseVector::zero(self.dim(t)));
            slot.add_scaled(&img, c);
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Lie element of the modes `A_{[n]}` of a homogeneous vector.
    pub fn lie_mode(&self, a: &HomVec, n: i64) -> LieElement {
        let b = self.basis(a.degree);
        let mut x = LieElement::zero();
        for (i, c) in a.coords.iter() {
            x.add_term(b.partition(i).clone(), n, c);
        }
        x
    }

    /// `A_{(n)}B` for basis partitions, as a homogeneous vector.
    pub fn product(&self, a: &[u32], n: i64, b: &[u32]) -> Option<HomVec> {
        let deg_b = partition_degree(b);
        let target = partition_degree(a) as i64 + deg_b as i64 - n - 1;
        if target < 0 {
            return None;
        }
        let bv = self.basis_vector(b);
        let img = self.mode_block(a, n, deg_b).apply(&bv.coords).expect("sized");
        Some(HomVec::new(target as usize, img))
    }

    /// `[A_{[m]}, B_{[k]}] = Σ_{n≥0} C(m,n) (A_{(n)}B)_{[m+k−n]}`, extended
    /// bilinearly.
    pub fn u_bracket(&self, x: &LieElement, y: &LieElement) -> Result<LieElement, VaError> {
        let mut out = LieElement::zero();
        for (a, m, c1) in x.terms() {
            for (b, k, c2) in y.terms() {
                let top = partition_degree(a) as i64 + partition_degree(b) as i64 - 1;
                for n in 0..=top.max(-1) {
                    let coeff = binomial(m, n);
                    if coeff.is_zero() {
                        continue;
                    }
                    let Some(v) = self.product(a, n, b) else { continue };
                    if v.is_zero() {
                        continue;
                    }
                    self.window("u_bracket", v.degree as i64)?;
                    let scale = &coeff * c1 * c2;
                    out = out.add(&self.lie_mode(&v, m + k - n).scale(&scale));
                }
            }
        }
        Ok(out)
    }

    /// `ϑ(A_{[j]}) = (−1)^{a−1} Σ_i (1/i!)(L₁ⁱA)_{[2a−j−i−2]}` for `A ∈ V_a`.
    pub fn theta(&self, x: &LieElement) -> LieElement {
        let mut out = LieElement::zero();
        for (a, j, c) in x.terms() {
            let deg = partition_degree(a) as i64;
            let lead = sign(deg - 1) * c;
            let mut v = self.basis_vector(a);
            let mut i: i64 = 0;
            while !v.is_zero() {
                let w = Scalar::from_integer(factorial(i as u32)).recip() * &lead;
                out = out.add(&self.lie_mode(&v, 2 * deg - j - i - 2).scale(&w));
                if v.degree == 0 {
                    break;
                }
                let l1 = self.virasoro_block(1, v.degree);
                v = HomVec::new(v.degree - 1, l1.apply(&v.coords).expect("sized"));
                i += 1;
            }
        }
        out
    }

    /// `⟨ψ, ϑ(x)·u⟩`, the pairing that defines `x·ψ` on the graded dual.
    /// `ψ` holds coordinates against the dual basis of `V_{ψ.degree}`.
    pub fn contragredient_pair(&self, psi: &HomVec, x: &LieElement, u: &HomVec) -> Result<Scalar, VaError> {
        self.check_vec(psi)?;
        let image = self.apply_lie(&self.theta(x), u)?;
        Ok(image.get(&psi.degree).map(|v| v.dot(&psi.coords)).unwrap_or_else(Scalar::zero))
    }

    /// `x·ψ` computed on the dual side as the transpose of `ϑ(x)`, returned
    /// per degree of the dual space.
    pub fn dual_act(&self, x: &LieElement, psi: &HomVec) -> Result<GradedVec, VaError> {
        self.check_vec(psi)?;
        let mut out = GradedVec::new();
        for (b, k, c) in self.theta(x).terms() {
            let src = psi.degree as i64 - partition_degree(b) as i64 + k + 1;
            if src < 0 || src > self.truncation as i64 {
                continue;
            }
            let src = src as usize;
            let img = self.mode_block(b, k, src).transpose().apply(&psi.coords).expect("sized");
            let slot = out.entry(src).or_insert_with(|| SparseVector::zero(self.dim(src)));
            slot.add_scaled(&img, c);
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Mode `A′_{(n)}` of the contragredient field
    /// `⟨Y′(A,z)ψ, u⟩ = ⟨ψ, Y(e^{zL₁}(−z^{−2})^{L₀}A, z^{−1})u⟩`, read off as
    /// the coefficient of `z^{−n−1}`. Maps `(V_e)^*` to `(V_{e+a−n−1})^*`.
    pub fn contragredient_mode(&self, a: &HomVec, n: i64, e: usize) -> Result<SparseMatrix, VaError> {
        let deg = a.degree as i64;
        let target = self.window("contragredient_mode", e as i64 + deg - n - 1)?;
        let mut out = SparseMatrix::zero(self.dim(target), self.dim(e));
        // e^{zL₁}(−z^{−2})^{L₀}A = Σ_i (−1)^a z^{i−2a}/i! · L₁ⁱA, and
        // Y(B, z^{−1}) = Σ_m B_{(m)} z^{m+1}.
        let mut v = a.clone();
        let mut i: i64 = 0;
        while !v.is_zero() {
            let m = -n - 1 - (i - 2 * deg) - 1;
            let w = sign(deg) * Scalar::from_integer(factorial(i as u32)).recip();
            let block = self.vector_mode_block(&v, m, target);
            out.add_scaled(&block.transpose(), &w).expect("same shape");
            if v.degree == 0 {
                break;
            }
            v = HomVec::new(v.degree - 1, self.virasoro_block(1, v.degree).apply(&v.coords).expect("sized"));
            i += 1;
        }
        Ok(out)
    }

    /// Per-degree `dim V_d − rank C₂(V)_d`, where `C₂(V)_d` is spanned by
    /// `A_{(−n)}u`, `n ≥ 2`, with `A` and `u` basis vectors in the window.
    pub fn c2_quotient_dims(&self) -> Vec<C2Row> {
        let n_max = self.truncation;
        (0..=n_max)
            .map(|d| {
                let dim = self.dim(d);
                let mut span = Subspace::new(dim);
                for deg_a in 1..=d {
                    for deg_u in 0..=(d - deg_a) {
                        let n = d as i64 - deg_a as i64 - deg_u as i64 + 1;
                        if n < 2 {
                            continue;
                        }
                        let ba = self.basis(deg_a);
                        for a in ba.partitions() {
                            let block = self.mode_block(a, -n, deg_u);
                            for col in block.columns() {
                                span.insert(col).expect("sized");
                            }
                        }
                    }
                }
                C2Row {
                    degree: d,
                    dim,
                    c2_rank: span.rank(),
                    quotient_dim: dim - span.rank(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct C2Row {
    pub degree: usize,
    pub dim: usize,
    pub c2_rank: usize,
    pub quotient_dim: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub identity: String,
    pub passed: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AxiomReport {
    pub algebra: String,
    pub truncation: usize,
    pub max_degree: usize,
    pub seed: u64,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn count(&self, axiom: &str) -> usize {
        self.checks.iter().filter(|c| c.axiom == axiom).count()
    }

    /// One summary line per axiom, followed by every failure witness.
    pub fn render(&self) -> String {
        let mut s = format!(
            "algebra: {}\ntruncation: {}\nmax_degree: {}\nseed: {}\n",
            self.algebra, self.truncation, self.max_degree, self.seed
        );
        let mut axioms: Vec<&str> = self.checks.iter().map(|c| c.axiom).collect();
        axioms.dedup();
        for ax in axioms {
            let total = self.count(ax);
            let failed = self.checks.iter().filter(|c| c.axiom == ax && !c.passed).count();
            let status = if failed == 0 { "PASS" } else { "FAIL" };
            s.push_str(&format!("{status} {ax}: {} of {total} identities hold\n", total - failed));
        }
        for f in self.failures() {
            s.push_str(&format!("witness {}: {}\n", f.axiom, f.identity));
        }
        s
    }
}

fn commutator(x: &SparseMatrix, y: &SparseMatrix, x2: &SparseMatrix, y2: &SparseMatrix) -> SparseMatrix {
    // x∘y − y2∘x2, where x2/y2 are the same operators on the other degrees.
    let mut out = x.compose(y).expect("chain");
    out.add_scaled(&y2.compose(x2).expect("chain"), &-Scalar::one()).expect("same shape");
    out
}

/// Checks vacuum, translation, locality, the Virasoro relations, `L₀`
/// grading and the associativity (Borcherds) identity on basis vectors of
/// degree `≤ min(4, N)` with mode indices `|n| ≤ 4`. When an axiom has more
/// instances than `sample_budget`, a seeded sample of that size is taken.
pub fn check_axioms(v: &VertexAlgebra, sample_budget: usize, seed: u64) -> AxiomReport {
    let n_max = v.truncation();
    let top = n_max.min(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let in_window = |d: i64| d >= 0 && d <= n_max as i64;
    let basis_upto = |deg: usize| -> Vec<Partition> { (0..=deg).flat_map(|d| v.basis(d).partitions().to_vec()).collect() };
    let vectors = basis_upto(top);
    let mut budgeted = |mut cases: Vec<Box<dyn Fn() -> AxiomCheck + '_>>, checks: &mut Vec<AxiomCheck>| {
        if cases.len() > sample_budget {
            cases.shuffle(&mut rng);
            cases.truncate(sample_budget);
        }
        checks.extend(cases.iter().map(|f| f()));
    };

    // Vacuum: Y(|0⟩,z) = id; A_{(n)}|0⟩ = 0 for n ≥ 0 and A_{(−1)}|0⟩ = A.
    let mut cases: Vec<Box<dyn Fn() -> AxiomCheck + '_>> = Vec::new();
    for d in 0..=top {
        for n in -4..=4i64 {
            if !in_window(d as i64 - n - 1) {
                continue;
            }
            cases.push(Box::new(move || {
                let m = v.mode_block(&[], n, d);
                let expected = if n == -1 {
                    SparseMatrix::identity(v.dim(d))
                } else {
                    SparseMatrix::zero(m.rows(), m.cols())
                };
                AxiomCheck {
                    axiom: "vacuum",
                    identity: format!("|0>_({n}) on V_{d}"),
                    passed: *m == expected,
                }
            }));
        }
    }
    for a in &vectors {
        for n in -1..=4i64 {
            cases.push(Box::new(move || {
                let img = v.product(a, n, &[]);
                let passed = match (n, img) {
                    (-1, Some(w)) => w == v.basis_vector(a),
                    (_, Some(w)) => w.is_zero(),
                    (_, None) => true,
                };
                AxiomCheck {
                    axiom: "vacuum",
                    identity: format!("{a:?}_({n})|0>"),
                    passed,
                }
            }));
        }
    }
    budgeted(cases, &mut checks);

    // Translation: (TA)_{(n)} = −n A_{(n−1)} with T = L_{−1}; also TA = A_{(−2)}|0⟩.
    let mut cases: Vec<Box<dyn Fn() -> AxiomCheck + '_>> = Vec::new();
    for a in vectors.iter().filter(|a| partition_degree(a) < top) {
        let deg = partition_degree(a);
        cases.push(Box::new(move || {
            let ta = HomVec::new(deg + 1, v.virasoro_block(-1, deg).apply(&v.basis_vector(a).coords).unwrap());
            let via_mode = v.product(a, -2, &[]).unwrap();
            AxiomCheck {
                axiom: "translation",
                identity: format!("L_-1 {a:?} = {a:?}_(-2)|0>"),
                passed: ta == via_mode,
            }
        }));
        for n in -4..=4i64 {
            for d in 0..=top {
                if !in_window(d as i64 + deg as i64 - n) {
                    continue;
                }
                cases.push(Box::new(move || {
                    let ta = HomVec::new(deg + 1, v.virasoro_block(-1, deg).apply(&v.basis_vector(a).coords).unwrap());
                    let lhs = v.vector_mode_block(&ta, n, d);
                    let rhs = v.mode_block(a, n - 1, d).scaled(&int(-n));
                    AxiomCheck {
                        axiom: "translation",
                        identity: format!("(T{a:?})_({n}) = -{n} {a:?}_({}) on V_{d}", n - 1),
                        passed: lhs == rhs,
                    }
                }));
            }
        }
    }
    budgeted(cases, &mut checks);

    // Locality: Σ_i (−1)^i C(K,i) [A_{(m+K−i)}, B_{(k+i)}] = 0 with K = |A|+|B|.
    let mut cases: Vec<Box<dyn Fn() -> AxiomCheck + '_>> = Vec::new();
    for a in &vectors {
        for b in &vectors {
            let (da, db) = (partition_degree(a) as i64, partition_degree(b) as i64);
            if a.is_empty() || b.is_empty() || da + db > top as i64 {
                continue;
            }
            for m in -4..=4i64 {
                for k in -4..=4i64 {
                    for d in 0..=top {
                        let order = da + db;
                        let target = d as i64 + da + db - m - k - order - 2;
                        if !in_window(target) {
                            continue;
                        }
                        cases.push(Box::new(move || {
                            let mut total = SparseMatrix::zero(v.dim(target as usize), v.dim(d));
                            for i in 0..=order {
                                let (mi, ki) = (m + order - i, k + i);
                                let bk = v.mode_block(b, ki, d);
                                let mid_b = d as i64 + db - ki - 1;
                                let am = v.mode_block(a, mi, d);
                                let mid_a = d as i64 + da - mi - 1;
                                let mut term = SparseMatrix::zero(total.rows(), total.cols());
                                if mid_b >= 0 {
                                    term.add_scaled(&v.mode_block(a, mi, mid_b as usize).compose(&bk).unwrap(), &int(1))
                                        .unwrap();
                                }
                                if mid_a >= 0 {
                                    term.add_scaled(&v.mode_block(b, ki, mid_a as usize).compose(&am).unwrap(), &int(-1))
                                        .unwrap();
                                }
                                total.add_scaled(&term, &(sign(i) * binomial(order, i))).unwrap();
                            }
                            AxiomCheck {
                                axiom: "locality",
                                identity: format!(
                                    "(z-w)^{order}[Y({a:?},z),Y({b:?},w)] coefficient z^{{{}}}w^{{{}}} on V_{d}",
                                    -m - 1,
                                    -k - 1
                                ),
                                passed: total.is_zero(),
                            }
                        }));
                    }
                }
            }
        }
    }
    budgeted(cases, &mut checks);

    // Virasoro relations and L₀ grading.
    let c = v.central_charge();
    let mut cases: Vec<Box<dyn Fn() -> AxiomCheck + '_>> = Vec::new();
    for n in -4..=4i64 {
        for m in -4..=4i64 {
            for d in 0..=n_max {
                let target = d as i64 - n - m;
                if !in_window(target) || !in_window(d as i64 - m) || !in_window(d as i64 - n) {
                    continue;
                }
                let c = c.clone();
                cases.push(Box::new(move || {
                    let lhs = commutator(
                        &v.virasoro_block(n, (d as i64 - m) as usize),
                        &v.virasoro_block(m, d),
                        &v.virasoro_block(n, d),
                        &v.virasoro_block(m, (d as i64 - n) as usize),
                    );
                    let mut rhs = v.virasoro_block(n + m, d).scaled(&int(n - m));
                    if n + m == 0 {
                        let central = &c * int(n * n * n - n) / int(12);
                        rhs.add_scaled(&SparseMatrix::identity(v.dim(d)), &central).unwrap();
                    }
                    AxiomCheck {
                        axiom: "virasoro",
                        identity: format!("[L_{n},L_{m}] on V_{d}"),
                        passed: lhs == rhs,
                    }
                }));
            }
        }
    }
    for d in 0..=n_max {
        cases.push(Box::new(move || AxiomCheck {
            axiom: "virasoro",
            identity: format!("L_0 = {d} on V_{d}"),
            passed: v.virasoro_block(0, d) == SparseMatrix::identity(v.dim(d)).scaled(&int(d as i64)),
        }));
    }
    budgeted(cases, &mut checks);

    // Associativity on the module V itself:
    // (A_{(m)}B)_{(k)} = Σ_j (−1)^j C(m,j) [A_{(m−j)}B_{(k+j)} − (−1)^m B_{(m+k−j)}A_{(j)}].
    let mut cases: Vec<Box<dyn Fn() -> AxiomCheck + '_>> = Vec::new();
    for a in vectors.iter().filter(|a| !a.is_empty()) {
        for b in &vectors {
            let (da, db) = (partition_degree(a) as i64, partition_degree(b) as i64);
            for m in -2..=3i64 {
                let prod_deg = da + db - m - 1;
                if !in_window(prod_deg) {
                    continue;
                }
                for k in -3..=3i64 {
                    for d in 0..=top {
                        let target = d as i64 + prod_deg - k - 1;
                        if !in_window(target) {
                            continue;
                        }
                        cases.push(Box::new(move || {
                            let ab = v.product(a, m, b).unwrap();
                            let lhs = v.vector_mode_block(&ab, k, d);
                            let mut rhs = SparseMatrix::zero(lhs.rows(), lhs.cols());
                            let mut j = 0i64;
                            loop {
                                let mid_b = d as i64 + db - (k + j) - 1;
                                if mid_b < 0 {
                                    break;
                                }
                                let t = v.mode_block(a, m - j, mid_b as usize).compose(&v.mode_block(b, k + j, d)).unwrap();
                                rhs.add_scaled(&t, &(sign(j) * binomial(m, j))).unwrap();
                                j += 1;
                            }
                            let mut j = 0i64;
                            loop {
                                let mid_a = d as i64 + da - j - 1;
                                if mid_a < 0 {
                                    break;
                                }
                                let t = v.mode_block(b, m + k - j, mid_a as usize).compose(&v.mode_block(a, j, d)).unwrap();
                                rhs.add_scaled(&t, &(-sign(j) * binomial(m, j) * sign(m))).unwrap();
                                j += 1;
                            }
                            AxiomCheck {
                                axiom: "associativity",
                                identity: format!("({a:?}_({m}){b:?})_({k}) on V_{d}"),
                                passed: lhs == rhs,
                            }
                        }));
                    }
                }
            }
        }
    }
    budgeted(cases, &mut checks);

    AxiomReport {
        algebra: v.kind().to_string(),
        truncation: n_max,
        max_degree: top,
        seed,
        checks,
    }
}

/// `c(n³−n)/12`.
pub fn central_term(c: &Scalar, n: i64) -> Scalar {
    c * int(n * n * n - n) / int(12)
}

/// `1/i!` as a scalar.
pub fn inverse_factorial(i: u32) -> Scalar {
    Scalar::new(BigInt::one(), factorial(i))
}

/// Outcome of comparing `u_bracket` with matrix commutators.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BracketCheck {
    pub algebra: String,
    pub seed: u64,
    pub pairs: usize,
    pub comparisons: usize,
    pub mismatches: Vec<String>,
}

fn apply_graded(v: &VertexAlgebra, x: &LieElement, g: &GradedVec) -> Option<GradedVec> {
    let mut out = GradedVec::new();
    for (&d, u) in g {
        for (t, w) in v.apply_lie(x, &HomVec::new(d, u.clone())).ok()? {
            out.entry(t).or_insert_with(|| SparseVector::zero(v.dim(t))).add_scaled(&w, &int(1));
        }
    }
    out.retain(|_, w| !w.is_zero());
    Some(out)
}

/// Draws `pairs` random modes `A_{[n]}` with `|A| ≤ max_degree` and checks
/// `[x, y]` against `xy − yx` on every basis vector where all three sides
/// stay in the window.
pub fn bracket_check(v: &VertexAlgebra, pairs: usize, max_degree: usize, seed: u64) -> BracketCheck {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<Partition> = (0..=max_degree.min(v.truncation)).flat_map(|d| v.basis(d).partitions().to_vec()).collect();
    let draw = |rng: &mut ChaCha8Rng| {
        let p = parts[rng.gen_range(0..parts.len())].clone();
        let n = partition_degree(&p) as i64 + rng.gen_range(-2i64..=2);
        LieElement::mode(p, n)
    };
    let mut report = BracketCheck {
        algebra: v.kind.to_string(),
        seed,
        pairs,
        comparisons: 0,
        mismatches: Vec::new(),
    };
    for _ in 0..pairs {
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        let br = match v.u_bracket(&x, &y) {
            Ok(b) => b,
            Err(_) => continue,
        };
        for d in 0..=v.truncation {
            for i in 0..v.dim(d) {
                let u = GradedVec::from([(d, SparseVector::unit(v.dim(d), i))]);
                let xy = apply_graded(v, &y, &u).and_then(|w| apply_graded(v, &x, &w));
                let yx = apply_graded(v, &x, &u).and_then(|w| apply_graded(v, &y, &w));
                let (Some(mut comm), Some(yx), Some(b)) = (xy, yx, apply_graded(v, &br, &u)) else { continue };
                for (t, w) in yx {
                    comm.entry(t).or_insert_with(|| SparseVector::zero(v.dim(t))).add_scaled(&w, &int(-1));
                }
                comm.retain(|_, w| !w.is_zero());
                report.comparisons += 1;
                if comm != b {
                    report.mismatches.push(format!("[{x}, {y}] on degree {d} basis vector {i}"));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::ratio;

    #[test]
    fn partition_counts() {
        let heis: Vec<usize> = (0..=8).map(|d| partitions(d, 1).len()).collect();
        assert_eq!(heis, vec![1, 1, 2, 3, 5, 7, 11, 15, 22]);
        let vir: Vec<usize> = (0..=8).map(|d| partitions(d, 2).len()).collect();
        assert_eq!(vir, vec![1, 0, 1, 1, 2, 2, 4, 4, 7]);
        assert_eq!(partitions(3, 1), vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn vacuum_modes() {
        let v = VertexAlgebra::heisenberg(6);
        let vac = v.vacuum();
        assert_eq!(v.mode_matrix(&vac, -1, 3).unwrap(), SparseMatrix::identity(3));
        assert!(v.mode_matrix(&vac, 0, 3).unwrap().is_zero());
        assert!(v.mode_matrix(&vac, 1, 3).unwrap().is_zero());
        assert!(v.mode_matrix(&vac, 2, 0).is_err());
    }

    #[test]
    fn heisenberg_level_one() {
        let v = VertexAlgebra::heisenberg(6);
        let b = v.basis_vector(&[1]);
        let m = v.mode_matrix(&b, 1, 1).unwrap();
        assert_eq!(m.apply(&b.coords).unwrap(), v.vacuum().coords);
    }

    #[test]
    fn virasoro_central_on_omega() {
        let c = ratio(1, 2);
        let v = VertexAlgebra::virasoro(c.clone(), 6);
        let w = v.conformal_vector();
        let l2 = v.virasoro_block(2, 2);
        assert_eq!(l2.apply(&w.coords).unwrap(), SparseVector::from_dense(&[c / int(2)]));
    }

    #[test]
    fn window_rejected() {
        let v = VertexAlgebra::heisenberg(4);
        let b = v.basis_vector(&[1]);
        assert!(matches!(v.mode_matrix(&b, -2, 4), Err(VaError::Window { .. })));
    }

    #[test]
    fn l1_kills_weight_one_and_omega() {
        let v = VertexAlgebra::heisenberg(6);
        let b = v.basis_vector(&[1]);
        assert!(v.virasoro_block(1, 1).apply(&b.coords).unwrap().is_zero());
        let vir = VertexAlgebra::virasoro(int(3), 6);
        assert!(vir.virasoro_block(1, 2).apply(&vir.conformal_vector().coords).unwrap().is_zero());
    }

    #[test]
    fn small_bracket_examples() {
        let v = VertexAlgebra::heisenberg(6);
        let x = LieElement::mode(vec![1], 1);
        let y = LieElement::mode(vec![1], -1);
        assert_eq!(v.u_bracket(&x, &y).unwrap(), LieElement::mode(vec![], -1));
        let z = LieElement::mode(vec![1], 0);
        assert!(v.u_bracket(&z, &z).unwrap().is_zero());
    }

    #[test]
    fn theta_examples() {
        let v = VertexAlgebra::heisenberg(6);
        for j in -4..=4 {
            let x = LieElement::mode(vec![1], j);
            assert_eq!(v.theta(&x), LieElement::mode(vec![1], -j));
            assert_eq!(v.theta(&v.theta(&x)), x);
        }
        let vir = VertexAlgebra::virasoro(ratio(1, 2), 6);
        for j in -4..=4 {
            let x = LieElement::mode(vec![2], j);
            assert_eq!(vir.theta(&x), LieElement::mode(vec![2], 2 - j).scale(&int(-1)));
        }
    }

    #[test]
    fn c2_quotients() {
        let v = VertexAlgebra::heisenberg(6);
        let dims: Vec<usize> = v.c2_quotient_dims().iter().map(|r| r.quotient_dim).collect();
        assert_eq!(dims, vec![1; 7]);
        let vir = VertexAlgebra::virasoro(ratio(1, 2), 6);
        let dims: Vec<usize> = vir.c2_quotient_dims().iter().map(|r| r.quotient_dim).collect();
        assert_eq!(dims, vec![1, 0, 1, 0, 1, 0, 1]);
    }
}
