//! Exponential coordinates of disc automorphisms and their action on a
//! truncated vertex algebra.
//!
//! `f(z) = exp(Σ_{i>0} vᵢ z^{i+1}∂_z) · v₀z` and
//! `act(f) = exp(−Σ_{j>0} v_j L_j) ∘ v₀^{−L₀}`. With `f∘g = f(g(z))` this is
//! a right action: `act(f∘g) = act(g)∘act(f)`.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::exactalg::{int, pow_scalar, Scalar, SparseMatrix, SparseVector};
use crate::series::{DiscAuto, TruncatedLaurent};
use crate::vacore::{GradedVec, HomVec, VertexAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoordError {
    #[error("v₀ must be nonzero")]
    ZeroScale,
    #[error("acting on V_≤{truncation} needs v_1..v_{truncation}, i.e. an automorphism known through order {needed}; got order {available}")]
    InsufficientTruncation {
        truncation: usize,
        needed: i64,
        available: i64,
    },
}

/// `(v₀, v₁, …, v_{N−2})` for an automorphism known modulo `z^N`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExpCoords {
    v: Vec<Scalar>,
}

impl ExpCoords {
    pub fn new(v: Vec<Scalar>) -> Result<Self, CoordError> {
        match v.first() {
            Some(v0) if !v0.is_zero() => Ok(Self { v }),
            _ => Err(CoordError::ZeroScale),
        }
    }

    pub fn values(&self) -> &[Scalar] {
        &self.v
    }

    pub fn v(&self, i: usize) -> Scalar {
        self.v.get(i).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Order `N` of the automorphism these coordinates describe.
    pub fn truncation(&self) -> i64 {
        self.v.len() as i64 + 1
    }
}

/// `Σ_{i>0} vᵢ z^{i+1} h′`.
fn derivation(v: &[Scalar], h: &TruncatedLaurent) -> TruncatedLaurent {
    let n = h.truncation();
    let dh = h.derivative();
    let mut out = TruncatedLaurent::zero(n);
    for (i, vi) in v.iter().enumerate().skip(1) {
        if vi.is_zero() {
            continue;
        }
        let term = dh.shift(i as i64 + 1).scale(vi).truncate(n);
        out = out.add(&term);
    }
    out
}

/// Evaluates `exp(Σ_{i>0} vᵢ z^{i+1}∂_z)(v₀z)` modulo `z^N`.
pub fn expand_exponential(c: &ExpCoords) -> DiscAuto {
    let n = c.truncation();
    let mut term = TruncatedLaurent::monomial(c.v(0), 1, n);
    let mut sum = term.clone();
    let mut k = 1;
    while !term.is_zero() {
        term = derivation(c.values(), &term).scale(&int(k).recip());
        sum = sum.add(&term);
        k += 1;
    }
    DiscAuto::from_series(&sum).expect("v₀ ≠ 0 gives a unit linear term")
}

/// Triangular solve: `v₀ = a₁`, then each `vᵢ` from the `z^{i+1}`
/// coefficient, where it enters linearly as `vᵢv₀`.
pub fn solve_exp_coords(f: &DiscAuto) -> ExpCoords {
    let n = f.truncation();
    let v0 = f.coefficient(1);
    let mut v = vec![v0.clone()];
    for i in 1..(n - 1) as usize {
        v.push(Scalar::zero());
        let got = expand_exponential(&ExpCoords { v: v.clone() }).coefficient(i + 1);
        v[i] = (f.coefficient(i + 1) - got) / &v0;
    }
    ExpCoords { v }
}

/// A degree-graded linear map on `V_{≤N}`, stored as blocks
/// `(source degree, target degree) → matrix`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedEndo {
    pub truncation: usize,
    blocks: BTreeMap<(usize, usize), SparseMatrix>,
}

impl GradedEndo {
    pub fn zero(truncation: usize) -> Self {
        Self {
            truncation,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(v: &VertexAlgebra) -> Self {
        let n = v.truncation();
        let blocks = (0..=n).map(|d| ((d, d), SparseMatrix::identity(v.dim(d)))).collect();
        Self { truncation: n, blocks }
    }

    pub fn block(&self, src: usize, tgt: usize) -> Option<&SparseMatrix> {
        self.blocks.get(&(src, tgt))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &SparseMatrix)> {
        self.blocks.iter()
    }

    fn add_block(&mut self, src: usize, tgt: usize, m: &SparseMatrix, c: &Scalar) {
        let slot = self
            .blocks
            .entry((src, tgt))
            .or_insert_with(|| SparseMatrix::zero(m.rows(), m.cols()));
        slot.add_scaled(m, c).expect("block shapes agree");
        if slot.is_zero() {
            self.blocks.remove(&(src, tgt));
        }
    }

    pub fn add_scaled(&mut self, other: &GradedEndo, c: &Scalar) {
        for (&(s, t), m) in &other.blocks {
            self.add_block(s, t, m, c);
        }
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &GradedEndo) -> GradedEndo {
        let mut out = GradedEndo::zero(self.truncation.min(rhs.truncation));
        for (&(s, mid), a) in &rhs.blocks {
            for (&(mid2, t), b) in self.blocks.range((mid, 0)..=(mid, usize::MAX)) {
                debug_assert_eq!(mid, mid2);
                out.add_block(s, t, &b.compose(a).expect("chain"), &int(1));
            }
        }
        out
    }

    pub fn apply(&self, u: &HomVec) -> GradedVec {
        let mut out = GradedVec::new();
        for (&(_, t), m) in self.blocks.range((u.degree, 0)..=(u.degree, usize::MAX)) {
            let img = m.apply(&u.coords).expect("sized");
            out.entry(t)
                .or_insert_with(|| SparseVector::zero(m.rows()))
                .add_scaled(&img, &int(1));
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

/// The operator `exp(−Σ_{j>0} v_j L_j) ∘ v₀^{−L₀}` on `V_{≤N}`.
pub fn act(f: &DiscAuto, v: &VertexAlgebra) -> Result<GradedEndo, CoordError> {
    let n = v.truncation();
    let needed = n as i64 + 2;
    if f.truncation() < needed && n > 0 {
        return Err(CoordError::InsufficientTruncation {
            truncation: n,
            needed,
            available: f.truncation(),
        });
    }
    let c = solve_exp_coords(f);
    let v0 = c.v(0);
    // x = −Σ v_j L_j lowers degree, so x^{n+1} = 0.
    let mut x = GradedEndo::zero(n);
    for j in 1..=n {
        let vj = c.v(j);
        if vj.is_zero() {
            continue;
        }
        for d in j..=n {
            x.add_block(d, d - j, &v.virasoro_block(j as i64, d), &-vj.clone());
        }
    }
    let mut exp = GradedEndo::identity(v);
    let mut power = GradedEndo::identity(v);
    for k in 1..=n as i64 {
        let next = x.compose(&power);
        if next.blocks.is_empty() {
            break;
        }
        // power = x^k / k!
        power = GradedEndo {
            truncation: n,
            blocks: next
                .blocks
                .into_iter()
                .map(|(key, m)| (key, m.scaled(&int(k).recip())))
                .collect(),
        };
        exp.add_scaled(&power, &int(1));
    }
    let mut scale = GradedEndo::zero(n);
    for d in 0..=n {
        let s = pow_scalar(&v0, -(d as i64));
        scale.add_block(d, d, &SparseMatrix::identity(v.dim(d)), &s);
    }
    Ok(exp.compose(&scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::ratio;

    fn coords(v: &[i64]) -> ExpCoords {
        ExpCoords::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn solve_examples() {
        let f = DiscAuto::from_ints(&[2, 0, 0, 0, 0]).unwrap();
        assert_eq!(solve_exp_coords(&f), coords(&[2, 0, 0, 0, 0]));
        let id = DiscAuto::identity(6);
        assert_eq!(solve_exp_coords(&id), coords(&[1, 0, 0, 0, 0]));
        let f = DiscAuto::from_ints(&[1, 1, 0, 0]).unwrap();
        let c = solve_exp_coords(&f);
        assert_eq!(c.values()[..3], [int(1), int(1), int(-1)]);
        assert_eq!(expand_exponential(&c), f);
    }

    #[test]
    fn expand_examples() {
        assert_eq!(expand_exponential(&coords(&[1, 0, 0])), DiscAuto::identity(4));
        assert_eq!(expand_exponential(&coords(&[3, 0, 0])), DiscAuto::from_ints(&[3, 0, 0]).unwrap());
        // exp(z²∂)z = z/(1−z)
        let c = coords(&[1, 1, 0, 0, 0, 0]);
        assert_eq!(expand_exponential(&c), DiscAuto::from_ints(&[1, 1, 1, 1, 1, 1]).unwrap());
    }

    #[test]
    fn displayed_system() {
        let c = ExpCoords::new(vec![ratio(3, 2), int(2), ratio(-1, 3), int(5)]).unwrap();
        let f = expand_exponential(&c);
        let (v0, v1, v2) = (c.v(0), c.v(1), c.v(2));
        assert_eq!(f.coefficient(1), v0.clone());
        assert_eq!(f.coefficient(2), &v1 * &v0);
        assert_eq!(f.coefficient(3), (&v2 + &v1 * &v1) * &v0);
    }

    #[test]
    fn act_examples() {
        let v = VertexAlgebra::heisenberg(4);
        assert_eq!(act(&DiscAuto::identity(6), &v).unwrap(), GradedEndo::identity(&v));
        let two = act(&DiscAuto::from_ints(&[2, 0, 0, 0, 0]).unwrap(), &v).unwrap();
        for d in 0..=4 {
            let expected = SparseMatrix::identity(v.dim(d)).scaled(&pow_scalar(&int(2), -(d as i64)));
            assert_eq!(two.block(d, d), Some(&expected));
        }
        let g = act(&DiscAuto::from_ints(&[1, 1, 0, 0, 0]).unwrap(), &v).unwrap();
        let b = v.basis_vector(&[1]);
        let img = g.apply(&b);
        assert_eq!(img.len(), 1);
        assert_eq!(img[&1], b.coords);
        assert!(matches!(
            act(&DiscAuto::from_ints(&[1, 1]).unwrap(), &v),
            Err(CoordError::InsufficientTruncation { .. })
        ));
    }
}
