use logvoa::curves::{restrict_to_disc, CurveModel, GlobalLogForm};
use logvoa::exactalg::{int, ratio, Scalar, SparseMatrix, SparseVector, Subspace};
use logvoa::logmonoid::{Chart, MonoidHom, RingElement, SupportedRing};
use logvoa::series::{invert_auto, pullback_form, residue, DiscAuto, DiscForm, TruncatedLaurent};
use logvoa::vacore::{central_term, partitions, GradedVec, HomVec, LieElement, VertexAlgebra};
use num_traits::Zero;
use proptest::prelude::*;
use proptest::sample::select;
use std::sync::OnceLock;

fn small_ratio() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn nonzero_ratio() -> impl Strategy<Value = Scalar> {
    small_ratio().prop_filter("nonzero", |x| !x.is_zero())
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec(prop::collection::vec(small_ratio(), rows), cols).prop_map(move |cs| {
        SparseMatrix::from_columns(rows, cs.into_iter().map(|c| SparseVector::from_dense(&c)).collect()).unwrap()
    })
}

fn matrix_triple() -> impl Strategy<Value = (SparseMatrix, SparseMatrix, SparseMatrix, SparseMatrix)> {
    (1usize..4, 1usize..4, 1usize..4, 1usize..4)
        .prop_flat_map(|(a, b, c, d)| (matrix(a, b), matrix(b, c), matrix(c, d), matrix(b, c)))
}

fn vectors(dim: usize) -> impl Strategy<Value = Vec<SparseVector>> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, dim), 1..7)
        .prop_map(|vs| vs.iter().map(|v| SparseVector::from_ints(v)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matrix_ring_laws((a, b, c, b2) in matrix_triple()) {
        let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
        let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let mut sum = b.clone();
        sum.add_scaled(&b2, &int(1)).unwrap();
        let mut rhs = a.compose(&b).unwrap();
        rhs.add_scaled(&a.compose(&b2).unwrap(), &int(1)).unwrap();
        prop_assert_eq!(a.compose(&sum).unwrap(), rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn echelon_form_is_canonical(
        (vs, shuffled) in vectors(5).prop_flat_map(|vs| (Just(vs.clone()), Just(vs).prop_shuffle()))
    ) {
        let a = Subspace::spanned_by(5, &vs).unwrap();
        let b = Subspace::spanned_by(5, &shuffled).unwrap();
        let ra: Vec<_> = a.echelon_rows().cloned().collect();
        let rb: Vec<_> = b.echelon_rows().cloned().collect();
        prop_assert_eq!(ra, rb);
        for v in &vs {
            prop_assert!(b.contains(v).unwrap());
        }
    }
}

fn auto(order: usize) -> impl Strategy<Value = DiscAuto> {
    (nonzero_ratio(), prop::collection::vec(small_ratio(), order - 1)).prop_map(|(a1, rest)| {
        let mut c = vec![a1];
        c.extend(rest);
        DiscAuto::new(c).unwrap()
    })
}

fn laurent(min: i64, truncation: i64) -> impl Strategy<Value = TruncatedLaurent> {
    prop::collection::vec(small_ratio(), (truncation - min) as usize)
        .prop_map(move |c| TruncatedLaurent::from_terms(c.into_iter().enumerate().map(|(i, x)| (min + i as i64, x)), truncation))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn automorphism_group_laws(f in auto(6), g in auto(6), h in auto(6)) {
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        let id = DiscAuto::identity(7);
        prop_assert_eq!(f.compose(&invert_auto(&f)), id.clone());
        prop_assert_eq!(invert_auto(&f).compose(&f), id.clone());
        prop_assert_eq!(f.compose(&id), f.clone());
    }

    #[test]
    fn residue_is_coordinate_free(s in laurent(-3, 3), g in auto(8)) {
        let form = DiscForm::dt(s);
        let pulled = pullback_form(&form, &g).unwrap();
        prop_assert_eq!(residue(&pulled).unwrap(), residue(&form).unwrap());
    }

    #[test]
    fn exact_forms_have_no_residue(s in laurent(-4, 4)) {
        prop_assert!(residue(&DiscForm::dt(s.derivative())).unwrap().is_zero());
    }
}

fn hom(source: usize, target: usize) -> impl Strategy<Value = MonoidHom> {
    prop::collection::vec(prop::collection::vec(0u64..4, source), target)
        .prop_map(move |m| MonoidHom::new(source, target, m).unwrap())
}

fn poly(vars: usize) -> impl Strategy<Value = RingElement> {
    prop::collection::vec((prop::collection::vec(0i64..3, vars), small_ratio()), 0..4)
        .prop_map(|terms| RingElement::from_terms(terms))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn monoid_homs_compose_associatively(
        (f, g, h, m) in (1usize..4, 1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(a, b, c, d)| {
            (hom(c, d), hom(b, c), hom(a, b), prop::collection::vec(0u64..5, a))
        })
    ) {
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left.apply(&m), f.apply(&g.apply(&h.apply(&m))));
    }

    #[test]
    fn charts_are_multiplicative(images in prop::collection::vec(poly(2), 1..4), seed in any::<u64>()) {
        let chart = Chart::new(SupportedRing::Polynomial(vec!["x".into(), "y".into()]), images);
        prop_assert!(chart.check_multiplicativity(10, seed));
        prop_assert!(Chart::nodal().check_multiplicativity(10, seed));
    }
}

fn apply_graded(va: &VertexAlgebra, x: &LieElement, g: &GradedVec) -> Option<GradedVec> {
    let mut out = GradedVec::new();
    for (&d, v) in g {
        for (t, w) in va.apply_lie(x, &HomVec::new(d, v.clone())).ok()? {
            let slot = out.entry(t).or_insert_with(|| SparseVector::zero(va.dim(t)));
            slot.add_scaled(&w, &int(1));
        }
    }
    out.retain(|_, v| !v.is_zero());
    Some(out)
}

/// Compares two Lie elements as operators on every window basis vector
/// where both can be evaluated; returns the number of comparisons made.
fn compare_operators(va: &VertexAlgebra, x: &LieElement, y: &LieElement) -> Result<usize, String> {
    let mut compared = 0;
    for d in 0..=va.truncation() {
        for i in 0..va.dim(d) {
            let u = GradedVec::from([(d, SparseVector::unit(va.dim(d), i))]);
            if let (Some(a), Some(b)) = (apply_graded(va, x, &u), apply_graded(va, y, &u)) {
                if a != b {
                    return Err(format!("differ on degree {d} basis vector {i}"));
                }
                compared += 1;
            }
        }
    }
    Ok(compared)
}

fn commutator_agrees(va: &VertexAlgebra, x: &LieElement, y: &LieElement) -> Result<(), String> {
    let br = va.u_bracket(x, y).map_err(|e| e.to_string())?;
    for d in 0..=va.truncation() {
        for i in 0..va.dim(d) {
            let u = GradedVec::from([(d, SparseVector::unit(va.dim(d), i))]);
            let xy = apply_graded(va, y, &u).and_then(|v| apply_graded(va, x, &v));
            let yx = apply_graded(va, x, &u).and_then(|v| apply_graded(va, y, &v));
            let (Some(xy), Some(yx), Some(b)) = (xy, yx, apply_graded(va, &br, &u)) else { continue };
            let mut comm = xy;
            for (t, v) in yx {
                comm.entry(t).or_insert_with(|| SparseVector::zero(va.dim(t))).add_scaled(&v, &int(-1));
            }
            comm.retain(|_, v| !v.is_zero());
            if comm != b {
                return Err(format!("commutator differs on degree {d} basis vector {i}"));
            }
        }
    }
    Ok(())
}

fn mode(max_deg: usize, min_part: u32) -> impl Strategy<Value = LieElement> {
    let parts: Vec<_> = (0..=max_deg).flat_map(|d| partitions(d, min_part)).collect();
    (select(parts), -3i64..=4, nonzero_ratio()).prop_map(|(p, n, c)| LieElement::mode(p, n).scale(&c))
}

fn algebras() -> &'static [VertexAlgebra; 3] {
    static CELL: OnceLock<[VertexAlgebra; 3]> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            VertexAlgebra::heisenberg(7),
            VertexAlgebra::virasoro(ratio(1, 2), 7),
            VertexAlgebra::virasoro(int(26), 7),
        ]
    })
}

fn algebra() -> impl Strategy<Value = &'static VertexAlgebra> {
    (0usize..3).prop_map(|i| &algebras()[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn heisenberg_bracket_matches_commutator(x in mode(3, 1), y in mode(3, 1)) {
        let va = &algebras()[0];
        prop_assert_eq!(commutator_agrees(va, &x, &y), Ok(()));
    }

    #[test]
    fn virasoro_bracket_matches_commutator(x in mode(4, 2), y in mode(4, 2)) {
        let va = &algebras()[1];
        prop_assert_eq!(commutator_agrees(va, &x, &y), Ok(()));
    }

    #[test]
    fn bracket_is_antisymmetric(x in mode(3, 1), y in mode(3, 1)) {
        let va = VertexAlgebra::heisenberg(7);
        let xy = va.u_bracket(&x, &y).unwrap();
        let yx = va.u_bracket(&y, &x).unwrap();
        let k = compare_operators(&va, &xy, &yx.scale(&int(-1))).map_err(TestCaseError::fail)?;
        prop_assume!(k > 0);
    }

    #[test]
    fn bracket_satisfies_jacobi(x in mode(2, 1), y in mode(2, 1), z in mode(2, 1)) {
        let va = VertexAlgebra::heisenberg(8);
        let jac = |a: &LieElement, b: &LieElement, c: &LieElement| va.u_bracket(a, &va.u_bracket(b, c).unwrap()).unwrap();
        let total = jac(&x, &y, &z).add(&jac(&y, &z, &x)).add(&jac(&z, &x, &y));
        let k = compare_operators(&va, &total, &LieElement::zero()).map_err(TestCaseError::fail)?;
        prop_assume!(k > 0);
    }

    #[test]
    fn theta_is_an_involution((va, x) in algebra().prop_flat_map(|va| (Just(va), mode(4, va.generator()[0])))) {
        let twice = va.theta(&va.theta(&x));
        let k = compare_operators(va, &twice, &x).map_err(TestCaseError::fail)?;
        prop_assume!(k > 0);
    }

    #[test]
    fn lie_modes_track_degree(va in algebra(), x in mode(4, 2), d in 0usize..=7) {
        for (a, n, _) in x.terms() {
            let shift = a.iter().sum::<u32>() as i64 - n - 1;
            for i in 0..va.dim(d) {
                let u = HomVec::new(d, SparseVector::unit(va.dim(d), i));
                if let Ok(img) = va.apply_lie(&LieElement::mode(a.clone(), n), &u) {
                    prop_assert!(img.keys().all(|&t| t as i64 == d as i64 + shift));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn virasoro_central_term(c in nonzero_ratio(), m in -4i64..=4, n in -4i64..=4) {
        let va = VertexAlgebra::virasoro(c.clone(), 8);
        let l = |k: i64| LieElement::mode(vec![2], k + 1);
        let br = va.u_bracket(&l(m), &l(n)).unwrap();
        let mut expected = l(m + n).scale(&int(m - n));
        if m + n == 0 {
            expected = expected.add(&LieElement::mode(vec![], -1).scale(&central_term(&c, m)));
        }
        prop_assert!(compare_operators(&va, &br, &expected).unwrap() > 0);
    }
}

fn nodal_poly() -> impl Strategy<Value = RingElement> {
    prop::collection::vec((0usize..2, 0i64..4, small_ratio()), 0..5).prop_map(|terms| {
        let r = SupportedRing::NodalQuotient;
        let el = RingElement::from_terms(terms.into_iter().map(|(v, k, c)| {
            let mut e = vec![0, 0];
            e[v] = k;
            (e, c)
        }));
        r.normalize(&el)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nodal_branch_residues_cancel(f in nodal_poly(), g in nodal_poly()) {
        let c = CurveModel::nodal();
        let omega = GlobalLogForm::nodal(f, g);
        let r1 = residue(&restrict_to_disc(&omega, &c.punctures[0], 6).unwrap()).unwrap();
        let r2 = residue(&restrict_to_disc(&omega, &c.punctures[1], 6).unwrap()).unwrap();
        prop_assert_eq!(r1, -r2);
    }

    #[test]
    fn log_relation_is_invisible(f in nodal_poly(), g in nodal_poly(), h in nodal_poly()) {
        let c = CurveModel::nodal();
        let omega = GlobalLogForm::nodal(f.clone(), g.clone());
        let shifted = GlobalLogForm::nodal(f.add(&h), g.add(&h));
        for p in &c.punctures {
            prop_assert_eq!(restrict_to_disc(&omega, p, 6).unwrap(), restrict_to_disc(&shifted, p, 6).unwrap());
        }
    }
}
