use proptest::prelude::*;

use hermitia::gf::field_of_order;
use hermitia::matff::{random_hermitian_invertible, twisted_gram, Mat, SurfaceSpec};
use hermitia::orbit::{
    act, build_curve, canonical_rep, embed_qprime, normalize_to_rep, project_star, CaseId,
};
use hermitia::tetra::{is_identically_zero, smoothness_scan};

#[test]
fn curves_on_random_surfaces() {
    for (q, seeds) in [(2u64, 0..6), (3, 0..6), (4, 0..3), (5, 0..3)] {
        for seed in seeds {
            let gram = random_hermitian_invertible(q, 4, seed).unwrap();
            let surf = SurfaceSpec::new(q, gram).unwrap();
            for case in CaseId::valid_for(q) {
                let built = build_curve(case, q, &surf, 6).unwrap();
                assert!(built.on_surface, "{case} q={q} seed={seed}");
                assert!(built.curve.is_nonplanar());
                let k = built.curve.frame.field().clone();
                let pulled =
                    twisted_gram(&built.curve.frame, &surf.gram.embed_into(&k).unwrap(), q)
                        .unwrap();
                assert_eq!(pulled, built.target.embed_into(&k).unwrap());
                assert!(is_identically_zero(built.curve.sig, q, &pulled).unwrap());
            }
        }
    }
}

#[test]
fn built_curve_points_lie_on_the_surface() {
    let surf = SurfaceSpec::fermat(3).unwrap();
    let built = build_curve(CaseId::C3, 3, &surf, 6).unwrap();
    let k = built.curve.frame.field().clone();
    let on_k = SurfaceSpec::new(3, surf.gram.embed_into(&k).unwrap()).unwrap();
    for t in k.elements() {
        assert_eq!(on_k.evaluate(&built.curve.point(1, t)), 0);
    }
}

#[test]
fn unreachable_normalization_reports_root_orders() {
    let f = field_of_order(5, 2).unwrap();
    let gen = f.generator();
    let b = Mat::from_rows(
        &f,
        &[
            vec![0, gen, 0, 0],
            vec![0, 0, 0, 1],
            vec![0, 0, f.neg(1), 0],
            vec![f.neg(gen), 0, 0, 0],
        ],
    )
    .unwrap();
    let err = normalize_to_rep(&b, CaseId::C3, 5, 2)
        .unwrap_err()
        .to_string();
    assert!(err.contains("orders 3 and 1890"), "{err}");
}

#[test]
fn smoothness_does_not_depend_on_the_scan_field() {
    let a = smoothness_scan(CaseId::C3, 3, &field_of_order(3, 2).unwrap()).unwrap();
    let b = smoothness_scan(CaseId::C3, 3, &field_of_order(3, 4).unwrap()).unwrap();
    assert_eq!(a.rank_at(&[0, 0, 0, 1]), b.rank_at(&[0, 0, 0, 1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbit_of_the_c3_rep_normalizes(l in 1u64..25, m in 1u64..25) {
        let q = 5;
        let f = field_of_order(q, 2).unwrap();
        let rep = canonical_rep(CaseId::C3, q).unwrap();
        let moved = act(&embed_qprime(&rep, CaseId::C3, q).unwrap(), &Mat::diag(&f, &[l, m])).unwrap();
        let b = project_star(&moved).unwrap();
        let g = normalize_to_rep(&b, CaseId::C3, q, 2).unwrap();
        let back = act(&moved, &g).unwrap();
        prop_assert_eq!(project_star(&back).unwrap(), rep.embed_into(g.field()).unwrap());
    }

    #[test]
    fn diagonal_action_stays_in_shape(l in 1u64..16, m in 1u64..16) {
        let f = field_of_order(4, 2).unwrap();
        let rep = embed_qprime(&canonical_rep(CaseId::C2, 4).unwrap(), CaseId::C2, 4).unwrap();
        let moved = act(&rep, &Mat::diag(&f, &[l, m])).unwrap();
        prop_assert!(moved.is_in_qprime());
    }
}
