use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4};
use posmap_core::decomp::{
    caratheodory_cube, decompose, rotation_of, spinor_lift, verify_decomposition, CubePoint,
    DecomposeOptions,
};
use posmap_core::extremal::{classify, ExtremalVerdict};
use posmap_core::lorentz::{cone_preservation, LorentzMap};
use posmap_core::numkit::SymMat;
use posmap_core::positivity::{is_interior, is_positive, property_report, PositivityVerdict};
use posmap_core::ppt::{
    partial_transpose_matrix, separability_verdict, werner_state, SeparabilityVerdict,
    TwoQubitState,
};
use posmap_core::qmap::{complex_gaussian, haar_su2, random_map, rng_from_seed, RandomKind};
use posmap_core::scaling::{scale_to_bistochastic, ScalingOptions};
use posmap_core::slemma::{decide, feasibility_threshold, SLemmaOptions, SLemmaOutcome};
use posmap_core::{QubitMap, C64};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = RandomKind> {
    prop_oneof![
        (0.05f64..=1.0).prop_map(|t| RandomKind::Interior { t }),
        Just(RandomKind::Cp),
        Just(RandomKind::Ccp),
        Just(RandomKind::Boundary),
        Just(RandomKind::NonPositive),
    ]
}

fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

fn random_state(seed: u64) -> DMatrix<C64> {
    let mut rng = rng_from_seed(seed);
    let g = DMatrix::from_fn(4, 4, |_, _| complex_gaussian(&mut rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let rho = rho / tr;
    // exact Hermitian symmetry
    DMatrix::from_fn(4, 4, |r, c| (rho[(r, c)] + rho[(c, r)].conj()) * 0.5)
}

fn random_sym(seed: u64, dim: usize) -> SymMat {
    let mut rng = rng_from_seed(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut rng).re);
    SymMat::new(&m + m.transpose()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn positivity_is_invariant_under_the_adjoint(seed in any::<u64>(), kind in kind_strategy()) {
        let m = random_map(seed, kind);
        let a = is_positive(&m);
        let b = is_positive(&m.adjoint());
        if !a.in_margin_band && !b.in_margin_band {
            prop_assert_eq!(a.verdict, b.verdict);
        }
    }

    #[test]
    fn interiority_is_invariant_under_the_adjoint(seed in any::<u64>(), t in 0.05f64..=1.0) {
        let m = random_map(seed, RandomKind::Interior { t });
        prop_assert!(is_interior(&m));
        prop_assert!(is_interior(&m.adjoint()));
    }

    #[test]
    fn mixing_a_positive_map_with_the_depolarizer_lands_in_the_interior(
        seed in any::<u64>(),
        t in 0.01f64..=1.0,
        kind in prop_oneof![Just(RandomKind::Cp), Just(RandomKind::Ccp), Just(RandomKind::Boundary)],
    ) {
        let m = random_map(seed, kind);
        prop_assert!(is_positive(&m).is_positive());
        let mixed = m.mix(&QubitMap::depolarizing(), t);
        prop_assert!(is_positive(&mixed).is_positive());
        prop_assert!(is_interior(&mixed));
    }

    #[test]
    fn complete_positivity_swaps_with_composition_by_the_transpose(seed in any::<u64>(), kind in kind_strategy()) {
        let m = random_map(seed, kind);
        let mt = m.compose(&QubitMap::transpose());
        let a = property_report(&m);
        let b = property_report(&mt);
        prop_assert!((a.choi_min - b.choi_t_min).abs() <= 1e-10 * (1.0 + a.choi_min.abs()));
        if a.choi_min.abs() > 1e-8 {
            prop_assert_eq!(a.cp, b.ccp);
        }
    }

    #[test]
    fn caratheodory_weights_reproduce_the_point(s in prop::array::uniform3(-1.0f64..=1.0)) {
        let terms = caratheodory_cube(CubePoint::new(s));
        prop_assert!(!terms.is_empty() && terms.len() <= 4);
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for (i, &si) in s.iter().enumerate() {
            let x: f64 = terms.iter().map(|t| t.weight * t.signs[i] as f64).sum();
            prop_assert!((x - si).abs() <= 1e-12, "coordinate {} off by {}", i, x - si);
        }
        prop_assert!(terms.iter().all(|t| t.weight > 0.0));
    }

    #[test]
    fn spinor_lift_inverts_the_rotation_map(seed in any::<u64>()) {
        let u = haar_su2(&mut rng_from_seed(seed));
        let r = rotation_of(&u);
        prop_assert!((r.transpose() * r - Matrix3::identity()).norm() <= 1e-12);
        let lifted = spinor_lift(&r).unwrap();
        prop_assert!((rotation_of(&lifted) - r).norm() <= 1e-12);
        let same = (lifted - u).norm().min((lifted + u).norm());
        prop_assert!(same <= 1e-12, "lift differs from ±U by {}", same);
    }

    #[test]
    fn adjoint_of_a_conjugation_is_conjugation_by_the_adjoint(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let v = Matrix2::from_fn(|_, _| complex_gaussian(&mut rng));
        let a = QubitMap::conjugation(&v).unwrap().adjoint();
        let b = QubitMap::conjugation(&v.adjoint()).unwrap();
        prop_assert!(a.distance(&b) <= 1e-12 * (1.0 + b.ptm().norm()));
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>()) {
        let rho = random_state(seed);
        let once = partial_transpose_matrix(&rho);
        let twice = partial_transpose_matrix(once.as_matrix());
        prop_assert_eq!(twice.as_matrix(), &rho);
        prop_assert_eq!(once.as_matrix().trace(), rho.trace());
    }

    #[test]
    fn separability_is_invariant_under_local_unitaries(seed in any::<u64>(), p in 0.0f64..=1.0) {
        prop_assume!((p - 1.0 / 3.0).abs() > 1e-6);
        let mut rng = rng_from_seed(seed);
        let (u, w) = (haar_su2(&mut rng), haar_su2(&mut rng));
        let k = kron(&u, &w);
        for rho in [werner_state(p).unwrap().rho().as_matrix().clone(), random_state(seed ^ 0x5eed)] {
            let before = separability_verdict(&TwoQubitState::new(rho.clone()).unwrap());
            prop_assume!(!before.boundary);
            let moved = &k * &rho * k.adjoint();
            let moved = DMatrix::from_fn(4, 4, |r, c| (moved[(r, c)] + moved[(c, r)].conj()) * 0.5);
            let after = separability_verdict(&TwoQubitState::new(moved).unwrap());
            prop_assert_eq!(
                matches!(before.verdict, SeparabilityVerdict::Separable),
                matches!(after.verdict, SeparabilityVerdict::Separable)
            );
        }
    }

    #[test]
    fn decompositions_split_into_sound_cp_and_co_cp_parts(seed in any::<u64>(), t in 0.05f64..=1.0) {
        let m = random_map(seed, RandomKind::Interior { t });
        let out = decompose(&m, &DecomposeOptions::default()).unwrap();
        let d = &out.decomposition;
        prop_assert!(d.term_count() <= 4);
        prop_assert!(out.residual <= 1e-8);
        prop_assert_eq!(verify_decomposition(&m, d), out.residual);
        let cp = d.cp_part();
        let ccp = d.ccp_part();
        prop_assert!(cp.choi().min_eigenvalue() >= -1e-10);
        prop_assert!(ccp.compose(&QubitMap::transpose()).choi().min_eigenvalue() >= -1e-10);
        prop_assert!(cp.add(&ccp).distance(&m) <= 1e-8);
    }

    #[test]
    fn scaling_reconstructs_the_scaled_map(seed in any::<u64>(), t in 0.05f64..=1.0) {
        let m = random_map(seed, RandomKind::Interior { t });
        let r = scale_to_bistochastic(&m, &ScalingOptions::default()).unwrap();
        let phi_a = QubitMap::conjugation(&r.a.to_matrix()).unwrap();
        let phi_b = QubitMap::conjugation(&r.b.to_matrix()).unwrap();
        let rebuilt = phi_a.compose(&m.compose(&phi_b));
        prop_assert!(rebuilt.distance(&r.scaled) <= 1e-12 * (1.0 + rebuilt.ptm().norm()));
        prop_assert!(r.residual_unital <= 1e-10 && r.residual_tp <= 1e-10);
        prop_assert!((r.alpha - 1.0).abs() <= 1e-8);
        prop_assert!((r.sigma0.trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn slemma_certificates_are_sound(seed in any::<u64>(), dim in 2usize..=5) {
        let f = random_sym(seed, dim);
        let g = random_sym(seed.wrapping_add(1), dim);
        let eig = posmap_core::numkit::sym_eig(&g);
        prop_assume!(*eig.eigenvalues.last().unwrap() > 1e-3);
        let xbar = eig.eigenvector(dim - 1);
        match decide(&f, &g, &xbar, &SLemmaOptions::default()).unwrap() {
            SLemmaOutcome::Feasible { mu, threshold, .. } => {
                prop_assert!(mu >= 0.0);
                prop_assert!(f.lin_comb(1.0, &g, -mu).min_eigenvalue() >= -threshold);
                prop_assert_eq!(threshold, feasibility_threshold(&f, &g, mu, SLemmaOptions::default().tol));
            }
            SLemmaOutcome::Infeasible { witness, .. } => {
                prop_assert!(g.quad(&witness) > 0.0);
                prop_assert!(f.quad(&witness) < 0.0);
            }
        }
    }

    #[test]
    fn not_extreme_perturbations_stay_in_the_cone(seed in any::<u64>(), t in 0.05f64..=0.95) {
        let m = random_map(seed, RandomKind::Interior { t });
        let l = LorentzMap::from_qubit_map(&m);
        match classify(&l).unwrap() {
            ExtremalVerdict::NotExtreme { delta, .. } => {
                let plus = LorentzMap(l.matrix() + delta.matrix());
                let minus = LorentzMap(l.matrix() - delta.matrix());
                prop_assert!(cone_preservation(&plus, 1e-10).preserves());
                prop_assert!(cone_preservation(&minus, 1e-10).preserves());
                prop_assert!(delta.matrix().norm() > 0.0);
            }
            other => prop_assert!(false, "interior map classified as {:?}", other),
        }
    }
}

#[test]
fn non_positive_maps_stay_non_positive_under_the_adjoint() {
    let m = QubitMap::from_diagonal([1.0, 1.5, 0.0, 0.0]).unwrap();
    assert_eq!(is_positive(&m).verdict, PositivityVerdict::NotPositive);
    assert_eq!(
        is_positive(&m.adjoint()).verdict,
        PositivityVerdict::NotPositive
    );
}

#[test]
fn negated_positive_maps_are_flagged() {
    let m = QubitMap::new(-Matrix4::identity()).unwrap();
    assert_eq!(is_positive(&m).verdict, PositivityVerdict::NegativePositive);
}
