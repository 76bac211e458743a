use proptest::prelude::*;
use qfi_core::channels::{finite_time_average, twirl_operator};
use qfi_core::hilbert::max_abs;
use qfi_core::metrology::{
    qfi_anticommutator_form, qfi_covariance_form, qfi_from_eigenbasis, qfi_mixed, qfi_twirled_pure,
    qfi_unitary, sld_residuals, sld_twirled,
};
use qfi_core::probeopt::{optimize_probe, EnergyConstraint, OptProblem};
use qfi_core::sampling::{
    random_density, random_hermitian, random_scenario, random_state, random_unitary,
};
use qfi_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_associative(seed: u64, a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut r = rng(seed);
        let (x, y, z) = (
            random_hermitian(&mut r, a, 1.0),
            random_hermitian(&mut r, b, 1.0),
            random_hermitian(&mut r, c, 1.0),
        );
        let left = tensor(&tensor(&x, &y), &z);
        let right = tensor(&x, &tensor(&y, &z));
        prop_assert!(max_abs(&(left.matrix() - right.matrix())) < 1e-14);
    }

    #[test]
    fn eigh_reconstructs(seed: u64, dim in 1usize..=64) {
        let h = random_hermitian(&mut rng(seed), dim, 3.0);
        let e = eigh(&h).unwrap();
        let scale = 1.0 + max_abs(h.matrix());
        prop_assert!(max_abs(&(e.reconstruct() - h.matrix())) <= 1e-10 * scale);
        let gram = e.vectors.adjoint() * &e.vectors;
        prop_assert!(max_abs(&(gram - CMatrix::identity(dim, dim))) <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_expectation_is_one(seed: u64, dim in 1usize..=32) {
        let psi = random_state(&mut rng(seed), dim);
        let id = HermitianOperator::identity(dim);
        prop_assert!((expectation(&id, &psi).unwrap() - 1.0).abs() < 1e-10);
        let rho = random_density(&mut rng(seed ^ 1), dim);
        prop_assert!((expectation(&id, &rho).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn covariance_is_symmetric_and_bilinear(seed: u64, dim in 1usize..=16, s in -3.0f64..3.0) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, dim, 1.0);
        let b = random_hermitian(&mut r, dim, 1.0);
        let c = random_hermitian(&mut r, dim, 1.0);
        let psi = random_state(&mut r, dim);
        let ab = sym_covariance(&a, &b, &psi).unwrap();
        prop_assert!((ab - sym_covariance(&b, &a, &psi).unwrap()).abs() < 1e-12);
        let scaled = sym_covariance(&a.scaled(s), &b, &psi).unwrap();
        prop_assert!((scaled - s * ab).abs() < 1e-11);
        let sum = sym_covariance(&a.add(&c).unwrap(), &b, &psi).unwrap();
        prop_assert!((sum - ab - sym_covariance(&c, &b, &psi).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn twirl_is_cptp_idempotent_and_group_invariant(seed: u64, dim in 1usize..=32, shift in -5.0f64..5.0) {
        let mut r = rng(seed);
        let s = random_scenario(&mut r, dim, seed % 2 == 0);
        let rho = random_density(&mut r, dim);
        let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
        let out = twirl(&rho, &p).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.min_eigenvalue().unwrap() >= -1e-10);
        let again = twirl(&out, &p).unwrap();
        prop_assert!(max_abs(&(again.matrix() - out.matrix())) < 1e-10);

        let u = eigh(s.g()).unwrap();
        let rotated = {
            let phases = CVector::from_iterator(dim, u.values.iter().map(|&e| C64::from_polar(1.0, -e * shift)));
            let v = &u.vectors * CMatrix::from_diagonal(&phases) * u.vectors.adjoint();
            DensityMatrix::new(&v * rho.matrix() * v.adjoint()).unwrap()
        };
        let out_rot = twirl(&rotated, &p).unwrap();
        prop_assert!(max_abs(&(out_rot.matrix() - out.matrix())) < 1e-10);
    }

    #[test]
    fn cross_formulas_agree(seed: u64, dim in 1usize..=24) {
        let s = random_scenario(&mut rng(seed), dim, seed % 3 == 0);
        let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
        let bob = qfi_twirled_pure(&s, &p).unwrap();
        let alice = qfi_unitary(s.fiducial(), s.k()).unwrap();
        let (rb, drb) = s.twirled(&p).unwrap();
        let forms = [
            qfi_anticommutator_form(&s, &p).unwrap(),
            qfi_covariance_form(&s, &p).unwrap(),
            qfi_from_eigenbasis(&s, p.blocks()).unwrap(),
            qfi_mixed(&rb, &drb).unwrap(),
        ];
        for f in forms {
            prop_assert!((f - bob).abs() <= 1e-7, "{f} vs {bob}");
        }
        prop_assert!(bob >= -1e-9 && bob <= alice + 1e-9);
    }

    #[test]
    fn overlap_with_derivative_is_imaginary(seed: u64, dim in 1usize..=24, lambda in -10.0f64..10.0) {
        let s = random_scenario(&mut rng(seed), dim, false).with_lambda(lambda);
        let e = s.encode().unwrap();
        prop_assert!(e.psi.inner(&e.dpsi).re.abs() <= 1e-10);
    }

    #[test]
    fn derivative_matches_finite_difference(seed: u64, dim in 1usize..=12) {
        let s = random_scenario(&mut rng(seed), dim, false);
        let h = 1e-5;
        let plus = s.state_at(s.lambda() + h).unwrap().rho();
        let minus = s.state_at(s.lambda() - h).unwrap().rho();
        let fd = (plus.matrix() - minus.matrix()) / c64(2.0 * h, 0.0);
        prop_assert!(max_abs(&(fd - s.drho().unwrap())) < 1e-6);
    }

    #[test]
    fn refinement_never_increases_bob(seed: u64, dim in 1usize..=16) {
        let s = random_scenario(&mut rng(seed), dim, seed % 2 == 1);
        let coarse = qfi_twirled_pure(&s, &ProjectorSet::identity(dim)).unwrap();
        let fine = qfi_twirled_pure(&s, &s.projectors(DEFAULT_CLUSTER_TOL).unwrap()).unwrap();
        prop_assert!(fine <= coarse + 1e-9);
    }

    #[test]
    fn commuting_noise_is_lambda_independent(seed: u64, dim in 2usize..=12) {
        let mut r = rng(seed);
        let u = random_unitary(&mut r, dim);
        let diag = |vals: Vec<f64>| {
            let d = CVector::from_iterator(dim, vals.into_iter().map(|x| c64(x, 0.0)));
            HermitianOperator::new(&u * CMatrix::from_diagonal(&d) * u.adjoint()).unwrap()
        };
        let g = diag((0..dim).map(|i| (i / 2) as f64).collect());
        let k = diag((0..dim).map(|i| ((i * 7919) % 5) as f64 * 0.3).collect());
        let s = Scenario::new(random_state(&mut r, dim), k, g, 0.0).unwrap();
        let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
        let at0 = qfi_twirled_pure(&s, &p).unwrap();
        for i in 0..20 {
            let l = -std::f64::consts::PI + 0.3 * i as f64;
            prop_assert!((qfi_twirled_pure(&s.with_lambda(l), &p).unwrap() - at0).abs() < 1e-9);
        }
    }

    #[test]
    fn twirled_sld_solves_defining_equation(seed: u64, dim in 1usize..=16) {
        let s = random_scenario(&mut rng(seed), dim, seed % 2 == 0);
        let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
        let bob = qfi_twirled_pure(&s, &p).unwrap();
        let (rb, drb) = s.twirled(&p).unwrap();
        let l = sld_twirled(&s, &p).unwrap();
        let res = sld_residuals(&rb, &drb, &l, bob).unwrap();
        prop_assert!(res.within(1e-8), "{res:?}");
    }

    #[test]
    fn twirl_operator_is_linear(seed: u64, dim in 1usize..=12, a in -2.0f64..2.0) {
        let mut r = rng(seed);
        let s = random_scenario(&mut r, dim, true);
        let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
        let x = random_hermitian(&mut r, dim, 1.0);
        let y = random_hermitian(&mut r, dim, 1.0);
        let combo = x.matrix() * c64(a, 0.0) + y.matrix();
        let lhs = twirl_operator(&combo, &p).unwrap();
        let rhs = twirl_operator(x.matrix(), &p).unwrap() * c64(a, 0.0) + twirl_operator(y.matrix(), &p).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimizer_is_feasible_monotone_and_reproducible(seed: u64, n in 3usize..=8, frac in 0.1f64..0.8) {
        let energy = frac * (n - 1) as f64;
        let mut problem = OptProblem::new(n, EnergyConstraint::FixedMeanEnergy(energy));
        problem.rng_seed = seed;
        problem.seeds = 2;
        let a = optimize_probe(&problem).unwrap();
        let q: Vec<f64> = a.amplitudes.iter().map(|x| x * x).collect();
        prop_assert!(q.iter().all(|&x| x >= 0.0));
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!((a.mean_energy - energy).abs() < 1e-9);
        for w in a.trace.windows(2) {
            if w[0].start == w[1].start {
                prop_assert!(w[1].qfi >= w[0].qfi - 1e-12);
            }
        }
        prop_assert_eq!(a, optimize_probe(&problem).unwrap());
    }
}

#[test]
fn finite_time_average_approaches_twirl() {
    let mut r = rng(11);
    let mut previous = f64::INFINITY;
    let s = random_scenario(&mut r, 10, false);
    let rho = random_density(&mut r, 10);
    let target = twirl(&rho, &s.projectors(DEFAULT_CLUSTER_TOL).unwrap()).unwrap();
    for t in [10.0, 100.0, 1000.0] {
        let avg = finite_time_average(&rho, s.g(), t, (100.0 * t) as usize).unwrap();
        let err = max_abs(&(avg.matrix() - target.matrix()));
        assert!(err <= previous * 1.05 + 1e-12);
        assert!(err <= 2.0 / (0.25 * t));
        previous = err;
    }
}
