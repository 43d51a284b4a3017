mod common;

use common::*;
use proptest::prelude::*;
use qmarkov::generator::{apply_schroedinger, vectorize};
use qmarkov::invariant::{ProjectionFamily, SteadyStateOptions};
use qmarkov::lyapunov::SearchOptions;
use qmarkov::operator::{identity, psd_check};
use qmarkov::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(100))]

    #[test]
    fn generator_matches_written_out_formula(n in 2usize..=4, k in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = model(n, k, &mut r);
        let x = gaussian(n, &mut r);
        let g = generator_heisenberg(&m, &x).unwrap();
        let oracle = heisenberg_oracle(m.hamiltonian().matrix(), m.couplings(), &x);
        prop_assert!(max_abs(&(g - oracle)) <= 1e-12);
        let s = apply_schroedinger(&m, &x).unwrap();
        let oracle = schroedinger_oracle(m.hamiltonian().matrix(), m.couplings(), &x);
        prop_assert!(max_abs(&(s - oracle)) <= 1e-12);
    }

    #[test]
    fn generator_is_linear(n in 2usize..=4, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0, ai in -3.0f64..3.0) {
        let mut r = rng(seed);
        let m = model(n, 2, &mut r);
        let x = gaussian(n, &mut r);
        let y = gaussian(n, &mut r);
        let (ca, cb) = (C::new(a, ai), C::new(b, 0.0));
        let lhs = generator_heisenberg(&m, &(&x * ca + &y * cb)).unwrap();
        let rhs = generator_heisenberg(&m, &x).unwrap() * ca + generator_heisenberg(&m, &y).unwrap() * cb;
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-10);
    }

    #[test]
    fn identity_is_annihilated_and_trace_preserved(n in 2usize..=5, k in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = model(n, k, &mut r);
        prop_assert!(max_abs(&generator_heisenberg(&m, &identity(n)).unwrap()) <= 1e-12);
        let rho = density(n, &mut r);
        let tr = generator_schroedinger(&m, &rho).unwrap().trace();
        prop_assert!(tr.norm() <= 1e-12);
    }

    #[test]
    fn dissipation_functional_is_positive_and_a_sum_of_squares(n in 2usize..=4, k in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = model(n, k, &mut r);
        let x = gaussian(n, &mut r);
        let d = dissipation_functional(&m, &x).unwrap();
        let mut squares = ComplexMatrix64::zeros(n, n);
        for l in m.couplings() {
            let cm = comm(&x, l);
            squares += cm.adjoint() * &cm;
        }
        prop_assert!(max_abs(&(&d - &squares)) <= 1e-10);
        let h = HermitianOperator64::hermitian_part(&d).unwrap();
        prop_assert!(psd_check(&h, 1e-10).unwrap().holds());
    }

    #[test]
    fn heisenberg_and_schroedinger_are_dual(n in 2usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = model(n, 2, &mut r);
        let x = gaussian(n, &mut r);
        let rho = density(n, &mut r);
        let lhs = (generator_heisenberg(&m, &x).unwrap() * rho.matrix()).trace();
        let rhs = (&x * generator_schroedinger(&m, &rho).unwrap()).trace();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn compressed_generator_of_projection(n in 2usize..=5, seed in any::<u64>(), rank_frac in 0.0f64..1.0) {
        let mut r = rng(seed);
        let m = model(n, 2, &mut r);
        let rank = 1 + ((n - 1) as f64 * rank_frac) as usize;
        let p = projection(n, rank.min(n - 1), &mut r);
        let lhs = &p * generator_heisenberg(&m, &p).unwrap() * &p;
        let q = identity::<f64>(n) - &p;
        let mut rhs = ComplexMatrix64::zeros(n, n);
        for l in m.couplings() {
            rhs -= &p * l.adjoint() * &q * l * &p;
        }
        prop_assert!(max_abs(&(&lhs - &rhs)) <= 1e-10);
        let dp = dissipation_functional(&m, &p).unwrap();
        prop_assert!(max_abs(&(lhs + &p * dp * &p)) <= 1e-10);
    }

    #[test]
    fn liouvillian_agrees_with_generators(n in 2usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = model(n, 2, &mut r);
        let x = gaussian(n, &mut r);
        let heis = liouvillian(&m, Side::Heisenberg, 200).unwrap();
        let oracle = heisenberg_oracle(m.hamiltonian().matrix(), m.couplings(), &x);
        prop_assert!(max_abs(&(heis.apply(&x) - oracle)) <= 1e-12);
        let schr = liouvillian(&m, Side::Schroedinger, 200).unwrap();
        let oracle = schroedinger_oracle(m.hamiltonian().matrix(), m.couplings(), &x);
        prop_assert!(max_abs(&(schr.apply(&x) - oracle)) <= 1e-12);
        let id = vectorize(&identity::<f64>(n));
        let out = heis.sparse().mul_vec(&id);
        prop_assert!(out.iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn spectral_decomposition_reconstructs(n in 1usize..=6, seed in any::<u64>(), degenerate in any::<bool>()) {
        let mut r = rng(seed);
        let a = if degenerate {
            // repeated eigenvalues through a rotated diagonal
            let q = gaussian(n, &mut r).qr().q();
            let d: Vec<f64> = (0..n).map(|i| (i / 2) as f64).collect();
            let dm = ComplexMatrix64::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|&x| C::new(x, 0.0))));
            HermitianOperator64::hermitian_part(&(&q * dm * q.adjoint())).unwrap()
        } else {
            hermitian(n, &mut r)
        };
        let sd = spectral_decompose(&a, 1e-9).unwrap();
        let scale = sd.spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let err = max_abs(&(sd.reconstruct() - a.matrix()));
        prop_assert!(err <= 10.0 * n as f64 * f64::EPSILON * scale);
        prop_assert_eq!(sd.multiplicities.iter().sum::<usize>(), n);
        for p in &sd.projections {
            prop_assert!(max_abs(&(p * p - p)) <= 1e-12);
        }
        if degenerate {
            prop_assert_eq!(sd.eigenvalues.len(), n.div_ceil(2));
        }
    }

    #[test]
    fn shifted_operator_is_positive(n in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = hermitian(n, &mut r);
        let lam = min_eig(a.matrix());
        prop_assert!(psd_check(&a.shifted(lam.abs() + 1.0), 0.0).unwrap().holds());
    }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn weak_lyapunov_is_monotone_in_constants(
        n in 2usize..=4,
        seed in any::<u64>(),
        c in 0.05f64..2.0,
        c_frac in 0.01f64..1.0,
        d_extra in 0.0f64..3.0,
    ) {
        let mut r = rng(seed);
        let m = model(n, 2, &mut r);
        let v = psd(n, &mut r);
        // smallest d making -G(V) - cV + dI >= 0, plus a margin
        let g = generator_heisenberg(&m, v.matrix()).unwrap();
        let d = (-min_eig(&(-g - v.matrix() * C::new(c, 0.0)))).max(0.0) + 1e-6;
        let opts = CheckOptions::default();
        let cert = check_weak_lyapunov(&m, &v, c, d, &opts).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Holds);
        prop_assert_eq!(cert.reverify(&m).unwrap(), Verdict::Holds);
        let weaker = check_weak_lyapunov(&m, &v, c * c_frac, d + d_extra, &opts).unwrap();
        prop_assert_eq!(weaker.verdict, Verdict::Holds);
        if d > 1e-3 {
            let tighter = check_weak_lyapunov(&m, &v, c, d - 1e-3, &opts).unwrap();
            prop_assert_eq!(tighter.verdict, Verdict::Fails);
            prop_assert_eq!(tighter.reverify(&m).unwrap(), Verdict::Fails);
        }
    }

    #[test]
    fn search_results_are_certified(n in 2usize..=3, seed in any::<u64>(), c in 0.1f64..1.5, d in 0.0f64..2.0) {
        let mut r = rng(seed);
        let m = model(n, 2, &mut r);
        let basis = vec![HermitianOperator64::identity(n).unwrap(), psd(n, &mut r), hermitian(n, &mut r)];
        let opts = SearchOptions { max_iter: 150, restarts: 1, ..SearchOptions::default() };
        if let Some(out) = lyapunov_search(&m, &basis, c, d, &opts).unwrap() {
            let again = check_weak_lyapunov(&m, &out.v, c, d, &CheckOptions::default()).unwrap();
            prop_assert_eq!(again.verdict, Verdict::Holds);
        }
    }

    #[test]
    fn steady_states_are_stationary_with_subharmonic_support(n in 2usize..=4, k in 1usize..=2, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = model(n, k, &mut r);
        let opts = SteadyStateOptions::default();
        let rep = steady_states(&m, &opts).unwrap();
        for s in &rep.states {
            let res = max_abs(&generator_schroedinger(&m, &s.rho).unwrap());
            prop_assert!(res <= 10.0 * opts.tol * rep.liouvillian_norm);
            let f = faithfulness_check(&s.rho, 1e-9).unwrap();
            let sub = subharmonicity_check(&m, &f.support, 1e-9).unwrap();
            prop_assert_eq!(sub.verdict, Verdict::Holds);
        }
        let u = uniqueness_check(&m, 1e-9, 8).unwrap();
        prop_assert_eq!(u.null_dimension, rep.null_dimension);
        if u.verdict == Uniqueness::Unique {
            prop_assert_eq!(rep.null_dimension, 1);
        }
        if rep.null_dimension == 1 {
            prop_assert!(u.verdict != Uniqueness::NotUnique);
        }
        // generic couplings connect every coordinate projection, so the
        // invariant state is unique and faithful
        let scan = connectivity_scan(&m, &ProjectionFamily::Coordinate, 1e-9).unwrap();
        if scan.all_connected && u.verdict == Uniqueness::Unique {
            prop_assert!(rep.states[0].faithful);
        }
    }

    #[test]
    fn tail_projection_captures_low_energy_states(seed in any::<u64>()) {
        let n = 30;
        let v = number(n);
        let sd = spectral_decompose(&v, 1e-9).unwrap();
        let tb = tightness_tail_bound(&sd, 2.0, 0.1).unwrap();
        prop_assert_eq!(tb.m, Some(20));
        let p = tb.projection.unwrap();
        let mut r = rng(seed);
        use rand::Rng;
        for _ in 0..4 {
            // mix a random state with the vacuum until tr(rho V) <= 2
            let raw = density(n, &mut r);
            let e = raw.expect(v.matrix()).re;
            let t = (2.0 * r.random::<f64>() / e).min(1.0);
            let mixed = raw.matrix() * C::new(t, 0.0) + qmarkov::operator::ket_bra::<f64>(0, 0, n).unwrap() * C::new(1.0 - t, 0.0);
            let rho = DensityMatrix64::new(mixed, 1e-9).unwrap();
            prop_assert!(rho.expect(v.matrix()).re <= 2.0 + 1e-12);
            prop_assert!(rho.expect(&p).re > 0.9);
        }
    }
}
