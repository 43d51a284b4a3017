//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line and
//! fails if its criterion is not met.

mod common;

use std::time::{Duration, Instant};

use common::*;
use qmarkov::dynamics::seeded_states;
use qmarkov::operator::{identity, ket_bra, sigma_minus};
use qmarkov::*;
use rand::Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn verdict(id: u32, what: &str, outcome: Outcome) {
    match outcome {
        Ok(detail) => println!("criterion {id}: PASS  {what}  [{detail}]"),
        Err(why) => {
            println!("criterion {id}: FAIL  {what}  [{why}]");
            panic!("criterion {id} failed: {why}");
        }
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn criterion_1_oscillator_generator_identity() {
    let run = || -> Outcome {
        let start = Instant::now();
        let m = model("oscillator40.json");
        let v = operator("number40.json");
        let g = generator_heisenberg(&m, v.matrix()).map_err(|e| e.to_string())?;
        let expected = v.matrix() * real(-0.75) + identity::<f64>(40) * real(0.25);
        let err = max_abs(&(g - expected).view((0, 0), (38, 38)).into_owned());
        let elapsed = start.elapsed();
        ensure(err <= 1e-10, || format!("interior max error {err:e}"))?;
        ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
        Ok(format!("max error {err:.1e}, {elapsed:.2?}"))
    };
    verdict(1, "G(a^dag a) = -0.75 a^dag a + 0.25 I on indices < 38, N = 40", run());
}

#[test]
fn criterion_2_oscillator_stationary_mean() {
    let run = || -> Outcome {
        let start = Instant::now();
        let m = model("oscillator60.json");
        let v = operator("number60.json");
        let rep = steady_states(&m, &Default::default()).map_err(|e| e.to_string())?;
        ensure(rep.states.len() == 1, || format!("{} stationary states", rep.states.len()))?;
        let mean = v.expectation(&rep.states[0].rho);
        ensure((mean - 1.0 / 3.0).abs() <= 1e-6, || format!("stationary mean {mean}"))?;

        let opts = EvolveOptions {
            method: Method::RkAdaptive,
            samples: 20,
            ..EvolveOptions::default()
        };
        let traj = evolve(&m, &state("vacuum60.json"), 40.0, &opts).map_err(|e| e.to_string())?;
        let late = v.expectation(traj.final_state());
        ensure((late - mean).abs() <= 1e-5, || format!("integrated mean {late} vs {mean}"))?;
        let elapsed = start.elapsed();
        ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
        Ok(format!("stationary {mean:.12}, integrated {late:.12}, {elapsed:.2?}"))
    };
    verdict(2, "N = 60 stationary <a^dag a> = 1/3 and long-time integration agrees", run());
}

#[test]
fn criterion_3_two_level_model() {
    let run = || -> Outcome {
        let m = model("twolevel.json");
        let e = |e: qmarkov::Error| e.to_string();
        let rep = steady_states(&m, &Default::default()).map_err(e)?;
        ensure(rep.states.len() == 1, || format!("{} stationary states", rep.states.len()))?;
        let half = DensityMatrix64::maximally_mixed(2).map_err(e)?;
        let dist = rep.states[0].rho.trace_distance(&half).map_err(e)?;
        ensure(dist <= 1e-10, || format!("trace distance to I/2 {dist:e}"))?;
        for i in 0..2 {
            let p = ket_bra::<f64>(i, i, 2).map_err(e)?;
            let c = connectivity_check(&m, &p, 1e-9).map_err(e)?;
            ensure(c.connected && (c.value - 1.0).abs() <= 1e-12, || format!("|{i}><{i}| value {}", c.value))?;
        }
        let u = uniqueness_check(&m, 1e-9, 8).map_err(e)?;
        ensure(u.verdict == Uniqueness::Unique, || format!("uniqueness {}", u.verdict.as_str()))?;
        let f = faithfulness_check(&rep.states[0].rho, 1e-9).map_err(e)?;
        ensure(f.faithful, || "stationary state not faithful".into())?;

        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().display().to_string();
        let run = cli(&["analyze", "--model", &fx("twolevel.json"), "--out", &out]);
        ensure(run.status.code() == Some(0), || format!("analyze exit {:?}", run.status.code()))?;
        Ok(format!("trace distance {dist:.1e}, analyze exit 0"))
    };
    verdict(3, "two-level model: I/2, connected coordinates, unique, faithful", run());
}

#[test]
fn criterion_4_two_qubit_model() {
    let run = || -> Outcome {
        let e = |e: qmarkov::Error| e.to_string();
        let v = operator("twoqubit_v.json");
        let w = operator("twoqubit_w.json");
        let bare = model("twoqubit_noh.json");
        let g = generator_heisenberg(&bare, v.matrix()).map_err(e)?;
        let expected = HermitianOperator64::from_real_diagonal(&[-1.0, -1.0, 0.0, 0.0]).unwrap();
        let err = max_abs(&(&g - expected.matrix()));
        ensure(err <= 1e-12, || format!("G(V) without H off by {err:e}"))?;

        let m = model("twoqubit.json");
        let g = generator_heisenberg(&m, v.matrix()).map_err(e)?;
        let mut expected = ComplexMatrix64::zeros(4, 4);
        expected.view_mut((0, 0), (2, 2)).fill(real(-1.0));
        let err_h = max_abs(&(&g - &expected));
        ensure(err_h <= 1e-12, || format!("G(V) with H off by {err_h:e}"))?;

        let cert = check_lasalle_pair(&m, &v, &w, &LaSalleVariant::BoundedGenerator, &CheckOptions::default()).map_err(e)?;
        ensure(cert.verdict == Verdict::Holds, || format!("LaSalle pair {}", cert.verdict))?;

        let opts = EvolveOptions {
            method: Method::ExpmFixed,
            samples: 100,
            ..EvolveOptions::default()
        };
        let mut worst_w = 0.0f64;
        let mut worst_block = 0.0f64;
        for rho0 in seeded_states::<f64>(4, 10, 2024).map_err(e)? {
            let traj = evolve(&m, &rho0, 50.0, &opts).map_err(e)?;
            let f = traj.final_state();
            worst_w = worst_w.max(w.expectation(f));
            let r = f.matrix();
            worst_block = worst_block.max((r[(0, 0)] + r[(0, 1)] + r[(1, 0)] + r[(1, 1)]).re);
        }
        ensure(worst_w <= 1e-4, || format!("<W>(50) = {worst_w:e}"))?;
        ensure(worst_block <= 1e-4, || format!("block sum {worst_block:e}"))?;

        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().display().to_string();
        let args = [
            "check-lasalle", "--model", &fx("twoqubit.json"), "--v", &fx("twoqubit_v.json"),
            "--w", &fx("twoqubit_w.json"), "--theorem", "5", "--out", &out,
        ];
        let run = cli(&args);
        ensure(run.status.code() == Some(0), || format!("check-lasalle exit {:?}", run.status.code()))?;
        Ok(format!(
            "G(V) errors {err:.1e}/{err_h:.1e}, max <W>(50) {worst_w:.1e}, max block {worst_block:.1e}"
        ))
    };
    verdict(4, "two-qubit model: G(V) blocks, LaSalle pair, companion decays", run());
}

#[test]
fn criterion_5_ground_space_coupling() {
    let run = || -> Outcome {
        let e = |e: qmarkov::Error| e.to_string();
        let v = operator("qubit7_v.json");
        let g = solve_ground_coupling(&v, 1e-9).map_err(e)?;
        let sm = sigma_minus::<f64>();
        ensure(max_abs(&(&g.m - &sm)) <= 1e-12, || format!("M = {}", g.m))?;
        ensure(max_abs(&(&g.default_l - &sm)) <= 1e-12, || format!("L = {}", g.default_l))?;
        let m = ModelSpec64::dissipative(vec![g.default_l.clone()]).map_err(e)?;
        let d = dissipator(&m, v.matrix()).map_err(e)?;
        let mut expected = ComplexMatrix64::zeros(2, 2);
        expected[(0, 0)] = real(-1.0);
        let err = max_abs(&(d - expected));
        ensure(err <= 1e-12, || format!("dissipator of V off by {err:e}"))?;
        let rep = check_ground_convergence(&m, &v, 1e-9).map_err(e)?;
        ensure(rep.verdict == Verdict::Holds, || format!("ground convergence {}", rep.verdict))?;
        let traj = evolve(&m, &state("excited.json"), 20.0, &EvolveOptions::default()).map_err(e)?;
        let fidelity = state("ground.json").matrix().component_mul(traj.final_state().matrix()).sum().re;
        ensure(fidelity >= 1.0 - 1e-6, || format!("fidelity {fidelity}"))?;
        Ok(format!("dissipator error {err:.1e}, fidelity 1 - {:.1e}", 1.0 - fidelity))
    };
    verdict(5, "ground-space coupling for V = diag(1, 0)", run());
}

#[test]
fn criterion_6_tail_bound() {
    let run = || -> Outcome {
        let e = |e: qmarkov::Error| e.to_string();
        let v = operator("number40.json");
        let n = v.dim();
        let sd = spectral_decompose(&v, 1e-9).map_err(e)?;
        let tb = tightness_tail_bound(&sd, 2.0, 0.1).map_err(e)?;
        ensure(tb.m == Some(20), || format!("m = {:?}", tb.m))?;
        let p = tb.projection.ok_or("no projection")?;
        let vacuum = ket_bra::<f64>(0, 0, n).map_err(e)?;
        let mut r = rng(6);
        let mut worst = f64::INFINITY;
        for k in 0..100 {
            let rho = if k % 2 == 0 {
                // random state pulled towards the vacuum until tr(rho V) <= 2
                let raw = density(n, &mut r);
                let t = (2.0 * r.random::<f64>() / v.expectation(&raw)).min(1.0);
                raw.matrix() * real(t) + &vacuum * real(1.0 - t)
            } else {
                // vacuum plus one excited level at the largest weight allowed
                let level = r.random_range(1..n);
                let w = (2.0 / level as f64).min(1.0) * r.random::<f64>();
                ket_bra::<f64>(level, level, n).map_err(e)? * real(w) + &vacuum * real(1.0 - w)
            };
            let rho = DensityMatrix64::new(rho, 1e-9).map_err(e)?;
            let mean = v.expectation(&rho);
            ensure(mean <= 2.0 + 1e-12, || format!("sample {k} has tr(rho V) = {mean}"))?;
            let mass = rho.expect(&p).re;
            ensure(mass > 0.9, || format!("sample {k}: tr(rho P) = {mass}"))?;
            worst = worst.min(mass);
        }
        Ok(format!("m = 20, smallest captured mass {worst:.6}"))
    };
    verdict(6, "tail bound for V = a^dag a, c = 2, eps = 0.1", run());
}

#[test]
fn criterion_7_property_suites() {
    let run = || -> Outcome {
        let e = |e: qmarkov::Error| e.to_string();
        let mut r = rng(7);
        let mut worst = [0.0f64; 5];
        for _ in 0..100 {
            let n = r.random_range(2..=5);
            let k = r.random_range(1..=3);
            let m = random_model(n, k, &mut r);
            let x = gaussian(n, &mut r);
            let rho = density(n, &mut r);
            let h = m.hamiltonian().matrix();

            worst[0] = worst[0].max(max_abs(&generator_heisenberg(&m, &identity(n)).map_err(e)?));
            worst[1] = worst[1].max(generator_schroedinger(&m, &rho).map_err(e)?.trace().norm());
            let d = dissipation_functional(&m, &x).map_err(e)?;
            let mut squares = ComplexMatrix64::zeros(n, n);
            for l in m.couplings() {
                let c = comm(&x, l);
                squares += c.adjoint() * c;
            }
            worst[2] = worst[2].max(max_abs(&(&d - squares)));
            ensure(min_eig(&d) >= -1e-10, || format!("D(X) has eigenvalue {}", min_eig(&d)))?;
            let gx = generator_heisenberg(&m, &x).map_err(e)?;
            worst[3] = worst[3].max(max_abs(&(&gx - heisenberg_oracle(h, m.couplings(), &x))));
            let gs = generator_schroedinger(&m, &rho).map_err(e)?;
            worst[3] = worst[3].max(max_abs(&(&gs - schroedinger_oracle(h, m.couplings(), rho.matrix()))));
            let lhs = (gx * rho.matrix()).trace();
            let rhs = (&x * gs).trace();
            worst[4] = worst[4].max((lhs - rhs).norm());
        }
        ensure(worst[0] <= 1e-12, || format!("G(I) = {:e}", worst[0]))?;
        ensure(worst[1] <= 1e-12, || format!("tr G_*(rho) = {:e}", worst[1]))?;
        ensure(worst[2] <= 1e-10, || format!("D(X) vs sum of squares {:e}", worst[2]))?;
        ensure(worst[3] <= 1e-10, || format!("generator vs written-out formula {:e}", worst[3]))?;
        ensure(worst[4] <= 1e-10, || format!("duality {:e}", worst[4]))?;

        // integrators
        let mut agree = 0.0f64;
        let mut trace_dev = 0.0f64;
        let mut min_eigen = f64::INFINITY;
        for _ in 0..10 {
            let n = r.random_range(2..=4);
            let m = random_model(n, 2, &mut r);
            let rho0 = density(n, &mut r);
            let run = |method| {
                let opts = EvolveOptions { method, samples: 40, ..EvolveOptions::default() };
                evolve(&m, &rho0, 3.0, &opts)
            };
            let a = run(Method::ExpmFixed).map_err(e)?;
            let b = run(Method::RkAdaptive).map_err(e)?;
            for (sa, sb) in a.states.iter().zip(&b.states) {
                agree = agree.max(max_abs(&(sa.matrix() - sb.matrix())));
                for s in [sa, sb] {
                    trace_dev = trace_dev.max((s.matrix().trace().re - 1.0).abs());
                    min_eigen = min_eigen.min(min_eig(s.matrix()));
                }
            }
        }
        ensure(agree <= 1e-7, || format!("expm vs adaptive {agree:e}"))?;
        ensure(trace_dev <= 1e-12, || format!("trace drift {trace_dev:e}"))?;
        ensure(min_eigen >= -1e-8, || format!("negative eigenvalue {min_eigen:e}"))?;

        // mean bound on fixtures whose weak Lyapunov certificate holds
        let certified = [
            ("oscillator8.json", "number8.json", 0.75, 0.25),
            ("qubit7.json", "qubit7_v.json", 1.0, 0.0),
        ];
        for (mf, vf, c, d) in certified {
            let m = model(mf);
            let v = operator(vf);
            let cert = check_weak_lyapunov(&m, &v, c, d, &CheckOptions::default()).map_err(e)?;
            ensure(cert.verdict == Verdict::Holds, || format!("{mf}: weak certificate {}", cert.verdict))?;
            for rho0 in seeded_states::<f64>(m.dim(), 3, 11).map_err(e)? {
                let traj = evolve(&m, &rho0, 10.0, &EvolveOptions::default()).map_err(e)?;
                let b = mean_bound_check(&traj, &v, c, d).map_err(e)?;
                ensure(b.verdict == Verdict::Holds, || format!("{mf}: mean bound off by {:e}", b.max_violation))?;
            }
        }
        Ok(format!(
            "100 pairs, max D error {:.1e}, duality {:.1e}, expm/adaptive {agree:.1e}",
            worst[2], worst[4]
        ))
    };
    verdict(7, "generator, dissipation, duality, integrator and mean-bound properties", run());
}

#[test]
fn criterion_8_cli_determinism() {
    let run = || -> Outcome {
        let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
        let runs: [&[&str]; 2] = [
            &["probe-invariant-set", "--model", &fx("qubit7.json"), "--v", &fx("qubit7_v.json"),
              "--samples", "8", "--t-final", "20", "--seed", "42"],
            &["simulate", "--model", &fx("twoqubit.json"), "--v", &fx("twoqubit_v.json"),
              "--w", &fx("twoqubit_w.json"), "--t-final", "10", "--seed", "42", "--format", "csv"],
        ];
        let mut compared = 0;
        for args in runs {
            let mut reports = Vec::new();
            for (k, dir) in dirs.iter().enumerate() {
                let out = dir.path().join(k.to_string()).join(args[0]);
                let mut full = args.to_vec();
                let out_s = out.display().to_string();
                full.extend(["--out", &out_s]);
                let run = cli(&full);
                ensure(run.status.code() == Some(0), || {
                    format!("{} exit {:?}: {}", args[0], run.status.code(), String::from_utf8_lossy(&run.stderr))
                })?;
                reports.push(out);
            }
            let a = std::fs::read_to_string(reports[0].join("report.json")).unwrap();
            let b = std::fs::read_to_string(reports[1].join("report.json")).unwrap();
            ensure(without_metadata(&a) == without_metadata(&b), || format!("{} reports differ", args[0]))?;
            compared += 1;
            for f in std::fs::read_dir(&reports[0]).unwrap() {
                let name = f.unwrap().file_name();
                if name != "report.json" {
                    let x = std::fs::read(reports[0].join(&name)).unwrap();
                    let y = std::fs::read(reports[1].join(&name)).unwrap();
                    ensure(x == y, || format!("{name:?} differs"))?;
                    compared += 1;
                }
            }
        }
        Ok(format!("{compared} files byte-identical"))
    };
    verdict(8, "identical inputs and seed give byte-identical reports", run());
}
