//! One function per subcommand. Each fills a [`Report`]; writing it is left
//! to the caller.

use std::path::Path;

use qmarkov::dynamics::{seeded_states, DiagnosticsOptions, ProbeOptions};
use qmarkov::invariant::{ProjectionFamily, ScanItem, SteadyStateOptions};
use qmarkov::synthesis::CouplingPair;
use qmarkov::{
    check_ground_convergence, check_lasalle_pair, check_lyapunov, check_weak_lyapunov, coercivity_assess,
    connectivity_scan, evolve, expectation_series, faithfulness_check, invariant_set_probe, lasalle_diagnostics,
    mean_bound_check, solve_ground_coupling, steady_states, subharmonicity_check, synthesize_coupling,
    uniqueness_check, verify_synthesis, CheckOptions, DensityMatrix64, EvolveOptions, HermitianOperator64,
    LaSalleVariant, Method, ModelSpec64, SynthesisSpec, Uniqueness, Verdict, C64,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;
use crate::format::{self, ModelFile};
use crate::output::write_atomic;
use crate::report::{self, certificate, matrix, num, Check, Report, SeriesEntry};
use crate::series::{emit_series, Series, SeriesFormat};

/// Word length used when growing the algebra generated by the model.
const MAX_PRODUCTS: usize = 8;

pub struct Context<'a> {
    pub global: &'a Global,
}

impl Context<'_> {
    fn check_opts(&self, interior: Option<usize>) -> CheckOptions<f64> {
        let mut o = CheckOptions::with_tol(self.global.tol);
        o.interior = interior;
        o
    }

    fn write_text(&self, report: &mut Report, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.global.out.join(name);
        write_atomic(&path, text.as_bytes()).map_err(|source| CliError::Write { path, source })?;
        report.outputs.push(name.to_string());
        Ok(())
    }

    fn emit(&self, report: &mut Report, name: &str, times: &[f64], values: &[f64]) -> Result<(), CliError> {
        let series = Series { name, times, values };
        let format = match self.global.format {
            Format::Json => {
                // validates the same way the file emitters do
                crate::series::render_csv(&series)?;
                report.series.push(SeriesEntry {
                    name: name.to_string(),
                    file: None,
                    times: Some(times.to_vec()),
                    values: Some(values.to_vec()),
                });
                return Ok(());
            }
            Format::Csv => SeriesFormat::Csv,
            Format::Svg => SeriesFormat::Svg,
        };
        let file = format!("series_{name}.{}", format.extension());
        emit_series(&series, &self.global.out.join(&file), format)?;
        report.series.push(SeriesEntry {
            name: name.to_string(),
            file: Some(file),
            times: None,
            values: None,
        });
        Ok(())
    }
}

fn load_model(report: &mut Report, path: &Path) -> Result<ModelSpec64, CliError> {
    report.input("model", path.display());
    Ok(format::load_model(path)?)
}

fn load_operator(report: &mut Report, key: &str, path: &Path, dim: usize) -> Result<HermitianOperator64, CliError> {
    report.input(key, path.display());
    let op = format::load_operator(path)?;
    same_dim(key, path, op.dim(), dim)?;
    Ok(op)
}

fn same_dim(key: &str, path: &Path, found: usize, expected: usize) -> Result<(), CliError> {
    if found != expected {
        return Err(CliError::Input(format!(
            "{}: {key} has dimension {found}, model has {expected}",
            path.display()
        )));
    }
    Ok(())
}

fn evolve_options(method: MethodArg, samples: usize) -> Result<EvolveOptions<f64>, CliError> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    Ok(EvolveOptions {
        method: match method {
            MethodArg::Auto => Method::Auto,
            MethodArg::Expm => Method::ExpmFixed,
            MethodArg::Rk => Method::RkAdaptive,
        },
        samples,
        ..EvolveOptions::default()
    })
}

fn positive_time(t: f64) -> Result<f64, CliError> {
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(CliError::Usage(format!("--t-final must be positive, got {t}")))
    }
}

fn scan_item(item: ScanItem) -> Value {
    match item {
        ScanItem::Member(i) => json!({"member": i}),
        ScanItem::PartialSum(i) => json!({"partial_sum": i}),
    }
}

fn stationary_check(model: &ModelSpec64, tol: f64) -> Result<(Check, Vec<DensityMatrix64>), CliError> {
    let rep = steady_states(model, &SteadyStateOptions { tol, ..Default::default() })?;
    let reliable = !rep.states.is_empty() && rep.states.iter().all(|s| s.reliable);
    let verdict = if reliable { Verdict::Holds } else { Verdict::Inconclusive };
    let states: Vec<Value> = rep
        .states
        .iter()
        .map(|s| {
            json!({
                "rho": matrix(s.rho.matrix()),
                "rank": s.rank,
                "faithful": s.faithful,
                "residual": num(s.residual),
                "reliable": s.reliable,
            })
        })
        .collect();
    let details = json!({
        "null_dimension": rep.null_dimension,
        "unique": rep.unique.as_str(),
        "liouvillian_norm": num(rep.liouvillian_norm),
        "states": states,
        "notes": rep.notes,
    });
    let rhos = rep.states.into_iter().map(|s| s.rho).collect();
    Ok((Check::new("stationary-states", "invariant-state-existence", verdict, tol, details), rhos))
}

pub fn analyze(ctx: &Context, a: &AnalyzeArgs, report: &mut Report) -> Result<(), CliError> {
    let tol = ctx.global.tol;
    let model = load_model(report, &a.model)?;
    let v = match &a.v {
        Some(p) => Some(load_operator(report, "v", p, model.dim())?),
        None => None,
    };

    let (check, rhos) = stationary_check(&model, tol)?;
    report.push(check);

    let u = uniqueness_check(&model, tol, MAX_PRODUCTS)?;
    let verdict = match u.verdict {
        Uniqueness::Unique => Verdict::Holds,
        Uniqueness::NotUnique => Verdict::Fails,
        Uniqueness::Inconclusive => Verdict::Inconclusive,
    };
    report.push(Check::new(
        "uniqueness",
        "unique-invariant-state",
        verdict,
        tol,
        json!({
            "result": u.verdict.as_str(),
            "commutant_dimension": u.commutant_dimension,
            "algebra_dimension": u.algebra_dimension,
            "null_dimension": u.null_dimension,
            "notes": u.notes,
        }),
    ));

    let mut faithful = Vec::new();
    let mut sub_verdict = Verdict::Holds;
    let mut sub = Vec::new();
    for rho in &rhos {
        let f = faithfulness_check(rho, tol)?;
        faithful.push(json!({"faithful": f.faithful, "rank": f.rank}));
        let s = subharmonicity_check(&model, &f.support, tol)?;
        sub_verdict = sub_verdict.and(s.verdict);
        sub.push(json!({
            "verdict": s.verdict.as_str(),
            "min_eigenvalue": num(s.min_eigenvalue),
            "witness": s.witness.as_ref().map(report::witness),
        }));
    }
    let all_faithful = !rhos.is_empty() && faithful.iter().all(|f| f["faithful"] == json!(true));
    let verdict = if rhos.is_empty() { Verdict::Inconclusive } else { Verdict::from_bool(all_faithful) };
    report.push(Check::new("faithfulness", "faithful-invariant-state", verdict, tol, json!({ "states": faithful })));
    let verdict = if rhos.is_empty() { Verdict::Inconclusive } else { sub_verdict };
    report.push(Check::new("support-subharmonicity", "support-projection-subharmonic", verdict, tol, json!({ "states": sub })));

    let mut families = vec![("coordinate", ProjectionFamily::Coordinate)];
    if let Some(v) = &v {
        families.push(("spectral-of-v", ProjectionFamily::SpectralOf(v.clone())));
    }
    for (label, family) in families {
        let scan = connectivity_scan(&model, &family, tol)?;
        let entries: Vec<Value> = scan
            .entries
            .iter()
            .map(|e| json!({"item": scan_item(e.item), "value": num(e.result.value), "connected": e.result.connected}))
            .collect();
        let check = Check::new(
            &format!("connectivity-{label}"),
            "connectivity-condition",
            Verdict::from_bool(scan.all_connected),
            tol,
            json!({"family": label, "entries": entries, "caveat": scan.caveat}),
        )
        .with_witness(scan.counterexample.map(scan_item));
        report.push(check);
    }

    if let Some(v) = &v {
        let cert = check_lyapunov(&model, v, &ctx.check_opts(None))?;
        let coercive = coercivity_assess(v)?;
        let mut details = certificate(&cert);
        details["coercivity"] = json!({
            "monotone_from": coercive.monotone_from,
            "coercive_pattern": coercive.coercive_pattern,
            "truncated": coercive.truncated,
        });
        report.push(
            Check::new("lyapunov", "strict-lyapunov", cert.verdict, tol, details)
                .with_witness(cert.witness.as_ref().map(report::witness)),
        );
    }
    Ok(())
}

pub fn steady_state(ctx: &Context, a: &ModelArgs, report: &mut Report) -> Result<(), CliError> {
    let model = load_model(report, &a.model)?;
    let (check, rhos) = stationary_check(&model, ctx.global.tol)?;
    report.push(check);
    for (k, rho) in rhos.iter().enumerate() {
        ctx.write_text(report, &format!("state_{k}.json"), &format::matrix_to_string(rho.matrix()))?;
    }
    Ok(())
}

pub fn simulate(ctx: &Context, a: &SimulateArgs, report: &mut Report) -> Result<(), CliError> {
    let tol = ctx.global.tol;
    let model = load_model(report, &a.model)?;
    let n = model.dim();
    let t_final = positive_time(a.t_final)?;
    let opts = evolve_options(a.method, a.samples)?;
    let rho0 = match &a.rho0 {
        Some(p) => {
            report.input("rho0", p.display());
            let rho = format::load_state(p, tol.max(1e-9))?;
            same_dim("rho0", p, rho.dim(), n)?;
            rho
        }
        None => seeded_states(n, 1, ctx.global.seed)?.remove(0),
    };
    let v = match &a.v {
        Some(p) => Some(load_operator(report, "v", p, n)?),
        None => None,
    };
    let w = match &a.w {
        Some(p) => Some(load_operator(report, "w", p, n)?),
        None => None,
    };
    let constants = match (a.c, a.d) {
        (Some(c), d) => Some((c, d.unwrap_or(0.0))),
        (None, Some(_)) => return Err(CliError::Usage("--d requires --c".into())),
        (None, None) => None,
    };
    if constants.is_some() && v.is_none() {
        return Err(CliError::Usage("--c/--d need --v".into()));
    }
    report.setting("t_final", t_final);
    report.setting("samples", a.samples);
    report.setting("method", opts.method.as_str());
    report.setting("rtol", opts.rtol);
    report.setting("atol", opts.atol);

    let traj = evolve(&model, &rho0, t_final, &opts)?;

    let mut worst_trace = 0.0f64;
    let mut worst_eig = f64::INFINITY;
    for rho in &traj.states {
        worst_trace = worst_trace.max((rho.matrix().trace().re - 1.0).abs());
        let (vals, _) = rho.as_hermitian().eigh()?;
        worst_eig = vals.iter().copied().fold(worst_eig, f64::min);
    }
    report.push(Check::new(
        "trace-preservation",
        "trace-preservation",
        Verdict::from_bool(worst_trace <= 1e-10),
        1e-10,
        json!({
            "max_trace_deviation": num(worst_trace),
            "renormalizations": traj.steps.renormalizations,
        }),
    ));
    report.push(Check::new(
        "positivity",
        "positivity-preservation",
        Verdict::from_bool(worst_eig >= -opts.positivity_tol),
        opts.positivity_tol,
        json!({"min_eigenvalue": num(worst_eig)}),
    ));

    let steps = json!({
        "method": traj.method.as_str(),
        "accepted": traj.steps.accepted,
        "rejected": traj.steps.rejected,
        "min_step": num(traj.steps.min_step),
        "max_step": num(traj.steps.max_step),
    });
    report.setting("integrator", steps);

    let times: Vec<f64> = traj.times.clone();
    match (&v, &w) {
        (None, None) => {
            for i in 0..n {
                let p = traj.states.iter().map(|r| r.matrix()[(i, i)].re).collect::<Vec<_>>();
                ctx.emit(report, &format!("p{i}"), &times, &p)?;
            }
        }
        _ => {
            for (name, op) in [("v", &v), ("w", &w)] {
                if let Some(op) = op {
                    let s = expectation_series(&traj, op)?;
                    ctx.emit(report, name, &times, &s)?;
                }
            }
        }
    }

    if let (Some(v), Some((c, d))) = (&v, constants) {
        let mb = mean_bound_check(&traj, v, c, d)?;
        report.push(Check::new(
            "mean-bound",
            "weak-lyapunov-mean-bound",
            mb.verdict,
            1e-6,
            json!({"c": c, "d": d, "max_violation": num(mb.max_violation), "worst_time": num(mb.worst_time)}),
        ));
    }
    if let (Some(v), Some(w)) = (&v, &w) {
        let diag = lasalle_diagnostics(&traj, v, w, constants, &DiagnosticsOptions::default())?;
        report.push(Check::new(
            "trajectory-lasalle",
            "lasalle-trajectory-evidence",
            diag.verdict,
            DiagnosticsOptions::<f64>::default().zero_threshold,
            json!({
                "v_monotone": diag.v_monotone,
                "v_max_increase": num(diag.v_max_increase),
                "w_integral_estimate": num(diag.w_integral_estimate),
                "w_integral_tail": diag.w_integral_tail.map(num),
                "w_limit_estimate": num(diag.w_limit_estimate),
                "v_sup": num(diag.v_sup),
                "w_sup": num(diag.w_sup),
                "final_v": num(diag.final_v),
                "final_w": num(diag.final_w),
                "notes": diag.notes,
            }),
        ));
    }
    ctx.write_text(report, "final_state.json", &format::matrix_to_string(traj.final_state().matrix()))?;
    Ok(())
}

pub fn check_lyapunov_cmd(ctx: &Context, a: &LyapunovArgs, report: &mut Report) -> Result<(), CliError> {
    let tol = ctx.global.tol;
    let model = load_model(report, &a.model)?;
    let v = load_operator(report, "v", &a.v, model.dim())?;
    let opts = ctx.check_opts(a.interior);
    let (cert, anchor) = match (a.c, a.d) {
        (Some(c), d) => (check_weak_lyapunov(&model, &v, c, d.unwrap_or(0.0), &opts)?, "weak-lyapunov"),
        (None, Some(_)) => return Err(CliError::Usage("--d requires --c".into())),
        (None, None) => (check_lyapunov(&model, &v, &opts)?, "strict-lyapunov"),
    };
    let coercive = coercivity_assess(&v)?;
    let mut details = certificate(&cert);
    details["coercivity"] = json!({
        "monotone_from": coercive.monotone_from,
        "coercive_pattern": coercive.coercive_pattern,
        "truncated": coercive.truncated,
    });
    report.push(
        Check::new("lyapunov", anchor, cert.verdict, tol, details)
            .with_witness(cert.witness.as_ref().map(report::witness)),
    );
    Ok(())
}

pub fn check_lasalle(ctx: &Context, a: &LaSalleArgs, report: &mut Report) -> Result<(), CliError> {
    let tol = ctx.global.tol;
    let model = load_model(report, &a.model)?;
    let n = model.dim();
    let v = load_operator(report, "v", &a.v, n)?;
    report.setting("hypothesis", format!("{:?}", a.theorem).to_lowercase());
    if a.theorem == Hypothesis::GroundSet {
        if a.u.is_some() {
            return Err(CliError::Usage("--u is only meaningful with bounded-generator".into()));
        }
        let g = check_ground_convergence(&model, &v, tol)?;
        let details = json!({
            "generator": report::inequality(&g.generator_check),
            "commutator_norm": num(g.commutator_norm),
            "commutator_ok": g.commutator_ok,
            "dissipation_min": num(g.dissipation_min),
            "kernel_residual": num(g.kernel_residual),
            "kernel_ok": g.kernel_ok,
            "notes": g.notes,
        });
        report.push(
            Check::new("lasalle", "ground-set-convergence", g.verdict, tol, details)
                .with_witness(g.witness.as_ref().map(report::witness)),
        );
        return Ok(());
    }
    let w_path = a
        .w
        .as_ref()
        .ok_or_else(|| CliError::Usage("--w is required for this hypothesis set".into()))?;
    let w = load_operator(report, "w", w_path, n)?;
    let (variant, anchor) = match (a.theorem, &a.u) {
        (Hypothesis::BoundedGenerator, Some(p)) => {
            (LaSalleVariant::Relaxed(load_operator(report, "u", p, n)?), "lasalle-relaxed")
        }
        (Hypothesis::BoundedGenerator, None) => (LaSalleVariant::BoundedGenerator, "lasalle-bounded-generator"),
        (_, Some(_)) => return Err(CliError::Usage("--u is only meaningful with bounded-generator".into())),
        (Hypothesis::MonotoneCompanion, None) => (LaSalleVariant::MonotoneCompanion, "lasalle-monotone-companion"),
        (Hypothesis::Equality, None) => (LaSalleVariant::Equality, "lasalle-equality"),
        (Hypothesis::GroundSet, None) => unreachable!("handled above"),
    };
    let cert = check_lasalle_pair(&model, &v, &w, &variant, &ctx.check_opts(a.interior))?;
    report.push(
        Check::new("lasalle", anchor, cert.verdict, tol, certificate(&cert))
            .with_witness(cert.witness.as_ref().map(report::witness)),
    );
    Ok(())
}

fn parse_pair(s: &str, l: C64) -> Result<CouplingPair<f64>, CliError> {
    let bad = || CliError::Usage(format!("--pair expects HIGH:LOW, got `{s}`"));
    let (h, lo) = s.split_once(':').ok_or_else(bad)?;
    Ok(CouplingPair {
        high: h.trim().parse().map_err(|_| bad())?,
        low: lo.trim().parse().map_err(|_| bad())?,
        l,
    })
}

pub fn synthesize(ctx: &Context, a: &SynthesizeArgs, report: &mut Report) -> Result<(), CliError> {
    let tol = ctx.global.tol;
    report.input("v", a.v.display());
    let v = format::load_operator(&a.v)?;
    if a.ground {
        if a.hamiltonian.is_some() || !a.pairs.is_empty() || a.no_compensate {
            return Err(CliError::Usage("--ground takes only --v".into()));
        }
        let g = solve_ground_coupling(&v, tol)?;
        let model = ModelSpec64::dissipative(vec![g.default_l.clone()])?;
        ctx.write_text(report, "model.json", &ModelFile::from_model(&model).to_canonical_string())?;
        let details = json!({
            "m": matrix(&g.m),
            "factor_residual": num(g.factor_residual),
            "default_l": matrix(&g.default_l),
            "free_positions": g.family.free_positions,
            "commutator_ok": g.report.commutator_ok,
            "kernel_ok": g.report.kernel_ok,
            "notes": g.report.notes,
        });
        report.push(
            Check::new("ground-coupling", "ground-set-convergence", g.report.verdict, tol, details)
                .with_witness(g.report.witness.as_ref().map(report::witness)),
        );
        return Ok(());
    }

    let mut spec = SynthesisSpec::new(v).compensate(!a.no_compensate);
    spec.tol = tol;
    if let Some(p) = &a.hamiltonian {
        let h = load_operator(report, "hamiltonian", p, spec.v.dim())?;
        spec = spec.with_hamiltonian(h);
    }
    let l = C64::new(a.l, a.l_im);
    if !a.pairs.is_empty() {
        let pairs = a.pairs.iter().map(|s| parse_pair(s, l)).collect::<Result<Vec<_>, _>>()?;
        spec = spec.with_pairs(pairs);
    } else if l != C64::new(1.0, 0.0) {
        let basis = qmarkov::synthesis::DescendingEigenbasis::new(&spec.v, tol)?;
        spec = spec.with_pairs(qmarkov::synthesis::default_pairs(&basis, l));
    }
    report.setting("compensate_hamiltonian", spec.compensate_hamiltonian);

    let result = synthesize_coupling(&spec)?;
    let model = result.model()?;
    ctx.write_text(report, "model.json", &ModelFile::from_model(&model).to_canonical_string())?;
    let pairs: Vec<Value> = result
        .pairs
        .iter()
        .map(|p| {
            json!({
                "high": p.pair.high,
                "low": p.pair.low,
                "l": [p.pair.l.re, p.pair.l.im],
                "case": p.case.as_str(),
                "gap": num(p.gap),
                "contribution": num(p.contribution),
                "compensation": [p.compensation.re, p.compensation.im],
                "coupling": p.coupling,
                "note": p.note,
            })
        })
        .collect();
    let verdict = if result.failed { Verdict::Fails } else { result.certificate.verdict };
    let mut details = json!({
        "eigenvalues": result.basis.values.iter().copied().map(num).collect::<Vec<_>>(),
        "pairs": pairs,
        "generator_blocks": matrix(&result.generator_blocks),
        "generator": matrix(&result.generator),
        "notes": result.notes,
    });
    details["certificate"] = certificate(&result.certificate);
    report.push(
        Check::new("synthesis", "coupling-synthesis", verdict, tol, details)
            .with_witness(result.certificate.witness.as_ref().map(report::witness)),
    );

    let check = verify_synthesis(&result, &model)?;
    let mismatch = check.mismatch.as_ref().map(|m| {
        json!({
            "row": m.row,
            "col": m.col,
            "recorded": [m.recorded.re, m.recorded.im],
            "recomputed": [m.recomputed.re, m.recomputed.im],
        })
    });
    report.push(Check::new(
        "synthesis-verification",
        "synthesis-round-trip",
        check.verdict,
        1e-10,
        json!({ "mismatch": mismatch }),
    ));
    Ok(())
}

pub fn probe(ctx: &Context, a: &ProbeArgs, report: &mut Report) -> Result<(), CliError> {
    let tol = ctx.global.tol;
    let model = load_model(report, &a.model)?;
    let v = load_operator(report, "v", &a.v, model.dim())?;
    let t_final = positive_time(a.t_final)?;
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let opts = ProbeOptions {
        seed: ctx.global.seed,
        threshold: a.threshold,
        evolve: evolve_options(a.method, EvolveOptions::<f64>::default().samples)?,
    };
    report.setting("t_final", t_final);
    report.setting("samples", a.samples);
    report.setting("threshold", a.threshold);
    report.setting("method", opts.evolve.method.as_str());

    let g = check_ground_convergence(&model, &v, tol)?;
    report.push(Check::new(
        "ground-set-hypotheses",
        "ground-set-convergence",
        g.verdict,
        tol,
        json!({
            "generator": report::inequality(&g.generator_check),
            "commutator_ok": g.commutator_ok,
            "kernel_ok": g.kernel_ok,
            "notes": g.notes,
        }),
    ));
    let p = invariant_set_probe(&model, &v, a.samples, t_final, &opts)?;
    report.push(Check::new(
        "invariant-set-probe",
        "zero-set-attractivity",
        p.verdict,
        p.threshold,
        json!({
            "final_values": p.final_values.iter().copied().map(num).collect::<Vec<_>>(),
            "max_final": num(p.max_final),
            "samples": p.samples,
            "t_final": p.t_final,
        }),
    ));
    Ok(())
}
