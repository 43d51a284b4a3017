//! Master-equation integration and the trajectory-level diagnostics built on
//! it: expectation series, the exponential mean bound, LaSalle-type
//! evidence (monotone `<V>`, integrable and vanishing `<W>`), and
//! convergence probes from random initial states.

use nalgebra::ComplexField;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{devectorize, liouvillian, vectorize, ModelSpec, Side, DEFAULT_DIM_CAP};
use crate::operator::{c, cr, eigh, ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;
use crate::verdict::Verdict;

/// Largest dimension for which [`Method::Auto`] picks the matrix exponential.
pub const EXPM_AUTO_MAX_DIM: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dense `exp(dt L)` applied once per sample interval.
    ExpmFixed,
    /// Dormand-Prince 5(4) with step-size control.
    RkAdaptive,
    /// `ExpmFixed` up to [`EXPM_AUTO_MAX_DIM`], `RkAdaptive` above.
    Auto,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExpmFixed => "expm_fixed",
            Method::RkAdaptive => "rk_adaptive",
            Method::Auto => "auto",
        }
    }

    fn resolve(self, dim: usize) -> Method {
        match self {
            Method::Auto if dim <= EXPM_AUTO_MAX_DIM => Method::ExpmFixed,
            Method::Auto => Method::RkAdaptive,
            m => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions<T: Real> {
    pub method: Method,
    /// Number of sample intervals; the trajectory holds `samples + 1` states.
    pub samples: usize,
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Trace drift above which the state is renormalized.
    pub trace_tol: T,
    /// Most negative eigenvalue tolerated at a sample time.
    pub positivity_tol: T,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        EvolveOptions {
            method: Method::Auto,
            samples: 200,
            rtol: T::floor_tol(1e-10, 64.0),
            atol: T::floor_tol(1e-12, 16.0),
            max_steps: 1_000_000,
            trace_tol: T::floor_tol(1e-12, 16.0),
            positivity_tol: T::floor_tol(1e-8, 1e3),
        }
    }
}

/// Bookkeeping of the integrator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepRecord {
    pub accepted: usize,
    pub rejected: usize,
    pub renormalizations: usize,
    pub min_step: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    /// Method actually used (never `Auto`).
    pub method: Method,
    pub steps: StepRecord,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Left or right multiplication by a fixed operator, sparse when that pays.
enum Factor<T: Real> {
    Dense(ComplexMatrix<T>),
    Sparse(SparseMatrix<T>),
}

impl<T: Real> Factor<T> {
    fn new(m: ComplexMatrix<T>) -> Self {
        let s = SparseMatrix::from_dense(&m);
        if s.nnz() * 4 <= m.len() {
            Factor::Sparse(s)
        } else {
            Factor::Dense(m)
        }
    }

    fn left(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        match self {
            Factor::Dense(m) => m * x,
            Factor::Sparse(s) => s.mul_dense(x),
        }
    }

    fn right(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        match self {
            Factor::Dense(m) => x * m,
            Factor::Sparse(s) => SparseMatrix::dense_mul(x, s),
        }
    }
}

/// `rho -> -i Heff rho + i rho Heff^dag + sum_k L_k rho L_k^dag`.
struct MasterRhs<T: Real> {
    heff: Factor<T>,
    heff_dag: Factor<T>,
    jumps: Vec<(Factor<T>, Factor<T>)>,
    scale: T,
}

impl<T: Real> MasterRhs<T> {
    fn new(model: &ModelSpec<T>) -> Self {
        let heff = model.hamiltonian().matrix() - model.decay_operator() * c::<T>(0.0, 0.5);
        let mut scale = heff.norm();
        for l in model.couplings() {
            scale += l.norm_squared();
        }
        let jumps = model
            .couplings()
            .iter()
            .map(|l| (Factor::new(l.clone()), Factor::new(l.adjoint())))
            .collect();
        MasterRhs {
            heff_dag: Factor::new(heff.adjoint()),
            heff: Factor::new(heff),
            jumps,
            scale: T::one().max(scale),
        }
    }

    fn apply(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = self.heff.left(rho) * c::<T>(0.0, -1.0) + self.heff_dag.right(rho) * c::<T>(0.0, 1.0);
        for (l, ld) in &self.jumps {
            out += ld.right(&l.left(rho));
        }
        out
    }
}

fn validate_state<T: Real>(model: &ModelSpec<T>, rho0: &DensityMatrix<T>) -> Result<()> {
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    Ok(())
}

fn hermitize<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    (m + m.adjoint()) * cr(T::lit(0.5))
}

/// Accept `m` as a sample state: check positivity, renormalize the trace if
/// it drifted.
fn admit<T: Real>(
    m: ComplexMatrix<T>,
    t: T,
    opts: &EvolveOptions<T>,
    record: &mut StepRecord,
) -> Result<DensityMatrix<T>> {
    let mut m = hermitize(&m);
    let tr = m.trace().re;
    if (tr - T::one()).abs() > opts.trace_tol {
        m /= cr(tr);
        record.renormalizations += 1;
    }
    let (vals, _) = eigh(&m)?;
    if vals[0] < -opts.positivity_tol {
        return Err(Error::Integration {
            time: t.to_f64_lossy(),
            reason: format!("state lost positivity (eigenvalue {:e})", vals[0].to_f64_lossy()),
        });
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// Integrate the master equation from `rho0` to `t_final`, recording states
/// at `opts.samples + 1` equally spaced times.
pub fn evolve<T: Real>(
    model: &ModelSpec<T>,
    rho0: &DensityMatrix<T>,
    t_final: T,
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    validate_state(model, rho0)?;
    if !(t_final > T::zero()) || !t_final.is_finite() {
        return Err(Error::InvalidArgument("t_final must be positive and finite".into()));
    }
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("at least one sample interval is required".into()));
    }
    let method = opts.method.resolve(model.dim());
    let ns = T::from_usize(opts.samples).unwrap();
    let times: Vec<T> = (0..=opts.samples)
        .map(|k| t_final * T::from_usize(k).unwrap() / ns)
        .collect();
    match method {
        Method::ExpmFixed => evolve_expm(model, rho0, times, opts),
        _ => evolve_rk(model, rho0, times, opts),
    }
}

fn evolve_expm<T: Real>(
    model: &ModelSpec<T>,
    rho0: &DensityMatrix<T>,
    times: Vec<T>,
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    let n = model.dim();
    let dt = times[1] - times[0];
    let lv = liouvillian(model, Side::Schroedinger, DEFAULT_DIM_CAP)?.to_dense();
    let prop = (lv * cr(dt)).exp();
    let dts = dt.to_f64_lossy();
    let mut record = StepRecord {
        min_step: dts,
        max_step: dts,
        ..StepRecord::default()
    };
    let mut states = vec![rho0.clone()];
    let mut x = nalgebra::DVector::from_vec(vectorize(rho0.matrix()));
    for &t in &times[1..] {
        x = &prop * x;
        record.accepted += 1;
        let st = admit(devectorize(x.as_slice(), n), t, opts, &mut record)?;
        x = nalgebra::DVector::from_vec(vectorize(st.matrix()));
        states.push(st);
    }
    Ok(Trajectory {
        times,
        states,
        method: Method::ExpmFixed,
        steps: record,
    })
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B_ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn evolve_rk<T: Real>(
    model: &ModelSpec<T>,
    rho0: &DensityMatrix<T>,
    times: Vec<T>,
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    let rhs = MasterRhs::new(model);
    let mut record = StepRecord {
        min_step: f64::INFINITY,
        max_step: 0.0,
        ..StepRecord::default()
    };
    let mut states = vec![rho0.clone()];
    let mut y = rho0.matrix().clone();
    let mut t = T::zero();
    let mut h = (T::lit(0.01) / rhs.scale).min(times[1]);
    let mut k1 = rhs.apply(&y);
    let mut steps = 0usize;
    let a: Vec<Vec<T>> = A.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect();
    let e: Vec<T> = B_ERR.iter().map(|&x| T::lit(x)).collect();
    let h_floor = T::eps() * T::lit(16.0) * times[times.len() - 1];

    for &target in &times[1..] {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::Integration {
                    time: t.to_f64_lossy(),
                    reason: format!("step budget of {} exhausted", opts.max_steps),
                });
            }
            steps += 1;
            let last = target - t <= h;
            let hs = if last { target - t } else { h };
            let stage = |ks: &[&ComplexMatrix<T>], row: &[T]| -> ComplexMatrix<T> {
                let mut acc = y.clone();
                for (k, &w) in ks.iter().zip(row) {
                    if w != T::zero() {
                        acc += *k * cr(hs * w);
                    }
                }
                acc
            };
            let k2 = rhs.apply(&stage(&[&k1], &a[0]));
            let k3 = rhs.apply(&stage(&[&k1, &k2], &a[1]));
            let k4 = rhs.apply(&stage(&[&k1, &k2, &k3], &a[2]));
            let k5 = rhs.apply(&stage(&[&k1, &k2, &k3, &k4], &a[3]));
            let k6 = rhs.apply(&stage(&[&k1, &k2, &k3, &k4, &k5], &a[4]));
            let y5 = stage(&[&k1, &k2, &k3, &k4, &k5, &k6], &a[5]);
            let k7 = rhs.apply(&y5);
            let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
            let mut err = T::zero();
            for idx in 0..y.len() {
                let mut d = c::<T>(0.0, 0.0);
                for (k, &w) in ks.iter().zip(&e) {
                    d += k[idx] * cr(w);
                }
                let scale = opts.atol + opts.rtol * y[idx].modulus().max(y5[idx].modulus());
                err = err.max((d * cr(hs)).modulus() / scale);
            }
            if err <= T::one() {
                t = if last { target } else { t + hs };
                y = y5;
                k1 = k7;
                record.accepted += 1;
                let hf = hs.to_f64_lossy();
                record.min_step = record.min_step.min(hf);
                record.max_step = record.max_step.max(hf);
                let tr = y.trace().re;
                if (tr - T::one()).abs() > opts.trace_tol {
                    y /= cr(tr);
                    k1 = rhs.apply(&y);
                    record.renormalizations += 1;
                }
            } else {
                record.rejected += 1;
            }
            let factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
            };
            if !(err <= T::one() && last) {
                h = hs * factor;
            }
            if h < h_floor {
                return Err(Error::Integration {
                    time: t.to_f64_lossy(),
                    reason: "step size underflow".into(),
                });
            }
        }
        let st = admit(y.clone(), target, opts, &mut record)?;
        states.push(st);
    }
    Ok(Trajectory {
        times,
        states,
        method: Method::RkAdaptive,
        steps: record,
    })
}

/// `tr(rho_t X)` along a trajectory. Fails if an imaginary part exceeds
/// `1e-12 * max(1, |value|)`.
pub fn expectation_series<T: Real>(traj: &Trajectory<T>, x: &HermitianOperator<T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(traj.len());
    let tol = T::floor_tol(1e-12, 64.0);
    for rho in &traj.states {
        if rho.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                found: x.dim(),
            });
        }
        let z = rho.expect(x.matrix());
        if z.im.abs() > tol * T::one().max(z.re.abs()) {
            return Err(Error::ImaginaryExpectation(z.im.to_f64_lossy()));
        }
        out.push(z.re);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanBound<T: Real> {
    pub verdict: Verdict,
    /// Largest `<V(t)> - bound(t)`, negative when the bound has room.
    pub max_violation: T,
    pub worst_time: T,
}

/// `<V(t)> <= exp(-ct) <V(0)> + d/c` at every sample, with relative slack
/// `1e-6`.
pub fn mean_bound_check<T: Real>(
    traj: &Trajectory<T>,
    v: &HermitianOperator<T>,
    c_const: T,
    d: T,
) -> Result<MeanBound<T>> {
    if !(c_const > T::zero()) || !(d >= T::zero()) {
        return Err(Error::InvalidArgument("mean bound needs c > 0 and d >= 0".into()));
    }
    let series = expectation_series(traj, v)?;
    let v0 = series[0];
    let slack = T::lit(1e-6);
    let mut max_violation = -T::max_value().unwrap_or_else(T::one);
    let mut worst_time = T::zero();
    let mut ok = true;
    for (&t, &val) in traj.times.iter().zip(&series) {
        let bound = (-c_const * t).exp() * v0 + d / c_const;
        let viol = val - bound;
        if viol > max_violation {
            max_violation = viol;
            worst_time = t;
        }
        if viol > slack * T::one().max(bound.abs()) {
            ok = false;
        }
    }
    Ok(MeanBound {
        verdict: Verdict::from_bool(ok),
        max_violation,
        worst_time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsOptions<T: Real> {
    /// Fraction of the horizon treated as the tail window.
    pub tail_fraction: T,
    /// Tail mean of `<W>` below which `<W>` counts as converged to zero.
    pub zero_threshold: T,
    /// Allowed increase of `<V>` between samples, relative to `max(1, |V|)`.
    pub monotone_slack: T,
    /// Minimum number of samples for a meaningful tail.
    pub min_samples: usize,
}

impl<T: Real> Default for DiagnosticsOptions<T> {
    fn default() -> Self {
        DiagnosticsOptions {
            tail_fraction: T::lit(0.1),
            zero_threshold: T::lit(1e-4),
            monotone_slack: T::lit(1e-8),
            min_samples: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LaSalleDiagnostics<T: Real> {
    pub verdict: Verdict,
    pub v_series: Vec<T>,
    pub w_series: Vec<T>,
    pub v_monotone: bool,
    pub v_max_increase: T,
    /// Trapezoidal integral of `<W>` over the horizon plus the tail term.
    pub w_integral_estimate: T,
    /// Extrapolated integral beyond the horizon from an exponential fit of
    /// the tail window; `None` when the tail is not decaying.
    pub w_integral_tail: Option<T>,
    pub w_limit_estimate: T,
    pub v_sup: T,
    pub w_sup: T,
    /// `<W>` and `<V>` in the final state.
    pub final_w: T,
    pub final_v: T,
    pub bound_check: Option<MeanBound<T>>,
    pub notes: Vec<String>,
}

/// Decay rate of an exponential fitted to the positive part of a tail.
fn tail_rate<T: Real>(times: &[T], values: &[T]) -> Option<T> {
    let pts: Vec<(T, T)> = times
        .iter()
        .zip(values)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&t, &w)| (t, w.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = T::from_usize(pts.len()).unwrap();
    let mt = pts.iter().fold(T::zero(), |a, p| a + p.0) / m;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / m;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for &(t, y) in &pts {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    (slope < T::zero()).then_some(-slope)
}

/// LaSalle-type evidence along one trajectory.
pub fn lasalle_diagnostics<T: Real>(
    traj: &Trajectory<T>,
    v: &HermitianOperator<T>,
    w: &HermitianOperator<T>,
    constants: Option<(T, T)>,
    opts: &DiagnosticsOptions<T>,
) -> Result<LaSalleDiagnostics<T>> {
    let v_series = expectation_series(traj, v)?;
    let w_series = expectation_series(traj, w)?;
    let n = traj.len();
    let mut notes = Vec::new();

    let mut v_max_increase = T::zero();
    let mut v_monotone = true;
    for k in 1..n {
        let inc = v_series[k] - v_series[k - 1];
        v_max_increase = v_max_increase.max(inc);
        if inc > opts.monotone_slack * T::one().max(v_series[k - 1].abs()) {
            v_monotone = false;
        }
    }

    let mut integral = T::zero();
    for k in 1..n {
        let dt = traj.times[k] - traj.times[k - 1];
        integral += (w_series[k] + w_series[k - 1]) * dt * T::lit(0.5);
    }
    let horizon = traj.times[n - 1];
    let tail_start = horizon * (T::one() - opts.tail_fraction);
    let first_tail = traj.times.iter().position(|&t| t >= tail_start).unwrap_or(n - 1);
    let tail_times = &traj.times[first_tail..];
    let tail_w = &w_series[first_tail..];
    let final_w = w_series[n - 1];
    let w_limit_estimate =
        tail_w.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize(tail_w.len()).unwrap();
    let w_integral_tail = if final_w.abs() <= T::eps() * T::lit(16.0) {
        Some(T::zero())
    } else {
        tail_rate(tail_times, tail_w).map(|rate| final_w.max(T::zero()) / rate)
    };
    let w_integral_estimate = integral + w_integral_tail.unwrap_or_else(T::zero);
    let v_sup = v_series.iter().fold(-T::max_value().unwrap_or_else(T::one), |a, &x| a.max(x));
    let w_sup = w_series.iter().fold(-T::max_value().unwrap_or_else(T::one), |a, &x| a.max(x));
    let bound_check = match constants {
        Some((c_const, d)) => Some(mean_bound_check(traj, v, c_const, d)?),
        None => None,
    };

    let verdict = if n < opts.min_samples || tail_times.len() < 2 {
        notes.push(format!("trajectory has {n} samples; tail window too short"));
        Verdict::Inconclusive
    } else if !v_monotone {
        Verdict::Fails
    } else if w_limit_estimate.abs() <= opts.zero_threshold && w_integral_tail.is_some() {
        Verdict::Holds
    } else {
        notes.push("<W> has not reached zero within the horizon".into());
        Verdict::Inconclusive
    };
    Ok(LaSalleDiagnostics {
        verdict,
        final_v: v_series[n - 1],
        final_w,
        v_series,
        w_series,
        v_monotone,
        v_max_increase,
        w_integral_estimate,
        w_integral_tail,
        w_limit_estimate,
        v_sup,
        w_sup,
        bound_check,
        notes,
    })
}

/// Random mixed state `G G^dag / tr(G G^dag)` with `G` a complex Gaussian
/// matrix, i.e. the reduced state of a Gaussian purification.
pub fn random_density<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    if dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let g = ComplexMatrix::<T>::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityMatrix::from_trusted(hermitize(&(m / cr(tr)))))
}

/// `count` random states from a ChaCha stream seeded with `seed`.
pub fn seeded_states<T: Real>(dim: usize, count: usize, seed: u64) -> Result<Vec<DensityMatrix<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_density(dim, &mut rng)).collect()
}

#[derive(Debug, Clone)]
pub struct ProbeOptions<T: Real> {
    pub seed: u64,
    /// Largest acceptable final `<V>`.
    pub threshold: T,
    pub evolve: EvolveOptions<T>,
}

impl<T: Real> Default for ProbeOptions<T> {
    fn default() -> Self {
        ProbeOptions {
            seed: 0,
            threshold: T::lit(1e-5),
            evolve: EvolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeReport<T: Real> {
    pub verdict: Verdict,
    pub final_values: Vec<T>,
    pub max_final: T,
    pub threshold: T,
    pub samples: usize,
    pub t_final: T,
}

/// Integrate from `samples` seeded random states and compare the final
/// `<V>` with the threshold. Trajectories run in parallel; the result does
/// not depend on scheduling.
pub fn invariant_set_probe<T: Real>(
    model: &ModelSpec<T>,
    v: &HermitianOperator<T>,
    samples: usize,
    t_final: T,
    opts: &ProbeOptions<T>,
) -> Result<ProbeReport<T>> {
    if v.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: v.dim(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let starts = seeded_states::<T>(model.dim(), samples, opts.seed)?;
    let final_values: Vec<T> = starts
        .par_iter()
        .map(|rho0| {
            let traj = evolve(model, rho0, t_final, &opts.evolve)?;
            Ok(v.expectation(traj.final_state()))
        })
        .collect::<Result<_>>()?;
    let max_final = final_values
        .iter()
        .fold(-T::max_value().unwrap_or_else(T::one), |a, &x| a.max(x));
    Ok(ProbeReport {
        verdict: Verdict::from_bool(max_final <= opts.threshold),
        final_values,
        max_final,
        threshold: opts.threshold,
        samples,
        t_final,
    })
}

/// Post-measurement state `P rho P / tr(P rho)` and the outcome probability.
pub fn condition_on<T: Real>(
    rho: &DensityMatrix<T>,
    p: &ComplexMatrix<T>,
) -> Result<(T, DensityMatrix<T>)> {
    crate::invariant::validate_projection(p, false)?;
    if p.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: p.nrows(),
        });
    }
    let m = p * rho.matrix() * p;
    let prob = m.trace().re;
    if !(prob > T::zero()) {
        return Err(Error::InvalidState("outcome has zero probability".into()));
    }
    Ok((prob, DensityMatrix::from_trusted(hermitize(&(m / cr(prob))))))
}

/// Reduced state on the second factor of a `d1 x d2` bipartition.
pub fn reduce_to_second<T: Real>(rho: &DensityMatrix<T>, d1: usize, d2: usize) -> Result<DensityMatrix<T>> {
    if d1 * d2 != rho.dim() || d1 == 0 || d2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "bipartition {d1}x{d2} does not match dimension {}",
            rho.dim()
        )));
    }
    let r = rho.matrix();
    let out = ComplexMatrix::<T>::from_fn(d2, d2, |i, j| {
        (0..d1).fold(c(0.0, 0.0), |acc, a| acc + r[(a * d2 + i, a * d2 + j)])
    });
    Ok(DensityMatrix::from_trusted(out))
}
