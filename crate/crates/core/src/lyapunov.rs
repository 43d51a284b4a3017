//! Operator-inequality checks on the Heisenberg generator: Lyapunov and
//! weak Lyapunov conditions, coercivity and tail bounds, LaSalle-type
//! hypotheses, the ground-set convergence test, and a small feasibility
//! search for weak Lyapunov operators over a user basis.
//!
//! Truncated bosonic models can be checked on a leading principal block
//! (`CheckOptions::interior`), since the top levels of a truncated ladder
//! operator do not obey the infinite-dimensional algebra.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::generator::{dissipation_functional, generator_heisenberg, ModelSpec};
use crate::operator::{
    cr, eigh, identity, norm_max, psd_check_matrix, spectral_decompose, ComplexMatrix,
    ComplexVector, DensityMatrix, HermitianOperator, PsdVerdict, SpectralDecomposition,
};
use crate::scalar::{default_degeneracy_tol, default_tol, Real};
use crate::verdict::Verdict;

/// Tolerance and optional leading-block restriction shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions<T: Real> {
    pub tol: T,
    /// Check only rows/columns `< k`.
    pub interior: Option<usize>,
}

impl<T: Real> Default for CheckOptions<T> {
    fn default() -> Self {
        CheckOptions {
            tol: default_tol(),
            interior: None,
        }
    }
}

impl<T: Real> CheckOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        CheckOptions {
            tol,
            interior: None,
        }
    }

    pub fn interior(mut self, k: usize) -> Self {
        self.interior = Some(k);
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.tol >= T::zero()) {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        match self.interior {
            Some(k) if k == 0 || k > dim => Err(Error::InvalidArgument(format!(
                "interior block size {k} outside 1..={dim}"
            ))),
            _ => Ok(()),
        }
    }

    fn restrict(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        match self.interior {
            Some(k) => m.view((0, 0), (k, k)).into_owned(),
            None => m.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `G(V) <= 0`
    Strict,
    /// `G(V) <= -cV + dI`
    Weak,
    /// `G(V) <= -W`
    LaSalle,
    /// `G(V) <= U - W`
    Relaxed,
    /// `G(V) = W`
    Equality,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Strict => "strict",
            Mode::Weak => "weak",
            Mode::LaSalle => "lasalle",
            Mode::Relaxed => "relaxed",
            Mode::Equality => "equality",
        }
    }
}

/// Eigenpair certifying a violated inequality. `vector` lives in the full
/// space (zero-padded when the check ran on an interior block), and the
/// pure state it spans violates the inequality in expectation.
#[derive(Debug, Clone)]
pub struct Witness<T: Real> {
    pub eigenvalue: T,
    pub vector: ComplexVector<T>,
}

impl<T: Real> Witness<T> {
    pub fn state(&self) -> Result<DensityMatrix<T>> {
        DensityMatrix::pure(&self.vector)
    }
}

/// One operator inequality `A >= 0` (or a norm bound for equalities).
#[derive(Debug, Clone)]
pub struct InequalityCheck<T: Real> {
    pub label: String,
    pub verdict: Verdict,
    /// Minimum eigenvalue of `A`, or the residual norm for equalities.
    pub value: T,
    pub witness: Option<Witness<T>>,
}

#[derive(Debug, Clone)]
pub struct LyapunovCertificate<T: Real> {
    /// The operator as supplied (before any shift).
    pub v: HermitianOperator<T>,
    pub mode: Mode,
    pub c: Option<T>,
    pub d: Option<T>,
    pub w: Option<HermitianOperator<T>>,
    pub u: Option<HermitianOperator<T>>,
    pub verdict: Verdict,
    /// First failing witness, if any.
    pub witness: Option<Witness<T>>,
    pub checks: Vec<InequalityCheck<T>>,
    pub tol: T,
    pub interior: Option<usize>,
    /// Constant added to `V` to make it positive; `G` ignores it.
    pub shift: T,
    /// Spectral norm of `G(W)` where a companion is present.
    pub generator_w_norm: Option<T>,
    pub notes: Vec<String>,
}

fn embed<T: Real>(v: &ComplexVector<T>, dim: usize) -> ComplexVector<T> {
    let mut out = ComplexVector::zeros(dim);
    out.rows_mut(0, v.len()).copy_from(v);
    out
}

fn check_psd<T: Real>(
    label: &str,
    a: &ComplexMatrix<T>,
    tol: T,
    dim: usize,
) -> Result<InequalityCheck<T>> {
    Ok(match psd_check_matrix(a, tol)? {
        PsdVerdict::Holds { min_eigenvalue } => InequalityCheck {
            label: label.to_string(),
            verdict: Verdict::Holds,
            value: min_eigenvalue,
            witness: None,
        },
        PsdVerdict::Fails {
            eigenvalue,
            eigenvector,
        } => InequalityCheck {
            label: label.to_string(),
            verdict: Verdict::Fails,
            value: eigenvalue,
            witness: Some(Witness {
                eigenvalue,
                vector: embed(&eigenvector, dim),
            }),
        },
    })
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub(crate) fn hermitian_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    let (vals, _) = eigh(m)?;
    Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
}

fn same_dim<T: Real>(model: &ModelSpec<T>, op: &HermitianOperator<T>) -> Result<()> {
    if op.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: op.dim(),
        });
    }
    Ok(())
}

fn require_psd<T: Real>(v: &HermitianOperator<T>, opts: &CheckOptions<T>) -> Result<()> {
    match psd_check_matrix(&opts.restrict(v.matrix()), opts.tol)? {
        PsdVerdict::Holds { .. } => Ok(()),
        PsdVerdict::Fails { eigenvalue, .. } => Err(Error::NotPositive {
            min_eigenvalue: eigenvalue.to_f64_lossy(),
        }),
    }
}

fn assemble<T: Real>(
    v: &HermitianOperator<T>,
    mode: Mode,
    checks: Vec<InequalityCheck<T>>,
    opts: &CheckOptions<T>,
) -> LyapunovCertificate<T> {
    let verdict = checks
        .iter()
        .fold(Verdict::Holds, |acc, ch| acc.and(ch.verdict));
    let witness = checks.iter().find_map(|ch| ch.witness.clone());
    LyapunovCertificate {
        v: v.clone(),
        mode,
        c: None,
        d: None,
        w: None,
        u: None,
        verdict,
        witness,
        checks,
        tol: opts.tol,
        interior: opts.interior,
        shift: T::zero(),
        generator_w_norm: None,
        notes: Vec::new(),
    }
}

/// `V >= 0` (required) and `G(V) <= 0`.
pub fn check_lyapunov<T: Real>(
    model: &ModelSpec<T>,
    v: &HermitianOperator<T>,
    opts: &CheckOptions<T>,
) -> Result<LyapunovCertificate<T>> {
    same_dim(model, v)?;
    opts.validate(model.dim())?;
    require_psd(v, opts)?;
    let g = generator_heisenberg(model, v)?;
    let a = -opts.restrict(&g);
    let check = check_psd("-G(V) >= 0", &a, opts.tol, model.dim())?;
    Ok(assemble(v, Mode::Strict, vec![check], opts))
}

/// `V >= 0` (required) and `G(V) <= -cV + dI` with `c > 0`, `d >= 0`.
pub fn check_weak_lyapunov<T: Real>(
    model: &ModelSpec<T>,
    v: &HermitianOperator<T>,
    c: T,
    d: T,
    opts: &CheckOptions<T>,
) -> Result<LyapunovCertificate<T>> {
    same_dim(model, v)?;
    opts.validate(model.dim())?;
    if !(c > T::zero()) || !(d >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "weak Lyapunov constants need c > 0 and d >= 0 (got c = {c}, d = {d})"
        )));
    }
    require_psd(v, opts)?;
    let g = generator_heisenberg(model, v)?;
    let n = model.dim();
    let full = -g - v.matrix() * cr(c) + identity::<T>(n) * cr(d);
    let a = opts.restrict(&full);
    let check = check_psd("-G(V) - cV + dI >= 0", &a, opts.tol, n)?;
    let mut cert = assemble(v, Mode::Weak, vec![check], opts);
    cert.c = Some(c);
    cert.d = Some(d);
    Ok(cert)
}

/// Which LaSalle-type hypothesis set to verify.
#[derive(Debug, Clone)]
pub enum LaSalleVariant<T: Real> {
    /// `G(V) <= -W` with `W >= 0`; `||G(W)||` is reported.
    BoundedGenerator,
    /// `G(V) <= -W` and `G(W) <= 0`, `W >= 0`.
    MonotoneCompanion,
    /// `G(V) = W` and `G(W) <= 0`, `W` Hermitian.
    Equality,
    /// `G(V) <= U - W`; integrability of `<U>` is left to simulation.
    Relaxed(HermitianOperator<T>),
}

impl<T: Real> LaSalleVariant<T> {
    pub fn as_str(&self) -> &'static str {
        match self {
            LaSalleVariant::BoundedGenerator => "bounded-generator",
            LaSalleVariant::MonotoneCompanion => "monotone-companion",
            LaSalleVariant::Equality => "equality",
            LaSalleVariant::Relaxed(_) => "relaxed",
        }
    }
}

/// LaSalle hypotheses for the pair `(V, W)`.
///
/// A `V` with negative eigenvalues is shifted by a constant before the
/// positivity requirement is applied; the generator is blind to the shift,
/// which is recorded in the certificate.
pub fn check_lasalle_pair<T: Real>(
    model: &ModelSpec<T>,
    v: &HermitianOperator<T>,
    w: &HermitianOperator<T>,
    variant: &LaSalleVariant<T>,
    opts: &CheckOptions<T>,
) -> Result<LyapunovCertificate<T>> {
    same_dim(model, v)?;
    same_dim(model, w)?;
    if let LaSalleVariant::Relaxed(u) = variant {
        same_dim(model, u)?;
    }
    let n = model.dim();
    opts.validate(n)?;

    let mut notes = Vec::new();
    let vmin = psd_check_matrix(&opts.restrict(v.matrix()), opts.tol)?;
    let shift = if vmin.holds() {
        T::zero()
    } else {
        let s = -vmin.min_eigenvalue();
        notes.push(format!("V shifted by {s} to make it positive semidefinite"));
        s
    };

    let needs_psd_w = matches!(
        variant,
        LaSalleVariant::BoundedGenerator | LaSalleVariant::MonotoneCompanion
    );
    if needs_psd_w {
        if let PsdVerdict::Fails { eigenvalue, .. } =
            psd_check_matrix(&opts.restrict(w.matrix()), opts.tol)?
        {
            return Err(Error::InvalidArgument(format!(
                "W must be positive semidefinite for the {} variant (min eigenvalue {eigenvalue})",
                variant.as_str()
            )));
        }
    }

    let g = generator_heisenberg(model, v)?;
    let gw = generator_heisenberg(model, w)?;
    let gw_r = opts.restrict(&gw);
    let gw_norm = hermitian_norm(&gw_r)?;

    let mut checks = Vec::new();
    let mode = match variant {
        LaSalleVariant::BoundedGenerator => {
            let a = opts.restrict(&(-(&g + w.matrix())));
            checks.push(check_psd("-(G(V) + W) >= 0", &a, opts.tol, n)?);
            Mode::LaSalle
        }
        LaSalleVariant::MonotoneCompanion => {
            let a = opts.restrict(&(-(&g + w.matrix())));
            checks.push(check_psd("-(G(V) + W) >= 0", &a, opts.tol, n)?);
            checks.push(check_psd("-G(W) >= 0", &(-&gw_r), opts.tol, n)?);
            Mode::LaSalle
        }
        LaSalleVariant::Equality => {
            let diff = opts.restrict(&(&g - w.matrix()));
            let resid = norm_max(&diff);
            let scale = T::one().max(norm_max(&opts.restrict(w.matrix())));
            checks.push(InequalityCheck {
                label: "||G(V) - W|| <= tol".into(),
                verdict: Verdict::from_bool(resid <= opts.tol * scale),
                value: resid,
                witness: None,
            });
            checks.push(check_psd("-G(W) >= 0", &(-&gw_r), opts.tol, n)?);
            Mode::Equality
        }
        LaSalleVariant::Relaxed(u) => {
            let a = opts.restrict(&(u.matrix() - w.matrix() - &g));
            checks.push(check_psd("U - W - G(V) >= 0", &a, opts.tol, n)?);
            notes.push(
                "finiteness of the time integral of <U> must be confirmed by simulation".into(),
            );
            Mode::Relaxed
        }
    };

    let mut cert = assemble(v, mode, checks, opts);
    cert.w = Some(w.clone());
    if let LaSalleVariant::Relaxed(u) = variant {
        cert.u = Some(u.clone());
    }
    cert.shift = shift;
    cert.generator_w_norm = Some(gw_norm);
    cert.notes = notes;
    Ok(cert)
}

impl<T: Real> LyapunovCertificate<T> {
    /// Re-run the checker that produced this certificate.
    pub fn reverify(&self, model: &ModelSpec<T>) -> Result<Verdict> {
        let opts = CheckOptions {
            tol: self.tol,
            interior: self.interior,
        };
        let again = match self.mode {
            Mode::Strict => check_lyapunov(model, &self.v, &opts)?,
            Mode::Weak => check_weak_lyapunov(
                model,
                &self.v,
                self.c.unwrap_or_else(T::one),
                self.d.unwrap_or_else(T::zero),
                &opts,
            )?,
            Mode::LaSalle | Mode::Equality | Mode::Relaxed => {
                let w = self
                    .w
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("certificate has no W".into()))?;
                let variant = match (self.mode, &self.u) {
                    (Mode::Equality, _) => LaSalleVariant::Equality,
                    (Mode::Relaxed, Some(u)) => LaSalleVariant::Relaxed(u.clone()),
                    _ if self.checks.len() > 1 => LaSalleVariant::MonotoneCompanion,
                    _ => LaSalleVariant::BoundedGenerator,
                };
                check_lasalle_pair(model, &self.v, w, &variant, &opts)?
            }
        };
        Ok(again.verdict)
    }
}

/// Affine lower envelope `k(i) = intercept + slope * i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineEnvelope<T: Real> {
    pub intercept: T,
    pub slope: T,
}

impl<T: Real> AffineEnvelope<T> {
    pub fn at(&self, i: usize) -> T {
        self.intercept + self.slope * T::from_usize(i).unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct CoercivityReport<T: Real> {
    pub spectral: SpectralDecomposition<T>,
    /// Smallest index of the eigenvalue list (with multiplicity) from which
    /// it is strictly increasing.
    pub monotone_from: usize,
    pub envelope: Option<AffineEnvelope<T>>,
    pub coercive_pattern: bool,
    /// Unboundedness cannot be observed on a matrix; always true.
    pub truncated: bool,
}

/// Growth pattern of the spectrum of a positive operator.
pub fn coercivity_assess<T: Real>(v: &HermitianOperator<T>) -> Result<CoercivityReport<T>> {
    if let PsdVerdict::Fails { eigenvalue, .. } = psd_check_matrix(v.matrix(), default_tol())? {
        return Err(Error::NotPositive {
            min_eigenvalue: eigenvalue.to_f64_lossy(),
        });
    }
    let gap = default_degeneracy_tol::<T>();
    let spectral = spectral_decompose(v, gap)?;
    let s = &spectral.spectrum;
    let n = s.len();
    let mut from = n - 1;
    while from > 0 && s[from] - s[from - 1] > gap {
        from -= 1;
    }
    let tail = n - from;
    let envelope = if tail >= 2 {
        let idx: Vec<T> = (from..n).map(|i| T::from_usize(i).unwrap()).collect();
        let m = T::from_usize(tail).unwrap();
        let mean_i = idx.iter().fold(T::zero(), |a, &x| a + x) / m;
        let mean_s = s[from..].iter().fold(T::zero(), |a, &x| a + x) / m;
        let mut sxy = T::zero();
        let mut sxx = T::zero();
        for (&i, &y) in idx.iter().zip(&s[from..]) {
            sxy += (i - mean_i) * (y - mean_s);
            sxx += (i - mean_i) * (i - mean_i);
        }
        let slope = sxy / sxx;
        let mut intercept = mean_s - slope * mean_i;
        let excess = idx
            .iter()
            .zip(&s[from..])
            .fold(T::zero(), |acc, (&i, &y)| acc.max(intercept + slope * i - y));
        intercept -= excess;
        Some(AffineEnvelope { intercept, slope })
    } else {
        None
    };
    let coercive_pattern = envelope.is_some_and(|e| e.slope > T::zero());
    Ok(CoercivityReport {
        spectral,
        monotone_from: from,
        envelope,
        coercive_pattern,
        truncated: true,
    })
}

#[derive(Debug, Clone)]
pub struct TailBound<T: Real> {
    /// Number of leading spectral projections kept.
    pub m: Option<usize>,
    /// `sum_{i < m} P_i`.
    pub projection: Option<ComplexMatrix<T>>,
    /// `c / eps`.
    pub threshold: T,
    pub verdict: Verdict,
    pub explanation: Option<String>,
}

/// Finite-rank projection capturing mass `> 1 - eps` of every state with
/// `tr(rho V) <= c`: `m = max(N0, inf{i : v_i >= c / eps})` over the
/// distinct eigenvalues, with `N0 = 0` since those are strictly increasing.
pub fn tightness_tail_bound<T: Real>(
    spectral: &SpectralDecomposition<T>,
    c: T,
    eps: T,
) -> Result<TailBound<T>> {
    if !(eps > T::zero()) || !(c > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "tail bound needs c > 0 and eps > 0 (got c = {c}, eps = {eps})"
        )));
    }
    if spectral.eigenvalues.first().is_some_and(|&v0| v0 < -default_tol::<T>()) {
        return Err(Error::NotPositive {
            min_eigenvalue: spectral.eigenvalues[0].to_f64_lossy(),
        });
    }
    let n0 = 0;
    let threshold = c / eps;
    if eps >= T::one() {
        return Ok(TailBound {
            m: Some(n0),
            projection: Some(spectral.projection_below(n0)),
            threshold,
            verdict: Verdict::Holds,
            explanation: Some("eps >= 1 makes the bound vacuous".into()),
        });
    }
    // Absorb the rounding in c / eps so that integer thresholds hit exactly.
    let cutoff = threshold * (T::one() - T::eps() * T::lit(8.0));
    match spectral.eigenvalues.iter().position(|&v| v >= cutoff) {
        Some(i) => {
            let m = n0.max(i);
            Ok(TailBound {
                m: Some(m),
                projection: Some(spectral.projection_below(m)),
                threshold,
                verdict: Verdict::Holds,
                explanation: None,
            })
        }
        None => Ok(TailBound {
            m: None,
            projection: None,
            threshold,
            verdict: Verdict::Inconclusive,
            explanation: Some(format!(
                "largest available eigenvalue {} is below c/eps = {threshold}; enlarge the truncation",
                spectral.eigenvalues.last().copied().unwrap_or_else(T::zero)
            )),
        }),
    }
}

/// Result of the ground-set convergence test.
#[derive(Debug, Clone)]
pub struct GroundConvergenceReport<T: Real> {
    pub verdict: Verdict,
    /// `G(V) <= 0`.
    pub generator_check: InequalityCheck<T>,
    /// `||[G(V), V]||_max`.
    pub commutator_norm: T,
    pub commutator_ok: bool,
    /// Minimum eigenvalue of the dissipation functional of `V`.
    pub dissipation_min: T,
    /// Largest eigenvalue of `V` compressed to the kernel of the
    /// dissipation functional; zero iff that kernel lies inside `ker V`.
    pub kernel_residual: T,
    pub kernel_ok: bool,
    pub witness: Option<Witness<T>>,
    pub notes: Vec<String>,
}

/// Checks `G(V) <= 0`, `[G(V), V] = 0`, and that `<D(V)>_rho > 0` for every
/// state outside the zero set of `V`, where `D` is the dissipation
/// functional. For `D(V) >= 0` the last condition is equivalent to
/// `ker D(V) ⊆ ker V`, which is what is tested. A failure of only the last
/// condition is reported as inconclusive.
pub fn check_ground_convergence<T: Real>(
    model: &ModelSpec<T>,
    v: &HermitianOperator<T>,
    tol: T,
) -> Result<GroundConvergenceReport<T>> {
    same_dim(model, v)?;
    let opts = CheckOptions::with_tol(tol);
    opts.validate(model.dim())?;
    require_psd(v, &opts)?;
    let n = model.dim();
    let g = generator_heisenberg(model, v)?;
    let generator_check = check_psd("-G(V) >= 0", &(-&g), tol, n)?;

    let comm = &g * v.matrix() - v.matrix() * &g;
    let commutator_norm = norm_max(&comm);
    let comm_scale = T::one().max(norm_max(&g) * norm_max(v.matrix()));
    let commutator_ok = commutator_norm <= tol * comm_scale;

    let dv = dissipation_functional(model, v.matrix())?;
    let (dvals, dvecs) = eigh(&dv)?;
    let dscale = T::one().max(dvals[0].abs().max(dvals[n - 1].abs()));
    let mut p = ComplexMatrix::zeros(n, n);
    for (k, &lam) in dvals.iter().enumerate() {
        if lam.abs() <= tol * dscale {
            let col = dvecs.column(k);
            p += col * col.adjoint();
        }
    }
    let compressed = &p * v.matrix() * &p;
    let (cvals, cvecs) = eigh(&compressed)?;
    let kernel_residual = cvals[n - 1].max(T::zero());
    let vscale = T::one().max(hermitian_norm(v.matrix())?);
    let kernel_ok = kernel_residual <= tol * vscale;

    let mut notes = Vec::new();
    let (verdict, witness) = if !generator_check.verdict.holds() {
        (Verdict::Fails, generator_check.witness.clone())
    } else if !commutator_ok {
        notes.push(format!(
            "[G(V), V] has max-norm {commutator_norm}, above {}",
            tol * comm_scale
        ));
        (Verdict::Fails, None)
    } else if kernel_ok {
        (Verdict::Holds, None)
    } else {
        notes.push(
            "the kernel of D(V) contains states with <V> > 0; the sufficient condition does not apply"
                .into(),
        );
        (
            Verdict::Inconclusive,
            Some(Witness {
                eigenvalue: kernel_residual,
                vector: cvecs.column(n - 1).into_owned(),
            }),
        )
    };
    Ok(GroundConvergenceReport {
        verdict,
        generator_check,
        commutator_norm,
        commutator_ok,
        dissipation_min: dvals[0],
        kernel_residual,
        kernel_ok,
        witness,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions<T: Real> {
    pub check: CheckOptions<T>,
    /// Descent iterations per start.
    pub max_iter: usize,
    /// Random restarts after the deterministic start.
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        SearchOptions {
            check: CheckOptions::default(),
            max_iter: 500,
            restarts: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<T: Real> {
    pub v: HermitianOperator<T>,
    /// Coefficients `x_j` with `V = sum_j x_j B_j`.
    pub coefficients: Vec<T>,
    pub certificate: LyapunovCertificate<T>,
    pub iterations: usize,
}

/// Affine matrix pencil `F(y) = F0 + sum_j y_j F_j`.
struct Pencil<T: Real> {
    base: ComplexMatrix<T>,
    dirs: Vec<ComplexMatrix<T>>,
}

impl<T: Real> Pencil<T> {
    fn at(&self, y: &[T]) -> ComplexMatrix<T> {
        let mut m = self.base.clone();
        for (d, &yj) in self.dirs.iter().zip(y) {
            m += d * cr(yj);
        }
        m
    }

    /// Penalty `sum_i max(0, mu - lambda_i)^2` and its gradient in `y`.
    fn penalty(&self, y: &[T], mu: T) -> Result<(T, Vec<T>)> {
        let (vals, vecs) = eigh(&self.at(y))?;
        let mut phi = T::zero();
        let mut grad = vec![T::zero(); self.dirs.len()];
        for (k, &lam) in vals.iter().enumerate() {
            let gap = mu - lam;
            if gap <= T::zero() {
                break;
            }
            phi += gap * gap;
            let u = vecs.column(k);
            for (g, d) in grad.iter_mut().zip(&self.dirs) {
                let q = (u.adjoint() * d * u)[(0, 0)].re;
                *g -= T::lit(2.0) * gap * q;
            }
        }
        Ok((phi, grad))
    }
}

fn is_scalar<T: Real>(b: &ComplexMatrix<T>, tol: T) -> bool {
    let n = b.nrows();
    let mean = b.trace() / cr(T::from_usize(n).unwrap());
    let dev = b - identity::<T>(n) * mean;
    norm_max(&dev) <= tol * T::one().max(norm_max(b))
}

fn check_basis<T: Real>(n: usize, basis: &[HermitianOperator<T>]) -> Result<()> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    for b in basis {
        if b.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.dim(),
            });
        }
    }
    let k = basis.len();
    let mut gram = DMatrix::<T>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = (basis[i].matrix().adjoint() * basis[j].matrix()).trace().re;
        }
    }
    let scale = (0..k).fold(T::zero(), |a, i| a.max(gram[(i, i)]));
    let eig = SymmetricEigen::new(gram);
    let min = eig.eigenvalues.iter().fold(scale, |a, &x| a.min(x));
    if !(scale > T::zero()) || min <= T::lit(1e-10).max(T::eps() * T::lit(64.0)) * scale {
        return Err(Error::InvalidArgument("degenerate (linearly dependent) basis".into()));
    }
    Ok(())
}

/// Best-effort search for `V = sum_j x_j B_j` with `V >= 0` and
/// `G(V) <= -cV + dI`.
///
/// The first non-scalar basis element is pinned to coefficient `+1` or
/// `-1`; the remaining coefficients minimise a quadratic penalty on the
/// eigenvalues of both constraint matrices. Every returned operator is
/// certified by [`check_weak_lyapunov`]; `None` means nothing was found.
pub fn lyapunov_search<T: Real>(
    model: &ModelSpec<T>,
    basis: &[HermitianOperator<T>],
    c: T,
    d: T,
    opts: &SearchOptions<T>,
) -> Result<Option<SearchOutcome<T>>> {
    let n = model.dim();
    check_basis(n, basis)?;
    opts.check.validate(n)?;
    if !(c > T::zero()) || !(d >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "weak Lyapunov constants need c > 0 and d >= 0 (got c = {c}, d = {d})"
        )));
    }

    let certify = |x: &[T], iters: usize| -> Result<Option<SearchOutcome<T>>> {
        let mut m = ComplexMatrix::zeros(n, n);
        for (b, &xj) in basis.iter().zip(x) {
            m += b.matrix() * cr(xj);
        }
        let v = HermitianOperator::hermitian_part(&m)?;
        if !psd_check_matrix(&opts.check.restrict(v.matrix()), opts.check.tol)?.holds() {
            return Ok(None);
        }
        let cert = check_weak_lyapunov(model, &v, c, d, &opts.check)?;
        Ok(cert.verdict.holds().then(|| SearchOutcome {
            v,
            coefficients: x.to_vec(),
            certificate: cert,
            iterations: iters,
        }))
    };

    let scalar_tol = T::lit(1e-12).max(T::eps() * T::lit(16.0));
    let anchor = match basis.iter().position(|b| !is_scalar(b.matrix(), scalar_tol)) {
        Some(a) => a,
        None => {
            let mut x = vec![T::zero(); basis.len()];
            let s = basis[0].matrix().trace().re / T::from_usize(n).unwrap();
            x[0] = T::one() / s;
            return certify(&x, 0);
        }
    };
    let free: Vec<usize> = (0..basis.len()).filter(|&j| j != anchor).collect();

    let gens: Vec<ComplexMatrix<T>> = basis
        .iter()
        .map(|b| generator_heisenberg(model, b.matrix()))
        .collect::<Result<_>>()?;
    let weak_image = |j: usize| -> ComplexMatrix<T> {
        opts.check
            .restrict(&(-&gens[j] - basis[j].matrix() * cr(c)))
    };
    let k = opts.check.interior.unwrap_or(n);
    let eye = identity::<T>(k) * cr(d);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut total_iters = 0;
    for sign in [T::one(), -T::one()] {
        let pos = Pencil {
            base: opts.check.restrict(basis[anchor].matrix()) * cr(sign),
            dirs: free
                .iter()
                .map(|&j| opts.check.restrict(basis[j].matrix()))
                .collect(),
        };
        let weak = Pencil {
            base: weak_image(anchor) * cr(sign) + &eye,
            dirs: free.iter().map(|&j| weak_image(j)).collect(),
        };
        let scale = T::one()
            .max(hermitian_norm(&pos.base)?)
            .max(hermitian_norm(&weak.base)?);

        for start in 0..=opts.restarts {
            let mut y: Vec<T> = if start == 0 {
                vec![T::zero(); free.len()]
            } else {
                free.iter()
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        T::lit(z)
                    })
                    .collect()
            };
            let mut mu = opts.check.tol * scale * T::lit(10.0);
            let total = |y: &[T], mu: T| -> Result<(T, Vec<T>)> {
                let (p1, g1) = pos.penalty(y, mu)?;
                let (p2, g2) = weak.penalty(y, mu)?;
                Ok((p1 + p2, g1.iter().zip(&g2).map(|(a, b)| *a + *b).collect()))
            };
            let mut step = T::one();
            for _ in 0..opts.max_iter {
                total_iters += 1;
                let (phi, grad) = total(&y, mu)?;
                if phi == T::zero() {
                    let mut x = vec![T::zero(); basis.len()];
                    x[anchor] = sign;
                    for (&j, &yj) in free.iter().zip(&y) {
                        x[j] = yj;
                    }
                    if let Some(found) = certify(&x, total_iters)? {
                        return Ok(Some(found));
                    }
                    // Feasible only up to rounding; demand a wider margin.
                    mu *= T::lit(10.0);
                    continue;
                }
                let gnorm2 = grad.iter().fold(T::zero(), |a, &g| a + g * g);
                if gnorm2 == T::zero() {
                    break;
                }
                let mut accepted = false;
                for _ in 0..60 {
                    let trial: Vec<T> = y.iter().zip(&grad).map(|(&a, &g)| a - step * g).collect();
                    let (phi_t, _) = total(&trial, mu)?;
                    if phi_t <= phi - T::lit(1e-4) * step * gnorm2 {
                        y = trial;
                        accepted = true;
                        step *= T::lit(2.0);
                        break;
                    }
                    step *= T::lit(0.5);
                }
                if !accepted {
                    break;
                }
            }
        }
    }
    Ok(None)
}
