//! Invariant states and their classification: stationary states from the
//! Liouvillian kernel, faithfulness and support projections, the
//! connectivity condition `P L^dag (I - P) L P != 0`, subharmonicity of
//! support projections, and an irreducibility-based uniqueness test.

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{
    apply_schroedinger, devectorize, generator_heisenberg, liouvillian, ModelSpec, Side,
    DEFAULT_DIM_CAP,
};
use crate::lyapunov::{hermitian_norm, Witness};
use crate::operator::{
    c, cr, eigh, identity, norm_max, psd_check_matrix, spectral_decompose, ComplexMatrix,
    ComplexVector, DensityMatrix, HermitianOperator, PsdVerdict,
};
use crate::scalar::{default_degeneracy_tol, default_tol, Real};
use crate::sparse::{LuFactor, SparseMatrix};
use crate::verdict::Verdict;

/// Caveat attached to every projection-family scan.
pub const FAMILY_CAVEAT: &str =
    "there may exist other set of projections that are not connected; a scan over one family does not cover every projection";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uniqueness {
    Unique,
    NotUnique,
    Inconclusive,
}

impl Uniqueness {
    pub fn as_str(self) -> &'static str {
        match self {
            Uniqueness::Unique => "unique",
            Uniqueness::NotUnique => "not_unique",
            Uniqueness::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions<T: Real> {
    pub tol: T,
    pub dim_cap: usize,
}

impl<T: Real> Default for SteadyStateOptions<T> {
    fn default() -> Self {
        SteadyStateOptions {
            tol: default_tol(),
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryState<T: Real> {
    pub rho: DensityMatrix<T>,
    pub faithful: bool,
    pub rank: usize,
    pub support: ComplexMatrix<T>,
    /// `||G_*(rho)||_max`.
    pub residual: T,
    /// Max-norm change made by hermitizing, clipping and renormalizing.
    pub cleanup_shift: T,
    pub reliable: bool,
}

#[derive(Debug, Clone)]
pub struct InvariantStateReport<T: Real> {
    pub states: Vec<StationaryState<T>>,
    /// Kernel dimension of the Liouvillian before any cleanup.
    pub null_dimension: usize,
    pub unique: Uniqueness,
    pub liouvillian_norm: T,
    pub tol: T,
    pub notes: Vec<String>,
}

/// `(positive part, negative part)` of a Hermitian matrix, discarding
/// eigenvalues within `cut` of zero.
fn jordan_parts<T: Real>(y: &ComplexMatrix<T>, cut: T) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let n = y.nrows();
    let (vals, vecs) = eigh(y)?;
    let mut pos = ComplexMatrix::zeros(n, n);
    let mut neg = ComplexMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let col = vecs.column(k);
        let outer = col * col.adjoint();
        if lam > cut {
            pos += outer * cr(lam);
        } else if lam < -cut {
            neg += outer * cr(-lam);
        }
    }
    Ok((pos, neg))
}

/// Hermitize, clip negative eigenvalues, renormalize to unit trace.
fn clean_state<T: Real>(x: &ComplexMatrix<T>) -> Result<Option<ComplexMatrix<T>>> {
    let half = cr(T::lit(0.5));
    let h = (x + x.adjoint()) * half;
    let (pos, _) = jordan_parts(&h, T::zero())?;
    let tr = pos.trace().re;
    if !(tr > T::zero()) {
        return Ok(None);
    }
    Ok(Some(pos / cr(tr)))
}

/// Gram-Schmidt acceptance of `m` against an orthonormal list (Hilbert-Schmidt
/// inner product). Returns true and appends when `m` adds a new direction.
fn extend_basis<T: Real>(basis: &mut Vec<ComplexMatrix<T>>, m: &ComplexMatrix<T>, tol: T) -> bool {
    let scale = m.norm();
    if !(scale > T::zero()) {
        return false;
    }
    let mut r = m / cr(scale);
    for _ in 0..2 {
        for b in basis.iter() {
            let overlap = b.dotc(&r);
            r -= b * overlap;
        }
    }
    let rn = r.norm();
    if rn > tol {
        basis.push(r / cr(rn));
        true
    } else {
        false
    }
}

/// Kernel of a Liouvillian, found by inverse subspace iteration with the
/// shift `+tol * ||L|| / 100`. Every Liouvillian eigenvalue has
/// nonpositive real part, so the shifted matrix is nonsingular and its
/// banded LU stays backward stable even when kernel vectors are strongly
/// graded. Kernel directions are those where `||L q|| <= tol * ||L||`.
pub fn liouvillian_kernel<T: Real>(lv: &SparseMatrix<T>, tol: T) -> Result<Vec<Vec<Complex<T>>>> {
    let norm = T::one().max(lv.norm_inf());
    let shift = tol * norm * T::lit(1e-2);
    inverse_kernel(lv, cr(shift), lv, tol * norm)
}

/// Right kernel of a rectangular `k`, via inverse iteration on the
/// positive semidefinite `k^dag k + s I`.
pub fn rectangular_kernel<T: Real>(k: &SparseMatrix<T>, tol: T) -> Result<Vec<Vec<Complex<T>>>> {
    let norm = T::one().max(k.norm_inf());
    let gram = k.adjoint().mul(k);
    let shift = tol * norm * norm * T::lit(1e-2);
    inverse_kernel(&gram, cr(-shift), k, tol * norm)
}

/// Directions `q` with `||residual q|| <= threshold`, found by block
/// inverse iteration with `invert - shift I`.
fn inverse_kernel<T: Real>(
    invert: &SparseMatrix<T>,
    shift: Complex<T>,
    residual: &SparseMatrix<T>,
    threshold: T,
) -> Result<Vec<Vec<Complex<T>>>> {
    let m = invert.nrows();
    let shifted = invert.add(&SparseMatrix::identity(m).scale(-shift));
    let lu = LuFactor::new(&shifted)
        .ok_or_else(|| Error::EigenFailure("shifted operator is singular".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ab1e);
    let mut p = m.min(4);
    loop {
        let mut q = ComplexMatrix::<T>::from_fn(m, p, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            c(re, im)
        });
        for _ in 0..4 {
            for j in 0..p {
                let col: Vec<Complex<T>> = q.column(j).iter().copied().collect();
                let z = lu.solve(&col);
                q.column_mut(j).copy_from_slice(&z);
            }
            q = q.qr().q();
        }
        let r = residual.mul_dense(&q);
        let svd = r.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::EigenFailure("SVD did not return right vectors".into()))?;
        let small: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= threshold)
            .collect();
        if small.len() < p || p == m {
            return Ok(small
                .into_iter()
                .map(|i| {
                    let v = v_t.row(i).adjoint();
                    (&q * v).iter().copied().collect()
                })
                .collect());
        }
        p = (2 * p).min(m);
    }
}

/// Stationary states spanning the kernel of the Schroedinger-side
/// Liouvillian.
///
/// The kernel comes from [`liouvillian_kernel`]. For a degenerate kernel
/// the Hermitian kernel elements are split into positive and negative parts, which are stationary in
/// their own right, and a linearly independent set of states is kept.
pub fn steady_states<T: Real>(
    model: &ModelSpec<T>,
    opts: &SteadyStateOptions<T>,
) -> Result<InvariantStateReport<T>> {
    let n = model.dim();
    let lv = liouvillian(model, Side::Schroedinger, opts.dim_cap)?;
    let lnorm = lv.norm_inf();
    let kernel = liouvillian_kernel(lv.sparse(), opts.tol)?;
    let k = kernel.len();
    if k == 0 {
        return Err(Error::EmptyNullSpace);
    }
    let mut notes = Vec::new();
    let raw: Vec<ComplexMatrix<T>> = kernel.iter().map(|v| devectorize(v, n)).collect();

    let mut candidates: Vec<(ComplexMatrix<T>, ComplexMatrix<T>)> = Vec::new();
    if k == 1 {
        let x = &raw[0];
        let tr = x.trace();
        if tr.norm_sqr() > T::zero() {
            let scaled = x / tr;
            if let Some(clean) = clean_state(&scaled)? {
                candidates.push((scaled, clean));
            }
        }
    } else {
        let half = cr(T::lit(0.5));
        let mut herm: Vec<ComplexMatrix<T>> = Vec::new();
        for x in &raw {
            let re = (x + x.adjoint()) * half;
            let im = (x - x.adjoint()) * c::<T>(0.0, -0.5);
            extend_basis(&mut herm, &re, T::lit(1e-8));
            extend_basis(&mut herm, &im, T::lit(1e-8));
        }
        for y in &herm {
            let cut = opts.tol * T::one().max(hermitian_norm(y)?) * T::lit(10.0);
            let (pos, neg) = jordan_parts(y, cut)?;
            for part in [pos, neg] {
                let tr = part.trace().re;
                if tr > cut {
                    let scaled = &part / cr(tr);
                    candidates.push((scaled.clone(), scaled));
                }
            }
        }
        notes.push(format!(
            "degenerate stationary space of dimension {k}; a basis of states is returned"
        ));
    }

    let mut chosen: Vec<ComplexMatrix<T>> = Vec::new();
    let mut states = Vec::new();
    for (before, rho) in candidates {
        if states.len() == k {
            break;
        }
        if !extend_basis(&mut chosen, &rho, T::lit(1e-6)) {
            continue;
        }
        let cleanup_shift = norm_max(&(&rho - &before));
        let residual = norm_max(&apply_schroedinger(model, &rho)?);
        let reliable = cleanup_shift <= T::lit(10.0) * opts.tol
            && residual <= T::lit(10.0) * opts.tol * T::one().max(lnorm);
        let rho = DensityMatrix::from_trusted(rho);
        let f = faithfulness_check(&rho, opts.tol)?;
        states.push(StationaryState {
            rho,
            faithful: f.faithful,
            rank: f.rank,
            support: f.support,
            residual,
            cleanup_shift,
            reliable,
        });
    }
    if states.is_empty() {
        return Err(Error::EmptyNullSpace);
    }
    if states.len() < k {
        notes.push(format!(
            "only {} independent states recovered from a kernel of dimension {k}",
            states.len()
        ));
    }
    if states.iter().any(|s| !s.reliable) {
        notes.push("some states moved by more than 10*tol during cleanup or have large residuals".into());
    }
    Ok(InvariantStateReport {
        states,
        null_dimension: k,
        unique: if k == 1 {
            Uniqueness::Unique
        } else {
            Uniqueness::NotUnique
        },
        liouvillian_norm: lnorm,
        tol: opts.tol,
        notes,
    })
}

#[derive(Debug, Clone)]
pub struct Faithfulness<T: Real> {
    pub faithful: bool,
    pub support: ComplexMatrix<T>,
    pub rank: usize,
}

/// Rank and support projection of a state, counting eigenvalues above `tol`.
pub fn faithfulness_check<T: Real>(rho: &DensityMatrix<T>, tol: T) -> Result<Faithfulness<T>> {
    let n = rho.dim();
    let (vals, vecs) = eigh(rho.matrix())?;
    let mut support = ComplexMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &lam) in vals.iter().enumerate() {
        if lam > tol {
            let col = vecs.column(k);
            support += col * col.adjoint();
            rank += 1;
        }
    }
    Ok(Faithfulness {
        faithful: rank == n,
        support,
        rank,
    })
}

/// Checks `P = P^dag = P^2`; with `nontrivial`, also `0 != P != I`.
pub fn validate_projection<T: Real>(p: &ComplexMatrix<T>, nontrivial: bool) -> Result<()> {
    crate::operator::validate_operator(p)?;
    let tol = T::floor_tol(1e-8, 1e3);
    if norm_max(&(p - p.adjoint())) > tol {
        return Err(Error::InvalidProjection("not Hermitian".into()));
    }
    if norm_max(&(p * p - p)) > tol {
        return Err(Error::InvalidProjection("not idempotent".into()));
    }
    if nontrivial {
        let rank = p.trace().re;
        let n = T::from_usize(p.nrows()).unwrap();
        if rank < T::lit(0.5) || rank > n - T::lit(0.5) {
            return Err(Error::InvalidProjection("projection is 0 or the identity".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ConnectivityResult<T: Real> {
    pub projection: ComplexMatrix<T>,
    /// `sum_k ||P L_k^dag (I - P) L_k P||` (spectral norm).
    pub value: T,
    pub connected: bool,
}

/// Connectivity of a non-trivial projection: `sum_k ||P L_k^dag (I-P) L_k P||`
/// above `threshold`.
pub fn connectivity_check<T: Real>(
    model: &ModelSpec<T>,
    p: &ComplexMatrix<T>,
    threshold: T,
) -> Result<ConnectivityResult<T>> {
    if p.nrows() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: p.nrows(),
        });
    }
    validate_projection(p, true)?;
    let q = identity::<T>(model.dim()) - p;
    let mut value = T::zero();
    for l in model.couplings() {
        let lp = l * p;
        let term = lp.adjoint() * &q * &lp;
        value += hermitian_norm(&term)?;
    }
    Ok(ConnectivityResult {
        projection: p.clone(),
        value,
        connected: value > threshold,
    })
}

/// How the projections of a scan are produced.
#[derive(Debug, Clone)]
pub enum ProjectionFamily<T: Real> {
    /// Spectral projections of a Hermitian operator (an observable or a state).
    SpectralOf(HermitianOperator<T>),
    /// `|i><i|` for every basis index.
    Coordinate,
    UserList(Vec<ComplexMatrix<T>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanItem {
    /// The `i`-th member of the family.
    Member(usize),
    /// Sum of members `0..=i`.
    PartialSum(usize),
}

#[derive(Debug, Clone)]
pub struct ScanEntry<T: Real> {
    pub item: ScanItem,
    pub result: ConnectivityResult<T>,
}

#[derive(Debug, Clone)]
pub struct ConnectivityScan<T: Real> {
    pub entries: Vec<ScanEntry<T>>,
    pub all_connected: bool,
    pub counterexample: Option<ScanItem>,
    pub caveat: &'static str,
}

fn resolve_family<T: Real>(n: usize, family: &ProjectionFamily<T>) -> Result<Vec<ComplexMatrix<T>>> {
    let members = match family {
        ProjectionFamily::SpectralOf(a) => {
            if a.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.dim(),
                });
            }
            spectral_decompose(a, default_degeneracy_tol())?.projections
        }
        ProjectionFamily::Coordinate => (0..n)
            .map(|i| crate::operator::ket_bra(i, i, n))
            .collect::<Result<_>>()?,
        ProjectionFamily::UserList(list) => {
            if list.is_empty() {
                return Err(Error::InvalidProjection("empty projection family".into()));
            }
            for p in list {
                if p.nrows() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: p.nrows(),
                    });
                }
                validate_projection(p, false)?;
            }
            list.clone()
        }
    };
    Ok(members)
}

/// Connectivity of every non-trivial member of a projection family and of
/// every non-trivial partial sum `P_0 + ... + P_i`.
pub fn connectivity_scan<T: Real>(
    model: &ModelSpec<T>,
    family: &ProjectionFamily<T>,
    threshold: T,
) -> Result<ConnectivityScan<T>> {
    let n = model.dim();
    let members = resolve_family(n, family)?;
    let nontrivial = |p: &ComplexMatrix<T>| validate_projection(p, true).is_ok();

    let mut items: Vec<(ScanItem, ComplexMatrix<T>)> = Vec::new();
    let mut partial = ComplexMatrix::zeros(n, n);
    for (i, p) in members.iter().enumerate() {
        if nontrivial(p) {
            items.push((ScanItem::Member(i), p.clone()));
        }
        partial += p;
        if i > 0 && i + 1 < members.len() && nontrivial(&partial) {
            items.push((ScanItem::PartialSum(i), partial.clone()));
        }
    }
    let entries: Vec<ScanEntry<T>> = items
        .into_par_iter()
        .map(|(item, p)| {
            connectivity_check(model, &p, threshold).map(|result| ScanEntry { item, result })
        })
        .collect::<Result<_>>()?;
    let counterexample = entries
        .iter()
        .find(|e| !e.result.connected)
        .map(|e| e.item);
    Ok(ConnectivityScan {
        all_connected: counterexample.is_none(),
        counterexample,
        entries,
        caveat: FAMILY_CAVEAT,
    })
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub verdict: Uniqueness,
    /// Dimension of the commutant of `{H, L_k, L_k^dag}`.
    pub commutant_dimension: usize,
    /// Dimension of the span of words in the generators, once stable.
    pub algebra_dimension: Option<usize>,
    pub null_dimension: usize,
    pub notes: Vec<String>,
}

/// Kernel dimension of `X -> ([X, A_1], [X, A_2], ...)`.
fn commutant_dimension<T: Real>(gens: &[ComplexMatrix<T>], tol: T) -> Result<usize> {
    let n = gens[0].nrows();
    let id = SparseMatrix::<T>::identity(n);
    let mut trip = Vec::new();
    for (g_idx, a) in gens.iter().enumerate() {
        let s = SparseMatrix::from_dense(a);
        // vec(XA - AX) = (A^T (x) I - I (x) A) vec(X)
        let block = SparseMatrix::kron(&s.transpose(), &id)
            .add(&SparseMatrix::kron(&id, &s).scale(cr(-T::one())));
        for (r, col, v) in block.triplets() {
            trip.push((r * gens.len() + g_idx, col, v));
        }
    }
    let stacked = SparseMatrix::from_triplets(n * n * gens.len(), n * n, trip);
    Ok(rectangular_kernel(&stacked, tol)?.len())
}

/// Uniqueness of the invariant state via irreducibility.
///
/// The commutant of `{H, L_k, L_k^dag}` is computed exactly as a kernel. The
/// span of words in `{I, H, L_k, L_k^dag}` is grown up to `max_products`
/// factors; if it has not stopped growing by then the verdict is
/// inconclusive unless the stationary space already shows non-uniqueness.
pub fn uniqueness_check<T: Real>(
    model: &ModelSpec<T>,
    tol: T,
    max_products: usize,
) -> Result<UniquenessReport> {
    let n = model.dim();
    let mut notes = Vec::new();
    if n == 1 {
        return Ok(UniquenessReport {
            verdict: Uniqueness::Unique,
            commutant_dimension: 1,
            algebra_dimension: Some(1),
            null_dimension: 1,
            notes,
        });
    }
    let null_dimension = steady_states(
        model,
        &SteadyStateOptions {
            tol,
            dim_cap: DEFAULT_DIM_CAP,
        },
    )?
    .null_dimension;

    let mut gens = vec![model.hamiltonian().matrix().clone()];
    for l in model.couplings() {
        gens.push(l.clone());
        gens.push(l.adjoint());
    }
    let commutant = commutant_dimension(&gens, tol)?;

    let mut span: Vec<ComplexMatrix<T>> = Vec::new();
    extend_basis(&mut span, &identity::<T>(n), T::lit(1e-8));
    let mut frontier = span.clone();
    let mut stable = false;
    for _ in 0..max_products {
        let mut fresh = Vec::new();
        for w in &frontier {
            for g in &gens {
                let prod = g * w;
                if extend_basis(&mut span, &prod, T::lit(1e-8)) {
                    fresh.push(span[span.len() - 1].clone());
                }
            }
        }
        if fresh.is_empty() {
            stable = true;
            break;
        }
        frontier = fresh;
    }
    let algebra_dimension = stable.then_some(span.len());

    if let Some(dim) = algebra_dimension {
        let full = dim == n * n;
        if full != (commutant == 1) {
            notes.push(format!(
                "algebra dimension {dim} and commutant dimension {commutant} disagree"
            ));
        }
    }
    let verdict = if null_dimension > 1 {
        if commutant == 1 {
            notes.push("irreducible generators but a degenerate stationary space".into());
        }
        Uniqueness::NotUnique
    } else if commutant > 1 {
        notes.push("generators leave a non-trivial subspace invariant".into());
        Uniqueness::NotUnique
    } else if !stable {
        notes.push(format!("word span not stable after {max_products} products"));
        Uniqueness::Inconclusive
    } else if notes.is_empty() {
        Uniqueness::Unique
    } else {
        Uniqueness::Inconclusive
    };
    Ok(UniquenessReport {
        verdict,
        commutant_dimension: commutant,
        algebra_dimension,
        null_dimension,
        notes,
    })
}

#[derive(Debug, Clone)]
pub struct SubharmonicityResult<T: Real> {
    pub verdict: Verdict,
    pub min_eigenvalue: T,
    pub witness: Option<Witness<T>>,
}

/// `G(P) >= 0` up to the relative tolerance `tol`.
pub fn subharmonicity_check<T: Real>(
    model: &ModelSpec<T>,
    p: &ComplexMatrix<T>,
    tol: T,
) -> Result<SubharmonicityResult<T>> {
    if p.nrows() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: p.nrows(),
        });
    }
    validate_projection(p, false)?;
    let g = generator_heisenberg(model, p)?;
    Ok(match psd_check_matrix(&g, tol)? {
        PsdVerdict::Holds { min_eigenvalue } => SubharmonicityResult {
            verdict: Verdict::Holds,
            min_eigenvalue,
            witness: None,
        },
        PsdVerdict::Fails {
            eigenvalue,
            eigenvector,
        } => SubharmonicityResult {
            verdict: Verdict::Fails,
            min_eigenvalue: eigenvalue,
            witness: Some(Witness {
                eigenvalue,
                vector: eigenvector,
            }),
        },
    })
}

/// Pure-state vector helper for callers building projections.
pub fn projector<T: Real>(psi: &ComplexVector<T>) -> ComplexMatrix<T> {
    let norm2 = psi.norm_squared();
    psi * psi.adjoint() / cr(norm2)
}
