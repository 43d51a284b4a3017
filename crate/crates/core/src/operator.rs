//! Dense complex operators: validation, Hermitian spectral decomposition,
//! semidefiniteness tests, and the standard operator builders.
//!
//! Basis vectors are indexed `0, 1, ...`. The first basis vector of a qubit
//! is `|0>`, so `sigma_z = diag(1, -1)` and `sigma_minus = |1><0|` maps the
//! first basis vector onto the second.

use std::ops::Deref;

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{hermiticity_tol, Real};

pub type ComplexMatrix<T> = DMatrix<Complex<T>>;
pub type ComplexVector<T> = DVector<Complex<T>>;

pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Check that `m` is square with finite entries.
pub fn validate_operator<T: Real>(m: &ComplexMatrix<T>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidDimension(0));
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Largest entry modulus.
pub fn norm_max<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn dagger<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    m.adjoint()
}

pub fn commutator<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a * b + b * a
}

pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kronecker(b)
}

pub fn identity<T: Real>(dim: usize) -> ComplexMatrix<T> {
    ComplexMatrix::identity(dim, dim)
}

/// `tr(a b)` without forming the product.
pub fn trace_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Observable: a complex matrix that is Hermitian within
/// `1e-10 * max(1, ||A||_max)`. Inputs outside the tolerance are rejected
/// rather than symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        validate_operator(&matrix)?;
        let scale = T::one().max(norm_max(&matrix));
        let tol = hermiticity_tol::<T>() * scale;
        let deviation = norm_max(&(&matrix - matrix.adjoint()));
        if deviation > tol {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64_lossy(),
                tolerance: tol.to_f64_lossy(),
            });
        }
        Ok(Self { matrix })
    }

    /// Hermitian part `(m + m^dagger) / 2` of an arbitrary square matrix.
    pub fn hermitian_part(matrix: &ComplexMatrix<T>) -> Result<Self> {
        validate_operator(matrix)?;
        let half = cr(T::lit(0.5));
        Ok(Self {
            matrix: (matrix + matrix.adjoint()) * half,
        })
    }

    pub fn from_real_diagonal(diag: &[T]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| cr(x)));
        Self::new(ComplexMatrix::from_diagonal(&d))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self {
            matrix: identity(dim),
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_inner(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// `self + s I`.
    pub fn shifted(&self, s: T) -> Self {
        let n = self.dim();
        Self {
            matrix: &self.matrix + identity::<T>(n) * cr(s),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            matrix: &self.matrix * cr(s),
        }
    }

    /// Eigenvalues in ascending order together with their eigenvectors
    /// (columns, same order).
    pub fn eigh(&self) -> Result<(Vec<T>, ComplexMatrix<T>)> {
        eigh(&self.matrix)
    }

    /// Expectation `tr(rho A)`, real for Hermitian `A`.
    pub fn expectation(&self, rho: &DensityMatrix<T>) -> T {
        trace_product(rho.matrix(), &self.matrix).re
    }
}

impl<T: Real> Deref for HermitianOperator<T> {
    type Target = ComplexMatrix<T>;
    fn deref(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }
}

/// Hermitian eigen-decomposition of a matrix already known to be Hermitian
/// (only its Hermitian part is used). Ascending eigenvalues.
pub(crate) fn eigh<T: Real>(m: &ComplexMatrix<T>) -> Result<(Vec<T>, ComplexMatrix<T>)> {
    let n = m.nrows();
    let half = cr(T::lit(0.5));
    let sym = (m + m.adjoint()) * half;
    let eig = SymmetricEigen::try_new(sym, T::eps(), 100 * n.max(10) * n.max(10))
        .ok_or_else(|| Error::EigenFailure("symmetric eigen-solver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Spectral data `A = sum_i v_i P_i` with distinct eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Real> {
    /// Distinct eigenvalues, ascending. Merged groups report their mean.
    pub eigenvalues: Vec<T>,
    pub projections: Vec<ComplexMatrix<T>>,
    pub multiplicities: Vec<usize>,
    /// Every eigenvalue with multiplicity, ascending.
    pub spectrum: Vec<T>,
    /// Eigenvectors as columns, in the order of `spectrum`.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let n = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projections)
            .fold(ComplexMatrix::zeros(n, n), |acc, (&v, p)| acc + p * cr(v))
    }

    /// `sum_{i < m} P_i`.
    pub fn projection_below(&self, m: usize) -> ComplexMatrix<T> {
        let n = self.dim();
        self.projections
            .iter()
            .take(m)
            .fold(ComplexMatrix::zeros(n, n), |acc, p| acc + p)
    }

    /// Orthonormal eigenbasis, ascending, where each degenerate eigenspace
    /// is spanned by Gram-Schmidt over the projected standard basis vectors.
    /// For a diagonal operator this returns standard basis vectors.
    pub fn canonical_eigenbasis(&self) -> Vec<(T, ComplexVector<T>)> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for ((&v, p), &mult) in self
            .eigenvalues
            .iter()
            .zip(&self.projections)
            .zip(&self.multiplicities)
        {
            let mut found: Vec<ComplexVector<T>> = Vec::with_capacity(mult);
            for k in 0..n {
                if found.len() == mult {
                    break;
                }
                let mut w: ComplexVector<T> = p.column(k).into_owned();
                for q in &found {
                    let overlap = q.dotc(&w);
                    w -= q * overlap;
                }
                let norm = w.norm();
                if norm > T::lit(1e-6) {
                    w /= cr(norm);
                    let phase = phase_normalizer(&w);
                    found.push(w * phase);
                }
            }
            for q in found {
                out.push((v, q));
            }
        }
        out
    }
}

/// Unit phase making the largest-modulus entry real and positive.
pub(crate) fn phase_normalizer<T: Real>(v: &ComplexVector<T>) -> Complex<T> {
    let mut best = Complex::new(T::zero(), T::zero());
    let mut best_mod = T::zero();
    for z in v.iter() {
        let m = z.modulus();
        if m > best_mod * (T::one() + T::lit(1e-9)) {
            best_mod = m;
            best = *z;
        }
    }
    if best_mod == T::zero() {
        Complex::new(T::one(), T::zero())
    } else {
        best.conj() / cr(best_mod)
    }
}

/// Spectral decomposition with eigenvalues closer than `degeneracy_tol`
/// (absolute gap between neighbours) merged into one projection.
pub fn spectral_decompose<T: Real>(
    a: &HermitianOperator<T>,
    degeneracy_tol: T,
) -> Result<SpectralDecomposition<T>> {
    if degeneracy_tol < T::zero() {
        return Err(Error::InvalidArgument("negative degeneracy tolerance".into()));
    }
    let (spectrum, vectors) = a.eigh()?;
    let n = a.dim();
    let mut eigenvalues = Vec::new();
    let mut projections = Vec::new();
    let mut multiplicities = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && spectrum[end] - spectrum[end - 1] <= degeneracy_tol {
            end += 1;
        }
        let mut p = ComplexMatrix::zeros(n, n);
        let mut sum = T::zero();
        for k in start..end {
            let col = vectors.column(k);
            p += col * col.adjoint();
            sum += spectrum[k];
        }
        eigenvalues.push(sum / T::from_usize(end - start).unwrap());
        projections.push(p);
        multiplicities.push(end - start);
        start = end;
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projections,
        multiplicities,
        spectrum,
        eigenvectors: vectors,
    })
}

/// Outcome of a semidefiniteness test.
#[derive(Debug, Clone)]
pub enum PsdVerdict<T: Real> {
    Holds {
        min_eigenvalue: T,
    },
    /// The most negative eigenvalue and its eigenvector.
    Fails {
        eigenvalue: T,
        eigenvector: ComplexVector<T>,
    },
}

impl<T: Real> PsdVerdict<T> {
    pub fn holds(&self) -> bool {
        matches!(self, PsdVerdict::Holds { .. })
    }

    pub fn min_eigenvalue(&self) -> T {
        match self {
            PsdVerdict::Holds { min_eigenvalue } => *min_eigenvalue,
            PsdVerdict::Fails { eigenvalue, .. } => *eigenvalue,
        }
    }
}

/// `A >= 0` up to the relative shift `-tol * max(1, ||A||)`, with `||A||`
/// the spectral norm.
pub fn psd_check<T: Real>(a: &HermitianOperator<T>, tol: T) -> Result<PsdVerdict<T>> {
    psd_check_matrix(a.matrix(), tol)
}

pub(crate) fn psd_check_matrix<T: Real>(a: &ComplexMatrix<T>, tol: T) -> Result<PsdVerdict<T>> {
    let (values, vectors) = eigh(a)?;
    let min = values[0];
    let max = values[values.len() - 1];
    let scale = T::one().max(min.abs().max(max.abs()));
    if min >= -tol * scale {
        Ok(PsdVerdict::Holds {
            min_eigenvalue: min,
        })
    } else {
        Ok(PsdVerdict::Fails {
            eigenvalue: min,
            eigenvector: vectors.column(0).into_owned(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli<T: Real>(axis: Axis) -> ComplexMatrix<T> {
    let z = c::<T>(0.0, 0.0);
    let one = c::<T>(1.0, 0.0);
    match axis {
        Axis::X => ComplexMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Axis::Y => ComplexMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        Axis::Z => ComplexMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// `|1><0|`.
pub fn sigma_minus<T: Real>() -> ComplexMatrix<T> {
    ket_bra(1, 0, 2).expect("valid indices")
}

/// `|0><1|`.
pub fn sigma_plus<T: Real>() -> ComplexMatrix<T> {
    ket_bra(0, 1, 2).expect("valid indices")
}

/// Truncated annihilation operator, `a|n> = sqrt(n)|n-1>`.
pub fn ladder_lowering<T: Real>(dim: usize) -> Result<ComplexMatrix<T>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut a = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = cr(T::from_usize(n).unwrap().sqrt());
    }
    Ok(a)
}

pub fn ladder_raising<T: Real>(dim: usize) -> Result<ComplexMatrix<T>> {
    Ok(ladder_lowering::<T>(dim)?.adjoint())
}

pub fn number_operator<T: Real>(dim: usize) -> Result<ComplexMatrix<T>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let d = DVector::from_iterator(dim, (0..dim).map(|n| cr(T::from_usize(n).unwrap())));
    Ok(ComplexMatrix::from_diagonal(&d))
}

/// `|i><j|` in dimension `dim`.
pub fn ket_bra<T: Real>(i: usize, j: usize, dim: usize) -> Result<ComplexMatrix<T>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    for index in [i, j] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(i, j)] = cr(T::one());
    Ok(m)
}

/// Positive, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    op: HermitianOperator<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates trace `1 +- tol` and minimum eigenvalue `>= -tol`.
    pub fn new(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        let op = HermitianOperator::new(matrix)?;
        let tr = op.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace {} differs from 1",
                tr.re.to_f64_lossy()
            )));
        }
        let (values, _) = op.eigh()?;
        if values[0] < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                values[0].to_f64_lossy()
            )));
        }
        Ok(Self { op })
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix<T>) -> Self {
        Self {
            op: HermitianOperator { matrix },
        }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &ComplexVector<T>) -> Result<Self> {
        let norm2 = psi.norm_squared();
        if psi.is_empty() || norm2 <= T::zero() || !norm2.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        Ok(Self::from_trusted(psi * psi.adjoint() / cr(norm2)))
    }

    pub fn basis_state(i: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, dim });
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(i, i)] = cr(T::one());
        Ok(Self::from_trusted(m))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let p = T::one() / T::from_usize(dim).unwrap();
        Ok(Self::from_trusted(identity::<T>(dim) * cr(p)))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_inner(self) -> ComplexMatrix<T> {
        self.op.into_inner()
    }

    /// `<X> = tr(rho X)`; complex for non-Hermitian `X`.
    pub fn expect(&self, x: &ComplexMatrix<T>) -> Complex<T> {
        trace_product(self.matrix(), x)
    }

    /// Trace distance `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix<T>) -> Result<T> {
        let diff = self.matrix() - other.matrix();
        let (values, _) = eigh(&diff)?;
        Ok(values.iter().fold(T::zero(), |acc, v| acc + v.abs()) * T::lit(0.5))
    }
}

impl<T: Real> Deref for DensityMatrix<T> {
    type Target = ComplexMatrix<T>;
    fn deref(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> HermitianOperator<f64> {
        HermitianOperator::from_real_diagonal(v).unwrap()
    }

    #[test]
    fn identity_has_single_projection() {
        let id = HermitianOperator::<f64>::identity(3).unwrap();
        let sd = spectral_decompose(&id, 1e-9).unwrap();
        assert_eq!(sd.eigenvalues.len(), 1);
        assert!((sd.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert_eq!(sd.multiplicities, vec![3]);
        assert!(norm_max(&(&sd.projections[0] - identity::<f64>(3))) < 1e-14);
    }

    #[test]
    fn qubit_energy_projections() {
        let v = HermitianOperator::new(sigma_plus::<f64>() * sigma_minus::<f64>()).unwrap();
        let sd = spectral_decompose(&v, 1e-9).unwrap();
        assert_eq!(sd.eigenvalues.len(), 2);
        assert!(sd.eigenvalues[0].abs() < 1e-14);
        assert!((sd.eigenvalues[1] - 1.0).abs() < 1e-14);
        // eigenvalue 0 <-> |1><1|, eigenvalue 1 <-> |0><0|
        assert!(norm_max(&(&sd.projections[0] - ket_bra::<f64>(1, 1, 2).unwrap())) < 1e-14);
        assert!(norm_max(&(&sd.projections[1] - ket_bra::<f64>(0, 0, 2).unwrap())) < 1e-14);
    }

    #[test]
    fn number_operator_spectrum() {
        let n = HermitianOperator::new(number_operator::<f64>(6).unwrap()).unwrap();
        let sd = spectral_decompose(&n, 1e-9).unwrap();
        for (i, v) in sd.eigenvalues.iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-12);
            assert!(norm_max(&(&sd.projections[i] - ket_bra::<f64>(i, i, 6).unwrap())) < 1e-12);
        }
    }

    #[test]
    fn degeneracy_merging() {
        let sd = spectral_decompose(&diag(&[1.0, 1.0 + 1e-12, 2.0]), 1e-9).unwrap();
        assert_eq!(sd.multiplicities, vec![2, 1]);
        let sd = spectral_decompose(&diag(&[1.0, 1.0 + 1e-6, 2.0]), 1e-9).unwrap();
        assert_eq!(sd.multiplicities, vec![1, 1, 1]);
    }

    #[test]
    fn psd_examples() {
        assert!(psd_check(&HermitianOperator::<f64>::zeros(3).unwrap(), 1e-9)
            .unwrap()
            .holds());
        match psd_check(&diag(&[-1.0, 0.0]), 1e-9).unwrap() {
            PsdVerdict::Fails {
                eigenvalue,
                eigenvector,
            } => {
                assert!((eigenvalue + 1.0).abs() < 1e-14);
                assert!((eigenvector[0].modulus() - 1.0).abs() < 1e-14);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn builders_follow_basis_convention() {
        let z = pauli::<f64>(Axis::Z);
        assert_eq!(z[(0, 0)].re, 1.0);
        assert_eq!(z[(1, 1)].re, -1.0);
        let x = pauli::<f64>(Axis::X);
        assert_eq!(x[(0, 1)].re, 1.0);
        assert_eq!(x[(1, 0)].re, 1.0);
        let y = pauli::<f64>(Axis::Y);
        assert_eq!(y[(0, 1)].im, -1.0);
        let sm = sigma_minus::<f64>();
        assert_eq!(sm[(1, 0)].re, 1.0);
        let v = sigma_plus::<f64>() * sigma_minus::<f64>();
        let half_one_plus_z = (identity::<f64>(2) + &z) * cr(0.5);
        assert!(norm_max(&(v - half_one_plus_z)) < 1e-15);
        let n3 = number_operator::<f64>(3).unwrap();
        for i in 0..3 {
            assert_eq!(n3[(i, i)].re, i as f64);
        }
        let a = ladder_lowering::<f64>(4).unwrap();
        let n4 = a.adjoint() * &a;
        assert!(norm_max(&(n4 - number_operator::<f64>(4).unwrap())) < 1e-14);
    }

    #[test]
    fn builder_errors() {
        assert!(matches!(
            ladder_lowering::<f64>(1),
            Err(Error::InvalidDimension(1))
        ));
        assert!(matches!(
            ket_bra::<f64>(0, 3, 3),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));
    }

    #[test]
    fn rejects_non_hermitian_and_non_finite() {
        let m = sigma_minus::<f64>();
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
        let mut bad = identity::<f64>(2);
        bad[(0, 1)] = Complex::new(f64::NAN, 0.0);
        assert!(matches!(
            HermitianOperator::new(bad),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        let rect = ComplexMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            validate_operator(&rect),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity::<f64>(2), 1e-9).is_err());
        assert!(DensityMatrix::new(diag(&[1.5, -0.5]).into_inner(), 1e-9).is_err());
        let rho = DensityMatrix::<f64>::maximally_mixed(4).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_basis_of_degenerate_diagonal() {
        let v = diag(&[2.0, 0.0, 0.0, -2.0]);
        let sd = spectral_decompose(&v, 1e-9).unwrap();
        let basis = sd.canonical_eigenbasis();
        let expected_index = [3usize, 1, 2, 0];
        for ((_, vec), &k) in basis.iter().zip(&expected_index) {
            assert!((vec[k].re - 1.0).abs() < 1e-12, "{vec}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let v = HermitianOperator::<f32>::new(number_operator::<f32>(4).unwrap()).unwrap();
        let sd = spectral_decompose(&v, crate::scalar::default_degeneracy_tol()).unwrap();
        assert_eq!(sd.eigenvalues.len(), 4);
        assert!(psd_check(&v, crate::scalar::default_tol()).unwrap().holds());
    }
}
