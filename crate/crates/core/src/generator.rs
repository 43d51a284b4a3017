//! Lindblad generators in both pictures, the dissipation functional, the
//! Heisenberg diffusion coefficients, and the vectorized Liouvillian.
//!
//! For a model `(H, {L_k})` the Heisenberg generator is
//! `G(X) = -i[X, H] + sum_k (L_k^dag X L_k - 1/2 L_k^dag L_k X - 1/2 X L_k^dag L_k)`
//! and the Schroedinger generator is its trace dual. Vectorization is
//! column-stacking: `vec(X)[i + d*j] = X[i, j]`, so that
//! `vec(A X B) = (B^T kron A) vec(X)`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::operator::{c, cr, validate_operator, ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;

/// Largest system dimension accepted for superoperator construction.
pub const DEFAULT_DIM_CAP: usize = 200;

/// Hamiltonian plus coupling operators. The scattering matrix is the
/// identity throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T: Real> {
    hamiltonian: HermitianOperator<T>,
    couplings: Vec<ComplexMatrix<T>>,
    labels: Option<Vec<String>>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(hamiltonian: HermitianOperator<T>, couplings: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::NoCouplings);
        }
        let dim = hamiltonian.dim();
        for l in &couplings {
            validate_operator(l)?;
            if l.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: l.nrows(),
                });
            }
        }
        Ok(Self {
            hamiltonian,
            couplings,
            labels: None,
        })
    }

    /// Model with zero Hamiltonian.
    pub fn dissipative(couplings: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let dim = couplings
            .first()
            .map(|l| l.nrows())
            .ok_or(Error::NoCouplings)?;
        Self::new(HermitianOperator::zeros(dim)?, couplings)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_hamiltonian(&self, hamiltonian: HermitianOperator<T>) -> Result<Self> {
        let mut m = Self::new(hamiltonian, self.couplings.clone())?;
        m.labels = self.labels.clone();
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator<T> {
        &self.hamiltonian
    }

    pub fn couplings(&self) -> &[ComplexMatrix<T>] {
        &self.couplings
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `sum_k L_k^dag L_k`.
    pub fn decay_operator(&self) -> ComplexMatrix<T> {
        let n = self.dim();
        self.couplings
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, l| acc + l.adjoint() * l)
    }

    fn check(&self, x: &ComplexMatrix<T>) -> Result<()> {
        validate_operator(x)?;
        if x.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.nrows(),
            });
        }
        Ok(())
    }
}

/// `sum_k (L_k^dag X L_k - 1/2 L_k^dag L_k X - 1/2 X L_k^dag L_k)`.
pub fn dissipator<T: Real>(model: &ModelSpec<T>, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    model.check(x)?;
    let half = cr(T::lit(0.5));
    let n = model.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for l in model.couplings() {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += &ld * x * l - (&ldl * x + x * &ldl) * half;
    }
    Ok(out)
}

/// Heisenberg generator `-i[X, H] + dissipator(X)`.
pub fn generator_heisenberg<T: Real>(
    model: &ModelSpec<T>,
    x: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let h = model.hamiltonian().matrix();
    let comm = x * h - h * x;
    Ok(comm * c::<T>(0.0, -1.0) + dissipator(model, x)?)
}

/// Schroedinger generator `-i[H, X] + sum_k (L_k X L_k^dag - 1/2 {L_k^dag L_k, X})`
/// for an arbitrary square `X`.
pub fn apply_schroedinger<T: Real>(
    model: &ModelSpec<T>,
    x: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    model.check(x)?;
    let h = model.hamiltonian().matrix();
    let half = cr(T::lit(0.5));
    let mut out = (h * x - x * h) * c::<T>(0.0, -1.0);
    for l in model.couplings() {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += l * x * &ld - (&ldl * x + x * &ldl) * half;
    }
    Ok(out)
}

pub fn generator_schroedinger<T: Real>(
    model: &ModelSpec<T>,
    rho: &DensityMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    apply_schroedinger(model, rho.matrix())
}

/// `G(X^dag X) - G(X^dag) X - X^dag G(X)`.
pub fn dissipation_functional<T: Real>(
    model: &ModelSpec<T>,
    x: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let xd = x.adjoint();
    let g_xx = generator_heisenberg(model, &(&xd * x))?;
    let g_xd = generator_heisenberg(model, &xd)?;
    let g_x = generator_heisenberg(model, x)?;
    Ok(g_xx - g_xd * x - &xd * g_x)
}

/// Diffusion coefficients of the Heisenberg Langevin equation, one pair per
/// coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffusion<T: Real> {
    /// `1/2 ([X, L] + [L^dag, X])`
    pub b: ComplexMatrix<T>,
    /// `i/2 (-[X, L] + [L^dag, X])`
    pub c: ComplexMatrix<T>,
}

pub fn heisenberg_diffusion<T: Real>(
    model: &ModelSpec<T>,
    x: &ComplexMatrix<T>,
) -> Result<Vec<Diffusion<T>>> {
    model.check(x)?;
    let half = cr(T::lit(0.5));
    let half_i = c::<T>(0.0, 0.5);
    Ok(model
        .couplings()
        .iter()
        .map(|l| {
            let ld = l.adjoint();
            let x_l = x * l - l * x;
            let ld_x = &ld * x - x * &ld;
            Diffusion {
                b: (&x_l + &ld_x) * half,
                c: (ld_x - x_l) * half_i,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Heisenberg,
    Schroedinger,
}

/// Generator as a `dim^2 x dim^2` matrix on column-stacked operators.
#[derive(Debug, Clone)]
pub struct Superoperator<T: Real> {
    dim: usize,
    side: Side,
    matrix: SparseMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn sparse(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        self.matrix.to_dense()
    }

    /// Devectorized `M vec(X)`.
    pub fn apply(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let v = self.matrix.mul_vec(&vectorize(x));
        devectorize(&v, self.dim)
    }

    pub fn norm_inf(&self) -> T {
        self.matrix.norm_inf()
    }
}

pub fn vectorize<T: Real>(x: &ComplexMatrix<T>) -> Vec<Complex<T>> {
    // nalgebra storage is column-major, which is exactly column stacking
    x.as_slice().to_vec()
}

pub fn devectorize<T: Real>(v: &[Complex<T>], dim: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_column_slice(dim, dim, v)
}

/// Liouvillian of `model` on the requested side, refusing dimensions above
/// `cap`.
pub fn liouvillian<T: Real>(model: &ModelSpec<T>, side: Side, cap: usize) -> Result<Superoperator<T>> {
    let d = model.dim();
    if d > cap {
        return Err(Error::DimensionCap { dim: d, cap });
    }
    let id = SparseMatrix::<T>::identity(d);
    let h = SparseMatrix::from_dense(model.hamiltonian().matrix());
    let k = SparseMatrix::from_dense(&model.decay_operator());
    let i_unit = c::<T>(0.0, 1.0);
    let m_half = cr(T::lit(-0.5));
    let matrix = match side {
        Side::Schroedinger => {
            // rho -> A rho + rho A^dag + sum L rho L^dag, A = -iH - K/2
            let a = h.scale(-i_unit).add(&k.scale(m_half));
            let mut m = SparseMatrix::kron(&id, &a).add(&SparseMatrix::kron(&a.conj(), &id));
            for l in model.couplings() {
                let ls = SparseMatrix::from_dense(l);
                m = m.add(&SparseMatrix::kron(&ls.conj(), &ls));
            }
            m
        }
        Side::Heisenberg => {
            // X -> B X + X B^dag + sum L^dag X L, B = iH - K/2
            let b = h.scale(i_unit).add(&k.scale(m_half));
            let mut m = SparseMatrix::kron(&id, &b).add(&SparseMatrix::kron(&b.conj(), &id));
            for l in model.couplings() {
                let ls = SparseMatrix::from_dense(l);
                m = m.add(&SparseMatrix::kron(&ls.transpose(), &ls.adjoint()));
            }
            m
        }
    };
    Ok(Superoperator {
        dim: d,
        side,
        matrix,
    })
}
