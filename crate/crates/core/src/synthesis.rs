//! Coupling synthesis: engineer jump operators that make `G(V) <= 0` for a
//! target `V`, pair by pair in the eigenbasis of `V`, and the ground-state
//! recipe that factors `V = M^dag M` and solves `M = [L, V]`.

use nalgebra::{Complex, ComplexField};

use crate::error::{Error, Result};
use crate::generator::{generator_heisenberg, ModelSpec};
use crate::lyapunov::{
    check_ground_convergence, check_lyapunov, CheckOptions, GroundConvergenceReport, LyapunovCertificate,
};
use crate::operator::{
    c, cr, norm_max, spectral_decompose, ComplexMatrix, HermitianOperator,
};
use crate::scalar::{default_tol, Real};
use crate::verdict::Verdict;

/// Orthonormal eigenbasis of `v` ordered by descending eigenvalue. Within a
/// degenerate eigenspace the vectors follow the standard basis, so a
/// diagonal `v` yields standard basis vectors.
#[derive(Debug, Clone)]
pub struct DescendingEigenbasis<T: Real> {
    pub values: Vec<T>,
    /// Columns are the eigenvectors.
    pub vectors: ComplexMatrix<T>,
    /// `permutation[k]` is the standard basis index with the largest
    /// overlap with eigenvector `k`.
    pub permutation: Vec<usize>,
    /// Eigenspace index of each level, counted from the top.
    pub eigenspace: Vec<usize>,
}

impl<T: Real> DescendingEigenbasis<T> {
    pub fn new(v: &HermitianOperator<T>, tol: T) -> Result<Self> {
        let scale = T::one().max(norm_max(v.matrix()));
        let sd = spectral_decompose(v, tol * scale)?;
        let n = v.dim();
        let groups = sd.eigenvalues.len();
        let mut values = Vec::with_capacity(n);
        let mut vectors = ComplexMatrix::zeros(n, n);
        let mut eigenspace = Vec::with_capacity(n);
        let mut col = 0;
        let basis = sd.canonical_eigenbasis();
        let mut offset = n;
        for g in (0..groups).rev() {
            let mult = sd.multiplicities[g];
            offset -= mult;
            for (val, vec) in &basis[offset..offset + mult] {
                values.push(*val);
                vectors.set_column(col, vec);
                eigenspace.push(groups - 1 - g);
                col += 1;
            }
        }
        let permutation = (0..n)
            .map(|k| {
                let column = vectors.column(k);
                let mut best = 0;
                for i in 1..n {
                    if column[i].modulus() > column[best].modulus() * (T::one() + T::lit(1e-9)) {
                        best = i;
                    }
                }
                best
            })
            .collect();
        Ok(DescendingEigenbasis {
            values,
            vectors,
            permutation,
            eigenspace,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U^dag X U`.
    pub fn to_eigen(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.vectors.adjoint() * x * &self.vectors
    }

    /// `U X U^dag`.
    pub fn from_eigen(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        &self.vectors * x * self.vectors.adjoint()
    }
}

/// One engineered transition, from eigenbasis level `high` down to `low`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingPair<T: Real> {
    pub high: usize,
    pub low: usize,
    pub l: Complex<T>,
}

#[derive(Debug, Clone)]
pub struct SynthesisSpec<T: Real> {
    pub v: HermitianOperator<T>,
    pub hamiltonian: Option<HermitianOperator<T>>,
    /// Pairs of levels in the descending eigenbasis. Empty means
    /// [`default_pairs`] with magnitude `1`.
    pub pairs: Vec<CouplingPair<T>>,
    /// Add the diagonal entry that cancels the Hamiltonian cross term of
    /// each pair.
    pub compensate_hamiltonian: bool,
    pub tol: T,
}

impl<T: Real> SynthesisSpec<T> {
    pub fn new(v: HermitianOperator<T>) -> Self {
        SynthesisSpec {
            v,
            hamiltonian: None,
            pairs: Vec::new(),
            compensate_hamiltonian: true,
            tol: default_tol(),
        }
    }

    pub fn with_hamiltonian(mut self, h: HermitianOperator<T>) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    pub fn with_pairs(mut self, pairs: Vec<CouplingPair<T>>) -> Self {
        self.pairs = pairs;
        self
    }

    pub fn compensate(mut self, on: bool) -> Self {
        self.compensate_hamiltonian = on;
        self
    }
}

/// Each level coupled to the next level with a strictly smaller eigenvalue.
pub fn default_pairs<T: Real>(basis: &DescendingEigenbasis<T>, l: Complex<T>) -> Vec<CouplingPair<T>> {
    let n = basis.dim();
    (0..n)
        .filter_map(|high| {
            ((high + 1)..n)
                .find(|&low| basis.eigenspace[low] != basis.eigenspace[high])
                .map(|low| CouplingPair { high, low, l })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairCase {
    /// Equal eigenvalues: nothing to engineer.
    Degenerate,
    /// Pure lowering coupling.
    Dissipative,
    /// Lowering coupling plus a diagonal entry cancelling the Hamiltonian.
    Compensated,
}

impl PairCase {
    pub fn as_str(self) -> &'static str {
        match self {
            PairCase::Degenerate => "degenerate",
            PairCase::Dissipative => "dissipative",
            PairCase::Compensated => "compensated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PairReport<T: Real> {
    pub pair: CouplingPair<T>,
    pub case: PairCase,
    /// `v_high - v_low`.
    pub gap: T,
    /// Predicted contribution `-gap |l|^2` to the `(high, high)` entry.
    pub contribution: T,
    /// Diagonal entry `L_{low,low}` in the eigenbasis (zero unless
    /// compensated).
    pub compensation: Complex<T>,
    /// Index into `couplings`, `None` for degenerate pairs.
    pub coupling: Option<usize>,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult<T: Real> {
    pub v: HermitianOperator<T>,
    pub hamiltonian: HermitianOperator<T>,
    /// Engineered couplings in the original basis.
    pub couplings: Vec<ComplexMatrix<T>>,
    pub pairs: Vec<PairReport<T>>,
    pub basis: DescendingEigenbasis<T>,
    /// `G(V)` in the descending eigenbasis.
    pub generator_blocks: ComplexMatrix<T>,
    /// `G(V)` in the original basis.
    pub generator: ComplexMatrix<T>,
    pub certificate: LyapunovCertificate<T>,
    /// Set when the certificate does not hold.
    pub failed: bool,
    pub notes: Vec<String>,
}

impl<T: Real> SynthesisResult<T> {
    /// The engineered model; a single zero coupling stands in when every
    /// pair was degenerate.
    pub fn model(&self) -> Result<ModelSpec<T>> {
        assembled(&self.hamiltonian, &self.couplings)
    }
}

fn assembled<T: Real>(h: &HermitianOperator<T>, couplings: &[ComplexMatrix<T>]) -> Result<ModelSpec<T>> {
    if couplings.is_empty() {
        let n = h.dim();
        ModelSpec::new(h.clone(), vec![ComplexMatrix::zeros(n, n)])
    } else {
        ModelSpec::new(h.clone(), couplings.to_vec())
    }
}

fn validate_pairs<T: Real>(pairs: &[CouplingPair<T>], basis: &DescendingEigenbasis<T>) -> Result<()> {
    let n = basis.dim();
    for p in pairs {
        if p.high >= n || p.low >= n {
            return Err(Error::IndexOutOfRange {
                index: p.high.max(p.low),
                dim: n,
            });
        }
        if p.l.modulus() == T::zero() || !p.l.re.is_finite() || !p.l.im.is_finite() {
            return Err(Error::InvalidArgument("coupling magnitude must be nonzero and finite".into()));
        }
        if basis.eigenspace[p.high] > basis.eigenspace[p.low] {
            return Err(Error::InvalidArgument(format!(
                "pair ({}, {}) couples a lower level to a higher one",
                p.high, p.low
            )));
        }
    }
    Ok(())
}

/// `V` shifted to be positive semidefinite, and the shift.
fn positive_shift<T: Real>(v: &HermitianOperator<T>, basis: &DescendingEigenbasis<T>) -> (HermitianOperator<T>, T) {
    let vmin = basis.values[basis.dim() - 1];
    if vmin < T::zero() {
        (v.shifted(-vmin), -vmin)
    } else {
        (v.clone(), T::zero())
    }
}

fn certify<T: Real>(
    model: &ModelSpec<T>,
    v: &HermitianOperator<T>,
    basis: &DescendingEigenbasis<T>,
    tol: T,
) -> Result<LyapunovCertificate<T>> {
    let (shifted, shift) = positive_shift(v, basis);
    let mut cert = check_lyapunov(model, &shifted, &CheckOptions::with_tol(tol))?;
    if shift != T::zero() {
        cert.v = v.clone();
        cert.shift = shift;
        cert.notes.push(format!("V shifted by {shift} to make it positive semidefinite"));
    }
    Ok(cert)
}

/// Build couplings pair by pair, assemble the model and certify
/// `G(V) <= 0`. A result whose certificate fails is returned with
/// `failed = true`.
pub fn synthesize_coupling<T: Real>(spec: &SynthesisSpec<T>) -> Result<SynthesisResult<T>> {
    let v = &spec.v;
    let n = v.dim();
    let h = match &spec.hamiltonian {
        Some(h) if h.dim() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.dim(),
            })
        }
        Some(h) => h.clone(),
        None => HermitianOperator::zeros(n)?,
    };
    let basis = DescendingEigenbasis::new(v, spec.tol)?;
    let pairs = if spec.pairs.is_empty() {
        default_pairs(&basis, c(1.0, 0.0))
    } else {
        spec.pairs.clone()
    };
    validate_pairs(&pairs, &basis)?;
    let h_eig = basis.to_eigen(h.matrix());
    let h_scale = T::one().max(norm_max(h.matrix()));
    let mut couplings = Vec::new();
    let mut reports = Vec::new();
    let mut notes = Vec::new();

    for p in &pairs {
        let gap = basis.values[p.high] - basis.values[p.low];
        if basis.eigenspace[p.high] == basis.eigenspace[p.low] {
            reports.push(PairReport {
                pair: *p,
                case: PairCase::Degenerate,
                gap,
                contribution: T::zero(),
                compensation: c(0.0, 0.0),
                coupling: None,
                note: Some("degenerate levels: the two-dimensional subspace is irreducible, G contribution 0".into()),
            });
            continue;
        }
        let mut l_eig = ComplexMatrix::<T>::zeros(n, n);
        l_eig[(p.low, p.high)] = p.l;
        let h_cross = h_eig[(p.low, p.high)];
        let (case, compensation, note) = if spec.hamiltonian.is_none() {
            (PairCase::Dissipative, c(0.0, 0.0), None)
        } else if h_cross.modulus() <= spec.tol * h_scale {
            (
                PairCase::Dissipative,
                c(0.0, 0.0),
                Some("Hamiltonian has no cross term on this pair; plain lowering coupling".to_string()),
            )
        } else if spec.compensate_hamiltonian {
            // Cancels -i[V,H] on (low, high): a* l (v_low - v_high) / 2 = i H (v_low - v_high).
            let a = (c::<T>(0.0, 2.0) * h_cross / p.l).conj();
            (PairCase::Compensated, a, None)
        } else {
            (
                PairCase::Dissipative,
                c(0.0, 0.0),
                Some("Hamiltonian cross term left uncompensated".to_string()),
            )
        };
        l_eig[(p.low, p.low)] = compensation;
        reports.push(PairReport {
            pair: *p,
            case,
            gap,
            contribution: -gap * p.l.modulus_squared(),
            compensation,
            coupling: Some(couplings.len()),
            note,
        });
        couplings.push(basis.from_eigen(&l_eig));
    }

    if spec.hamiltonian.is_some() {
        let tol = spec.tol * h_scale;
        for i in 0..n {
            for j in (i + 1)..n {
                if basis.eigenspace[i] == basis.eigenspace[j] || h_eig[(i, j)].modulus() <= tol {
                    continue;
                }
                let covered = spec.compensate_hamiltonian
                    && reports.iter().any(|r| {
                        r.case == PairCase::Compensated
                            && ((r.pair.high, r.pair.low) == (i, j) || (r.pair.high, r.pair.low) == (j, i))
                    });
                if !covered {
                    notes.push(format!(
                        "Hamiltonian couples levels {i} and {j} with no compensating pair"
                    ));
                }
            }
        }
    }

    let model = assembled(&h, &couplings)?;
    let generator = generator_heisenberg(&model, v)?;
    let generator_blocks = basis.to_eigen(&generator);
    let certificate = certify(&model, v, &basis, spec.tol)?;
    let failed = certificate.verdict != Verdict::Holds;
    if failed {
        notes.push("pairwise couplings do not make G(V) negative semidefinite; result flagged".into());
    }
    Ok(SynthesisResult {
        v: v.clone(),
        hamiltonian: h,
        couplings,
        pairs: reports,
        basis,
        generator_blocks,
        generator,
        certificate,
        failed,
        notes,
    })
}

/// First entry where recomputed blocks disagree with the recorded ones.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMismatch<T: Real> {
    pub row: usize,
    pub col: usize,
    pub recorded: Complex<T>,
    pub recomputed: Complex<T>,
}

#[derive(Debug, Clone)]
pub struct SynthesisVerification<T: Real> {
    pub verdict: Verdict,
    pub mismatch: Option<BlockMismatch<T>>,
    pub certificate: LyapunovCertificate<T>,
}

/// Recompute `G(V)` for `model`, compare it with the recorded blocks within
/// `1e-10` and re-run the certificate.
pub fn verify_synthesis<T: Real>(
    result: &SynthesisResult<T>,
    model: &ModelSpec<T>,
) -> Result<SynthesisVerification<T>> {
    let n = result.v.dim();
    if model.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: model.dim(),
        });
    }
    let blocks = result.basis.to_eigen(&generator_heisenberg(model, &result.v)?);
    let tol = T::floor_tol(1e-10, 64.0) * T::one().max(norm_max(&result.generator_blocks));
    let mut mismatch = None;
    'outer: for i in 0..n {
        for j in 0..n {
            if (blocks[(i, j)] - result.generator_blocks[(i, j)]).modulus() > tol {
                mismatch = Some(BlockMismatch {
                    row: i,
                    col: j,
                    recorded: result.generator_blocks[(i, j)],
                    recomputed: blocks[(i, j)],
                });
                break 'outer;
            }
        }
    }
    let certificate = certify(model, &result.v, &result.basis, result.certificate.tol)?;
    let verdict = Verdict::from_bool(mismatch.is_none()).and(certificate.verdict);
    Ok(SynthesisVerification {
        verdict,
        mismatch,
        certificate,
    })
}

/// Solutions of `M = [L, V]`: a particular member plus free directions.
#[derive(Debug, Clone)]
pub struct CouplingFamily<T: Real> {
    /// Member with all free parameters zero.
    pub particular: ComplexMatrix<T>,
    /// Positions `(i, j)` in the descending eigenbasis whose entry is free
    /// (`v_i = v_j`).
    pub free_positions: Vec<(usize, usize)>,
    /// `U E_ij U^dag` for every free position, in the original basis.
    pub free_directions: Vec<ComplexMatrix<T>>,
}

impl<T: Real> CouplingFamily<T> {
    pub fn member(&self, params: &[Complex<T>]) -> Result<ComplexMatrix<T>> {
        if params.len() != self.free_directions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.free_directions.len(),
                found: params.len(),
            });
        }
        let mut out = self.particular.clone();
        for (d, &p) in self.free_directions.iter().zip(params) {
            out += d * p;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct GroundCoupling<T: Real> {
    /// `V = M^dag M`.
    pub m: ComplexMatrix<T>,
    /// `||M^dag M - V||_max`.
    pub factor_residual: T,
    pub family: CouplingFamily<T>,
    pub default_l: ComplexMatrix<T>,
    /// Ground-set convergence check for `H = 0` and the default coupling.
    pub report: GroundConvergenceReport<T>,
    pub basis: DescendingEigenbasis<T>,
}

/// Factor `V = M^dag M` with `M = S sqrt(V)`, where `S` sends each level of
/// positive eigenvalue to a distinct kernel level, then solve
/// `M = [L, V]`. Needs `rank V <= dim ker V`.
pub fn solve_ground_coupling<T: Real>(v: &HermitianOperator<T>, tol: T) -> Result<GroundCoupling<T>> {
    let n = v.dim();
    let basis = DescendingEigenbasis::new(v, tol)?;
    let scale = T::one().max(norm_max(v.matrix()));
    let zero_tol = tol * scale;
    let vmin = basis.values[n - 1];
    if vmin < -zero_tol {
        return Err(Error::NotPositive {
            min_eigenvalue: vmin.to_f64_lossy(),
        });
    }
    let positive: Vec<usize> = (0..n).filter(|&k| basis.values[k] > zero_tol).collect();
    let kernel: Vec<usize> = (0..n).filter(|&k| basis.values[k] <= zero_tol).collect();
    if positive.len() > kernel.len() {
        return Err(Error::Unsupported(format!(
            "rank {} exceeds kernel dimension {}; no lowering factorization onto the ground space",
            positive.len(),
            kernel.len()
        )));
    }
    let mut m_eig = ComplexMatrix::<T>::zeros(n, n);
    for (&src, &dst) in positive.iter().zip(&kernel) {
        m_eig[(dst, src)] = cr(basis.values[src].sqrt());
    }
    let m = basis.from_eigen(&m_eig);
    let factor_residual = norm_max(&(m.adjoint() * &m - v.matrix()));

    // [L, V]_ij = L_ij (v_j - v_i) in the eigenbasis.
    let mut l_eig = ComplexMatrix::<T>::zeros(n, n);
    let mut free_positions = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if basis.eigenspace[i] == basis.eigenspace[j] {
                free_positions.push((i, j));
            } else {
                l_eig[(i, j)] = m_eig[(i, j)] / cr(basis.values[j] - basis.values[i]);
            }
        }
    }
    let particular = basis.from_eigen(&l_eig);
    let free_directions = free_positions
        .iter()
        .map(|&(i, j)| {
            let mut e = ComplexMatrix::<T>::zeros(n, n);
            e[(i, j)] = c(1.0, 0.0);
            basis.from_eigen(&e)
        })
        .collect();
    let default_l = particular.clone();
    let model = ModelSpec::dissipative(vec![default_l.clone()])?;
    let report = check_ground_convergence(&model, v, tol)?;
    Ok(GroundCoupling {
        m,
        factor_residual,
        family: CouplingFamily {
            particular,
            free_positions,
            free_directions,
        },
        default_l,
        report,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{ket_bra, sigma_minus};

    fn close(a: &ComplexMatrix<f64>, b: &ComplexMatrix<f64>, tol: f64) -> bool {
        norm_max(&(a - b)) <= tol
    }

    fn two_qubit_v() -> HermitianOperator<f64> {
        HermitianOperator::from_real_diagonal(&[2.0, 0.0, 0.0, -2.0]).unwrap()
    }

    fn half_sigma_y_block() -> HermitianOperator<f64> {
        let h = ket_bra::<f64>(0, 1, 4).unwrap() * c(0.0, -0.5) + ket_bra::<f64>(1, 0, 4).unwrap() * c(0.0, 0.5);
        HermitianOperator::new(h).unwrap()
    }

    fn two_qubit_pairs() -> Vec<CouplingPair<f64>> {
        let l = c(0.5f64.sqrt(), 0.0);
        vec![
            CouplingPair { high: 0, low: 1, l },
            CouplingPair { high: 1, low: 3, l },
        ]
    }

    #[test]
    fn qubit_lowering() {
        let v = HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let r = synthesize_coupling(&SynthesisSpec::new(v)).unwrap();
        assert_eq!(r.couplings.len(), 1);
        assert!(close(&r.couplings[0], &sigma_minus(), 1e-15));
        let expected = HermitianOperator::from_real_diagonal(&[-1.0, 0.0]).unwrap();
        assert!(close(&r.generator_blocks, expected.matrix(), 1e-15));
        assert!(!r.failed);
    }

    #[test]
    fn degenerate_is_empty() {
        let v = HermitianOperator::<f64>::identity(2).unwrap();
        let spec = SynthesisSpec::new(v).with_pairs(vec![CouplingPair {
            high: 0,
            low: 1,
            l: c(1.0, 0.0),
        }]);
        let r = synthesize_coupling(&spec).unwrap();
        assert!(r.couplings.is_empty());
        assert_eq!(r.pairs[0].case, PairCase::Degenerate);
        assert_eq!(norm_max(&r.generator_blocks), 0.0);
    }

    #[test]
    fn two_qubit_blocks() {
        let spec = SynthesisSpec::new(two_qubit_v()).with_pairs(two_qubit_pairs());
        let r = synthesize_coupling(&spec).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[-1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!(close(&r.generator_blocks, expected.matrix(), 1e-12));
        assert_eq!(r.basis.permutation, vec![0, 1, 2, 3]);
        assert!(close(&r.couplings[0], &(ket_bra(1, 0, 4).unwrap() * c(0.5f64.sqrt(), 0.0)), 1e-15));
        for p in &r.pairs {
            assert!((p.contribution + 1.0).abs() < 1e-12);
        }
        let v = verify_synthesis(&r, &r.model().unwrap()).unwrap();
        assert_eq!(v.verdict, Verdict::Holds);
        assert!(v.mismatch.is_none());
    }

    #[test]
    fn uncompensated_hamiltonian() {
        let spec = SynthesisSpec::new(two_qubit_v())
            .with_pairs(two_qubit_pairs())
            .with_hamiltonian(half_sigma_y_block())
            .compensate(false);
        let r = synthesize_coupling(&spec).unwrap();
        let mut expected = ComplexMatrix::<f64>::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                expected[(i, j)] = c(-1.0, 0.0);
            }
        }
        assert!(close(&r.generator_blocks, &expected, 1e-12));
        assert!(!r.failed);
    }

    #[test]
    fn compensation_cancels_cross_term() {
        let spec = SynthesisSpec::new(two_qubit_v())
            .with_pairs(two_qubit_pairs())
            .with_hamiltonian(half_sigma_y_block());
        let r = synthesize_coupling(&spec).unwrap();
        assert_eq!(r.pairs[0].case, PairCase::Compensated);
        assert!(r.generator_blocks[(0, 1)].modulus() < 1e-10);
        assert!((r.generator_blocks[(0, 0)].re + 1.0).abs() < 1e-12);

        // flipping the sign of the compensating entry breaks the match
        let mut tampered = r.couplings.clone();
        tampered[0][(1, 1)] = -tampered[0][(1, 1)];
        let model = ModelSpec::new(r.hamiltonian.clone(), tampered).unwrap();
        let v = verify_synthesis(&r, &model).unwrap();
        assert_eq!(v.verdict, Verdict::Fails);
        let mm = v.mismatch.unwrap();
        assert_eq!((mm.row, mm.col), (0, 1));
    }

    #[test]
    fn rejects_bad_pairs() {
        let spec = SynthesisSpec::new(two_qubit_v()).with_pairs(vec![CouplingPair {
            high: 3,
            low: 0,
            l: c(1.0, 0.0),
        }]);
        assert!(matches!(synthesize_coupling(&spec), Err(Error::InvalidArgument(_))));
        let spec = SynthesisSpec::new(two_qubit_v()).with_pairs(vec![CouplingPair {
            high: 0,
            low: 1,
            l: c(0.0, 0.0),
        }]);
        assert!(synthesize_coupling(&spec).is_err());
    }

    #[test]
    fn ground_coupling_qubit() {
        let v = HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let g = solve_ground_coupling(&v, 1e-9).unwrap();
        assert!(close(&g.m, &sigma_minus(), 1e-15));
        assert!(close(&g.default_l, &sigma_minus(), 1e-15));
        assert!(g.factor_residual < 1e-10);
        assert_eq!(g.family.free_positions, vec![(0, 0), (1, 1)]);
        assert_eq!(g.report.verdict, Verdict::Holds);
        // every family member solves M = [L, V]
        let l = g.family.member(&[c(0.3, -0.2), c(-1.1, 0.4)]).unwrap();
        let comm = &l * v.matrix() - v.matrix() * &l;
        assert!(close(&comm, &g.m, 1e-14));
    }

    #[test]
    fn ground_coupling_edges() {
        let zero = HermitianOperator::<f64>::zeros(3).unwrap();
        let g = solve_ground_coupling(&zero, 1e-9).unwrap();
        assert_eq!(norm_max(&g.m), 0.0);
        assert_eq!(norm_max(&g.default_l), 0.0);
        let full = HermitianOperator::from_real_diagonal(&[2.0, 1.0]).unwrap();
        assert!(matches!(solve_ground_coupling(&full, 1e-9), Err(Error::Unsupported(_))));
        let neg = HermitianOperator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(solve_ground_coupling(&neg, 1e-9), Err(Error::NotPositive { .. })));
    }
}
