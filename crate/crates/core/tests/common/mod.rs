#![allow(dead_code)]

use nalgebra::Complex;
use qmarkov::operator::{ket_bra, ladder_lowering, ladder_raising, number_operator, sigma_minus};
use qmarkov::{ComplexMatrix64, DensityMatrix64, HermitianOperator64, ModelSpec64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, rng: &mut impl Rng) -> ComplexMatrix64 {
    ComplexMatrix64::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C::new(re, im)
    })
}

pub fn hermitian(n: usize, rng: &mut impl Rng) -> HermitianOperator64 {
    let g = gaussian(n, rng);
    HermitianOperator64::new((&g + g.adjoint()) * C::new(0.5, 0.0)).unwrap()
}

pub fn psd(n: usize, rng: &mut impl Rng) -> HermitianOperator64 {
    let g = gaussian(n, rng) * C::new(1.0 / n as f64, 0.0);
    HermitianOperator64::hermitian_part(&(&g * g.adjoint())).unwrap()
}

pub fn density(n: usize, rng: &mut impl Rng) -> DensityMatrix64 {
    qmarkov::dynamics::random_density(n, rng).unwrap()
}

/// Random model with `k` couplings, entries of order one.
pub fn model(n: usize, k: usize, rng: &mut impl Rng) -> ModelSpec64 {
    let h = hermitian(n, rng);
    let s = C::new(1.0 / (n as f64).sqrt(), 0.0);
    let ls = (0..k).map(|_| gaussian(n, rng) * s).collect();
    ModelSpec64::new(h, ls).unwrap()
}

/// Orthogonal projection onto a random `rank`-dimensional subspace.
pub fn projection(n: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix64 {
    let q = gaussian(n, rng).qr().q();
    let cols = q.columns(0, rank);
    cols * cols.adjoint()
}

pub fn comm(a: &ComplexMatrix64, b: &ComplexMatrix64) -> ComplexMatrix64 {
    a * b - b * a
}

pub fn max_abs(m: &ComplexMatrix64) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `-i[X,H] + sum L^dag X L - (L^dag L X + X L^dag L)/2`, written out.
pub fn heisenberg_oracle(h: &ComplexMatrix64, ls: &[ComplexMatrix64], x: &ComplexMatrix64) -> ComplexMatrix64 {
    let mut out = comm(x, h) * C::new(0.0, -1.0);
    for l in ls {
        let ld = l.adjoint();
        let k = &ld * l;
        out += &ld * x * l - (&k * x + x * &k) * C::new(0.5, 0.0);
    }
    out
}

/// `-i[H,rho] + sum L rho L^dag - (L^dag L rho + rho L^dag L)/2`.
pub fn schroedinger_oracle(h: &ComplexMatrix64, ls: &[ComplexMatrix64], rho: &ComplexMatrix64) -> ComplexMatrix64 {
    let mut out = comm(h, rho) * C::new(0.0, -1.0);
    for l in ls {
        let ld = l.adjoint();
        let k = &ld * l;
        out += l * rho * &ld - (&k * rho + rho * &k) * C::new(0.5, 0.0);
    }
    out
}

pub fn min_eig(m: &ComplexMatrix64) -> f64 {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn qubit_decay() -> ModelSpec64 {
    ModelSpec64::dissipative(vec![sigma_minus()]).unwrap()
}

pub fn twolevel() -> ModelSpec64 {
    let h = HermitianOperator64::new(qmarkov::operator::pauli(qmarkov::operator::Axis::Z)).unwrap();
    ModelSpec64::new(h, vec![qmarkov::operator::pauli(qmarkov::operator::Axis::X)]).unwrap()
}

/// `L = alpha a + beta a^dag`, `H = a^dag a`, truncated at `n` levels.
pub fn oscillator(n: usize, alpha: f64, beta: f64) -> ModelSpec64 {
    let l = ladder_lowering::<f64>(n).unwrap() * C::new(alpha, 0.0) + ladder_raising::<f64>(n).unwrap() * C::new(beta, 0.0);
    let h = HermitianOperator64::new(number_operator(n).unwrap()).unwrap();
    ModelSpec64::new(h, vec![l]).unwrap()
}

pub fn number(n: usize) -> HermitianOperator64 {
    HermitianOperator64::new(number_operator(n).unwrap()).unwrap()
}

/// Two-qubit model with couplings `l|01><00|`, `l|11><01|`, `|l|^2 = 1/2`.
pub fn two_qubit(with_h: bool) -> ModelSpec64 {
    let l = C::new(0.5f64.sqrt(), 0.0);
    let l1 = ket_bra::<f64>(1, 0, 4).unwrap() * l;
    let l2 = ket_bra::<f64>(3, 1, 4).unwrap() * l;
    let h = if with_h {
        let m = ket_bra::<f64>(0, 1, 4).unwrap() * C::new(0.0, -0.5) + ket_bra::<f64>(1, 0, 4).unwrap() * C::new(0.0, 0.5);
        HermitianOperator64::new(m).unwrap()
    } else {
        HermitianOperator64::zeros(4).unwrap()
    };
    ModelSpec64::new(h, vec![l1, l2]).unwrap()
}

pub fn two_qubit_v() -> HermitianOperator64 {
    HermitianOperator64::from_real_diagonal(&[2.0, 0.0, 0.0, -2.0]).unwrap()
}

pub fn two_qubit_w() -> HermitianOperator64 {
    let mut m = ComplexMatrix64::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = C::new(0.5, 0.0);
        }
    }
    HermitianOperator64::new(m).unwrap()
}
