#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qmarkov::{ComplexMatrix64, DensityMatrix64, HermitianOperator64, ModelSpec64, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn model(name: &str) -> ModelSpec64 {
    qmarkov_cli::format::load_model(&fixture(name)).unwrap()
}

pub fn operator(name: &str) -> HermitianOperator64 {
    qmarkov_cli::format::load_operator(&fixture(name)).unwrap()
}

pub fn state(name: &str) -> DensityMatrix64 {
    qmarkov_cli::format::load_state(&fixture(name), 1e-12).unwrap()
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmarkov"))
        .args(args)
        .env_remove("QMARKOV_OUT_DIR")
        .output()
        .expect("binary runs")
}

pub fn fx(name: &str) -> String {
    fixture(name).display().to_string()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, r: &mut impl Rng) -> ComplexMatrix64 {
    ComplexMatrix64::from_fn(n, n, |_, _| C64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
}

pub fn density(n: usize, r: &mut impl Rng) -> DensityMatrix64 {
    let g = gaussian(n, r);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix64::new(m / tr, 1e-9).unwrap()
}

pub fn random_model(n: usize, k: usize, r: &mut impl Rng) -> ModelSpec64 {
    let g = gaussian(n, r);
    let h = HermitianOperator64::hermitian_part(&g).unwrap();
    let ls = (0..k).map(|_| gaussian(n, r) * C64::new(0.5, 0.0)).collect();
    ModelSpec64::new(h, ls).unwrap()
}

pub fn comm(a: &ComplexMatrix64, b: &ComplexMatrix64) -> ComplexMatrix64 {
    a * b - b * a
}

pub fn max_abs(m: &ComplexMatrix64) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn min_eig(m: &ComplexMatrix64) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &x| a.min(x))
}

/// `-i[X, H] + sum_k (L^dag X L - 1/2 {L^dag L, X})`, written out.
pub fn heisenberg_oracle(h: &ComplexMatrix64, ls: &[ComplexMatrix64], x: &ComplexMatrix64) -> ComplexMatrix64 {
    let i = C64::new(0.0, 1.0);
    let mut out = -(x * h - h * x) * i;
    for l in ls {
        let ld = l.adjoint();
        let ll = &ld * l;
        out += &ld * x * l - (&ll * x + x * &ll) * C64::new(0.5, 0.0);
    }
    out
}

/// `-i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho})`, written out.
pub fn schroedinger_oracle(h: &ComplexMatrix64, ls: &[ComplexMatrix64], rho: &ComplexMatrix64) -> ComplexMatrix64 {
    let i = C64::new(0.0, 1.0);
    let mut out = -(h * rho - rho * h) * i;
    for l in ls {
        let ld = l.adjoint();
        let ll = &ld * l;
        out += l * rho * &ld - (&ll * rho + rho * &ll) * C64::new(0.5, 0.0);
    }
    out
}

/// Report text with the trailing run-metadata member removed.
pub fn without_metadata(text: &str) -> String {
    let cut = text.rfind(",\n  \"metadata\"").expect("report has a metadata member");
    text[..cut].to_string()
}
