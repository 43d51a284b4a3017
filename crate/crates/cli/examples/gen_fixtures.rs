//! Regenerates the model and operator files under `fixtures/`.
//!
//! cargo run -p qmarkov-cli --example gen_fixtures -- fixtures

use std::path::PathBuf;

use qmarkov::operator::{ket_bra, ladder_lowering, ladder_raising, number_operator, pauli, sigma_minus, Axis};
use qmarkov::{ComplexMatrix64, HermitianOperator64, ModelSpec64, C64};
use qmarkov_cli::format::{matrix_to_string, ModelFile};

fn oscillator(n: usize, alpha: f64, beta: f64) -> ModelSpec64 {
    let l = ladder_lowering::<f64>(n).unwrap() * C64::new(alpha, 0.0) + ladder_raising::<f64>(n).unwrap() * C64::new(beta, 0.0);
    let h = HermitianOperator64::new(number_operator(n).unwrap()).unwrap();
    ModelSpec64::new(h, vec![l]).unwrap()
}

fn two_qubit(with_h: bool) -> ModelSpec64 {
    let l = C64::new(0.5f64.sqrt(), 0.0);
    let l1 = ket_bra::<f64>(1, 0, 4).unwrap() * l;
    let l2 = ket_bra::<f64>(3, 1, 4).unwrap() * l;
    let h = if with_h {
        ket_bra::<f64>(0, 1, 4).unwrap() * C64::new(0.0, -0.5) + ket_bra::<f64>(1, 0, 4).unwrap() * C64::new(0.0, 0.5)
    } else {
        ComplexMatrix64::zeros(4, 4)
    };
    let labels = ["00", "01", "10", "11"].map(String::from).to_vec();
    ModelSpec64::new(HermitianOperator64::new(h).unwrap(), vec![l1, l2])
        .unwrap()
        .with_labels(labels)
        .unwrap()
}

fn diag(d: &[f64]) -> ComplexMatrix64 {
    HermitianOperator64::from_real_diagonal(d).unwrap().into_inner()
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = |name: &str, m: &ModelSpec64| {
        std::fs::write(dir.join(name), ModelFile::from_model(m).to_canonical_string()).unwrap();
    };
    let op = |name: &str, m: &ComplexMatrix64| std::fs::write(dir.join(name), matrix_to_string(m)).unwrap();

    for n in [8, 40, 60] {
        model(&format!("oscillator{n}.json"), &oscillator(n, 1.0, 0.5));
        op(&format!("number{n}.json"), &number_operator(n).unwrap());
    }
    op("vacuum60.json", &ket_bra(0, 0, 60).unwrap());

    let twolevel = ModelSpec64::new(HermitianOperator64::new(pauli(Axis::Z)).unwrap(), vec![pauli(Axis::X)]).unwrap();
    model("twolevel.json", &twolevel);

    model("twoqubit.json", &two_qubit(true));
    model("twoqubit_noh.json", &two_qubit(false));
    op("twoqubit_v.json", &diag(&[2.0, 0.0, 0.0, -2.0]));
    let mut w = ComplexMatrix64::zeros(4, 4);
    w.view_mut((0, 0), (2, 2)).fill(C64::new(0.5, 0.0));
    op("twoqubit_w.json", &w);
    op("twoqubit_h.json", &two_qubit(true).hamiltonian().matrix().clone());

    let decay = ModelSpec64::dissipative(vec![sigma_minus()]).unwrap();
    model("qubit7.json", &decay);
    op("qubit7_v.json", &diag(&[1.0, 0.0]));
    op("excited.json", &diag(&[1.0, 0.0]));
    op("ground.json", &diag(&[0.0, 1.0]));
}
