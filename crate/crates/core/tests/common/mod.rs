//! Dense Kronecker-product oracle, independent of the sparse assembly.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use spinlab::pauli::{PauliString, PauliSum, Phase};
use spinlab::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Single-site matrix in the (bit 0 = down, bit 1 = up) basis.
fn site_matrix(x: bool, z: bool) -> DMatrix<Complex64> {
    let o = c(0.0, 0.0);
    let entries = match (x, z) {
        (false, false) => [c(1.0, 0.0), o, o, c(1.0, 0.0)],
        (true, false) => [o, c(1.0, 0.0), c(1.0, 0.0), o],
        (false, true) => [c(-1.0, 0.0), o, o, c(1.0, 0.0)],
        // Y = iXZ
        (true, true) => [o, c(0.0, 1.0), c(0.0, -1.0), o],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Site `n−1` is the most significant bit, so the Kronecker factor order is
/// `σ_{n−1} ⊗ … ⊗ σ_0`.
pub fn dense_string(p: &PauliString) -> DMatrix<Complex64> {
    let n = p.n_sites();
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for site in (0..n).rev() {
        let f = site_matrix((p.x_mask() >> site) & 1 == 1, (p.z_mask() >> site) & 1 == 1);
        m = m.kronecker(&f);
    }
    m * (p.coeff() * p.phase().to_complex())
}

pub fn dense_sum(h: &PauliSum) -> DMatrix<Complex64> {
    let d = 1usize << h.n_sites();
    h.terms().iter().fold(DMatrix::zeros(d, d), |acc, t| acc + dense_string(t))
}

pub fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Real eigenvalues of a Hermitian dense matrix, ascending.
pub fn dense_eigenvalues(a: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Random Hermitian operator with about `terms` Pauli strings on `n` sites.
pub fn random_hermitian(n: usize, terms: usize, rng: &mut impl Rng) -> PauliSum {
    let full = (1u64 << n) - 1;
    let mut h = PauliSum::zero(n).unwrap();
    for _ in 0..terms {
        let p = PauliString::from_masks(n, rng.gen_range(0..=full), rng.gen_range(0..=full), Phase::ONE)
            .unwrap()
            .with_coeff(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        h.push(p).unwrap();
    }
    // h + h† is Hermitian
    (&h + &h.adjoint()).canonicalize()
}
