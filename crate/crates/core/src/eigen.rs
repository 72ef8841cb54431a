//! Spectra of Hermitian operator matrices: dense solves for small
//! dimensions, a restarted block Krylov solver for the lowest few levels of
//! larger ones, ground-state clustering, and spectrum stacking.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{assemble, build_sector_basis, OperatorMatrix, Sector};
use crate::pauli::PauliSum;
use crate::Execution;

pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0x5eed_1234;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("Krylov solver did not converge after {iterations} restarts (best residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },
    #[error("empty matrix")]
    Empty,
    #[error(transparent)]
    Basis(#[from] crate::basis::BasisError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Dimensions up to this size are solved densely.
    pub dense_threshold: usize,
    /// Required `‖Av − λv‖ / ‖A‖` for each returned pair.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub cluster_tol: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            tol: 1e-10,
            max_restarts: 300,
            seed: DEFAULT_SEED,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Dense,
    Krylov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub dim: usize,
    pub requested: usize,
    pub method: SolveMethod,
    pub eigenvalues: Vec<f64>,
    pub residual_bound: f64,
    pub ground_degeneracy: usize,
    pub gap: f64,
    /// Set when every computed level falls in the ground cluster.
    pub gapless_at_this_size: bool,
}

/// Eigenvalues ascending, with unit-norm eigenvectors in the same order.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub method: SolveMethod,
    pub residual_bound: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn hermitian_deviation(m: &OperatorMatrix) -> f64 {
    (0..m.dim())
        .flat_map(|i| m.row(i).map(move |(j, v)| (i, j, v)))
        .map(|(i, j, v)| (v - m.get(j, i).conj()).norm())
        .fold(0.0, f64::max)
}

/// Dense Hermitian eigendecomposition, ascending.
pub fn eigh_dense(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn residual(m: &OperatorMatrix, lambda: f64, v: &[Complex64], exec: Execution) -> f64 {
    let mut av = vec![Complex64::default(); v.len()];
    m.matvec_with(v, &mut av, exec);
    av.iter().zip(v).map(|(a, x)| (a - x * lambda).norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest `k` eigenpairs (all of them when `k` is `None`).
pub fn eigenpairs(m: &OperatorMatrix, k: Option<usize>, cfg: &SolverConfig) -> Result<EigenPairs, EigenError> {
    let n = m.dim();
    if n == 0 {
        return Err(EigenError::Empty);
    }
    let scale = m.norm_inf().max(f64::MIN_POSITIVE);
    let deviation = hermitian_deviation(m);
    if deviation > 1e-12 * scale.max(1.0) {
        return Err(EigenError::NotHermitian { deviation });
    }
    let k = k.unwrap_or(n).min(n);
    let mut pairs = if n <= cfg.dense_threshold || k == n {
        let (values, vecs) = eigh_dense(&m.to_dense());
        EigenPairs {
            values: values[..k].to_vec(),
            vectors: (0..k).map(|c| vecs.column(c).iter().copied().collect()).collect(),
            method: SolveMethod::Dense,
            residual_bound: 0.0,
        }
    } else {
        block_krylov(m, k, cfg, scale)?
    };
    pairs.residual_bound = pairs
        .values
        .iter()
        .zip(&pairs.vectors)
        .map(|(&l, v)| residual(m, l, v, cfg.execution) / scale)
        .fold(0.0, f64::max);
    Ok(pairs)
}

pub fn spectrum(m: &OperatorMatrix, k: Option<usize>, cfg: &SolverConfig) -> Result<SpectrumReport, EigenError> {
    let pairs = eigenpairs(m, k, cfg)?;
    Ok(report_from_values(m.dim(), pairs.values, pairs.method, pairs.residual_bound, cfg.cluster_tol))
}

pub fn report_from_values(
    dim: usize,
    eigenvalues: Vec<f64>,
    method: SolveMethod,
    residual_bound: f64,
    cluster_tol: f64,
) -> SpectrumReport {
    let (ground_degeneracy, gap) = degeneracy_and_gap(&eigenvalues, cluster_tol);
    SpectrumReport {
        dim,
        requested: eigenvalues.len(),
        method,
        gapless_at_this_size: ground_degeneracy == eigenvalues.len(),
        eigenvalues,
        residual_bound,
        ground_degeneracy,
        gap,
    }
}

/// Ground cluster size and gap above it. The cluster is the maximal prefix
/// within `cluster_tol` of the minimum; the gap is measured from the cluster
/// maximum and is 0 when the cluster exhausts the list.
pub fn degeneracy_and_gap(sorted: &[f64], cluster_tol: f64) -> (usize, f64) {
    let Some(&lowest) = sorted.first() else {
        return (0, 0.0);
    };
    let degeneracy = sorted.iter().take_while(|&&e| e - lowest <= cluster_tol).count();
    let gap = match sorted.get(degeneracy) {
        Some(&next) => next - sorted[degeneracy - 1],
        None => 0.0,
    };
    (degeneracy, gap)
}

/// Spectral norm of an operator on the full `2^n` basis, from the largest
/// eigenvalue of `C†C`. Intended for small `n`.
pub fn operator_norm(op: &PauliSum) -> Result<f64, EigenError> {
    if op.canonicalize().is_empty() {
        return Ok(0.0);
    }
    let basis = build_sector_basis(op.n_sites(), Sector::All)?;
    let c = assemble(op, &basis)?.to_dense();
    let ctc = c.adjoint() * &c;
    let (values, _) = eigh_dense(&ctc);
    Ok(values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Spectrum of `A ⊗ 1 + 1 ⊗ B` from the spectra of `A` and `B`.
pub fn stack_spectra(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Thick-restarted block Krylov solver with full reorthogonalization.
///
/// The block size is at least `k`, so every eigenvalue among the lowest `k`
/// is resolved with its full multiplicity from a random start block.
fn block_krylov(m: &OperatorMatrix, k: usize, cfg: &SolverConfig, scale: f64) -> Result<EigenPairs, EigenError> {
    let n = m.dim();
    let block = k.clamp(2, 32).min(n);
    let max_basis = (k + 3 * block).max(48).min(n);
    let keep = (k + block).min(max_basis - block);
    let exec = cfg.execution;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    };

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
    let mut pending: Vec<Vec<Complex64>> = (0..block).map(|_| random_vec(&mut rng)).collect();
    let mut best = f64::INFINITY;

    for restart in 0..cfg.max_restarts {
        // expand
        while basis.len() < max_basis && !pending.is_empty() {
            let mut next_pending = Vec::with_capacity(pending.len());
            for mut v in pending.drain(..) {
                if basis.len() == max_basis {
                    break;
                }
                let before = norm(&v);
                for _ in 0..2 {
                    for q in &basis {
                        let c = dot(q, &v);
                        v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                    }
                }
                let after = norm(&v);
                if after <= 1e-10 * before.max(f64::MIN_POSITIVE) {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= after);
                let mut w = vec![Complex64::default(); n];
                m.matvec_with(&v, &mut w, exec);
                next_pending.push(w.clone());
                basis.push(v);
                images.push(w);
            }
            if next_pending.is_empty() && basis.len() < n && basis.len() < max_basis {
                // invariant subspace reached; continue from fresh directions
                next_pending.push(random_vec(&mut rng));
            }
            pending = next_pending;
        }

        // Rayleigh-Ritz
        let dim = basis.len();
        let proj = DMatrix::from_fn(dim, dim, |i, j| {
            let a = dot(&basis[i], &images[j]);
            let b = dot(&basis[j], &images[i]).conj();
            (a + b) * 0.5
        });
        let (theta, y) = eigh_dense(&proj);
        let ritz = |c: usize, src: &[Vec<Complex64>]| -> Vec<Complex64> {
            let mut out = vec![Complex64::default(); n];
            for (r, q) in src.iter().enumerate() {
                let coef = y[(r, c)];
                out.iter_mut().zip(q).for_each(|(o, x)| *o += coef * x);
            }
            out
        };
        let wanted = k.min(dim);
        let mut vecs = Vec::with_capacity(keep.min(dim));
        let mut imgs = Vec::with_capacity(keep.min(dim));
        let mut residuals = Vec::with_capacity(keep.min(dim));
        for (c, &t) in theta.iter().enumerate().take(keep.min(dim).max(wanted)) {
            let u = ritz(c, &basis);
            let au = ritz(c, &images);
            let r: Vec<Complex64> = au.iter().zip(&u).map(|(a, x)| a - x * t).collect();
            residuals.push(r);
            vecs.push(u);
            imgs.push(au);
        }
        let worst = residuals[..wanted].iter().map(|r| norm(r) / scale).fold(0.0, f64::max);
        best = best.min(worst);
        if (worst <= cfg.tol && wanted == k) || dim == n {
            return Ok(EigenPairs {
                values: theta.iter().take(k).copied().collect(),
                vectors: vecs.into_iter().take(k).collect(),
                method: SolveMethod::Krylov,
                residual_bound: worst,
            });
        }
        if restart + 1 == cfg.max_restarts {
            break;
        }
        // restart from the retained Ritz vectors plus the residual block
        pending = residuals.iter().take(block).filter(|r| norm(r) / scale > cfg.tol * 1e-3).cloned().collect();
        if pending.is_empty() {
            pending.push(random_vec(&mut rng));
        }
        basis = vecs;
        images = imgs;
    }
    Err(EigenError::NoConvergence { iterations: cfg.max_restarts, best_residual: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    #[test]
    fn single_z() {
        let h = PauliSum::from_terms(1, [PauliString::z_on(1, [0]).unwrap()]).unwrap();
        let m = assemble(&h, &build_sector_basis(1, Sector::All).unwrap()).unwrap();
        let r = spectrum(&m, None, &SolverConfig::default()).unwrap();
        assert_eq!(r.eigenvalues.len(), 2);
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert_eq!(r.ground_degeneracy, 1);
        assert!((r.gap - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(degeneracy_and_gap(&[0.0, 0.0, 0.0, 0.0, 4.0, 4.0], 1e-8), (4, 4.0));
        let (d, g) = degeneracy_and_gap(&[0.0, 2.0 + 1e-12, 5.0], 1e-8);
        assert_eq!(d, 1);
        assert!((g - 2.0).abs() < 1e-11);
        assert_eq!(degeneracy_and_gap(&[1.0, 1.0], 1e-8), (2, 0.0));
    }

    #[test]
    fn whole_spectrum_cluster_is_flagged_gapless() {
        let r = report_from_values(3, vec![2.0, 2.0, 2.0], SolveMethod::Dense, 0.0, 1e-8);
        assert!(r.gapless_at_this_size);
        assert_eq!((r.ground_degeneracy, r.gap), (3, 0.0));
    }

    #[test]
    fn stacking_small() {
        assert_eq!(stack_spectra(&[0.0, 1.0], &[0.0, 2.0]), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(stack_spectra(&[3.0, -1.0], &[0.0]), vec![-1.0, 3.0]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let plus = PauliSum::site(0, crate::pauli::SiteOp::Plus, 1, Complex64::new(1.0, 0.0)).unwrap();
        let m = assemble(&plus, &build_sector_basis(1, Sector::All).unwrap()).unwrap();
        assert!(matches!(spectrum(&m, None, &SolverConfig::default()), Err(EigenError::NotHermitian { .. })));
    }

    #[test]
    fn krylov_nonconvergence_reports_best_residual() {
        // a 1-restart budget with a loose basis cannot converge on a 10-site chain
        let n = 10;
        let mut terms = Vec::new();
        for a in 0..n {
            let b = (a + 1) % n;
            terms.push(PauliString::x_on(n, [a, b]).unwrap());
            terms.push(PauliString::z_on(n, [a, b]).unwrap());
            terms.push(PauliString::z_on(n, [a]).unwrap().with_coeff(Complex64::new(0.3, 0.0)));
        }
        let h = PauliSum::from_terms(n, terms).unwrap();
        let m = assemble(&h, &build_sector_basis(n, Sector::All).unwrap()).unwrap();
        let cfg = SolverConfig { dense_threshold: 16, max_restarts: 1, tol: 1e-14, ..SolverConfig::default() };
        match spectrum(&m, Some(1), &cfg) {
            Err(EigenError::NoConvergence { best_residual, .. }) => assert!(best_residual.is_finite()),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
