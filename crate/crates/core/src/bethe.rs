//! Coordinate Bethe ansatz for the periodic XXX chain.
//!
//! Two magnons with momenta `k, k'` scatter with the pure phase
//!
//! ```text
//! A(k, k') = (cot(k/2) − cot(k'/2) − 2i) / (cot(k/2) − cot(k'/2) + 2i) = e^{iθ(k, k')}
//! ```
//!
//! and periodicity quantizes `M` real momenta through
//! `k_i N = Σ_{j≠i} θ(k_j, k_i) (mod 2π)`. The solver runs damped Newton on
//! these wrapped equations from the free momenta `2πm_i/N`. Complex (bound
//! state) roots are not searched for; sweeps report the sector levels they
//! leave unexplained instead.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{assemble, build_sector_basis, BasisError, Sector, SectorBasis};
use crate::chain::{build_hamiltonian, Boundary, ChainError, ChainParams};
use crate::eigen::{eigh_dense, EigenError};
use crate::{map_indices, Execution};

/// `|sin(k/2)|` below this counts as the `cot(k/2)` pole at `k ≡ 0`.
const SINGULAR_TOL: f64 = 1e-12;
/// Momenta closer than this (mod 2π) are coincident.
const COINCIDENT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetheError {
    #[error("momentum {k} sits on the cot(k/2) singularity")]
    Singular { k: f64 },
    #[error("coincident momenta: the ansatz vector vanishes identically")]
    Coincident,
    #[error("ansatz state is the zero vector")]
    DegenerateState,
    #[error("no real root after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64, final_iterate: Vec<f64> },
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Principal value in `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

fn cot_half(k: f64) -> Result<f64, BetheError> {
    let (s, c) = (k / 2.0).sin_cos();
    if s.abs() < SINGULAR_TOL {
        return Err(BetheError::Singular { k });
    }
    Ok(c / s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPhase {
    pub k: f64,
    pub k_prime: f64,
    pub amplitude: Complex64,
    /// Principal argument of `amplitude`, in `(−π, π]`.
    pub theta: f64,
}

pub fn scattering_phase(k: f64, k_prime: f64) -> Result<ScatteringPhase, BetheError> {
    let d = cot_half(k)? - cot_half(k_prime)?;
    let amplitude = Complex64::new(d, -2.0) / Complex64::new(d, 2.0);
    let mut theta = amplitude.arg();
    if theta <= -PI {
        theta = PI;
    }
    Ok(ScatteringPhase { k, k_prime, amplitude, theta })
}

/// `θ(a, b)` on the continuous branch `2 atan((cot(a/2) − cot(b/2))/2) − π`,
/// together with its partial derivatives in `a` and `b`.
fn smooth_theta(a: f64, b: f64) -> Result<(f64, f64, f64), BetheError> {
    let u = (cot_half(a)? - cot_half(b)?) / 2.0;
    let theta = 2.0 * u.atan() - PI;
    let du = 2.0 / (1.0 + u * u);
    let csc2 = |x: f64| 1.0 / (x / 2.0).sin().powi(2);
    Ok((theta, du * (-0.25 * csc2(a)), du * (0.25 * csc2(b))))
}

/// Wrapped violation of each quantization condition.
pub fn quantization_residual(roots: &[f64], n_sites: usize) -> Result<Vec<f64>, BetheError> {
    let n = n_sites as f64;
    (0..roots.len())
        .map(|i| {
            let mut acc = roots[i] * n;
            for (j, &kj) in roots.iter().enumerate() {
                if j != i {
                    acc -= scattering_phase(kj, roots[i])?.theta;
                }
            }
            Ok(wrap_angle(acc))
        })
        .collect()
}

fn residual_and_jacobian(k: &[f64], n: f64) -> Result<(DVector<f64>, DMatrix<f64>), BetheError> {
    let m = k.len();
    let mut r = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut acc = k[i] * n;
        jac[(i, i)] = n;
        for j in 0..m {
            if j == i {
                continue;
            }
            // θ(k_j, k_i)
            let (theta, d_first, d_second) = smooth_theta(k[j], k[i])?;
            acc -= theta;
            jac[(i, j)] -= d_first;
            jac[(i, i)] -= d_second;
        }
        r[i] = wrap_angle(acc);
    }
    Ok((r, jac))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetheConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for BetheConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, max_halvings: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRootSet {
    pub n_sites: usize,
    pub quantum_numbers: Vec<i64>,
    /// Converged momenta reduced to `[0, 2π)`.
    pub momenta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
}

impl BetheRootSet {
    pub fn total_momentum(&self) -> f64 {
        self.momenta.iter().sum()
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

fn validate_chain(chain: &ChainParams) -> Result<(), BetheError> {
    chain.validate()?;
    if chain.boundary != Boundary::Periodic {
        return Err(ChainError::NeedsPeriodic.into());
    }
    Ok(())
}

/// Damped Newton on the `M` coupled wrapped quantization conditions.
pub fn solve_multi_magnon(
    chain: &ChainParams,
    quantum_numbers: &[i64],
    cfg: &BetheConfig,
) -> Result<BetheRootSet, BetheError> {
    validate_chain(chain)?;
    let n_sites = chain.n_sites;
    let m = quantum_numbers.len();
    if m == 0 || 2 * m > n_sites {
        return Err(BetheError::InvalidQuantumNumbers(format!("need 1 <= M <= N/2, got M = {m} for N = {n_sites}")));
    }
    if let Some(bad) = quantum_numbers.iter().find(|&&q| q < 0 || q as usize >= n_sites) {
        return Err(BetheError::InvalidQuantumNumbers(format!("{bad} outside 0..{n_sites}")));
    }
    let zeros = quantum_numbers.iter().filter(|&&q| q == 0).count();
    if zeros > 1 {
        return Err(BetheError::Coincident);
    }
    let n = n_sites as f64;
    // free momenta, nudged apart where quantum numbers repeat
    let mut k: Vec<f64> = quantum_numbers
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let repeated = quantum_numbers[..i].contains(&q);
            2.0 * PI * q as f64 / n + if repeated { 1e-6 * i as f64 } else { 0.0 }
        })
        .collect();
    if m == 1 {
        cot_half(k[0])?;
        return finish(chain, quantum_numbers, k, 0);
    }
    for &ki in &k {
        cot_half(ki)?;
    }
    let (mut r, mut jac) = residual_and_jacobian(&k, n)?;
    let mut norm = max_abs(&r);
    for iter in 0..cfg.max_iter {
        if norm <= cfg.tol {
            return finish(chain, quantum_numbers, k, iter);
        }
        let Some(step) = jac.clone().lu().solve(&(-&r)) else {
            return Err(BetheError::NoConvergence { iterations: iter, residual: norm, final_iterate: k });
        };
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = k.iter().zip(step.iter()).map(|(a, d)| a + scale * d).collect();
            if let Ok((tr, tj)) = residual_and_jacobian(&trial, n) {
                let tn = max_abs(&tr);
                if tn < norm {
                    accepted = Some((trial, tr, tj, tn));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((trial, tr, tj, tn)) = accepted else {
            return Err(BetheError::NoConvergence { iterations: iter, residual: norm, final_iterate: k });
        };
        k = trial;
        r = tr;
        jac = tj;
        norm = tn;
    }
    if norm <= cfg.tol {
        return finish(chain, quantum_numbers, k, cfg.max_iter);
    }
    Err(BetheError::NoConvergence { iterations: cfg.max_iter, residual: norm, final_iterate: k })
}

fn finish(
    chain: &ChainParams,
    quantum_numbers: &[i64],
    k: Vec<f64>,
    iterations: usize,
) -> Result<BetheRootSet, BetheError> {
    let momenta: Vec<f64> = k.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
    for i in 0..momenta.len() {
        for j in 0..i {
            if circular_distance(momenta[i], momenta[j]) < COINCIDENT_TOL {
                return Err(BetheError::Coincident);
            }
        }
    }
    let residuals = quantization_residual(&momenta, chain.n_sites)?;
    let energy = momenta.iter().map(|&x| chain.magnon_energy(x)).sum();
    Ok(BetheRootSet {
        n_sites: chain.n_sites,
        quantum_numbers: quantum_numbers.to_vec(),
        momenta,
        residuals,
        energy,
        iterations,
    })
}

pub fn solve_two_magnon(chain: &ChainParams, m1: i64, m2: i64, cfg: &BetheConfig) -> Result<BetheRootSet, BetheError> {
    solve_multi_magnon(chain, &[m1, m2], cfg)
}

/// `Σ_{α<β} (e^{i(kα + k'β)} + A e^{i(k'α + kβ)}) |αβ⟩` in the two-magnon sector.
pub fn two_magnon_state(
    n_sites: usize,
    k: f64,
    k_prime: f64,
    a: Complex64,
) -> Result<(SectorBasis, Vec<Complex64>), BetheError> {
    if n_sites < 4 {
        return Err(ChainError::InvalidParams(format!("two-magnon states need N >= 4, got {n_sites}")).into());
    }
    let basis = build_sector_basis(n_sites, Sector::Magnons(2))?;
    let v: Vec<Complex64> = basis
        .states()
        .map(|s| {
            let alpha = s.0.trailing_zeros() as f64;
            let beta = (63 - s.0.leading_zeros()) as f64;
            Complex64::from_polar(1.0, k * alpha + k_prime * beta)
                + a * Complex64::from_polar(1.0, k_prime * alpha + k * beta)
        })
        .collect();
    check_nonzero(&v)?;
    Ok((basis, v))
}

fn check_nonzero(v: &[Complex64]) -> Result<(), BetheError> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1e-10 * (v.len() as f64).sqrt() {
        return Err(BetheError::DegenerateState);
    }
    Ok(())
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// General `M`-magnon ansatz: every assignment of momenta to ordered
/// positions, weighted by `A(k_i, k_j)` for each pair `i < j` placed out of
/// order. Reduces to [`two_magnon_state`] for `M = 2`.
pub fn bethe_state(n_sites: usize, momenta: &[f64]) -> Result<(SectorBasis, Vec<Complex64>), BetheError> {
    let m = momenta.len();
    let basis = build_sector_basis(n_sites, Sector::Magnons(m))?;
    let mut pair_amp = vec![vec![Complex64::new(1.0, 0.0); m]; m];
    for i in 0..m {
        for j in i + 1..m {
            pair_amp[i][j] = scattering_phase(momenta[i], momenta[j])?.amplitude;
        }
    }
    let perms: Vec<(Vec<usize>, Complex64)> = permutations(m)
        .into_iter()
        .map(|p| {
            // p[l] = index of the momentum placed at the l-th occupied site
            let mut w = Complex64::new(1.0, 0.0);
            for a in 0..m {
                for b in a + 1..m {
                    if p[a] > p[b] {
                        w *= pair_amp[p[b]][p[a]];
                    }
                }
            }
            (p, w)
        })
        .collect();
    let v: Vec<Complex64> = basis
        .states()
        .map(|s| {
            let sites: Vec<f64> = (0..n_sites).filter(|&x| s.is_up(x)).map(|x| x as f64).collect();
            perms
                .iter()
                .map(|(p, w)| {
                    let phase: f64 = p.iter().zip(&sites).map(|(&i, &x)| momenta[i] * x).sum();
                    w * Complex64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect();
    check_nonzero(&v)?;
    Ok((basis, v))
}

/// `‖(H − E)ψ‖ / ‖ψ‖` against the assembled sector Hamiltonian.
pub fn eigen_residual(
    chain: &ChainParams,
    basis: &SectorBasis,
    psi: &[Complex64],
    energy: f64,
) -> Result<f64, BetheError> {
    let h = assemble(&build_hamiltonian(chain)?, basis)?;
    let hpsi = h.apply(psi);
    let num: f64 = hpsi.iter().zip(psi).map(|(a, x)| (a - x * energy).norm_sqr()).sum();
    let den: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    Ok((num / den).sqrt())
}

/// Per-attempt record of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheReport {
    pub n: usize,
    pub quantum_numbers: Vec<i64>,
    pub momenta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub energy: Option<f64>,
    pub matched_ed_eigenvalue: Option<f64>,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub n: usize,
    pub magnons: usize,
    pub j: f64,
    pub b: f64,
    pub attempts: usize,
    pub distinct_solutions: usize,
    pub reports: Vec<BetheReport>,
    pub ed_dimension: Option<usize>,
    pub matched_levels: usize,
    /// Unmatched levels equal to a lower-sector level shifted by `ΔM·B`.
    pub descendant_levels: usize,
    /// Remaining unmatched levels; real-root solving cannot reach them.
    pub bound_state_candidates: Vec<f64>,
    pub coverage_fraction: Option<f64>,
}

fn nondecreasing_tuples(n: usize, m: usize) -> Vec<Vec<i64>> {
    fn rec(start: i64, n: i64, left: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for q in start..n {
            cur.push(q);
            rec(q, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n as i64, m, &mut Vec::new(), &mut out);
    out
}

/// Dense spectrum of the `magnons`-magnon sector, ascending.
pub fn sector_spectrum(chain: &ChainParams, magnons: usize) -> Result<Vec<f64>, BetheError> {
    let basis = build_sector_basis(chain.n_sites, Sector::Magnons(magnons))?;
    let m = assemble(&build_hamiltonian(chain)?, &basis)?;
    Ok(eigh_dense(&m.to_dense()).0)
}

/// Greedily pairs each target with the closest unused level within `tol`.
fn assign(levels: &[f64], used: &mut [bool], target: f64, tol: f64) -> Option<usize> {
    let best = levels
        .iter()
        .enumerate()
        .filter(|(i, &e)| !used[*i] && (e - target).abs() <= tol)
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)?;
    used[best] = true;
    Some(best)
}

/// Tries every nondecreasing quantum-number tuple of length `magnons`,
/// deduplicates converged roots, and (when `compare_ed` is set and the sector
/// fits `dense_limit`) matches them against the sector spectrum.
pub fn sweep(
    chain: &ChainParams,
    magnons: usize,
    cfg: &BetheConfig,
    compare_ed: bool,
    dense_limit: usize,
    match_tol: f64,
    exec: Execution,
) -> Result<SweepReport, BetheError> {
    validate_chain(chain)?;
    let n = chain.n_sites;
    let tuples = nondecreasing_tuples(n, magnons);
    let outcomes = map_indices(exec, tuples.len(), |i| solve_multi_magnon(chain, &tuples[i], cfg));

    let mut seen: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut reports = Vec::with_capacity(tuples.len());
    let mut distinct = Vec::new();
    for (qn, outcome) in tuples.iter().zip(outcomes) {
        match outcome {
            Ok(root) => {
                let mut key: Vec<i64> = root.momenta.iter().map(|x| (x * 1e7).round() as i64).collect();
                key.sort_unstable();
                let duplicate = seen.contains_key(&key);
                if !duplicate {
                    seen.insert(key, reports.len());
                    distinct.push(reports.len());
                }
                reports.push(BetheReport {
                    n,
                    quantum_numbers: qn.clone(),
                    momenta: root.momenta,
                    residuals: root.residuals,
                    energy: Some(root.energy),
                    matched_ed_eigenvalue: None,
                    converged: true,
                    failure: duplicate.then(|| "duplicate of an earlier root set".to_string()),
                });
            }
            Err(e) => {
                let momenta = match &e {
                    BetheError::NoConvergence { final_iterate, .. } => {
                        final_iterate.iter().map(|x| x.rem_euclid(2.0 * PI)).collect()
                    }
                    _ => Vec::new(),
                };
                let residuals = quantization_residual(&momenta, n).unwrap_or_default();
                reports.push(BetheReport {
                    n,
                    quantum_numbers: qn.clone(),
                    momenta,
                    residuals,
                    energy: None,
                    matched_ed_eigenvalue: None,
                    converged: false,
                    failure: Some(e.to_string()),
                });
            }
        }
    }

    let dim = crate::basis::binomial(n, magnons) as usize;
    let mut report = SweepReport {
        n,
        magnons,
        j: chain.j,
        b: chain.b,
        attempts: tuples.len(),
        distinct_solutions: distinct.len(),
        reports,
        ed_dimension: None,
        matched_levels: 0,
        descendant_levels: 0,
        bound_state_candidates: Vec::new(),
        coverage_fraction: None,
    };
    if !compare_ed || dim > dense_limit {
        return Ok(report);
    }
    let levels = sector_spectrum(chain, magnons)?;
    let mut used = vec![false; levels.len()];
    for &idx in &distinct {
        let r = &mut report.reports[idx];
        let e = r.energy.expect("converged");
        if let Some(i) = assign(&levels, &mut used, e, match_tol) {
            r.matched_ed_eigenvalue = Some(levels[i]);
            report.matched_levels += 1;
        }
    }
    // descendants: S₊ raises a lower-sector eigenstate at energy cost B each
    let mut descendant = used.clone();
    for lower in 0..magnons {
        for e in sector_spectrum(chain, lower)? {
            let shifted = e + (magnons - lower) as f64 * chain.b;
            if assign(&levels, &mut descendant, shifted, match_tol).is_some() {
                report.descendant_levels += 1;
            }
        }
    }
    report.bound_state_candidates = levels.iter().zip(&descendant).filter(|(_, &d)| !d).map(|(&e, _)| e).collect();
    report.ed_dimension = Some(levels.len());
    report.coverage_fraction = Some(report.matched_levels as f64 / levels.len() as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_momenta_scatter_with_minus_one() {
        let s = scattering_phase(1.0, 1.0).unwrap();
        assert!((s.amplitude + 1.0).norm() < 1e-15);
        assert_eq!(s.theta, PI);
    }

    #[test]
    fn cot_difference_two_gives_minus_i() {
        // cot(k/2) = 2 + cot(k'/2) with k' = π/2 (cot = 1) → cot(k/2) = 3
        let k = 2.0 * (1.0f64 / 3.0).atan();
        let s = scattering_phase(k, PI / 2.0).unwrap();
        assert!((s.amplitude - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((s.theta + PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_momentum_rejected() {
        assert!(matches!(scattering_phase(0.0, 1.0), Err(BetheError::Singular { .. })));
        assert!(matches!(scattering_phase(1.0, 2.0 * PI), Err(BetheError::Singular { .. })));
    }

    #[test]
    fn smooth_branch_agrees_with_principal_value() {
        for (a, b) in [(0.3, 2.0), (4.0, 1.1), (5.5, 0.2), (1.0, 1.0)] {
            let (t, _, _) = smooth_theta(a, b).unwrap();
            let p = scattering_phase(a, b).unwrap().theta;
            assert!(wrap_angle(t - p).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let k = [0.7, 2.9, 4.4];
        let n = 12.0;
        let (_, jac) = residual_and_jacobian(&k, n).unwrap();
        let h = 1e-6;
        for c in 0..3 {
            let mut kp = k;
            let mut km = k;
            kp[c] += h;
            km[c] -= h;
            let (rp, _) = residual_and_jacobian(&kp, n).unwrap();
            let (rm, _) = residual_and_jacobian(&km, n).unwrap();
            for r in 0..3 {
                let fd = wrap_angle(rp[r] - rm[r]) / (2.0 * h);
                assert!((fd - jac[(r, c)]).abs() < 1e-5, "({r},{c}): {fd} vs {}", jac[(r, c)]);
            }
        }
    }

    #[test]
    fn single_magnon_is_free() {
        let chain = ChainParams::periodic(10, 1.0, 0.2).unwrap();
        let r = solve_multi_magnon(&chain, &[3], &BetheConfig::default()).unwrap();
        assert_eq!(r.momenta, vec![2.0 * PI * 3.0 / 10.0]);
        assert_eq!(quantization_residual(&r.momenta, 10).unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_zero_is_coincident() {
        let chain = ChainParams::periodic(12, 1.0, 0.0).unwrap();
        assert_eq!(solve_two_magnon(&chain, 0, 0, &BetheConfig::default()).unwrap_err(), BetheError::Coincident);
    }

    #[test]
    fn quantum_numbers_validated() {
        let chain = ChainParams::periodic(6, 1.0, 0.0).unwrap();
        let cfg = BetheConfig::default();
        assert!(matches!(solve_multi_magnon(&chain, &[1, 2, 3, 4], &cfg), Err(BetheError::InvalidQuantumNumbers(_))));
        assert!(matches!(solve_two_magnon(&chain, 1, 6, &cfg), Err(BetheError::InvalidQuantumNumbers(_))));
        let open = ChainParams::new(6, 1.0, 0.0, Boundary::Open).unwrap();
        assert!(solve_two_magnon(&open, 1, 2, &cfg).is_err());
    }

    #[test]
    fn free_ansatz_with_equal_momenta_collapses() {
        let k = 0.9;
        let (basis, v) = two_magnon_state(6, k, k, Complex64::new(1.0, 0.0)).unwrap();
        for (s, c) in basis.states().zip(&v) {
            let a = s.0.trailing_zeros() as f64;
            let b = (63 - s.0.leading_zeros()) as f64;
            assert!((c - Complex64::from_polar(2.0, k * (a + b))).norm() < 1e-13);
        }
        assert_eq!(two_magnon_state(6, k, k, Complex64::new(-1.0, 0.0)).unwrap_err(), BetheError::DegenerateState);
    }

    #[test]
    fn general_state_reduces_to_two_magnon_form() {
        let (k, kp) = (0.8, 2.3);
        let a = scattering_phase(k, kp).unwrap().amplitude;
        let (_, two) = two_magnon_state(7, k, kp, a).unwrap();
        let (_, general) = bethe_state(7, &[k, kp]).unwrap();
        for (x, y) in two.iter().zip(&general) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}
