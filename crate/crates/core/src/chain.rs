//! The ferromagnetic Heisenberg (XXX) chain
//!
//! ```text
//! H = J (N_b/4 − Σ σ^α·σ^{α+1}) + B (N/2 + Σ σ_z^α)
//! ```
//!
//! with half-normalized spins `σ = P/2` (`P` a unit Pauli) and `N_b` the
//! number of bonds, so `H|∅⟩ = 0` for either boundary condition. Also builds
//! the total-spin operators, magnon creation operators `a†_k = Σ e^{ikα} σ₊^α`
//! with `σ₊ = σ_x + iσ_y`, and the quadratic non-local generators.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{assemble, build_sector_basis, BasisError, Sector, StateVector};
use crate::eigen::EigenError;
use crate::pauli::{PauliError, PauliString, PauliSum, SiteOp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),
    #[error("momentum numerator {m} outside 0..{n}")]
    InvalidMomentum { m: i64, n: usize },
    #[error("operation requires a periodic chain")]
    NeedsPeriodic,
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub j: f64,
    pub b: f64,
    pub boundary: Boundary,
}

impl ChainParams {
    pub fn new(n_sites: usize, j: f64, b: f64, boundary: Boundary) -> Result<Self, ChainError> {
        let p = Self { n_sites, j, b, boundary };
        p.validate()?;
        Ok(p)
    }

    pub fn periodic(n_sites: usize, j: f64, b: f64) -> Result<Self, ChainError> {
        Self::new(n_sites, j, b, Boundary::Periodic)
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.n_sites < 2 {
            return Err(ChainError::InvalidParams(format!("need at least 2 sites, got {}", self.n_sites)));
        }
        if self.n_sites > crate::pauli::MAX_SITES {
            return Err(PauliError::TooManySites { n_sites: self.n_sites }.into());
        }
        if !self.j.is_finite() || !self.b.is_finite() {
            return Err(ChainError::InvalidParams("J and B must be finite".into()));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds. A periodic 2-site chain counts the bond twice,
    /// matching the site sum `Σ_α σ^α·σ^{α+1}` taken literally.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        match self.boundary {
            Boundary::Periodic => (0..n).map(|a| (a, (a + 1) % n)).collect(),
            Boundary::Open => (0..n - 1).map(|a| (a, a + 1)).collect(),
        }
    }

    /// Single-magnon energy `B + 2J sin²(k/2)`.
    pub fn magnon_energy(&self, k: f64) -> f64 {
        self.b + 2.0 * self.j * (k / 2.0).sin().powi(2)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `σ^a · σ^b` in unit Paulis: `¼ (X X + Y Y + Z Z)`.
fn spin_dot(n: usize, a: usize, b: usize) -> Result<Vec<PauliString>, PauliError> {
    let mask = (1u64 << a) | (1u64 << b);
    Ok(vec![
        PauliString::from_masks(n, mask, 0, crate::pauli::Phase::ONE)?.with_coeff(c(0.25)),
        PauliString::from_masks(n, mask, mask, crate::pauli::Phase::ONE)?.with_coeff(c(0.25)),
        PauliString::from_masks(n, 0, mask, crate::pauli::Phase::ONE)?.with_coeff(c(0.25)),
    ])
}

pub fn build_hamiltonian(p: &ChainParams) -> Result<PauliSum, ChainError> {
    p.validate()?;
    let n = p.n_sites;
    let bonds = p.bonds();
    let mut h = PauliSum::zero(n)?;
    h.add_constant(p.j * bonds.len() as f64 / 4.0 + p.b * n as f64 / 2.0);
    for (a, b) in bonds {
        for t in spin_dot(n, a, b)? {
            h.push(t.with_coeff(t.coeff() * -p.j))?;
        }
    }
    for site in 0..n {
        h.push(PauliString::z_on(n, [site])?.with_coeff(c(p.b / 2.0)))?;
    }
    Ok(h.canonicalize())
}

/// `(S_x, S_y, S_z)` with `S_i = Σ_α σ_i^α` and `σ = P/2`.
pub fn total_spin_ops(n_sites: usize) -> Result<(PauliSum, PauliSum, PauliSum), ChainError> {
    let build = |kind: SiteOp| -> Result<PauliSum, PauliError> {
        let mut s = PauliSum::zero(n_sites)?;
        for site in 0..n_sites {
            for t in crate::pauli::single_site(site, kind, n_sites)? {
                s.push(t.with_coeff(t.coeff() * 0.5))?;
            }
        }
        Ok(s)
    };
    Ok((build(SiteOp::X)?, build(SiteOp::Y)?, build(SiteOp::Z)?))
}

/// `S₊ = Σ_α σ₊^α`, raising the magnon number by one.
pub fn total_raising(n_sites: usize) -> Result<PauliSum, ChainError> {
    let mut s = PauliSum::zero(n_sites)?;
    for site in 0..n_sites {
        for t in raise(site, n_sites, c(1.0))?.terms() {
            s.push(*t)?;
        }
    }
    Ok(s)
}

/// `coeff · σ₊^site` with `σ₊ = (X + iY)/2`, i.e. `|↑⟩⟨↓|`.
fn raise(site: usize, n: usize, coeff: Complex64) -> Result<PauliSum, PauliError> {
    PauliSum::site(site, SiteOp::Plus, n, coeff * 0.5)
}

fn lower(site: usize, n: usize, coeff: Complex64) -> Result<PauliSum, PauliError> {
    PauliSum::site(site, SiteOp::Minus, n, coeff * 0.5)
}

fn sigma_z(site: usize, n: usize, coeff: Complex64) -> Result<PauliSum, PauliError> {
    PauliSum::site(site, SiteOp::Z, n, coeff * 0.5)
}

/// Lattice momentum `k = 2πm/N`, kept as the exact pair `(m, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MagnonMomentum {
    m: usize,
    n: usize,
}

impl MagnonMomentum {
    pub fn new(m: i64, n: usize) -> Result<Self, ChainError> {
        if n == 0 || m < 0 || m as usize >= n {
            return Err(ChainError::InvalidMomentum { m, n });
        }
        Ok(Self { m: m as usize, n })
    }

    pub fn numerator(&self) -> usize {
        self.m
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn value(&self) -> f64 {
        2.0 * PI * self.m as f64 / self.n as f64
    }

    /// `e^{ikα}`, reducing `mα` modulo `N` before any floating point.
    pub fn phase_at(&self, alpha: usize) -> Complex64 {
        let r = (self.m * alpha) % self.n;
        Complex64::from_polar(1.0, 2.0 * PI * r as f64 / self.n as f64)
    }

    pub fn all(n: usize) -> Vec<MagnonMomentum> {
        (0..n).map(|m| MagnonMomentum { m, n }).collect()
    }
}

pub fn magnon_creation(k: &MagnonMomentum) -> Result<PauliSum, ChainError> {
    let n = k.n_sites();
    let mut a = PauliSum::zero(n)?;
    for alpha in 0..n {
        for t in raise(alpha, n, k.phase_at(alpha))?.terms() {
            a.push(*t)?;
        }
    }
    Ok(a.canonicalize())
}

fn check_periodic(p: &ChainParams, k: &MagnonMomentum) -> Result<(), ChainError> {
    if p.boundary != Boundary::Periodic {
        return Err(ChainError::NeedsPeriodic);
    }
    if k.n_sites() != p.n_sites {
        return Err(ChainError::InvalidParams(format!(
            "momentum quantized on {} sites, chain has {}",
            k.n_sites(),
            p.n_sites
        )));
    }
    Ok(())
}

/// `[H, a†_k]` computed symbolically, plus its check on the vacuum.
#[derive(Debug, Clone)]
pub struct CreationCommutator {
    pub commutator: PauliSum,
    pub energy: f64,
    /// `‖[H, a†_k]|∅⟩ − E(k) a†_k|∅⟩‖ / ‖a†_k|∅⟩‖`.
    pub vacuum_residual: f64,
}

pub fn commutator_with_creation(p: &ChainParams, k: &MagnonMomentum) -> Result<CreationCommutator, ChainError> {
    check_periodic(p, k)?;
    let h = build_hamiltonian(p)?;
    let a = magnon_creation(k)?;
    let commutator = h.commutator(&a)?;
    let energy = p.magnon_energy(k.value());
    let vac = StateVector::vacuum();
    let one = vac.apply(&a);
    let lhs = vac.apply(&commutator);
    let vacuum_residual = lhs.axpy(c(-energy), &one).norm() / one.norm();
    Ok(CreationCommutator { commutator, energy, vacuum_residual })
}

/// The closed form `B a†_k − J (e^{ik} − 1) Σ_α e^{ikα} (σ_z^α σ₊^{α+1} − σ₊^α σ_z^{α+1})`.
pub fn creation_commutator_closed_form(p: &ChainParams, k: &MagnonMomentum) -> Result<PauliSum, ChainError> {
    check_periodic(p, k)?;
    let n = p.n_sites;
    let mut out = magnon_creation(k)?.scale(c(p.b));
    let factor = (k.phase_at(1) - 1.0) * -p.j;
    for alpha in 0..n {
        let next = (alpha + 1) % n;
        let w = k.phase_at(alpha) * factor;
        let first = &sigma_z(alpha, n, w)? * &raise(next, n, c(1.0))?;
        let second = &raise(alpha, n, w)? * &sigma_z(next, n, c(1.0))?;
        out = &(&out + &first) + &(-&second);
    }
    Ok(out)
}

/// `(S⁽²⁾_z, S⁽²⁾_+, S⁽²⁾_-)` summed over ordered pairs `α < β` of sites
/// `0..N−1`.
pub fn yangian_quadratic(n_sites: usize) -> Result<(PauliSum, PauliSum, PauliSum), ChainError> {
    if n_sites < 2 {
        return Err(ChainError::InvalidParams("need at least 2 sites".into()));
    }
    let n = n_sites;
    let one = c(1.0);
    let mut sz = PauliSum::zero(n)?;
    let mut sp = PauliSum::zero(n)?;
    let mut sm = PauliSum::zero(n)?;
    for (a, b) in ordered_pairs(n) {
        sz = &sz + &(&(&raise(a, n, one)? * &lower(b, n, one)?) + &(-&(&lower(a, n, one)? * &raise(b, n, one)?)));
        sp = &sp + &(&(&sigma_z(a, n, one)? * &raise(b, n, one)?) + &(-&(&raise(a, n, one)? * &sigma_z(b, n, one)?)));
        sm = &sm + &(&(&sigma_z(a, n, one)? * &lower(b, n, one)?) + &(-&(&lower(a, n, one)? * &sigma_z(b, n, one)?)));
    }
    Ok((sz, sp, sm))
}

pub fn ordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
}

/// Commutator norms `‖[H, S⁽²⁾]‖` for one boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YangianReport {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub j: f64,
    pub b: f64,
    pub pair_count: usize,
    pub norm_s2z: f64,
    pub norm_s2plus: f64,
    pub norm_s2minus: f64,
}

pub fn yangian_report(p: &ChainParams) -> Result<YangianReport, ChainError> {
    let h = build_hamiltonian(p)?;
    let (sz, sp, sm) = yangian_quadratic(p.n_sites)?;
    Ok(YangianReport {
        n_sites: p.n_sites,
        boundary: p.boundary,
        j: p.j,
        b: p.b,
        pair_count: ordered_pairs(p.n_sites).count(),
        norm_s2z: crate::eigen::operator_norm(&h.commutator(&sz)?)?,
        norm_s2plus: crate::eigen::operator_norm(&h.commutator(&sp)?)?,
        norm_s2minus: crate::eigen::operator_norm(&h.commutator(&sm)?)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub m: usize,
    pub k: f64,
    pub e_analytic: f64,
    pub e_numeric: f64,
    pub residual: f64,
}

/// One row per momentum: the Rayleigh quotient of `a†_k|∅⟩` in the assembled
/// one-magnon sector and the relative residual `‖(H − E(k))ψ‖/‖ψ‖`.
pub fn dispersion_table(p: &ChainParams) -> Result<Vec<DispersionRow>, ChainError> {
    if p.boundary != Boundary::Periodic {
        return Err(ChainError::NeedsPeriodic);
    }
    let h = build_hamiltonian(p)?;
    let basis = build_sector_basis(p.n_sites, Sector::Magnons(1))?;
    let m = assemble(&h, &basis)?;
    MagnonMomentum::all(p.n_sites)
        .into_iter()
        .map(|k| {
            let psi = StateVector::vacuum().apply(&magnon_creation(&k)?).to_dense(&basis)?;
            let hpsi = m.apply(&psi);
            let nn: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
            let rq: Complex64 = psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum::<Complex64>() / nn;
            let e = p.magnon_energy(k.value());
            let res = hpsi.iter().zip(&psi).map(|(hx, x)| (hx - x * e).norm_sqr()).sum::<f64>().sqrt() / nn.sqrt();
            Ok(DispersionRow { m: k.numerator(), k: k.value(), e_analytic: e, e_numeric: rq.re, residual: res })
        })
        .collect()
}

/// Relabels sites `α → α + shift (mod N)`.
pub fn translate(h: &PauliSum, shift: usize) -> Result<PauliSum, ChainError> {
    let n = h.n_sites();
    let rot = |mask: u64| -> u64 {
        (0..n).filter(|&s| (mask >> s) & 1 == 1).fold(0u64, |acc, s| acc | (1u64 << ((s + shift) % n)))
    };
    let terms = h
        .terms()
        .iter()
        .map(|t| {
            PauliString::from_masks(n, rot(t.x_mask()), rot(t.z_mask()), t.phase()).map(|p| p.with_coeff(t.coeff()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PauliSum::from_terms(n, terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisState;

    #[test]
    fn vacuum_energy_is_zero() {
        for boundary in [Boundary::Periodic, Boundary::Open] {
            let p = ChainParams::new(6, 1.0, 0.7, boundary).unwrap();
            let out = StateVector::vacuum().apply(&build_hamiltonian(&p).unwrap());
            assert!(out.norm() < 1e-13, "{boundary:?}: {}", out.norm());
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ChainParams::periodic(1, 1.0, 0.0).is_err());
        assert!(ChainParams::periodic(4, f64::NAN, 0.0).is_err());
        assert!(ChainParams::periodic(4, 1.0, f64::INFINITY).is_err());
        assert!(MagnonMomentum::new(4, 4).is_err());
        assert!(MagnonMomentum::new(-1, 4).is_err());
    }

    #[test]
    fn one_magnon_rows_follow_the_wrapped_tridiagonal_pattern() {
        // (E − B) c_α = J (c_α − ½ c_{α+1} − ½ c_{α−1})
        let p = ChainParams::periodic(4, 1.3, 0.4).unwrap();
        let basis = build_sector_basis(4, Sector::Magnons(1)).unwrap();
        let m = assemble(&build_hamiltonian(&p).unwrap(), &basis).unwrap();
        for a in 0..4 {
            let i = basis.rank(BasisState::from_up_sites([a])).unwrap();
            for b in 0..4 {
                let j = basis.rank(BasisState::from_up_sites([b])).unwrap();
                let expected = if a == b {
                    p.j + p.b
                } else if (a + 1) % 4 == b || (b + 1) % 4 == a {
                    -p.j / 2.0
                } else {
                    0.0
                };
                assert!((m.get(i, j) - expected).norm() < 1e-14, "({a},{b})");
            }
        }
    }

    #[test]
    fn zero_momentum_commutator_has_no_exchange_part() {
        let p = ChainParams::periodic(6, 1.0, 0.3).unwrap();
        let k = MagnonMomentum::new(0, 6).unwrap();
        let cc = commutator_with_creation(&p, &k).unwrap();
        let rest = &cc.commutator + &(-&magnon_creation(&k).unwrap().scale(c(p.b)));
        assert!(rest.canonicalize().is_empty());
    }

    #[test]
    fn closed_form_matches_symbolic_commutator() {
        let p = ChainParams::periodic(5, 0.8, 0.25).unwrap();
        for k in MagnonMomentum::all(5) {
            let symbolic = commutator_with_creation(&p, &k).unwrap().commutator;
            let closed = creation_commutator_closed_form(&p, &k).unwrap();
            assert!(symbolic.approx_eq(&closed, 1e-12), "m = {}", k.numerator());
        }
    }

    #[test]
    fn open_chain_has_no_momentum_operations() {
        let p = ChainParams::new(4, 1.0, 0.0, Boundary::Open).unwrap();
        let k = MagnonMomentum::new(1, 4).unwrap();
        assert_eq!(commutator_with_creation(&p, &k).unwrap_err(), ChainError::NeedsPeriodic);
    }

    #[test]
    fn yangian_pair_count() {
        assert_eq!(ordered_pairs(6).count(), 15);
        let (sz, _, _) = yangian_quadratic(3).unwrap();
        assert!(!sz.is_empty());
    }

    #[test]
    fn translation_leaves_periodic_hamiltonian_fixed() {
        let p = ChainParams::periodic(5, 1.0, 0.2).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert!(translate(&h, 1).unwrap().approx_eq(&h, 1e-14));
    }
}
