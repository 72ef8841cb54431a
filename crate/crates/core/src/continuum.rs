//! Discretized wave equation and the quartic Landau free energy.
//!
//! Sites `x = αa` carry `q_α(t)` obeying
//! `q̈_α + (2q_α − q_{α+1} − q_{α−1})/a² = 0` (unit wave speed), whose plane
//! waves follow `ω = (2/a)|sin(ka/2)|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{map_indices, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuumError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("time step {dt} exceeds the stability limit {limit}")]
    Unstable { dt: f64, limit: f64 },
    #[error("k = {k} is not an allowed momentum of the periodic lattice")]
    NotAllowed { k: f64 },
    #[error("integration needs a periodic lattice")]
    NeedsPeriodic,
    #[error("frequency fit failed: {0}")]
    FitFailed(String),
}

/// Largest accepted `dt / a`.
pub const STABILITY_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveBoundary {
    Periodic,
    InfiniteAnalytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeWaveParams {
    pub a: f64,
    pub n_sites: usize,
    pub boundary: WaveBoundary,
}

impl LatticeWaveParams {
    pub fn periodic(n_sites: usize, a: f64) -> Result<Self, ContinuumError> {
        let p = Self { a, n_sites, boundary: WaveBoundary::Periodic };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ContinuumError> {
        check_spacing(self.a)?;
        if self.boundary == WaveBoundary::Periodic && self.n_sites < 2 {
            return Err(ContinuumError::InvalidParams(format!("periodic lattice needs N >= 2, got {}", self.n_sites)));
        }
        Ok(())
    }
}

fn check_spacing(a: f64) -> Result<(), ContinuumError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(ContinuumError::InvalidParams(format!("spacing must be positive, got {a}")));
    }
    Ok(())
}

pub fn discrete_dispersion(k: f64, a: f64) -> Result<f64, ContinuumError> {
    check_spacing(a)?;
    Ok((2.0 / a) * (k * a / 2.0).sin().abs())
}

/// `2πm/(Na)` for `m` in `(−N/2, N/2]`, ascending.
pub fn allowed_momenta(n_sites: usize, a: f64) -> Result<Vec<f64>, ContinuumError> {
    LatticeWaveParams::periodic(n_sites, a)?;
    let n = n_sites as i64;
    let lo = -((n + 1) / 2) + 1;
    Ok((lo..=n / 2).map(|m| momentum(m, n_sites, a)).collect())
}

fn momentum(m: i64, n_sites: usize, a: f64) -> f64 {
    2.0 * PI * m as f64 / (n_sites as f64 * a)
}

fn momentum_index(k: f64, p: &LatticeWaveParams) -> Result<i64, ContinuumError> {
    let m = k * p.n_sites as f64 * p.a / (2.0 * PI);
    let r = m.round();
    if (m - r).abs() > 1e-9 {
        return Err(ContinuumError::NotAllowed { k });
    }
    Ok(r as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveInit {
    /// `q_α = cos(kαa)`, at rest.
    Standing,
    /// `q_α = cos(kαa)`, `q̇_α = ω sin(kαa)`: moves rightward.
    Traveling,
}

/// Positions and velocities of a periodic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub a: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    acc: Vec<f64>,
}

impl WaveState {
    pub fn new(a: f64, q: Vec<f64>, v: Vec<f64>) -> Result<Self, ContinuumError> {
        check_spacing(a)?;
        if q.len() != v.len() || q.len() < 2 {
            return Err(ContinuumError::InvalidParams("q and v need equal length >= 2".into()));
        }
        let mut acc = vec![0.0; q.len()];
        accelerations(&q, a, &mut acc);
        Ok(Self { a, q, v, acc })
    }

    pub fn plane_wave(p: &LatticeWaveParams, k: f64, init: WaveInit) -> Result<Self, ContinuumError> {
        p.validate()?;
        if p.boundary != WaveBoundary::Periodic {
            return Err(ContinuumError::NeedsPeriodic);
        }
        // phases from the exact integer index keep k·N·a on a multiple of 2π
        let m = momentum_index(k, p)?;
        let n = p.n_sites;
        let phase = |alpha: usize| 2.0 * PI * ((m * alpha as i64).rem_euclid(n as i64)) as f64 / n as f64;
        let omega = discrete_dispersion(k, p.a)?;
        let q = (0..n).map(|i| phase(i).cos()).collect();
        let v = match init {
            WaveInit::Standing => vec![0.0; n],
            WaveInit::Traveling => (0..n).map(|i| omega * phase(i).sin()).collect(),
        };
        Self::new(p.a, q, v)
    }

    /// One velocity-Verlet step.
    pub fn step(&mut self, dt: f64) {
        for (v, acc) in self.v.iter_mut().zip(&self.acc) {
            *v += 0.5 * dt * acc;
        }
        for (q, v) in self.q.iter_mut().zip(&self.v) {
            *q += dt * v;
        }
        accelerations(&self.q, self.a, &mut self.acc);
        for (v, acc) in self.v.iter_mut().zip(&self.acc) {
            *v += 0.5 * dt * acc;
        }
    }

    /// `Σ ½q̇² + (q_{α+1} − q_α)²/(2a²)`.
    pub fn energy(&self) -> f64 {
        let n = self.q.len();
        let kinetic: f64 = self.v.iter().map(|v| 0.5 * v * v).sum();
        let potential: f64 = (0..n)
            .map(|i| {
                let d = self.q[(i + 1) % n] - self.q[i];
                d * d / (2.0 * self.a * self.a)
            })
            .sum();
        kinetic + potential
    }
}

fn accelerations(q: &[f64], a: f64, out: &mut [f64]) {
    let n = q.len();
    let inv = 1.0 / (a * a);
    for i in 0..n {
        let left = q[(i + n - 1) % n];
        let right = q[(i + 1) % n];
        out[i] = -(2.0 * q[i] - left - right) * inv;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveMeasurement {
    pub k: f64,
    pub omega_analytic: f64,
    pub omega_measured: f64,
    pub rel_error: f64,
    pub steps: usize,
    /// `max_t |E(t) − E(0)| / E(0)`; zero for the uniform mode.
    pub energy_drift: f64,
}

fn check_dt(dt: f64, a: f64) -> Result<(), ContinuumError> {
    let limit = STABILITY_FRACTION * a;
    if !(dt.is_finite() && dt > 0.0) || dt > limit {
        return Err(ContinuumError::Unstable { dt, limit });
    }
    Ok(())
}

/// Integrates the real travelling wave `cos(kαa − ωt)` and fits the
/// oscillation frequency of site 0.
///
/// A travelling wave keeps kinetic and potential energy separately constant,
/// so `energy_drift` is the integrator's own error. At the band edge
/// `k = π/a` it degenerates into a standing wave, whose energy sloshes
/// between the two forms and shows an `O(ω²dt²)` bounded oscillation instead.
pub fn integrate_lattice_wave(
    p: &LatticeWaveParams,
    k: f64,
    t_final: f64,
    dt: f64,
) -> Result<WaveMeasurement, ContinuumError> {
    p.validate()?;
    check_dt(dt, p.a)?;
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(ContinuumError::InvalidParams(format!("t_final must be positive, got {t_final}")));
    }
    let mut state = WaveState::plane_wave(p, k, WaveInit::Traveling)?;
    let steps = (t_final / dt).round() as usize;
    let e0 = state.energy();
    let mut drift: f64 = 0.0;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(state.q[0]);
    for _ in 0..steps {
        state.step(dt);
        samples.push(state.q[0]);
        if e0 > 0.0 {
            drift = drift.max((state.energy() - e0).abs() / e0);
        }
    }
    let omega_measured = fit_frequency(&samples, dt)?;
    let omega_analytic = discrete_dispersion(k, p.a)?;
    let rel_error = if omega_analytic > 0.0 {
        (omega_measured - omega_analytic).abs() / omega_analytic
    } else {
        omega_measured.abs()
    };
    Ok(WaveMeasurement { k, omega_analytic, omega_measured, rel_error, steps, energy_drift: drift })
}

/// Integrates `momenta` independently.
pub fn measure_dispersion(
    p: &LatticeWaveParams,
    momenta: &[f64],
    periods: f64,
    dt: f64,
    exec: Execution,
) -> Result<Vec<WaveMeasurement>, ContinuumError> {
    map_indices(exec, momenta.len(), |i| {
        let k = momenta[i];
        let omega = discrete_dispersion(k, p.a)?;
        // the uniform mode has no period; one band-edge period is enough to see it stay put
        let t_final = if omega > 0.0 { periods * 2.0 * PI / omega } else { PI * p.a };
        integrate_lattice_wave(p, k, t_final, dt)
    })
    .into_iter()
    .collect()
}

/// Least-squares fit of `A cos ωt + B sin ωt + C`, seeded by zero crossings
/// and restricted to a whole number of estimated periods.
pub fn fit_frequency(samples: &[f64], dt: f64) -> Result<f64, ContinuumError> {
    let first = *samples.first().ok_or_else(|| ContinuumError::FitFailed("no samples".into()))?;
    let spread = samples.iter().fold(0.0f64, |m, &y| m.max((y - first).abs()));
    let scale = samples.iter().fold(0.0f64, |m, &y| m.max(y.abs()));
    if spread <= 1e-12 * scale.max(1e-300) {
        return Ok(0.0);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let crossings: Vec<f64> = samples
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] - mean) * (w[1] - mean) < 0.0 || (w[1] == mean && w[0] != mean))
        .map(|(j, w)| {
            let (y0, y1) = (w[0] - mean, w[1] - mean);
            (j as f64 + y0 / (y0 - y1)) * dt
        })
        .collect();
    if crossings.len() < 3 {
        return Err(ContinuumError::FitFailed(format!(
            "{} zero crossings; run at least one full period",
            crossings.len()
        )));
    }
    let seed = PI * (crossings.len() - 1) as f64 / (crossings[crossings.len() - 1] - crossings[0]);
    let t_total = (samples.len() - 1) as f64 * dt;
    let periods = (t_total * seed / (2.0 * PI)).floor().max(1.0);
    let window = ((periods * 2.0 * PI / seed / dt).floor() as usize + 1).min(samples.len());
    let data = &samples[..window];
    let rss = |w: f64| sinusoid_rss(data, dt, w);

    // main lobe of the residual is ~ω/periods wide
    let half = 0.25 * seed / periods;
    let (mut lo, mut hi) = (seed - half, seed + half);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (rss(x1), rss(x2));
    while hi - lo > 1e-13 * seed {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = rss(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = rss(x2);
        }
    }
    let best = 0.5 * (lo + hi);
    // parabolic polish through a symmetric stencil
    let h = 1e-6 * seed / periods;
    let (fm, f0, fp) = (rss(best - h), rss(best), rss(best + h));
    let curvature = fm - 2.0 * f0 + fp;
    if curvature > 0.0 {
        let shift = 0.5 * h * (fm - fp) / curvature;
        if shift.abs() < h && rss(best + shift) <= f0 {
            return Ok(best + shift);
        }
    }
    Ok(best)
}

/// Residual sum of squares of the best `A cos ωt + B sin ωt + C`.
fn sinusoid_rss(y: &[f64], dt: f64, omega: f64) -> f64 {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    let mut yy = 0.0;
    for (j, &yj) in y.iter().enumerate() {
        let (s, c) = (omega * j as f64 * dt).sin_cos();
        let row = nalgebra::Vector3::new(c, s, 1.0);
        ata += row * row.transpose();
        aty += row * yj;
        yy += yj * yj;
    }
    match ata.cholesky() {
        Some(ch) => {
            let coef = ch.solve(&aty);
            (yy - coef.dot(&aty)).max(0.0)
        }
        None => yy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauParams {
    pub tau: f64,
    pub tau_c: f64,
    pub lambda: f64,
}

impl LandauParams {
    pub fn new(tau: f64, tau_c: f64, lambda: f64) -> Result<Self, ContinuumError> {
        let p = Self { tau, tau_c, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ContinuumError> {
        if !(self.tau.is_finite() && self.tau_c.is_finite()) {
            return Err(ContinuumError::InvalidParams("tau and tau_c must be finite".into()));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(ContinuumError::InvalidParams(format!(
                "lambda must be positive for F to be bounded below, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// `F(φ) = (τ − τ_c)φ² + λφ⁴`.
    pub fn free_energy(&self, phi: f64) -> f64 {
        let p2 = phi * phi;
        (self.tau - self.tau_c) * p2 + self.lambda * p2 * p2
    }

    fn slope(&self, phi: f64) -> f64 {
        2.0 * (self.tau - self.tau_c) * phi + 4.0 * self.lambda * phi.powi(3)
    }

    fn curvature(&self, phi: f64) -> f64 {
        2.0 * (self.tau - self.tau_c) + 12.0 * self.lambda * phi * phi
    }
}

/// The commonly quoted order parameter `√((τ_c − τ)/λ)` below `τ_c`, 0 above.
///
/// `F'(φ) = 0` for the quartic above puts the minimum at `√((τ_c − τ)/(2λ))`
/// instead (see [`landau_stationary_point`]); the quoted form belongs to a
/// quartic term of `λφ⁴/2`.
pub fn landau_closed_form(p: &LandauParams) -> f64 {
    if p.tau < p.tau_c {
        ((p.tau_c - p.tau) / p.lambda).sqrt()
    } else {
        0.0
    }
}

/// Root of `F'(φ) = 0` on `φ > 0`, or 0 when `τ ≥ τ_c`.
pub fn landau_stationary_point(p: &LandauParams) -> f64 {
    if p.tau < p.tau_c {
        ((p.tau_c - p.tau) / (2.0 * p.lambda)).sqrt()
    } else {
        0.0
    }
}

/// Minimizes `F` over `φ ≥ 0`: bracket, golden section, Newton polish.
pub fn landau_equilibrium(p: &LandauParams) -> Result<f64, ContinuumError> {
    p.validate()?;
    if p.tau >= p.tau_c {
        // F' = 2(τ − τ_c)φ + 4λφ³ ≥ 0 on φ ≥ 0
        return Ok(0.0);
    }
    // F < 0 just above 0 and grows without bound; double until F turns positive
    let mut hi = ((p.tau_c - p.tau) / p.lambda).sqrt().max(f64::MIN_POSITIVE);
    while p.free_energy(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (p.free_energy(x1), p.free_energy(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-6 * hi {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = p.free_energy(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = p.free_energy(x2);
        }
    }
    let mut phi = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = p.slope(phi) / p.curvature(phi);
        phi -= step;
        if step.abs() <= 1e-16 * phi {
            break;
        }
    }
    Ok(phi)
}
