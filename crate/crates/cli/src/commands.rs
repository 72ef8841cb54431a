use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spinlab::basis::{assemble_with, build_sector_basis, Sector};
use spinlab::bethe::{self, BetheConfig, BetheError, BetheReport};
use spinlab::chain::{build_hamiltonian, dispersion_table, yangian_report, Boundary, ChainParams, DispersionRow};
use spinlab::continuum::{self, ContinuumError, LandauParams, LatticeWaveParams, WaveMeasurement};
use spinlab::eigen::{spectrum, stack_spectra, SolverConfig, SpectrumReport};
use spinlab::toric::{self, BishopPath, Braiding, Color, LatticeSpec, ToricLattice};
use spinlab::Execution;

use crate::args::{
    BetheArgs, BraidArgs, ChainArgs, ChainCmd, Command, LandauArgs, LandauCmd, StackCmd, ToricCmd, WaveCmd,
};
use crate::error::CliError;
use crate::render::{joined, Table};

/// Everything a command needs besides its own flags.
pub struct Env {
    pub solver: SolverConfig,
    pub exec: Execution,
    pub seed: u64,
}

/// A computed result, rendered lazily in whichever format was asked for.
pub struct Outcome {
    pub json: Box<dyn ErasedSerialize>,
    pub table: Table,
}

/// Object-safe stand-in for `Serialize` so outcomes can be boxed.
pub trait ErasedSerialize {
    fn render(&self, pretty: bool) -> serde_json::Result<String>;
}

impl<T: Serialize> ErasedSerialize for T {
    fn render(&self, pretty: bool) -> serde_json::Result<String> {
        spinlab::numfmt::to_json(self, pretty)
    }
}

fn outcome<T: Serialize + 'static>(value: T, table: Table) -> Outcome {
    Outcome { json: Box::new(value), table }
}

/// Commands whose results are worth caching.
pub fn cacheable(cmd: &Command) -> bool {
    matches!(
        cmd,
        Command::Chain(ChainCmd::Spectrum { .. })
            | Command::Chain(ChainCmd::Bethe(BetheArgs { sweep: true, .. }))
            | Command::Toric(ToricCmd::Spectrum { .. })
            | Command::Toric(ToricCmd::Degeneracy { .. })
    )
}

/// Flag combinations that clap's declarative constraints cannot express.
pub fn validate(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Chain(ChainCmd::Bethe(a)) => {
            if a.sweep && !a.quantum_numbers.is_empty() {
                return Err(CliError::Usage("--sweep and --quantum-numbers are mutually exclusive".into()));
            }
            if !a.sweep && a.quantum_numbers.is_empty() {
                return Err(CliError::Usage("give --quantum-numbers or --sweep".into()));
            }
            if let Some(m) = a.magnons {
                if !a.quantum_numbers.is_empty() && m != a.quantum_numbers.len() {
                    return Err(CliError::Usage(format!(
                        "--magnons {m} disagrees with {} quantum numbers",
                        a.quantum_numbers.len()
                    )));
                }
            }
        }
        Command::Landau(LandauCmd::Minimize(a)) if a.tau.is_none() && a.points.is_none() => {
            return Err(CliError::Usage("give --tau or --tau-min/--tau-max/--points".into()));
        }
        _ => {}
    }
    Ok(())
}

pub fn run(cmd: &Command, env: &Env) -> Result<Outcome, CliError> {
    match cmd {
        Command::Chain(c) => match c {
            ChainCmd::Spectrum { chain, sector, k } => chain_spectrum(chain, *sector, *k, env),
            ChainCmd::Dispersion { chain } => chain_dispersion(chain),
            ChainCmd::Bethe(a) => chain_bethe(a, env),
            ChainCmd::Yangian { n, j, b } => chain_yangian(*n, *j, *b),
        },
        Command::Toric(t) => match t {
            ToricCmd::Spectrum { lx, ly, k } => toric_spectrum(*lx, *ly, *k, env),
            ToricCmd::Degeneracy { lx, ly, method } => {
                let l = ToricLattice::new(*lx, *ly)?;
                let cert = toric::degeneracy_certificate(&l, method.map(Into::into), &env.solver)?;
                let mut t = Table::new(&["method", "n", "rank", "degeneracy"]);
                let method = serde_json::to_value(cert.method).expect("enum serializes");
                t.row(vec![
                    method.as_str().unwrap_or_default().into(),
                    cert.n.into(),
                    cert.rank.into(),
                    cert.degeneracy.into(),
                ]);
                Ok(outcome(cert, t))
            }
            ToricCmd::Braid(a) => toric_braid(a, env),
            ToricCmd::Lines { input, lx, ly } => match input {
                Some(path) => toric_lines(path),
                None => toric_logicals(*lx, *ly),
            },
        },
        Command::Wave(w) => match w {
            WaveCmd::Dispersion { n, a, dt, periods, modes } => wave_dispersion(*n, *a, *dt, *periods, modes, env),
            WaveCmd::Integrate { n, a, mode, t_final, dt } => {
                let p = LatticeWaveParams::periodic(*n, *a)?;
                let k = mode_momentum(*mode, *n, *a)?;
                let m = continuum::integrate_lattice_wave(&p, k, *t_final, *dt)?;
                Ok(outcome(m, wave_table(&[m])))
            }
        },
        Command::Landau(LandauCmd::Minimize(a)) => landau(a),
        Command::Stack(StackCmd::Spectra { a, b }) => {
            #[derive(Serialize)]
            struct Stacked {
                a: Vec<f64>,
                b: Vec<f64>,
                stacked: Vec<f64>,
            }
            let stacked = stack_spectra(a, b);
            let t = Table::levels(&stacked);
            Ok(outcome(Stacked { a: a.clone(), b: b.clone(), stacked }, t))
        }
    }
}

fn chain_params(c: &ChainArgs) -> Result<ChainParams, CliError> {
    Ok(ChainParams::new(c.n, c.j, c.b, c.boundary.into())?)
}

#[derive(Serialize)]
struct ChainSpectrum {
    chain: ChainParams,
    sector: Sector,
    report: SpectrumReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    dispersion: Option<Vec<DispersionRow>>,
}

fn chain_spectrum(c: &ChainArgs, sector: Sector, k: Option<usize>, env: &Env) -> Result<Outcome, CliError> {
    let p = chain_params(c)?;
    let basis = build_sector_basis(p.n_sites, sector)?;
    let m = assemble_with(&build_hamiltonian(&p)?, &basis, env.exec)?;
    let report = spectrum(&m, k, &env.solver)?;
    // the one-magnon sector of a ring is exactly the dispersion relation
    let dispersion =
        (sector == Sector::Magnons(1) && p.boundary == Boundary::Periodic).then(|| dispersion_table(&p)).transpose()?;
    let table = match &dispersion {
        Some(rows) => dispersion_rows(rows),
        None => Table::levels(&report.eigenvalues),
    };
    Ok(outcome(ChainSpectrum { chain: p, sector, report, dispersion }, table))
}

fn dispersion_rows(rows: &[DispersionRow]) -> Table {
    let mut t = Table::new(&["m", "k", "e_analytic", "e_numeric", "residual"]);
    for r in rows {
        t.row(vec![r.m.into(), r.k.into(), r.e_analytic.into(), r.e_numeric.into(), r.residual.into()]);
    }
    t
}

fn chain_dispersion(c: &ChainArgs) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct Dispersion {
        chain: ChainParams,
        rows: Vec<DispersionRow>,
    }
    let p = chain_params(c)?;
    let rows = dispersion_table(&p)?;
    let t = dispersion_rows(&rows);
    Ok(outcome(Dispersion { chain: p, rows }, t))
}

fn bethe_rows(reports: &[BetheReport]) -> Table {
    let mut t = Table::new(&[
        "quantum_numbers",
        "momenta",
        "max_residual",
        "energy",
        "matched_ed_eigenvalue",
        "converged",
        "failure",
    ]);
    for r in reports {
        let max_res = r.residuals.iter().fold(None, |a: Option<f64>, &x| Some(a.unwrap_or(0.0).max(x.abs())));
        t.row(vec![
            joined(&r.quantum_numbers),
            joined(&r.momenta),
            max_res.into(),
            r.energy.into(),
            r.matched_ed_eigenvalue.into(),
            r.converged.into(),
            r.failure.clone().into(),
        ]);
    }
    t
}

#[derive(Serialize)]
struct SingleBethe {
    chain: ChainParams,
    report: BetheReport,
    /// `‖(H − E)ψ‖ / ‖ψ‖` of the ansatz state built from the roots.
    state_residual: Option<f64>,
}

fn chain_bethe(a: &BetheArgs, env: &Env) -> Result<Outcome, CliError> {
    let p = chain_params(&a.chain)?;
    let cfg = BetheConfig { tol: a.bethe_tol, max_iter: a.max_iter, ..BetheConfig::default() };
    if a.sweep {
        let magnons = a.magnons.unwrap_or(2);
        let rep = bethe::sweep(&p, magnons, &cfg, a.compare_ed, a.dense_limit, a.match_tol, env.exec)?;
        let t = bethe_rows(&rep.reports);
        return Ok(outcome(rep, t));
    }
    let n = p.n_sites;
    let qn = a.quantum_numbers.clone();
    let (report, state_residual) = match bethe::solve_multi_magnon(&p, &qn, &cfg) {
        Ok(root) => {
            let (basis, psi) = bethe::bethe_state(n, &root.momenta)?;
            let res = bethe::eigen_residual(&p, &basis, &psi, root.energy)?;
            let matched = if a.compare_ed {
                let levels = bethe::sector_spectrum(&p, qn.len())?;
                levels
                    .into_iter()
                    .filter(|e| (e - root.energy).abs() <= a.match_tol)
                    .min_by(|x, y| (x - root.energy).abs().total_cmp(&(y - root.energy).abs()))
            } else {
                None
            };
            let report = BetheReport {
                n,
                quantum_numbers: qn,
                momenta: root.momenta,
                residuals: root.residuals,
                energy: Some(root.energy),
                matched_ed_eigenvalue: matched,
                converged: true,
                failure: None,
            };
            (report, Some(res))
        }
        // a root that never settles is a result, not an error
        Err(e @ BetheError::NoConvergence { .. }) => {
            let BetheError::NoConvergence { final_iterate, .. } = &e else { unreachable!() };
            let momenta: Vec<f64> = final_iterate.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
            let residuals = bethe::quantization_residual(&momenta, n).unwrap_or_default();
            let report = BetheReport {
                n,
                quantum_numbers: qn,
                momenta,
                residuals,
                energy: None,
                matched_ed_eigenvalue: None,
                converged: false,
                failure: Some(e.to_string()),
            };
            (report, None)
        }
        Err(e) => return Err(e.into()),
    };
    let t = bethe_rows(std::slice::from_ref(&report));
    Ok(outcome(SingleBethe { chain: p, report, state_residual }, t))
}

fn chain_yangian(n: usize, j: f64, b: f64) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct Yangian {
        reports: Vec<spinlab::chain::YangianReport>,
    }
    let reports = [Boundary::Periodic, Boundary::Open]
        .into_iter()
        .map(|bc| Ok(yangian_report(&ChainParams::new(n, j, b, bc)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(&["boundary", "n_sites", "j", "b", "pair_count", "norm_s2z", "norm_s2plus", "norm_s2minus"]);
    for r in &reports {
        let bc = match r.boundary {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        };
        t.row(vec![
            bc.into(),
            r.n_sites.into(),
            r.j.into(),
            r.b.into(),
            r.pair_count.into(),
            r.norm_s2z.into(),
            r.norm_s2plus.into(),
            r.norm_s2minus.into(),
        ]);
    }
    Ok(outcome(Yangian { reports }, t))
}

fn toric_spectrum(lx: usize, ly: usize, k: Option<usize>, env: &Env) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct ToricSpectrum {
        lx: usize,
        ly: usize,
        n_sites: usize,
        report: SpectrumReport,
        /// `(energy, multiplicity)` counted from independent plaquette flips.
        combinatorial: Vec<(f64, u128)>,
    }
    let l = ToricLattice::new(lx, ly)?;
    let basis = build_sector_basis(l.n_sites(), Sector::All)?;
    let m = assemble_with(&toric::build_toric_hamiltonian(&l), &basis, env.exec)?;
    let report = spectrum(&m, k, &env.solver)?;
    let t = Table::levels(&report.eigenvalues);
    Ok(outcome(
        ToricSpectrum { lx, ly, n_sites: l.n_sites(), report, combinatorial: toric::combinatorial_spectrum(&l) },
        t,
    ))
}

fn read_lattice(path: &Path) -> Result<(ToricLattice, Vec<BishopPath>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { context: format!("reading {}", path.display()), source })?;
    let spec: LatticeSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(spec.build()?)
}

#[derive(Serialize)]
struct BraidPair {
    w_path: usize,
    b_path: usize,
    #[serde(flatten)]
    braiding: Braiding,
}

#[derive(Serialize)]
struct BraidReport {
    lx: usize,
    ly: usize,
    source: &'static str,
    pair_count: usize,
    /// Pairs whose intersection parity agrees with the symplectic sign.
    agreements: usize,
    minus_one: usize,
    pairs: Vec<BraidPair>,
}

fn toric_braid(a: &BraidArgs, env: &Env) -> Result<Outcome, CliError> {
    let mut pairs = Vec::new();
    let (l, source) = match &a.input {
        Some(path) => {
            let (l, paths) = read_lattice(path)?;
            for (i, w) in paths.iter().enumerate().filter(|(_, p)| p.color() == Color::Black) {
                for (j, b) in paths.iter().enumerate().filter(|(_, p)| p.color() == Color::White) {
                    pairs.push(BraidPair { w_path: i, b_path: j, braiding: toric::braiding_phase(&l, w, b)? });
                }
            }
            (l, "input")
        }
        None => {
            let l = ToricLattice::new(a.lx, a.ly)?;
            let mut rng = ChaCha8Rng::seed_from_u64(env.seed);
            for i in 0..a.pairs {
                let w = BishopPath::random_walk(&l, Color::Black, a.steps, &mut rng)?;
                let b = BishopPath::random_walk(&l, Color::White, a.steps, &mut rng)?;
                pairs.push(BraidPair {
                    w_path: 2 * i,
                    b_path: 2 * i + 1,
                    braiding: toric::braiding_phase(&l, &w, &b)?,
                });
            }
            (l, "random")
        }
    };
    let mut t = Table::new(&["w_path", "b_path", "intersections", "phase", "symplectic_sign"]);
    for p in &pairs {
        t.row(vec![
            p.w_path.into(),
            p.b_path.into(),
            p.braiding.intersections.into(),
            p.braiding.phase.into(),
            p.braiding.symplectic_sign.into(),
        ]);
    }
    let report = BraidReport {
        lx: l.lx(),
        ly: l.ly(),
        source,
        pair_count: pairs.len(),
        agreements: pairs.iter().filter(|p| p.braiding.phase == p.braiding.symplectic_sign).count(),
        minus_one: pairs.iter().filter(|p| p.braiding.phase == -1).count(),
        pairs,
    };
    Ok(outcome(report, t))
}

fn color_name(c: Color) -> &'static str {
    match c {
        Color::White => "white",
        Color::Black => "black",
    }
}

fn toric_lines(path: &Path) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct Line {
        index: usize,
        color: Color,
        closed: bool,
        operator: String,
        flipped_plaquettes: Vec<(usize, usize)>,
        excitation_energy: f64,
    }
    #[derive(Serialize)]
    struct Lines {
        lx: usize,
        ly: usize,
        lines: Vec<Line>,
        /// Energy above the ground state of all lines applied together.
        combined_excitation_energy: f64,
    }
    let (l, paths) = read_lattice(path)?;
    let mut ops = Vec::new();
    let mut lines = Vec::new();
    for (index, p) in paths.iter().enumerate() {
        let op = toric::line_operator(&l, p)?;
        lines.push(Line {
            index,
            color: p.color(),
            closed: p.is_closed(),
            operator: op.to_string(),
            flipped_plaquettes: toric::flipped_plaquettes(&l, &op)?,
            excitation_energy: toric::excitation_energy(&l, std::slice::from_ref(&op))?,
        });
        ops.push(op);
    }
    let combined = toric::excitation_energy(&l, &ops)?;
    let mut t = Table::new(&["index", "color", "closed", "operator", "flipped_plaquettes", "excitation_energy"]);
    for line in &lines {
        let flipped: Vec<String> = line.flipped_plaquettes.iter().map(|(x, y)| format!("{x}:{y}")).collect();
        t.row(vec![
            line.index.into(),
            color_name(line.color).into(),
            line.closed.into(),
            line.operator.clone().into(),
            flipped.join(" ").into(),
            line.excitation_energy.into(),
        ]);
    }
    Ok(outcome(Lines { lx: l.lx(), ly: l.ly(), lines, combined_excitation_energy: combined }, t))
}

fn toric_logicals(lx: usize, ly: usize) -> Result<Outcome, CliError> {
    let l = ToricLattice::new(lx, ly)?;
    let rep = toric::logical_algebra(&l)?;
    let mut t = Table::new(&["kind", "name", "value"]);
    for (name, op) in &rep.generators {
        t.row(vec!["generator".into(), name.clone().into(), op.clone().into()]);
    }
    for (name, ok) in &rep.relations_verified {
        t.row(vec!["relation".into(), name.clone().into(), ok.to_string().into()]);
    }
    t.row(vec!["degeneracy".into(), "".into(), rep.degeneracy.to_string().into()]);
    Ok(outcome(rep, t))
}

/// `k = 2πm/(Na)` for `m` in `(−N/2, N/2]`.
fn mode_momentum(m: i64, n: usize, a: f64) -> Result<f64, CliError> {
    let k = 2.0 * PI * m as f64 / (n as f64 * a);
    let n = n as i64;
    if m <= -((n + 1) / 2) || m > n / 2 {
        return Err(ContinuumError::NotAllowed { k }.into());
    }
    Ok(k)
}

fn wave_table(ms: &[WaveMeasurement]) -> Table {
    let mut t = Table::new(&["k", "omega_analytic", "omega_measured", "rel_error", "steps", "energy_drift"]);
    for m in ms {
        t.row(vec![
            m.k.into(),
            m.omega_analytic.into(),
            m.omega_measured.into(),
            m.rel_error.into(),
            m.steps.into(),
            m.energy_drift.into(),
        ]);
    }
    t
}

fn wave_dispersion(n: usize, a: f64, dt: f64, periods: f64, modes: &[i64], env: &Env) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct WaveDispersion {
        lattice: LatticeWaveParams,
        dt: f64,
        periods: f64,
        measurements: Vec<WaveMeasurement>,
    }
    let p = LatticeWaveParams::periodic(n, a)?;
    let momenta = if modes.is_empty() {
        continuum::allowed_momenta(n, a)?
    } else {
        modes.iter().map(|&m| mode_momentum(m, n, a)).collect::<Result<_, _>>()?
    };
    let measurements = continuum::measure_dispersion(&p, &momenta, periods, dt, env.exec)?;
    let t = wave_table(&measurements);
    Ok(outcome(WaveDispersion { lattice: p, dt, periods, measurements }, t))
}

fn landau(a: &LandauArgs) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct LandauPoint {
        tau: f64,
        tau_c: f64,
        lambda: f64,
        /// Global minimizer found numerically.
        phi_numeric: f64,
        /// `√((τc − τ)/λ)` below the transition.
        phi_closed_form: f64,
        /// Zero of `∂F/∂φ`, `√((τc − τ)/(2λ))` below the transition.
        phi_stationary: f64,
        free_energy: f64,
    }
    #[derive(Serialize)]
    struct Landau {
        points: Vec<LandauPoint>,
    }
    let taus: Vec<f64> = match (a.tau, a.tau_min, a.tau_max, a.points) {
        (Some(t), ..) => vec![t],
        (None, Some(lo), Some(hi), Some(n)) => match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        },
        _ => unreachable!("validated before running"),
    };
    let points = taus
        .into_iter()
        .map(|tau| {
            let p = LandauParams::new(tau, a.tau_c, a.lambda)?;
            let phi = continuum::landau_equilibrium(&p)?;
            Ok(LandauPoint {
                tau,
                tau_c: a.tau_c,
                lambda: a.lambda,
                phi_numeric: phi,
                phi_closed_form: continuum::landau_closed_form(&p),
                phi_stationary: continuum::landau_stationary_point(&p),
                free_energy: p.free_energy(phi),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t =
        Table::new(&["tau", "tau_c", "lambda", "phi_numeric", "phi_closed_form", "phi_stationary", "free_energy"]);
    for p in &points {
        t.row(vec![
            p.tau.into(),
            p.tau_c.into(),
            p.lambda.into(),
            p.phi_numeric.into(),
            p.phi_closed_form.into(),
            p.phi_stationary.into(),
            p.free_energy.into(),
        ]);
    }
    Ok(outcome(Landau { points }, t))
}
