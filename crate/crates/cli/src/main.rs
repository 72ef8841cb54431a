mod args;
mod cache;
mod commands;
mod error;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use spinlab::eigen::SolverConfig;
use spinlab::Execution;

use args::{Cli, Format, GlobalArgs};
use cache::Cache;
use commands::Env;
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let context = json!({
        "command": cli.command.name(),
        "args": cli.command,
        "seed": cli.global.seed,
    });
    match execute(&cli) {
        Ok(doc) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(doc.as_bytes()).and_then(|()| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let doc = json!({
                "error_kind": e.kind(),
                "message": e.to_string(),
                "context": context,
            });
            let body = spinlab::numfmt::to_json(&doc, false).expect("JSON values always serialize");
            println!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn solver_config(g: &GlobalArgs, exec: Execution) -> SolverConfig {
    let d = SolverConfig::default();
    let t = &g.tolerances;
    SolverConfig {
        dense_threshold: t.dense_threshold.unwrap_or(d.dense_threshold),
        tol: t.eig_tol.unwrap_or(d.tol),
        max_restarts: t.max_restarts.unwrap_or(d.max_restarts),
        seed: g.seed,
        cluster_tol: t.cluster_tol.unwrap_or(d.cluster_tol),
        execution: exec,
    }
}

fn configure_threads(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            eprintln!("note: built without parallel support; running sequentially");
            Ok(Execution::Sequential)
        }
        None => Ok(Execution::Parallel.effective()),
    }
}

fn check_tolerances(g: &GlobalArgs) -> Result<(), CliError> {
    let t = &g.tolerances;
    for (name, v) in [("--eig-tol", t.eig_tol), ("--cluster-tol", t.cluster_tol)] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")));
            }
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    check_tolerances(g)?;
    commands::validate(&cli.command)?;
    let exec = configure_threads(g.threads)?;

    let cache = if g.no_cache || !commands::cacheable(&cli.command) {
        None
    } else {
        g.cache_dir.clone().or_else(cache::default_dir).map(Cache::new)
    };
    // thread count and cache location never change a result, so they stay out of the key
    let key = cache.as_ref().map(|_| {
        cache::key(&json!({
            "version": spinlab::VERSION,
            "command": cli.command,
            "format": g.format,
            "pretty": g.pretty,
            "seed": g.seed,
            "tolerances": g.tolerances,
        }))
    });
    if let (Some(c), Some(k)) = (&cache, &key) {
        if let Some(body) = c.lookup(k) {
            eprintln!("cache hit: {}", c.path(k).display());
            return Ok(body);
        }
    }

    let env = Env { solver: solver_config(g, exec), exec, seed: g.seed };
    let outcome = commands::run(&cli.command, &env)?;
    let doc = match g.format {
        Format::Json => {
            let mut s = outcome
                .json
                .render(g.pretty)
                .map_err(|e| CliError::Io { context: "serializing JSON".into(), source: e.into() })?;
            s.push('\n');
            s
        }
        Format::Csv => outcome.table.to_csv()?,
    };

    if let (Some(c), Some(k)) = (&cache, &key) {
        match c.store(k, &doc) {
            Ok(path) => eprintln!("cache store: {}", path.display()),
            Err(e) => eprintln!("warning: could not write cache entry: {e}"),
        }
    }
    Ok(doc)
}
