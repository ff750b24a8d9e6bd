mod args;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use unireg::report::{fmt_f64, render_svg, write_csv, write_trajectory_csv};
use unireg::{run_adaptive_session, EpisodeLog, Error, Method, SessionConfig, SessionReport};

use crate::args::{load_config, Cli, Command, OutputArgs};

/// How a command ended; maps onto the process exit code.
#[derive(Debug)]
enum Failure {
    /// The closed loop blew up. Partial output has been written.
    Diverged(String),
    /// Bad flags, bad config, or an I/O problem.
    Config(String),
    /// The reader hung up, as `| head` does.
    Closed,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Diverged(_) => 1,
            Failure::Config(_) => 2,
            Failure::Closed => 0,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            Failure::Closed
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            if let csv::ErrorKind::Io(io) = e.into_kind() {
                return io.into();
            }
            unreachable!("is_io_error checked above");
        }
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Diverged(msg) => eprintln!("diverged: {msg}"),
                Failure::Config(msg) => eprintln!("error: {msg}"),
                Failure::Closed => {}
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { session, output } => {
            let cfg = session.resolve(Some(Method::Fixed)).map_err(Failure::Config)?;
            session_command(&cfg, &output)
        }
        Command::Tune {
            method,
            session,
            output,
        } => {
            let cfg = session.resolve(method.map(Method::from)).map_err(Failure::Config)?;
            session_command(&cfg, &output)
        }
        Command::Traj {
            config,
            trajectory,
            steps,
            sample_period,
            out,
        } => {
            let base = load_config(config.as_deref()).map_err(Failure::Config)?.trajectory;
            let spec = trajectory.apply(&base, sample_period).map_err(Failure::Config)?;
            let steps = steps.unwrap_or(spec.steps_per_period() as u64);
            write_trajectory_csv(sink(out.as_deref())?, &spec, steps)?;
            Ok(())
        }
        Command::Compare {
            session,
            out,
            csv_dir,
            svg_dir,
            sequential,
        } => {
            let cfg = session.resolve(None).map_err(Failure::Config)?;
            compare(&cfg, out.as_deref(), csv_dir.as_deref(), svg_dir.as_deref(), sequential)
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Config(format!("creating {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn session_command(cfg: &SessionConfig, output: &OutputArgs) -> Result<(), Failure> {
    let with_ase = cfg.method == Method::ShcAse;
    let (logs, outcome) = match run_adaptive_session(cfg) {
        Ok(report) => {
            let logs = report.logs.clone();
            (logs, Ok(report))
        }
        Err(failure) => (failure.logs, Err(failure.error)),
    };

    let mut out = sink(output.out.as_deref())?;
    write_csv(&mut out, &logs, with_ase)?;
    out.flush()?;
    if let Some(path) = &output.svg {
        fs::write(path, render_svg(&logs))?;
    }

    let report = outcome.map_err(classify)?;
    if let Some(path) = &output.summary {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Config(e.to_string()))?;
        fs::write(path, json)?;
    }
    eprintln!("{}", summary_line(&report));
    Ok(())
}

fn classify(error: Error) -> Failure {
    match error {
        Error::Divergence { .. } | Error::DriftOutOfRange { .. } => Failure::Diverged(error.to_string()),
        other => Failure::Config(other.to_string()),
    }
}

fn summary_line(r: &SessionReport) -> String {
    let converged = r
        .summary
        .episodes_to_convergence
        .map_or("never".to_string(), |e| e.to_string());
    format!(
        "{}: episodes={} converged_at={} K={} N={} mean|e|={:.6} max_u={:.3} evaluations={}",
        r.method.name(),
        r.logs.len(),
        converged,
        r.final_gains.k(),
        r.final_gains.n(),
        r.summary.mean_abs_error,
        r.summary.max_input,
        r.evaluations,
    )
}

/// Per-method seed: a fixed stream of the master seed, so adding threads or
/// reordering the runs never changes any method's draws.
fn method_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

#[derive(Debug, Serialize)]
struct CompareRow {
    method: &'static str,
    status: String,
    episodes: usize,
    converged_at: String,
    final_k: String,
    final_n: String,
    final_cost: String,
    mean_abs_error: String,
    rms_error: String,
    max_input: String,
    evaluations: usize,
}

struct MethodRun {
    method: Method,
    logs: Vec<EpisodeLog>,
    outcome: Result<SessionReport, Error>,
}

fn compare(
    base: &SessionConfig,
    out: Option<&Path>,
    csv_dir: Option<&Path>,
    svg_dir: Option<&Path>,
    sequential: bool,
) -> Result<(), Failure> {
    let job = |(i, method): (usize, Method)| {
        let cfg = SessionConfig {
            method,
            seed: method_seed(base.seed, i),
            ..base.clone()
        };
        match run_adaptive_session(&cfg) {
            Ok(report) => MethodRun {
                method,
                logs: report.logs.clone(),
                outcome: Ok(report),
            },
            Err(f) => MethodRun {
                method,
                logs: f.logs,
                outcome: Err(f.error),
            },
        }
    };
    let jobs: Vec<(usize, Method)> = Method::ALL.into_iter().enumerate().collect();
    let runs: Vec<MethodRun> = if sequential {
        jobs.into_iter().map(job).collect()
    } else {
        jobs.into_par_iter().map(job).collect()
    };

    for dir in [csv_dir, svg_dir].into_iter().flatten() {
        fs::create_dir_all(dir)?;
    }
    let mut table = csv::Writer::from_writer(sink(out)?);
    let mut diverged = Vec::new();
    for run in &runs {
        let name = run.method.name();
        if let Some(dir) = csv_dir {
            let file = BufWriter::new(File::create(dir.join(format!("{name}.csv")))?);
            write_csv(file, &run.logs, run.method == Method::ShcAse)?;
        }
        if let Some(dir) = svg_dir {
            fs::write(dir.join(format!("{name}.svg")), render_svg(&run.logs))?;
        }
        let row = match &run.outcome {
            Ok(r) => CompareRow {
                method: name,
                status: "ok".into(),
                episodes: r.logs.len(),
                converged_at: r
                    .summary
                    .episodes_to_convergence
                    .map_or(String::new(), |e| e.to_string()),
                final_k: fmt_f64(r.final_gains.k()),
                final_n: fmt_f64(r.final_gains.n()),
                final_cost: r.episode_costs.last().map_or(String::new(), |&c| fmt_f64(c)),
                mean_abs_error: fmt_f64(r.summary.mean_abs_error),
                rms_error: fmt_f64(r.summary.rms_error),
                max_input: fmt_f64(r.summary.max_input),
                evaluations: r.evaluations,
            },
            Err(e) => {
                if matches!(classify(e.clone()), Failure::Config(_)) {
                    return Err(Failure::Config(format!("{name}: {e}")));
                }
                diverged.push(name);
                CompareRow {
                    method: name,
                    status: "diverged".into(),
                    episodes: run.logs.len(),
                    converged_at: String::new(),
                    final_k: String::new(),
                    final_n: String::new(),
                    final_cost: String::new(),
                    mean_abs_error: String::new(),
                    rms_error: String::new(),
                    max_input: String::new(),
                    evaluations: 0,
                }
            }
        };
        table.serialize(row)?;
    }
    table.flush()?;
    if let Ok(r) = runs.iter().map(|r| r.outcome.as_ref()).collect::<Result<Vec<_>, _>>() {
        for report in r {
            eprintln!("{}", summary_line(report));
        }
    }
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::Diverged(diverged.join(", ")))
    }
}
