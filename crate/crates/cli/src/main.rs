mod compute;
mod state;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaussfid::channel::DEFAULT_ORDER;
use gaussfid::fock::DEFAULT_TAIL_TOL;
use gaussfid::format::sig12;
use gaussfid::phasespace::{DEFAULT_HALF_WIDTH, DEFAULT_POINTS};
use gaussfid::GridSpec;
use serde::Serialize;

use compute::{CliError, CliResult, MethodArg, Settings};
use state::StateSpec;
use verify::{Suite, VerifyArgs};

/// Fidelity of the bosonic Gaussian noise channel in truncated Fock space.
#[derive(Parser, Debug)]
#[command(name = "gaussfid", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fidelity of one state at one noise level
    Fidelity {
        #[arg(long)]
        state: StateSpec,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[command(flatten)]
        opts: NumericOpts,
        #[arg(long)]
        json: bool,
    },
    /// Fidelity over a ladder of noise levels, as CSV
    Curve {
        #[arg(long)]
        state: StateSpec,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        gamma_min: f64,
        #[arg(long, default_value_t = 4.0)]
        gamma_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        #[command(flatten)]
        opts: NumericOpts,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the self-check suites
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Restrict the scaling suite to one state
        #[arg(long)]
        state: Option<StateSpec>,
        /// Restrict the scaling suite to one noise level
        #[arg(long)]
        gamma: Option<f64>,
        /// Random states for the bound suite
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        quad_order: usize,
        #[arg(long)]
        json: bool,
    },
    /// Apply the channel and dump the output density matrix
    Channel {
        #[arg(long)]
        state: StateSpec,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[command(flatten)]
        opts: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct NumericOpts {
    #[arg(long, value_enum, default_value_t = MethodArg::Weyl)]
    method: MethodArg,
    /// Fock truncation (default 64; 24 for a-gamma; 32 for thermal with direct)
    #[arg(long)]
    dim: Option<usize>,
    /// Gauss-Hermite points per axis
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    quad_order: usize,
    /// Monte-Carlo samples
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest truncated weight accepted when building states
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    /// Wigner grid half-width in q and p
    #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
    half_width: f64,
    /// Wigner grid points per axis
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
}

impl NumericOpts {
    fn settings(&self) -> CliResult<Settings> {
        Ok(Settings {
            method: self.method,
            dim: self.dim,
            quad_order: self.quad_order,
            samples: self.samples,
            seed: self.seed,
            tail_tol: self.tail_tol,
            grid: GridSpec::new(self.half_width, self.points)?,
        })
    }
}

#[derive(Serialize)]
struct FidelityRow {
    state: String,
    gamma: f64,
    fidelity: f64,
    method: gaussfid::Method,
    error_estimate: f64,
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Fidelity { state, gamma, opts, json } => {
            let f = compute::fidelity(&state, gamma, &opts.settings()?)?;
            let mut out = output(&None)?;
            if json {
                let row = FidelityRow {
                    state: state.to_string(),
                    gamma,
                    fidelity: f.value,
                    method: f.method,
                    error_estimate: f.error_estimate,
                };
                json_line(&mut out, &row)?;
            } else {
                writeln!(out, "{} {} {}", sig12(f.value), f.method, sig12(f.error_estimate))?;
            }
            out.flush()?;
        }
        Command::Curve { state, gamma_min, gamma_max, steps, opts, out, json } => {
            let settings = opts.settings()?;
            let ladder = compute::gamma_ladder(gamma_min, gamma_max, steps)?;
            let rows = ladder
                .iter()
                .map(|&g| {
                    compute::fidelity(&state, g, &settings).map(|f| FidelityRow {
                        state: state.to_string(),
                        gamma: g,
                        fidelity: f.value,
                        method: f.method,
                        error_estimate: f.error_estimate,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let mut w = output(&out)?;
            if json {
                json_line(&mut w, &rows)?;
            } else {
                writeln!(w, "gamma,fidelity,method,error_estimate")?;
                for r in &rows {
                    writeln!(w, "{},{},{},{}", sig12(r.gamma), sig12(r.fidelity), r.method, sig12(r.error_estimate))?;
                }
            }
            w.flush()?;
        }
        Command::Verify { suite, state, gamma, trials, seed, quad_order, json } => {
            let args = VerifyArgs { suite, state, gamma, trials, seed, quad_order };
            let reports = verify::run(&args)?;
            let mut out = output(&None)?;
            if json {
                json_line(&mut out, &reports)?;
            } else {
                for r in &reports {
                    let tag = if r.passed() { "PASS" } else { "FAIL" };
                    writeln!(out, "{tag} {} ({} checks, worst/tol {:.2e})", r.suite, r.checks, r.worst_ratio)?;
                    for f in &r.failures {
                        writeln!(out, "    {f}")?;
                    }
                }
            }
            out.flush()?;
            if !reports.iter().all(|r| r.passed()) {
                return Ok(1);
            }
        }
        Command::Channel { state, gamma, opts, out, json } => {
            let rho = compute::channel_output(&state, gamma, &opts.settings()?)?;
            let mut w = output(&out)?;
            if json {
                #[derive(Serialize)]
                struct Dump {
                    state: String,
                    gamma: f64,
                    dim: usize,
                    trace: f64,
                    min_eigenvalue: f64,
                    re: Vec<Vec<f64>>,
                    im: Vec<Vec<f64>>,
                }
                let m = rho.matrix();
                let n = rho.dim();
                let dump = Dump {
                    state: state.to_string(),
                    gamma,
                    dim: n,
                    trace: rho.trace(),
                    min_eigenvalue: rho.min_eigenvalue(),
                    re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
                    im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
                };
                json_line(&mut w, &dump)?;
            } else {
                writeln!(w, "# state={state} gamma={}", sig12(gamma))?;
                writeln!(w, "# trace={}", sig12(rho.trace()))?;
                writeln!(w, "# min_eigenvalue={}", sig12(rho.min_eigenvalue()))?;
                writeln!(w, "row,col,re,im")?;
                let m = rho.matrix();
                for i in 0..rho.dim() {
                    for j in 0..rho.dim() {
                        writeln!(w, "{i},{j},{},{}", sig12(m[(i, j)].re), sig12(m[(i, j)].im))?;
                    }
                }
            }
            w.flush()?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
