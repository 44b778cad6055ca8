use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zdjscc_core::analytic::sdr_db;
use zdjscc_core::model::{k_max_for, quantizer_moments, ChannelModel, QuantizerSpec, SourceModel};
use zdjscc_core::numerics::QuadratureRule;
use zdjscc_core::optimizer::{evaluate_point, optimize_scheme_b, uncoded_distortion, SearchSpace};
use zdjscc_core::sim::config::{DEFAULT_ORDER, DEFAULT_TRIALS, DEFAULT_TRIALS_SCHEME_A};
use zdjscc_core::sim::{
    load_config, run_sweep, simulate_scheme_a, simulate_scheme_b, simulate_uncoded, validate_point, write_csv,
    write_csv_file, Scheme, SweepRow, ValidationPoint,
};
use zdjscc_core::Error;

#[derive(Parser)]
#[command(name = "zdjscc", version, about = "Zero-delay HDA coding over a two-user Gaussian interference channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Random seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials (overrides the config file).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Gauss-Legendre order (overrides the config file).
    #[arg(long, global = true)]
    order: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print quantizer moments.
    Moments {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
    },
    /// Optimize Scheme B and print the parameters and analytic SDR.
    Optimize(Point),
    /// Run a sweep described by a config file and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output path; overrides the config file. `-` writes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Simulate one scheme at one point.
    Simulate {
        #[arg(long)]
        scheme: String,
        #[command(flatten)]
        point: Point,
        /// Quantizer step; with --digital-gain skips the optimizer.
        #[arg(long, requires = "digital_gain")]
        delta: Option<f64>,
        #[arg(long, requires = "delta")]
        digital_gain: Option<f64>,
    },
    /// Cross-check analytic and simulated distortion at one point.
    Validate(Point),
}

#[derive(Args, Clone, Copy)]
struct Point {
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    csnr: f64,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
}

/// Error tagged with the exit code it maps to.
struct Failure {
    code: u8,
    err: Error,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Self { code: if err.is_config() { 2 } else { 1 }, err }
    }
}

fn io_failure(path: &str, source: std::io::Error) -> Failure {
    Failure { code: 1, err: Error::Io { path: path.into(), source } }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn rule(order: Option<usize>) -> Result<QuadratureRule, Failure> {
    Ok(QuadratureRule::gauss_legendre(order.unwrap_or(DEFAULT_ORDER))?)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut out = std::io::stdout().lock();
    let io = |e| io_failure("<stdout>", e);
    match cli.command {
        Command::Moments { delta, rho } => {
            let q = QuantizerSpec::new(delta, rho)?;
            let m = quantizer_moments(&q);
            writeln!(out, "delta = {delta}").map_err(io)?;
            writeln!(out, "k_max = {}", k_max_for(delta)).map_err(io)?;
            writeln!(out, "M = {}", q.m).map_err(io)?;
            writeln!(out, "E[TS] = {:.16e}", m.e_t_s).map_err(io)?;
            writeln!(out, "E[T^2] = {:.16e}", m.e_t_sq).map_err(io)?;
            writeln!(out, "sigma_R^2 = {:.16e}", m.sigma_r_sq).map_err(io)?;
            writeln!(out, "E[RT] = {:.16e}", m.e_r_t).map_err(io)?;
        }
        Command::Optimize(pt) => {
            let ch = ChannelModel::from_csnr(pt.c, pt.power, pt.csnr)?;
            let space = SearchSpace::default_for(pt.power);
            let opt = optimize_scheme_b(&space, pt.rho, &ch, &rule(cli.order)?)?;
            let (_, unc) = uncoded_distortion(pt.rho, &ch, pt.power);
            let s = &opt.setup;
            writeln!(out, "delta = {:.16e}", s.q.delta).map_err(io)?;
            writeln!(out, "digital_gain = {:.16e}", s.params.delta_coeff_1).map_err(io)?;
            writeln!(out, "beta = {:.16e}", s.params.beta_1).map_err(io)?;
            writeln!(out, "gamma1 = {:.16e}", opt.report.gamma_1).map_err(io)?;
            writeln!(out, "gamma2 = {:.16e}", opt.report.gamma_2).map_err(io)?;
            writeln!(out, "d_avg = {:.16e}", opt.report.d_avg).map_err(io)?;
            writeln!(out, "sdr_db = {:.6}", opt.report.sdr_db).map_err(io)?;
            writeln!(out, "uncoded_sdr_db = {unc:.6}").map_err(io)?;
            writeln!(out, "evaluated = {}", opt.trace.len()).map_err(io)?;
        }
        Command::Sweep { config, output } => {
            let mut cfg = load_config(&config).map_err(|err| Failure { code: 2, err })?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = cli.trials {
                if t == 0 {
                    return Err(Error::Config { line: 0, msg: "trials must be >= 1".into() }.into());
                }
                cfg.trials = Some(t);
            }
            if let Some(o) = cli.order {
                cfg.quadrature_order = o;
            }
            let rows = run_sweep(&cfg)?;
            match output.or(cfg.output.clone()) {
                Some(p) if p.as_os_str() != "-" => write_csv_file(&rows, &p)?,
                _ => write_csv(&rows, &mut out).map_err(io)?,
            }
        }
        Command::Simulate { scheme, point: pt, delta, digital_gain } => {
            let scheme: Scheme = scheme.parse()?;
            let seed = cli.seed.unwrap_or(1);
            let trials = cli.trials.unwrap_or(match scheme {
                Scheme::SchemeA => DEFAULT_TRIALS_SCHEME_A,
                _ => DEFAULT_TRIALS,
            });
            let row = simulate_row(scheme, &pt, delta.zip(digital_gain), trials, seed, cli.order)?;
            write_csv(&[row], &mut out).map_err(io)?;
        }
        Command::Validate(pt) => {
            let vp = ValidationPoint {
                rho: pt.rho,
                c: pt.c,
                csnr_db: pt.csnr,
                power: pt.power,
                trials: cli.trials.unwrap_or(DEFAULT_TRIALS),
                seed: cli.seed.unwrap_or(1),
                order: cli.order.unwrap_or(DEFAULT_ORDER),
            };
            let checks = validate_point(&vp, &SearchSpace::default_for(pt.power))?;
            for c in &checks {
                writeln!(out, "{c}").map_err(io)?;
            }
            if checks.iter().any(|c| !c.pass) {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn simulate_row(
    scheme: Scheme,
    pt: &Point,
    manual: Option<(f64, f64)>,
    trials: u64,
    seed: u64,
    order: Option<usize>,
) -> Result<SweepRow, Failure> {
    let ch = ChannelModel::from_csnr(pt.c, pt.power, pt.csnr)?;
    let source = SourceModel::new(pt.rho)?;
    let nan = f64::NAN;
    let mut row = SweepRow {
        scheme,
        rho: pt.rho,
        c: pt.c,
        csnr_db: pt.csnr,
        sdr_db: nan,
        d_avg: nan,
        d1: nan,
        d2: nan,
        delta: nan,
        digital_gain: nan,
        beta: nan,
        gamma1: nan,
        gamma2: nan,
        trials,
        stderr_d: nan,
    };
    if scheme == Scheme::Uncoded {
        let mc = simulate_uncoded(&source, &ch, pt.power, trials, seed)?;
        row.d1 = mc.d1;
        row.d2 = mc.d2;
        row.d_avg = mc.d_avg;
        row.sdr_db = sdr_db(mc.d_avg);
        row.stderr_d = mc.stderr_d;
        return Ok(row);
    }
    let rule = rule(order)?;
    let (setup, report) = match manual {
        Some((delta, dg)) => evaluate_point(delta, dg, pt.power, pt.rho, &ch, &rule)?,
        None => {
            let o = optimize_scheme_b(&SearchSpace::default_for(pt.power), pt.rho, &ch, &rule)?;
            (o.setup, o.report)
        }
    };
    row.delta = setup.q.delta;
    row.digital_gain = setup.params.delta_coeff_1;
    row.beta = setup.params.beta_1;
    let mc = match scheme {
        Scheme::SchemeBAnalytic => {
            row.d1 = report.d1;
            row.d2 = report.d2;
            row.d_avg = report.d_avg;
            row.sdr_db = report.sdr_db;
            row.gamma1 = report.gamma_1;
            row.gamma2 = report.gamma_2;
            row.trials = 0;
            row.stderr_d = 0.0;
            return Ok(row);
        }
        Scheme::SchemeB => {
            row.gamma1 = report.gamma_1;
            row.gamma2 = report.gamma_2;
            simulate_scheme_b(&source, &ch, &setup, trials, seed)?
        }
        _ => simulate_scheme_a(&source, &ch, &setup, trials, seed)?,
    };
    row.d1 = mc.d1;
    row.d2 = mc.d2;
    row.d_avg = mc.d_avg;
    row.sdr_db = sdr_db(mc.d_avg);
    row.stderr_d = mc.stderr_d;
    Ok(row)
}
