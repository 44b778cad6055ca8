//! Parameter sweeps and CSV output.

use std::io::Write;
use std::path::Path;

use crate::analytic::sdr_db;
use crate::error::{Error, Result};
use crate::model::{ChannelModel, SourceModel, User};
use crate::numerics::QuadratureRule;
use crate::optimizer::{optimize_scheme_b, OptimizationResult};
use crate::sim::config::ExperimentConfig;
use crate::sim::montecarlo::{simulate_scheme_a, simulate_scheme_b, McResult};
use crate::sim::rng::splitmix64;
use crate::sim::Scheme;

pub const CSV_HEADER: &str =
    "scheme,rho,c,csnr_db,sdr_db,d_avg,d1,d2,delta,digital_gain,beta,gamma1,gamma2,trials,stderr_d";

/// One output line. Fields that do not apply to a scheme are NaN; analytic
/// rows carry `trials = 0` and `stderr_d = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub rho: f64,
    pub c: f64,
    pub csnr_db: f64,
    pub sdr_db: f64,
    pub d_avg: f64,
    pub d1: f64,
    pub d2: f64,
    pub delta: f64,
    pub digital_gain: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub trials: u64,
    pub stderr_d: f64,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let f = |x: f64| format!("{x:.16e}");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            f(self.rho),
            f(self.c),
            f(self.csnr_db),
            f(self.sdr_db),
            f(self.d_avg),
            f(self.d1),
            f(self.d2),
            f(self.delta),
            f(self.digital_gain),
            f(self.beta),
            f(self.gamma1),
            f(self.gamma2),
            self.trials,
            f(self.stderr_d)
        )
    }
}

/// Per-user LMMSE distortion of uncoded transmission at power `p`.
pub fn uncoded_user_distortion(user: User, rho: f64, ch: &ChannelModel, p: f64) -> f64 {
    let g = ch.gain_into(user);
    let s = 1.0 + g * rho;
    1.0 - p * s * s / (p * (1.0 + g * g + 2.0 * g * rho) + ch.sigma_w_sq)
}

fn mc_row(scheme: Scheme, point: (f64, f64, f64), opt: &OptimizationResult, mc: &McResult, gammas: bool) -> SweepRow {
    let (rho, c, csnr_db) = point;
    let nan = f64::NAN;
    SweepRow {
        scheme,
        rho,
        c,
        csnr_db,
        sdr_db: sdr_db(mc.d_avg),
        d_avg: mc.d_avg,
        d1: mc.d1,
        d2: mc.d2,
        delta: opt.setup.q.delta,
        digital_gain: opt.setup.params.delta_coeff_1,
        beta: opt.setup.params.beta_1,
        gamma1: if gammas { opt.setup.gammas[0] } else { nan },
        gamma2: if gammas { opt.setup.gammas[1] } else { nan },
        trials: mc.trials,
        stderr_d: mc.stderr_d,
    }
}

/// Runs every `(rho, c, csnr, scheme)` combination in config order. The
/// optimizer runs once per point and is shared by all HDA schemes.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let rule = QuadratureRule::gauss_legendre(cfg.quadrature_order)?;
    let needs_opt = cfg.schemes.iter().any(|s| *s != Scheme::Uncoded);
    let mut rows = Vec::new();
    let mut index = 0u64;
    for &rho in &cfg.rho {
        let source = SourceModel::new(rho)?;
        for &c in &cfg.c {
            for &csnr in &cfg.csnr_db {
                let ch = ChannelModel::from_csnr(c, cfg.power, csnr)?;
                let point = (rho, c, csnr);
                let opt = if needs_opt { Some(optimize_scheme_b(&cfg.search, rho, &ch, &rule)?) } else { None };
                for &scheme in &cfg.schemes {
                    let seed = splitmix64(cfg.seed.wrapping_add(index));
                    index += 1;
                    let row = match (scheme, &opt) {
                        (Scheme::Uncoded, _) => {
                            let d1 = uncoded_user_distortion(User::One, rho, &ch, cfg.power);
                            let d2 = uncoded_user_distortion(User::Two, rho, &ch, cfg.power);
                            let d_avg = 0.5 * (d1 + d2);
                            SweepRow {
                                scheme,
                                rho,
                                c,
                                csnr_db: csnr,
                                sdr_db: sdr_db(d_avg),
                                d_avg,
                                d1,
                                d2,
                                delta: f64::NAN,
                                digital_gain: f64::NAN,
                                beta: f64::NAN,
                                gamma1: f64::NAN,
                                gamma2: f64::NAN,
                                trials: 0,
                                stderr_d: 0.0,
                            }
                        }
                        (Scheme::SchemeBAnalytic, Some(o)) => SweepRow {
                            scheme,
                            rho,
                            c,
                            csnr_db: csnr,
                            sdr_db: o.report.sdr_db,
                            d_avg: o.report.d_avg,
                            d1: o.report.d1,
                            d2: o.report.d2,
                            delta: o.setup.q.delta,
                            digital_gain: o.setup.params.delta_coeff_1,
                            beta: o.setup.params.beta_1,
                            gamma1: o.report.gamma_1,
                            gamma2: o.report.gamma_2,
                            trials: 0,
                            stderr_d: 0.0,
                        },
                        (Scheme::SchemeB, Some(o)) => {
                            let mc = simulate_scheme_b(&source, &ch, &o.setup, cfg.trials_for(scheme), seed)?;
                            mc_row(scheme, point, o, &mc, true)
                        }
                        (Scheme::SchemeA, Some(o)) => {
                            let mc = simulate_scheme_a(&source, &ch, &o.setup, cfg.trials_for(scheme), seed)?;
                            mc_row(scheme, point, o, &mc, false)
                        }
                        _ => unreachable!("optimizer runs whenever an HDA scheme is requested"),
                    };
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    w.flush()
}

pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io)?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(io)
}
