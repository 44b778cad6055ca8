//! Grid search over the symmetric encoder parameters, and the uncoded
//! baseline.

use rayon::prelude::*;

use crate::analytic::{scheme_b_report, sdr_db, DistortionModel, DistortionReport};
use crate::codec::{solve_beta_for_power, EncoderParams};
use crate::error::{Error, Result};
use crate::model::{quantizer_moments, ChannelModel, QuantizerSpec, User};
use crate::numerics::QuadratureRule;
use crate::sim::rng::with_workers;
use crate::sim::HdaSetup;

/// Candidate quantizer steps and digital gains, shared by both users.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    pub delta_grid: Vec<f64>,
    pub digital_gain_grid: Vec<f64>,
    /// Per-user power `P`.
    pub power: f64,
    /// Number of zoom-in passes around the incumbent.
    pub refinement: usize,
    /// Points per axis in each zoom-in pass.
    pub refine_points: (usize, usize),
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl SearchSpace {
    /// Δ log-spaced on [0.3, 3] (28 points), δ on [0, 3√P] (31 points), two
    /// zoom-in passes.
    pub fn default_for(power: f64) -> Self {
        Self {
            delta_grid: log_grid(0.3, 3.0, 28),
            digital_gain_grid: lin_grid(0.0, 3.0 * power.sqrt(), 31),
            power,
            refinement: 2,
            refine_points: (9, 9),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_grid.is_empty() || self.digital_gain_grid.is_empty() {
            return Err(Error::InvalidParameter("search grids must be nonempty".into()));
        }
        if let Some(d) = self.delta_grid.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter(format!("quantizer step must be positive, got {d}")));
        }
        if let Some(d) = self.digital_gain_grid.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter(format!("digital gain must be finite, got {d}")));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidParameter(format!("power must be positive, got {}", self.power)));
        }
        if self.refinement > 0 && (self.refine_points.0 == 0 || self.refine_points.1 == 0) {
            return Err(Error::InvalidParameter("refinement needs at least one point per axis".into()));
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub delta: f64,
    pub digital_gain: f64,
    pub beta: f64,
    pub d_avg: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub setup: HdaSetup,
    pub report: DistortionReport,
    pub trace: Vec<TracePoint>,
}

/// Builds the symmetric encoder for `(Δ, δ)` at power `power`, and its
/// Γ-optimal analytic report.
pub fn evaluate_point(
    delta: f64,
    digital_gain: f64,
    power: f64,
    rho: f64,
    ch: &ChannelModel,
    rule: &QuadratureRule,
) -> Result<(HdaSetup, DistortionReport)> {
    let q = QuantizerSpec::new(delta, rho)?;
    let beta = solve_beta_for_power(power, digital_gain, &quantizer_moments(&q))?;
    let params = EncoderParams::symmetric(digital_gain, beta);
    let report = scheme_b_report(&params, ch, &q, rho, rule, DistortionModel::Exact)?;
    Ok((HdaSetup { params, q, gammas: [report.gamma_1, report.gamma_2] }, report))
}

fn skippable(e: &Error) -> bool {
    matches!(e, Error::InfeasiblePower { .. } | Error::NonConvex(_))
}

type Evaluated = (TracePoint, HdaSetup, DistortionReport);

fn evaluate_grid(
    points: &[(f64, f64)],
    power: f64,
    rho: f64,
    ch: &ChannelModel,
    rule: &QuadratureRule,
) -> Result<Vec<Evaluated>> {
    let results: Vec<Result<Option<Evaluated>>> = with_workers(|| {
        points
            .par_iter()
            .map(|&(delta, dg)| match evaluate_point(delta, dg, power, rho, ch, rule) {
                Ok((setup, report)) => Ok(Some((
                    TracePoint { delta, digital_gain: dg, beta: setup.params.beta_1, d_avg: report.d_avg },
                    setup,
                    report,
                ))),
                Err(e) if skippable(&e) => Ok(None),
                Err(e) => Err(e),
            })
            .collect()
    });
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        if let Some(v) = r? {
            out.push(v);
        }
    }
    Ok(out)
}

/// Minimises the average analytic distortion of Scheme B over the grid,
/// then zooms in around the incumbent `refinement` times, shrinking the span
/// fourfold per pass.
pub fn optimize_scheme_b(
    space: &SearchSpace,
    rho: f64,
    ch: &ChannelModel,
    rule: &QuadratureRule,
) -> Result<OptimizationResult> {
    space.validate()?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for &d in &space.delta_grid {
        for &g in &space.digital_gain_grid {
            points.push((d, g));
        }
    }
    let mut trace = Vec::new();
    let mut best: Option<(HdaSetup, DistortionReport)> = None;
    let mut absorb = |evaluated: Vec<Evaluated>, trace: &mut Vec<TracePoint>| {
        for (tp, setup, report) in evaluated {
            if best.as_ref().is_none_or(|b| report.d_avg < b.1.d_avg) {
                best = Some((setup, report));
            }
            trace.push(tp);
        }
        best
    };
    let mut incumbent = absorb(evaluate_grid(&points, space.power, rho, ch, rule)?, &mut trace);

    let log_span = {
        let (lo, hi) = min_max(&space.delta_grid);
        (hi / lo).ln()
    };
    let gain_span = {
        let (lo, hi) = min_max(&space.digital_gain_grid);
        hi - lo
    };
    let gain_floor = min_max(&space.digital_gain_grid).0.min(0.0);
    for pass in 1..=space.refinement {
        let Some((setup, _)) = incumbent else { break };
        let shrink = 4f64.powi(pass as i32);
        let half_log = 0.5 * log_span / shrink;
        let half_gain = 0.5 * gain_span / shrink;
        let d0 = setup.q.delta;
        let g0 = setup.params.delta_coeff_1;
        let deltas = if half_log > 0.0 {
            log_grid(d0 * (-half_log).exp(), d0 * half_log.exp(), space.refine_points.0)
        } else {
            vec![d0]
        };
        let gains = if half_gain > 0.0 {
            lin_grid((g0 - half_gain).max(gain_floor), g0 + half_gain, space.refine_points.1)
        } else {
            vec![g0]
        };
        let mut pts = Vec::with_capacity(deltas.len() * gains.len());
        for &d in &deltas {
            for &g in &gains {
                pts.push((d, g));
            }
        }
        incumbent = absorb(evaluate_grid(&pts, space.power, rho, ch, rule)?, &mut trace);
    }
    let (setup, report) = incumbent.ok_or(Error::NoFeasiblePoint)?;
    Ok(OptimizationResult { setup, report, trace })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Uncoded transmission at power `p` with LMMSE receivers: `(d_avg, sdr_db)`.
pub fn uncoded_distortion(rho: f64, ch: &ChannelModel, p: f64) -> (f64, f64) {
    let d = |user: User| {
        let g = ch.gain_into(user);
        let s = 1.0 + g * rho;
        1.0 - p * s * s / (p * (1.0 + g * g + 2.0 * g * rho) + ch.sigma_w_sq)
    };
    let d_avg = 0.5 * (d(User::One) + d(User::Two));
    (d_avg, sdr_db(d_avg))
}

/// Smallest grid CSNR (ascending grid) at which optimized Scheme B beats
/// uncoded transmission.
pub fn find_csnr_threshold(
    rho: f64,
    c: f64,
    csnr_grid: &[f64],
    space: &SearchSpace,
    rule: &QuadratureRule,
) -> Result<Option<f64>> {
    if csnr_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("CSNR grid must be ascending".into()));
    }
    for &csnr in csnr_grid {
        let ch = ChannelModel::from_csnr(c, space.power, csnr)?;
        let (d_unc, _) = uncoded_distortion(rho, &ch, space.power);
        let opt = match optimize_scheme_b(space, rho, &ch, rule) {
            Ok(o) => o,
            Err(Error::NoFeasiblePoint) => continue,
            Err(e) => return Err(e),
        };
        if opt.report.d_avg < d_unc * (1.0 - 1e-9) {
            return Ok(Some(csnr));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncoded_point_to_point() {
        let ch = ChannelModel::from_csnr(0.0, 1.0, 10.0).unwrap();
        let (d, sdr) = uncoded_distortion(0.5, &ch, 1.0);
        assert!((d - 1.0 / 11.0).abs() < 1e-15);
        assert!((sdr - 10.0 * 11f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn uncoded_coherent_combining() {
        let ch = ChannelModel::symmetric(1.7, 0.05).unwrap();
        let (d, _) = uncoded_distortion(1.0, &ch, 2.0);
        let want = 1.0 - 2.0 * 2.7 * 2.7 / (2.0 * 2.7 * 2.7 + 0.05);
        assert!((d - want).abs() < 1e-14);
    }

    #[test]
    fn default_grids() {
        let s = SearchSpace::default_for(4.0);
        assert_eq!(s.delta_grid.len(), 28);
        assert!((s.delta_grid[0] - 0.3).abs() < 1e-15 && (s.delta_grid[27] - 3.0).abs() < 1e-14);
        assert_eq!(s.digital_gain_grid.len(), 31);
        assert_eq!(*s.digital_gain_grid.last().unwrap(), 6.0);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn invalid_spaces() {
        let mut s = SearchSpace::default_for(1.0);
        s.delta_grid = vec![];
        assert!(s.validate().is_err());
        let mut s = SearchSpace::default_for(1.0);
        s.delta_grid = vec![0.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn all_infeasible_is_an_error() {
        // δ = 10 cannot fit in unit power at Δ = 3.
        let s = SearchSpace {
            delta_grid: vec![3.0],
            digital_gain_grid: vec![10.0],
            power: 1.0,
            refinement: 0,
            refine_points: (1, 1),
        };
        let ch = ChannelModel::from_csnr(2.0, 1.0, 20.0).unwrap();
        let rule = QuadratureRule::gauss_legendre(8).unwrap();
        assert!(matches!(optimize_scheme_b(&s, 0.9, &ch, &rule), Err(Error::NoFeasiblePoint)));
    }
}
