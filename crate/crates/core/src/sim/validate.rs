//! Analytic-versus-simulation cross-checks at one operating point.

use crate::analytic::{DistortionModel, UserAnalysis};
use crate::error::Result;
use crate::model::{ChannelModel, SourceModel, User};
use crate::numerics::QuadratureRule;
use crate::optimizer::{optimize_scheme_b, uncoded_distortion, SearchSpace};
use crate::sim::montecarlo::{simulate_scheme_b, simulate_uncoded};

/// Relative tolerance between analytic and simulated Scheme B distortion.
pub const SCHEME_B_REL_TOL: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (tolerance {:.3e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ValidationPoint {
    pub rho: f64,
    pub c: f64,
    pub csnr_db: f64,
    pub power: f64,
    pub trials: u64,
    pub seed: u64,
    pub order: usize,
}

/// Runs the optimizer, then compares Scheme B and uncoded transmission with
/// simulation and checks the stationarity of the linear coefficient.
pub fn validate_point(pt: &ValidationPoint, space: &SearchSpace) -> Result<Vec<Check>> {
    let rule = QuadratureRule::gauss_legendre(pt.order)?;
    let ch = ChannelModel::from_csnr(pt.c, pt.power, pt.csnr_db)?;
    let source = SourceModel::new(pt.rho)?;
    let opt = optimize_scheme_b(space, pt.rho, &ch, &rule)?;
    let mut checks = Vec::new();

    let mc = simulate_scheme_b(&source, &ch, &opt.setup, pt.trials, pt.seed)?;
    let rel = (opt.report.d_avg - mc.d_avg).abs() / mc.d_avg;
    checks.push(Check {
        name: "scheme_b analytic vs simulated (relative)",
        value: rel,
        tolerance: SCHEME_B_REL_TOL,
        pass: rel <= SCHEME_B_REL_TOL,
    });

    let (d_unc, _) = uncoded_distortion(pt.rho, &ch, pt.power);
    let unc = simulate_uncoded(&source, &ch, pt.power, pt.trials, pt.seed.wrapping_add(1))?;
    let z = (unc.d_avg - d_unc).abs() / unc.stderr_d;
    checks.push(Check { name: "uncoded closed form vs simulated (std errors)", value: z, tolerance: 3.0, pass: z <= 3.0 });

    let analysis = UserAnalysis::new(User::One, &opt.setup.params, &ch, &opt.setup.q, pt.rho, &rule)?;
    let quad = analysis.terms.total(DistortionModel::Exact);
    let g = opt.setup.gammas[0];
    let h = 1e-4 * g.abs().max(1e-3);
    let slope = (quad.eval(g + h) - quad.eval(g - h)) / (2.0 * h);
    checks.push(Check { name: "d D / d gamma at optimum", value: slope.abs(), tolerance: 1e-6, pass: slope.abs() <= 1e-6 });
    Ok(checks)
}
