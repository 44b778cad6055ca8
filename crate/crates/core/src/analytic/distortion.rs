//! Scheme B distortion as an explicit quadratic in the linear coefficient.
//!
//! With `λ = (1 - Γ A)(T_i - T̂_i) - Γ B_c (T_ic - T̂_ic)` the error is
//!
//! ```text
//! S_i - Ŝ_i = λ + (1 - Γ B_t) R_i - Γ C_n N_i - Γ W_i
//! A = α_i + c β_ic ρ,  B_t = β_i + c β_ic ρ,  B_c = c (α_ic - β_ic),  C_n = c β_ic
//! ```
//!
//! Squaring gives six terms that only involve `E[λ²]`, `E[R (T - T̂)]` and
//! known variances, plus two cross terms `E[λ N_i]` and `E[λ W_i]` that do
//! not vanish because decoding errors depend on the innovation and noise.

use crate::analytic::pmf::{joint_pmf, JointPmfTable};
use crate::codec::EncoderParams;
use crate::error::{Error, Result};
use crate::model::{quantizer_moments, ChannelModel, QuantizerMoments, QuantizerSpec, User};
use crate::numerics::quadrature::QuadratureRule;

/// Which terms of the squared error expansion enter the reported distortion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistortionModel {
    /// All eight terms; equals `E[(S_i - Ŝ_i)²]` up to numerical error.
    #[default]
    Exact,
    /// The six terms without the `E[λ N]` and `E[λ W]` cross terms.
    SixTerm,
}

/// `c0 + c1 Γ + c2 Γ²`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quadratic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Quadratic {
    pub fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Self { c0, c1, c2 }
    }

    #[inline]
    pub fn eval(&self, g: f64) -> f64 {
        self.c0 + g * (self.c1 + g * self.c2)
    }

    /// Stationary point `-c1 / (2 c2)`; an error unless `c2 > 0`.
    pub fn argmin(&self) -> Result<f64> {
        if !(self.c2 > 0.0) {
            return Err(Error::NonConvex(self.c2));
        }
        Ok(-self.c1 / (2.0 * self.c2))
    }
}

impl std::ops::Add for Quadratic {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)
    }
}

/// Sums over the joint table that the distortion needs, with
/// `e1 = t_k - t_l`, `e2 = t_m - t_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentBundle {
    /// `E[R_i T_i]` from the quantizer moments.
    pub e_r_t_i: f64,
    /// `E[R_i T_ic]` as a sum of cell integrals.
    pub e_r_t_ic: f64,
    pub e_r_that_i: f64,
    pub e_r_that_ic: f64,
    pub e_e1e1: f64,
    pub e_e1e2: f64,
    pub e_e2e2: f64,
    pub e_n_e1: f64,
    pub e_n_e2: f64,
    pub e_w_e1: f64,
    pub e_w_e2: f64,
    pub total_prob: f64,
}

impl MomentBundle {
    /// `E[R_i (T_i - T̂_i)]`.
    pub fn e_r_e1(&self) -> f64 {
        self.e_r_t_i - self.e_r_that_i
    }

    /// `E[R_i (T_ic - T̂_ic)]`.
    pub fn e_r_e2(&self) -> f64 {
        self.e_r_t_ic - self.e_r_that_ic
    }
}

pub fn moment_tables(moments: &QuantizerMoments, pmf: &JointPmfTable) -> MomentBundle {
    let d = pmf.delta;
    let mut b = MomentBundle { e_r_t_i: moments.e_r_t, ..Default::default() };
    for c in &pmf.cells {
        b.e_r_t_ic += c.m as f64 * d * c.moment1;
    }
    for e in &pmf.entries {
        let e1 = (e.k - e.l) as f64 * d;
        let e2 = (e.m - e.n) as f64 * d;
        b.e_r_that_i += e.l as f64 * d * e.moment1;
        b.e_r_that_ic += e.n as f64 * d * e.moment1;
        b.e_e1e1 += e1 * e1 * e.prob;
        b.e_e1e2 += e1 * e2 * e.prob;
        b.e_e2e2 += e2 * e2 * e.prob;
        b.e_n_e1 += e1 * e.innovation;
        b.e_n_e2 += e2 * e.innovation;
        b.e_w_e1 += e1 * e.noise;
        b.e_w_e2 += e2 * e.noise;
        b.total_prob += e.prob;
    }
    b
}

/// The eight terms of the expansion, each as a quadratic in `Γ`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DistortionTerms {
    pub lambda_sq: Quadratic,
    pub quantization: Quadratic,
    pub innovation: Quadratic,
    pub noise: Quadratic,
    pub cross_own: Quadratic,
    pub cross_other: Quadratic,
    pub lambda_innovation: Quadratic,
    pub lambda_noise: Quadratic,
}

impl DistortionTerms {
    pub fn six_term(&self) -> Quadratic {
        self.lambda_sq + self.quantization + self.innovation + self.noise + self.cross_own + self.cross_other
    }

    pub fn exact(&self) -> Quadratic {
        self.six_term() + self.lambda_innovation + self.lambda_noise
    }

    pub fn total(&self, model: DistortionModel) -> Quadratic {
        match model {
            DistortionModel::Exact => self.exact(),
            DistortionModel::SixTerm => self.six_term(),
        }
    }

    pub fn evaluate(&self, g: f64) -> DistortionComponents {
        DistortionComponents {
            lambda_sq: self.lambda_sq.eval(g),
            quantization: self.quantization.eval(g),
            innovation: self.innovation.eval(g),
            noise: self.noise.eval(g),
            cross_own: self.cross_own.eval(g),
            cross_other: self.cross_other.eval(g),
            lambda_innovation: self.lambda_innovation.eval(g),
            lambda_noise: self.lambda_noise.eval(g),
        }
    }
}

/// Term values at a fixed `Γ`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DistortionComponents {
    pub lambda_sq: f64,
    pub quantization: f64,
    pub innovation: f64,
    pub noise: f64,
    pub cross_own: f64,
    pub cross_other: f64,
    pub lambda_innovation: f64,
    pub lambda_noise: f64,
}

impl DistortionComponents {
    pub fn six_term(&self) -> f64 {
        self.lambda_sq + self.quantization + self.innovation + self.noise + self.cross_own + self.cross_other
    }

    pub fn total(&self, model: DistortionModel) -> f64 {
        match model {
            DistortionModel::Exact => self.six_term() + self.lambda_innovation + self.lambda_noise,
            DistortionModel::SixTerm => self.six_term(),
        }
    }
}

/// Quadratic coefficients of every term for receiver `user`.
pub fn distortion_terms(
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    rho: f64,
    moments: &QuantizerMoments,
    b: &MomentBundle,
) -> DistortionTerms {
    let g = ch.gain_into(user);
    let other = user.other();
    let a = params.alpha(user) + g * params.beta(other) * rho;
    let bt = params.beta(user) + g * params.beta(other) * rho;
    let bc = g * params.delta_coeff(other);
    let cn = g * params.beta(other);
    let sr = moments.sigma_r_sq;
    let sn = 1.0 - rho * rho;
    let sw = ch.sigma_w_sq;

    // λ = e1 - Γ h with h = A e1 + B_c e2.
    let s_eh = a * b.e_e1e1 + bc * b.e_e1e2;
    let s_hh = a * a * b.e_e1e1 + 2.0 * a * bc * b.e_e1e2 + bc * bc * b.e_e2e2;
    let n_h = a * b.e_n_e1 + bc * b.e_n_e2;
    let w_h = a * b.e_w_e1 + bc * b.e_w_e2;
    let r1 = b.e_r_e1();
    let r2 = b.e_r_e2();

    DistortionTerms {
        lambda_sq: Quadratic::new(b.e_e1e1, -2.0 * s_eh, s_hh),
        quantization: Quadratic::new(sr, -2.0 * bt * sr, bt * bt * sr),
        innovation: Quadratic::new(0.0, 0.0, cn * cn * sn),
        noise: Quadratic::new(0.0, 0.0, sw),
        // 2 (1 - Γ B_t)(1 - Γ A) E[R e1]
        cross_own: Quadratic::new(2.0 * r1, -2.0 * (a + bt) * r1, 2.0 * a * bt * r1),
        // -2 (1 - Γ B_t) Γ B_c E[R e2]
        cross_other: Quadratic::new(0.0, -2.0 * bc * r2, 2.0 * bc * bt * r2),
        // -2 Γ C_n E[λ N]
        lambda_innovation: Quadratic::new(0.0, -2.0 * cn * b.e_n_e1, 2.0 * cn * n_h),
        // -2 Γ E[λ W]
        lambda_noise: Quadratic::new(0.0, -2.0 * b.e_w_e1, 2.0 * w_h),
    }
}

/// Distortion of one receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserDistortion {
    pub gamma: f64,
    pub d: f64,
    pub components: DistortionComponents,
    pub terms: DistortionTerms,
    pub moments: MomentBundle,
}

/// Everything needed to evaluate one receiver; built once, evaluated at any
/// `Γ`.
#[derive(Clone, Debug)]
pub struct UserAnalysis {
    pub pmf: JointPmfTable,
    pub moments: MomentBundle,
    pub terms: DistortionTerms,
}

impl UserAnalysis {
    pub fn new(
        user: User,
        params: &EncoderParams,
        ch: &ChannelModel,
        q: &QuantizerSpec,
        rho: f64,
        rule: &QuadratureRule,
    ) -> Result<Self> {
        let qm = quantizer_moments(q);
        let pmf = joint_pmf(user, params, ch, q, rho, rule)?;
        let moments = moment_tables(&qm, &pmf);
        let terms = distortion_terms(user, params, ch, rho, &qm, &moments);
        Ok(Self { pmf, moments, terms })
    }

    /// Evaluates at `gamma`, or at the minimiser of the selected model.
    pub fn evaluate(&self, gamma: Option<f64>, model: DistortionModel) -> Result<UserDistortion> {
        let quad = self.terms.total(model);
        let g = match gamma {
            Some(g) => g,
            None => quad.argmin()?,
        };
        if !(quad.c2 > 0.0) {
            return Err(Error::NonConvex(quad.c2));
        }
        let components = self.terms.evaluate(g);
        Ok(UserDistortion {
            gamma: g,
            d: components.total(model),
            components,
            terms: self.terms,
            moments: self.moments,
        })
    }
}

/// Analytic distortion of receiver `user` at `gamma` (or the optimum).
#[allow(clippy::too_many_arguments)]
pub fn analytic_distortion(
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    q: &QuantizerSpec,
    rho: f64,
    rule: &QuadratureRule,
    gamma: Option<f64>,
    model: DistortionModel,
) -> Result<UserDistortion> {
    UserAnalysis::new(user, params, ch, q, rho, rule)?.evaluate(gamma, model)
}

/// Both receivers plus the averaged figures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionReport {
    pub d1: f64,
    pub d2: f64,
    pub d_avg: f64,
    pub sdr_db: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub components: [DistortionComponents; 2],
}

impl DistortionReport {
    pub fn from_users(u1: &UserDistortion, u2: &UserDistortion) -> Self {
        let d_avg = (u1.d + u2.d) / 2.0;
        Self {
            d1: u1.d,
            d2: u2.d,
            d_avg,
            sdr_db: sdr_db(d_avg),
            gamma_1: u1.gamma,
            gamma_2: u2.gamma,
            components: [u1.components, u2.components],
        }
    }
}

/// `10 log10(1 / D)` for a unit-variance source.
pub fn sdr_db(d: f64) -> f64 {
    -10.0 * d.log10()
}

/// Γ-optimal report for both receivers. A symmetric configuration is
/// evaluated once and mirrored.
pub fn scheme_b_report(
    params: &EncoderParams,
    ch: &ChannelModel,
    q: &QuantizerSpec,
    rho: f64,
    rule: &QuadratureRule,
    model: DistortionModel,
) -> Result<DistortionReport> {
    let symmetric = ch.is_symmetric()
        && params.delta_coeff_1 == params.delta_coeff_2
        && params.beta_1 == params.beta_2;
    let u1 = analytic_distortion(User::One, params, ch, q, rho, rule, None, model)?;
    let u2 = if symmetric {
        u1
    } else {
        analytic_distortion(User::Two, params, ch, q, rho, rule, None, model)?
    };
    Ok(DistortionReport::from_users(&u1, &u2))
}
