//! HDA encoder `X_i = δ_i T_i + β_i S_i`.

use crate::error::{Error, Result};
use crate::model::{quantize, QuantizerMoments, QuantizerSpec, User};

/// Digital and analog gains of both users.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncoderParams {
    pub delta_coeff_1: f64,
    pub delta_coeff_2: f64,
    pub beta_1: f64,
    pub beta_2: f64,
}

impl EncoderParams {
    pub fn new(delta_coeff_1: f64, beta_1: f64, delta_coeff_2: f64, beta_2: f64) -> Self {
        Self { delta_coeff_1, delta_coeff_2, beta_1, beta_2 }
    }

    pub fn symmetric(delta_coeff: f64, beta: f64) -> Self {
        Self::new(delta_coeff, beta, delta_coeff, beta)
    }

    pub fn delta_coeff(&self, user: User) -> f64 {
        match user {
            User::One => self.delta_coeff_1,
            User::Two => self.delta_coeff_2,
        }
    }

    pub fn beta(&self, user: User) -> f64 {
        match user {
            User::One => self.beta_1,
            User::Two => self.beta_2,
        }
    }

    /// `α_i = δ_i + β_i`.
    pub fn alpha(&self, user: User) -> f64 {
        self.delta_coeff(user) + self.beta(user)
    }
}

#[inline]
pub fn encode(s_i: f64, user: User, params: &EncoderParams, q: &QuantizerSpec) -> f64 {
    params.delta_coeff(user) * quantize(s_i, q) + params.beta(user) * s_i
}

/// `P_i = δ_i² E[T²] + β_i² + 2 δ_i β_i E[TS]`.
pub fn encoder_power(user: User, params: &EncoderParams, moments: &QuantizerMoments) -> f64 {
    let d = params.delta_coeff(user);
    let b = params.beta(user);
    d * d * moments.e_t_sq + b * b + 2.0 * d * b * moments.e_t_s
}

/// Larger root of `P(β) = target_p` for a fixed digital gain.
pub fn solve_beta_for_power(target_p: f64, delta_coeff: f64, moments: &QuantizerMoments) -> Result<f64> {
    let d = delta_coeff;
    let disc = d * d * moments.e_t_s * moments.e_t_s - d * d * moments.e_t_sq + target_p;
    if disc < 0.0 || !disc.is_finite() {
        return Err(Error::InfeasiblePower {
            required: d * d * (moments.e_t_sq - moments.e_t_s * moments.e_t_s),
            budget: target_p,
        });
    }
    Ok(-d * moments.e_t_s + disc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::quantizer_moments;

    #[test]
    fn encode_examples() {
        let q = QuantizerSpec::new(1.0, 0.0).unwrap();
        assert_eq!(encode(0.3, User::One, &EncoderParams::symmetric(0.0, 1.0), &q), 0.3);
        assert_eq!(encode(0.74, User::One, &EncoderParams::symmetric(1.0, 0.0), &q), 1.0);
        let x = encode(0.74, User::Two, &EncoderParams::symmetric(0.5, 0.5), &q);
        assert!((x - 0.87).abs() < 1e-15);
    }

    #[test]
    fn power_examples() {
        let m = quantizer_moments(&QuantizerSpec::new(1.0, 0.0).unwrap());
        assert_eq!(encoder_power(User::One, &EncoderParams::symmetric(0.0, 1.0), &m), 1.0);
        let coarse = quantizer_moments(&QuantizerSpec::new(100.0, 0.0).unwrap());
        assert!(encoder_power(User::One, &EncoderParams::symmetric(1.0, 0.0), &coarse) < 1e-12);
    }

    #[test]
    fn beta_round_trip() {
        let m = quantizer_moments(&QuantizerSpec::new(1.0, 0.0).unwrap());
        assert_eq!(solve_beta_for_power(2.0, 0.0, &m).unwrap(), 2f64.sqrt());
        let b = solve_beta_for_power(1.0, 1.0, &m).unwrap();
        let p = encoder_power(User::One, &EncoderParams::symmetric(1.0, b), &m);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_budget() {
        let m = quantizer_moments(&QuantizerSpec::new(1.0, 0.0).unwrap());
        let floor = m.e_t_sq - m.e_t_s * m.e_t_s;
        assert!(matches!(
            solve_beta_for_power(0.5 * floor * 9.0, 3.0, &m),
            Err(Error::InfeasiblePower { .. })
        ));
    }
}
