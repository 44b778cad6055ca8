//! Encoder and the two receivers.

pub mod encoder;
pub mod scheme_a;
pub mod scheme_b;

use crate::model::QuantizerSpec;

pub use encoder::{encode, encoder_power, solve_beta_for_power, EncoderParams};
pub use scheme_a::{decode_digital_map, reconstruct_scheme_a, MapDecoder};
pub use scheme_b::{decode_digital_pseudo_ml, reconstruct_scheme_b, Constellation, ConstellationPoint};

/// Decoded digital pair `(T̂_i, T̂_ic)` with its indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DigitalPair {
    pub l: i32,
    pub n: i32,
    pub t_hat_i: f64,
    pub t_hat_ic: f64,
}

impl DigitalPair {
    pub fn new(l: i32, n: i32, q: &QuantizerSpec) -> Self {
        Self { l, n, t_hat_i: q.level(l), t_hat_ic: q.level(n) }
    }
}
