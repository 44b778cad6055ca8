//! Pseudo-ML digital recovery with a linear estimate of the quantization
//! error.

use crate::codec::encoder::EncoderParams;
use crate::codec::DigitalPair;
use crate::model::{ChannelModel, QuantizerSpec, User};

/// Collision tolerance between constellation values.
pub const MERGE_TOL: f64 = 1e-12;

/// A noiseless received value `(α_i l + c α_ic n)Δ` and the index pair that
/// owns it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstellationPoint {
    pub value: f64,
    pub l: i32,
    pub n: i32,
}

/// Preference order among index pairs that produce the same value.
#[inline]
pub(crate) fn pair_key(l: i32, n: i32) -> (i32, i32, i32, i32) {
    (l.abs(), n.abs(), l, n)
}

/// Sorted, collision-merged set of feasible digital points seen by one
/// receiver.
#[derive(Clone, Debug)]
pub struct Constellation {
    points: Vec<ConstellationPoint>,
    symmetric: bool,
}

impl Constellation {
    pub fn new(user: User, params: &EncoderParams, ch: &ChannelModel, q: &QuantizerSpec) -> Self {
        let ai = params.alpha(user) * q.delta;
        let bi = ch.gain_into(user) * params.alpha(user.other()) * q.delta;
        Self::from_coefficients(ai, bi, q)
    }

    /// Points `ai·l + bi·n` over `|l|, |n| <= k_max`, `|n - l| <= M`.
    pub fn from_coefficients(ai: f64, bi: f64, q: &QuantizerSpec) -> Self {
        let k = q.k_max;
        let mut raw = Vec::new();
        for l in -k..=k {
            for n in (l - q.m).max(-k)..=(l + q.m).min(k) {
                raw.push(ConstellationPoint { value: ai * l as f64 + bi * n as f64, l, n });
            }
        }
        raw.sort_by(|a, b| a.value.total_cmp(&b.value).then(pair_key(a.l, a.n).cmp(&pair_key(b.l, b.n))));
        let mut points: Vec<ConstellationPoint> = Vec::with_capacity(raw.len());
        let mut last_raw = f64::NEG_INFINITY;
        for p in raw {
            match points.last_mut() {
                Some(owner) if p.value - last_raw <= MERGE_TOL => {
                    if pair_key(p.l, p.n) < pair_key(owner.l, owner.n) {
                        *owner = p;
                    }
                }
                _ => points.push(p),
            }
            last_raw = p.value;
        }
        let len = points.len();
        let symmetric = (0..len).all(|i| {
            let (a, b) = (points[i], points[len - 1 - i]);
            a.l == -b.l && a.n == -b.n && (a.value + b.value).abs() <= 1e-9
        });
        Self { points, symmetric }
    }

    pub fn points(&self) -> &[ConstellationPoint] {
        &self.points
    }

    /// Whether negating every index pair maps the constellation onto itself
    /// including the collision owners.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Index of the point nearest to `y`, ties to the preferred pair.
    pub fn nearest(&self, y: f64) -> usize {
        let pts = &self.points;
        let j = pts.partition_point(|p| p.value < y);
        if j == 0 {
            return 0;
        }
        if j == pts.len() {
            return pts.len() - 1;
        }
        let below = y - pts[j - 1].value;
        let above = pts[j].value - y;
        if (below - above).abs() <= MERGE_TOL {
            let (a, b) = (pts[j - 1], pts[j]);
            if pair_key(a.l, a.n) <= pair_key(b.l, b.n) { j - 1 } else { j }
        } else if below < above {
            j - 1
        } else {
            j
        }
    }

    pub fn decode(&self, y: f64, q: &QuantizerSpec) -> DigitalPair {
        let p = self.points[self.nearest(y)];
        DigitalPair::new(p.l, p.n, q)
    }

    /// Exhaustive scan over every feasible pair; reference for [`decode`].
    ///
    /// [`decode`]: Constellation::decode
    pub fn decode_exhaustive(ai: f64, bi: f64, y: f64, q: &QuantizerSpec) -> DigitalPair {
        let k = q.k_max;
        let mut best: Option<(f64, i32, i32)> = None;
        for l in -k..=k {
            for n in (l - q.m).max(-k)..=(l + q.m).min(k) {
                let d = (y - ai * l as f64 - bi * n as f64).abs();
                best = match best {
                    None => Some((d, l, n)),
                    Some((bd, bl, bn)) => {
                        if d < bd - MERGE_TOL
                            || ((d - bd).abs() <= MERGE_TOL && pair_key(l, n) < pair_key(bl, bn))
                        {
                            Some((d, l, n))
                        } else {
                            Some((bd, bl, bn))
                        }
                    }
                };
            }
        }
        let (_, l, n) = best.expect("constellation is never empty");
        DigitalPair::new(l, n, q)
    }
}

/// Pseudo-ML pair `argmin |y - α_i t_l - c α_ic t_n|`.
pub fn decode_digital_pseudo_ml(
    y_i: f64,
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    q: &QuantizerSpec,
) -> DigitalPair {
    Constellation::new(user, params, ch, q).decode(y_i, q)
}

/// `t̂_i + Γ_i [y - (α_i + c β_ic ρ) t̂_i - c (α_ic - β_ic) t̂_ic]`.
#[inline]
pub fn reconstruct_scheme_b(
    y_i: f64,
    pair: &DigitalPair,
    gamma_i: f64,
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    rho: f64,
) -> f64 {
    let g = ch.gain_into(user);
    let other = user.other();
    let resid = y_i
        - (params.alpha(user) + g * params.beta(other) * rho) * pair.t_hat_i
        - g * params.delta_coeff(other) * pair.t_hat_ic;
    pair.t_hat_i + gamma_i * resid
}
