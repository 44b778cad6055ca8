//! Source, channel and quantizer.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::normal::{normal_mass, normal_pdf};

/// One of the two transmitter/receiver pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum User {
    One,
    Two,
}

impl User {
    pub const BOTH: [User; 2] = [User::One, User::Two];

    /// The interfering user `i^c`.
    pub fn other(self) -> User {
        match self {
            User::One => User::Two,
            User::Two => User::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            User::One => 0,
            User::Two => 1,
        }
    }
}

/// Zero-mean bivariate Gaussian source with unit marginals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceModel {
    pub rho: f64,
    /// Conditional variance `1 - ρ²` of `S_ic` given `S_i`.
    pub sigma_n_sq: f64,
}

impl SourceModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("|rho| must be < 1, got {rho}")));
        }
        Ok(Self { rho, sigma_n_sq: 1.0 - rho * rho })
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n_sq.sqrt()
    }
}

/// Two-user Gaussian interference channel
/// `Y_i = X_i + c_{i^c} X_{i^c} + W_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelModel {
    pub c1: f64,
    pub c2: f64,
    pub sigma_w_sq: f64,
}

impl ChannelModel {
    pub fn new(c1: f64, c2: f64, sigma_w_sq: f64) -> Result<Self> {
        if !(sigma_w_sq > 0.0) || !sigma_w_sq.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {sigma_w_sq}"
            )));
        }
        if !(c1 >= 0.0 && c2 >= 0.0) || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interference gains must be finite and >= 0, got ({c1}, {c2})"
            )));
        }
        Ok(Self { c1, c2, sigma_w_sq })
    }

    pub fn symmetric(c: f64, sigma_w_sq: f64) -> Result<Self> {
        Self::new(c, c, sigma_w_sq)
    }

    /// Symmetric channel whose noise gives the requested CSNR for per-user
    /// power `power`: `σ_W² = P · 10^(-CSNR/10)`.
    pub fn from_csnr(c: f64, power: f64, csnr_db: f64) -> Result<Self> {
        Self::symmetric(c, noise_variance(power, csnr_db))
    }

    /// Gain applied to the interferer at the receiver of `user`.
    pub fn gain_into(&self, user: User) -> f64 {
        match user {
            User::One => self.c2,
            User::Two => self.c1,
        }
    }

    pub fn sigma_w(&self) -> f64 {
        self.sigma_w_sq.sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        self.c1 == self.c2
    }
}

/// `P · 10^(-CSNR/10)`.
pub fn noise_variance(power: f64, csnr_db: f64) -> f64 {
    power * 10f64.powf(-csnr_db / 10.0)
}

/// Midtread uniform quantizer with levels `kΔ`, `|k| <= k_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerSpec {
    pub delta: f64,
    pub k_max: i32,
    /// Neighbour radius `M` of the digital search window.
    pub m: i32,
}

/// `ceil(6/Δ - 1/2)`, never negative.
pub fn k_max_for(delta: f64) -> i32 {
    ((6.0 / delta - 0.5).ceil()).max(0.0) as i32
}

impl QuantizerSpec {
    /// Builds the quantizer with the default index bound and the radius `M`
    /// implied by `rho`.
    pub fn new(delta: f64, rho: f64) -> Result<Self> {
        Self::with_k_max(delta, k_max_for(delta), rho)
    }

    pub fn with_k_max(delta: f64, k_max: i32, rho: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("step must be positive, got {delta}")));
        }
        if k_max < 0 {
            return Err(Error::InvalidParameter(format!("k_max must be >= 0, got {k_max}")));
        }
        if !(rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("|rho| must be < 1, got {rho}")));
        }
        let mut q = Self { delta, k_max, m: 0 };
        q.m = max_quantizer_distance(rho, &q);
        Ok(q)
    }

    #[inline]
    pub fn level(&self, k: i32) -> f64 {
        k as f64 * self.delta
    }

    /// Index of the nearest level, clamped to `±k_max`.
    #[inline]
    pub fn index(&self, s: f64) -> i32 {
        let k = (s / self.delta).round();
        let km = self.k_max as f64;
        k.clamp(-km, km) as i32
    }

    /// Decision interval of index `k`; the outermost cells are unbounded.
    pub fn cell(&self, k: i32) -> (f64, f64) {
        let lo = if k <= -self.k_max { f64::NEG_INFINITY } else { (k as f64 - 0.5) * self.delta };
        let hi = if k >= self.k_max { f64::INFINITY } else { (k as f64 + 0.5) * self.delta };
        (lo, hi)
    }

    /// `P(Q(S) = t_k)` for standard normal `S`.
    pub fn cell_mass(&self, k: i32) -> f64 {
        let (lo, hi) = self.cell(k);
        normal_mass(lo, hi)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        -self.k_max..=self.k_max
    }
}

/// Reconstruction level of `s`.
#[inline]
pub fn quantize(s: f64, q: &QuantizerSpec) -> f64 {
    q.level(q.index(s))
}

/// Moments of the quantizer output for a standard normal input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerMoments {
    pub e_t_s: f64,
    pub e_t_sq: f64,
    pub sigma_r_sq: f64,
    pub e_r_t: f64,
}

/// Closed-form `E[TS]` and `E[T²]`.
pub fn quantizer_moments(q: &QuantizerSpec) -> QuantizerMoments {
    // E[T S] = Σ_k t_k (φ(lo_k) - φ(hi_k)) telescopes to Δ Σ φ at the inner
    // decision thresholds.
    let mut e_t_s = 0.0;
    for j in (-q.k_max + 1)..=q.k_max {
        e_t_s += q.delta * normal_pdf((j as f64 - 0.5) * q.delta);
    }
    let mut e_t_sq = 0.0;
    for k in q.indices() {
        let t = q.level(k);
        e_t_sq += t * t * q.cell_mass(k);
    }
    QuantizerMoments {
        e_t_s,
        e_t_sq,
        sigma_r_sq: 1.0 - 2.0 * e_t_s + e_t_sq,
        e_r_t: e_t_s - e_t_sq,
    }
}

/// Radius `M` such that `|T_ic - T_i| <= MΔ` with high probability:
/// `ceil((3√(1-ρ²) + (k_max - 1/2)Δ(1-ρ)) / Δ)`.
pub fn max_quantizer_distance(rho: f64, q: &QuantizerSpec) -> i32 {
    let span = (q.k_max as f64 - 0.5) * q.delta;
    let reach = 3.0 * (1.0 - rho * rho).sqrt() + span - rho * span;
    // Shave off rounding noise so exact integers are not bumped up.
    ((reach / q.delta - 1e-12).ceil()).max(0.0) as i32
}

/// One draw of `(S_1, S_2)` built as `S_2 = ρ S_1 + √(1-ρ²) N`.
pub fn sample_source_pair<R: Rng + ?Sized>(model: &SourceModel, rng: &mut R) -> (f64, f64) {
    let s1: f64 = rng.sample(StandardNormal);
    let n: f64 = rng.sample(StandardNormal);
    (s1, model.rho * s1 + model.sigma_n() * n)
}

/// `x_i + c_{i^c} x_ic + w` with an explicit noise sample.
#[inline]
pub fn channel_output_with_noise(user: User, x_i: f64, x_ic: f64, ch: &ChannelModel, w: f64) -> f64 {
    x_i + ch.gain_into(user) * x_ic + w
}

/// `x_i + c_{i^c} x_ic + W_i` with fresh noise.
pub fn channel_output<R: Rng + ?Sized>(
    user: User,
    x_i: f64,
    x_ic: f64,
    ch: &ChannelModel,
    rng: &mut R,
) -> f64 {
    let w: f64 = rng.sample(StandardNormal);
    channel_output_with_noise(user, x_i, x_ic, ch, ch.sigma_w() * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(delta: f64, k_max: i32) -> QuantizerSpec {
        QuantizerSpec::with_k_max(delta, k_max, 0.0).unwrap()
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.0, &QuantizerSpec::new(1.0, 0.0).unwrap()), 0.0);
        assert_eq!(quantize(0.74, &QuantizerSpec::new(0.5, 0.0).unwrap()), 0.5);
        assert_eq!(quantize(100.0, &spec(1.0, 6)), 6.0);
        assert_eq!(quantize(-100.0, &spec(1.0, 6)), -6.0);
    }

    #[test]
    fn k_max_rule() {
        assert_eq!(k_max_for(1.0), 6);
        assert_eq!(k_max_for(0.5), 12);
        assert_eq!(k_max_for(100.0), 0);
        for d in [0.3, 0.7, 1.3, 2.9] {
            assert!((k_max_for(d) as f64 + 0.5) * d >= 6.0);
        }
    }

    #[test]
    fn neighbour_radius_examples() {
        assert_eq!(max_quantizer_distance(0.0, &spec(1.0, 6)), 9);
        assert_eq!(max_quantizer_distance(0.99, &spec(1.0, 6)), 1);
        assert!(max_quantizer_distance(0.5, &spec(1.0, 6)) >= max_quantizer_distance(0.9, &spec(1.0, 6)));
        assert_eq!(QuantizerSpec::new(1.0, 0.0).unwrap().m, 9);
    }

    #[test]
    fn coarse_and_fine_limits() {
        let m = quantizer_moments(&QuantizerSpec::new(100.0, 0.0).unwrap());
        assert!(m.e_t_s.abs() < 1e-12 && m.e_t_sq.abs() < 1e-12);
        assert!((m.sigma_r_sq - 1.0).abs() < 1e-12);
        let m = quantizer_moments(&QuantizerSpec::new(0.01, 0.0).unwrap());
        assert!((m.e_t_s - 1.0).abs() < 1e-3);
        assert!((m.e_t_sq - 1.0).abs() < 1e-3);
        assert!(m.sigma_r_sq.abs() < 1e-3);
    }

    #[test]
    fn moments_match_direct_cell_sums() {
        // Independent route: E[TS] = Σ t_k (φ(lo) - φ(hi)) cell by cell.
        for delta in [0.3, 0.5, 1.0, 2.0, 2.7] {
            let q = QuantizerSpec::new(delta, 0.0).unwrap();
            let m = quantizer_moments(&q);
            let mut ets = 0.0;
            for k in q.indices() {
                let (lo, hi) = q.cell(k);
                ets += q.level(k) * (normal_pdf(lo) - normal_pdf(hi));
            }
            assert!((m.e_t_s - ets).abs() < 1e-14, "delta={delta}");
            assert_eq!(m.e_r_t, m.e_t_s - m.e_t_sq);
        }
    }

    #[test]
    fn cell_masses_sum_to_one() {
        for delta in [0.3, 1.0, 2.5] {
            let q = QuantizerSpec::new(delta, 0.0).unwrap();
            let total: f64 = q.indices().map(|k| q.cell_mass(k)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SourceModel::new(1.0).is_err());
        assert!(ChannelModel::new(1.0, 1.0, 0.0).is_err());
        assert!(QuantizerSpec::new(0.0, 0.0).is_err());
        assert!(QuantizerSpec::new(1.0, 1.0).is_err());
    }

    #[test]
    fn channel_arithmetic() {
        let ch = ChannelModel::symmetric(0.5, 1.0).unwrap();
        assert_eq!(channel_output_with_noise(User::One, 1.0, 2.0, &ch, 0.0), 2.0);
        let asym = ChannelModel::new(0.5, 3.0, 1.0).unwrap();
        assert_eq!(asym.gain_into(User::One), 3.0);
        assert_eq!(asym.gain_into(User::Two), 0.5);
        assert!((noise_variance(1.0, 10.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn noiseless_limit() {
        let ch = ChannelModel::symmetric(0.7, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = channel_output(User::Two, 0.4, -1.1, &ch, &mut rng);
        assert!((y - (0.4 - 0.7 * 1.1)).abs() < 1e-5);
    }

    #[test]
    fn sampler_is_deterministic() {
        let src = SourceModel::new(0.9).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            assert_eq!(sample_source_pair(&src, &mut a), sample_source_pair(&src, &mut b));
        }
    }
}
