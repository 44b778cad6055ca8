//! MAP digital recovery and conditional-mean reconstruction.
//!
//! With `V = β_i S_i + c β_ic S_ic + W_i` the joint density of the received
//! value and a pair of cells factorises as
//! `f_V(v) · P((S_i, S_ic) ∈ box | V = v)` where
//! `v = y - δ_i t_k - c δ_ic t_k'`. Given `V` the source pair is bivariate
//! normal, so both the score and the reconstruction are closed form.

use crate::codec::encoder::EncoderParams;
use crate::codec::DigitalPair;
use crate::model::{ChannelModel, QuantizerSpec, User};
use crate::numerics::normal::{bvn_rect, normal_mass};
use crate::numerics::truncated::rect_moments;

const BOX_LIMIT: f64 = 10.0;
/// Candidates farther than this many noise deviations from `y` are skipped.
const SUPPORT_MARGIN: f64 = 12.0;
/// Absorbs rounding when comparing a bound with an exact score.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
struct Candidate {
    k: i32,
    kp: i32,
    center: f64,
    cell_i: (f64, f64),
    cell_ic: (f64, f64),
    lo: f64,
    hi: f64,
    /// Range of the least-variance posterior direction over the box.
    proj: (f64, f64),
}

/// Conditional law of `(S_i, S_ic)` given `V = v`.
#[derive(Clone, Copy, Debug)]
struct Posterior {
    slope_i: f64,
    slope_ic: f64,
    sd_i: f64,
    sd_ic: f64,
    r: f64,
    sigma_v: f64,
    /// Unit direction of least posterior variance and its deviation.
    dir: (f64, f64),
    sd_dir: f64,
}

/// Per-receiver MAP decoder; immutable after construction.
#[derive(Clone, Debug)]
pub struct MapDecoder {
    q: QuantizerSpec,
    post: Posterior,
    candidates: Vec<Candidate>,
}

fn clip(c: (f64, f64)) -> (f64, f64) {
    (c.0.max(-BOX_LIMIT), c.1.min(BOX_LIMIT))
}

impl MapDecoder {
    pub fn new(user: User, params: &EncoderParams, ch: &ChannelModel, q: &QuantizerSpec, rho: f64) -> Self {
        let g = ch.gain_into(user);
        let other = user.other();
        let a = params.beta(user);
        let b = g * params.beta(other);
        let s2 = ch.sigma_w_sq;
        let one_m = (1.0 - rho) * (1.0 + rho);
        let var_v = a * a + b * b + 2.0 * a * b * rho + s2;
        let var_i = (b * b * one_m + s2) / var_v;
        let var_ic = (a * a * one_m + s2) / var_v;
        let cov = (rho * s2 - a * b * one_m) / var_v;
        let r = (cov / (var_i * var_ic).sqrt()).clamp(-1.0, 1.0);
        let half_tr = 0.5 * (var_i + var_ic);
        let lam = half_tr - (0.25 * (var_i - var_ic).powi(2) + cov * cov).sqrt();
        let dir = if cov.abs() > 0.0 {
            let (x, z) = (cov, lam - var_i);
            let n = x.hypot(z);
            (x / n, z / n)
        } else if var_i <= var_ic {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let var_dir = dir.0 * dir.0 * var_i + 2.0 * dir.0 * dir.1 * cov + dir.1 * dir.1 * var_ic;
        let post = Posterior {
            slope_i: (a + b * rho) / var_v,
            slope_ic: (a * rho + b) / var_v,
            sd_i: var_i.sqrt(),
            sd_ic: var_ic.sqrt(),
            r,
            sigma_v: var_v.sqrt(),
            dir,
            sd_dir: var_dir.max(0.0).sqrt(),
        };
        let margin = SUPPORT_MARGIN * ch.sigma_w();
        let di = params.delta_coeff(user);
        let dic = g * params.delta_coeff(other);
        let mut candidates = Vec::new();
        for k in q.indices() {
            for kp in (k - q.m).max(-q.k_max)..=(k + q.m).min(q.k_max) {
                let cell_i = clip(q.cell(k));
                let cell_ic = clip(q.cell(kp));
                let ends = [
                    a * cell_i.0 + b * cell_ic.0,
                    a * cell_i.0 + b * cell_ic.1,
                    a * cell_i.1 + b * cell_ic.0,
                    a * cell_i.1 + b * cell_ic.1,
                ];
                let umin = ends.iter().copied().fold(f64::INFINITY, f64::min);
                let umax = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let center = di * q.level(k) + dic * q.level(kp);
                let along = [
                    dir.0 * cell_i.0 + dir.1 * cell_ic.0,
                    dir.0 * cell_i.0 + dir.1 * cell_ic.1,
                    dir.0 * cell_i.1 + dir.1 * cell_ic.0,
                    dir.0 * cell_i.1 + dir.1 * cell_ic.1,
                ];
                let proj = (
                    along.iter().copied().fold(f64::INFINITY, f64::min),
                    along.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                );
                candidates.push(Candidate {
                    k,
                    kp,
                    center,
                    cell_i,
                    cell_ic,
                    lo: center + umin - margin,
                    hi: center + umax + margin,
                    proj,
                });
            }
        }
        Self { q: *q, post, candidates }
    }

    /// Log of `f_V(v) P(box | v)` up to a constant shared by all candidates.
    fn log_score(&self, c: &Candidate, y: f64) -> f64 {
        let p = &self.post;
        let v = y - c.center;
        let mi = p.slope_i * v;
        let mic = p.slope_ic * v;
        let prob = bvn_rect(
            ((c.cell_i.0 - mi) / p.sd_i, (c.cell_i.1 - mi) / p.sd_i),
            ((c.cell_ic.0 - mic) / p.sd_ic, (c.cell_ic.1 - mic) / p.sd_ic),
            p.r,
        );
        if prob <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = v / p.sigma_v;
        -0.5 * z * z + prob.ln()
    }

    /// Joint density `f(y, (t_k, t_k'))` of the received value and the pair.
    pub fn joint_density(&self, y: f64, k: i32, kp: i32) -> f64 {
        self.candidates
            .iter()
            .find(|c| c.k == k && c.kp == kp)
            .map(|c| {
                (self.log_score(c, y)).exp() / (self.post.sigma_v * (2.0 * std::f64::consts::PI).sqrt())
            })
            .unwrap_or(0.0)
    }

    pub fn decode(&self, y: f64) -> DigitalPair {
        let better = |s: f64, c: &Candidate, bs: f64, b: &Candidate| {
            s > bs || (s == bs && (c.k.abs(), c.kp.abs(), c.k, c.kp) < (b.k.abs(), b.kp.abs(), b.k, b.kp))
        };
        // The box probability is at most the mass of any one projection of
        // the box. A Gaussian tail bound on three projections prunes most
        // candidates in a few flops; survivors get the exact projection
        // masses and are scored in decreasing order of the bound until it
        // drops below the incumbent.
        let p = &self.post;
        let gap = |m: f64, range: (f64, f64), sd: f64| {
            let d = (range.0 - m).max(m - range.1).max(0.0) / sd;
            d * d
        };
        let coarse = |c: &Candidate| {
            let v = y - c.center;
            let (mi, mic) = (p.slope_i * v, p.slope_ic * v);
            let mut d2 = gap(mi, c.cell_i, p.sd_i).max(gap(mic, c.cell_ic, p.sd_ic));
            if p.sd_dir > 0.0 {
                d2 = d2.max(gap(p.dir.0 * mi + p.dir.1 * mic, c.proj, p.sd_dir));
            }
            let z = v / p.sigma_v;
            -0.5 * (z * z + d2) + BOUND_SLACK
        };
        let tight = |c: &Candidate| {
            let v = y - c.center;
            let (mi, mic) = (p.slope_i * v, p.slope_ic * v);
            let mass_i = normal_mass((c.cell_i.0 - mi) / p.sd_i, (c.cell_i.1 - mi) / p.sd_i);
            let mass_ic = normal_mass((c.cell_ic.0 - mic) / p.sd_ic, (c.cell_ic.1 - mic) / p.sd_ic);
            let mut mass = mass_i.min(mass_ic);
            if p.sd_dir > 0.0 {
                let m = p.dir.0 * mi + p.dir.1 * mic;
                mass = mass.min(normal_mass((c.proj.0 - m) / p.sd_dir, (c.proj.1 - m) / p.sd_dir));
            }
            let z = v / p.sigma_v;
            -0.5 * z * z + mass.ln() + BOUND_SLACK
        };
        let mut order: Vec<(f64, &Candidate)> =
            self.candidates.iter().filter(|c| y >= c.lo && y <= c.hi).map(|c| (coarse(c), c)).collect();
        let mut best: Option<(f64, &Candidate)> = None;
        if let Some(&(_, seed)) = order.iter().max_by(|a, b| a.0.total_cmp(&b.0)) {
            let s = self.log_score(seed, y);
            if s > f64::NEG_INFINITY {
                order.retain(|(bound, _)| *bound >= s);
            }
        }
        let mut order: Vec<(f64, &Candidate)> = order.into_iter().map(|(_, c)| (tight(c), c)).collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (bound, c) in order {
            if best.is_some_and(|(bs, _)| bound < bs) {
                break;
            }
            let s = self.log_score(c, y);
            if s == f64::NEG_INFINITY {
                continue;
            }
            match best {
                Some((bs, b)) if !better(s, c, bs, b) => {}
                _ => best = Some((s, c)),
            }
        }
        let chosen = match best {
            Some((_, c)) => c,
            None => {
                // Nothing has numerically visible mass: take the nearest
                // support interval.
                let gap = |c: &Candidate| (c.lo - y).max(y - c.hi).max(0.0);
                let mut pick = &self.candidates[0];
                for c in &self.candidates[1..] {
                    if better(-gap(c), c, -gap(pick), pick) {
                        pick = c;
                    }
                }
                pick
            }
        };
        DigitalPair::new(chosen.k, chosen.kp, &self.q)
    }

    /// `E[S_i | Y = y, cells of pair]`, falling back to `t̂_i` when the
    /// conditional mass underflows.
    pub fn reconstruct(&self, y: f64, pair: &DigitalPair) -> f64 {
        let p = &self.post;
        let Some(c) = self.candidates.iter().find(|c| c.k == pair.l && c.kp == pair.n) else {
            return pair.t_hat_i;
        };
        let v = y - c.center;
        let (mass, ex, _) =
            rect_moments((p.slope_i * v, p.slope_ic * v), (p.sd_i, p.sd_ic), p.r, c.cell_i, c.cell_ic);
        if !(mass >= 1e-300) {
            return pair.t_hat_i;
        }
        (ex / mass).clamp(c.cell_i.0, c.cell_i.1)
    }
}

/// MAP pair for one received value.
pub fn decode_digital_map(
    y_i: f64,
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    q: &QuantizerSpec,
    rho: f64,
) -> DigitalPair {
    MapDecoder::new(user, params, ch, q, rho).decode(y_i)
}

/// Conditional-mean estimate of `S_i` given the received value and pair.
pub fn reconstruct_scheme_a(
    y_i: f64,
    pair: &DigitalPair,
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    q: &QuantizerSpec,
    rho: f64,
) -> f64 {
    MapDecoder::new(user, params, ch, q, rho).reconstruct(y_i, pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encoder::encode;
    use crate::model::channel_output_with_noise;
    use crate::numerics::normal::{bivariate_normal_pdf, gaussian_pdf};
    use crate::numerics::quadrature::{integrate_cell_2d_composite, QuadratureRule};
    use crate::numerics::truncated::std_rect_moments;

    #[test]
    fn noiseless_pair_recovery() {
        let q = QuantizerSpec::new(1.0, 0.9).unwrap();
        let params = EncoderParams::symmetric(0.8, 0.3);
        let ch = ChannelModel::symmetric(2.0, 1e-12).unwrap();
        let x1 = encode(0.2, User::One, &params, &q);
        let x2 = encode(0.3, User::Two, &params, &q);
        let y = channel_output_with_noise(User::One, x1, x2, &ch, 0.0);
        let pair = decode_digital_map(y, User::One, &params, &ch, &q, 0.9);
        assert_eq!((pair.t_hat_i, pair.t_hat_ic), (0.0, 0.0));
    }

    #[test]
    fn pruned_search_matches_exhaustive_argmax() {
        for (delta, dg, sigma_w_sq) in [(0.3, 0.02, 0.1), (1.3, 0.6, 0.01), (2.0, 1.0, 1e-3)] {
            let q = QuantizerSpec::new(delta, 0.9).unwrap();
            let beta = (1.0f64 - dg * dg).sqrt();
            let params = EncoderParams::symmetric(dg, beta);
            let ch = ChannelModel::symmetric(2.0, sigma_w_sq).unwrap();
            let dec = MapDecoder::new(User::One, &params, &ch, &q, 0.9);
            for j in 0..400 {
                let y = -8.0 + 16.0 * j as f64 / 399.0;
                let mut best = (f64::NEG_INFINITY, 0, 0);
                for k in q.indices() {
                    for kp in (k - q.m).max(-q.k_max)..=(k + q.m).min(q.k_max) {
                        let f = dec.joint_density(y, k, kp);
                        if f > best.0 {
                            best = (f, k, kp);
                        }
                    }
                }
                if best.0 > 0.0 {
                    let got = dec.decode(y);
                    assert_eq!((got.l, got.n), (best.1, best.2), "y = {y}, delta = {delta}");
                }
            }
        }
    }

    #[test]
    fn far_outputs_pick_extreme_pair() {
        let q = QuantizerSpec::new(1.0, 0.9).unwrap();
        let params = EncoderParams::symmetric(0.8, 0.3);
        let ch = ChannelModel::symmetric(2.0, 0.01).unwrap();
        let pair = decode_digital_map(1e6, User::One, &params, &ch, &q, 0.9);
        assert_eq!((pair.l, pair.n), (q.k_max, q.k_max));
        let pair = decode_digital_map(-1e6, User::Two, &params, &ch, &q, 0.9);
        assert_eq!((pair.l, pair.n), (-q.k_max, -q.k_max));
    }

    #[test]
    fn density_matches_quadrature() {
        let rho = 0.9;
        let q = QuantizerSpec::new(1.0, rho).unwrap();
        let params = EncoderParams::symmetric(0.9, 0.35);
        let ch = ChannelModel::symmetric(2.0, 0.02).unwrap();
        let dec = MapDecoder::new(User::One, &params, &ch, &q, rho);
        let rule = QuadratureRule::gauss_legendre(16).unwrap();
        let sigma = ch.sigma_w();
        for &(y, k, kp) in &[(0.3, 0, 0), (1.9, 1, 0), (2.4, 1, 1), (-1.2, 0, -1)] {
            let center = 0.9 * q.level(k) + 2.0 * 0.9 * q.level(kp);
            let f = |s: f64, t: f64| {
                let u = y - center - 0.35 * s - 2.0 * 0.35 * t;
                bivariate_normal_pdf(s, t, rho) * gaussian_pdf(u, sigma)
            };
            let want = integrate_cell_2d_composite(f, clip(q.cell(k)), clip(q.cell(kp)), &rule, 64);
            let got = dec.joint_density(y, k, kp);
            assert!((got - want).abs() <= 1e-9 * want + 1e-14, "{y} {k} {kp}: {got} vs {want}");
        }
    }

    #[test]
    fn digital_only_reconstruction_is_truncated_mean() {
        let rho = 0.9;
        let q = QuantizerSpec::new(1.0, rho).unwrap();
        let params = EncoderParams::symmetric(1.0, 0.0);
        let ch = ChannelModel::symmetric(2.0, 0.1).unwrap();
        let pair = DigitalPair::new(1, 1, &q);
        let got = reconstruct_scheme_a(3.1, &pair, User::One, &params, &ch, &q, rho);
        let (p, ex, _) = std_rect_moments((0.5, 1.5), (0.5, 1.5), rho);
        assert!((got - ex / p).abs() < 1e-8);
    }

    #[test]
    fn flat_likelihood_gives_cell_mean() {
        let rho = 0.5;
        let q = QuantizerSpec::new(1.0, rho).unwrap();
        let params = EncoderParams::symmetric(0.7, 0.4);
        let ch = ChannelModel::symmetric(1.0, 1e8).unwrap();
        let pair = DigitalPair::new(0, 1, &q);
        let (p, ex, _) = std_rect_moments((-0.5, 0.5), (0.5, 1.5), rho);
        for y in [-3.0, 0.0, 5.0] {
            let got = reconstruct_scheme_a(y, &pair, User::One, &params, &ch, &q, rho);
            assert!((got - ex / p).abs() < 1e-3);
        }
    }

    #[test]
    fn reconstruction_stays_in_cell() {
        let rho = 0.95;
        let q = QuantizerSpec::new(0.7, rho).unwrap();
        let params = EncoderParams::symmetric(1.1, 0.25);
        let ch = ChannelModel::symmetric(2.0, 0.003).unwrap();
        let dec = MapDecoder::new(User::Two, &params, &ch, &q, rho);
        for j in -300..300 {
            let y = j as f64 * 0.037;
            let pair = dec.decode(y);
            assert!((pair.n - pair.l).abs() <= q.m);
            let s = dec.reconstruct(y, &pair);
            let (lo, hi) = q.cell(pair.l);
            assert!(s >= lo && s <= hi, "y={y} s={s} cell=({lo},{hi})");
        }
    }
}
