mod common;

use proptest::prelude::*;
use zdjscc_core::codec::{encode, encoder_power, solve_beta_for_power, Constellation, EncoderParams, MapDecoder};
use zdjscc_core::model::{
    channel_output_with_noise, quantizer_moments, sample_source_pair, ChannelModel, QuantizerSpec, SourceModel, User,
};
use zdjscc_core::numerics::normal::{bivariate_normal_pdf, gaussian_pdf};
use zdjscc_core::numerics::quadrature::{integrate_cell_2d_composite, QuadratureRule};
use zdjscc_core::optimizer::uncoded_distortion;
use zdjscc_core::sim::rng::{block_rng, Stream};
use zdjscc_core::sim::{simulate_scheme_b, simulate_uncoded, uncoded_coefficient, HdaSetup};

use common::{mc_source_mean, normals, within_se};

#[test]
fn encoder_power_matches_simulation() {
    let q = QuantizerSpec::new(1.0, 0.0).unwrap();
    let p = EncoderParams::symmetric(1.0, 1.0);
    let want = encoder_power(User::One, &p, &quantizer_moments(&q));
    let (mean, se) = mc_source_mean(0.0, 10_000_000, 3, |s, _| encode(s, User::One, &p, &q).powi(2));
    assert!(within_se(want, mean, se, 3.0), "{want} vs {mean} ± {se}");
}

#[test]
fn power_degenerations() {
    let coarse = QuantizerSpec::new(100.0, 0.0).unwrap();
    assert!(encoder_power(User::One, &EncoderParams::symmetric(1.0, 0.0), &quantizer_moments(&coarse)) < 1e-300);
    let q = QuantizerSpec::new(1.0, 0.0).unwrap();
    let m = quantizer_moments(&q);
    assert_eq!(encoder_power(User::Two, &EncoderParams::symmetric(0.0, 1.0), &m), 1.0);
    assert_eq!(solve_beta_for_power(2.0, 0.0, &m).unwrap(), 2f64.sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn beta_round_trip(delta in 0.05f64..5.0, dg in 0.0f64..3.0, p in 0.1f64..10.0) {
        let q = QuantizerSpec::new(delta, 0.5).unwrap();
        let m = quantizer_moments(&q);
        match solve_beta_for_power(p, dg, &m) {
            Ok(b) => {
                let got = encoder_power(User::One, &EncoderParams::symmetric(dg, b), &m);
                prop_assert!((got - p).abs() < 1e-12 * p.max(1.0));
            }
            Err(_) => prop_assert!(p < dg * dg * (m.e_t_sq - m.e_t_s * m.e_t_s) + 1e-12),
        }
    }

    #[test]
    fn pseudo_ml_matches_exhaustive_scan(
        delta in 0.3f64..2.5,
        a in 0.1f64..2.0,
        b in 0.0f64..4.0,
        y in -30.0f64..30.0,
    ) {
        let q = QuantizerSpec::new(delta, 0.9).unwrap();
        let (ai, bi) = (a * delta, b * delta);
        let c = Constellation::from_coefficients(ai, bi, &q);
        let got = c.decode(y, &q);
        let want = Constellation::decode_exhaustive(ai, bi, y, &q);
        // Equal residuals may resolve to either owner only when the
        // constellation points coincide.
        let resid = |l: i32, n: i32| (y - ai * l as f64 - bi * n as f64).abs();
        prop_assert!((got.l, got.n) == (want.l, want.n) || (resid(got.l, got.n) - resid(want.l, want.n)).abs() < 1e-9);
        prop_assert!((got.n - got.l).abs() <= q.m);
    }

    #[test]
    fn map_pairs_respect_the_search_window(
        delta in 0.4f64..2.0,
        dg in 0.0f64..1.0,
        csnr in 0.0f64..30.0,
        y in -10.0f64..10.0,
    ) {
        let q = QuantizerSpec::new(delta, 0.9).unwrap();
        let beta = solve_beta_for_power(1.0, dg, &quantizer_moments(&q)).unwrap();
        let p = EncoderParams::symmetric(dg, beta);
        let ch = ChannelModel::from_csnr(2.0, 1.0, csnr).unwrap();
        let d = MapDecoder::new(User::Two, &p, &ch, &q, 0.9).decode(y);
        prop_assert!((d.n - d.l).abs() <= q.m);
        prop_assert!(d.l.abs() <= q.k_max && d.n.abs() <= q.k_max);
    }
}

/// Joint density of `y` and the pair `(k, kp)` by brute-force quadrature.
fn oracle_score(y: f64, k: i32, kp: i32, p: &EncoderParams, ch: &ChannelModel, q: &QuantizerSpec, rho: f64) -> f64 {
    let rule = QuadratureRule::gauss_legendre(16).unwrap();
    let clip = |c: (f64, f64)| (c.0.max(-8.0), c.1.min(8.0));
    let g = ch.gain_into(User::One);
    let sigma = ch.sigma_w();
    integrate_cell_2d_composite(
        |si, sic| {
            let u = y - p.delta_coeff_1 * q.level(k) - p.beta_1 * si - g * (p.delta_coeff_2 * q.level(kp) + p.beta_2 * sic);
            bivariate_normal_pdf(si, sic, rho) * gaussian_pdf(u, sigma)
        },
        clip(q.cell(k)),
        clip(q.cell(kp)),
        &rule,
        6,
    )
}

#[test]
fn map_decoder_agrees_with_refined_quadrature() {
    let rho = 0.9;
    let q = QuantizerSpec::new(1.0, rho).unwrap();
    let beta = solve_beta_for_power(1.0, 0.5, &quantizer_moments(&q)).unwrap();
    let p = EncoderParams::symmetric(0.5, beta);
    let ch = ChannelModel::from_csnr(2.0, 1.0, 20.0).unwrap();
    let dec = MapDecoder::new(User::One, &p, &ch, &q, rho);
    let src = SourceModel::new(rho).unwrap();
    let mut rng = block_rng(5, 0, Stream::Source);
    let noise = normals(300, 5);
    let (mut err_fast, mut err_oracle, mut agree) = (0, 0, 0);
    for w in &noise {
        let (s1, s2) = sample_source_pair(&src, &mut rng);
        let y = channel_output_with_noise(
            User::One,
            encode(s1, User::One, &p, &q),
            encode(s2, User::Two, &p, &q),
            &ch,
            ch.sigma_w() * w,
        );
        let truth = (q.index(s1), q.index(s2));
        let fast = dec.decode(y);
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for k in q.indices() {
            for kp in (k - q.m).max(-q.k_max)..=(k + q.m).min(q.k_max) {
                let s = oracle_score(y, k, kp, &p, &ch, &q, rho);
                if s > best.0 {
                    best = (s, k, kp);
                }
            }
        }
        err_fast += usize::from((fast.l, fast.n) != truth);
        err_oracle += usize::from((best.1, best.2) != truth);
        agree += usize::from((fast.l, fast.n) == (best.1, best.2));
    }
    let n = noise.len() as f64;
    let (r1, r2) = (err_fast as f64 / n, err_oracle as f64 / n);
    let se = (r2.max(1.0 / n) * (1.0 - r2) / n).sqrt();
    assert!((r1 - r2).abs() <= 3.0 * se, "{r1} vs {r2}");
    assert!(agree as f64 >= 0.99 * n, "agreement {agree}/{n}");
}

#[test]
fn lmmse_coefficient_is_locally_optimal_without_interference() {
    let rho = 0.5;
    let q = QuantizerSpec::new(1.0, rho).unwrap();
    let m = quantizer_moments(&q);
    let beta = 0.3;
    let p = EncoderParams::symmetric(1.0, beta);
    let ch = ChannelModel::symmetric(0.0, 1e-3).unwrap();
    let g_star = beta * m.sigma_r_sq / (beta * beta * m.sigma_r_sq + ch.sigma_w_sq);
    let src = SourceModel::new(rho).unwrap();
    let d = |g: f64| {
        let setup = HdaSetup { params: p, q, gammas: [g, g] };
        simulate_scheme_b(&src, &ch, &setup, 1_000_000, 21).unwrap().d_avg
    };
    let best = d(g_star);
    assert!(best <= d(0.8 * g_star));
    assert!(best <= d(1.2 * g_star));
}

#[test]
fn analog_only_limit_is_uncoded_transmission() {
    let rho = 0.9;
    let q = QuantizerSpec::new(100.0, rho).unwrap();
    assert_eq!(q.k_max, 0);
    let ch = ChannelModel::from_csnr(2.0, 1.0, 10.0).unwrap();
    let g = uncoded_coefficient(User::One, &ch, rho, 1.0);
    let setup = HdaSetup { params: EncoderParams::symmetric(0.0, 1.0), q, gammas: [g, g] };
    let src = SourceModel::new(rho).unwrap();
    let hda = simulate_scheme_b(&src, &ch, &setup, 200_000, 8).unwrap();
    let unc = simulate_uncoded(&src, &ch, 1.0, 200_000, 8).unwrap();
    assert!((hda.d_avg - unc.d_avg).abs() < 1e-12);
    let (closed, _) = uncoded_distortion(rho, &ch, 1.0);
    assert!(within_se(hda.d_avg, closed, hda.stderr_d, 3.0));
}

#[test]
fn pseudo_ml_errors_fall_with_csnr() {
    let rho = 0.9;
    let q = QuantizerSpec::new(1.2, rho).unwrap();
    let beta = solve_beta_for_power(1.0, 0.6, &quantizer_moments(&q)).unwrap();
    let setup = HdaSetup { params: EncoderParams::symmetric(0.6, beta), q, gammas: [0.0, 0.0] };
    let src = SourceModel::new(rho).unwrap();
    let rates: Vec<f64> = [5.0, 10.0, 15.0, 20.0, 25.0]
        .iter()
        .map(|&csnr| {
            let ch = ChannelModel::from_csnr(2.0, 1.0, csnr).unwrap();
            let r = simulate_scheme_b(&src, &ch, &setup, 100_000, 4).unwrap();
            r.pair_errors[0] as f64 / r.trials as f64
        })
        .collect();
    let inversions = rates.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "{rates:?}");
}
