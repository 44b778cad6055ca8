//! Univariate and bivariate standard normal functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Arguments beyond this magnitude saturate the CDF in f64.
const SATURATION: f64 = 40.0;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Density of `N(0, sd²)` evaluated at `x`.
#[inline]
pub fn gaussian_pdf(x: f64, sd: f64) -> f64 {
    normal_pdf(x / sd) / sd
}

/// Standard normal CDF, computed through `erfc` so both tails keep full
/// relative precision.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `Φ(hi) - Φ(lo)`, evaluated on whichever tail avoids cancellation.
#[inline]
pub fn normal_mass(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo >= 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else if hi <= 0.0 {
        normal_cdf(hi) - normal_cdf(lo)
    } else {
        1.0 - normal_sf(hi) - normal_cdf(lo)
    }
}

/// Density of the standard bivariate normal with correlation `rho`.
pub fn bivariate_normal_pdf(s1: f64, s2: f64, rho: f64) -> f64 {
    let one_minus = (1.0 - rho) * (1.0 + rho);
    let q = (s1 * s1 - 2.0 * rho * s1 * s2 + s2 * s2) / one_minus;
    (-0.5 * q).exp() / (2.0 * PI * one_minus.sqrt())
}

/// `P(X <= x, Y <= y)` for a standard bivariate normal with correlation `r`.
pub fn bvn_cdf(x: f64, y: f64, r: f64) -> f64 {
    bvn_upper(-x, -y, r)
}

/// `P(x1 <= X <= x2, y1 <= Y <= y2)` for a standard bivariate normal.
pub fn bvn_rect(x: (f64, f64), y: (f64, f64), r: f64) -> f64 {
    if x.1 <= x.0 || y.1 <= y.0 {
        return 0.0;
    }
    let p = bvn_cdf(x.1, y.1, r) - bvn_cdf(x.0, y.1, r) - bvn_cdf(x.1, y.0, r)
        + bvn_cdf(x.0, y.0, r);
    p.max(0.0)
}

// Gauss-Legendre half-rules used by the upper-orthant algorithm below.
const GL6_W: [f64; 3] = [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4];
const GL6_X: [f64; 3] = [0.932_469_514_203_152_2, 0.661_209_386_466_264_7, 0.238_619_186_083_197];
const GL12_W: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_3,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const GL12_X: [f64; 6] = [
    0.981_560_634_246_719_1,
    0.904_117_256_370_475,
    0.769_902_674_194_305,
    0.587_317_954_286_617_1,
    0.367_831_498_998_180_2,
    0.125_233_408_511_469_2,
];
const GL20_W: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];
const GL20_X: [f64; 10] = [
    0.993_128_599_185_094_9,
    0.963_971_927_277_913_8,
    0.912_234_428_251_325_9,
    0.839_116_971_822_218_8,
    0.746_331_906_460_150_8,
    0.636_053_680_726_515,
    0.510_867_001_950_827_1,
    0.373_706_088_715_419_6,
    0.227_785_851_141_645_1,
    0.076_526_521_133_497_33,
];

/// `P(X > dh, Y > dk)` with correlation `r` (Genz's BVNU, double precision).
fn bvn_upper(dh: f64, dk: f64, r: f64) -> f64 {
    let dh = dh.clamp(-SATURATION - 1.0, SATURATION + 1.0);
    let dk = dk.clamp(-SATURATION - 1.0, SATURATION + 1.0);
    if dh > SATURATION || dk > SATURATION {
        return 0.0;
    }
    if dh < -SATURATION {
        return if dk < -SATURATION { 1.0 } else { normal_sf(dk) };
    }
    if dk < -SATURATION {
        return normal_sf(dh);
    }
    if r == 0.0 {
        return normal_sf(dh) * normal_sf(dk);
    }
    let r = r.clamp(-1.0, 1.0);
    let two_pi = 2.0 * PI;
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6_W, &GL6_X)
    } else if r.abs() < 0.75 {
        (&GL12_W, &GL12_X)
    } else {
        (&GL20_W, &GL20_X)
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = 0.5 * r.asin();
        for (&wi, &xi) in w.iter().zip(x) {
            for node in [1.0 - xi, 1.0 + xi] {
                let sn = (asr * node).sin();
                bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / two_pi + normal_sf(h) * normal_sf(k);
        return bvn.clamp(0.0, 1.0);
    }

    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 80.0;
        let asr = -0.5 * (bs / as_ + hk);
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
        }
        if hk > -100.0 {
            let b = bs.sqrt();
            let sp = two_pi.sqrt() * normal_cdf(-b / a);
            bvn -= (-0.5 * hk).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a *= 0.5;
        let mut sum = 0.0;
        for (&wi, &xi) in w.iter().zip(x) {
            for node in [1.0 - xi, 1.0 + xi] {
                let xs = (a * node) * (a * node);
                let asr = -0.5 * (bs / xs + hk);
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                    sum += wi * asr.exp() * (sp - ep);
                }
            }
        }
        bvn = (a * sum - bvn) / two_pi;
    }
    if r > 0.0 {
        bvn += normal_sf(h.max(k));
    } else if h >= k {
        bvn = -bvn;
    } else {
        let l = if h < 0.0 {
            normal_cdf(k) - normal_cdf(h)
        } else {
            normal_sf(h) - normal_sf(k)
        };
        bvn = l - bvn;
    }
    bvn.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_eq!(normal_cdf(40.0), 1.0);
        // Φ(1) from a 30-digit reference evaluation.
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 1.349_898_031_630_094_6e-3).abs() < 1e-17);
        assert!((normal_sf(6.0) - 9.865_876_450_376_98e-10).abs() < 1e-22);
    }

    #[test]
    fn mass_is_tail_stable() {
        let m = normal_mass(8.0, 9.0);
        let exact = normal_sf(8.0) - normal_sf(9.0);
        assert!(m > 0.0 && (m - exact).abs() < 1e-30);
        assert_eq!(normal_mass(1.0, 1.0), 0.0);
        assert!((normal_mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn bivariate_pdf_at_origin() {
        assert!((bivariate_normal_pdf(0.0, 0.0, 0.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let rho: f64 = 0.7;
        let expect = 1.0 / (2.0 * PI * (1.0 - rho * rho).sqrt());
        assert!((bivariate_normal_pdf(0.0, 0.0, rho) - expect).abs() < 1e-14);
    }

    #[test]
    fn bvn_orthant_closed_form() {
        // P(X<0, Y<0) = 1/4 + asin(r)/(2π)
        for &r in &[-0.99, -0.9, -0.5, -0.1, 0.0, 0.2, 0.6, 0.8, 0.93, 0.999] {
            let expect = 0.25 + f64::asin(r) / (2.0 * PI);
            assert!((bvn_cdf(0.0, 0.0, r) - expect).abs() < 1e-14, "r={r}");
        }
    }

    #[test]
    fn bvn_limits() {
        assert!((bvn_cdf(1.3, 50.0, 0.4) - normal_cdf(1.3)).abs() < 1e-15);
        assert_eq!(bvn_cdf(-50.0, 2.0, 0.4), 0.0);
        assert!((bvn_cdf(0.7, -0.2, 0.0) - normal_cdf(0.7) * normal_cdf(-0.2)).abs() < 1e-16);
        // r -> 1: P(X<=x, Y<=y) -> Φ(min(x, y))
        assert!((bvn_cdf(0.3, 1.1, 1.0) - normal_cdf(0.3)).abs() < 1e-12);
        // r -> -1: P -> max(0, Φ(x) - Φ(-y))
        assert!((bvn_cdf(0.3, 1.1, -1.0) - (normal_cdf(0.3) - normal_cdf(-1.1))).abs() < 1e-12);
    }

    #[test]
    fn bvn_matches_conditional_quadrature() {
        // Oracle: ∫_{-∞}^{x} φ(t) Φ((y - r t)/√(1-r²)) dt by composite Simpson.
        let oracle = |x: f64, y: f64, r: f64| {
            let q = (1.0 - r * r).sqrt();
            let lo = -12.0;
            let n = 40_000;
            let h = (x - lo) / n as f64;
            let f = |t: f64| normal_pdf(t) * normal_cdf((y - r * t) / q);
            let mut s = f(lo) + f(x);
            for i in 1..n {
                let t = lo + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
            }
            s * h / 3.0
        };
        for &(x, y, r) in &[
            (0.5, -0.3, 0.25),
            (1.5, 0.7, -0.6),
            (-1.2, 2.0, 0.85),
            (2.5, 2.4, 0.95),
            (-0.4, -0.1, -0.97),
            (3.0, -2.0, 0.99),
        ] {
            let got = bvn_cdf(x, y, r);
            let want = oracle(x, y, r);
            assert!((got - want).abs() < 1e-11, "({x},{y},{r}) {got} vs {want}");
        }
    }
}
