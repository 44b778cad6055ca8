//! First moments of a bivariate normal restricted to a rectangle.

use super::normal::{bvn_rect, normal_mass, normal_pdf};

/// Mass and first moments of a standard bivariate normal over a rectangle:
/// `(P, E[X 1], E[Z 1])`. Infinite bounds are allowed.
pub fn std_rect_moments(x: (f64, f64), z: (f64, f64), rho: f64) -> (f64, f64, f64) {
    if x.1 <= x.0 || z.1 <= z.0 {
        return (0.0, 0.0, 0.0);
    }
    let p = bvn_rect(x, z, rho);
    let s = ((1.0 - rho) * (1.0 + rho)).sqrt();
    // Mass of the other coordinate's interval conditioned on this edge.
    let slice = |edge: f64, other: (f64, f64)| -> f64 {
        let d = normal_pdf(edge);
        if d == 0.0 {
            return 0.0;
        }
        d * normal_mass((other.0 - rho * edge) / s, (other.1 - rho * edge) / s)
    };
    let gx = slice(x.0, z) - slice(x.1, z);
    let gz = slice(z.0, x) - slice(z.1, x);
    (p, gx + rho * gz, gz + rho * gx)
}

/// Moments of a general bivariate normal `N((mx, mz), [[sx², r sx sz], [.., sz²]])`
/// over a rectangle: `(P, E[X 1], E[Z 1])`.
pub fn rect_moments(
    mean: (f64, f64),
    sd: (f64, f64),
    r: f64,
    x: (f64, f64),
    z: (f64, f64),
) -> (f64, f64, f64) {
    let xs = ((x.0 - mean.0) / sd.0, (x.1 - mean.0) / sd.0);
    let zs = ((z.0 - mean.1) / sd.1, (z.1 - mean.1) / sd.1);
    let (p, ex, ez) = std_rect_moments(xs, zs, r);
    (p, mean.0 * p + sd.0 * ex, mean.1 * p + sd.1 * ez)
}
