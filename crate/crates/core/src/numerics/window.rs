//! Integrals of a bivariate normal cell against a Gaussian noise window.
//!
//! For a cell `(S_i, S_ic) ∈ I × J` and independent `W ~ N(0, σ²)` the
//! decoder events have the form `W + a S_i + b S_ic <= B`. The cumulative
//! quantities
//!
//! ```text
//! F_w(B) = E[w · 1{cell} · 1{W + a S_i + b S_ic <= B}]
//! ```
//!
//! are computed by projecting the cell onto `U = a S_i + b S_ic`. The
//! restricted density of `U` (and its first moments) is available in closed
//! form, which leaves a 1-D integral of `Φ((B - u)/σ)` against a piecewise
//! smooth function. Panels are graded around every transition so the result
//! stays accurate when σ is small compared with the cell.

use crate::error::{Error, Result};

use super::normal::{gaussian_pdf, normal_cdf, normal_mass, normal_pdf};
use super::quadrature::{integrate_cell_2d_composite, QuadratureRule};
use super::truncated::std_rect_moments;

/// Stand-in for an infinite window bound.
pub const WINDOW_INFINITY: f64 = 1e6;

/// Cells are clipped to this box; the mass outside is below 1e-22.
const BOX_LIMIT: f64 = 10.0;
/// Half-width of the noise window in units of σ. `Φ(-10) ≈ 7.6e-24`.
const TAIL: f64 = 10.0;
const PIECE_OFFSETS: [f64; 7] = [-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0];
const GRADING: [f64; 9] = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0];

/// Weighted cell-window masses.
///
/// * `prob`: `E[1]`
/// * `offset`: `E[S_i - t_k]`
/// * `noise`: `E[W]`
/// * `innovation`: `E[S_ic - ρ S_i]`
///
/// each restricted to the cell and the window event.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WindowMoments {
    pub prob: f64,
    pub offset: f64,
    pub noise: f64,
    pub innovation: f64,
}

impl WindowMoments {
    pub const ZERO: Self = Self { prob: 0.0, offset: 0.0, noise: 0.0, innovation: 0.0 };

    fn from_density(d: [f64; 3], noise: f64) -> Self {
        Self { prob: d[0], offset: d[1], noise, innovation: d[2] }
    }
}

impl std::ops::Sub for WindowMoments {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            prob: self.prob - o.prob,
            offset: self.offset - o.offset,
            noise: self.noise - o.noise,
            innovation: self.innovation - o.innovation,
        }
    }
}

impl std::ops::Add for WindowMoments {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            prob: self.prob + o.prob,
            offset: self.offset + o.offset,
            noise: self.noise + o.noise,
            innovation: self.innovation + o.innovation,
        }
    }
}

/// Precomputed state for one cell and one projection direction `(a, b)`.
#[derive(Clone, Debug)]
pub struct CellIntegrator {
    t_k: f64,
    rho: f64,
    sigma: f64,
    totals: WindowMoments,
    projection: Option<Projection>,
    rule: QuadratureRule,
}

#[derive(Clone, Debug)]
struct Projection {
    /// Coefficient of the dependent coordinate `R`; `|c_r| >= |c_t|`.
    c_r: f64,
    /// Coefficient of the free coordinate `T`.
    c_t: f64,
    t_is_x: bool,
    t_bounds: (f64, f64),
    r_bounds: (f64, f64),
    kappa: f64,
    s_t: f64,
    sigma_u: f64,
    edges: Vec<f64>,
    cum: Vec<[f64; 3]>,
    /// Quadrature nodes of every panel with the weighted densities.
    nodes: Vec<(f64, [f64; 3])>,
}

fn clip(b: (f64, f64)) -> (f64, f64) {
    (b.0.clamp(-BOX_LIMIT, BOX_LIMIT), b.1.clamp(-BOX_LIMIT, BOX_LIMIT))
}

impl CellIntegrator {
    /// `cell_i`, `cell_ic` may have infinite ends. `t_k` is the reference
    /// point of the offset weight.
    pub fn new(
        cell_i: (f64, f64),
        cell_ic: (f64, f64),
        t_k: f64,
        rho: f64,
        a: f64,
        b: f64,
        sigma_w_sq: f64,
        rule: &QuadratureRule,
    ) -> Result<Self> {
        if !(sigma_w_sq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {sigma_w_sq}"
            )));
        }
        let x = clip(cell_i);
        let z = clip(cell_ic);
        let (p, ex, ez) = std_rect_moments(x, z, rho);
        let totals = WindowMoments {
            prob: p,
            offset: ex - t_k * p,
            noise: 0.0,
            innovation: ez - rho * ex,
        };
        let mut me = Self {
            t_k,
            rho,
            sigma: sigma_w_sq.sqrt(),
            totals,
            projection: None,
            rule: rule.clone(),
        };
        if (a != 0.0 || b != 0.0) && p > 0.0 {
            me.projection = Some(me.build_projection(x, z, a, b));
        }
        Ok(me)
    }

    /// Totals over the whole cell (the `B → +∞` limit).
    pub fn totals(&self) -> WindowMoments {
        self.totals
    }

    fn build_projection(&self, x: (f64, f64), z: (f64, f64), a: f64, b: f64) -> Projection {
        let rho = self.rho;
        let (c_r, c_t, t_is_x, t_bounds, r_bounds) =
            if b.abs() >= a.abs() { (b, a, true, x, z) } else { (a, b, false, z, x) };
        let var_u = a * a + b * b + 2.0 * a * b * rho;
        let sigma_u = var_u.sqrt();
        let kappa = (c_t + c_r * rho) / var_u;
        let s_t = c_r.abs() * ((1.0 - rho) * (1.0 + rho)).sqrt() / sigma_u;

        let corners = [a * x.0 + b * z.0, a * x.0 + b * z.1, a * x.1 + b * z.0, a * x.1 + b * z.1];
        let u_min = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let u_max = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut pts: Vec<f64> = corners.to_vec();
        let mut grade = |center: f64, scale: f64| {
            if !center.is_finite() || !(scale > 0.0) || scale >= sigma_u {
                return;
            }
            for j in GRADING {
                pts.push(center + j * scale);
            }
        };
        // Φ transitions at the fixed bounds of T.
        if kappa != 0.0 {
            for te in [t_bounds.0, t_bounds.1] {
                grade(te / kappa, s_t / kappa.abs());
            }
        }
        // Φ transitions at the bounds of T implied by the bounds of R.
        if c_t != 0.0 {
            let g = 1.0 / c_t - kappa;
            if g != 0.0 {
                for re in [r_bounds.0, r_bounds.1] {
                    grade(c_r * re / c_t / g, s_t / g.abs());
                }
            }
        }
        pts.retain(|&u| u >= u_min && u <= u_max);
        pts.sort_by(f64::total_cmp);
        let tol = 1e-13 * (u_max - u_min).max(1e-300);
        pts.dedup_by(|p, q| (*p - *q).abs() <= tol);

        let h_max = 0.5 * sigma_u;
        let mut edges = Vec::with_capacity(pts.len() * 2);
        for w in pts.windows(2) {
            let n = ((w[1] - w[0]) / h_max).ceil().max(1.0) as usize;
            for j in 0..n {
                edges.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
            }
        }
        edges.push(*pts.last().unwrap());

        let mut proj = Projection {
            c_r,
            c_t,
            t_is_x,
            t_bounds,
            r_bounds,
            kappa,
            s_t,
            sigma_u,
            edges,
            cum: Vec::new(),
            nodes: Vec::new(),
        };
        let mut cum = Vec::with_capacity(proj.edges.len());
        let mut nodes = Vec::with_capacity(proj.edges.len() * self.rule.order());
        let mut acc = [0.0; 3];
        cum.push(acc);
        for w in proj.edges.windows(2) {
            self.rule.for_each_node(w[0], w[1], |u, wt| {
                let d = self.density(&proj, u);
                let wd = [wt * d[0], wt * d[1], wt * d[2]];
                for i in 0..3 {
                    acc[i] += wd[i];
                }
                nodes.push((u, wd));
            });
            cum.push(acc);
        }
        proj.cum = cum;
        proj.nodes = nodes;
        proj
    }

    /// Restricted density of `U` at `u` with the unit, offset and innovation
    /// weights.
    #[inline]
    fn density(&self, p: &Projection, u: f64) -> [f64; 3] {
        let (mut lo, mut hi) = p.t_bounds;
        if p.c_t == 0.0 {
            let r = u / p.c_r;
            if r < p.r_bounds.0 || r > p.r_bounds.1 {
                return [0.0; 3];
            }
        } else {
            let e0 = (u - p.c_r * p.r_bounds.0) / p.c_t;
            let e1 = (u - p.c_r * p.r_bounds.1) / p.c_t;
            lo = lo.max(e0.min(e1));
            hi = hi.min(e0.max(e1));
        }
        if hi <= lo {
            return [0.0; 3];
        }
        let m = p.kappa * u;
        let l = (lo - m) / p.s_t;
        let h = (hi - m) / p.s_t;
        let mass = normal_mass(l, h);
        let et = m * mass + p.s_t * (normal_pdf(l) - normal_pdf(h));
        let er = (u * mass - p.c_t * et) / p.c_r;
        let (ex, ez) = if p.t_is_x { (et, er) } else { (er, et) };
        let f = gaussian_pdf(u, p.sigma_u);
        [f * mass, f * (ex - self.t_k * mass), f * (ez - self.rho * ex)]
    }

    fn integrate_density(&self, p: &Projection, lo: f64, hi: f64) -> [f64; 3] {
        let mut acc = [0.0; 3];
        if hi <= lo {
            return acc;
        }
        self.rule.for_each_node(lo, hi, |u, w| {
            let d = self.density(p, u);
            for i in 0..3 {
                acc[i] += w * d[i];
            }
        });
        acc
    }

    /// `F_w(B)` for all four weights.
    pub fn cumulative(&self, boundary: f64) -> WindowMoments {
        let sigma = self.sigma;
        let Some(p) = &self.projection else {
            let phi = normal_cdf(boundary / sigma);
            let t = self.totals;
            return WindowMoments {
                prob: phi * t.prob,
                offset: phi * t.offset,
                noise: -sigma * sigma * gaussian_pdf(boundary, sigma) * t.prob,
                innovation: phi * t.innovation,
            };
        };
        let u_min = p.edges[0];
        let u_max = *p.edges.last().unwrap();
        let lo_u = boundary - TAIL * sigma;
        let hi_u = boundary + TAIL * sigma;
        if lo_u >= u_max {
            return self.totals;
        }
        if hi_u <= u_min {
            return WindowMoments::ZERO;
        }
        let lo = lo_u.max(u_min);
        let hi = hi_u.min(u_max);
        let var = sigma * sigma;
        let order = self.rule.order();

        // Panels entirely below the window contribute their full mass.
        let first = p.edges.partition_point(|&e| e <= lo).max(1) - 1;
        let mut out = WindowMoments::from_density(p.cum[first], 0.0);
        let add = |out: &mut WindowMoments, u: f64, d: [f64; 3]| {
            let g = (boundary - u) / sigma;
            let phi = normal_cdf(g);
            out.prob += phi * d[0];
            out.offset += phi * d[1];
            out.innovation += phi * d[2];
            out.noise -= var * normal_pdf(g) / sigma * d[0];
        };
        let mut cuts: Vec<f64> = Vec::with_capacity(12);
        for j in first..p.edges.len() - 1 {
            let (p0, p1) = (p.edges[j], p.edges[j + 1]);
            if p0 >= hi {
                break;
            }
            if p1 - p0 <= sigma {
                for &(u, d) in &p.nodes[j * order..(j + 1) * order] {
                    add(&mut out, u, d);
                }
                continue;
            }
            // Wide panel: the part below the window counts in full, the
            // rest is split where the noise CDF changes fastest.
            let a = p0.max(lo);
            let b = p1.min(hi);
            if a > p0 {
                let below = self.integrate_density(p, p0, a);
                out = out + WindowMoments::from_density(below, 0.0);
            }
            cuts.clear();
            cuts.push(a);
            for k in PIECE_OFFSETS {
                let c = boundary + k * sigma;
                if c > a && c < b {
                    cuts.push(c);
                }
            }
            cuts.push(b);
            for w in cuts.windows(2) {
                if w[1] > w[0] {
                    self.rule.for_each_node(w[0], w[1], |u, wt| {
                        let d = self.density(p, u);
                        add(&mut out, u, [wt * d[0], wt * d[1], wt * d[2]]);
                    });
                }
            }
        }
        out
    }

    /// Moments of the slab `lb < W + a S_i + b S_ic <= ub`.
    pub fn window(&self, lb: f64, ub: f64) -> WindowMoments {
        if ub <= lb {
            return WindowMoments::ZERO;
        }
        self.cumulative(ub) - self.cumulative(lb)
    }
}

/// Affine function `constant + coeff_i s_i + coeff_ic s_ic`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineBound {
    pub constant: f64,
    pub coeff_i: f64,
    pub coeff_ic: f64,
}

impl AffineBound {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, coeff_i: 0.0, coeff_ic: 0.0 }
    }

    fn at(&self, s_i: f64, s_ic: f64) -> f64 {
        self.constant + self.coeff_i * s_i + self.coeff_ic * s_ic
    }
}

/// `∬ g(s_i) [Φ(ub/σ) - Φ(lb/σ)]⁺ pdf(s_i, s_ic)` over the cell, with
/// `g ≡ 1` for `moment_power == 0` and `g = s_i - t_k` for
/// `moment_power == 1`.
///
/// Windows whose bounds share the same slope go through [`CellIntegrator`];
/// other windows fall back to composite tensor-product quadrature.
#[allow(clippy::too_many_arguments)]
pub fn cell_window_integral(
    moment_power: u8,
    cell_i: (f64, f64),
    cell_ic: (f64, f64),
    t_k: f64,
    window: (AffineBound, AffineBound),
    rho: f64,
    sigma_w_sq: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if moment_power > 1 {
        return Err(Error::InvalidParameter(format!(
            "moment power must be 0 or 1, got {moment_power}"
        )));
    }
    if !(sigma_w_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive, got {sigma_w_sq}"
        )));
    }
    let (lb, ub) = window;
    if lb.coeff_i == ub.coeff_i && lb.coeff_ic == ub.coeff_ic {
        let ci = CellIntegrator::new(
            cell_i,
            cell_ic,
            t_k,
            rho,
            -ub.coeff_i,
            -ub.coeff_ic,
            sigma_w_sq,
            rule,
        )?;
        let m = ci.window(lb.constant, ub.constant);
        return Ok(if moment_power == 0 { m.prob } else { m.offset });
    }
    let sigma = sigma_w_sq.sqrt();
    let x = clip(cell_i);
    let z = clip(cell_ic);
    let f = |s: f64, t: f64| {
        let w = (normal_cdf(ub.at(s, t) / sigma) - normal_cdf(lb.at(s, t) / sigma)).max(0.0);
        let g = if moment_power == 0 { 1.0 } else { s - t_k };
        g * w * super::normal::bivariate_normal_pdf(s, t, rho)
    };
    Ok(integrate_cell_2d_composite(f, x, z, rule, 8))
}
