//! Gauss-Legendre rules, tensor-product cell integration and composite
//! panel integration.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the `order`-point rule by Newton iteration on the Legendre
    /// recurrence.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order == 0 || order > 512 {
            return Err(Error::InvalidParameter(format!(
                "quadrature order must be in 1..=512, got {order}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Approximates `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Calls `f(x, w)` for every node mapped onto `[a, b]`, with the Jacobian
    /// folded into `w`.
    #[inline]
    pub fn for_each_node<F: FnMut(f64, f64)>(&self, a: f64, b: f64, mut f: F) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            f(mid + half * x, w * half);
        }
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss-Legendre approximation of `∬ f(s_i, s_ic)` over a
/// finite rectangle.
pub fn integrate_cell_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    cell_i: (f64, f64),
    cell_ic: (f64, f64),
    rule: &QuadratureRule,
) -> f64 {
    let mut acc = 0.0;
    rule.for_each_node(cell_i.0, cell_i.1, |x, wx| {
        rule.for_each_node(cell_ic.0, cell_ic.1, |z, wz| {
            acc += wx * wz * f(x, z);
        });
    });
    acc
}

/// Composite version of [`integrate_cell_2d`]: each axis is split into
/// `panels` equal pieces.
pub fn integrate_cell_2d_composite<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    cell_i: (f64, f64),
    cell_ic: (f64, f64),
    rule: &QuadratureRule,
    panels: usize,
) -> f64 {
    let hx = (cell_i.1 - cell_i.0) / panels as f64;
    let hz = (cell_ic.1 - cell_ic.0) / panels as f64;
    let mut acc = 0.0;
    for px in 0..panels {
        let xa = cell_i.0 + px as f64 * hx;
        for pz in 0..panels {
            let za = cell_ic.0 + pz as f64 * hz;
            acc += integrate_cell_2d(&mut f, (xa, xa + hx), (za, za + hz), rule);
        }
    }
    acc
}
