//! Joint law of the true and pseudo-ML decoded index pairs.

use std::io::Write;

use rayon::prelude::*;

use crate::analytic::distance::{distance_bound, pair_window};
use crate::codec::{Constellation, EncoderParams};
use crate::error::{Error, Result};
use crate::model::{ChannelModel, QuantizerSpec, User};
use crate::numerics::normal::{bvn_rect, normal_pdf};
use crate::numerics::quadrature::QuadratureRule;
use crate::numerics::window::{CellIntegrator, WindowMoments};

/// Cells whose joint probability falls below this are skipped.
pub const CELL_CUTOFF: f64 = 1e-12;

/// One `(k, m, l, n)` entry: true indices `(k, m)`, decoded `(l, n)`.
///
/// `prob` is the joint probability, `moment1` is `E[(S_i - t_k) 1{entry}]`,
/// `noise` is `E[W_i 1{entry}]` and `innovation` is `E[N_i 1{entry}]` with
/// `N_i = S_ic - ρ S_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PmfEntry {
    pub k: i32,
    pub m: i32,
    pub l: i32,
    pub n: i32,
    pub prob: f64,
    pub moment1: f64,
    pub noise: f64,
    pub innovation: f64,
}

/// Totals of one true cell `(k, m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSummary {
    pub k: i32,
    pub m: i32,
    pub prob: f64,
    /// `E[(S_i - t_k) 1{cell}]`.
    pub moment1: f64,
}

#[derive(Clone, Debug)]
pub struct JointPmfTable {
    pub user: User,
    pub delta: f64,
    pub entries: Vec<PmfEntry>,
    pub cells: Vec<CellSummary>,
}

impl JointPmfTable {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.prob).sum()
    }

    /// Writes `k,m,l,n,prob,moment1` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,m,l,n,prob,moment1")?;
        for e in &self.entries {
            writeln!(w, "{},{},{},{},{:.16e},{:.16e}", e.k, e.m, e.l, e.n, e.prob, e.moment1)?;
        }
        Ok(())
    }
}

/// Index range of `m` around the conditional mode for row `k`, trimmed to
/// cells above the cutoff.
fn row_cells(q: &QuantizerSpec, k: i32, rho: f64) -> Vec<(i32, f64)> {
    let cell_k = q.cell(k);
    let mass_k = q.cell_mass(k);
    if mass_k < CELL_CUTOFF {
        return Vec::new();
    }
    let mean_k = (normal_pdf(cell_k.0) - normal_pdf(cell_k.1)) / mass_k;
    let start = q.index(rho * mean_k);
    let prob = |m: i32| bvn_rect(cell_k, q.cell(m), rho);
    let mut out = Vec::new();
    // Row probabilities are log-concave in m, so scanning outward from the
    // mode may stop at the first cell below the cutoff.
    let mut m = start;
    while m >= -q.k_max {
        let p = prob(m);
        if p < CELL_CUTOFF && m != start {
            break;
        }
        if p >= CELL_CUTOFF {
            out.push((m, p));
        }
        m -= 1;
    }
    let mut m = start + 1;
    while m <= q.k_max {
        let p = prob(m);
        if p < CELL_CUTOFF {
            break;
        }
        out.push((m, p));
        m += 1;
    }
    out.sort_by_key(|c| c.0);
    out
}

/// Builds the table for receiver `user`.
pub fn joint_pmf(
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    q: &QuantizerSpec,
    rho: f64,
    rule: &QuadratureRule,
) -> Result<JointPmfTable> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("|rho| must be < 1, got {rho}")));
    }
    let cons = Constellation::new(user, params, ch, q);
    let g = ch.gain_into(user);
    let other = user.other();
    let a = params.beta(user);
    let b = g * params.beta(other);
    let ai = params.alpha(user) * q.delta;
    let bi = g * params.alpha(other) * q.delta;
    let bound = distance_bound(user, params, ch, q);
    let mirror = cons.is_symmetric();

    let mut cells: Vec<(i32, i32, f64)> = Vec::new();
    for k in q.indices() {
        for (m, p) in row_cells(q, k, rho) {
            cells.push((k, m, p));
        }
    }
    let primary = |k: i32, m: i32| !mirror || k > 0 || (k == 0 && m >= 0);

    let computed: Vec<Result<(Vec<PmfEntry>, CellSummary)>> = cells
        .par_iter()
        .filter(|&&(k, m, _)| primary(k, m))
        .map(|&(k, m, _)| {
            let integ = CellIntegrator::new(q.cell(k), q.cell(m), q.level(k), rho, a, b, ch.sigma_w_sq, rule)?;
            let center = ai * k as f64 + bi * m as f64;
            let shift = a * q.level(k) + b * q.level(m);
            let pts = &cons.points()[pair_window(&cons, center, bound)];
            let totals = integ.totals();
            let mut entries = Vec::with_capacity(pts.len());
            let mut lower = WindowMoments::ZERO;
            for (j, p) in pts.iter().enumerate() {
                let upper = if j + 1 == pts.len() {
                    totals
                } else {
                    let edge = 0.5 * (p.value + pts[j + 1].value) - center;
                    integ.cumulative(edge + shift)
                };
                let w = upper - lower;
                lower = upper;
                if w != WindowMoments::ZERO {
                    entries.push(PmfEntry {
                        k,
                        m,
                        l: p.l,
                        n: p.n,
                        prob: w.prob,
                        moment1: w.offset,
                        noise: w.noise,
                        innovation: w.innovation,
                    });
                }
            }
            let summary = CellSummary { k, m, prob: totals.prob, moment1: totals.offset };
            Ok((entries, summary))
        })
        .collect();

    let mut entries = Vec::new();
    let mut summaries = Vec::new();
    for r in computed {
        let (e, s) = r?;
        if mirror && (s.k, s.m) != (0, 0) {
            summaries.push(CellSummary { k: -s.k, m: -s.m, prob: s.prob, moment1: -s.moment1 });
            entries.extend(e.iter().map(|x| PmfEntry {
                k: -x.k,
                m: -x.m,
                l: -x.l,
                n: -x.n,
                prob: x.prob,
                moment1: -x.moment1,
                noise: -x.noise,
                innovation: -x.innovation,
            }));
        }
        summaries.push(s);
        entries.extend(e);
    }
    entries.sort_by_key(|e| (e.k, e.m, e.l, e.n));
    summaries.sort_by_key(|s| (s.k, s.m));
    Ok(JointPmfTable { user, delta: q.delta, entries, cells: summaries })
}
