//! Sorted distance sets between noiseless received values.

use std::collections::BTreeSet;

use crate::codec::scheme_b::{Constellation, MERGE_TOL};
use crate::codec::EncoderParams;
use crate::error::{Error, Result};
use crate::model::{ChannelModel, QuantizerSpec, User};
use crate::numerics::window::WINDOW_INFINITY;

/// One distance `(p α_i + q c α_ic)Δ` with the generators that own it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceEntry {
    pub value: f64,
    pub p: i32,
    pub q: i32,
}

/// Strictly ascending distances truncated to `±bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstellationTable {
    pub distances: Vec<DistanceEntry>,
    pub bound: f64,
}

/// Truncation radius `2 (5σ_W + (|β_i| + c |β_ic|) Δ / 2)`.
pub fn distance_bound(user: User, params: &EncoderParams, ch: &ChannelModel, q: &QuantizerSpec) -> f64 {
    let g = ch.gain_into(user);
    let analog = params.beta(user).abs() + g * params.beta(user.other()).abs();
    2.0 * (5.0 * ch.sigma_w() + analog * q.delta / 2.0)
}

fn generator_key(e: &DistanceEntry) -> (i32, i32, i32, i32) {
    (e.p.abs(), e.q.abs(), e.p, e.q)
}

/// Every distance between two feasible index pairs, i.e. all `(p, q)` with
/// `|m - k| <= M` and `|(m + q) - (k + p)| <= M` for some admissible `(k, m)`.
pub fn build_distance_set(
    user: User,
    params: &EncoderParams,
    ch: &ChannelModel,
    q: &QuantizerSpec,
    m: i32,
) -> Result<ConstellationTable> {
    let ai = params.alpha(user) * q.delta;
    let bi = ch.gain_into(user) * params.alpha(user.other()) * q.delta;
    let bound = distance_bound(user, params, ch, q);
    let k = q.k_max;
    let feasible = |a: i32, b: i32| a.abs() <= k && b.abs() <= k && (b - a).abs() <= m;
    let mut gens = BTreeSet::new();
    for p in -2 * k..=2 * k {
        for qq in -2 * k..=2 * k {
            let reachable = (-k..=k).any(|kk| {
                ((kk - m).max(-k)..=(kk + m).min(k)).any(|mm| feasible(kk, mm) && feasible(kk + p, mm + qq))
            });
            if reachable {
                gens.insert((p, qq));
            }
        }
    }
    let mut raw: Vec<DistanceEntry> = gens
        .into_iter()
        .map(|(p, qq)| DistanceEntry { value: ai * p as f64 + bi * qq as f64, p, q: qq })
        .filter(|e| e.value.abs() <= bound)
        .collect();
    raw.sort_by(|a, b| a.value.total_cmp(&b.value).then(generator_key(a).cmp(&generator_key(b))));
    let distances = merge(raw);
    if distances.is_empty() {
        return Err(Error::InvalidParameter("empty distance set".into()));
    }
    Ok(ConstellationTable { distances, bound })
}

fn merge(sorted: Vec<DistanceEntry>) -> Vec<DistanceEntry> {
    let mut out: Vec<DistanceEntry> = Vec::with_capacity(sorted.len());
    let mut last = f64::NEG_INFINITY;
    for e in sorted {
        match out.last_mut() {
            Some(owner) if e.value - last <= MERGE_TOL => {
                if generator_key(&e) < generator_key(owner) {
                    *owner = e;
                }
            }
            _ => out.push(e),
        }
        last = e.value;
    }
    out
}

/// Index range of the constellation points kept for the true pair whose
/// noiseless value is `center`: all points within `±bound`, plus the nearest
/// point on a side that would otherwise be empty.
pub fn pair_window(points: &Constellation, center: f64, bound: f64) -> std::ops::Range<usize> {
    let pts = points.points();
    let mut lo = pts.partition_point(|p| p.value < center - bound);
    let mut hi = pts.partition_point(|p| p.value <= center + bound);
    let split = pts.partition_point(|p| p.value < center);
    // Below `center`: indices lo..split; at or above: split..hi.
    if lo >= split && split > 0 && (split == pts.len() || pts[split].value > center + MERGE_TOL) {
        lo = split - 1;
    }
    if hi <= split && split < pts.len() {
        hi = split + 1;
    }
    lo.min(hi)..hi
}

impl ConstellationTable {
    /// Distances seen from the true pair `(k, m)`, with the generators being
    /// the index offsets to each decoded pair.
    pub fn for_pair(points: &Constellation, k: i32, m: i32, center: f64, bound: f64) -> Self {
        let pts = points.points();
        let distances = pts[pair_window(points, center, bound)]
            .iter()
            .map(|p| DistanceEntry { value: p.value - center, p: p.l - k, q: p.n - m })
            .collect();
        Self { distances, bound }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.distances.iter().map(|e| e.value)
    }
}

/// Predecessor and successor of `d`, with `∓WINDOW_INFINITY` at the ends.
pub fn neighbor_distances(table: &ConstellationTable, d: f64) -> Result<(f64, f64)> {
    let ds = &table.distances;
    let j = ds.partition_point(|e| e.value < d - MERGE_TOL);
    if j == ds.len() || (ds[j].value - d).abs() > MERGE_TOL {
        return Err(Error::DistanceNotFound(d));
    }
    let lower = if j == 0 { -WINDOW_INFINITY } else { ds[j - 1].value };
    let upper = if j + 1 == ds.len() { WINDOW_INFINITY } else { ds[j + 1].value };
    Ok((lower, upper))
}
