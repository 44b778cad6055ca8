//! Monte Carlo engine.
//!
//! Trials are split into fixed-size blocks, each with its own source and
//! noise streams. Per-block sums are reduced in block order, so results do
//! not depend on the number of workers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codec::{encode, Constellation, DigitalPair, EncoderParams, MapDecoder};
use crate::codec::scheme_b::reconstruct_scheme_b;
use crate::error::{Error, Result};
use crate::model::{sample_source_pair, ChannelModel, QuantizerSpec, SourceModel, User};
use crate::sim::rng::{block_rng, with_workers, Stream, TRIALS_PER_BLOCK};

/// Transmission schemes known to the simulator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Uncoded,
    SchemeA,
    SchemeB,
    SchemeBAnalytic,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Uncoded => "uncoded",
            Scheme::SchemeA => "scheme_a",
            Scheme::SchemeB => "scheme_b",
            Scheme::SchemeBAnalytic => "scheme_b_analytic",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uncoded" => Ok(Scheme::Uncoded),
            "scheme_a" => Ok(Scheme::SchemeA),
            "scheme_b" => Ok(Scheme::SchemeB),
            "scheme_b_analytic" => Ok(Scheme::SchemeBAnalytic),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Encoder parameters, quantizer and linear coefficients of an HDA scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdaSetup {
    pub params: EncoderParams,
    pub q: QuantizerSpec,
    pub gammas: [f64; 2],
}

/// Empirical distortion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McResult {
    pub d1: f64,
    pub d2: f64,
    pub d_avg: f64,
    /// Standard error of `d_avg` from the per-trial average errors.
    pub stderr_d: f64,
    pub trials: u64,
    /// Trials whose decoded digital pair differs from the true one.
    pub pair_errors: [u64; 2],
}

trait Receiver: Sync {
    fn encode(&self, user: User, s: f64) -> f64;
    /// Estimate and, for digital schemes, the decoded pair.
    fn decode(&self, user: User, y: f64) -> (f64, Option<DigitalPair>);
    fn quantizer(&self) -> Option<&QuantizerSpec>;
}

struct UncodedRx {
    scale: f64,
    coef: [f64; 2],
}

impl Receiver for UncodedRx {
    fn encode(&self, _: User, s: f64) -> f64 {
        self.scale * s
    }
    fn decode(&self, user: User, y: f64) -> (f64, Option<DigitalPair>) {
        (self.coef[user.index()] * y, None)
    }
    fn quantizer(&self) -> Option<&QuantizerSpec> {
        None
    }
}

struct SchemeBRx {
    setup: HdaSetup,
    ch: ChannelModel,
    rho: f64,
    cons: [Constellation; 2],
}

impl Receiver for SchemeBRx {
    fn encode(&self, user: User, s: f64) -> f64 {
        encode(s, user, &self.setup.params, &self.setup.q)
    }
    fn decode(&self, user: User, y: f64) -> (f64, Option<DigitalPair>) {
        let pair = self.cons[user.index()].decode(y, &self.setup.q);
        let g = self.setup.gammas[user.index()];
        (reconstruct_scheme_b(y, &pair, g, user, &self.setup.params, &self.ch, self.rho), Some(pair))
    }
    fn quantizer(&self) -> Option<&QuantizerSpec> {
        Some(&self.setup.q)
    }
}

struct SchemeARx {
    params: EncoderParams,
    q: QuantizerSpec,
    dec: [MapDecoder; 2],
}

impl Receiver for SchemeARx {
    fn encode(&self, user: User, s: f64) -> f64 {
        encode(s, user, &self.params, &self.q)
    }
    fn decode(&self, user: User, y: f64) -> (f64, Option<DigitalPair>) {
        let d = &self.dec[user.index()];
        let pair = d.decode(y);
        (d.reconstruct(y, &pair), Some(pair))
    }
    fn quantizer(&self) -> Option<&QuantizerSpec> {
        Some(&self.q)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct BlockStats {
    n: u64,
    sum1: f64,
    sum2: f64,
    sum_avg_sq: f64,
    pair_errors: [u64; 2],
}

/// Observer hook called with `(s1, s2, per-user pairs)` for each trial.
type Observer<'a> = &'a (dyn Fn(u64, f64, f64, [Option<DigitalPair>; 2]) + Sync);

fn run<R: Receiver>(
    rx: &R,
    source: &SourceModel,
    ch: &ChannelModel,
    trials: u64,
    seed: u64,
    observe: Option<Observer<'_>>,
) -> Result<McResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);
    let sigma = ch.sigma_w();
    let stats: Vec<BlockStats> = with_workers(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let n = TRIALS_PER_BLOCK.min(trials - b * TRIALS_PER_BLOCK);
                let mut src = block_rng(seed, b, Stream::Source);
                let mut n1 = block_rng(seed, b, Stream::Noise1);
                let mut n2 = block_rng(seed, b, Stream::Noise2);
                let mut st = BlockStats { n, ..Default::default() };
                for t in 0..n {
                    let (s1, s2) = sample_source_pair(source, &mut src);
                    let x1 = rx.encode(User::One, s1);
                    let x2 = rx.encode(User::Two, s2);
                    let w1: f64 = n1.sample(StandardNormal);
                    let w2: f64 = n2.sample(StandardNormal);
                    let y1 = x1 + ch.c2 * x2 + sigma * w1;
                    let y2 = x2 + ch.c1 * x1 + sigma * w2;
                    let (h1, p1) = rx.decode(User::One, y1);
                    let (h2, p2) = rx.decode(User::Two, y2);
                    let e1 = (s1 - h1) * (s1 - h1);
                    let e2 = (s2 - h2) * (s2 - h2);
                    st.sum1 += e1;
                    st.sum2 += e2;
                    let avg = 0.5 * (e1 + e2);
                    st.sum_avg_sq += avg * avg;
                    if let Some(q) = rx.quantizer() {
                        let (k1, k2) = (q.index(s1), q.index(s2));
                        if let Some(p) = p1 {
                            st.pair_errors[0] += u64::from((p.l, p.n) != (k1, k2));
                        }
                        if let Some(p) = p2 {
                            st.pair_errors[1] += u64::from((p.l, p.n) != (k2, k1));
                        }
                    }
                    if let Some(f) = observe {
                        f(b * TRIALS_PER_BLOCK + t, s1, s2, [p1, p2]);
                    }
                }
                st
            })
            .collect()
    });
    let mut total = BlockStats::default();
    for s in &stats {
        total.n += s.n;
        total.sum1 += s.sum1;
        total.sum2 += s.sum2;
        total.sum_avg_sq += s.sum_avg_sq;
        total.pair_errors[0] += s.pair_errors[0];
        total.pair_errors[1] += s.pair_errors[1];
    }
    let n = total.n as f64;
    let d1 = total.sum1 / n;
    let d2 = total.sum2 / n;
    let d_avg = 0.5 * (d1 + d2);
    let var = if total.n > 1 { ((total.sum_avg_sq / n - d_avg * d_avg) * n / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(McResult { d1, d2, d_avg, stderr_d: (var / n).sqrt(), trials: total.n, pair_errors: total.pair_errors })
}

/// LMMSE coefficient of the uncoded receiver `user`.
pub fn uncoded_coefficient(user: User, ch: &ChannelModel, rho: f64, power: f64) -> f64 {
    let g = ch.gain_into(user);
    power.sqrt() * (1.0 + g * rho) / (power * (1.0 + g * g + 2.0 * g * rho) + ch.sigma_w_sq)
}

pub fn simulate_uncoded(source: &SourceModel, ch: &ChannelModel, power: f64, trials: u64, seed: u64) -> Result<McResult> {
    if !(power > 0.0) {
        return Err(Error::InvalidParameter(format!("power must be positive, got {power}")));
    }
    let rx = UncodedRx {
        scale: power.sqrt(),
        coef: [
            uncoded_coefficient(User::One, ch, source.rho, power),
            uncoded_coefficient(User::Two, ch, source.rho, power),
        ],
    };
    run(&rx, source, ch, trials, seed, None)
}

fn scheme_b_rx(source: &SourceModel, ch: &ChannelModel, setup: &HdaSetup) -> SchemeBRx {
    SchemeBRx {
        setup: *setup,
        ch: *ch,
        rho: source.rho,
        cons: [
            Constellation::new(User::One, &setup.params, ch, &setup.q),
            Constellation::new(User::Two, &setup.params, ch, &setup.q),
        ],
    }
}

pub fn simulate_scheme_b(
    source: &SourceModel,
    ch: &ChannelModel,
    setup: &HdaSetup,
    trials: u64,
    seed: u64,
) -> Result<McResult> {
    run(&scheme_b_rx(source, ch, setup), source, ch, trials, seed, None)
}

pub fn simulate_scheme_a(
    source: &SourceModel,
    ch: &ChannelModel,
    setup: &HdaSetup,
    trials: u64,
    seed: u64,
) -> Result<McResult> {
    let rx = SchemeARx {
        params: setup.params,
        q: setup.q,
        dec: [
            MapDecoder::new(User::One, &setup.params, ch, &setup.q, source.rho),
            MapDecoder::new(User::Two, &setup.params, ch, &setup.q, source.rho),
        ],
    };
    run(&rx, source, ch, trials, seed, None)
}

/// Empirical counts of `(k, m, l, n)` at receiver `user` under pseudo-ML
/// decoding, with the same streams as [`simulate_scheme_b`].
pub fn pseudo_ml_histogram(
    source: &SourceModel,
    ch: &ChannelModel,
    setup: &HdaSetup,
    user: User,
    trials: u64,
    seed: u64,
) -> Result<BTreeMap<(i32, i32, i32, i32), u64>> {
    let rx = scheme_b_rx(source, ch, setup);
    let q = setup.q;
    let per_block: Vec<std::sync::Mutex<BTreeMap<(i32, i32, i32, i32), u64>>> =
        (0..trials.div_ceil(TRIALS_PER_BLOCK)).map(|_| Default::default()).collect();
    let observe = |t: u64, s1: f64, s2: f64, pairs: [Option<DigitalPair>; 2]| {
        let (si, sic) = match user {
            User::One => (s1, s2),
            User::Two => (s2, s1),
        };
        if let Some(p) = pairs[user.index()] {
            let key = (q.index(si), q.index(sic), p.l, p.n);
            let mut h = per_block[(t / TRIALS_PER_BLOCK) as usize].lock().expect("histogram lock");
            *h.entry(key).or_insert(0) += 1;
        }
    };
    run(&rx, source, ch, trials, seed, Some(&observe))?;
    let mut out = BTreeMap::new();
    for h in per_block {
        for (k, v) in h.into_inner().expect("histogram lock") {
            *out.entry(k).or_insert(0) += v;
        }
    }
    Ok(out)
}
