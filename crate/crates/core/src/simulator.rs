//! Monte Carlo oracle: the Brownian spider approximated by a spider random
//! walk on the lattice `h Z_+` of every leg, one step per `h^2` units of time.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diffusion::{SpiderModel, SpiderPoint};
use crate::error::{invalid, Result};
use crate::function::LegFunction;
use crate::osp::StoppingRegion;

/// Paths per RNG stream. Fixed so results do not depend on the thread count.
const CHUNK: usize = 512;
/// Fraction of censored paths above which the estimate is flagged.
const CENSOR_WARN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Spatial increment `h`.
    pub step: f64,
    pub paths: usize,
    /// Time cap; paths still running contribute 0.
    pub horizon: f64,
    pub seed: u64,
    /// Pairs each path with its mirror (complemented random bits).
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            paths: 200_000,
            horizon: 50.0,
            seed: 20_240_611,
            antithetic: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return invalid(format!("step must be positive, got {}", self.step));
        }
        if self.paths == 0 {
            return invalid("need at least one path");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return invalid(format!("horizon must be positive, got {}", self.horizon));
        }
        Ok(())
    }

    fn max_steps(&self) -> u64 {
        (self.horizon / (self.step * self.step)).ceil() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateWithError {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub std_error: f64,
    pub paths_used: usize,
    /// Independent samples behind `std_error`: antithetic pairs count once.
    pub samples: usize,
    pub censored_fraction: f64,
    /// More than 1% of paths hit the horizon.
    pub censor_warning: bool,
    /// Bound on the bias from censoring.
    pub censor_bias_bound: f64,
    /// Leg chosen at each vertex departure, per leg.
    pub leg_choices: Vec<u64>,
    pub notes: Vec<String>,
}

impl EstimateWithError {
    /// `|mean - target| / std_error`, infinite when the error is zero and the
    /// values differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Largest standardized deviation of the vertex leg frequencies from `p`.
    pub fn leg_choice_deviation(&self, p: &[f64]) -> f64 {
        let total: u64 = self.leg_choices.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let t = total as f64;
        self.leg_choices
            .iter()
            .zip(p)
            .map(|(&c, &pi)| {
                let sd = (t * pi * (1.0 - pi)).sqrt();
                if sd > 0.0 {
                    (c as f64 - t * pi).abs() / sd
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Stopping set on the lattice: per leg, closed integer ranges `[lo, hi]`.
#[derive(Debug, Clone)]
struct LatticeRegion {
    vertex: bool,
    legs: Vec<Vec<(i64, i64)>>,
}

impl LatticeRegion {
    fn from_region(region: &StoppingRegion, h: f64) -> Self {
        let legs = (1..=region.n())
            .map(|leg| {
                let mut out: Vec<(i64, i64)> = Vec::new();
                for &(a, b) in region.intervals(leg) {
                    let lo = ((a / h) - 1e-9).ceil().max(1.0) as i64;
                    let hi = if b.is_finite() {
                        ((b / h) + 1e-9).floor() as i64
                    } else {
                        i64::MAX
                    };
                    if lo <= hi {
                        out.push((lo, hi));
                    }
                }
                out
            })
            .collect();
        Self {
            vertex: region.vertex_included(),
            legs,
        }
    }

    fn contains(&self, k: i64, leg: usize) -> bool {
        if k == 0 {
            return self.vertex;
        }
        self.legs[leg - 1].iter().any(|&(lo, hi)| k >= lo && k <= hi)
    }

    /// Lattice distance from `k > 0` to the nearest site that ends a block:
    /// the vertex or the closest stopping site on either side.
    fn clearance(&self, k: i64, leg: usize) -> i64 {
        let mut d = k;
        for &(lo, hi) in &self.legs[leg - 1] {
            if lo > k {
                d = d.min(lo - k);
                break;
            }
            if hi < k {
                d = d.min(k - hi);
            }
        }
        d
    }
}

struct Walker<'a> {
    cum_p: &'a [f64],
    lattice: &'a LatticeRegion,
    max_steps: u64,
}

struct Outcome {
    leg: usize,
    k: i64,
    steps: u64,
    stopped: bool,
}

/// Random bits, optionally complemented for the antithetic partner.
struct Bits<'r> {
    rng: &'r mut ChaCha8Rng,
    flip: bool,
    tape: Vec<u64>,
    pos: usize,
}

impl Bits<'_> {
    fn next(&mut self) -> u64 {
        let w = if self.flip {
            let w = self.tape.get(self.pos).copied().unwrap_or_else(|| self.rng.next_u64());
            !w
        } else {
            let w = self.rng.next_u64();
            self.tape.push(w);
            w
        };
        self.pos += 1;
        w
    }

    fn uniform(&mut self) -> f64 {
        (self.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl Walker<'_> {
    fn choose_leg(&self, u: f64) -> usize {
        self.cum_p.iter().position(|&c| u < c).unwrap_or(self.cum_p.len() - 1) + 1
    }

    /// Runs until the lattice region is entered or the step budget is spent.
    fn run(&self, start: (i64, usize), bits: &mut Bits<'_>, choices: &mut [u64]) -> Outcome {
        let (mut k, mut leg) = start;
        let mut steps = 0u64;
        loop {
            if self.lattice.contains(k, leg) {
                return Outcome {
                    leg,
                    k,
                    steps,
                    stopped: true,
                };
            }
            if steps >= self.max_steps {
                return Outcome {
                    leg,
                    k,
                    steps,
                    stopped: false,
                };
            }
            if k == 0 {
                leg = self.choose_leg(bits.uniform());
                choices[leg - 1] += 1;
                k = 1;
                steps += 1;
                continue;
            }
            let m = self
                .lattice
                .clearance(k, leg)
                .min(64)
                .min((self.max_steps - steps) as i64);
            let w = bits.next();
            let ups = if m == 64 {
                w.count_ones()
            } else {
                (w & ((1u64 << m) - 1)).count_ones()
            } as i64;
            k += 2 * ups - m;
            steps += m as u64;
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
    samples: usize,
    paths: usize,
    censored: usize,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        Moments {
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            samples: self.samples + o.samples,
            paths: self.paths + o.paths,
            censored: self.censored + o.censored,
        }
    }
}

fn check_brownian(model: &SpiderModel) -> Result<()> {
    if !model.is_brownian() {
        return invalid("only Brownian legs are simulated");
    }
    Ok(())
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = p
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn snap(pt: &SpiderPoint, h: f64, what: &str, notes: &mut Vec<String>) -> (i64, usize) {
    if pt.is_vertex() {
        return (0, 1);
    }
    let k = (pt.x / h).round() as i64;
    if ((k as f64) * h - pt.x).abs() > 1e-9 * h.max(pt.x) {
        notes.push(format!("{what} {pt} snapped to lattice site {}", k as f64 * h));
    }
    (k, pt.leg)
}

/// Runs every path of `cfg`, scoring each outcome with `score` and pairing
/// antithetic partners when requested.
fn drive<S>(
    model: &SpiderModel,
    start: (i64, usize),
    lattice: &LatticeRegion,
    cfg: &SimConfig,
    score: S,
) -> (Moments, Vec<u64>)
where
    S: Fn(&Outcome) -> f64 + Sync,
{
    let cum_p = cumulative(model.probabilities());
    let walker = Walker {
        cum_p: &cum_p,
        lattice,
        max_steps: cfg.max_steps(),
    };
    let per_sample = if cfg.antithetic { 2 } else { 1 };
    let samples = cfg.paths.div_ceil(per_sample);
    let chunks = samples.div_ceil(CHUNK);
    let n = model.n();
    let parts: Vec<(Moments, Vec<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let mut m = Moments::default();
            let mut choices = vec![0u64; n];
            let count = CHUNK.min(samples - c * CHUNK);
            for _ in 0..count {
                let mut bits = Bits {
                    rng: &mut rng,
                    flip: false,
                    tape: Vec::new(),
                    pos: 0,
                };
                let o = walker.run(start, &mut bits, &mut choices);
                let mut v = score(&o);
                m.censored += usize::from(!o.stopped);
                m.paths += 1;
                if cfg.antithetic {
                    bits.flip = true;
                    bits.pos = 0;
                    let o2 = walker.run(start, &mut bits, &mut choices);
                    v = 0.5 * (v + score(&o2));
                    m.censored += usize::from(!o2.stopped);
                    m.paths += 1;
                }
                m.sum += v;
                m.sum_sq += v * v;
                m.samples += 1;
            }
            (m, choices)
        })
        .collect();
    // sequential merge in chunk order keeps the result bit-identical
    let mut total = Moments::default();
    let mut choices = vec![0u64; n];
    for (m, ch) in parts {
        total = total.merge(m);
        for (a, b) in choices.iter_mut().zip(ch) {
            *a += b;
        }
    }
    (total, choices)
}

fn finish(m: Moments, choices: Vec<u64>, bias: f64, notes: Vec<String>) -> EstimateWithError {
    let s = m.samples as f64;
    let mean = m.sum / s;
    let var = if m.samples > 1 {
        ((m.sum_sq - s * mean * mean) / (s - 1.0)).max(0.0)
    } else {
        0.0
    };
    let censored_fraction = m.censored as f64 / m.paths as f64;
    EstimateWithError {
        mean,
        std_error: (var / s).sqrt(),
        paths_used: m.paths,
        samples: m.samples,
        censored_fraction,
        censor_warning: censored_fraction > CENSOR_WARN,
        censor_bias_bound: bias,
        leg_choices: choices,
        notes,
    }
}

/// Estimates `E[exp(-r H) g(X_H)]`, `H` the first entry into `region`.
pub fn simulate_discounted_stop(
    model: &SpiderModel,
    start: &SpiderPoint,
    region: &StoppingRegion,
    payoff: &LegFunction,
    cfg: &SimConfig,
) -> Result<EstimateWithError> {
    check_brownian(model)?;
    cfg.validate()?;
    model.check_point(start)?;
    payoff.check_compatible(model)?;
    if region.n() != model.n() {
        return invalid(format!("region has {} legs, model has {}", region.n(), model.n()));
    }
    if region.is_empty() {
        return invalid("stopping region is empty");
    }
    if region.contains(start) {
        let v = payoff.eval(start);
        return Ok(finish(
            Moments {
                sum: v,
                sum_sq: v * v,
                samples: 1,
                paths: 1,
                censored: 0,
            },
            vec![0; model.n()],
            0.0,
            vec!["start lies in the stopping region".into()],
        ));
    }
    let h = cfg.step;
    let mut notes = Vec::new();
    let s = snap(start, h, "start", &mut notes);
    let lattice = LatticeRegion::from_region(region, h);
    let r = model.r();
    let dt = h * h;
    let (m, ch) = drive(model, s, &lattice, cfg, |o| {
        if o.stopped {
            (-r * dt * o.steps as f64).exp() * payoff.at(o.k as f64 * h, o.leg)
        } else {
            0.0
        }
    });
    // payoff sup over the sites a censored path can reach
    let reach = (cfg.max_steps() as f64).sqrt() * 6.0 * h + s.0 as f64 * h;
    let sup = (1..=model.n())
        .flat_map(|leg| (0..=40).map(move |j| (leg, reach * j as f64 / 40.0)))
        .map(|(leg, x)| payoff.at(x, leg).abs())
        .fold(0.0, f64::max);
    Ok(finish(m, ch, (-r * cfg.horizon).exp() * sup, notes))
}

/// Estimates `E[exp(-r H_target)]`.
pub fn simulate_hitting_laplace(
    model: &SpiderModel,
    start: &SpiderPoint,
    target: &SpiderPoint,
    cfg: &SimConfig,
) -> Result<EstimateWithError> {
    check_brownian(model)?;
    cfg.validate()?;
    model.check_point(start)?;
    model.check_point(target)?;
    let h = cfg.step;
    let mut notes = Vec::new();
    let t = snap(target, h, "target", &mut notes);
    let s = snap(start, h, "start", &mut notes);
    let lattice = if t.0 == 0 {
        LatticeRegion {
            vertex: true,
            legs: vec![Vec::new(); model.n()],
        }
    } else {
        let mut legs = vec![Vec::new(); model.n()];
        legs[t.1 - 1].push((t.0, t.0));
        LatticeRegion { vertex: false, legs }
    };
    if (s.0 == 0 && t.0 == 0) || s == t {
        return Ok(finish(
            Moments {
                sum: 1.0,
                sum_sq: 1.0,
                samples: 1,
                paths: 1,
                censored: 0,
            },
            vec![0; model.n()],
            0.0,
            notes,
        ));
    }
    let r = model.r();
    let dt = h * h;
    let (m, ch) = drive(model, s, &lattice, cfg, |o| {
        if o.stopped {
            (-r * dt * o.steps as f64).exp()
        } else {
            0.0
        }
    });
    Ok(finish(m, ch, (-r * cfg.horizon).exp(), notes))
}

/// Estimates `G_r f(start) = E int_0^inf exp(-r t) f(X_t) dt` up to the
/// horizon. The walk holds each site for `h^2`, so a site visited at step
/// `j` carries weight `exp(-r j h^2) (1 - exp(-r h^2)) / r`.
pub fn simulate_resolvent(
    model: &SpiderModel,
    start: &SpiderPoint,
    f: &LegFunction,
    cfg: &SimConfig,
) -> Result<EstimateWithError> {
    check_brownian(model)?;
    cfg.validate()?;
    model.check_point(start)?;
    f.check_compatible(model)?;
    let h = cfg.step;
    let mut notes = Vec::new();
    let (k0, leg0) = snap(start, h, "start", &mut notes);
    let r = model.r();
    let dt = h * h;
    let decay = (-r * dt).exp();
    let weight = -(-r * dt).exp_m1() / r;
    let max_steps = cfg.max_steps();
    let cum_p = cumulative(model.probabilities());
    let n = model.n();
    let per_sample = if cfg.antithetic { 2 } else { 1 };
    let samples = cfg.paths.div_ceil(per_sample);
    let chunks = samples.div_ceil(CHUNK);
    let f0 = f.at_vertex();

    let one_path = |bits: &mut Bits<'_>, choices: &mut [u64], sup: &mut f64| -> f64 {
        let (mut k, mut leg) = (k0, leg0);
        let mut disc = 1.0;
        let mut acc = 0.0;
        let mut word = 0u64;
        let mut left = 0u32;
        for _ in 0..max_steps {
            let v = if k == 0 { f0 } else { f.at(k as f64 * h, leg) };
            *sup = sup.max(v.abs());
            acc += disc * v;
            disc *= decay;
            if k == 0 {
                let u = bits.uniform();
                leg = cum_p.iter().position(|&c| u < c).unwrap_or(n - 1) + 1;
                choices[leg - 1] += 1;
                k = 1;
            } else {
                if left == 0 {
                    word = bits.next();
                    left = 64;
                }
                k += if word & 1 == 1 { 1 } else { -1 };
                word >>= 1;
                left -= 1;
            }
        }
        acc * weight
    };

    let parts: Vec<(Moments, Vec<u64>, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let mut m = Moments::default();
            let mut choices = vec![0u64; n];
            let mut sup = 0.0f64;
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let mut bits = Bits {
                    rng: &mut rng,
                    flip: false,
                    tape: Vec::new(),
                    pos: 0,
                };
                let mut v = one_path(&mut bits, &mut choices, &mut sup);
                m.paths += 1;
                if cfg.antithetic {
                    bits.flip = true;
                    bits.pos = 0;
                    v = 0.5 * (v + one_path(&mut bits, &mut choices, &mut sup));
                    m.paths += 1;
                }
                m.sum += v;
                m.sum_sq += v * v;
                m.samples += 1;
            }
            (m, choices, sup)
        })
        .collect();
    let mut total = Moments::default();
    let mut choices = vec![0u64; n];
    let mut sup = 0.0f64;
    for (m, ch, s) in parts {
        total = total.merge(m);
        sup = sup.max(s);
        for (a, b) in choices.iter_mut().zip(ch) {
            *a += b;
        }
    }
    // every path runs to the horizon; the tail beyond it is the bias
    total.censored = 0;
    Ok(finish(total, choices, (-r * cfg.horizon).exp() * sup / r, notes))
}

/// Runs `paths` independent vertex departures and returns the leg counts.
pub fn vertex_leg_frequencies(model: &SpiderModel, draws: usize, seed: u64) -> Vec<u64> {
    let cum_p = cumulative(model.probabilities());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; model.n()];
    for _ in 0..draws {
        let u: f64 = rng.random();
        counts[cum_p.iter().position(|&c| u < c).unwrap_or(model.n() - 1)] += 1;
    }
    counts
}
