//! Monte-Carlo oracles for the law of I_Ψ: discretised path integrals and
//! exact samplers for factorised laws.

use crate::bernstein::{BernsteinFunction, PhiKind};
use crate::error::{Error, Result};
use crate::levy::{Dynamics, LevyExponent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Path-simulation settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathSimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Combine steps dt and dt/2 as 2·I(dt/2) − I(dt).
    pub richardson: bool,
    /// A path stops once e^{−ξ_t} falls below this fraction of the running
    /// integral; the neglected remainder is of that relative order.
    pub tail_rel: f64,
}

impl PathSimConfig {
    pub fn new(dt: f64, n_samples: usize, seed: u64) -> Self {
        PathSimConfig { dt, t_max: 1e3, n_samples, seed, richardson: true, tail_rel: 1e-4 }
    }
}

/// Summary statistics of a sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    /// Standard error of the mean.
    pub se: f64,
    /// (level, value) pairs.
    pub quantiles: Vec<(f64, f64)>,
}

/// Draws of I_Ψ with their summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub summary: Summary,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

impl SampleSet {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        let nf = n as f64;
        let mean = pairwise_sum(&values) / nf;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (nf - 1.0) } else { 0.0 };
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let quantiles = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99]
            .iter()
            .map(|&p| {
                let i = ((p * nf).ceil() as usize).clamp(1, n.max(1)) - 1;
                (p, sorted.get(i).copied().unwrap_or(f64::NAN))
            })
            .collect();
        SampleSet { values, summary: Summary { n, mean, var, se: (var / nf).sqrt(), quantiles } }
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut s = self.values.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

fn exp1<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Positive α-stable variable with E e^{−λS} = e^{−λ^α} (Kanter's representation).
fn positive_stable<R: Rng>(rng: &mut R, alpha: f64) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0) * PI;
    let e: f64 = exp1(rng);
    let a = ((alpha * u).sin().powf(alpha) * ((1.0 - alpha) * u).sin().powf(1.0 - alpha) / u.sin())
        .powf(1.0 / (1.0 - alpha));
    (a / e).powf((1.0 - alpha) / alpha)
}

/// Exact increment generator for one path.
struct Stepper<'a> {
    dyn_: &'a Dynamics,
    next_up: f64,
    next_down: f64,
    rate_up: f64,
    rate_down: f64,
}

impl<'a> Stepper<'a> {
    fn new<R: Rng>(dyn_: &'a Dynamics, rng: &mut R) -> Self {
        let rate_up: f64 = dyn_.pos_jumps.iter().map(|j| j.0).sum();
        let rate_down: f64 = dyn_.neg_jumps.iter().map(|j| j.0).sum();
        let clock = |r: f64, rng: &mut R| {
            if r > 0.0 {
                exp1(rng) / r
            } else {
                f64::INFINITY
            }
        };
        let next_up = clock(rate_up, rng);
        let next_down = clock(rate_down, rng);
        Stepper { dyn_, next_up, next_down, rate_up, rate_down }
    }

    fn jump<R: Rng>(list: &[(f64, f64)], total: f64, rng: &mut R) -> f64 {
        let mut pick = rng.gen::<f64>() * total;
        for &(lam, rho) in list {
            if pick < lam {
                return exp1(rng) / rho;
            }
            pick -= lam;
        }
        let (_, rho) = list[list.len() - 1];
        exp1(rng) / rho
    }

    /// ξ_{t+len} − ξ_t.
    fn increment<R: Rng>(&mut self, rng: &mut R, t: f64, len: f64, sqrt_len: f64) -> Result<f64> {
        let d = self.dyn_;
        let mut dx = d.drift * len;
        if d.sigma2 > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            dx += d.sigma2.sqrt() * sqrt_len * z;
        }
        if let Some((c, theta)) = d.gamma_sub {
            let g = Gamma::new(c * len, 1.0 / theta).map_err(|e| Error::Param(e.to_string()))?;
            dx += g.sample(rng);
        }
        if let Some((alpha, k)) = d.stable_sub {
            dx += (k * len).powf(1.0 / alpha) * positive_stable(rng, alpha);
        }
        let end = t + len;
        while self.next_up <= end {
            dx += Self::jump(&d.pos_jumps, self.rate_up, rng);
            self.next_up += exp1(rng) / self.rate_up;
        }
        while self.next_down <= end {
            dx -= Self::jump(&d.neg_jumps, self.rate_down, rng);
            self.next_down += exp1(rng) / self.rate_down;
        }
        Ok(dx)
    }
}

/// One draw of the trapezoid approximation, Richardson-combined if requested.
fn simulate_one(d: &Dynamics, cfg: &PathSimConfig, index: u64) -> Result<f64> {
    let mut rng = sample_rng(cfg.seed, index);
    let kill_at = if d.kill > 0.0 { exp1(&mut rng) / d.kill } else { f64::INFINITY };
    let end = kill_at.min(cfg.t_max);
    let h = if cfg.richardson { 0.5 * cfg.dt } else { cfg.dt };
    let sqrt_h = h.sqrt();
    let mut stepper = Stepper::new(d, &mut rng);
    let (mut t, mut x) = (0.0f64, 0.0f64);
    let mut e_prev = 1.0;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    let mut e_even = 1.0;
    let mut k = 0usize;
    loop {
        let rem = end - t;
        if rem <= 0.0 {
            break;
        }
        let full = rem > h;
        let len = if full { h } else { rem };
        x += stepper.increment(&mut rng, t, len, if full { sqrt_h } else { len.sqrt() })?;
        let e = (-x).exp();
        fine += 0.5 * len * (e_prev + e);
        if full {
            k += 1;
            t = k as f64 * h;
            if k.is_multiple_of(2) {
                coarse += h * (e_even + e);
                e_even = e;
            }
        } else {
            let span = if k.is_multiple_of(2) { len } else { h + len };
            coarse += 0.5 * span * (e_even + e);
            t = end;
        }
        e_prev = e;
        if full && k.is_multiple_of(2) && e < cfg.tail_rel * fine {
            return Ok(if cfg.richardson { 2.0 * fine - coarse } else { fine });
        }
    }
    if kill_at > cfg.t_max && !(e_prev < 1e-4 * fine) {
        return Err(Error::Horizon(format!(
            "path {index} not settled by t_max = {}: e^-xi = {e_prev:e}, integral {fine:e}",
            cfg.t_max
        )));
    }
    Ok(if cfg.richardson { 2.0 * fine - coarse } else { fine })
}

/// Discretised draws of I_Ψ for families with exact increment samplers.
pub fn simulate_i(l: &LevyExponent, cfg: &PathSimConfig) -> Result<SampleSet> {
    let d = l
        .dynamics
        .as_ref()
        .ok_or_else(|| Error::UnsupportedFamily(format!("{} has no exact increment sampler", l.id)))?;
    if !(cfg.dt > 0.0 && cfg.t_max > 0.0 && cfg.n_samples > 0) {
        return Err(Error::Param("dt, t_max and n_samples must be positive".into()));
    }
    let values = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| simulate_one(d, cfg, i))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleSet::from_values(values))
}

/// φ = c Π(z + zeros)/Π(z + poles), when φ has that shape.
fn rational_data(phi: &BernsteinFunction) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    match phi.kind() {
        PhiKind::Constant { c } => Some((*c, vec![], vec![])),
        PhiKind::Affine { q, d } if *d > 0.0 => Some((*d, vec![q / d], vec![])),
        PhiKind::Affine { q, .. } => Some((*q, vec![], vec![])),
        PhiKind::Rational { c, zeros, poles } => Some((*c, zeros.clone(), poles.clone())),
        _ => None,
    }
}

/// A factor of the product law.
#[derive(Clone, Copy, Debug)]
enum Factor {
    /// Beta(a, b − a), or its reciprocal.
    Beta { a: f64, b: f64, inverse: bool },
    /// Gamma(a, 1), or its reciprocal.
    Gamma { a: f64, inverse: bool },
}

/// Matched (numerator, denominator) pairs and an optional unpaired numerator.
type Interlaced = (Vec<(f64, f64)>, Option<f64>);

/// Pairs sorted numerator/denominator Γ-arguments that interlace as
/// a₁ ≤ b₁ < a₂ ≤ b₂ < …; an unpaired last numerator becomes a Gamma factor.
fn interlace(a: &[f64], b: &[f64]) -> Option<Interlaced> {
    if !(a.len() == b.len() || a.len() == b.len() + 1) {
        return None;
    }
    let mut pairs = Vec::with_capacity(b.len());
    for (i, (&ai, &bi)) in a.iter().zip(b).enumerate() {
        if ai > bi || (i + 1 < a.len() && a[i + 1] <= bi) {
            return None;
        }
        pairs.push((ai, bi));
    }
    Some((pairs, if a.len() > b.len() { a.last().copied() } else { None }))
}

/// Exact product law of I_Ψ when both Wiener–Hopf factors are rational.
struct ProductLaw {
    scale: f64,
    factors: Vec<Factor>,
}

impl ProductLaw {
    fn new(l: &LevyExponent) -> Result<Self> {
        let unsupported = || Error::UnsupportedFamily(format!("{} has no finite Beta-product law", l.id));
        let (cp, zp, pp) = rational_data(l.phi_plus()).ok_or_else(unsupported)?;
        let (cm, zm, pm) = rational_data(l.phi_minus()).ok_or_else(unsupported)?;
        let sorted = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v
        };
        let mut factors = Vec::new();
        // Γ(z)/W₊(z): numerator arguments {0} ∪ poles, denominator zeros.
        let mut num = vec![0.0];
        num.extend(pp);
        let (pairs, extra) = interlace(&sorted(num), &sorted(zp)).ok_or_else(unsupported)?;
        for (a, b) in pairs {
            if b > a {
                factors.push(Factor::Beta { a: 1.0 + a, b: 1.0 + b, inverse: false });
            }
        }
        if let Some(a) = extra {
            factors.push(Factor::Gamma { a: 1.0 + a, inverse: false });
        }
        // φ₋(0)W₋(1−z): Γ(ζ+1−z)/Γ(ζ) over zeros ζ, divided by the same over poles.
        let (pairs, extra) = interlace(&sorted(zm), &sorted(pm)).ok_or_else(unsupported)?;
        for (a, b) in pairs {
            if !(a > 0.0) {
                return Err(unsupported());
            }
            if b > a {
                factors.push(Factor::Beta { a, b, inverse: true });
            }
        }
        if let Some(a) = extra {
            if !(a > 0.0) {
                return Err(unsupported());
            }
            factors.push(Factor::Gamma { a, inverse: true });
        }
        Ok(ProductLaw { scale: 1.0 / (cp * cm), factors })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Result<f64> {
        let mut v = self.scale;
        for f in &self.factors {
            let (x, inv) = match *f {
                Factor::Beta { a, b, inverse } => {
                    let d = Beta::new(a, b - a).map_err(|e| Error::Param(e.to_string()))?;
                    (d.sample(rng), inverse)
                }
                Factor::Gamma { a, inverse } => {
                    let d = Gamma::new(a, 1.0).map_err(|e| Error::Param(e.to_string()))?;
                    (d.sample(rng), inverse)
                }
            };
            v *= if inv { 1.0 / x } else { x };
        }
        Ok(v)
    }
}

/// Exact draws for models whose factors are affine or rational: killed drift,
/// Brownian motion with drift and killing, hyper-exponential processes.
pub fn sample_factorized(l: &LevyExponent, n: usize, seed: u64) -> Result<SampleSet> {
    let law = ProductLaw::new(l)?;
    let values = (0..n as u64)
        .into_par_iter()
        .map(|i| law.draw(&mut sample_rng(seed, i)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleSet::from_values(values))
}

/// Kolmogorov–Smirnov distance between two samples (sorted or not).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// KS distance between a sample and a CDF evaluated at `probes` empirical
/// quantiles. Exact when `cdf` is cheap and `probes ≥ n`; otherwise the true
/// sup lies within 1/probes of the returned value.
pub fn ks_vs_cdf<F: Fn(f64) -> Result<f64> + Sync>(samples: &[f64], cdf: F, probes: usize) -> Result<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    let step = (n / probes.max(1)).max(1);
    let idx: Vec<usize> = (0..n).step_by(step).chain(std::iter::once(n - 1)).collect();
    let d = idx
        .par_iter()
        .map(|&i| {
            let f = cdf(s[i])?;
            let hi = s.partition_point(|&v| v <= s[i]) as f64 / n as f64;
            let lo = s.partition_point(|&v| v < s[i]) as f64 / n as f64;
            Ok((f - hi).abs().max((f - lo).abs()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_drift_is_one() {
        let l = LevyExponent::killed_drift(0.0, 1.0).unwrap();
        let s = simulate_i(&l, &PathSimConfig::new(1e-2, 20, 1)).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 2e-4), "{:?}", &s.values[..3]);
    }

    #[test]
    fn stable_sampler_laplace() {
        let mut rng = sample_rng(3, 0);
        let n = 200_000;
        let m: f64 = (0..n).map(|_| (-positive_stable(&mut rng, 0.5)).exp()).sum::<f64>() / n as f64;
        assert!((m - (-1.0f64).exp()).abs() < 5e-3, "{m}");
    }

    #[test]
    fn factorized_laws_match_closed_forms() {
        let k = LevyExponent::killed_drift(2.5, 1.0).unwrap();
        let s = sample_factorized(&k, 50_000, 7).unwrap();
        let ks = ks_vs_cdf(&s.values, |x| Ok(1.0 - (1.0 - x).powf(2.5)), 50_000).unwrap();
        assert!(ks < 3.0 / (50_000f64).sqrt(), "{ks}");
        let d = LevyExponent::dufresne(1.0).unwrap();
        let s = sample_factorized(&d, 50_000, 7).unwrap();
        let ks = ks_vs_cdf(&s.values, |x| Ok((-0.5 / x).exp()), 50_000).unwrap();
        assert!(ks < 3.0 / (50_000f64).sqrt(), "{ks}");
    }

    #[test]
    fn determinism_across_pools() {
        let l = LevyExponent::brownian(1.0, 2.0, 0.3).unwrap();
        let cfg = PathSimConfig::new(1e-2, 64, 11);
        let a = simulate_i(&l, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate_i(&l, &cfg).unwrap());
        assert_eq!(a, b);
    }
}
