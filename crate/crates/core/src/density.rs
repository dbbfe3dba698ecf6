//! Density, distribution function and survival function of I_Ψ by Mellin
//! inversion, plus the one-sided series, the small-x expansion and
//! integral-equation residuals.

use crate::error::{Error, Result};
use crate::levy::{LevyExponent, Support};
use crate::lgamma::{gamma, ln_gamma_real};
use crate::mellin::MellinObject;
use crate::quad::{adaptive, adaptive_raw, half_line, wynn_epsilon, Tol};
use crate::bernstein::PhiKind;
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;

/// Controls for the line integrals.
#[derive(Clone, Copy, Debug)]
pub struct InversionPolicy {
    /// Target relative accuracy.
    pub tol: f64,
    /// Forced abscissa of the contour; the real saddle is used otherwise.
    pub line: Option<f64>,
    /// Largest |Im z| reached before giving up.
    pub b_cap: f64,
    pub max_blocks: usize,
}

impl Default for InversionPolicy {
    fn default() -> Self {
        InversionPolicy { tol: 1e-9, line: None, b_cap: 1e6, max_blocks: 20_000 }
    }
}

impl InversionPolicy {
    pub fn with_tol(tol: f64) -> Self {
        InversionPolicy { tol, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Inversion,
    ClosedForm,
    Series,
    Asymptotic,
    /// Outside the support, where the value is known exactly.
    Support,
}

/// A computed value with its error estimate and provenance.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
    pub method: Method,
    /// Abscissa of the inversion contour.
    pub line: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesRegime {
    Convergent,
    Asymptotic,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Size of the first omitted term, or a ratio-test tail bound.
    pub err: f64,
    pub terms: usize,
    pub regime: SeriesRegime,
    pub warning: Option<String>,
}

/// ∫₀^∞ g(b) db for an integrand oscillating like e^{−ib ω}: blocks of one
/// half period, partial sums of the real part accelerated by Wynn's epsilon.
fn line_integral<G: FnMut(f64) -> Result<C>>(mut g: G, omega: f64, pol: &InversionPolicy) -> Result<(f64, f64)> {
    let h = PI / omega.max(0.05);
    let sub = h.min(PI);
    let nsub = (h / sub).ceil() as usize;
    let mut sums: Vec<C> = Vec::new();
    let mut total: f64 = 0.0;
    let mut quad_err = 0.0;
    let mut quiet = 0;
    let mut last_wynn: Option<f64> = None;
    let mut fail = None;
    let mut b = 0.0;
    for k in 0..pol.max_blocks {
        if b > pol.b_cap {
            break;
        }
        let mut block: f64 = 0.0;
        for j in 0..nsub {
            let lo = b + j as f64 * h / nsub as f64;
            let hi = b + (j + 1) as f64 * h / nsub as f64;
            let scale = total.abs().max(block.abs());
            let tol = if k == 0 && j == 0 {
                Tol::new(0.05 * pol.tol, 0.0)
            } else {
                Tol::new(0.05 * pol.tol, 0.01 * pol.tol * scale)
            };
            let r = adaptive_raw(
                |t: f64| match g(t) {
                    Ok(v) => v.re,
                    Err(e) => {
                        fail.get_or_insert(e);
                        0.0
                    }
                },
                lo,
                hi,
                tol,
                400,
            );
            if let Some(e) = fail.take() {
                return Err(e);
            }
            block += r.value;
            quad_err += r.error;
        }
        b += h;
        total += block;
        sums.push(C::new(total, 0.0));
        let target = pol.tol * total.abs();
        if block.abs() <= 0.01 * target {
            quiet += 1;
            if quiet >= 3 {
                return Ok((total, quad_err + block.abs()));
            }
        } else {
            quiet = 0;
        }
        if sums.len() >= 6 {
            let from = sums.len().saturating_sub(30);
            let (v, e) = wynn_epsilon(&sums[from..]);
            let v = v.re;
            if let Some(prev) = last_wynn {
                let spread = (v - prev).abs().max(e);
                if spread <= target && v.is_finite() {
                    return Ok((v, spread + quad_err));
                }
            }
            last_wynn = Some(v);
        }
    }
    Err(Error::Truncation(format!(
        "line integral not converged by |Im z| = {b:.3e} (partial value {total:e})"
    )))
}

/// Minimiser of a unimodal function on [lo, hi] by golden section; failed
/// evaluations count as +∞.
fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if (b - a).abs() < 1e-7 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn clip_interval(lo: f64, hi: f64) -> (f64, f64) {
    const REACH: f64 = 60.0;
    let (lo_f, hi_f) = (lo.max(-REACH), hi.min(REACH));
    let w = (hi_f - lo_f).max(0.0);
    let d = 1e-3 * w.min(1.0);
    let lo2 = if lo.is_finite() && lo >= -REACH { lo + d } else { lo_f };
    let hi2 = if hi.is_finite() && hi <= REACH { hi - d } else { hi_f };
    (lo2, hi2)
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// ln |(a)_n|.
fn ln_poch_abs(a: f64, n: usize) -> f64 {
    (0..n).map(|j| (a + j as f64).abs().ln()).sum()
}

fn poch(z: C, n: usize) -> C {
    (0..n).fold(C::new(1.0, 0.0), |p, j| p * (z + j as f64))
}

fn support_bounds(l: &LevyExponent) -> Result<(f64, f64)> {
    match l.support() {
        Support::Point { at } => Err(Error::Domain(format!("the law is the point mass at {at}: no density"))),
        Support::Interval { lo, hi } => Ok((lo, hi)),
    }
}

/// f^{(n)}(x) by inversion along Re z = a.
pub fn density(m: &MellinObject, x: f64, n: usize, pol: &InversionPolicy) -> Result<Estimate> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    let l = m.levy();
    let np = l.n_psi()?;
    if !((n as f64) + 1.0 < np) {
        return Err(Error::Smoothness(format!(
            "derivative of order {n} needs N_Psi > {}, got {np}",
            n + 1
        )));
    }
    let (slo, shi) = support_bounds(l)?;
    if x <= slo || x >= shi {
        return Ok(Estimate { value: 0.0, err: 0.0, method: Method::Support, line: None });
    }
    let lx = x.ln();
    let (lo, hi) = m.strip();
    let a = match pol.line {
        Some(a) => a,
        None => {
            let (l0, h0) = clip_interval(lo, hi);
            golden_min(
                |a| match m.ln_eval(C::new(a, 0.0)) {
                    Ok(v) => finite_or_inf(v.re + ln_poch_abs(a, n) - (a + n as f64) * lx),
                    Err(_) => f64::INFINITY,
                },
                l0,
                h0,
            )
        }
    };
    let (v, e) = line_integral(
        |b| {
            let z = C::new(a, b);
            let lm = m.ln_eval(z)?;
            Ok((lm - (z + n as f64) * lx).exp() * poch(z, n))
        },
        lx.abs(),
        pol,
    )?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(Estimate { value: sign * v / PI, err: e / PI, method: Method::Inversion, line: Some(a) })
}

/// F(x) = (1/2πi) ∫ x^{1−w} M(w)/(1−w) dw over 0 < Re w < 1.
pub fn cdf(m: &MellinObject, x: f64, pol: &InversionPolicy) -> Result<Estimate> {
    if !(x > 0.0) {
        return Ok(Estimate { value: 0.0, err: 0.0, method: Method::Support, line: None });
    }
    let l = m.levy();
    if let Support::Point { at } = l.support() {
        let v = if x >= at { 1.0 } else { 0.0 };
        return Ok(Estimate { value: v, err: 0.0, method: Method::ClosedForm, line: None });
    }
    let (slo, shi) = support_bounds(l)?;
    if x <= slo {
        return Ok(Estimate { value: 0.0, err: 0.0, method: Method::Support, line: None });
    }
    if x >= shi {
        return Ok(Estimate { value: 1.0, err: 0.0, method: Method::Support, line: None });
    }
    let (lo, hi) = m.strip();
    let lx = x.ln();
    let a = match pol.line {
        Some(a) => a,
        None => {
            let (l0, h0) = clip_interval(lo.max(0.0), hi.min(1.0));
            golden_min(
                |a| match m.ln_eval(C::new(a, 0.0)) {
                    Ok(v) => finite_or_inf(v.re + (1.0 - a) * lx - (1.0 - a).ln()),
                    Err(_) => f64::INFINITY,
                },
                l0,
                h0,
            )
        }
    };
    let (v, e) = line_integral(
        |b| {
            let w = C::new(a, b);
            let lm = m.ln_eval(w)?;
            Ok((lm + (1.0 - w) * lx).exp() / (1.0 - w))
        },
        lx.abs(),
        pol,
    )?;
    Ok(Estimate { value: v / PI, err: e / PI, method: Method::Inversion, line: Some(a) })
}

/// P(I > x), integrating over 1 < Re w < 1 − ā₋ when that strip exists.
pub fn survival(m: &MellinObject, x: f64, pol: &InversionPolicy) -> Result<Estimate> {
    let l = m.levy();
    if let Support::Point { at } = l.support() {
        let v = if x >= at { 0.0 } else { 1.0 };
        return Ok(Estimate { value: v, err: 0.0, method: Method::ClosedForm, line: None });
    }
    let (slo, shi) = support_bounds(l)?;
    if x <= slo.max(0.0) {
        return Ok(Estimate { value: 1.0, err: 0.0, method: Method::Support, line: None });
    }
    if x >= shi {
        return Ok(Estimate { value: 0.0, err: 0.0, method: Method::Support, line: None });
    }
    let (_, hi) = m.strip();
    if !(hi > 1.0) {
        let f = cdf(m, x, pol)?;
        return Ok(Estimate { value: 1.0 - f.value, ..f });
    }
    let lx = x.ln();
    let a = match pol.line {
        Some(a) if a > 1.0 => a,
        _ => {
            let (l0, h0) = clip_interval(1.0, hi);
            golden_min(
                |a| match m.ln_eval(C::new(a, 0.0)) {
                    Ok(v) => finite_or_inf(v.re + (1.0 - a) * lx - (a - 1.0).ln()),
                    Err(_) => f64::INFINITY,
                },
                l0,
                h0,
            )
        }
    };
    let (v, e) = line_integral(
        |b| {
            let w = C::new(a, b);
            let lm = m.ln_eval(w)?;
            Ok((lm + (1.0 - w) * lx).exp() / (w - 1.0))
        },
        lx.abs(),
        pol,
    )?;
    Ok(Estimate { value: v / PI, err: e / PI, method: Method::Inversion, line: Some(a) })
}

/// Density on a grid, evaluated in parallel. Small negative values within
/// the error estimate are clamped to zero.
pub fn density_grid(m: &MellinObject, xs: &[f64], n: usize, pol: &InversionPolicy) -> Vec<Result<Estimate>> {
    use rayon::prelude::*;
    xs.par_iter()
        .map(|&x| {
            density(m, x, n, pol).map(|e| {
                if n == 0 && e.value < 0.0 && -e.value <= 10.0 * (e.err + pol.tol) {
                    Estimate { value: 0.0, err: e.err + e.value.abs(), ..e }
                } else {
                    e
                }
            })
        })
        .collect()
}

/// (q, d) when φ₋(z) = q + dz exactly with d > 0.
fn phi_minus_affine(l: &LevyExponent) -> Option<(f64, f64)> {
    match l.phi_minus().kind() {
        PhiKind::Affine { q, d } if *d > 0.0 => Some((*q, *d)),
        PhiKind::Rational { c, zeros, poles } if zeros.len() == 1 && poles.is_empty() => Some((c * zeros[0], *c)),
        _ => None,
    }
}

/// Series for spectrally positive processes:
/// f(x) = Σ (−1)ⁿ x^{γ−1−n} d^{γ−n} Γ(n+1−γ)/(n! Γ(−γ) W_{φ₊}(n+1−γ)),
/// with φ₋(z) = d(z − γ).
pub fn density_series_spectrally_positive(m: &MellinObject, x: f64, n_terms: usize) -> Result<SeriesValue> {
    let l = m.levy();
    let (q, d) = phi_minus_affine(l)
        .ok_or_else(|| Error::UnsupportedFamily("needs an affine descending factor (no negative jumps)".into()))?;
    if !(q > 0.0) {
        return Err(Error::Existence("phi_-(0) must be positive".into()));
    }
    if !(x > 0.0) {
        return Err(Error::Domain("x must be positive".into()));
    }
    let g = -q / d;
    let wp = m.plus_evaluator();
    let ln_gm = ln_gamma_real(-g).0;
    let (lx, ld) = (x.ln(), d.ln());
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut warning = None;
    let mut last = 0.0;
    let mut used = 0;
    for n in 0..n_terms {
        let nf = n as f64;
        let s = nf + 1.0 - g;
        let lw = wp.log_wgamma(C::new(s, 0.0))?.re;
        let lt = (g - 1.0 - nf) * lx + (g - nf) * ld + ln_gamma_real(s).0 - ln_gamma_real(nf + 1.0).0 - ln_gm - lw;
        let t = lt.exp();
        if t > prev && warning.is_none() && n > 1 {
            warning = Some(format!("terms grow at n = {n}"));
        }
        prev = t;
        last = t;
        sum += if n % 2 == 0 { t } else { -t };
        used = n + 1;
        if t <= 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(SeriesValue { value: sum, err: last, terms: used, regime: SeriesRegime::Convergent, warning })
}

/// Taylor coefficients c_k = −Ψ(0) ∏_{j<k} Ψ(j)/k! for k = 1..=k_max.
pub fn smallx_coefficients(l: &LevyExponent, k_max: usize) -> Result<Vec<f64>> {
    let mut c = -l.psi_real(0.0)?;
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k >= 2 {
            c *= l.psi_real((k - 1) as f64)? / k as f64;
        }
        out.push(c);
    }
    Ok(out)
}

/// f(x) = q + q Σ ∏_{j≤n} Ψ(j)/n! xⁿ for the negative of a killed subordinator.
pub fn density_series_neg_subordinator(m: &MellinObject, x: f64, n_terms: usize) -> Result<SeriesValue> {
    let l = m.levy();
    if !l.is_neg_subordinator() {
        return Err(Error::UnsupportedFamily("needs the negative of a subordinator".into()));
    }
    let q = l.kill_rate();
    if !(q > 0.0) {
        return Err(Error::UnsupportedFamily("needs a killed process".into()));
    }
    let dm = l.phi_minus().drift() * l.phi_plus().limit_at_infinity();
    if dm > 0.0 && x >= 1.0 / dm {
        return Err(Error::Radius(format!("x = {x} >= 1/d_- = {}", 1.0 / dm)));
    }
    // f = q + Σ_{n≥1} c_{n+1} (n+1) xⁿ with c from the small-x coefficients.
    let c = smallx_coefficients(l, n_terms + 1)?;
    let mut sum = 0.0;
    let mut t_prev = f64::NAN;
    let mut err = 0.0;
    let mut used = 0;
    for (n, ck) in c.iter().enumerate() {
        let t = ck * (n as f64 + 1.0) * x.powi(n as i32);
        sum += t;
        used = n + 1;
        if n > 2 {
            let r = (t / t_prev).abs();
            if r < 1.0 {
                err = t.abs() * r / (1.0 - r);
                if err <= 1e-16 * sum.abs() {
                    break;
                }
            } else {
                err = f64::INFINITY;
            }
        }
        t_prev = t;
    }
    Ok(SeriesValue { value: sum, err, terms: used, regime: SeriesRegime::Convergent, warning: None })
}

/// N⁺ of the small-x expansion.
pub fn n_plus(l: &LevyExponent) -> Result<f64> {
    let sp = l.strip_params()?;
    let u = sp.u_plus;
    Ok(if u.is_finite() && u == u.round() && u >= 0.0 {
        u
    } else if sp.a_plus.is_finite() {
        (sp.a_plus + 1.0).ceil()
    } else {
        f64::INFINITY
    })
}

/// Radius of convergence of the small-x series, if it converges at all.
pub fn smallx_radius(l: &LevyExponent) -> Option<f64> {
    let pp = l.phi_plus();
    let pm = l.phi_minus();
    if pp.is_constant() {
        let dm = pm.drift();
        return Some(if dm > 0.0 { 1.0 / (pp.limit_at_infinity() * dm) } else { f64::INFINITY });
    }
    if let PhiKind::Affine { d, .. } = pp.kind() {
        let inf = pm.limit_at_infinity();
        if *d > 0.0 && inf.is_finite() {
            return Some(1.0 / (inf * d));
        }
    }
    None
}

/// Partial sum −Ψ(0) Σ_{k=1}^{M} ∏_{j<k} Ψ(j)/k! x^k of the small-x expansion of F.
pub fn smallx_asymptotic_series(l: &LevyExponent, x: f64, m_terms: usize) -> Result<SeriesValue> {
    if !(l.kill_rate() > 0.0) {
        return Err(Error::Regime("the small-x expansion needs a killed process".into()));
    }
    let regime = match smallx_radius(l) {
        Some(r) if x < r => SeriesRegime::Convergent,
        Some(r) => return Err(Error::Regime(format!("the series diverges for x > {r}"))),
        None => {
            let np = n_plus(l)?;
            if !((m_terms as f64) < np) {
                return Err(Error::Regime(format!("M = {m_terms} terms needs M < N+ = {np}")));
            }
            SeriesRegime::Asymptotic
        }
    };
    let c = smallx_coefficients(l, m_terms + 1)?;
    let mut sum = 0.0;
    for (k, ck) in c.iter().take(m_terms).enumerate() {
        sum += ck * x.powi(k as i32 + 1);
    }
    let next = c.get(m_terms).map_or(0.0, |ck| (ck * x.powi(m_terms as i32 + 1)).abs());
    Ok(SeriesValue { value: sum, err: next, terms: m_terms, regime, warning: None })
}

/// Sup-norm over `xs` of (1 − d x) f(x) − ∫_x^∞ Π̄(ln(y/x)) f(y) dy + Ψ(0) ∫_x^∞ f(y) dy
/// for a subordinator.
pub fn integral_equation_residual<F: Fn(f64) -> f64>(l: &LevyExponent, f: F, xs: &[f64]) -> Result<f64> {
    if !l.is_subordinator() {
        return Err(Error::UnsupportedFamily("the integral equation needs a subordinator".into()));
    }
    support_bounds(l)?;
    let c = l.phi_minus().kill();
    let (_, drift, meas) = l
        .phi_plus()
        .measure()
        .ok_or_else(|| Error::MissingData("Levy measure of the subordinator".into()))?;
    let d = c * drift;
    let psi0 = l.psi_real(0.0)?;
    let top = if d > 0.0 { 1.0 / d } else { f64::INFINITY };
    let tol = Tol::new(1e-10, 1e-13);
    let mut worst: f64 = 0.0;
    for &x in xs {
        if !(x > 0.0 && x < top) {
            return Err(Error::Domain(format!("x = {x} outside (0, {top})")));
        }
        let jump = |y: f64| c * meas.tail_at((y / x).ln()) * f(y);
        let (ij, iff) = if top.is_finite() {
            (adaptive(jump, x, top, tol, 4000)?.value, adaptive(&f, x, top, tol, 4000)?.value)
        } else {
            (half_line(jump, x, tol, 4000, 4.0 * x.max(1.0))?.value, half_line(&f, x, tol, 4000, 4.0 * x.max(1.0))?.value)
        };
        let r = (1.0 - d * x) * f(x) - ij + psi0 * iff;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Sup-norm over `xs` of P(I > x) − ∫ f(x e^y) U(dy) for ξ_t = d t killed at q,
/// whose potential measure is U(dy) = e^{−q y/d} dy/d on y > 0.
pub fn potential_equation_residual<F: Fn(f64) -> f64, S: Fn(f64) -> f64>(
    l: &LevyExponent,
    f: F,
    surv: S,
    xs: &[f64],
) -> Result<f64> {
    let (q, d) = match l.phi_plus().kind() {
        PhiKind::Affine { q, d } if l.is_subordinator() && *d > 0.0 => (*q * l.phi_minus().kill(), *d * l.phi_minus().kill()),
        _ => return Err(Error::UnsupportedFamily("potential form implemented for killed drift only".into())),
    };
    let top = 1.0 / d;
    let mut worst: f64 = 0.0;
    for &x in xs {
        if !(x > 0.0 && x < top) {
            return Err(Error::Domain(format!("x = {x} outside (0, {top})")));
        }
        let ymax = (top / x).ln();
        let i = adaptive(|y: f64| f(x * y.exp()) * (-q * y / d).exp() / d, 0.0, ymax, Tol::new(1e-11, 1e-14), 4000)?;
        worst = worst.max((surv(x) - i.value).abs());
    }
    Ok(worst)
}

/// Mean of f over its support, ∫ x f(x) dx, by quadrature of a supplied density.
pub fn first_moment_of<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let g = |x: f64| x * f(x);
    Ok(if hi.is_finite() {
        adaptive(g, lo, hi, Tol::new(1e-9, 1e-13), 4000)?.value
    } else {
        half_line(g, lo, Tol::new(1e-9, 1e-13), 4000, 8.0)?.value
    })
}

/// Γ(a) on the reals, re-exported for callers building closed-form oracles.
pub fn gamma_fn(a: f64) -> f64 {
    gamma(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn killed(q: f64) -> MellinObject {
        MellinObject::new(LevyExponent::killed_drift(q, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn killed_drift_density_and_cdf() {
        let m = killed(2.5);
        let pol = InversionPolicy::default();
        let f = density(&m, 0.4, 0, &pol).unwrap();
        assert!((f.value - 2.5 * 0.6f64.powf(1.5)).abs() < 1e-7, "{f:?}");
        let c = cdf(&m, 0.5, &pol).unwrap();
        assert!((c.value - (1.0 - 0.5f64.powf(2.5))).abs() < 1e-7, "{c:?}");
        assert!(matches!(density(&m, 0.4, 2, &pol), Err(Error::Smoothness(_))));
        assert!(density(&m, 0.4, 1, &pol).is_ok());
    }

    #[test]
    fn dufresne_density() {
        let m = MellinObject::new(LevyExponent::dufresne(1.0).unwrap()).unwrap();
        let f = density(&m, 1.0, 0, &InversionPolicy::default()).unwrap();
        assert!((f.value - 0.5 * (-0.5f64).exp()).abs() < 1e-8, "{f:?}");
    }

    #[test]
    fn brownian_series_matches_inversion() {
        let m = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0).unwrap()).unwrap();
        let s = density_series_spectrally_positive(&m, 5.0, 60).unwrap();
        let y: f64 = 0.2;
        let exact = 1.0 - (1.0 + y) * (-y).exp();
        assert!((s.value - exact).abs() < 1e-14, "{} {exact}", s.value);
        let f = density(&m, 5.0, 0, &InversionPolicy::default()).unwrap();
        assert!((f.value - exact).abs() < 1e-9 * exact, "{f:?}");
    }

    #[test]
    fn smallx_series_is_binomial() {
        let l = LevyExponent::killed_drift(2.5, 1.0).unwrap();
        let c = smallx_coefficients(&l, 4).unwrap();
        assert!((c[0] - 2.5).abs() < 1e-15, "{c:?}");
        assert!((c[1] - 2.5 * (-1.5) / 2.0).abs() < 1e-15);
        assert!(smallx_asymptotic_series(&l, 1.5, 4).is_err());
    }
}
