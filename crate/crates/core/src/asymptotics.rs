//! Large-x tail laws and small-x behaviour of I_Ψ.

use crate::bernstein::BernsteinFunction;
use crate::bgamma::BernsteinGammaEvaluator;
use crate::density::{cdf, density, survival, InversionPolicy};
use crate::error::{Error, Result};
use crate::levy::{LevyExponent, NegTailClass};
use crate::lgamma::gamma;
use crate::mellin::{ls_slope, MellinObject};
use crate::quad::{adaptive_raw, half_line, Tol};
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;

/// Which tail quantity an asymptotic law is asked for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "order", rename_all = "kebab-case")]
pub enum Quantity {
    /// P(I > x).
    Survival,
    /// f^(n)(x).
    Density(usize),
}

/// Output of an asymptotic law, carrying the preconditions that were checked.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticValue {
    pub value: f64,
    pub law: &'static str,
    pub validity_hint: String,
}

/// W_φ(w) for real w > a_φ via the recurrence, shifting to w ≥ 1.
fn w_real(ev: &BernsteinGammaEvaluator, w: f64) -> Result<f64> {
    let mut w = w;
    let mut den = 1.0;
    while w < 1.0 {
        den *= ev.phi().eval_real(w)?;
        w += 1.0;
    }
    if den == 0.0 {
        return Err(Error::Pole(format!("W_phi has a pole at {w}")));
    }
    Ok(ev.wgamma(C::new(w, 0.0))?.re / den)
}

/// The constant C with P(I > x) ~ C x^{u₋}, and u₋ itself.
pub fn cramer_constant(m: &MellinObject) -> Result<(f64, f64)> {
    let l = m.levy();
    let u = m.strip_params().u_minus;
    if !(u.is_finite() && u < 0.0) {
        return Err(Error::CramerPrecondition(format!("u_- = {u} is not in (-inf, 0)")));
    }
    if l.meta.lattice {
        return Err(Error::CramerPrecondition("the model declares a lattice law".into()));
    }
    let pm = l.phi_minus();
    let dpm = pm.deriv_real(u)?;
    if !(dpm.is_finite() && dpm > 0.0) {
        return Err(Error::CramerPrecondition(format!("phi_-'(u_-+) = {dpm} is not finite")));
    }
    let wm = w_real(m.minus_evaluator(), 1.0 + u)?;
    let wp = w_real(m.plus_evaluator(), 1.0 - u)?;
    let c = pm.eval_real(0.0)? * gamma(-u) * wm / (dpm * wp);
    Ok((c, u))
}

/// Power-tail law under the Cramér condition.
pub fn cramer_tail(m: &MellinObject, x: f64, q: Quantity) -> Result<AsymptoticValue> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    let (c, u) = cramer_constant(m)?;
    let n_psi = m.levy().n_psi()?;
    let value = match q {
        Quantity::Survival => c * x.powf(u),
        Quantity::Density(n) => {
            if !(n_psi > 1.0) || (n as f64) > n_psi.ceil() - 2.0 {
                return Err(Error::CramerPrecondition(format!(
                    "derivative order {n} needs N_Psi > 1 and n <= ceil(N_Psi) - 2 (N_Psi = {n_psi})"
                )));
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * c * gamma(n as f64 + 1.0 - u) / gamma(-u) * x.powf(u - n as f64 - 1.0)
        }
    };
    Ok(AsymptoticValue {
        value,
        law: "cramer",
        validity_hint: format!("u_- = {u}, C = {c}, N_Psi = {n_psi}, non-lattice declared"),
    })
}

/// Saddle-point data for a subordinator exponent φ with zero drift:
/// φ_*(u) = u/φ(u), its inverse ϕ_*, and the constant T_{φ_*}.
#[derive(Clone, Debug)]
pub struct SubordinatorSaddleData {
    phi: BernsteinFunction,
    t_phi_star: f64,
    cond_h: f64,
    /// (u, φ_*(u)) on a geometric grid, used to bracket the inverse.
    table: Vec<(f64, f64)>,
    lower: f64,
}

impl SubordinatorSaddleData {
    pub fn new(l: &LevyExponent) -> Result<Self> {
        if !l.is_subordinator() {
            return Err(Error::ConditionH("the saddle law needs a subordinator".into()));
        }
        Self::from_phi(l.phi_plus().clone())
    }

    pub fn from_phi(phi: BernsteinFunction) -> Result<Self> {
        let d = phi.drift();
        if d > 0.0 {
            return Err(Error::ConditionH(format!(
                "drift d = {d} > 0 forces x phi'(x)/phi(x) -> 1"
            )));
        }
        let cond_h = cond_h_probe(&phi)?;
        if !(cond_h < 1.0 - 1e-6) {
            return Err(Error::ConditionH(format!("limsup x phi'(x)/phi(x) ~ {cond_h} is not < 1")));
        }
        let mut table = Vec::with_capacity(400);
        let mut prev = 0.0;
        for j in -120..=240 {
            let u = 10f64.powf(j as f64 / 20.0);
            let v = u / phi.eval_real(u)?;
            if !(v > prev) {
                return Err(Error::ConditionH(format!("phi_* is not increasing near u = {u}")));
            }
            prev = v;
            table.push((u, v));
        }
        let lower = if phi.kill() == 0.0 { phi.deriv_at_zero().map_or(0.0, |d| 1.0 / d) } else { 0.0 };
        let t_phi_star = sawtooth_constant(
            |u| Ok(u.ln() - phi.eval_real(u)?.ln()),
            |u| Ok(1.0 / u - phi.deriv_real(u)? / phi.eval_real(u)?),
        )?;
        Ok(SubordinatorSaddleData { phi, t_phi_star, cond_h, table, lower })
    }

    pub fn phi_star(&self, u: f64) -> Result<f64> {
        Ok(u / self.phi.eval_real(u)?)
    }

    /// ϕ_*(x) by bisection to relative 1e-12 in the argument.
    pub fn varphi_star(&self, x: f64) -> Result<f64> {
        if !(x > self.lower) {
            return Err(Error::Domain(format!("varphi_* is defined on ({}, inf), got {x}", self.lower)));
        }
        let i = self.table.partition_point(|&(_, v)| v < x);
        let (mut a, mut b) = if i == 0 {
            (0.0, self.table[0].0)
        } else if i < self.table.len() {
            (self.table[i - 1].0, self.table[i].0)
        } else {
            let mut b = self.table[self.table.len() - 1].0;
            while self.phi_star(b)? < x {
                b *= 2.0;
                if !b.is_finite() {
                    return Err(Error::RootBracket(format!("varphi_*({x}) overflows")));
                }
            }
            (0.5 * b, b)
        };
        while b - a > 1e-12 * b {
            let mid = 0.5 * (a + b);
            if self.phi_star(mid)? < x {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    pub fn t_phi_star(&self) -> f64 {
        self.t_phi_star
    }

    /// Numerical estimate of limsup x φ′(x)/φ(x).
    pub fn cond_h(&self) -> f64 {
        self.cond_h
    }

    /// ∫_{φ_*(1)}^x ϕ_*(y)/y dy, written as ∫₁^{ϕ_*(x)} (1 − uφ′(u)/φ(u)) du.
    pub fn exponent_integral(&self, x: f64) -> Result<f64> {
        let top = self.varphi_star(x)?;
        let (lo, hi, sign) = if top >= 1.0 { (1.0, top, 1.0) } else { (top, 1.0, -1.0) };
        let mut err = None;
        let r = adaptive_raw(
            |u: f64| match self.phi.deriv_real(u).and_then(|d| Ok(1.0 - u * d / self.phi.eval_real(u)?)) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            lo,
            hi,
            Tol::new(1e-12, 1e-14),
            4000,
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(sign * r.value)
    }
}

/// Estimate of limsup x φ′(x)/φ(x) from the top of a geometric probe grid.
fn cond_h_probe(phi: &BernsteinFunction) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 8..=16 {
        let x = 10f64.powi(j);
        let v = x * phi.deriv_real(x)? / phi.eval_real(x)?;
        worst = worst.max(v);
    }
    Ok(worst)
}

/// −½ ∫₁^∞ {u}(1−{u}) g″(u) du for g = ln φ_*, computed as a sum of
/// trapezoid defects on unit cells plus the leading Euler–Maclaurin tail.
fn sawtooth_constant<G, D>(g: G, dg: D) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let mut defects = 0.0;
    let mut g_prev = g(1.0)?;
    let mut k_done = 1usize;
    let mut prev: Option<f64> = None;
    let mut k_max = 64usize;
    while k_max <= 1 << 15 {
        for k in k_done..k_max {
            let kf = k as f64;
            let g_next = g(kf + 1.0)?;
            let mut err = None;
            let int = adaptive_raw(
                |u: f64| {
                    g(u).unwrap_or_else(|e| {
                        err = Some(e);
                        0.0
                    })
                },
                kf,
                kf + 1.0,
                Tol::new(1e-15, 1e-17),
                100,
            );
            if let Some(e) = err {
                return Err(e);
            }
            defects += 0.5 * (g_prev + g_next) - int.value;
            g_prev = g_next;
        }
        k_done = k_max;
        let t = -defects + dg(k_max as f64)? / 12.0;
        if let Some(p) = prev {
            if (t - p).abs() < 1e-11 * t.abs().max(1.0) {
                return Ok(t);
            }
        }
        prev = Some(t);
        k_max *= 2;
    }
    prev.ok_or_else(|| Error::Convergence("saddle constant did not settle".into()))
}

/// Saddle-point tail law for a driftless subordinator satisfying the
/// x φ′/φ < 1 condition.
pub fn subordinator_tail(s: &SubordinatorSaddleData, x: f64, q: Quantity) -> Result<AsymptoticValue> {
    let vs = s.varphi_star(x)?;
    let dphi_star = {
        let p = s.phi.eval_real(vs)?;
        (p - vs * s.phi.deriv_real(vs)?) / (p * p)
    };
    let dvarphi = 1.0 / dphi_star;
    let base = (-s.t_phi_star).exp() / (2.0 * PI * s.phi_star(1.0)?).sqrt();
    let e = (-s.exponent_integral(x)?).exp();
    let value = match q {
        Quantity::Survival => base * x * dvarphi.sqrt() / vs * e,
        Quantity::Density(n) => {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * base * (vs / x).powi(n as i32) * dvarphi.sqrt() * e
        }
    };
    Ok(AsymptoticValue {
        value,
        law: "saddle",
        validity_hint: format!("d = 0, limsup x phi'/phi ~ {:.6}, T = {}", s.cond_h, s.t_phi_star),
    })
}

/// Which branch of the convolution-equivalent law applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvolutionCase {
    /// Ψ(0) < 0: P(I > x) ~ Π̄₋(ln x).
    Killed,
    /// Ψ(0) = 0, Eξ₁ ∈ (0, ∞): P(I > x) ~ (1/Eξ₁) ∫_{ln x}^∞ Π̄₋.
    Drifting,
}

/// Determines the case from the model, without the subexponential gate.
pub fn convolution_case(l: &LevyExponent) -> Result<ConvolutionCase> {
    if l.kill_rate() > 0.0 {
        return Ok(ConvolutionCase::Killed);
    }
    match l.mean() {
        Some(m) if m > 0.0 && m.is_finite() => Ok(ConvolutionCase::Drifting),
        other => Err(Error::Case(format!("Psi(0) = 0 with E xi_1 = {other:?}: no convolution law"))),
    }
}

/// The right-hand side of the convolution-equivalent law for the given case,
/// evaluated from the family's Π̄₋ without checking that −ξ₁ ∈ S₀.
pub fn convolution_formula(l: &LevyExponent, x: f64, case: ConvolutionCase) -> Result<f64> {
    let tail = l
        .meta
        .pi_tail_neg
        .as_ref()
        .ok_or_else(|| Error::MissingData("the family does not supply its negative Levy tail".into()))?;
    if !(x > 1.0) {
        return Err(Error::Domain(format!("x = {x} must exceed 1")));
    }
    let lx = x.ln();
    match case {
        ConvolutionCase::Killed => Ok(tail(lx)),
        ConvolutionCase::Drifting => {
            let mean = l
                .mean()
                .filter(|m| *m > 0.0 && m.is_finite())
                .ok_or_else(|| Error::Case("E xi_1 must be positive and finite".into()))?;
            let r = half_line(|s: f64| tail(s), lx, Tol::new(1e-10, 1e-300), 4000, 64.0)?;
            Ok(r.value / mean)
        }
    }
}

/// Convolution-equivalent tail law; requires a subexponential negative tail.
pub fn convolution_tail(l: &LevyExponent, x: f64) -> Result<AsymptoticValue> {
    match l.meta.neg_class {
        NegTailClass::Subexponential => {}
        NegTailClass::Exponential { rate } => {
            return Err(Error::Case(format!(
                "negative jumps have exponential moments (rate {rate}); -xi_1 is not in S_0"
            )))
        }
        NegTailClass::None => return Err(Error::Case("the model has no negative jumps".into())),
    }
    let case = convolution_case(l)?;
    let value = convolution_formula(l, x, case)?;
    Ok(AsymptoticValue {
        value,
        law: "convolution",
        validity_hint: format!("case {case:?}, -xi_1 declared subexponential"),
    })
}

/// Result of the small-x analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallxReport {
    /// Which small-x law applied.
    pub case: &'static str,
    /// f(0⁺) when the law identifies it.
    pub f0: Option<f64>,
    /// (x, probe value) pairs supporting the law, from inversion.
    pub probes: Vec<(f64, f64)>,
    pub note: String,
}

/// Small-x behaviour of the law of I_Ψ.
pub fn smallx_limits(m: &MellinObject, pol: &InversionPolicy) -> Result<SmallxReport> {
    let l = m.levy();
    let q = l.kill_rate();
    let n_psi = l.n_psi()?;
    let sp = m.strip_params();
    if q > 0.0 {
        if !(n_psi > 1.0) {
            return Err(Error::Gate(format!("f(0+) = -Psi(0) needs N_Psi > 1 (N_Psi = {n_psi})")));
        }
        let probes = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&x| Ok((x, cdf(m, x, pol)?.value / x)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SmallxReport {
            case: "killed",
            f0: Some(q),
            probes,
            note: "probes are F(x)/x".into(),
        });
    }
    if sp.a_plus == 0.0 && l.phi_plus().deriv_at_zero().is_some() {
        if !(n_psi > 1.0) {
            return Err(Error::Gate(format!("f(0+) = 0 needs N_Psi > 1 (N_Psi = {n_psi})")));
        }
        let probes = [1e-1, 5e-2, 2e-2]
            .iter()
            .map(|&x| Ok((x, density(m, x, 0, pol)?.value)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SmallxReport {
            case: "flat",
            f0: Some(0.0),
            probes,
            note: "f(0+) = 0; probes are f(x)".into(),
        });
    }
    if sp.a_plus == f64::INFINITY {
        let probes = [1e-1f64, 5e-2, 2e-2, 1e-2]
            .iter()
            .map(|&x| Ok((x, x.powi(-5) * density(m, x, 0, pol)?.value)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SmallxReport {
            case: "super-polynomial",
            f0: Some(0.0),
            probes,
            note: "f(x) = o(x^n) for every n; probes are x^-5 f(x)".into(),
        });
    }
    if sp.a_plus > 0.0 {
        let eps = 0.5 * sp.a_plus.min(1.0);
        let probes = [1e-1f64, 1e-2, 1e-3]
            .iter()
            .map(|&x| Ok((x, x.powf(-sp.a_plus + eps) * cdf(m, x, pol)?.value)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SmallxReport {
            case: "power",
            f0: None,
            probes,
            note: format!("probes are x^(-a_+ + {eps}) F(x), expected to vanish"),
        });
    }
    Err(Error::Gate("no small-x law applies to this model".into()))
}

/// Least-squares slope of ln P(I > x) against ln x.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailSlope {
    pub slope: f64,
    /// ā₋^Ψ, the comparison value.
    pub abar_minus: f64,
    /// Slope of the upper half of the grid minus that of the lower half;
    /// strongly negative for super-polynomial tails.
    pub steepening: f64,
    pub minus_infinity_consistent: bool,
}

fn slope_report(pts: &[(f64, f64)], abar_minus: f64) -> Result<TailSlope> {
    let pts: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).map(|&(x, s)| (x.ln(), s.ln())).collect();
    if pts.len() < 4 {
        return Err(Error::Domain("need at least four positive tail values".into()));
    }
    let slope = ls_slope(&pts);
    let h = pts.len() / 2;
    let steepening = ls_slope(&pts[h..]) - ls_slope(&pts[..h]);
    Ok(TailSlope {
        slope,
        abar_minus,
        steepening,
        minus_infinity_consistent: steepening < -0.5 && slope < -5.0,
    })
}

/// Log-log slope of the inverted survival function over `xs`.
pub fn log_tail_slope(m: &MellinObject, xs: &[f64], pol: &InversionPolicy) -> Result<TailSlope> {
    let pts = xs
        .iter()
        .map(|&x| Ok((x, survival(m, x, pol)?.value)))
        .collect::<Result<Vec<_>>>()?;
    slope_report(&pts, m.strip_params().abar_minus)
}

/// Log-log slope of the empirical survival function of `samples` over `xs`.
pub fn log_tail_slope_samples(samples: &[f64], xs: &[f64], abar_minus: f64) -> Result<TailSlope> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| (x, (s.len() - s.partition_point(|&v| v <= x)) as f64 / n))
        .collect();
    slope_report(&pts, abar_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::PhiKind;

    #[test]
    fn cramer_constants() {
        let b = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0).unwrap()).unwrap();
        let (c, u) = cramer_constant(&b).unwrap();
        assert!((c - 0.5).abs() < 1e-12 && (u + 1.0).abs() < 1e-14, "{c} {u}");
        let d = MellinObject::new(LevyExponent::dufresne(1.0).unwrap()).unwrap();
        assert!((cramer_constant(&d).unwrap().0 - 0.5).abs() < 1e-12);
        let k = MellinObject::new(LevyExponent::killed_drift(2.5, 1.0).unwrap()).unwrap();
        assert!(matches!(cramer_constant(&k), Err(Error::CramerPrecondition(_))));
    }

    #[test]
    fn saddle_constant_for_sqrt() {
        let phi = BernsteinFunction::new(PhiKind::Power { q: 0.0, alpha: 0.5, c: 0.0 }).unwrap();
        let s = SubordinatorSaddleData::from_phi(phi).unwrap();
        let exact = 0.5 - 0.25 * (2.0 * PI).ln();
        assert!((s.t_phi_star() - exact).abs() < 1e-9, "{}", s.t_phi_star());
        assert!((s.cond_h() - 0.5).abs() < 1e-9);
        assert!((s.varphi_star(3.0).unwrap() - 9.0).abs() < 1e-10);
        assert!((s.exponent_integral(3.0).unwrap() - 4.0).abs() < 1e-10);
        let drifted = BernsteinFunction::new(PhiKind::Affine { q: 1.0, d: 1.0 }).unwrap();
        assert!(matches!(SubordinatorSaddleData::from_phi(drifted), Err(Error::ConditionH(_))));
    }

    #[test]
    fn convolution_law_with_declared_pareto_tail() {
        let with_tail = |l: LevyExponent, class: NegTailClass| {
            let mut meta = l.meta.clone();
            meta.pi_tail_neg = Some(std::sync::Arc::new(|s: f64| (1.0 + s).powi(-3)));
            meta.neg_class = class;
            l.with_meta(meta)
        };
        let x = 1e4f64;
        let lx = x.ln();
        let killed = with_tail(LevyExponent::killed_drift(1.0, 1.0).unwrap(), NegTailClass::Subexponential);
        let v = convolution_tail(&killed, x).unwrap().value;
        assert!((v - (1.0 + lx).powi(-3)).abs() < 1e-15);
        let phi = BernsteinFunction::new(PhiKind::Affine { q: 0.0, d: 2.0 }).unwrap();
        let drifting = with_tail(LevyExponent::subordinator(phi).unwrap(), NegTailClass::Subexponential);
        assert_eq!(convolution_case(&drifting).unwrap(), ConvolutionCase::Drifting);
        let v = convolution_tail(&drifting, x).unwrap().value;
        assert!((v / ((1.0 + lx).powi(-2) / 4.0) - 1.0).abs() < 1e-8, "{v}");
        let light = with_tail(LevyExponent::killed_drift(1.0, 1.0).unwrap(), NegTailClass::Exponential { rate: 1.0 });
        assert!(matches!(convolution_tail(&light, x), Err(Error::Case(_))));
        let bare = LevyExponent::killed_drift(1.0, 1.0).unwrap();
        assert!(matches!(convolution_tail(&bare, x), Err(Error::Case(_))));
    }
}
