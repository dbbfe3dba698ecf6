//! Mellin transform M(z) = E[I^{z−1}] = φ₋(0) Γ(z) W_{φ₋}(1−z)/W_{φ₊}(z).

use crate::bgamma::{BernsteinGammaEvaluator, Route};
use crate::error::{Error, Result};
use crate::levy::{LevyExponent, StripParams};
use crate::lgamma::{ln_gamma, ln_gamma_real};
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;

/// Behaviour of M on one boundary line of its analyticity strip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryClass {
    /// Analytic up to and including the line.
    Extends,
    /// Continuous on the line except at the origin.
    ExtendsExceptOrigin,
    DoesNotExtend,
    /// The strip is unbounded on this side.
    Entire,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub lower: f64,
    pub lower_class: BoundaryClass,
    pub upper: f64,
    pub upper_class: BoundaryClass,
}

/// A value of M taken on the boundary of the strip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryValue {
    pub value: C,
    pub class: BoundaryClass,
}

/// Simple pole of M at `at` with its residue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub at: f64,
    pub residue: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecayClass {
    Polynomial { index: f64 },
    SuperPolynomial,
    /// Super-polynomial with limsup ln|M|/|b| ≤ bound.
    Exponential { bound: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub a: f64,
    pub rows: Vec<(f64, f64)>,
    pub class: DecayClass,
    /// Least-squares slope of ln|M(a+ib)| against ln b.
    pub log_slope: f64,
    /// ln|M(a+ib)|/b at the largest b.
    pub exp_rate: f64,
    /// ∫₀^B arg φ±(1+iu) du / B at the largest B.
    pub theta_plus: Option<f64>,
    pub theta_minus: Option<f64>,
}

/// Immutable Mellin transform of the law of I_Ψ.
#[derive(Clone, Debug)]
pub struct MellinObject {
    levy: LevyExponent,
    wp: BernsteinGammaEvaluator,
    wm: BernsteinGammaEvaluator,
    sp: StripParams,
    bounds: BoundaryReport,
    route: Route,
    ln_phim0: f64,
}

fn prod_log(terms: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut l = 0.0;
    let mut s = 1.0;
    for t in terms {
        if t < 0.0 {
            s = -s;
        }
        l += t.abs().ln();
    }
    (l, s)
}

impl MellinObject {
    pub fn new(levy: LevyExponent) -> Result<Self> {
        Self::with_route(levy, Route::Auto)
    }

    /// Forces the route used for both W factors.
    pub fn with_route(levy: LevyExponent, route: Route) -> Result<Self> {
        let phim0 = levy.phi_minus().eval_real(0.0)?;
        if !(phim0 > 0.0) {
            return Err(Error::Existence(format!("phi_-(0) = {phim0}")));
        }
        let sp = levy.strip_params()?;
        let wp = BernsteinGammaEvaluator::new(levy.phi_plus().clone())?;
        let wm = BernsteinGammaEvaluator::new(levy.phi_minus().clone())?;
        let bounds = classify(&levy, &sp);
        Ok(MellinObject { levy, wp, wm, sp, bounds, route, ln_phim0: phim0.ln() })
    }

    pub fn levy(&self) -> &LevyExponent {
        &self.levy
    }

    pub fn strip_params(&self) -> StripParams {
        self.sp
    }

    /// The open analyticity strip (c^Ψ, 1 − ā₋^Ψ).
    pub fn strip(&self) -> (f64, f64) {
        (self.bounds.lower, self.bounds.upper)
    }

    pub fn boundary_classification(&self) -> BoundaryReport {
        self.bounds
    }

    pub fn plus_evaluator(&self) -> &BernsteinGammaEvaluator {
        &self.wp
    }

    pub fn minus_evaluator(&self) -> &BernsteinGammaEvaluator {
        &self.wm
    }

    pub fn route(&self) -> Route {
        self.route
    }

    /// ln(Γ(z)/W_{φ₊}(z)), shifting right with Γ(w)/W(w) = Γ(w+1)/W(w+1)·φ₊(w)/w.
    fn ln_gamma_over_wplus(&self, z: C) -> Result<C> {
        let k = if z.re < 1.0 { (1.0 - z.re).ceil() as usize } else { 0 };
        let top = z + k as f64;
        let main = ln_gamma(top) - self.wp.wgamma_route(top, self.route)?.log;
        let mut corr = C::new(1.0, 0.0);
        let phi = self.levy.phi_plus();
        for j in 0..k {
            let w = z + j as f64;
            if w.norm() == 0.0 {
                if phi.kill() > 0.0 {
                    return Err(Error::Pole("M has a pole at 0".into()));
                }
                let d = phi
                    .deriv_at_zero()
                    .ok_or_else(|| Error::Boundary("phi_+'(0+) is infinite".into()))?;
                corr *= d;
            } else {
                corr *= phi.eval(w)? / w;
            }
        }
        Ok(main + corr.ln())
    }

    /// ln W_{φ₋}(1 − z), shifting right with W(w) = W(w+1)/φ₋(w).
    fn ln_wminus_reflected(&self, z: C) -> Result<C> {
        let w = C::new(1.0, 0.0) - z;
        let m = if w.re < 1.0 { (1.0 - w.re).ceil() as usize } else { 0 };
        let top = w + m as f64;
        let main = self.wm.wgamma_route(top, self.route)?.log;
        let mut den = C::new(1.0, 0.0);
        for j in 0..m {
            den *= self.levy.phi_minus().eval(w + j as f64)?;
        }
        if den.norm() == 0.0 {
            return Err(Error::Pole(format!("M has a pole at {z}")));
        }
        Ok(main - den.ln())
    }

    /// ln M(z) on the meromorphic continuation reachable through the
    /// recurrences; no strip check.
    pub fn ln_eval_meromorphic(&self, z: C) -> Result<C> {
        Ok(self.ln_phim0 + self.ln_gamma_over_wplus(z)? + self.ln_wminus_reflected(z)?)
    }

    pub fn eval_meromorphic(&self, z: C) -> Result<C> {
        Ok(self.ln_eval_meromorphic(z)?.exp())
    }

    fn check_open(&self, z: C) -> Result<()> {
        let (lo, hi) = self.strip();
        if z.re > lo && z.re < hi {
            return Ok(());
        }
        if z.re == lo || z.re == hi {
            return Err(Error::Boundary(format!(
                "Re z = {} is on the strip boundary; use eval_boundary",
                z.re
            )));
        }
        Err(Error::Strip(format!("Re z = {} not in ({lo}, {hi})", z.re)))
    }

    /// M(z) inside the open strip.
    pub fn eval(&self, z: C) -> Result<C> {
        self.check_open(z)?;
        self.eval_meromorphic(z)
    }

    /// ln M(z) inside the open strip.
    pub fn ln_eval(&self, z: C) -> Result<C> {
        self.check_open(z)?;
        self.ln_eval_meromorphic(z)
    }

    /// M(z) with Re z on a strip boundary, when the boundary table allows it.
    pub fn eval_boundary(&self, z: C) -> Result<BoundaryValue> {
        let b = self.bounds;
        let class = if z.re == b.lower {
            b.lower_class
        } else if z.re == b.upper {
            b.upper_class
        } else {
            return Err(Error::Strip(format!("Re z = {} is not a boundary abscissa", z.re)));
        };
        match class {
            BoundaryClass::Extends => {}
            BoundaryClass::ExtendsExceptOrigin if z.norm() != 0.0 => {}
            _ => {
                return Err(Error::Boundary(format!(
                    "M does not extend continuously to {z} ({class:?})"
                )))
            }
        }
        Ok(BoundaryValue { value: self.eval_meromorphic(z)?, class })
    }

    /// ∏_{j=1}^n Ψ(s·j) as (log-modulus, sign).
    fn psi_product(&self, n: usize, s: f64) -> Result<(f64, f64)> {
        let vals = (1..=n).map(|j| self.levy.psi_real(s * j as f64)).collect::<Result<Vec<_>>>()?;
        Ok(prod_log(vals.into_iter()))
    }

    /// Simple poles at −n with residues φ₊(0) ∏_{j≤n} Ψ(j)/n!, up to n_max.
    pub fn poles_and_residues(&self, n_max: usize) -> Result<Vec<Pole>> {
        let sp = self.sp;
        let abar_plus = sp.abar_plus;
        if !(abar_plus > 0.0) {
            return Ok(vec![]);
        }
        let u = sp.u_plus;
        let integral_u = u.is_finite() && u == u.round();
        let limit = if integral_u { u } else { sp.a_plus };
        let p0 = self.levy.phi_plus().kill();
        let mut out = Vec::new();
        for n in 0..=n_max {
            if !((n as f64) < limit) {
                break;
            }
            let (l, s) = self.psi_product(n, 1.0)?;
            let (lf, _) = ln_gamma_real(n as f64 + 1.0);
            out.push(Pole { at: -(n as f64), residue: s * p0 * (l - lf).exp() });
        }
        Ok(out)
    }

    /// E[I^n] = (−1)^n n!/∏_{j≤n} Ψ(−j).
    pub fn moment_positive(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        let sp = self.sp;
        let nf = n as f64;
        let edge = -sp.abar_minus;
        let ok = nf < edge || (nf == edge && sp.abar_minus == sp.a_minus && sp.u_minus == f64::NEG_INFINITY);
        if !ok {
            return Err(Error::MomentInfinite(format!("E[I^{n}] = inf: moments exist only below order {edge}")));
        }
        let (l, s) = self.psi_product(n, -1.0)?;
        let (lf, _) = ln_gamma_real(nf + 1.0);
        let sign = if n.is_multiple_of(2) { s } else { -s };
        Ok(sign * (lf - l).exp())
    }

    /// E[I^{−n}] = E[ξ₁] ∏_{j<n} Ψ(j)/(n−1)!.
    pub fn moment_negative(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if self.levy.kill_rate() > 0.0 {
            return Err(Error::MomentInfinite("killed process: E[I^-1] = inf".into()));
        }
        let mean = match self.levy.mean() {
            Some(m) if m > 0.0 && m.is_finite() => m,
            _ => return Err(Error::MomentInfinite("E[xi_1] must be finite and positive".into())),
        };
        let nf = n as f64;
        let edge = 1.0 - self.bounds.lower;
        let ok = nf < edge || (nf == edge && self.levy.phi_plus().finite_at_abscissa());
        if !ok {
            return Err(Error::MomentInfinite(format!("E[I^-{n}] = inf: negative moments exist only below order {edge}")));
        }
        let (l, s) = self.psi_product(n - 1, 1.0)?;
        let (lf, _) = ln_gamma_real(nf);
        Ok(s * mean * (l - lf).exp())
    }

    /// |M(z+1) − (−z/Ψ(−z)) M(z)| / |M(z+1)|.
    pub fn recurrence_check(&self, z: C) -> Result<f64> {
        let psi = self.levy.psi(-z)?;
        if psi.norm() < 1e-12 * (1.0 + z.norm()) {
            return Err(Error::Pole(format!("Psi(-z) vanishes near z = {z}")));
        }
        let m1 = self.eval_meromorphic(z + 1.0)?;
        let m0 = self.eval_meromorphic(z)?;
        Ok((m1 + z / psi * m0).norm() / m1.norm())
    }

    /// |M(a+ib)| on the grid with the theoretical decay class and fitted rates.
    pub fn decay_profile(&self, a: f64, b_grid: &[f64]) -> Result<DecayProfile> {
        let (lo, hi) = self.strip();
        if !(a > lo && a < hi) {
            return Err(Error::Strip(format!("a = {a} not in ({lo}, {hi})")));
        }
        let mut rows = Vec::with_capacity(b_grid.len());
        for &b in b_grid {
            let l = self.ln_eval(C::new(a, b))?.re;
            rows.push((b, l.exp()));
        }
        let n_psi = self.levy.n_psi().unwrap_or(f64::INFINITY);
        let class = if n_psi.is_finite() {
            DecayClass::Polynomial { index: n_psi }
        } else if self.levy.phi_minus().drift() > 0.0 || self.levy.is_symmetric() {
            DecayClass::Exponential { bound: -PI / 2.0 }
        } else {
            DecayClass::SuperPolynomial
        };
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|(b, m)| *b > 0.0 && *m > 0.0)
            .map(|(b, m)| (b.ln(), m.ln()))
            .collect();
        let log_slope = ls_slope(&pts);
        let exp_rate = rows
            .iter()
            .filter(|(b, _)| *b != 0.0)
            .max_by(|x, y| x.0.abs().total_cmp(&y.0.abs()))
            .map_or(f64::NAN, |(b, m)| m.ln() / b.abs());
        let bmax = b_grid.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        let theta = |ev: &BernsteinGammaEvaluator| {
            if bmax > 0.0 {
                ev.arg_integral(1.0, bmax).ok().map(|v| v / bmax)
            } else {
                None
            }
        };
        Ok(DecayProfile {
            a,
            rows,
            class,
            log_slope,
            exp_rate,
            theta_plus: theta(&self.wp),
            theta_minus: theta(&self.wm),
        })
    }
}

/// Least-squares slope through (x, y) points.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn classify(levy: &LevyExponent, sp: &StripParams) -> BoundaryReport {
    let upper = 1.0 - sp.abar_minus;
    let upper_class = if sp.abar_minus == f64::NEG_INFINITY {
        BoundaryClass::Entire
    } else if sp.abar_minus == 0.0 {
        BoundaryClass::Extends
    } else if sp.abar_minus == sp.u_minus {
        BoundaryClass::DoesNotExtend
    } else {
        BoundaryClass::Extends
    };
    let lower = sp.c_psi;
    let phi_plus = levy.phi_plus();
    let lower_class = if lower == f64::NEG_INFINITY {
        BoundaryClass::Entire
    } else if lower == 0.0 {
        if sp.u_plus == 0.0 && phi_plus.deriv_at_zero().is_some() {
            BoundaryClass::Extends
        } else {
            BoundaryClass::ExtendsExceptOrigin
        }
    } else if phi_plus.finite_at_abscissa() {
        BoundaryClass::Extends
    } else {
        BoundaryClass::DoesNotExtend
    };
    BoundaryReport { lower, lower_class, upper, upper_class }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lgamma::gamma;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn closed_form_examples() {
        let m = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0).unwrap()).unwrap();
        assert!(close(m.eval(C::new(1.5, 0.0)).unwrap().re, PI.sqrt() / 1.5, 1e-12));
        assert!(close(m.eval(C::new(1.0, 0.0)).unwrap().re, 1.0, 1e-13));
        let d = MellinObject::new(LevyExponent::dufresne(1.0).unwrap()).unwrap();
        assert!(close(d.eval(C::new(0.5, 0.0)).unwrap().re, 2f64.sqrt() * gamma(1.5), 1e-12));
        let k = MellinObject::new(LevyExponent::killed_drift(2.5, 1.0).unwrap()).unwrap();
        assert!(close(k.eval(C::new(2.0, 0.0)).unwrap().re, 1.0 / 3.5, 1e-12));
    }

    #[test]
    fn boundary_table() {
        let k = MellinObject::new(LevyExponent::killed_drift(2.5, 1.0).unwrap()).unwrap();
        assert_eq!(k.boundary_classification().upper_class, BoundaryClass::Entire);
        let b = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0).unwrap()).unwrap();
        let r = b.boundary_classification();
        assert_eq!(r.upper_class, BoundaryClass::DoesNotExtend);
        assert_eq!(r.upper, 2.0);
        assert!(matches!(b.eval_boundary(C::new(2.0, 1.0)), Err(Error::Boundary(_))));
        let d = MellinObject::new(LevyExponent::dufresne(1.0).unwrap()).unwrap();
        assert_eq!(d.boundary_classification().lower_class, BoundaryClass::Entire);
    }

    #[test]
    fn poles_and_moments() {
        let k = MellinObject::new(LevyExponent::killed_drift(2.5, 1.0).unwrap()).unwrap();
        let p = k.poles_and_residues(3).unwrap();
        assert!(close(p[0].residue, 2.5, 1e-14));
        assert!(close(p[1].residue, -3.75, 1e-14));
        assert!(close(k.moment_positive(2).unwrap(), 2.0 / 15.75, 1e-14));
        let b = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0).unwrap()).unwrap();
        assert!(matches!(b.moment_positive(1), Err(Error::MomentInfinite(_))));
        let d = MellinObject::new(LevyExponent::dufresne(1.0).unwrap()).unwrap();
        assert!(d.poles_and_residues(5).unwrap().is_empty());
        assert!(close(d.moment_negative(1).unwrap(), 2.0, 1e-14));
        assert!(close(d.moment_negative(2).unwrap(), 8.0, 1e-14));
        assert!(close(d.eval(C::new(-1.0, 0.0)).unwrap().re, 8.0, 1e-12));
        assert!(k.moment_negative(1).is_err());
    }

    #[test]
    fn recurrence_on_hypergeometric() {
        let h = LevyExponent::hypergeometric(0.5, 0.6, 0.3, 0.7).unwrap();
        let m = MellinObject::with_route(h, Route::Generic).unwrap();
        let r = m.recurrence_check(C::new(0.4, 2.0)).unwrap();
        assert!(r < 1e-8, "{r}");
        assert!(close(m.eval(C::new(1.0, 0.0)).unwrap().re, 1.0, 1e-9));
    }
}
