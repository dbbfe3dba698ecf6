//! Bernstein-gamma functions W_φ: the solution of W(z+1) = φ(z)W(z), W(1) = 1.
//!
//! Three routes are available:
//! * the Weierstrass product, truncated at N with an Euler–Maclaurin tail;
//! * the Stirling-type representation
//!   W(z) = √(φ(1)/φ(z+1)) e^{L(z) − E(z)}/φ(z), with E split into the
//!   constant T and a remainder summed with an Euler–Maclaurin tail;
//! * catalog closed forms built from the reference log-gamma.
//!
//! Arguments left of the shift threshold are lifted with the recurrence.

use crate::bernstein::{cauchy_derivatives, Abscissae, BernsteinFunction};
use crate::error::{Error, Result};
use crate::quad::{adaptive, adaptive_raw, half_line, segment, Tol};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Evaluation route for W_φ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Closed form when the catalog has one, otherwise `Generic`.
    Auto,
    Closed,
    Product,
    Stirling,
    /// Product for small |Im z|, Stirling beyond, both in the overlap band.
    Generic,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Auto => "auto",
            Route::Closed => "closed",
            Route::Product => "product",
            Route::Stirling => "stirling",
            Route::Generic => "generic",
        }
    }
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Route::Auto,
            "closed" => Route::Closed,
            "product" => Route::Product,
            "stirling" => Route::Stirling,
            "generic" => Route::Generic,
            _ => return Err(Error::Parse(format!("unknown route '{s}'"))),
        })
    }
}

/// Precision and cost policy.
#[derive(Clone, Copy, Debug)]
pub struct Policy {
    pub rel_tol: f64,
    pub product_start_n: usize,
    pub product_cap: usize,
    pub shift_threshold: f64,
    pub panel_budget: usize,
    pub im_cutoff: f64,
    pub overlap: (f64, f64),
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            rel_tol: 1e-12,
            product_start_n: 64,
            product_cap: 1 << 20,
            shift_threshold: 10.0,
            panel_budget: 10_000,
            im_cutoff: 30.0,
            overlap: (20.0, 40.0),
        }
    }
}

/// A value of W_φ with provenance.
#[derive(Clone, Copy, Debug)]
pub struct WValue {
    pub value: C,
    pub log: C,
    pub route: Route,
    pub est_error: f64,
}

/// W_φ with its cached constants γ_φ and T_φ.
#[derive(Clone, Debug)]
pub struct BernsteinGammaEvaluator {
    phi: BernsteinFunction,
    gamma_phi: f64,
    t_phi: f64,
    absc: Abscissae,
    policy: Policy,
}

fn wrap_im(z: C) -> C {
    let mut im = z.im % (2.0 * PI);
    if im > PI {
        im -= 2.0 * PI;
    } else if im <= -PI {
        im += 2.0 * PI;
    }
    C::new(z.re, im)
}

impl BernsteinGammaEvaluator {
    pub fn new(phi: BernsteinFunction) -> Result<Self> {
        Self::with_policy(phi, Policy::default())
    }

    pub fn with_policy(phi: BernsteinFunction, policy: Policy) -> Result<Self> {
        let absc = phi.abscissae()?;
        if phi.is_constant() && phi.kill() == 0.0 {
            return Err(Error::Domain("phi is identically zero".into()));
        }
        let mut ev = BernsteinGammaEvaluator { phi, gamma_phi: 0.0, t_phi: 0.0, absc, policy };
        ev.gamma_phi = ev.compute_gamma_phi()?;
        ev.t_phi = ev.compute_t_phi()?;
        Ok(ev)
    }

    pub fn phi(&self) -> &BernsteinFunction {
        &self.phi
    }
    pub fn gamma_phi(&self) -> f64 {
        self.gamma_phi
    }
    pub fn t_phi(&self) -> f64 {
        self.t_phi
    }
    pub fn abscissae(&self) -> Abscissae {
        self.absc
    }
    pub fn policy(&self) -> Policy {
        self.policy
    }

    fn g(&self, z: C) -> Result<C> {
        self.phi.ln_phi(z)
    }

    fn g_real(&self, x: f64) -> Result<f64> {
        let v = self.phi.eval_real(x)?;
        if !(v > 0.0) {
            return Err(Error::Domain(format!("phi({x}) = {v} is not positive")));
        }
        Ok(v.ln())
    }

    fn g_prime_real(&self, x: f64) -> Result<f64> {
        Ok(self.phi.deriv_real(x)? / self.phi.eval_real(x)?)
    }

    /// Derivatives g^{(k)}(z0), k ≤ n, of g = ln φ for Re z0 > 0.
    fn g_derivs(&self, z0: C, n: usize) -> Result<Vec<C>> {
        let r = 0.5 * z0.re;
        let mut err = None;
        let d = cauchy_derivatives(
            |z| match self.g(z) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    C::new(0.0, 0.0)
                }
            },
            z0,
            r,
            n,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(d),
        }
    }

    /// γ_φ = lim (Σ_{k≤n} φ′(k)/φ(k) − ln φ(n)), with an Euler–Maclaurin
    /// correction at the cut-off n = 16, 32, … until successive values agree.
    fn compute_gamma_phi(&self) -> Result<f64> {
        let tol = self.policy.rel_tol;
        let mut n = 16usize;
        let mut s = 0.0;
        let mut k_done = 0usize;
        let mut prev: Option<f64> = None;
        while n <= 100_000 {
            for k in k_done + 1..=n {
                s += self.g_prime_real(k as f64)?;
            }
            k_done = n;
            let nf = n as f64;
            let d = self.g_derivs(C::new(nf, 0.0), 6)?;
            let est = s - self.g_real(nf)? - d[1].re / 2.0 - d[2].re / 12.0 + d[4].re / 720.0 - d[6].re / 30240.0;
            if let Some(p) = prev {
                if (est - p).abs() < tol * est.abs().max(1.0) {
                    let lo = -self.g_real(1.0)?;
                    let hi = self.g_prime_real(1.0)? + lo;
                    let slack = 1e-9 * (1.0 + lo.abs() + hi.abs());
                    if est < lo - slack || est > hi + slack {
                        return Err(Error::Convergence(format!(
                            "gamma_phi = {est} outside its bracket [{lo}, {hi}]"
                        )));
                    }
                    return Ok(est);
                }
            }
            prev = Some(est);
            n *= 2;
        }
        Err(Error::Convergence("gamma_phi: 1e5 terms insufficient".into()))
    }

    /// T_φ = −½ ∫₁^∞ {u}(1−{u}) (ln φ)″(u) du, as a sum of trapezoid defects
    /// over unit cells plus an Euler–Maclaurin tail.
    fn compute_t_phi(&self) -> Result<f64> {
        let tol = self.policy.rel_tol;
        let mut k_max = 16usize;
        let mut defects = 0.0;
        let mut k_done = 1usize;
        let mut prev: Option<f64> = None;
        let mut g_prev = self.g_real(1.0)?;
        while k_max <= 1 << 16 {
            for k in k_done..k_max {
                let kf = k as f64;
                let g_next = self.g_real(kf + 1.0)?;
                let mut err = None;
                let int = adaptive_raw(
                    |u: f64| match self.g_real(u) {
                        Ok(v) => v,
                        Err(e) => {
                            err = Some(e);
                            0.0
                        }
                    },
                    kf,
                    kf + 1.0,
                    Tol::new(1e-15, 1e-17),
                    200,
                );
                if let Some(e) = err {
                    return Err(e);
                }
                defects += 0.5 * (g_prev + g_next) - int.value;
                g_prev = g_next;
            }
            k_done = k_max;
            let d = self.g_derivs(C::new(k_max as f64, 0.0), 5)?;
            let tail = -d[1].re / 12.0 + d[3].re / 720.0 - d[5].re / 30240.0;
            let t = -defects - tail;
            if let Some(p) = prev {
                if (t - p).abs() < tol * t.abs().max(1.0) {
                    return Ok(t);
                }
            }
            prev = Some(t);
            k_max *= 2;
        }
        Err(Error::Convergence("T_phi did not converge".into()))
    }

    /// W_φ(z) by the automatic route.
    pub fn wgamma(&self, z: C) -> Result<C> {
        Ok(self.wgamma_route(z, Route::Auto)?.value)
    }

    /// ln W_φ(z) (some branch) by the automatic route.
    pub fn log_wgamma(&self, z: C) -> Result<C> {
        Ok(self.wgamma_route(z, Route::Auto)?.log)
    }

    /// Data-parallel batch evaluation; results do not depend on thread count.
    pub fn wgamma_batch(&self, zs: &[C], route: Route) -> Vec<Result<WValue>> {
        zs.par_iter().map(|z| self.wgamma_route(*z, route)).collect()
    }

    fn check_domain(&self, z: C) -> Result<()> {
        let a = self.absc.a_phi;
        if z.re < a || (z.re == a && !self.phi.finite_at_abscissa()) {
            return Err(Error::Domain(format!(
                "Re z = {} is not right of the analyticity abscissa {a}",
                z.re
            )));
        }
        Ok(())
    }

    /// W_φ(z) by the requested route.
    pub fn wgamma_route(&self, z: C, route: Route) -> Result<WValue> {
        self.check_domain(z)?;
        let route = match route {
            Route::Auto => {
                if self.phi.log_w_closed(C::new(1.0, 0.0)).is_some() {
                    Route::Closed
                } else {
                    Route::Generic
                }
            }
            r => r,
        };
        if route == Route::Closed {
            let l = self.phi.log_w_closed(z).ok_or_else(|| {
                Error::UnsupportedFamily(format!("no closed form for W of {}", self.phi.describe()))
            })?;
            if !l.re.is_finite() {
                return Err(Error::Pole(format!("W has a pole at {z}")));
            }
            return Ok(WValue { value: l.exp(), log: l, route, est_error: 1e-14 * (1.0 + l.norm()) });
        }
        // Lift into Re ≥ R with the recurrence.
        let r = self.policy.shift_threshold;
        let m = if z.re < r { (r - z.re).ceil() as usize } else { 0 };
        let mut pull = C::new(0.0, 0.0);
        for j in 0..m {
            let v = self.phi.eval(z + j as f64)?;
            if v.norm() == 0.0 || !v.norm().is_finite() {
                return Err(Error::Pole(format!("W has a pole at {z}: phi({}) = 0", z + j as f64)));
            }
            pull += v.ln();
        }
        let w = z + m as f64;
        let (core, err, used) = match route {
            Route::Product => {
                let (v, e) = self.log_w_product(w)?;
                (v, e, Route::Product)
            }
            Route::Stirling => {
                let (v, e) = self.log_w_stirling(w)?;
                (v, e, Route::Stirling)
            }
            _ => {
                let b = z.im.abs();
                let (lo, hi) = self.policy.overlap;
                if b >= lo && b <= hi {
                    let (p, ep) = self.log_w_product(w)?;
                    let (s, es) = self.log_w_stirling(w)?;
                    let d = wrap_im(p - s);
                    let limit = (10.0 * self.policy.rel_tol).max(1e-11) * (1.0 + 1e-3 * p.norm());
                    if d.norm() > limit {
                        return Err(Error::Tolerance(format!(
                            "product and Stirling routes disagree at {z}: |dlog| = {:e}",
                            d.norm()
                        )));
                    }
                    if b <= self.policy.im_cutoff {
                        (p, ep.max(d.norm()), Route::Product)
                    } else {
                        (s, es.max(d.norm()), Route::Stirling)
                    }
                } else if b <= self.policy.im_cutoff {
                    let (v, e) = self.log_w_product(w)?;
                    (v, e, Route::Product)
                } else {
                    let (v, e) = self.log_w_stirling(w)?;
                    (v, e, Route::Stirling)
                }
            }
        };
        let log = core - pull;
        Ok(WValue { value: log.exp(), log, route: used, est_error: err })
    }

    /// ln W(w) = −γw − g(w) + Σ_{k≥1} [g(k) − g(k+w) + w g′(k)], truncated at
    /// N with an Euler–Maclaurin tail, N doubling until stable.
    fn log_w_product(&self, w: C) -> Result<(C, f64)> {
        let h = |k: f64| -> Result<C> { Ok(self.g_real(k)? - self.g(w + k)? + w * self.g_prime_real(k)?) };
        let mut n = self.policy.product_start_n.max(4);
        let mut sum = C::new(0.0, 0.0);
        for k in 1..n {
            sum += h(k as f64)?;
        }
        let head = -self.gamma_phi * w - self.g(w)?;
        let mut prev: Option<C> = None;
        loop {
            let val = head + sum + self.product_tail(n as f64, w)?;
            if let Some(p) = prev {
                let d = (val - p).norm();
                if d < 0.5 * self.policy.rel_tol {
                    return Ok((val, d.max(1e-16 * val.norm())));
                }
            }
            prev = Some(val);
            if 2 * n > self.policy.product_cap {
                return Err(Error::Convergence(format!("product route did not settle at w = {w}")));
            }
            for k in n..2 * n {
                sum += h(k as f64)?;
            }
            n *= 2;
        }
    }

    /// Σ_{k≥N} h(k) ≈ ∫_N^{N+w} g − w g(N) + h(N)/2 − h′(N)/12 + h‴(N)/720.
    fn product_tail(&self, nf: f64, w: C) -> Result<C> {
        let gn = self.g_real(nf)?;
        let mut err = None;
        let int = segment(
            |t| match self.g(C::new(nf, 0.0) + t) {
                Ok(v) => v - gn,
                Err(e) => {
                    err = Some(e);
                    C::new(0.0, 0.0)
                }
            },
            C::new(0.0, 0.0),
            w,
            // The integrand is a difference of g values, so rounding in g sets the floor.
            Tol::new(1e-14, 1e-14 * (1.0 + gn.abs())),
            self.policy.panel_budget,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        let a = self.g_derivs(C::new(nf, 0.0), 4)?;
        let b = self.g_derivs(C::new(nf, 0.0) + w, 3)?;
        let hd = |j: usize| a[j] - b[j] + w * a[j + 1];
        Ok(int.value + hd(0) / 2.0 - hd(1) / 12.0 + hd(3) / 720.0)
    }

    /// ln W(w) = −g(w) + ½g(1) − ½g(w+1) + L(w) − T − Ẽ(w).
    fn log_w_stirling(&self, w: C) -> Result<(C, f64)> {
        let mut k = 1usize;
        // Exponentially decaying parts of g need Re x large, not just |x|.
        while w.re + (k as f64) < 24.0 {
            k += 1;
        }
        let tol = Tol::new(1e-14, 1e-15);
        let mut e_tilde = C::new(0.0, 0.0);
        if k > 1 {
            for j in 1..k {
                e_tilde += 0.5 * (self.g(w + j as f64)? + self.g(w + j as f64 + 1.0)?);
            }
            let mut err = None;
            let int = segment(
                |u| match self.g(u) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        C::new(0.0, 0.0)
                    }
                },
                w + 1.0,
                w + k as f64,
                tol,
                self.policy.panel_budget,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            e_tilde -= int.value;
        }
        let x = w + k as f64;
        let d = self.g_derivs(x, 7)?;
        e_tilde += -d[1] / 12.0 + d[3] / 720.0 - d[5] / 30240.0;
        let next = (d[7] / 1_209_600.0).norm();
        let l = self.log_l(w)?;
        let val = -self.g(w)? + 0.5 * self.g_real(1.0)? - 0.5 * self.g(w + 1.0)? + l - self.t_phi - e_tilde;
        Ok((val, next + 1e-15 * val.norm()))
    }

    /// L_φ(z) = ∫_{1→z+1} log φ along 1 → 1 + Re z → 1 + z.
    pub fn log_l(&self, z: C) -> Result<C> {
        if z.re <= -1.0 {
            return Err(Error::Domain("L_phi needs Re z > -1".into()));
        }
        let (a, b) = (z.re, z.im);
        let tol = Tol::new(1e-14, 1e-15);
        let budget = self.policy.panel_budget;
        let mut err = None;
        let re_part = adaptive(
            |u: f64| match self.g_real(u) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            1.0,
            1.0 + a,
            tol,
            budget,
        )?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        let vert = adaptive(
            |u: f64| match self.g(C::new(1.0 + a, u)) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    C::new(0.0, 0.0)
                }
            },
            0.0,
            b,
            tol,
            budget,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(C::new(re_part.value, 0.0) + C::new(0.0, 1.0) * vert.value)
    }

    /// A_φ(a + ib) = ∫₀^b arg φ(a + iu) du, for a > 0.
    pub fn arg_integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(Error::Domain("A_phi needs a > 0".into()));
        }
        let mut err = None;
        let r = adaptive(
            |u: f64| match self.phi.eval(C::new(a, u)) {
                Ok(v) => v.arg(),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            0.0,
            b,
            Tol::new(1e-13, 1e-15),
            self.policy.panel_budget,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(r.value),
        }
    }

    /// The equivalent form ∫_a^∞ ln|φ(u + ib)/φ(u)| du.
    pub fn arg_integral_alt(&self, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(Error::Domain("A_phi needs a > 0".into()));
        }
        let mut err = None;
        let r = half_line(
            |u: f64| match (self.phi.eval(C::new(u, b)), self.phi.eval_real(u)) {
                (Ok(v), Ok(w)) => (v.norm() / w).ln(),
                (Err(e), _) | (_, Err(e)) => {
                    err = Some(e);
                    0.0
                }
            },
            a,
            Tol::new(1e-10, 1e-13),
            self.policy.panel_budget,
            (4.0f64).max(b.abs()),
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(r.value),
        }
    }

    /// Stirling-type estimate √φ(1) e^{−T} e^{L(z)}/(φ(z)√φ(z+1)).
    pub fn stirling_estimate(&self, z: C) -> Result<C> {
        if !(z.re > 0.0) {
            return Err(Error::Domain("the Stirling estimate needs Re z > 0".into()));
        }
        let l = self.log_l(z)?;
        Ok((0.5 * self.g_real(1.0)? - self.t_phi + l - self.g(z)? - 0.5 * self.g(z + 1.0)?).exp())
    }

    /// Modulus form: √φ(1) e^{−T} e^{∫₁^{1+a} ln φ − A(1+a+ib)}/(|φ(a+ib)| √|φ(a+1+ib)|).
    pub fn stirling_estimate_abs(&self, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(Error::Domain("the Stirling estimate needs a > 0".into()));
        }
        let mut err = None;
        let int = adaptive(
            |u: f64| match self.g_real(u) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            1.0,
            1.0 + a,
            Tol::new(1e-14, 1e-15),
            self.policy.panel_budget,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        let big_a = self.arg_integral(1.0 + a, b)?;
        let p0 = self.phi.eval(C::new(a, b))?.norm();
        let p1 = self.phi.eval(C::new(a + 1.0, b))?.norm();
        Ok((0.5 * self.g_real(1.0)? - self.t_phi + int.value - big_a).exp() / (p0 * p1.sqrt()))
    }

    /// Evaluator for φ(· + β), whose W is W_φ(z + β)/W_φ(1 + β).
    pub fn transform_shift(&self, beta: f64) -> Result<Self> {
        if beta == 0.0 {
            return Ok(self.clone());
        }
        let u = self.absc.u_phi;
        if !(beta > u) {
            let ok = beta == u && self.phi.eval_real(u).map(|v| v.abs() < 1e-12).unwrap_or(false);
            if !ok {
                return Err(Error::Domain(format!("shift beta = {beta} must exceed u_phi = {u}")));
            }
        }
        Self::with_policy(self.phi.shifted(beta)?, self.policy)
    }

    /// Evaluator for T_β φ(z) = z φ(z + β)/(z + β).
    pub fn transform_tbeta(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Domain("T_beta needs beta > 0".into()));
        }
        Self::with_policy(self.phi.t_beta(beta)?, self.policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::PhiKind;
    use crate::lgamma::{ln_gamma, EULER_GAMMA};

    fn ev(k: PhiKind) -> BernsteinGammaEvaluator {
        BernsteinGammaEvaluator::new(BernsteinFunction::new(k).unwrap()).unwrap()
    }

    #[test]
    fn euler_constant_and_scaling() {
        let e = ev(PhiKind::Affine { q: 0.0, d: 1.0 });
        assert!((e.gamma_phi() - EULER_GAMMA).abs() < 1e-12, "{}", e.gamma_phi());
        let e3 = ev(PhiKind::Affine { q: 0.0, d: 3.0 });
        assert!((e3.gamma_phi() - (EULER_GAMMA - 3f64.ln())).abs() < 1e-12);
        let t0 = 1.0 - 0.5 * (2.0 * PI).ln();
        assert!((e.t_phi() - t0).abs() < 1e-12, "{}", e.t_phi());
        assert!((e3.t_phi() - t0).abs() < 1e-12);
    }

    #[test]
    fn product_and_stirling_match_gamma() {
        let e = ev(PhiKind::Affine { q: 0.0, d: 1.0 });
        for z in [C::new(5.0, 0.0), C::new(0.7, 3.0), C::new(12.0, -25.0), C::new(2.0, 50.0)] {
            let lg = ln_gamma(z);
            for r in [Route::Product, Route::Stirling] {
                let v = e.wgamma_route(z, r).unwrap();
                let d = wrap_im(v.log - lg);
                assert!(d.norm() < 1e-10, "{z} {r:?} {d}");
            }
        }
        assert!((e.wgamma(C::new(5.0, 0.0)).unwrap().re - 24.0).abs() < 1e-10);
    }

    #[test]
    fn log_l_examples() {
        let e = ev(PhiKind::Affine { q: 0.0, d: 1.0 });
        let l = e.log_l(C::new(1.0, 0.0)).unwrap();
        assert!((l.re - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-14);
        assert_eq!(e.log_l(C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
        let k = ev(PhiKind::Constant { c: 2.0 });
        let z = C::new(1.5, 2.0);
        assert!((k.log_l(z).unwrap() - z * 2f64.ln()).norm() < 1e-14);
    }
}
