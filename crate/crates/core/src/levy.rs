//! Lévy–Khintchine exponents given by their Wiener–Hopf factors.
//!
//! Ψ(z) = −φ₊(−z) φ₋(z); the law of I_Ψ exists iff φ₋(0) > 0.

use crate::bernstein::{rational_partial_fractions, BernsteinFunction, PhiKind, RealFn};
use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Family tag of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Brownian,
    Subordinator,
    NegSubordinator,
    SpectrallyNegative,
    SpectrallyPositive,
    Hypergeometric,
    HyperExponential,
    CustomPair,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Brownian => "brownian",
            Family::Subordinator => "subordinator",
            Family::NegSubordinator => "neg-subordinator",
            Family::SpectrallyNegative => "spectrally-negative",
            Family::SpectrallyPositive => "spectrally-positive",
            Family::Hypergeometric => "hypergeometric",
            Family::HyperExponential => "hyper-exponential",
            Family::CustomPair => "custom-pair",
        }
    }
}

/// Tail class of the negative jumps, needed by the convolution-equivalent
/// tail law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NegTailClass {
    None,
    /// Π̄₋ decays like e^{−ρ x}: exponential moments exist.
    Exponential { rate: f64 },
    /// −ξ₁ ∈ S₀ (subexponential, index 0).
    Subexponential,
}

/// Summary of the Lévy triplet, when the family knows it.
#[derive(Clone)]
pub struct TripletMeta {
    /// Linear coefficient μ in Ψ(z) = μz + σ²z²/2 + ….
    pub linear: f64,
    pub sigma2: f64,
    /// Π̄(0) = Π(ℝ∖{0}).
    pub pi_total: f64,
    /// Π̄₋(x) = Π((−∞, −x)).
    pub pi_tail_neg: Option<RealFn>,
    /// Π̄₊(x) = Π((x, ∞)).
    pub pi_tail_pos: Option<RealFn>,
    pub neg_class: NegTailClass,
    /// Whether the law of ξ₁ lives on a lattice.
    pub lattice: bool,
}

impl fmt::Debug for TripletMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TripletMeta")
            .field("linear", &self.linear)
            .field("sigma2", &self.sigma2)
            .field("pi_total", &self.pi_total)
            .field("neg_class", &self.neg_class)
            .finish()
    }
}

impl TripletMeta {
    fn continuous(linear: f64, sigma2: f64) -> Self {
        TripletMeta {
            linear,
            sigma2,
            pi_total: 0.0,
            pi_tail_neg: None,
            pi_tail_pos: None,
            neg_class: NegTailClass::None,
            lattice: false,
        }
    }
}

/// Path description used by the Monte-Carlo sampler: ξ_t = drift·t + σB_t +
/// jumps, killed at rate `kill`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dynamics {
    pub drift: f64,
    pub sigma2: f64,
    /// (rate λ, exponential parameter ρ) of upward jumps.
    pub pos_jumps: Vec<(f64, f64)>,
    /// (rate λ̂, exponential parameter ρ̂) of downward jumps.
    pub neg_jumps: Vec<(f64, f64)>,
    /// Gamma subordinator component with exponent c ln(1 + z/θ).
    pub gamma_sub: Option<(f64, f64)>,
    /// Stable subordinator component with exponent k z^α: (α, k).
    pub stable_sub: Option<(f64, f64)>,
    pub kill: f64,
}

impl Dynamics {
    fn drift_only(drift: f64, kill: f64) -> Self {
        Dynamics { drift, sigma2: 0.0, pos_jumps: vec![], neg_jumps: vec![], gamma_sub: None, stable_sub: None, kill }
    }
}

/// Hyper-exponential data: Ψ(z) = σ²z²/2 + μz − q + Σλᵢ z/(ρᵢ − z) − Σλ̂ⱼ z/(ρ̂ⱼ + z).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperExp {
    pub q: f64,
    pub sigma2: f64,
    pub mu: f64,
    pub pos: Vec<(f64, f64)>,
    pub neg: Vec<(f64, f64)>,
    /// Positive roots of Ψ = 0, ascending.
    pub chi: Vec<f64>,
    /// Absolute values of the negative roots, ascending.
    pub chi_hat: Vec<f64>,
    /// φ₊ = c_plus Π(z+χ)/Π(z+ρ), φ₋ = c_minus Π(z+χ̂)/Π(z+ρ̂).
    pub c_plus: f64,
    pub c_minus: f64,
}

impl HyperExp {
    /// Unkilled exponent Ψ(z) + q, a rational function.
    pub fn psi0(&self, z: C) -> C {
        let mut v = 0.5 * self.sigma2 * z * z + self.mu * z;
        for (l, r) in &self.pos {
            v += *l * z / (*r - z);
        }
        for (l, r) in &self.neg {
            v -= *l * z / (*r + z);
        }
        v
    }

    fn psi0_real(&self, x: f64) -> f64 {
        self.psi0(C::new(x, 0.0)).re
    }

    /// E[ξ₁] of the unkilled process.
    pub fn mean(&self) -> f64 {
        self.mu + self.pos.iter().map(|(l, r)| l / r).sum::<f64>() - self.neg.iter().map(|(l, r)| l / r).sum::<f64>()
    }
}

/// Real roots of Ψ₀(z) = q bracketed by the poles ±ρ, (χ, χ̂) ascending.
pub fn hyperexp_roots(
    sigma2: f64,
    mu: f64,
    pos: &[(f64, f64)],
    neg: &[(f64, f64)],
    q: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = HyperExp {
        q,
        sigma2,
        mu,
        pos: pos.to_vec(),
        neg: neg.to_vec(),
        chi: vec![],
        chi_hat: vec![],
        c_plus: 1.0,
        c_minus: 1.0,
    };
    let f = |x: f64| h.psi0_real(x) - q;
    let mut rho: Vec<f64> = pos.iter().map(|p| p.1).collect();
    let mut rho_hat: Vec<f64> = neg.iter().map(|p| p.1).collect();
    rho.sort_by(f64::total_cmp);
    rho_hat.sort_by(f64::total_cmp);
    if rho.windows(2).any(|w| w[0] == w[1]) || rho_hat.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Param("jump rates must be distinct".into()));
    }
    let unbounded_up = sigma2 > 0.0 || mu > 0.0;
    let unbounded_down = sigma2 > 0.0 || mu < 0.0;
    let mut chi = Vec::new();
    let mut chi_hat = Vec::new();
    // Positive side.
    let mut edges = vec![0.0];
    edges.extend(rho.iter().copied());
    for k in 0..edges.len() {
        let lo = edges[k];
        let hi = edges.get(k + 1).copied();
        if hi.is_none() && !unbounded_up {
            break;
        }
        if k == 0 && q == 0.0 {
            if h.mean() > 0.0 {
                chi.push(0.0);
            }
            continue;
        }
        chi.push(bracket_root(&f, lo, hi, 1.0)?);
    }
    // Negative side, searched on −z.
    let g = |y: f64| f(-y);
    let mut edges = vec![0.0];
    edges.extend(rho_hat.iter().copied());
    for k in 0..edges.len() {
        let lo = edges[k];
        let hi = edges.get(k + 1).copied();
        if hi.is_none() && !unbounded_down {
            break;
        }
        if k == 0 && q == 0.0 {
            if h.mean() < 0.0 {
                chi_hat.push(0.0);
            }
            continue;
        }
        chi_hat.push(bracket_root(&g, lo, hi, 1.0)?);
    }
    Ok((chi, chi_hat))
}

/// Root of f on (lo, hi) where f(lo⁺) < 0 < f(hi⁻); `hi = None` means +∞.
fn bracket_root<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: Option<f64>, scale: f64) -> Result<f64> {
    let eps = |x: f64| 1e-13 * x.abs().max(scale);
    let mut a = lo + eps(lo);
    let mut b = match hi {
        Some(h) => h - eps(h),
        None => {
            let mut b = (lo.abs() + scale) * 2.0;
            let mut n = 0;
            while f(b) <= 0.0 {
                b *= 2.0;
                n += 1;
                if n > 200 {
                    return Err(Error::RootBracket(format!("no sign change to the right of {lo}")));
                }
            }
            b
        }
    };
    let (fa, fb) = (f(a), f(b));
    if !(fa < 0.0 && fb > 0.0) {
        return Err(Error::RootBracket(format!(
            "no sign change on ({lo}, {}) : f = {fa:e}, {fb:e}",
            hi.map_or("inf".to_string(), |h| h.to_string())
        )));
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Extended-real strip parameters of Ψ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StripParams {
    pub a_plus: f64,
    pub u_plus: f64,
    pub abar_plus: f64,
    pub a_minus: f64,
    pub u_minus: f64,
    pub abar_minus: f64,
    pub c_psi: f64,
}

/// Support of I_Ψ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Support {
    Point { at: f64 },
    Interval { lo: f64, hi: f64 },
}

type PsiFn = Arc<dyn Fn(C) -> C + Send + Sync>;

/// A Lévy–Khintchine exponent in Wiener–Hopf form. Immutable.
#[derive(Clone)]
pub struct LevyExponent {
    pub id: String,
    pub family: Family,
    phi_plus: BernsteinFunction,
    phi_minus: BernsteinFunction,
    pub meta: TripletMeta,
    /// v₋(0⁺), the density at 0⁺ of the Lévy measure of φ₋.
    pub v_minus0: Option<f64>,
    pub hyperexp: Option<HyperExp>,
    pub dynamics: Option<Dynamics>,
    psi_ref: Option<PsiFn>,
}

impl fmt::Debug for LevyExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyExponent")
            .field("id", &self.id)
            .field("family", &self.family)
            .field("phi_plus", &self.phi_plus.describe())
            .field("phi_minus", &self.phi_minus.describe())
            .finish()
    }
}

fn affine(q: f64, d: f64) -> Result<BernsteinFunction> {
    BernsteinFunction::new(PhiKind::Affine { q, d })
}

fn one() -> BernsteinFunction {
    BernsteinFunction::new(PhiKind::Constant { c: 1.0 }).expect("constant 1 is valid")
}

impl LevyExponent {
    fn build(
        id: &str,
        family: Family,
        phi_plus: BernsteinFunction,
        phi_minus: BernsteinFunction,
        meta: TripletMeta,
        v_minus0: Option<f64>,
    ) -> Result<Self> {
        let l = LevyExponent {
            id: id.to_string(),
            family,
            phi_plus,
            phi_minus,
            meta,
            v_minus0,
            hyperexp: None,
            dynamics: None,
            psi_ref: None,
        };
        l.check_existence()?;
        Ok(l)
    }

    fn check_existence(&self) -> Result<()> {
        let v = self.phi_minus.eval_real(0.0)?;
        if !(v > 0.0) {
            return Err(Error::Existence(format!(
                "phi_-(0) = {v}: the exponential functional is infinite almost surely"
            )));
        }
        Ok(())
    }

    /// Ψ(z) = σ²z²/2 + μz − q.
    pub fn brownian(q: f64, sigma2: f64, mu: f64) -> Result<Self> {
        if !(q >= 0.0 && sigma2 >= 0.0 && mu.is_finite()) {
            return Err(Error::Param("brownian needs q >= 0, sigma2 >= 0".into()));
        }
        if sigma2 == 0.0 {
            return if mu > 0.0 {
                Self::killed_drift(q, mu)
            } else {
                let mut l = Self::neg_subordinator(affine(q, -mu)?)?;
                l.dynamics = Some(Dynamics::drift_only(mu, q));
                Ok(l)
            };
        }
        let root = (mu * mu + 2.0 * q * sigma2).sqrt();
        let b_plus = (mu + root) / sigma2;
        let b_minus = (mu - root) / sigma2;
        let mut l = Self::build(
            "brownian",
            Family::Brownian,
            affine(-b_minus, 1.0)?,
            affine(0.5 * sigma2 * b_plus, 0.5 * sigma2)?,
            TripletMeta::continuous(mu, sigma2),
            Some(0.0),
        )?;
        l.dynamics = Some(Dynamics { sigma2, ..Dynamics::drift_only(mu, q) });
        l.psi_ref = Some(Arc::new(move |z: C| 0.5 * sigma2 * z * z + mu * z - q));
        Ok(l)
    }

    /// ξ = 2(B + μt), unkilled.
    pub fn dufresne(mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::Existence("Dufresne functional needs mu > 0".into()));
        }
        let mut l = Self::brownian(0.0, 4.0, 2.0 * mu)?;
        l.id = "dufresne".into();
        Ok(l)
    }

    /// ξ_t = d t killed at rate q: Ψ(z) = dz − q.
    pub fn killed_drift(q: f64, d: f64) -> Result<Self> {
        if !(q >= 0.0 && d > 0.0) {
            return Err(Error::Param("killed drift needs q >= 0, d > 0".into()));
        }
        let mut l = Self::build(
            "killed-drift",
            Family::Subordinator,
            affine(q, d)?,
            one(),
            TripletMeta::continuous(d, 0.0),
            Some(0.0),
        )?;
        l.dynamics = Some(Dynamics::drift_only(d, q));
        l.psi_ref = Some(Arc::new(move |z: C| d * z - q));
        Ok(l)
    }

    /// Potentially killed subordinator with Laplace exponent φ: Ψ(z) = −φ(−z).
    pub fn subordinator(phi: BernsteinFunction) -> Result<Self> {
        let mass = phi.levy_mass();
        let mut meta = TripletMeta::continuous(phi.drift(), 0.0);
        meta.pi_total = if mass.is_nan() { f64::INFINITY } else { mass };
        let dynamics = match phi.kind() {
            PhiKind::Affine { q, d } => Some(Dynamics::drift_only(*d, *q)),
            PhiKind::Constant { c } => Some(Dynamics::drift_only(0.0, *c)),
            PhiKind::LogGamma { q, c, theta } => {
                Some(Dynamics { gamma_sub: Some((*c, *theta)), ..Dynamics::drift_only(0.0, *q) })
            }
            PhiKind::Power { q, alpha, c } if *q == 0.0 => {
                Some(Dynamics { stable_sub: Some((*alpha, 1.0)), ..Dynamics::drift_only(0.0, *c) })
            }
            PhiKind::Scaled { c: k, inner } => match inner.kind() {
                PhiKind::Power { q, alpha, c } if *q == 0.0 => {
                    Some(Dynamics { stable_sub: Some((*alpha, *k)), ..Dynamics::drift_only(0.0, k * c) })
                }
                _ => None,
            },
            _ => None,
        };
        let mut l = Self::build("subordinator", Family::Subordinator, phi, one(), meta, Some(0.0))?;
        l.dynamics = dynamics;
        Ok(l)
    }

    /// Negative of a killed subordinator: Ψ(z) = −φ(z), φ(0) > 0.
    pub fn neg_subordinator(phi: BernsteinFunction) -> Result<Self> {
        let mass = phi.levy_mass();
        let mut meta = TripletMeta::continuous(-phi.drift(), 0.0);
        meta.pi_total = if mass.is_nan() { f64::INFINITY } else { mass };
        let v0 = if phi.drift() == 0.0 { None } else { Some(f64::NAN) };
        let mut l = Self::build("neg-subordinator", Family::NegSubordinator, one(), phi, meta, v0)?;
        if let PhiKind::Affine { q, d } = l.phi_minus.kind() {
            l.dynamics = Some(Dynamics::drift_only(-d, *q));
        }
        Ok(l)
    }

    /// Explicit pair (φ₊, φ₋) with the existence check.
    pub fn custom_pair(phi_plus: BernsteinFunction, phi_minus: BernsteinFunction) -> Result<Self> {
        let mut meta = TripletMeta::continuous(f64::NAN, f64::NAN);
        meta.pi_total = f64::INFINITY;
        Self::build("custom-pair", Family::CustomPair, phi_plus, phi_minus, meta, None)
    }

    /// Explicit pair without the existence check. Only strip parameters and
    /// Ψ are meaningful for such objects.
    pub fn custom_pair_unchecked(phi_plus: BernsteinFunction, phi_minus: BernsteinFunction) -> Self {
        let mut meta = TripletMeta::continuous(f64::NAN, f64::NAN);
        meta.pi_total = f64::INFINITY;
        LevyExponent {
            id: "custom-pair".into(),
            family: Family::CustomPair,
            phi_plus,
            phi_minus,
            meta,
            v_minus0: None,
            hyperexp: None,
            dynamics: None,
            psi_ref: None,
        }
    }

    /// Two-sided process without exponential moments: φ± = z^α±.
    /// The descending factor vanishes at 0, so this model has no finite
    /// exponential functional and is built unchecked.
    pub fn two_sided_heavy(alpha_plus: f64, alpha_minus: f64) -> Result<Self> {
        let p = BernsteinFunction::new(PhiKind::Power { q: 0.0, alpha: alpha_plus, c: 0.0 })?;
        let m = BernsteinFunction::new(PhiKind::Power { q: 0.0, alpha: alpha_minus, c: 0.0 })?;
        let mut l = Self::custom_pair_unchecked(p, m);
        l.id = "two-sided-heavy".into();
        Ok(l)
    }

    /// Ψ(z) = −Γ(1−β+γ−z)/Γ(1−β−z) · Γ(β̂+γ̂+z)/Γ(β̂+z).
    pub fn hypergeometric(beta: f64, gamma: f64, beta_hat: f64, gamma_hat: f64) -> Result<Self> {
        let ok = beta <= 1.0 && beta_hat >= 0.0 && gamma > 0.0 && gamma < 1.0 && gamma_hat > 0.0 && gamma_hat < 1.0;
        if !ok {
            return Err(Error::Param("hypergeometric needs beta <= 1, beta_hat >= 0, gamma, gamma_hat in (0,1)".into()));
        }
        let p = BernsteinFunction::new(PhiKind::GammaRatio { a: 1.0 - beta, b: gamma })?;
        let m = BernsteinFunction::new(PhiKind::GammaRatio { a: beta_hat, b: gamma_hat })?;
        let mut meta = TripletMeta::continuous(f64::NAN, 0.0);
        meta.pi_total = f64::INFINITY;
        Self::build("hypergeometric", Family::Hypergeometric, p, m, meta, None)
    }

    /// Brownian motion with drift, exponential jumps on both sides, killed at q.
    pub fn hyper_exponential(
        q: f64,
        sigma2: f64,
        mu: f64,
        pos: Vec<(f64, f64)>,
        neg: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if !(q >= 0.0 && sigma2 >= 0.0 && mu.is_finite()) {
            return Err(Error::Param("hyper-exponential needs q >= 0, sigma2 >= 0".into()));
        }
        if pos.iter().chain(neg.iter()).any(|(l, r)| !(*l > 0.0 && *r > 0.0)) {
            return Err(Error::Param("jump rates and exponential parameters must be > 0".into()));
        }
        let (chi, chi_hat) = hyperexp_roots(sigma2, mu, &pos, &neg, q)?;
        let mut h = HyperExp { q, sigma2, mu, pos: pos.clone(), neg: neg.clone(), chi, chi_hat, c_plus: 1.0, c_minus: 1.0 };
        if q == 0.0 && h.mean() <= 0.0 {
            return Err(Error::Existence("unkilled hyper-exponential must drift to +infinity".into()));
        }
        let rho: Vec<f64> = pos.iter().map(|p| p.1).collect();
        let rho_hat: Vec<f64> = neg.iter().map(|p| p.1).collect();
        // Fix C₊C₋ on the imaginary axis, where no root or pole can sit.
        let z0 = C::new(0.0, 1.0);
        let mut prod = C::new(1.0, 0.0);
        for x in &h.chi {
            prod *= *x - z0;
        }
        for x in &h.chi_hat {
            prod *= z0 + *x;
        }
        for r in &rho {
            prod /= *r - z0;
        }
        for r in &rho_hat {
            prod /= z0 + *r;
        }
        let k = -(h.psi0(z0) - q) / prod;
        if k.im.abs() > 1e-9 * k.norm() || !(k.re > 0.0) {
            return Err(Error::Tolerance(format!("Wiener-Hopf normalisation is not a positive real: {k}")));
        }
        h.c_plus = k.re;
        h.c_minus = 1.0;
        let p = BernsteinFunction::new(PhiKind::Rational { c: h.c_plus, zeros: h.chi.clone(), poles: rho.clone() })?;
        let m = BernsteinFunction::new(PhiKind::Rational {
            c: h.c_minus,
            zeros: h.chi_hat.clone(),
            poles: rho_hat.clone(),
        })?;
        let lam_pos: f64 = pos.iter().map(|p| p.0).sum();
        let lam_neg: f64 = neg.iter().map(|p| p.0).sum();
        let neg_c = neg.clone();
        let pos_c = pos.clone();
        let meta = TripletMeta {
            linear: mu,
            sigma2,
            pi_total: lam_pos + lam_neg,
            pi_tail_neg: Some(Arc::new(move |x: f64| neg_c.iter().map(|(l, r)| l * (-r * x).exp()).sum())),
            pi_tail_pos: Some(Arc::new(move |x: f64| pos_c.iter().map(|(l, r)| l * (-r * x).exp()).sum())),
            neg_class: match rho_hat.iter().copied().reduce(f64::min) {
                Some(r) => NegTailClass::Exponential { rate: r },
                None => NegTailClass::None,
            },
            lattice: false,
        };
        // v₋(0⁺) = Σ wⱼ where φ₋ = e − Σ wⱼ/(z + ρ̂ⱼ) on the degree-0 branch.
        let v0 = if h.chi_hat.len() == rho_hat.len() {
            let (_, amps) = rational_partial_fractions(h.c_minus, &h.chi_hat, &rho_hat);
            Some(-amps.iter().sum::<f64>())
        } else {
            None
        };
        let family = match (pos.is_empty(), neg.is_empty()) {
            (true, true) => Family::Brownian,
            (true, false) => Family::SpectrallyNegative,
            (false, true) => Family::SpectrallyPositive,
            (false, false) => Family::HyperExponential,
        };
        let mut l = Self::build("hyper-exponential", family, p, m, meta, v0)?;
        l.dynamics = Some(Dynamics {
            drift: mu,
            sigma2,
            pos_jumps: pos,
            neg_jumps: neg,
            gamma_sub: None,
            stable_sub: None,
            kill: q,
        });
        let hc = h.clone();
        l.psi_ref = Some(Arc::new(move |z: C| hc.psi0(z) - hc.q));
        l.hyperexp = Some(h);
        Ok(l)
    }

    /// Attaches a declared triplet summary (used by custom pairs).
    pub fn with_meta(mut self, meta: TripletMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_v_minus0(mut self, v: f64) -> Self {
        self.v_minus0 = Some(v);
        self
    }

    pub fn phi_plus(&self) -> &BernsteinFunction {
        &self.phi_plus
    }

    pub fn phi_minus(&self) -> &BernsteinFunction {
        &self.phi_minus
    }

    /// Ψ(z) = −φ₊(−z)φ₋(z) on the joint domain.
    pub fn psi(&self, z: C) -> Result<C> {
        let ap = self.phi_plus.a_phi();
        let am = self.phi_minus.a_phi();
        if !(-z.re > ap || (-z.re == ap && self.phi_plus.finite_at_abscissa()))
            || !(z.re > am || (z.re == am && self.phi_minus.finite_at_abscissa()))
        {
            return Err(Error::Domain(format!("Re z = {} outside the strip ({am}, {})", z.re, -ap)));
        }
        Ok(-self.phi_plus.eval(-z)? * self.phi_minus.eval(z)?)
    }

    pub fn psi_real(&self, x: f64) -> Result<f64> {
        Ok(self.psi(C::new(x, 0.0))?.re)
    }

    /// Ψ′(x) for real x.
    pub fn psi_deriv_real(&self, x: f64) -> Result<f64> {
        let p = self.phi_plus.eval_real(-x)?;
        let dp = self.phi_plus.deriv_real(-x)?;
        let m = self.phi_minus.eval_real(x)?;
        let dm = self.phi_minus.deriv_real(x)?;
        Ok(dp * m - p * dm)
    }

    /// The family's own closed-form Ψ, when it has one.
    pub fn psi_reference(&self, z: C) -> Option<C> {
        self.psi_ref.as_ref().map(|f| f(z))
    }

    /// −Ψ(0), the killing rate.
    pub fn kill_rate(&self) -> f64 {
        self.phi_plus.kill() * self.phi_minus.kill()
    }

    /// E[ξ₁] = φ₊′(0⁺)φ₋(0) when Ψ(0) = 0.
    pub fn mean(&self) -> Option<f64> {
        if self.kill_rate() > 0.0 {
            return None;
        }
        let d = self.phi_plus.deriv_at_zero()?;
        Some(d * self.phi_minus.kill())
    }

    /// φ₊ = cφ₋, checked on real probes.
    pub fn is_symmetric(&self) -> bool {
        let r = |x: f64| -> Option<f64> {
            let p = self.phi_plus.eval_real(x).ok()?;
            let m = self.phi_minus.eval_real(x).ok()?;
            Some(p / m)
        };
        let base = match r(1.0) {
            Some(v) if v.is_finite() && v > 0.0 => v,
            _ => return false,
        };
        [0.5, 2.0, 5.0, 17.0].iter().all(|&x| r(x).is_some_and(|v| (v - base).abs() <= 1e-12 * base))
    }

    pub fn is_subordinator(&self) -> bool {
        self.phi_minus.is_constant()
    }

    pub fn is_neg_subordinator(&self) -> bool {
        self.phi_plus.is_constant()
    }

    /// φ₊(z) = d₊z exactly.
    pub fn phi_plus_is_pure_drift(&self) -> bool {
        self.phi_plus.kill() == 0.0 && self.phi_plus.levy_mass() == 0.0 && self.phi_plus.drift() > 0.0
    }

    pub fn strip_params(&self) -> Result<StripParams> {
        let p = self.phi_plus.abscissae()?;
        let m = self.phi_minus.abscissae()?;
        let u_plus = -p.u_phi;
        let a_plus = -p.a_phi;
        let c_psi = if u_plus == 0.0 { -a_plus } else { 0.0 };
        Ok(StripParams {
            a_plus,
            u_plus,
            abar_plus: -p.abar_phi,
            a_minus: m.a_phi,
            u_minus: m.u_phi,
            abar_minus: m.abar_phi,
            c_psi,
        })
    }

    /// Smoothness index N_Ψ.
    pub fn n_psi(&self) -> Result<f64> {
        let dp = self.phi_plus.drift();
        let dm = self.phi_minus.drift();
        if !(dp > 0.0 && dm == 0.0 && self.meta.pi_total < f64::INFINITY) {
            return Ok(f64::INFINITY);
        }
        let v0 = match self.v_minus0 {
            Some(v) if v.is_finite() => v,
            _ => return Err(Error::MissingData("v_-(0+) is required for a finite N_Psi".into())),
        };
        let mp = self.phi_plus.levy_mass();
        let mm = self.phi_minus.levy_mass();
        let first = if v0 == 0.0 { 0.0 } else { v0 / (self.phi_minus.kill() + mm) };
        Ok(first + (self.phi_plus.kill() + mp) / dp)
    }

    pub fn support(&self) -> Support {
        let dp = self.phi_plus.drift();
        let edge = |pm_inf: f64| {
            let den = pm_inf * dp;
            if den > 0.0 {
                1.0 / den
            } else {
                f64::INFINITY
            }
        };
        if self.is_subordinator() {
            let e = edge(self.phi_minus.limit_at_infinity());
            if self.phi_plus_is_pure_drift() {
                return Support::Point { at: e };
            }
            return Support::Interval { lo: 0.0, hi: e };
        }
        if self.phi_plus_is_pure_drift() {
            let inf = self.phi_minus.limit_at_infinity();
            let lo = if inf.is_finite() { 1.0 / (inf * dp) } else { 0.0 };
            return Support::Interval { lo, hi: f64::INFINITY };
        }
        Support::Interval { lo: 0.0, hi: f64::INFINITY }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        let b = LevyExponent::brownian(1.0, 2.0, 0.0).unwrap();
        let v = b.psi(C::new(2.0, 0.0) * C::new(0.0, 1.0)).unwrap();
        assert!((v - C::new(-5.0, 0.0)).norm() < 1e-13);
        let k = LevyExponent::killed_drift(2.5, 1.0).unwrap();
        assert!((k.psi_real(0.0).unwrap() + 2.5).abs() < 1e-15);
    }

    #[test]
    fn existence_gate() {
        let r = LevyExponent::custom_pair(
            BernsteinFunction::new(PhiKind::Affine { q: 1.0, d: 1.0 }).unwrap(),
            BernsteinFunction::new(PhiKind::Affine { q: 0.0, d: 1.0 }).unwrap(),
        );
        assert!(matches!(r, Err(Error::Existence(_))));
        assert!(LevyExponent::brownian(0.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn n_psi_and_support() {
        let k = LevyExponent::killed_drift(2.5, 1.0).unwrap();
        assert_eq!(k.n_psi().unwrap(), 2.5);
        assert_eq!(k.support(), Support::Interval { lo: 0.0, hi: 1.0 });
        let b = LevyExponent::brownian(1.0, 2.0, 0.0).unwrap();
        assert_eq!(b.n_psi().unwrap(), f64::INFINITY);
        assert_eq!(b.support(), Support::Interval { lo: 0.0, hi: f64::INFINITY });
        let d = LevyExponent::killed_drift(0.0, 2.0).unwrap();
        assert_eq!(d.support(), Support::Point { at: 0.5 });
    }

    #[test]
    fn hyperexp_interlacing() {
        let h = LevyExponent::hyper_exponential(0.5, 0.4, 0.1, vec![(1.0, 2.0), (0.5, 5.0)], vec![(0.7, 1.5)]).unwrap();
        let d = h.hyperexp.as_ref().unwrap();
        assert_eq!(d.chi.len(), 3);
        assert_eq!(d.chi_hat.len(), 2);
        assert!(d.chi[0] < 2.0 && 2.0 < d.chi[1] && d.chi[1] < 5.0 && 5.0 < d.chi[2]);
        assert!(d.chi_hat[0] < 1.5 && 1.5 < d.chi_hat[1]);
        for t in [0.3, 1.0, 4.0, 20.0] {
            let z = C::new(0.0, t);
            let a = h.psi(z).unwrap();
            let b = h.psi_reference(z).unwrap();
            assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()), "{a} {b}");
        }
    }
}
