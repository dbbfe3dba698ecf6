//! Bernstein functions φ(z) = φ(0) + d z + ∫(1 − e^{−zy}) μ(dy): catalog
//! families with closed forms, measure-defined functions evaluated by
//! quadrature, and the abscissae a_φ, u_φ, ā_φ.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::lgamma::{digamma, gamma, ln_gamma, ln_gamma_ratio, ln_qgamma, ln_qpochhammer_inf};
use crate::quad::{adaptive, half_line, Tol};
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Shared real function of one variable.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Lévy measure of a subordinator.
#[derive(Clone)]
pub enum LevyMeasureSpec {
    /// No jumps.
    Zero,
    /// Tail μ̄(y) = μ((y, ∞)), with μ̄(y) ≤ K e^{−βy} for large y.
    Tail { tail: RealFn, beta: f64, total_mass: f64 },
    /// Finitely many atoms (position, mass).
    Atoms(Vec<(f64, f64)>),
    /// Density ν(y) with exponential tail bound β.
    Density { density: RealFn, beta: f64, total_mass: f64 },
}

impl fmt::Debug for LevyMeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevyMeasureSpec::Zero => write!(f, "Zero"),
            LevyMeasureSpec::Tail { beta, total_mass, .. } => {
                write!(f, "Tail {{ beta: {beta}, total_mass: {total_mass} }}")
            }
            LevyMeasureSpec::Atoms(a) => write!(f, "Atoms({a:?})"),
            LevyMeasureSpec::Density { beta, total_mass, .. } => {
                write!(f, "Density {{ beta: {beta}, total_mass: {total_mass} }}")
            }
        }
    }
}

impl LevyMeasureSpec {
    /// Exponential tail rate β, so that the measure integrals converge on Re z > −β.
    pub fn beta(&self) -> f64 {
        match self {
            LevyMeasureSpec::Zero => f64::INFINITY,
            LevyMeasureSpec::Tail { beta, .. } | LevyMeasureSpec::Density { beta, .. } => *beta,
            LevyMeasureSpec::Atoms(a) => {
                if a.is_empty() {
                    f64::INFINITY
                } else {
                    // Compact support: every exponential moment is finite.
                    f64::INFINITY
                }
            }
        }
    }

    /// Total mass μ̄(0⁺), possibly infinite.
    pub fn total_mass(&self) -> f64 {
        match self {
            LevyMeasureSpec::Zero => 0.0,
            LevyMeasureSpec::Tail { total_mass, .. } | LevyMeasureSpec::Density { total_mass, .. } => {
                *total_mass
            }
            LevyMeasureSpec::Atoms(a) => a.iter().map(|p| p.1).sum(),
        }
    }

    /// μ̄(y); for densities this integrates the density numerically.
    pub fn tail_at(&self, y: f64) -> f64 {
        match self {
            LevyMeasureSpec::Zero => 0.0,
            LevyMeasureSpec::Tail { tail, .. } => tail(y),
            LevyMeasureSpec::Atoms(a) => a.iter().filter(|p| p.0 > y).map(|p| p.1).sum(),
            LevyMeasureSpec::Density { density, .. } => {
                let d = density.clone();
                half_line(move |s: f64| d(s), y, Tol::new(1e-11, 1e-300), 4000, 4.0)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// Construction-time sanity checks: monotone tail, ∫₀¹ μ̄ < ∞ and a
    /// tail bound consistent with the declared β.
    pub fn validate(&self) -> Result<()> {
        match self {
            LevyMeasureSpec::Zero => Ok(()),
            LevyMeasureSpec::Atoms(a) => {
                if a.iter().any(|p| !(p.0 > 0.0) || !(p.1 >= 0.0)) {
                    return Err(Error::Param("atoms need positive positions and nonnegative masses".into()));
                }
                Ok(())
            }
            LevyMeasureSpec::Tail { tail, beta, .. } => {
                if !(*beta >= 0.0) {
                    return Err(Error::Param("tail bound beta must be nonnegative".into()));
                }
                let mut prev = f64::INFINITY;
                let mut int01 = 0.0;
                for k in (0..40).rev() {
                    let y = 2f64.powi(-k);
                    let v = tail(y);
                    if !(v >= 0.0) || v > prev * (1.0 + 1e-12) + 1e-300 {
                        return Err(Error::Param(format!("tail is not non-increasing near y={y}")));
                    }
                    if k >= 1 {
                        int01 += v * y;
                    }
                    prev = v;
                }
                if !int01.is_finite() {
                    return Err(Error::Param("tail is not integrable on (0, 1]".into()));
                }
                let mut y: f64 = 1.0;
                let mut last = 0.0;
                let mut sup = 0.0f64;
                while y <= 64.0 {
                    let v = tail(y);
                    if v > last && y > 1.0 && last > 0.0 && v > last * (1.0 + 1e-12) {
                        return Err(Error::Param(format!("tail is not non-increasing near y={y}")));
                    }
                    sup = sup.max(v * (0.5 * beta.min(700.0 / y) * y).exp());
                    last = v;
                    y += 0.5;
                }
                if !sup.is_finite() {
                    return Err(Error::Param("declared exponential tail bound is inconsistent".into()));
                }
                Ok(())
            }
            LevyMeasureSpec::Density { density, beta, .. } => {
                if !(*beta >= 0.0) {
                    return Err(Error::Param("tail bound beta must be nonnegative".into()));
                }
                for k in 0..40 {
                    let y = 2f64.powi(-k) * 3.0;
                    if !(density(y) >= 0.0) {
                        return Err(Error::Param(format!("density negative or undefined at y={y}")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Catalog of Bernstein functions. Parameters follow the usual conventions.
#[derive(Clone, Debug)]
pub enum PhiKind {
    /// φ ≡ c.
    Constant { c: f64 },
    /// q + d z.
    Affine { q: f64, d: f64 },
    /// c + (z + q)^α.
    Power { q: f64, alpha: f64, c: f64 },
    /// (z + 1 − a)/(z + b).
    ShiftedRatio { a: f64, b: f64 },
    /// Γ(az + b)/Γ(a(z − 1) + b).
    GammaLinear { a: f64, b: f64 },
    /// Γ(az + a)/(z Γ(az)).
    GammaScaled { a: f64 },
    /// Γ(z + a + b)/Γ(z + a).
    GammaRatio { a: f64, b: f64 },
    /// 1 − q^{z+b}.
    Geom { q: f64, b: f64 },
    /// z/(z + a).
    Ratio { a: f64 },
    /// z/(z + a)^α.
    RatioPower { a: f64, alpha: f64 },
    /// z^α/(1 + z)^α.
    StableRatio { alpha: f64 },
    /// (1 − q^z)/(1 − q).
    QGamma { q: f64 },
    /// q + c ln(1 + z/θ): killed gamma subordinator.
    LogGamma { q: f64, c: f64, theta: f64 },
    /// q + s(√(2z + b²) − b): killed inverse-Gaussian subordinator.
    InverseGaussian { q: f64, s: f64, b: f64 },
    /// c Π(z + ζ_i)/Π(z + p_l).
    Rational { c: f64, zeros: Vec<f64>, poles: Vec<f64> },
    /// c φ(z).
    Scaled { c: f64, inner: Box<BernsteinFunction> },
    /// φ(z + β).
    Shifted { beta: f64, inner: Box<BernsteinFunction> },
    /// z φ(z + β)/(z + β).
    TBeta { beta: f64, inner: Box<BernsteinFunction> },
    /// Π φ_i(z), assumed Bernstein by the caller.
    Product(Vec<BernsteinFunction>),
    /// Defined by killing, drift and Lévy measure; evaluated by quadrature.
    Measure { kill: f64, drift: f64, measure: LevyMeasureSpec, a_phi: f64 },
    /// User-supplied expression with declared abscissa.
    Expr { expr: Expr, source: String, a_phi: f64 },
}

/// Extended-real abscissae of φ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Abscissae {
    pub a_phi: f64,
    pub u_phi: f64,
    pub abar_phi: f64,
}

/// An immutable Bernstein function.
#[derive(Clone, Debug)]
pub struct BernsteinFunction {
    kind: PhiKind,
}

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// 1 − e^{−w} without cancellation for small |w|.
fn one_minus_exp_neg(w: C) -> C {
    if w.norm() < 1e-3 {
        w * (1.0 - w * (0.5 - w * (1.0 / 6.0 - w / 24.0)))
    } else {
        1.0 - (-w).exp()
    }
}

/// Confluent hypergeometric ₁F₁(α; 1; −y) for y ≥ 0 and α ∈ (0, 1): the tail
/// of the measure of (z/(1+z))^α.
fn hyp1f1_neg(alpha: f64, y: f64) -> f64 {
    if y < 40.0 {
        // Kummer: e^{−y} ₁F₁(1 − α; 1; y), a positive series.
        let a = 1.0 - alpha;
        let mut term = 1.0;
        let mut s = 1.0;
        for n in 0..2000 {
            let nf = n as f64;
            term *= (a + nf) * y / ((nf + 1.0) * (nf + 1.0));
            s += term;
            if term < 1e-17 * s {
                break;
            }
        }
        s * (-y).exp()
    } else {
        // Large-argument expansion y^{−α}/Γ(1−α) Σ (α)_n² / n! y^{−n}.
        let mut term = 1.0;
        let mut s = 1.0;
        for n in 0..60 {
            let nf = n as f64;
            let next = term * (alpha + nf) * (alpha + nf) / ((nf + 1.0) * y);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            s += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        s * y.powf(-alpha) / gamma(1.0 - alpha)
    }
}

/// Taylor data g^{(k)}(z0), k = 0..=n, from a 64-point trapezoid rule on the
/// circle |z − z0| = r.
pub fn cauchy_derivatives<F: FnMut(C) -> C>(mut f: F, z0: C, r: f64, n: usize) -> Vec<C> {
    const M: usize = 64;
    let vals: Vec<C> = (0..M)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / M as f64;
            f(z0 + C::from_polar(r, th))
        })
        .collect();
    let mut out = Vec::with_capacity(n + 1);
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        let mut s = C::new(0.0, 0.0);
        for (j, v) in vals.iter().enumerate() {
            let th = 2.0 * PI * (j * k) as f64 / M as f64;
            s += v * C::from_polar(1.0, -th);
        }
        out.push(s / M as f64 * fact / r.powi(k as i32));
    }
    out
}

fn cpow(z: C, a: f64) -> C {
    if z.re == 0.0 && z.im == 0.0 {
        return c(if a > 0.0 { 0.0 } else { f64::INFINITY });
    }
    (a * z.ln()).exp()
}

impl BernsteinFunction {
    /// Validates parameters and wraps the kind.
    pub fn new(kind: PhiKind) -> Result<Self> {
        let bad = |m: &str| Err(Error::Param(m.to_string()));
        match &kind {
            PhiKind::Constant { c } if !(*c >= 0.0) => return bad("constant must be >= 0"),
            PhiKind::Affine { q, d } if !(*q >= 0.0 && *d >= 0.0) => return bad("affine needs q >= 0, d >= 0"),
            PhiKind::Power { q, alpha, c } if !(*q >= 0.0 && *alpha > 0.0 && *alpha < 1.0 && *c >= 0.0) => {
                return bad("power needs q >= 0, alpha in (0,1), c >= 0")
            }
            PhiKind::ShiftedRatio { a, b } if !(*a > 0.0 && *a < 1.0 && *b >= 1.0 - *a) => {
                return bad("shifted-ratio needs a in (0,1), b >= 1-a")
            }
            PhiKind::GammaLinear { a, b } if !(*a > 0.0 && *a < 1.0 && *b >= *a) => {
                return bad("gamma-linear needs a in (0,1), b >= a")
            }
            PhiKind::GammaScaled { a } if !(*a > 1.0 && *a < 2.0) => return bad("gamma-scaled needs a in (1,2)"),
            PhiKind::GammaRatio { a, b } if !(*a >= 0.0 && *b > 0.0 && *b < 1.0) => {
                return bad("gamma-ratio needs a >= 0, b in (0,1)")
            }
            PhiKind::Geom { q, b } if !(*q > 0.0 && *q < 1.0 && *b >= 0.0) => return bad("geom needs q in (0,1), b >= 0"),
            PhiKind::Ratio { a } if !(*a > 0.0) => return bad("ratio needs a > 0"),
            PhiKind::RatioPower { a, alpha } if !(*a > 0.0 && *alpha > 0.0 && *alpha < 1.0) => {
                return bad("ratio-power needs a > 0, alpha in (0,1)")
            }
            PhiKind::StableRatio { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => {
                return bad("stable-ratio needs alpha in (0,1)")
            }
            PhiKind::QGamma { q } if !(*q > 0.0 && *q < 1.0) => return bad("q-gamma needs q in (0,1)"),
            PhiKind::LogGamma { q, c, theta } if !(*q >= 0.0 && *c > 0.0 && *theta > 0.0) => {
                return bad("gamma subordinator needs q >= 0, c > 0, theta > 0")
            }
            PhiKind::InverseGaussian { q, s, b } if !(*q >= 0.0 && *s > 0.0 && *b >= 0.0) => {
                return bad("inverse-gaussian needs q >= 0, s > 0, b >= 0")
            }
            PhiKind::Rational { c, zeros, poles } => {
                if !(*c > 0.0) || zeros.len() < poles.len() || zeros.len() > poles.len() + 1 {
                    return bad("rational needs c > 0 and #zeros in {#poles, #poles+1}");
                }
                if zeros.iter().chain(poles.iter()).any(|v| !(*v >= 0.0)) {
                    return bad("rational zeros and poles must be >= 0 (as z + value)");
                }
            }
            PhiKind::Scaled { c, .. } if !(*c > 0.0) => return bad("scale must be > 0"),
            PhiKind::TBeta { beta, .. } if !(*beta > 0.0) => return bad("T_beta needs beta > 0"),
            PhiKind::Product(v) if v.is_empty() => return bad("empty product"),
            PhiKind::Measure { kill, drift, measure, a_phi } => {
                if !(*kill >= 0.0 && *drift >= 0.0) {
                    return bad("killing and drift must be >= 0");
                }
                if *a_phi > 0.0 || (measure.beta().is_finite() && *a_phi < -measure.beta()) {
                    return bad("declared a_phi inconsistent with measure tail bound");
                }
                measure.validate()?;
            }
            _ => {}
        }
        if let PhiKind::Shifted { beta, inner } = &kind {
            let ab = inner.abscissae()?;
            if !(*beta > ab.u_phi || (*beta == ab.u_phi && ab.u_phi > f64::NEG_INFINITY)) {
                return Err(Error::Domain(format!("shift beta={beta} must exceed u_phi={}", ab.u_phi)));
            }
            if *beta < inner.a_phi() {
                return Err(Error::Domain("shift beyond the analyticity abscissa".into()));
            }
        }
        Ok(BernsteinFunction { kind })
    }

    /// Measure-defined Bernstein function with abscissa −β.
    pub fn from_measure(kill: f64, drift: f64, measure: LevyMeasureSpec) -> Result<Self> {
        let a_phi = -measure.beta();
        Self::new(PhiKind::Measure { kill, drift, measure, a_phi })
    }

    /// Expression-defined φ with declared abscissa.
    pub fn from_expr(src: &str, a_phi: f64) -> Result<Self> {
        let expr = Expr::parse(src, "z")?;
        Self::new(PhiKind::Expr { expr, source: src.to_string(), a_phi })
    }

    pub fn kind(&self) -> &PhiKind {
        &self.kind
    }

    pub fn has_closed_form(&self) -> bool {
        match &self.kind {
            PhiKind::Measure { .. } => false,
            PhiKind::Scaled { inner, .. } | PhiKind::Shifted { inner, .. } | PhiKind::TBeta { inner, .. } => {
                inner.has_closed_form()
            }
            PhiKind::Product(v) => v.iter().all(|f| f.has_closed_form()),
            _ => true,
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match &self.kind {
            PhiKind::Constant { c } => format!("{c}"),
            PhiKind::Affine { q, d } => format!("{q} + {d} z"),
            PhiKind::Power { q, alpha, c } => format!("{c} + (z + {q})^{alpha}"),
            PhiKind::ShiftedRatio { a, b } => format!("(z + 1 - {a})/(z + {b})"),
            PhiKind::GammaLinear { a, b } => format!("G({a}z + {b})/G({a}(z-1) + {b})"),
            PhiKind::GammaScaled { a } => format!("G({a}z + {a})/(z G({a}z))"),
            PhiKind::GammaRatio { a, b } => format!("G(z + {a} + {b})/G(z + {a})"),
            PhiKind::Geom { q, b } => format!("1 - {q}^(z + {b})"),
            PhiKind::Ratio { a } => format!("z/(z + {a})"),
            PhiKind::RatioPower { a, alpha } => format!("z/(z + {a})^{alpha}"),
            PhiKind::StableRatio { alpha } => format!("z^{alpha}/(1 + z)^{alpha}"),
            PhiKind::QGamma { q } => format!("(1 - {q}^z)/(1 - {q})"),
            PhiKind::LogGamma { q, c, theta } => format!("{q} + {c} ln(1 + z/{theta})"),
            PhiKind::InverseGaussian { q, s, b } => format!("{q} + {s}(sqrt(2z + {b}^2) - {b})"),
            PhiKind::Rational { c, zeros, poles } => format!("{c} * prod(z + {zeros:?}) / prod(z + {poles:?})"),
            PhiKind::Scaled { c, inner } => format!("{c} * [{}]", inner.describe()),
            PhiKind::Shifted { beta, inner } => format!("[{}](z + {beta})", inner.describe()),
            PhiKind::TBeta { beta, inner } => format!("T_{beta}[{}]", inner.describe()),
            PhiKind::Product(v) => v.iter().map(|f| format!("[{}]", f.describe())).collect::<Vec<_>>().join(" * "),
            PhiKind::Measure { kill, drift, measure, .. } => format!("{kill} + {drift} z + measure {measure:?}"),
            PhiKind::Expr { source, .. } => source.clone(),
        }
    }

    /// Declared analyticity abscissa a_φ.
    pub fn a_phi(&self) -> f64 {
        match &self.kind {
            PhiKind::Constant { .. } | PhiKind::Affine { .. } | PhiKind::Geom { .. } | PhiKind::QGamma { .. } => {
                f64::NEG_INFINITY
            }
            PhiKind::Power { q, .. } => -q,
            PhiKind::ShiftedRatio { b, .. } => -b,
            PhiKind::GammaLinear { a, b } => -b / a,
            PhiKind::GammaScaled { .. } => -1.0,
            PhiKind::GammaRatio { a, b } => -(a + b),
            PhiKind::Ratio { a } | PhiKind::RatioPower { a, .. } => -a,
            PhiKind::StableRatio { .. } => 0.0,
            PhiKind::LogGamma { theta, .. } => -theta,
            PhiKind::InverseGaussian { b, .. } => -0.5 * b * b,
            PhiKind::Rational { poles, .. } => poles.iter().map(|p| -p).fold(f64::NEG_INFINITY, f64::max),
            PhiKind::Scaled { inner, .. } => inner.a_phi(),
            PhiKind::Shifted { beta, inner } => inner.a_phi() - beta,
            PhiKind::TBeta { beta, inner } => (inner.a_phi() - beta).max(-beta),
            PhiKind::Product(v) => v.iter().map(|f| f.a_phi()).fold(f64::NEG_INFINITY, f64::max),
            PhiKind::Measure { a_phi, .. } | PhiKind::Expr { a_phi, .. } => *a_phi,
        }
    }

    /// Whether |φ(a_φ)| < ∞ so that evaluation on the line Re z = a_φ is allowed.
    pub fn finite_at_abscissa(&self) -> bool {
        match &self.kind {
            PhiKind::Power { .. } | PhiKind::StableRatio { .. } | PhiKind::InverseGaussian { .. } => true,
            PhiKind::RatioPower { .. } => false,
            PhiKind::Scaled { inner, .. } | PhiKind::Shifted { inner, .. } => inner.finite_at_abscissa(),
            _ => false,
        }
    }

    fn check_domain(&self, z: C) -> Result<()> {
        let a = self.a_phi();
        if z.re < a || (z.re == a && !self.finite_at_abscissa()) {
            return Err(Error::Domain(format!("Re z = {} below the analyticity abscissa {a}", z.re)));
        }
        if let PhiKind::Measure { .. } = self.kind {
            if z.re <= 0.0 && z.im != 0.0 {
                return Err(Error::Domain(
                    "measure-defined functions accept complex arguments only on Re z > 0".into(),
                ));
            }
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain("non-finite argument".into()));
        }
        Ok(())
    }

    /// φ(z).
    pub fn eval(&self, z: C) -> Result<C> {
        self.check_domain(z)?;
        self.eval_unchecked(z)
    }

    /// φ(x) for real x > a_φ.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        Ok(self.eval(c(x))?.re)
    }

    fn eval_unchecked(&self, z: C) -> Result<C> {
        Ok(match &self.kind {
            PhiKind::Constant { c: v } => c(*v),
            PhiKind::Affine { q, d } => *q + *d * z,
            PhiKind::Power { q, alpha, c: k } => *k + cpow(z + *q, *alpha),
            PhiKind::ShiftedRatio { a, b } => (z + 1.0 - *a) / (z + *b),
            PhiKind::GammaLinear { a, b } => {
                ln_gamma_ratio(*a * z - *a + *b, *a).exp()
            }
            PhiKind::GammaScaled { a } => *a * ln_gamma_ratio(*a * z + 1.0, *a - 1.0).exp(),
            PhiKind::GammaRatio { a, b } => ln_gamma_ratio(z + *a, *b).exp(),
            PhiKind::Geom { q, b } => 1.0 - ((z + *b) * q.ln()).exp(),
            PhiKind::Ratio { a } => z / (z + *a),
            PhiKind::RatioPower { a, alpha } => z * cpow(z + *a, -*alpha),
            PhiKind::StableRatio { alpha } => {
                if z.norm() == 0.0 {
                    c(0.0)
                } else {
                    (*alpha * (z.ln() - (z + 1.0).ln())).exp()
                }
            }
            PhiKind::QGamma { q } => {
                if z.norm() < 1e-8 {
                    // (1 − q^z)/(1 − q) ≈ −z ln q (1 + z ln q / 2)/(1 − q)
                    let l = q.ln();
                    -z * l * (1.0 - z * l * 0.5) / (1.0 - q)
                } else {
                    (1.0 - (z * q.ln()).exp()) / (1.0 - q)
                }
            }
            PhiKind::LogGamma { q, c: k, theta } => {
                let w = z / *theta;
                let l = if w.norm() < 1e-4 { w * (1.0 - w * (0.5 - w / 3.0)) } else { (1.0 + w).ln() };
                *q + *k * l
            }
            PhiKind::InverseGaussian { q, s, b } => *q + *s * ((2.0 * z + b * b).sqrt() - *b),
            PhiKind::Rational { c: k, zeros, poles } => {
                let mut v = c(*k);
                for zz in zeros {
                    v *= z + *zz;
                }
                for p in poles {
                    v /= z + *p;
                }
                v
            }
            PhiKind::Scaled { c: k, inner } => *k * inner.eval(z)?,
            PhiKind::Shifted { beta, inner } => inner.eval(z + *beta)?,
            PhiKind::TBeta { beta, inner } => {
                let w = z + *beta;
                if z.norm() < 1e-300 {
                    c(0.0)
                } else {
                    z * inner.eval(w)? / w
                }
            }
            PhiKind::Product(v) => {
                let mut p = c(1.0);
                for f in v {
                    p *= f.eval(z)?;
                }
                p
            }
            PhiKind::Measure { kill, drift, measure, .. } => *kill + *drift * z + measure_integral(measure, z, false)?,
            PhiKind::Expr { expr, .. } => expr.eval(z),
        })
    }

    /// φ′(z) = d + ∫ e^{−zy} y μ(dy).
    pub fn deriv(&self, z: C) -> Result<C> {
        self.check_domain(z)?;
        Ok(match &self.kind {
            PhiKind::Constant { .. } => c(0.0),
            PhiKind::Affine { d, .. } => c(*d),
            PhiKind::Power { q, alpha, .. } => *alpha * cpow(z + *q, *alpha - 1.0),
            PhiKind::ShiftedRatio { a, b } => c(*b - 1.0 + *a) / ((z + *b) * (z + *b)),
            PhiKind::GammaLinear { a, b } => {
                self.eval_unchecked(z)? * *a * (digamma(*a * z + *b) - digamma(*a * z - *a + *b))
            }
            PhiKind::GammaScaled { a } => {
                self.eval_unchecked(z)? * *a * (digamma(*a * z + *a) - digamma(*a * z + 1.0))
            }
            PhiKind::GammaRatio { a, b } => self.eval_unchecked(z)? * (digamma(z + *a + *b) - digamma(z + *a)),
            PhiKind::Geom { q, b } => -q.ln() * ((z + *b) * q.ln()).exp(),
            PhiKind::Ratio { a } => c(*a) / ((z + *a) * (z + *a)),
            PhiKind::RatioPower { a, alpha } => {
                cpow(z + *a, -*alpha) - *alpha * z * cpow(z + *a, -*alpha - 1.0)
            }
            PhiKind::StableRatio { alpha } => {
                if z.norm() == 0.0 {
                    c(f64::INFINITY)
                } else {
                    *alpha * self.eval_unchecked(z)? / (z * (z + 1.0))
                }
            }
            PhiKind::QGamma { q } => -q.ln() * (z * q.ln()).exp() / (1.0 - q),
            PhiKind::LogGamma { c: k, theta, .. } => *k / (z + *theta),
            PhiKind::InverseGaussian { s, b, .. } => *s / (2.0 * z + b * b).sqrt(),
            PhiKind::Rational { zeros, poles, .. } => {
                let v = self.eval_unchecked(z)?;
                let mut s = c(0.0);
                for zz in zeros {
                    s += (z + *zz).inv();
                }
                for p in poles {
                    s -= (z + *p).inv();
                }
                if v.norm() == 0.0 {
                    // Simple zero: derivative is the product of the other factors.
                    let mut w = C::new(match &self.kind {
                        PhiKind::Rational { c: k, .. } => *k,
                        _ => 1.0,
                    }, 0.0);
                    let mut skipped = false;
                    for zz in zeros {
                        if !skipped && (z + *zz).norm() == 0.0 {
                            skipped = true;
                            continue;
                        }
                        w *= z + *zz;
                    }
                    for p in poles {
                        w /= z + *p;
                    }
                    w
                } else {
                    v * s
                }
            }
            PhiKind::Scaled { c: k, inner } => *k * inner.deriv(z)?,
            PhiKind::Shifted { beta, inner } => inner.deriv(z + *beta)?,
            PhiKind::TBeta { beta, inner } => {
                let w = z + *beta;
                let f = inner.eval(w)?;
                let fp = inner.deriv(w)?;
                // d/dz [z f(w)/w] = f/w + z f′/w − z f/w²
                f / w + z * fp / w - z * f / (w * w)
            }
            PhiKind::Product(v) => {
                let vals: Vec<C> = v.iter().map(|f| f.eval(z)).collect::<Result<_>>()?;
                let ders: Vec<C> = v.iter().map(|f| f.deriv(z)).collect::<Result<_>>()?;
                let mut s = c(0.0);
                for (i, &d) in ders.iter().enumerate() {
                    let mut t = d;
                    for (j, val) in vals.iter().enumerate() {
                        if j != i {
                            t *= val;
                        }
                    }
                    s += t;
                }
                s
            }
            PhiKind::Measure { drift, measure, .. } => *drift + measure_integral(measure, z, true)?,
            PhiKind::Expr { expr, .. } => {
                let h = 1e-4 * (1.0 + z.norm());
                let f = |t: f64| expr.eval(z + t);
                (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
            }
        })
    }

    pub fn deriv_real(&self, x: f64) -> Result<f64> {
        Ok(self.deriv(c(x))?.re)
    }

    /// Principal log φ(z).
    pub fn ln_phi(&self, z: C) -> Result<C> {
        let v = self.eval(z)?;
        if v.norm() == 0.0 {
            return Err(Error::Pole(format!("phi vanishes at {z}")));
        }
        Ok(v.ln())
    }

    /// Killing rate φ(0).
    pub fn kill(&self) -> f64 {
        match &self.kind {
            PhiKind::Measure { kill, .. } => *kill,
            PhiKind::StableRatio { .. } | PhiKind::Ratio { .. } | PhiKind::RatioPower { .. } | PhiKind::QGamma { .. } => 0.0,
            PhiKind::TBeta { .. } => 0.0,
            _ => self.eval_unchecked(c(0.0)).map(|v| v.re).unwrap_or(f64::NAN),
        }
    }

    /// Drift d = lim φ(x)/x.
    pub fn drift(&self) -> f64 {
        match &self.kind {
            PhiKind::Affine { d, .. } => *d,
            PhiKind::Rational { c: k, zeros, poles } => {
                if zeros.len() == poles.len() + 1 {
                    *k
                } else {
                    0.0
                }
            }
            PhiKind::Scaled { c: k, inner } => k * inner.drift(),
            PhiKind::Shifted { inner, .. } | PhiKind::TBeta { inner, .. } => inner.drift(),
            PhiKind::Product(v) => {
                let ds: Vec<f64> = v.iter().map(|f| f.drift()).collect();
                let npos = ds.iter().filter(|d| **d > 0.0).count();
                if npos == 0 {
                    0.0
                } else if npos > 1 {
                    f64::INFINITY
                } else {
                    v.iter().zip(&ds).map(|(f, d)| if *d > 0.0 { *d } else { f.limit_at_infinity() }).product()
                }
            }
            PhiKind::Measure { drift, .. } => *drift,
            PhiKind::Expr { expr, .. } => {
                let x = 1e10;
                let v = expr.eval_real(x) / x;
                if v.abs() < 1e-6 {
                    0.0
                } else {
                    v
                }
            }
            _ => 0.0,
        }
    }

    /// φ(∞) = lim φ(x), infinite unless drift-free with finite Lévy mass.
    pub fn limit_at_infinity(&self) -> f64 {
        let inf = f64::INFINITY;
        match &self.kind {
            PhiKind::Constant { c } => *c,
            PhiKind::Affine { q, d } => {
                if *d > 0.0 {
                    inf
                } else {
                    *q
                }
            }
            PhiKind::ShiftedRatio { .. } | PhiKind::Geom { .. } | PhiKind::Ratio { .. } | PhiKind::StableRatio { .. } => 1.0,
            PhiKind::QGamma { q } => 1.0 / (1.0 - q),
            PhiKind::Rational { c, zeros, poles } => {
                if zeros.len() == poles.len() {
                    *c
                } else {
                    inf
                }
            }
            PhiKind::Scaled { c, inner } => c * inner.limit_at_infinity(),
            PhiKind::Shifted { inner, .. } | PhiKind::TBeta { inner, .. } => inner.limit_at_infinity(),
            PhiKind::Product(v) => v.iter().map(|f| f.limit_at_infinity()).product(),
            PhiKind::Measure { kill, drift, measure, .. } => {
                if *drift > 0.0 {
                    inf
                } else {
                    kill + measure.total_mass()
                }
            }
            PhiKind::Expr { expr, .. } => {
                let v = expr.eval_real(1e12);
                if (v - expr.eval_real(1e11)).abs() < 1e-6 * (1.0 + v.abs()) {
                    v
                } else {
                    inf
                }
            }
            _ => inf,
        }
    }

    /// Total Lévy mass μ̄(0⁺).
    pub fn levy_mass(&self) -> f64 {
        match &self.kind {
            PhiKind::Constant { .. } | PhiKind::Affine { .. } => 0.0,
            PhiKind::Measure { measure, .. } => measure.total_mass(),
            PhiKind::Rational { c: k, zeros, poles } if zeros.len() == poles.len() + 1 => {
                // φ(z) = k z + e + Σ A_l/(z + p_l); mass is e − φ(0).
                let (e, _) = rational_partial_fractions(*k, zeros, poles);
                e - self.kill()
            }
            PhiKind::Scaled { c: k, inner } => k * inner.levy_mass(),
            _ => {
                if self.drift() == 0.0 {
                    let l = self.limit_at_infinity();
                    if l.is_finite() {
                        l - self.kill()
                    } else {
                        f64::INFINITY
                    }
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// φ′(0⁺) when finite.
    pub fn deriv_at_zero(&self) -> Option<f64> {
        match &self.kind {
            PhiKind::Power { q, .. } if *q == 0.0 => None,
            PhiKind::StableRatio { .. } => None,
            _ => {
                if self.a_phi() < 0.0 {
                    self.deriv_real(0.0).ok().filter(|v| v.is_finite())
                } else {
                    let d1 = self.deriv_real(1e-7).ok()?;
                    let d2 = self.deriv_real(1e-9).ok()?;
                    if d1.is_finite() && d2.is_finite() && (d2 - d1).abs() <= 1e-3 * (1.0 + d1.abs()) {
                        Some(d2)
                    } else {
                        None
                    }
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            PhiKind::Constant { .. } => true,
            PhiKind::Affine { d, .. } => *d == 0.0,
            PhiKind::Scaled { inner, .. } | PhiKind::Shifted { inner, .. } => inner.is_constant(),
            PhiKind::Product(v) => v.iter().all(|f| f.is_constant()),
            PhiKind::Measure { drift, measure, .. } => *drift == 0.0 && measure.total_mass() == 0.0,
            _ => false,
        }
    }

    /// (a_φ, u_φ, ā_φ); u_φ by bisection of the increasing function φ on (a_φ, 0].
    pub fn abscissae(&self) -> Result<Abscissae> {
        let a = self.a_phi();
        let u = self.u_phi(a)?;
        Ok(Abscissae { a_phi: a, u_phi: u, abar_phi: a.max(u) })
    }

    fn u_phi(&self, a: f64) -> Result<f64> {
        let f0 = self.eval_unchecked(c(0.0))?.re;
        if f0.abs() <= 1e-14 {
            return Ok(0.0);
        }
        if f0 < 0.0 {
            return Err(Error::Param("phi(0) < 0: not a Bernstein function".into()));
        }
        // Find lo < 0 with φ(lo) < 0.
        let lo = if a.is_finite() {
            if a == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            let eps = 1e-12 * a.abs().max(1.0);
            let v = self.eval_unchecked(c(a + eps))?.re;
            if v.is_nan() {
                return Err(Error::Tolerance("phi undefined next to the abscissa".into()));
            }
            if v >= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            a + eps
        } else {
            let mut x = -1.0;
            loop {
                let v = self.eval_unchecked(c(x))?.re;
                if v < 0.0 || v.is_nan() && x < -1.0 {
                    break x;
                }
                if x < -1e12 {
                    return Ok(f64::NEG_INFINITY);
                }
                x *= 2.0;
            }
        };
        let mut lo = lo;
        let mut hi = 0.0;
        let scale = if a.is_finite() { a.abs() } else { lo.abs() };
        let width = 2f64.powi(-60) * scale.max(1.0);
        let mut it = 0;
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.eval_unchecked(c(mid))?.re;
            if v.is_nan() {
                return Err(Error::Tolerance(format!("phi undefined at {mid} during bisection")));
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            it += 1;
            if it > 400 {
                return Err(Error::Tolerance("bisection for u_phi did not terminate".into()));
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The Lévy-measure description (killing, drift, measure), when known.
    pub fn measure(&self) -> Option<(f64, f64, LevyMeasureSpec)> {
        let dens = |f: RealFn, beta: f64, mass: f64| LevyMeasureSpec::Density { density: f, beta, total_mass: mass };
        let inf = f64::INFINITY;
        Some(match &self.kind {
            PhiKind::Constant { c } => (*c, 0.0, LevyMeasureSpec::Zero),
            PhiKind::Affine { q, d } => (*q, *d, LevyMeasureSpec::Zero),
            PhiKind::Power { q, alpha, c: k } => {
                let (q, al) = (*q, *alpha);
                let norm = al / gamma(1.0 - al);
                (k + q.powf(al), 0.0, dens(Arc::new(move |y| norm * (-q * y).exp() * y.powf(-1.0 - al)), q, inf))
            }
            PhiKind::ShiftedRatio { a, b } => {
                let (m, b) = (a + b - 1.0, *b);
                ((1.0 - a) / b, 0.0, dens(Arc::new(move |y| m * (-b * y).exp()), b, m / b))
            }
            PhiKind::GammaLinear { a, b } => {
                let (a, b) = (*a, *b);
                let norm = 1.0 / gamma(1.0 - a);
                let kill = gamma(b) / gamma(b - a);
                let f = move |s: f64| norm * (-b * s / a).exp() * (-(-s / a).exp_m1()).powf(-1.0 - a);
                (kill, 0.0, dens(Arc::new(f), b / a, inf))
            }
            PhiKind::GammaScaled { a } => {
                let a = *a;
                let norm = (a - 1.0) / gamma(2.0 - a);
                let f = move |s: f64| norm * (-s).exp() * (-(-s / a).exp_m1()).powf(-a);
                (gamma(a + 1.0), 0.0, dens(Arc::new(f), 1.0, inf))
            }
            PhiKind::GammaRatio { a, b } => {
                let (a, b) = (*a, *b);
                let norm = b / gamma(1.0 - b);
                let f = move |y: f64| norm * (-(a + b) * y).exp() * (-(-y).exp_m1()).powf(-1.0 - b);
                (gamma(a + b) / gamma(a), 0.0, dens(Arc::new(f), a + b, inf))
            }
            PhiKind::Geom { q, b } => (1.0 - q.powf(*b), 0.0, LevyMeasureSpec::Atoms(vec![(-q.ln(), q.powf(*b))])),
            PhiKind::Ratio { a } => {
                let a = *a;
                (0.0, 0.0, dens(Arc::new(move |y| a * (-a * y).exp()), a, 1.0))
            }
            PhiKind::RatioPower { a, alpha } => {
                let (a, al) = (*a, *alpha);
                let g = gamma(al);
                let t = move |y: f64| y.powf(al - 1.0) * (-a * y).exp() / g;
                (0.0, 0.0, LevyMeasureSpec::Tail { tail: Arc::new(t), beta: a, total_mass: inf })
            }
            PhiKind::StableRatio { alpha } => {
                let al = *alpha;
                (0.0, 0.0, LevyMeasureSpec::Tail { tail: Arc::new(move |y| hyp1f1_neg(al, y)), beta: 0.0, total_mass: 1.0 })
            }
            PhiKind::QGamma { q } => (0.0, 0.0, LevyMeasureSpec::Atoms(vec![(-q.ln(), 1.0 / (1.0 - q))])),
            PhiKind::LogGamma { q, c: k, theta } => {
                let (k, th) = (*k, *theta);
                (*q, 0.0, dens(Arc::new(move |y| k * (-th * y).exp() / y), th, inf))
            }
            PhiKind::InverseGaussian { q, s, b } => {
                let (s, b) = (*s, *b);
                let norm = s / (2.0 * PI).sqrt();
                (*q, 0.0, dens(Arc::new(move |y| norm * y.powf(-1.5) * (-0.5 * b * b * y).exp()), 0.5 * b * b, inf))
            }
            PhiKind::Rational { c: k, zeros, poles } => {
                let (_, amps) = rational_partial_fractions(*k, zeros, poles);
                let terms: Vec<(f64, f64)> = poles.iter().cloned().zip(amps.iter().map(|a| -a)).collect();
                if terms.iter().any(|t| t.1 < -1e-14) {
                    return None;
                }
                let beta = poles.iter().cloned().fold(f64::INFINITY, f64::min);
                let mass: f64 = terms.iter().map(|(p, r)| r / p).sum();
                let drift = if zeros.len() == poles.len() + 1 { *k } else { 0.0 };
                let f = move |y: f64| terms.iter().map(|(p, r)| r * (-p * y).exp()).sum::<f64>();
                let beta = if beta.is_finite() { beta } else { inf };
                (self.kill(), drift, if poles.is_empty() { LevyMeasureSpec::Zero } else { dens(Arc::new(f), beta, mass) })
            }
            PhiKind::Scaled { c: k, inner } => {
                let (kill, drift, m) = inner.measure()?;
                let k = *k;
                let m = match m {
                    LevyMeasureSpec::Zero => LevyMeasureSpec::Zero,
                    LevyMeasureSpec::Tail { tail, beta, total_mass } => {
                        LevyMeasureSpec::Tail { tail: Arc::new(move |y| k * tail(y)), beta, total_mass: k * total_mass }
                    }
                    LevyMeasureSpec::Atoms(v) => LevyMeasureSpec::Atoms(v.into_iter().map(|(p, w)| (p, k * w)).collect()),
                    LevyMeasureSpec::Density { density, beta, total_mass } => {
                        dens(Arc::new(move |y| k * density(y)), beta, k * total_mass)
                    }
                };
                (k * kill, k * drift, m)
            }
            PhiKind::Shifted { beta, inner } => {
                let (_, drift, m) = inner.measure()?;
                let bt = *beta;
                let kill = inner.eval_real(bt).ok()?;
                let m = match m {
                    LevyMeasureSpec::Zero => LevyMeasureSpec::Zero,
                    LevyMeasureSpec::Atoms(v) => {
                        LevyMeasureSpec::Atoms(v.into_iter().map(|(p, w)| (p, w * (-bt * p).exp())).collect())
                    }
                    LevyMeasureSpec::Density { density, beta, .. } => {
                        let nb = beta + bt;
                        dens(Arc::new(move |y| (-bt * y).exp() * density(y)), nb, f64::NAN)
                    }
                    LevyMeasureSpec::Tail { .. } => return None,
                };
                (kill, drift, m)
            }
            PhiKind::TBeta { beta, inner } => {
                let (kill, drift, m) = inner.measure()?;
                let bt = *beta;
                let mb = m.beta();
                let tail = move |y: f64| (-bt * y).exp() * (m.tail_at(y) + kill);
                (0.0, drift, LevyMeasureSpec::Tail { tail: Arc::new(tail), beta: bt + mb.min(1e300), total_mass: inner.levy_mass() + kill })
            }
            PhiKind::Measure { kill, drift, measure, .. } => (*kill, *drift, measure.clone()),
            PhiKind::Product(_) | PhiKind::Expr { .. } => return None,
        })
    }

    /// Twin of a catalog function built purely from its Lévy measure, for
    /// cross-validation of the closed form.
    pub fn measure_twin(&self) -> Option<BernsteinFunction> {
        let (kill, drift, measure) = self.measure()?;
        let a_phi = self.a_phi().max(-measure.beta());
        BernsteinFunction::new(PhiKind::Measure { kill, drift, measure, a_phi }).ok()
    }

    /// Closed-form ln W_φ(z) where the catalog provides one.
    pub fn log_w_closed(&self, z: C) -> Option<C> {
        let lg = ln_gamma;
        Some(match &self.kind {
            PhiKind::Constant { c } => (z - 1.0) * c.ln(),
            PhiKind::Affine { q, d } => {
                if *d == 0.0 {
                    (z - 1.0) * q.ln()
                } else {
                    let s = q / d;
                    (z - 1.0) * d.ln() + lg(z + s) - lg(c(1.0 + s))
                }
            }
            PhiKind::Power { q, alpha, c: k } if *k == 0.0 => *alpha * (lg(z + *q) - lg(c(1.0 + q))),
            PhiKind::ShiftedRatio { a, b } => lg(c(b + 1.0)) + lg(z + 1.0 - *a) - lg(z + *b) - lg(c(2.0 - a)),
            PhiKind::GammaLinear { a, b } => lg(*a * (z - 1.0) + *b) - lg(c(*b)),
            PhiKind::GammaScaled { a } => lg(*a * z) - lg(z) - lg(c(*a)),
            PhiKind::Geom { q, b } => {
                ln_qpochhammer_inf(c(q.powf(b + 1.0)), *q) - ln_qpochhammer_inf(((z + *b) * q.ln()).exp(), *q)
            }
            PhiKind::Ratio { a } => lg(z) + lg(c(1.0 + a)) - lg(z + *a),
            PhiKind::RatioPower { a, alpha } => lg(z) + *alpha * (lg(c(1.0 + a)) - lg(z + *a)),
            PhiKind::StableRatio { alpha } => -*alpha * z.ln(),
            PhiKind::QGamma { q } => ln_qgamma(z, *q),
            PhiKind::Rational { c: k, zeros, poles } => {
                let mut s = (z - 1.0) * k.ln();
                for zz in zeros {
                    s += lg(z + *zz) - lg(c(1.0 + zz));
                }
                for p in poles {
                    s -= lg(z + *p) - lg(c(1.0 + p));
                }
                s
            }
            PhiKind::Scaled { c: k, inner } => (z - 1.0) * k.ln() + inner.log_w_closed(z)?,
            PhiKind::Shifted { beta, inner } => inner.log_w_closed(z + *beta)? - inner.log_w_closed(c(1.0 + beta))?,
            PhiKind::TBeta { beta, inner } => lg(c(1.0 + beta)) + lg(z) - lg(z + *beta) + inner.log_w_closed(z)?,
            PhiKind::Product(v) => {
                let mut s = c(0.0);
                for f in v {
                    s += f.log_w_closed(z)?;
                }
                s
            }
            _ => return None,
        })
    }

    /// c φ.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(PhiKind::Scaled { c: k, inner: Box::new(self.clone()) })
    }

    /// φ(· + β).
    pub fn shifted(&self, beta: f64) -> Result<Self> {
        Self::new(PhiKind::Shifted { beta, inner: Box::new(self.clone()) })
    }

    /// z φ(z + β)/(z + β).
    pub fn t_beta(&self, beta: f64) -> Result<Self> {
        Self::new(PhiKind::TBeta { beta, inner: Box::new(self.clone()) })
    }
}

/// Partial fractions of c Π(z + ζ)/Π(z + p) = d z + e + Σ A_l/(z + p_l);
/// returns (e, A).
pub fn rational_partial_fractions(k: f64, zeros: &[f64], poles: &[f64]) -> (f64, Vec<f64>) {
    let amps: Vec<f64> = poles
        .iter()
        .enumerate()
        .map(|(l, pl)| {
            let mut v = k;
            for zz in zeros {
                v *= zz - pl;
            }
            for (m, pm) in poles.iter().enumerate() {
                if m != l {
                    v /= pm - pl;
                }
            }
            v
        })
        .collect();
    let e = if zeros.len() == poles.len() {
        k
    } else {
        // Constant term of k Π(z + ζ)/Π(z + p) at infinity: k(Σζ − Σp).
        k * (zeros.iter().sum::<f64>() - poles.iter().sum::<f64>())
    };
    (e, amps)
}

/// ∫(1 − e^{−zy}) μ(dy) (or ∫ y e^{−zy} μ(dy) when `derivative`), by
/// quadrature split at y = 1 with panel widths bounded by π/|Im z|.
fn measure_integral(m: &LevyMeasureSpec, z: C, derivative: bool) -> Result<C> {
    let tol = Tol::new(1e-12, 1e-300);
    let budget = 10_000;
    let width = if z.im.abs() > 0.0 { (PI / z.im.abs()).min(4.0) } else { 4.0 };
    match m {
        LevyMeasureSpec::Zero => Ok(c(0.0)),
        LevyMeasureSpec::Atoms(a) => Ok(a
            .iter()
            .map(|(y, w)| if derivative { *w * *y * (-z * *y).exp() } else { *w * one_minus_exp_neg(z * *y) })
            .sum()),
        LevyMeasureSpec::Density { density, .. } => {
            let f = |y: f64| {
                if y <= 0.0 {
                    return c(0.0);
                }
                let d = density(y);
                if d == 0.0 {
                    return c(0.0);
                }
                if derivative {
                    d * y * (-z * y).exp()
                } else {
                    d * one_minus_exp_neg(z * y)
                }
            };
            let r1 = adaptive(f, 0.0, 1.0, tol, budget)?;
            let r2 = half_line(f, 1.0, Tol::new(1e-12, 1e-14 * r1.value.norm().max(1e-300)), budget, width)?;
            Ok(r1.value + r2.value)
        }
        LevyMeasureSpec::Tail { tail, .. } => {
            // φ − φ(0) − dz = z ∫ e^{−zy} μ̄(y) dy;
            // derivative ∫ e^{−zy} μ̄ − z ∫ y e^{−zy} μ̄.
            let f0 = |y: f64| if y <= 0.0 { c(0.0) } else { tail(y) * (-z * y).exp() };
            let f1 = |y: f64| if y <= 0.0 { c(0.0) } else { y * tail(y) * (-z * y).exp() };
            let a = adaptive(f0, 0.0, 1.0, tol, budget)?.value;
            let a = a + half_line(f0, 1.0, Tol::new(1e-12, 1e-14 * a.norm().max(1e-300)), budget, width)?.value;
            if !derivative {
                return Ok(z * a);
            }
            let b = adaptive(f1, 0.0, 1.0, tol, budget)?.value;
            let b = b + half_line(f1, 1.0, Tol::new(1e-12, 1e-14 * b.norm().max(1e-300)), budget, width)?.value;
            Ok(a - z * b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(k: PhiKind) -> BernsteinFunction {
        BernsteinFunction::new(k).unwrap()
    }

    #[test]
    fn spec_examples_eval() {
        assert_eq!(phi(PhiKind::Affine { q: 2.0, d: 1.0 }).eval_real(3.0).unwrap(), 5.0);
        let g = phi(PhiKind::Geom { q: 0.5, b: 0.0 });
        assert!((g.eval_real(1.0).unwrap() - 0.5).abs() < 1e-15);
        let m = BernsteinFunction::from_measure(
            0.0,
            0.0,
            LevyMeasureSpec::Tail { tail: Arc::new(|y: f64| (-y).exp()), beta: 1.0, total_mass: 1.0 },
        )
        .unwrap();
        assert!((m.eval_real(1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((m.deriv_real(1.0).unwrap() - 0.25).abs() < 1e-12);
        let p = phi(PhiKind::Power { q: 1.0, alpha: 0.5, c: 0.0 });
        assert!((p.deriv_real(0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn abscissae_examples() {
        let a = phi(PhiKind::Affine { q: 0.7, d: 1.0 }).abscissae().unwrap();
        assert_eq!(a.a_phi, f64::NEG_INFINITY);
        assert!((a.u_phi + 0.7).abs() < 1e-12 && (a.abar_phi + 0.7).abs() < 1e-12);
        let p = phi(PhiKind::Power { q: 1.0, alpha: 0.4, c: 1.0 }).abscissae().unwrap();
        assert_eq!((p.a_phi, p.u_phi, p.abar_phi), (-1.0, f64::NEG_INFINITY, -1.0));
        let r = phi(PhiKind::Ratio { a: 2.0 }).abscissae().unwrap();
        assert_eq!((r.a_phi, r.u_phi), (-2.0, 0.0));
        assert_eq!(r.abar_phi, 0.0);
        let gs = phi(PhiKind::GammaScaled { a: 1.5 }).abscissae().unwrap();
        assert!((gs.u_phi + 1.0 / 1.5).abs() < 1e-10);
        let gl = phi(PhiKind::GammaLinear { a: 0.5, b: 0.8 }).abscissae().unwrap();
        assert!((gl.u_phi - (1.0 - 0.8 / 0.5)).abs() < 1e-10);
    }

    #[test]
    fn cauchy_recovers_exp_derivatives() {
        let d = cauchy_derivatives(|z: C| z.exp(), c(0.3), 0.5, 6);
        for v in d {
            assert!((v - c(0.3f64.exp())).norm() < 1e-10);
        }
    }

    #[test]
    fn stable_ratio_tail_matches_transform() {
        let f = phi(PhiKind::StableRatio { alpha: 0.3 });
        let t = f.measure_twin().unwrap();
        for x in [0.5, 2.0] {
            let a = f.eval_real(x).unwrap();
            let b = t.eval_real(x).unwrap();
            assert!((a - b).abs() < 1e-9 * a, "x={x} {a} {b}");
        }
    }
}
