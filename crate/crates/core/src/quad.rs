//! Adaptive Gauss–Kronrod quadrature for real- and complex-valued integrands.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Values that can be integrated: reals and complex numbers.
pub trait Field:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerance pair: the target error is `max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
}

impl Tol {
    pub fn rel(rel: f64) -> Self {
        Tol { rel, abs: 0.0 }
    }
    pub fn new(rel: f64, abs: f64) -> Self {
        Tol { rel, abs }
    }
}

/// Result of a quadrature: value, error estimate and evaluation count.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

/// One 15-point Kronrod rule on [a, b] with its embedded 7-point Gauss estimate.
pub fn gk15<T: Field, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let (v, e, _) = gk15_floor(f, a, b);
    (v, e)
}

/// As [`gk15`], also returning the rounding floor 2ε∫|f| of the panel.
fn gk15_floor<T: Field, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut absk = fc.modulus() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * WGK[j];
        absk += WGK[j] * (f1.modulus() + f2.modulus());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut asc = WGK[7] * (fc - mean).modulus();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).modulus() + (fv2[j] - mean).modulus());
    }
    let hh = h.abs();
    let resasc = asc * hh;
    let resabs = absk * hh;
    let mut err = ((resk - resg) * hh).modulus();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 2.0 * f64::EPSILON * resabs;
    err = err.max(floor);
    (resk * h, err, floor)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    floor: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive bisection on a finite interval, never failing: the
/// `converged` flag reports whether the tolerance was met within `max_panels`.
pub fn adaptive_raw<T: Field, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tol,
    max_panels: usize,
) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: 0.0, evals: 0, converged: true };
    }
    let (v, e, fl) = gk15_floor(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, err: e, floor: fl });
    let mut total = v;
    let mut total_err = e;
    let mut total_floor = fl;
    let mut evals = 15;
    let mut panels = 1;
    loop {
        // Rounding in the accumulated panels caps the attainable accuracy.
        let target = tol.abs.max(tol.rel * total.modulus()).max(4.0 * total_floor);
        if total_err <= target {
            return QuadResult { value: total, error: total_err, evals, converged: true };
        }
        if panels >= max_panels {
            return QuadResult { value: total, error: total_err, evals, converged: false };
        }
        let p = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let m = 0.5 * (p.a + p.b);
        if m == p.a || m == p.b {
            // Interval exhausted at machine precision; keep what we have.
            heap.push(Panel { err: 0.0, ..p });
            total_err = heap.iter().map(|q| q.err).sum();
            if heap.iter().all(|q| q.err == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1, f1) = gk15_floor(&mut f, p.a, m);
        let (v2, e2, f2) = gk15_floor(&mut f, m, p.b);
        total_floor += f1 + f2 - p.floor;
        evals += 30;
        panels += 1;
        total = total - p.value + v1 + v2;
        total_err = total_err - p.err + e1 + e2;
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1, floor: f1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2, floor: f2 });
        if panels % 64 == 0 {
            // Refresh sums to avoid drift from repeated subtraction.
            total = heap.iter().fold(T::zero(), |s, q| s + q.value);
            total_err = heap.iter().map(|q| q.err).sum();
        }
    }
    QuadResult { value: total, error: total_err, evals, converged: true }
}

/// Adaptive quadrature on [a, b]; fails with `QuadratureError` on budget exhaustion.
pub fn adaptive<T: Field, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    tol: Tol,
    max_panels: usize,
) -> Result<QuadResult<T>> {
    let r = adaptive_raw(f, a, b, tol, max_panels);
    if r.converged {
        Ok(r)
    } else {
        Err(Error::Quadrature(format!(
            "tolerance {:e} not reached on [{a}, {b}] within {max_panels} panels (error {:e})",
            tol.rel, r.error
        )))
    }
}

/// Integral over [a, ∞) by consecutive panels whose widths grow geometrically
/// up to `max_width`. Stops once several consecutive panels are negligible
/// relative to the accumulated value.
pub fn half_line<T: Field, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    tol: Tol,
    max_panels: usize,
    max_width: f64,
) -> Result<QuadResult<T>> {
    let mut total = T::zero();
    let mut err = 0.0;
    let mut evals = 0;
    let mut used = 0;
    let mut t = a;
    let mut w = max_width.min(1.0);
    let mut quiet = 0;
    while used < max_panels {
        let sub_tol = Tol::new(tol.rel * 0.25, (tol.abs * 0.25).max(tol.rel * 0.05 * total.modulus()));
        let r = adaptive_raw(&mut f, t, t + w, sub_tol, (max_panels - used).max(1));
        used += 1 + r.evals / 30;
        evals += r.evals;
        total = total + r.value;
        err += r.error;
        let scale = tol.abs.max(tol.rel * total.modulus());
        if r.value.modulus() <= 0.01 * scale && r.error <= scale {
            quiet += 1;
            if quiet >= 3 {
                return Ok(QuadResult { value: total, error: err, evals, converged: true });
            }
        } else {
            quiet = 0;
        }
        if !r.value.modulus().is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand near {t}")));
        }
        t += w;
        w = (2.0 * w).min(max_width);
    }
    Err(Error::Quadrature(format!(
        "half-line integral from {a} did not settle within {max_panels} panels"
    )))
}

/// Integral of a complex function along the straight segment from `z0` to `z1`.
pub fn segment<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    z0: Complex64,
    z1: Complex64,
    tol: Tol,
    max_panels: usize,
) -> Result<QuadResult<Complex64>> {
    let dz = z1 - z0;
    let r = adaptive(|t: f64| f(z0 + dz * t) * dz, 0.0, 1.0, tol, max_panels)?;
    Ok(r)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns the
/// best extrapolant and an error estimate from its last two diagonals.
pub fn wynn_epsilon(s: &[Complex64]) -> (Complex64, f64) {
    let n = s.len();
    if n < 3 {
        let v = *s.last().unwrap_or(&Complex64::new(0.0, 0.0));
        return (v, f64::INFINITY);
    }
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = s.to_vec();
    let mut best = s[n - 1];
    let mut best_err = (s[n - 1] - s[n - 2]).norm();
    let mut k = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            let base = if k == 0 { Complex64::new(0.0, 0.0) } else { prev[i + 1] };
            if d.norm() == 0.0 {
                next.push(Complex64::new(f64::INFINITY, 0.0));
            } else {
                next.push(base + d.inv());
            }
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 && cur.len() >= 2 {
            let m = cur.len();
            let a = cur[m - 1];
            let b = cur[m - 2];
            if a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite() {
                let e = (a - b).norm();
                if e < best_err {
                    best_err = e;
                    best = a;
                }
            }
        }
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = adaptive(|x: f64| x * x * x - 2.0 * x, 0.0, 3.0, Tol::rel(1e-13), 10).unwrap();
        assert!((r.value - 11.25).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let r = adaptive(|x: f64| x.powf(-0.6), 0.0, 1.0, Tol::rel(1e-10), 2000).unwrap();
        assert!((r.value - 2.5).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn half_line_exponential() {
        let r = half_line(|x: f64| (-x).exp(), 0.0, Tol::rel(1e-12), 1000, 8.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn complex_segment() {
        let z0 = Complex64::new(1.0, 0.0);
        let z1 = Complex64::new(1.0, 2.0);
        let r = segment(|z| z.ln(), z0, z1, Tol::rel(1e-13), 100).unwrap();
        let prim = |z: Complex64| z * z.ln() - z;
        let exact = prim(z1) - prim(z0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = Vec::new();
        let mut acc = 0.0;
        for k in 1..=20 {
            acc += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            s.push(Complex64::new(acc, 0.0));
        }
        let (v, _) = wynn_epsilon(&s);
        assert!((v.re - std::f64::consts::LN_2).abs() < 1e-10, "{}", v.re);
    }
}
