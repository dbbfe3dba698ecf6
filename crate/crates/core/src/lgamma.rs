//! Reference log-gamma, digamma and q-Pochhammer routines.
//!
//! The Lanczos approximation (g = 7, nine coefficients) is used on Re z ≥ 1/2.
//! To the left, the upward recurrence with principal logarithms keeps
//! `ln_gamma(z + 1) - ln_gamma(z) == ln z` exactly, which is the branch the
//! Bernstein-gamma engine relies on. No reflection formula is used.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(z: C) -> C {
    let z1 = z - 1.0;
    let mut a = C::new(COEF[0], 0.0);
    for (k, c) in COEF.iter().enumerate().skip(1) {
        a += *c / (z1 + k as f64);
    }
    let t = z1 + (G + 0.5);
    0.5 * (2.0 * PI).ln() + (z1 + 0.5) * t.ln() - t + a.ln()
}

/// Complex log-gamma. Returns +∞ (real part) at the poles.
pub fn ln_gamma(z: C) -> C {
    if z.re >= 0.5 {
        return lanczos(z);
    }
    let m = (0.5 - z.re).ceil() as usize;
    let mut s = C::new(0.0, 0.0);
    for j in 0..m {
        let w = z + j as f64;
        if w.re == 0.0 && w.im == 0.0 {
            return C::new(f64::INFINITY, 0.0);
        }
        s += w.ln();
    }
    lanczos(z + m as f64) - s
}

/// ln(1 + u) without cancellation for small |u|.
pub fn ln_1p_c(u: C) -> C {
    if u.norm() < 0.25 {
        // ln(1+u) = 2 atanh(u/(2+u)), odd series in t.
        let t = u / (2.0 + u);
        let t2 = t * t;
        let mut term = t;
        let mut s = t;
        for k in 1..40 {
            term *= t2;
            let add = term / (2 * k + 1) as f64;
            s += add;
            if add.norm() < 1e-18 * s.norm() {
                break;
            }
        }
        2.0 * s
    } else {
        (1.0 + u).ln()
    }
}

/// lnΓ(x + d) − lnΓ(x) without the cancellation of two large log-gammas.
pub fn ln_gamma_ratio(x: C, d: f64) -> C {
    if d == 0.0 {
        return C::new(0.0, 0.0);
    }
    let big = 12.0;
    if x.re < big || (x + d).re < big {
        if x.norm() < big && (x + d).norm() < big || x.re < 0.0 || (x + d).re < 0.0 {
            return ln_gamma(x + d) - ln_gamma(x);
        }
        let m = (big - x.re.min((x + d).re)).ceil().max(0.0) as usize;
        let mut s = C::new(0.0, 0.0);
        for j in 0..m {
            let y = x + j as f64;
            s += ln_1p_c(d / y);
        }
        return ln_gamma_ratio(x + m as f64, d) - s;
    }
    // Stirling series for both arguments, differenced term by term.
    let y = x + d;
    let mut v = (x - 0.5) * ln_1p_c(d / x) + d * y.ln() - d;
    const B: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let (ix, iy) = (x.inv(), y.inv());
    let (ix2, iy2) = (ix * ix, iy * iy);
    let (mut px, mut py) = (ix, iy);
    for (k, b) in B.iter().enumerate() {
        let n = 2.0 * (k + 1) as f64;
        v += *b / (n * (n - 1.0)) * (py - px);
        px *= ix2;
        py *= iy2;
    }
    v
}

/// Real log |Γ(x)| together with the sign of Γ(x).
pub fn ln_gamma_real(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma(C::new(x, 0.0)).re, 1.0);
    }
    if x == x.floor() {
        return (f64::INFINITY, 1.0);
    }
    let v = ln_gamma(C::new(x, 0.0));
    // Imaginary part is a multiple of π; odd multiples mean a negative value.
    let k = (v.im / PI).round() as i64;
    (v.re, if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
}

/// Γ(x) for real x.
pub fn gamma(x: f64) -> f64 {
    let (l, s) = ln_gamma_real(x);
    s * l.exp()
}

/// Complex Γ(z).
pub fn gamma_c(z: C) -> C {
    ln_gamma(z).exp()
}

/// Complex digamma via upward shift and the asymptotic series.
pub fn digamma(z: C) -> C {
    let mut z = z;
    let mut acc = C::new(0.0, 0.0);
    while z.re < 12.0 {
        acc -= z.inv();
        z += 1.0;
    }
    let w = z.inv();
    let w2 = w * w;
    let series = w2
        * (-1.0 / 12.0
            + w2 * (1.0 / 120.0
                + w2 * (-1.0 / 252.0
                    + w2 * (1.0 / 240.0 + w2 * (-1.0 / 132.0 + w2 * (691.0 / 32760.0 - w2 / 12.0))))));
    acc + z.ln() - 0.5 * w + series
}

/// Complex trigamma via upward shift and the asymptotic series.
pub fn trigamma(z: C) -> C {
    let mut z = z;
    let mut acc = C::new(0.0, 0.0);
    while z.re < 12.0 {
        acc += (z * z).inv();
        z += 1.0;
    }
    let w = z.inv();
    let w2 = w * w;
    let series = w
        + 0.5 * w2
        + w * w2
            * (1.0 / 6.0
                + w2 * (-1.0 / 30.0
                    + w2 * (1.0 / 42.0 + w2 * (-1.0 / 30.0 + w2 * (5.0 / 66.0 - w2 * 691.0 / 2730.0)))));
    acc + series
}

/// ln (x; q)_∞ = Σ_{k≥0} ln(1 − x q^k), principal logarithms, for |x| < 1 or
/// any x whose factors avoid the negative axis.
pub fn ln_qpochhammer_inf(x: C, q: f64) -> C {
    let mut s = C::new(0.0, 0.0);
    let mut t = x;
    for _ in 0..100_000 {
        if t.norm() < 1e-18 {
            break;
        }
        s += (C::new(1.0, 0.0) - t).ln();
        t *= q;
    }
    s
}

/// ln Γ_q(z) = ln (q;q)_∞ − ln (q^z;q)_∞ + (1 − z) ln(1 − q).
pub fn ln_qgamma(z: C, q: f64) -> C {
    let qz = (z * q.ln()).exp();
    ln_qpochhammer_inf(C::new(q, 0.0), q) - ln_qpochhammer_inf(qz, q) + (1.0 - z) * (1.0 - q).ln()
}

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn factorials() {
        let mut f = 1.0f64;
        for n in 1..25 {
            let v = gamma(n as f64);
            assert!((v - f).abs() <= 1e-13 * f, "n={n} {v} {f}");
            f *= n as f64;
        }
    }

    #[test]
    fn half_integer() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(-1.5) - 4.0 / 3.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn recurrence_branch_is_exact() {
        for i in -20..=20 {
            for j in -20..=20 {
                let z = C::new(0.37 * i as f64 + 0.01, 2.9 * j as f64 + 0.013);
                let d = ln_gamma(z + 1.0) - ln_gamma(z) - z.ln();
                assert!(d.norm() < 1e-11 * (1.0 + z.norm()), "z={z} d={d}");
            }
        }
    }

    #[test]
    fn complex_reference_values() {
        // ln Γ(1 + i) = -0.6509231993018563 - 0.3016403204675331 i
        let v = ln_gamma(C::new(1.0, 1.0));
        assert!(close(v, C::new(-0.650_923_199_301_856_3, -0.301_640_320_467_533_1), 1e-14));
        // |Γ(1/2 + i t)|² = π / cosh(π t)
        for t in [0.5, 3.0, 10.0, 40.0] {
            let v = ln_gamma(C::new(0.5, t)).re * 2.0;
            let exact = PI.ln() - (PI * t).cosh().ln();
            assert!((v - exact).abs() < 1e-12 * (1.0 + exact.abs()), "t={t}");
        }
    }

    #[test]
    fn digamma_values() {
        assert!(close(digamma(C::new(1.0, 0.0)), C::new(-EULER_GAMMA, 0.0), 1e-14));
        assert!(close(digamma(C::new(0.5, 0.0)), C::new(-EULER_GAMMA - 2.0 * 2f64.ln(), 0.0), 1e-14));
        // Im ψ(1/2 + i t) = (π/2) tanh(π t)
        let t = 2.3;
        assert!((digamma(C::new(0.5, t)).im - 0.5 * PI * (PI * t).tanh()).abs() < 1e-13);
    }

    #[test]
    fn gamma_ratio_matches_direct_difference() {
        for (x, d) in [(C::new(0.3, 0.2), 0.6), (C::new(15.0, -30.0), 0.4), (C::new(2.0, 50.0), 1.7), (C::new(40.0, 0.0), 0.5)] {
            let a = ln_gamma_ratio(x, d);
            let b = ln_gamma(x + d) - ln_gamma(x);
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()), "{x} {a} {b}");
        }
        let v = ln_gamma_ratio(C::new(1e6, 0.0), 0.5).re;
        assert!((v - 0.5 * 1e6f64.ln() + 0.125e-6).abs() < 1e-15 * 7.0 + 1e-17);
    }

    #[test]
    fn trigamma_values() {
        assert!((trigamma(C::new(1.0, 0.0)).re - PI * PI / 6.0).abs() < 1e-13);
        assert!((trigamma(C::new(0.5, 0.0)).re - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn qgamma_recurrence() {
        let q = 0.4;
        let z = C::new(1.3, 0.7);
        let lhs = ln_qgamma(z + 1.0, q) - ln_qgamma(z, q);
        let rhs = ((C::new(1.0, 0.0) - (z * q.ln()).exp()) / (1.0 - q)).ln();
        assert!((lhs - rhs).norm() < 1e-13);
        assert!(ln_qgamma(C::new(1.0, 0.0), q).norm() < 1e-14);
    }
}
