//! Acceptance run: one line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use expfunc_core::asymptotics::{cramer_constant, subordinator_tail, Quantity, SubordinatorSaddleData};
use expfunc_core::bgamma::{BernsteinGammaEvaluator, Route};
use expfunc_core::catalog::{bernstein_from_json, levy_from_json, strip_table_samples};
use expfunc_core::density::{cdf, density, smallx_asymptotic_series, smallx_coefficients, survival, InversionPolicy};
use expfunc_core::mc::{ks_two_sample, ks_vs_cdf, sample_factorized, simulate_i, PathSimConfig};
use expfunc_core::mellin::MellinObject;
use expfunc_core::{BernsteinFunction, Complex64 as C, Error, LevyExponent, PhiKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

// Lanczos (g = 7, n = 9) complex log-gamma, kept separate from the library's own.
const LANCZOS: [f64; 9] = [
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

fn ln_gamma_ref(z: C) -> C {
    let pi = std::f64::consts::PI;
    if z.re < 0.5 {
        return C::new(pi, 0.0).ln() - (z * pi).sin().ln() - ln_gamma_ref(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = C::new(LANCZOS[0], 0.0);
    for (i, p) in LANCZOS.iter().enumerate().skip(1) {
        x += *p / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * pi).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

fn gamma_ref(x: f64) -> f64 {
    ln_gamma_ref(C::new(x, 0.0)).re.exp()
}

fn rel_from_logs(a: C, b: C) -> f64 {
    ((a - b).exp() - 1.0).norm()
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Check = fn() -> Result<Outcome, Error>;

fn within(limit: Duration, t: Duration) -> bool {
    t <= limit
}

fn c1_gamma_catalog() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let res = [0.2, 1.0, 3.0, 7.5, 20.0];
    let ims = [-40.0, -25.0, -10.0, -3.0, -0.5, 0.0, 1.0, 6.0, 18.0, 40.0];
    let mut worst = 0.0f64;
    for q in [0.0, 1.0, 2.5] {
        let phi = BernsteinFunction::new(PhiKind::Affine { q, d: 1.0 })?;
        let ev = BernsteinGammaEvaluator::new(phi)?;
        let base = ln_gamma_ref(C::new(1.0 + q, 0.0));
        for &a in &res {
            for &b in &ims {
                let z = C::new(a, b);
                let reference = ln_gamma_ref(z + q) - base;
                worst = worst.max(rel_from_logs(ev.log_wgamma(z)?, reference));
            }
        }
    }
    let t = t0.elapsed();
    Ok(Outcome::new(
        worst < 1e-8 && within(Duration::from_secs(5), t),
        format!("max relative error {worst:.2e} over 3 x 50 points in {t:.2?}"),
    ))
}

fn bernstein_samples() -> Vec<(&'static str, Value)> {
    vec![
        ("constant", json!({"c": 2.0})),
        ("affine", json!({"q": 1.0})),
        ("power", json!({"alpha": 0.5})),
        ("shifted-ratio", json!({"a": 0.5, "b": 1.0})),
        ("gamma-linear", json!({"a": 0.5, "b": 1.0})),
        ("gamma-scaled", json!({"a": 1.5})),
        ("gamma-ratio", json!({"a": 1.0, "b": 0.5})),
        ("geom", json!({"q": 0.5})),
        ("ratio", json!({"a": 1.0})),
        ("ratio-power", json!({"a": 1.0, "alpha": 0.5})),
        ("stable", json!({"alpha": 0.5})),
        ("q-gamma", json!({"q": 0.5})),
        ("log-gamma", json!({"c": 1.0, "theta": 1.0})),
        ("inverse-gaussian", json!({"s": 1.0, "b": 1.0})),
        ("custom-tail", json!({"atoms": [[1.0, 2.0]], "kill": 0.5})),
    ]
}

fn levy_samples() -> Vec<(&'static str, Value)> {
    vec![
        ("brownian", json!({"q": 1.0, "sigma2": 2.0})),
        ("brownian", json!({"q": 0.5, "sigma2": 1.0, "mu": -0.7})),
        ("dufresne", json!({"mu": 1.0})),
        ("killed-drift", json!({"q": 2.5})),
        ("gamma-subordinator", json!({"q": 1.0, "c": 1.0, "theta": 1.0})),
        ("inverse-gaussian-subordinator", json!({"q": 0.5, "s": 1.0, "b": 1.0})),
        ("stable-subordinator", json!({"alpha": 0.5, "q": 1.0})),
        ("hypergeometric", json!({"beta": 0.5, "gamma": 0.6, "beta_hat": 0.3, "gamma_hat": 0.7})),
        ("hyper-exponential", json!({"q": 1.0, "sigma2": 1.0, "mu": 0.5, "pos": [[1.0, 3.0]], "neg": [[1.0, 2.0]]})),
        (
            "custom-pair",
            json!({"plus": {"id": "power", "params": {"alpha": 0.5, "c": 0.5}},
                   "minus": {"id": "shifted-ratio", "params": {"a": 0.5, "b": 1.0}}}),
        ),
    ]
}

fn c2_recurrences() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_w = (0.0f64, "");
    for (id, p) in bernstein_samples() {
        let ev = BernsteinGammaEvaluator::new(bernstein_from_json(id, &p)?)?;
        let lo = ev.abscissae().a_phi.max(0.0) + 0.1;
        for i in 0..500 {
            let z = C::new(rng.gen_range(lo..lo + 15.0), rng.gen_range(-20.0..20.0));
            // Alternate between the default route and the generic engine.
            let route = if i % 2 == 0 { Route::Auto } else { Route::Generic };
            let w0 = ev.wgamma_route(z, route)?.value;
            let w1 = ev.wgamma_route(z + 1.0, route)?.value;
            let r = (w1 - ev.phi().eval(z)? * w0).norm() / w1.norm();
            if r > worst_w.0 {
                worst_w = (r, id);
            }
        }
    }
    let mut worst_m = (0.0f64, "");
    let mut short = Vec::new();
    for ((id, p), route) in levy_samples().into_iter().flat_map(|s| [(s.clone(), Route::Auto), (s, Route::Generic)]) {
        let m = MellinObject::with_route(levy_from_json(id, &p)?, route)?;
        let (lo, hi) = m.strip();
        let lo = lo.max(0.0) + 0.05;
        let hi = hi.min(lo + 2.0) - 0.05;
        let mut got = 0;
        for _ in 0..500 {
            if got == 50 {
                break;
            }
            let z = C::new(rng.gen_range(lo..hi), rng.gen_range(-15.0..15.0));
            // The recurrence in the library is bypassed: both sides are evaluated directly.
            let Ok(psi) = m.levy().psi(-z) else { continue };
            let m0 = m.eval_meromorphic(z)?;
            let m1 = m.eval_meromorphic(z + 1.0)?;
            let r = (m1 + z / psi * m0).norm() / m1.norm();
            got += 1;
            if r > worst_m.0 {
                worst_m = (r, id);
            }
        }
        if got < 50 {
            short.push(id);
        }
    }
    let t = t0.elapsed();
    Ok(Outcome::new(
        worst_w.0 < 1e-9 && worst_m.0 < 1e-8 && short.is_empty() && within(Duration::from_secs(30), t),
        format!(
            "W residual {:.2e} (worst {}), M residual {:.2e} (worst {}), short families {:?}, {t:.2?}",
            worst_w.0, worst_w.1, worst_m.0, worst_m.1, short
        ),
    ))
}

fn c3_killed_drift() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let q = 2.5;
    let l = LevyExponent::killed_drift(q, 1.0)?;
    let n_psi = l.n_psi()?;
    let m = MellinObject::new(l)?;
    let pol = InversionPolicy::default();
    let mut worst = 0.0f64;
    for i in 0..=90 {
        let x = 0.05 + 0.01 * i as f64;
        let f = density(&m, x, 0, &pol)?.value;
        worst = worst.max((f - q * (1.0 - x).powf(q - 1.0)).abs());
    }
    let gate = matches!(density(&m, 0.5, 2, &pol), Err(Error::Smoothness(_)));
    let t = t0.elapsed();
    Ok(Outcome::new(
        worst < 1e-6 && (n_psi - 2.5).abs() < 1e-12 && gate && within(Duration::from_secs(10), t),
        format!("max abs error {worst:.2e}, N = {n_psi}, order-2 rejected: {gate}, {t:.2?}"),
    ))
}

fn c4_dufresne() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let pol = InversionPolicy::default();
    let mut worst = 0.0f64;
    for mu in [0.5, 1.0, 2.0] {
        let m = MellinObject::new(LevyExponent::dufresne(mu)?)?;
        let g = gamma_ref(mu);
        for i in 0..=48 {
            let x = 0.2 * (25.0f64).powf(i as f64 / 48.0);
            let exact = (2.0 * x).powf(-mu) * (-1.0 / (2.0 * x)).exp() / (x * g);
            let f = density(&m, x, 0, &pol)?.value;
            worst = worst.max(((f - exact) / exact).abs());
        }
    }
    let t = t0.elapsed();
    Ok(Outcome::new(
        worst < 1e-5 && within(Duration::from_secs(20), t),
        format!("max relative error {worst:.2e}, {t:.2?}"),
    ))
}

fn c5_cramer() -> Result<Outcome, Error> {
    let x = 1e3;
    let m = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0)?)?;
    let (c, u) = cramer_constant(&m)?;
    let from_constant = x * c * x.powf(u);
    let pol = InversionPolicy::default();
    let from_survival = x * survival(&m, x, &pol)?.value;
    let from_cdf = x * (1.0 - cdf(&m, x, &pol)?.value);
    let near = |v: f64| ((v - 0.5) / 0.5).abs() < 0.02;
    let agree = ((from_constant - from_survival) / from_constant).abs() < 0.02;
    Ok(Outcome::new(
        near(from_constant) && near(from_survival) && near(from_cdf) && agree,
        format!("constant {from_constant:.5}, survival {from_survival:.5}, 1 - cdf {from_cdf:.5}"),
    ))
}

fn c6_saddle() -> Result<Outcome, Error> {
    let phi = BernsteinFunction::new(PhiKind::Power { q: 0.0, alpha: 0.5, c: 0.0 })?;
    let l = LevyExponent::subordinator(phi)?;
    let s = SubordinatorSaddleData::new(&l)?;
    let m = MellinObject::new(l)?;
    let pol = InversionPolicy::default();
    let mut ratios = Vec::new();
    for i in 0..=6 {
        let x = 5.0 + 0.5 * i as f64;
        let asym = subordinator_tail(&s, x, Quantity::Density(0))?.value;
        ratios.push((x, asym / density(&m, x, 0, &pol)?.value));
    }
    let at6 = ratios[2].1;
    let monotone = ratios.windows(2).all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs());
    let shown: Vec<String> = ratios.iter().map(|(x, r)| format!("{x}:{r:.5}")).collect();
    Ok(Outcome::new(
        (0.9..=1.1).contains(&at6) && monotone,
        format!("ratios {}", shown.join(" ")),
    ))
}

fn c7_moments() -> Result<Outcome, Error> {
    let mut worst = 0.0f64;
    let mut gates = Vec::new();
    let mut rel = |a: f64, b: f64| worst = worst.max(((a - b) / b).abs());

    let q = 2.5;
    let kd = MellinObject::new(LevyExponent::killed_drift(q, 1.0)?)?;
    for n in 1..=8 {
        let exact = gamma_ref(n as f64 + 1.0) * gamma_ref(1.0 + q) / gamma_ref(1.0 + q + n as f64);
        rel(kd.moment_positive(n)?, exact);
    }
    gates.push(("killed drift E[1/I]", matches!(kd.moment_negative(1), Err(Error::MomentInfinite(_)))));

    for mu in [0.5, 1.0, 2.0, 3.5] {
        let d = MellinObject::new(LevyExponent::dufresne(mu)?)?;
        for n in 1..=6usize {
            let nf = n as f64;
            let neg = 2f64.powi(n as i32) * gamma_ref(mu + nf) / gamma_ref(mu);
            rel(d.moment_negative(n)?, neg);
            let pos = d.moment_positive(n);
            if nf < mu {
                rel(pos?, 2f64.powi(-(n as i32)) * gamma_ref(mu - nf) / gamma_ref(mu));
            } else {
                gates.push(("dufresne E[I^n], n >= mu", matches!(pos, Err(Error::MomentInfinite(_)))));
            }
        }
    }

    let b = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0)?)?;
    gates.push(("symmetric brownian E[I]", matches!(b.moment_positive(1), Err(Error::MomentInfinite(_)))));
    // q = 1, σ² = 1: I = Beta(1, √2)·2/Gamma(√2), so E I = 2.
    let b2 = MellinObject::new(LevyExponent::brownian(1.0, 1.0, 0.0)?)?;
    let r2 = 2f64.sqrt();
    rel(b2.moment_positive(1)?, 2.0 / (1.0 + r2) * gamma_ref(r2 - 1.0) / gamma_ref(r2));
    gates.push(("brownian q=1 s2=1 E[I^2]", matches!(b2.moment_positive(2), Err(Error::MomentInfinite(_)))));

    let failed: Vec<&str> = gates.iter().filter(|g| !g.1).map(|g| g.0).collect();
    Ok(Outcome::new(
        worst < 1e-9 && failed.is_empty(),
        format!("max relative error {worst:.2e}, {} gates checked, failing gates {failed:?}", gates.len()),
    ))
}

fn c8_monte_carlo() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let pol = InversionPolicy::default();
    let models = [
        ("killed drift", LevyExponent::killed_drift(2.5, 1.0)?),
        ("dufresne", LevyExponent::dufresne(1.0)?),
        ("hyper-exponential", LevyExponent::hyper_exponential(1.0, 1.0, 0.5, vec![(1.0, 3.0)], vec![(1.0, 2.0)])?),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, l)) in models.iter().enumerate() {
        let path = simulate_i(l, &PathSimConfig::new(1e-3, 100_000, 11 + i as u64))?;
        let m = MellinObject::new(l.clone())?;
        let ks_inv = ks_vs_cdf(&path.values, |x| Ok(cdf(&m, x, &pol)?.value), 2000)?;
        let fact = sample_factorized(l, 100_000, 101 + i as u64)?;
        let ks_fact = ks_two_sample(&path.values, &fact.values);
        ok &= ks_inv < 0.01 && ks_fact < 0.01;
        parts.push(format!("{name}: ks {ks_inv:.4} / {ks_fact:.4}"));
    }
    let t = t0.elapsed();
    Ok(Outcome::new(
        ok && within(Duration::from_secs(120), t),
        format!("{}, {t:.2?}", parts.join("; ")),
    ))
}

fn strip_expected(id: &str, p: &Value) -> Option<[Option<f64>; 6]> {
    let g = |k: &str, d: f64| p.get(k).and_then(Value::as_f64).unwrap_or(d);
    let inf = f64::INFINITY;
    // Order: a₊, a₋, u₊, u₋, ā₊, ā₋; None marks a family-specific entry.
    Some(match id {
        "brownian" => {
            let (q, s2, mu) = (g("q", 0.0), g("sigma2", 0.0), g("mu", 0.0));
            let r = (mu * mu + 2.0 * s2 * q).sqrt();
            let up = (-mu + r) / s2;
            let um = (-mu - r) / s2;
            [Some(inf), Some(-inf), Some(up), Some(um), Some(up), Some(um)]
        }
        "gamma-subordinator" => {
            let (q, c, th) = (g("q", 0.0), g("c", 0.0), g("theta", 0.0));
            let u = th * (1.0 - (-q / c).exp());
            [Some(th), Some(-inf), Some(u), Some(-inf), Some(u), Some(-inf)]
        }
        "inverse-gaussian-subordinator" => {
            let (q, s, b) = (g("q", 0.0), g("s", 0.0), g("b", 0.0));
            if q <= s * b {
                let u = b * q / s - q * q / (2.0 * s * s);
                [Some(b * b / 2.0), Some(-inf), Some(u), Some(-inf), None, Some(-inf)]
            } else {
                [Some(b * b / 2.0), Some(-inf), Some(inf), Some(-inf), Some(b * b / 2.0), Some(-inf)]
            }
        }
        "two-sided-heavy" => [Some(0.0); 6],
        "hypergeometric" => {
            let (b, gm, bh, gh) = (g("beta", 0.0), g("gamma", 0.0), g("beta_hat", 0.0), g("gamma_hat", 0.0));
            [Some(1.0 - b + gm), Some(-bh - gh), Some(1.0 - b), Some(-bh), Some(1.0 - b), Some(-bh)]
        }
        "hyper-exponential" => {
            let min_rate = |k: &str| {
                p[k].as_array()
                    .map(|v| v.iter().filter_map(|e| e[1].as_f64()).fold(inf, f64::min))
                    .unwrap_or(inf)
            };
            [Some(min_rate("pos")), Some(-min_rate("neg")), None, None, None, None]
        }
        _ => return None,
    })
}

fn c9_strip_tables() -> Result<Outcome, Error> {
    let names = ["a+", "a-", "u+", "u-", "abar+", "abar-"];
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for (row, id, settings) in strip_table_samples() {
        for p in settings {
            let Some(expected) = strip_expected(id, &p) else {
                mismatches.push(format!("{row}: no oracle"));
                continue;
            };
            let sp = levy_from_json(id, &p)?.strip_params()?;
            let got = [sp.a_plus, sp.a_minus, sp.u_plus, sp.u_minus, sp.abar_plus, sp.abar_minus];
            for ((e, g), name) in expected.iter().zip(got).zip(names) {
                let Some(e) = *e else { continue };
                checked += 1;
                let ok = if e.is_infinite() { g == e } else { (g - e).abs() <= 1e-10 * (1.0 + e.abs()) };
                if !ok {
                    mismatches.push(format!("{row} {p} {name}: {g} vs {e}"));
                }
            }
        }
    }
    Ok(Outcome::new(mismatches.is_empty(), format!("{checked} entries checked, mismatches {mismatches:?}")))
}

fn c10_small_x() -> Result<Outcome, Error> {
    let pol = InversionPolicy::default();
    let x = 1e-4;
    let killed = [
        ("killed drift", LevyExponent::killed_drift(2.5, 1.0)?),
        ("brownian", LevyExponent::brownian(1.0, 2.0, 0.0)?),
        ("hyper-exponential", LevyExponent::hyper_exponential(1.0, 1.0, 0.5, vec![(1.0, 3.0)], vec![(1.0, 2.0)])?),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, l) in killed {
        let q = l.kill_rate();
        let m = MellinObject::new(l)?;
        let ratio = cdf(&m, x, &pol)?.value / x / q;
        ok &= (ratio - 1.0).abs() < 0.01;
        parts.push(format!("{name} F/(qx) = {ratio:.6}"));
    }
    let q = 2.5;
    let l = LevyExponent::killed_drift(q, 1.0)?;
    let coeffs = smallx_coefficients(&l, 8)?;
    let mut binom = 1.0;
    let mut worst = 0.0f64;
    let xs = 0.3f64;
    let mut partial = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        let k = k + 1;
        binom *= (q - (k - 1) as f64) / k as f64;
        let exact = -(-1f64).powi(k as i32) * binom;
        worst = worst.max((c - exact).abs());
        partial += exact * xs.powi(k as i32);
        let series = smallx_asymptotic_series(&l, xs, k)?.value;
        worst = worst.max((series - partial).abs());
    }
    ok &= worst < 1e-12;
    parts.push(format!("binomial terms max error {worst:.1e}"));
    Ok(Outcome::new(ok, parts.join(", ")))
}

fn c11_decay() -> Result<Outcome, Error> {
    let kd = MellinObject::new(LevyExponent::killed_drift(2.5, 1.0)?)?;
    let grid: Vec<f64> = (0..=20).map(|i| 10f64.powf(2.0 + i as f64 / 10.0)).collect();
    let slope = kd.decay_profile(0.5, &grid)?.log_slope;
    let b = MellinObject::new(LevyExponent::brownian(1.0, 2.0, 0.0)?)?;
    let rate = b.ln_eval(C::new(1.0, 40.0))?.re / 40.0;
    Ok(Outcome::new(
        (-2.7..=-2.3).contains(&slope) && rate <= -1.4,
        format!("killed drift log-slope {slope:.5}, brownian ln|M(1+40i)|/40 = {rate:.4}"),
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 11] = [
        ("gamma catalog exactness", c1_gamma_catalog),
        ("recurrence residuals", c2_recurrences),
        ("killed drift law", c3_killed_drift),
        ("inverse-gamma law", c4_dufresne),
        ("power-tail constant", c5_cramer),
        ("saddle tail", c6_saddle),
        ("moment tables", c7_moments),
        ("monte carlo cross-validation", c8_monte_carlo),
        ("strip tables", c9_strip_tables),
        ("small-x limits", c10_small_x),
        ("decay profiles", c11_decay),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {}", i + 1, outcome.detail);
        failures += usize::from(!outcome.pass);
    }
    println!("{} of {} criteria passed", checks.len() - failures, checks.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
