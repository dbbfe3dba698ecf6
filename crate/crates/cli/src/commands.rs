use expfunc_core::asymptotics::{
    convolution_tail, cramer_tail, smallx_limits, subordinator_tail, Quantity, SubordinatorSaddleData,
};
use expfunc_core::bgamma::{BernsteinGammaEvaluator, Policy, Route};
use expfunc_core::catalog::{bernstein_entries, bernstein_from_json, levy_entries, levy_from_json, strip_table_samples};
use expfunc_core::density::{cdf, density_grid, smallx_asymptotic_series, survival, Estimate, InversionPolicy};
use expfunc_core::mc::{ks_vs_cdf, sample_factorized, simulate_i, PathSimConfig, SampleSet};
use expfunc_core::mellin::MellinObject;
use expfunc_core::{Complex64, Error, LevyExponent, StripParams, Support};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{complex, num, Cell, Report, Table};
use crate::{Cli, CliError, Command, Family, Grid, Law, SimMethod};

pub fn parse_params(s: &str) -> Result<Value, CliError> {
    let v: Value = serde_json::from_str(s).map_err(|e| CliError::Usage(format!("--params is not valid JSON: {e}")))?;
    if !v.is_object() {
        return Err(CliError::Usage("--params must be a JSON object".into()));
    }
    Ok(v)
}

/// Parses `a`, `a+bi`, `a-bi` or `bi`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("cannot parse complex number {s:?}; expected e.g. 5+0i"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

/// Linear grid `lo:hi:n`.
pub fn parse_grid(g: &Grid) -> Result<Vec<f64>, CliError> {
    match (g.x, &g.x_grid) {
        (Some(x), _) => Ok(vec![x]),
        (None, Some(spec)) => {
            let parts: Vec<&str> = spec.split(':').collect();
            let bad = || CliError::Usage(format!("grid {spec:?} must be lo:hi:n"));
            let [lo, hi, n] = parts[..] else { return Err(bad()) };
            let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
            let n: usize = n.parse().map_err(|_| bad())?;
            match n {
                0 => Err(bad()),
                1 => Ok(vec![lo]),
                _ => Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        (None, None) => Err(CliError::Usage("give --x or --x-grid".into())),
    }
}

fn log_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let g = parse_grid(&Grid { x: None, x_grid: Some(spec.into()) })?;
    let (lo, hi) = (g[0], *g.last().expect("grid is non-empty"));
    if !(lo > 0.0 && hi > 0.0) {
        return Err(CliError::Usage("decay grid bounds must be positive".into()));
    }
    let n = g.len();
    Ok((0..n).map(|i| lo * (hi / lo).powf(if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 })).collect())
}

fn levy(f: &Family) -> Result<LevyExponent, CliError> {
    Ok(levy_from_json(&f.family, &parse_params(&f.params)?)?)
}

fn mellin(f: &Family) -> Result<MellinObject, CliError> {
    Ok(MellinObject::new(levy(f)?)?)
}

fn inversion_policy(tol: Option<f64>) -> InversionPolicy {
    tol.map_or_else(InversionPolicy::default, InversionPolicy::with_tol)
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("core types serialize")
}

pub fn strips(sp: &StripParams) -> Value {
    json!({
        "a_plus": num(sp.a_plus), "u_plus": num(sp.u_plus), "abar_plus": num(sp.abar_plus),
        "a_minus": num(sp.a_minus), "u_minus": num(sp.u_minus), "abar_minus": num(sp.abar_minus),
        "c_psi": num(sp.c_psi),
    })
}

fn support(s: Support) -> Value {
    match s {
        Support::Point { at } => json!({"kind": "point", "at": num(at)}),
        Support::Interval { lo, hi } => json!({"kind": "interval", "lo": num(lo), "hi": num(hi)}),
    }
}

fn estimate_row(x: f64, e: &Estimate) -> Vec<Cell> {
    let method = to_value(&e.method).as_str().unwrap_or_default().to_string();
    vec![Cell::Num(x), Cell::Num(e.value), Cell::Num(e.err), Cell::Text(method)]
}

pub fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Wgamma { family, z, route } => wgamma(family, z, route, cli.tol),
        Command::Model { family, info } => model(family, info),
        Command::Mellin { family, z, meromorphic, poles, decay_grid, decay_line } => {
            mellin_cmd(family, z, *meromorphic, *poles, decay_grid.as_deref(), *decay_line)
        }
        Command::Moments { family, max_n } => moments(family, *max_n),
        Command::Density { family, grid, deriv } => {
            let m = mellin(family)?;
            let xs = parse_grid(grid)?;
            let pol = inversion_policy(cli.tol);
            let rows = density_grid(&m, &xs, *deriv, &pol)
                .into_iter()
                .zip(&xs)
                .map(|(r, &x)| r.map(|e| estimate_row(x, &e)))
                .collect::<Result<Vec<_>, Error>>()?;
            let table = Table { header: vec!["x", "f", "est_error", "method"], rows };
            Ok(Report::with_table(json!({"deriv": deriv}), table))
        }
        Command::Cdf { family, grid, survival: upper } => {
            let m = mellin(family)?;
            let xs = parse_grid(grid)?;
            let pol = inversion_policy(cli.tol);
            let rows = xs
                .par_iter()
                .map(|&x| {
                    let e = if *upper { survival(&m, x, &pol)? } else { cdf(&m, x, &pol)? };
                    Ok(estimate_row(x, &e))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let col = if *upper { "survival" } else { "cdf" };
            let table = Table { header: vec!["x", col, "est_error", "method"], rows };
            Ok(Report::with_table(json!({"quantity": col}), table))
        }
        Command::Tail { family, x, law, deriv, compare } => tail(family, *x, *law, *deriv, *compare, cli.tol),
        Command::Smallx { family, series_x, terms } => {
            let m = mellin(family)?;
            let report = smallx_limits(&m, &inversion_policy(cli.tol))?;
            let series = match series_x {
                Some(x) => Some(to_value(&smallx_asymptotic_series(m.levy(), *x, *terms)?)),
                None => None,
            };
            Ok(Report::json(json!({"limits": to_value(&report), "series": series})))
        }
        Command::Simulate { family, n, dt, t_max, no_richardson, method, reference } => {
            let l = levy(family)?;
            let samples: SampleSet = match method {
                SimMethod::Path => {
                    let mut cfg = PathSimConfig::new(*dt, *n, cli.seed);
                    cfg.t_max = *t_max;
                    cfg.richardson = !no_richardson;
                    simulate_i(&l, &cfg)?
                }
                SimMethod::Factorized => sample_factorized(&l, *n, cli.seed)?,
            };
            let ks = if *reference {
                let m = MellinObject::new(l)?;
                let pol = inversion_policy(cli.tol);
                Some(ks_vs_cdf(&samples.values, |x| Ok(cdf(&m, x, &pol)?.value), 2000)?)
            } else {
                None
            };
            let s = &samples.summary;
            let body = json!({
                "n": s.n, "mean": num(s.mean), "var": num(s.var), "se": num(s.se),
                "quantiles": s.quantiles.iter().map(|(p, v)| json!({"level": num(*p), "value": num(*v)})).collect::<Vec<_>>(),
                "ks_vs_reference": ks.map(num),
            });
            let rows = samples.values.iter().enumerate().map(|(i, v)| vec![Cell::Int(i as u64), Cell::Num(*v)]).collect();
            let mut report = Report::with_table(body, Table { header: vec!["index", "value"], rows });
            if crate::output::Sink::parse(cli.out.as_deref()).format == crate::output::Format::Json {
                // Per-sample values only go to CSV; JSON carries the summary.
                report.table = None;
            }
            Ok(report)
        }
        Command::Catalog => Ok(Report::json(json!({
            "bernstein": to_value(&bernstein_entries()),
            "levy": to_value(&levy_entries()),
        }))),
        Command::ReproduceAppendix => unreachable!("handled by the caller"),
    }
}

fn wgamma(family: &Family, z: &str, route: &str, tol: Option<f64>) -> Result<Report, CliError> {
    let phi = bernstein_from_json(&family.family, &parse_params(&family.params)?)?;
    let mut policy = Policy::default();
    if let Some(t) = tol {
        policy.rel_tol = t;
    }
    let ev = BernsteinGammaEvaluator::with_policy(phi, policy)?;
    let route: Route = route.parse()?;
    let z = parse_complex(z)?;
    let w = ev.wgamma_route(z, route)?;
    Ok(Report::json(json!({
        "z": complex(z),
        "value": complex(w.value),
        "value_re": num(w.value.re),
        "value_im": num(w.value.im),
        "log": complex(w.log),
        "route": w.route.name(),
        "est_error": num(w.est_error),
    })))
}

fn model(family: &Family, info: &str) -> Result<Report, CliError> {
    let l = levy(family)?;
    let mut body = serde_json::Map::new();
    body.insert("family_tag".into(), json!(l.family.name()));
    for key in info.split(',').map(str::trim).filter(|k| !k.is_empty()) {
        let v = match key {
            "strips" => strips(&l.strip_params()?),
            "npsi" => num(l.n_psi()?),
            "support" => support(l.support()),
            "factors" => json!({"phi_plus": l.phi_plus().describe(), "phi_minus": l.phi_minus().describe()}),
            "kill" => num(l.kill_rate()),
            "mean" => l.mean().map_or(Value::Null, num),
            other => return Err(CliError::Usage(format!("unknown --info item {other:?}"))),
        };
        body.insert(key.into(), v);
    }
    Ok(Report::json(Value::Object(body)))
}

fn mellin_cmd(
    family: &Family,
    z: &str,
    meromorphic: bool,
    poles: Option<usize>,
    decay_grid: Option<&str>,
    decay_line: f64,
) -> Result<Report, CliError> {
    let m = mellin(family)?;
    let z = parse_complex(z)?;
    let value = if meromorphic { m.eval_meromorphic(z)? } else { m.eval(z)? };
    let (lo, hi) = m.strip();
    let mut body = json!({
        "z": complex(z),
        "value": complex(value),
        "strip": {"lower": num(lo), "upper": num(hi)},
        "boundary": boundary(&m),
        "route": m.route().name(),
    });
    if let Some(n) = poles {
        body["poles"] = to_value(&m.poles_and_residues(n)?);
    }
    if let Some(spec) = decay_grid {
        body["decay"] = to_value(&m.decay_profile(decay_line, &log_grid(spec)?)?);
    }
    Ok(Report::json(body))
}

fn boundary(m: &MellinObject) -> Value {
    let b = m.boundary_classification();
    json!({
        "lower": num(b.lower), "lower_class": to_value(&b.lower_class),
        "upper": num(b.upper), "upper_class": to_value(&b.upper_class),
    })
}

fn moment_status(r: Result<f64, Error>, boundary: bool) -> Result<Value, CliError> {
    match r {
        Ok(v) if boundary => Ok(json!({"status": "boundary", "value": num(v)})),
        Ok(v) => Ok(json!({"status": "finite", "value": num(v)})),
        Err(Error::MomentInfinite(why)) => Ok(json!({"status": "infinite", "reason": why})),
        Err(e) => Err(e.into()),
    }
}

fn moments(family: &Family, max_n: usize) -> Result<Report, CliError> {
    let m = mellin(family)?;
    let edge_pos = -m.strip_params().abar_minus;
    let edge_neg = 1.0 - m.strip().0;
    let mut rows = Vec::new();
    for n in 0..=max_n {
        let nf = n as f64;
        let pos = moment_status(m.moment_positive(n), nf == edge_pos)?;
        let neg = moment_status(m.moment_negative(n), n > 0 && nf == edge_neg)?;
        rows.push(json!({"n": n, "positive": pos, "negative": neg}));
    }
    Ok(Report::json(json!({"moments": rows})))
}

fn tail(family: &Family, x: f64, law: Law, deriv: Option<usize>, compare: bool, tol: Option<f64>) -> Result<Report, CliError> {
    let l = levy(family)?;
    let q = deriv.map_or(Quantity::Survival, Quantity::Density);
    let asym = match law {
        Law::Cramer => cramer_tail(&MellinObject::new(l.clone())?, x, q)?,
        Law::Saddle => subordinator_tail(&SubordinatorSaddleData::new(&l)?, x, q)?,
        Law::Convolution => {
            if deriv.is_some() {
                return Err(CliError::Usage("the convolution law gives the survival function only".into()));
            }
            convolution_tail(&l, x)?
        }
    };
    let mut body = json!({"x": num(x), "asymptotic": to_value(&asym)});
    if compare {
        let m = MellinObject::new(l)?;
        let pol = inversion_policy(tol);
        let exact = match deriv {
            None => survival(&m, x, &pol)?,
            Some(n) => density_grid(&m, &[x], n, &pol).remove(0)?,
        };
        body["inversion"] = to_value(&exact);
        body["ratio"] = num(asym.value / exact.value);
    }
    Ok(Report::json(body))
}

/// Strip parameters over the sampled catalog settings.
pub fn reproduce_appendix() -> Result<(Report, Table), CliError> {
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for (row, id, settings) in strip_table_samples() {
        for p in settings {
            let sp = levy_from_json(id, &p)?.strip_params()?;
            let params = crate::output::to_json_string(&p);
            rows.push(vec![
                Cell::Text(row.into()),
                Cell::Text(id.into()),
                Cell::Text(params),
                Cell::Num(sp.a_plus),
                Cell::Num(sp.a_minus),
                Cell::Num(sp.u_plus),
                Cell::Num(sp.u_minus),
                Cell::Num(sp.abar_plus),
                Cell::Num(sp.abar_minus),
                Cell::Num(sp.c_psi),
            ]);
            json_rows.push(json!({"row": row, "family": id, "params": p, "strips": strips(&sp)}));
        }
    }
    let header = vec!["row", "family", "params", "a_plus", "a_minus", "u_plus", "u_minus", "abar_plus", "abar_minus", "c_psi"];
    Ok((Report::json(json!({"table": json_rows})), Table { header, rows }))
}
