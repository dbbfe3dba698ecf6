//! String-id registry: Bernstein functions and Lévy models built from JSON
//! parameter maps.

use crate::bernstein::{BernsteinFunction, LevyMeasureSpec, PhiKind};
use crate::error::{Error, Result};
use crate::levy::LevyExponent;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// One parameter of a catalog entry.
#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    /// Used when the parameter is omitted; `None` means required.
    pub default: Option<f64>,
    pub constraint: &'static str,
}

/// A catalog entry with its parameter schema.
#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub id: &'static str,
    pub formula: &'static str,
    pub params: Vec<ParamSpec>,
}

const fn req(name: &'static str, constraint: &'static str) -> ParamSpec {
    ParamSpec { name, default: None, constraint }
}

const fn opt(name: &'static str, default: f64, constraint: &'static str) -> ParamSpec {
    ParamSpec { name, default: Some(default), constraint }
}

/// Bernstein-function ids.
pub fn bernstein_entries() -> Vec<Entry> {
    vec![
        Entry { id: "constant", formula: "c", params: vec![req("c", "c > 0")] },
        Entry {
            id: "affine",
            formula: "q + d z",
            params: vec![req("q", "q >= 0"), opt("d", 1.0, "d >= 0")],
        },
        Entry {
            id: "power",
            formula: "c + (z + q)^alpha",
            params: vec![opt("q", 0.0, "q >= 0"), req("alpha", "0 < alpha < 1"), opt("c", 0.0, "c >= 0")],
        },
        Entry {
            id: "shifted-ratio",
            formula: "(z + 1 - a)/(z + b)",
            params: vec![req("a", "0 < a < 1"), req("b", "b >= 1 - a")],
        },
        Entry {
            id: "gamma-linear",
            formula: "Gamma(a z + b)/Gamma(a (z - 1) + b)",
            params: vec![req("a", "0 < a < 1"), req("b", "b >= a")],
        },
        Entry { id: "gamma-scaled", formula: "Gamma(a z + a)/(z Gamma(a z))", params: vec![req("a", "1 < a < 2")] },
        Entry {
            id: "gamma-ratio",
            formula: "Gamma(z + a + b)/Gamma(z + a)",
            params: vec![req("a", "a >= 0"), req("b", "0 < b < 1")],
        },
        Entry {
            id: "geom",
            formula: "1 - q^(z + b)",
            params: vec![req("q", "0 < q < 1"), opt("b", 0.0, "b >= 0")],
        },
        Entry { id: "ratio", formula: "z/(z + a)", params: vec![req("a", "a > 0")] },
        Entry {
            id: "ratio-power",
            formula: "z/(z + a)^alpha",
            params: vec![req("a", "a > 0"), req("alpha", "0 < alpha < 1")],
        },
        Entry { id: "stable", formula: "z^alpha/(1 + z)^alpha", params: vec![req("alpha", "0 < alpha < 1")] },
        Entry { id: "q-gamma", formula: "(1 - q^z)/(1 - q)", params: vec![req("q", "0 < q < 1")] },
        Entry {
            id: "log-gamma",
            formula: "q + c ln(1 + z/theta)",
            params: vec![opt("q", 0.0, "q >= 0"), req("c", "c > 0"), req("theta", "theta > 0")],
        },
        Entry {
            id: "inverse-gaussian",
            formula: "q + s (sqrt(2 z + b^2) - b)",
            params: vec![opt("q", 0.0, "q >= 0"), req("s", "s > 0"), req("b", "b >= 0")],
        },
        Entry {
            id: "custom-tail",
            formula: "kill + drift z + sum mass (1 - e^(-z pos)), or an expression in z",
            params: vec![
                opt("kill", 0.0, "kill >= 0"),
                opt("drift", 0.0, "drift >= 0"),
                ParamSpec { name: "atoms", default: None, constraint: "list of [position, mass] pairs" },
                ParamSpec { name: "expression", default: None, constraint: "arithmetic in z, exp, log, pow, gamma" },
                opt("a_phi", 0.0, "declared abscissa for an expression, <= 0"),
            ],
        },
    ]
}

/// Lévy-model ids.
pub fn levy_entries() -> Vec<Entry> {
    vec![
        Entry {
            id: "brownian",
            formula: "Psi(z) = sigma2 z^2/2 + mu z - q",
            params: vec![opt("q", 0.0, "q >= 0"), req("sigma2", "sigma2 >= 0"), opt("mu", 0.0, "real")],
        },
        Entry { id: "dufresne", formula: "xi = 2(B_t + mu t)", params: vec![req("mu", "mu > 0")] },
        Entry {
            id: "killed-drift",
            formula: "Psi(z) = d z - q",
            params: vec![req("q", "q >= 0"), opt("d", 1.0, "d > 0")],
        },
        Entry {
            id: "gamma-subordinator",
            formula: "Psi(z) = -q - c ln(1 - z/theta)",
            params: vec![opt("q", 0.0, "q >= 0"), req("c", "c > 0"), req("theta", "theta > 0")],
        },
        Entry {
            id: "inverse-gaussian-subordinator",
            formula: "Psi(z) = -q - s (sqrt(b^2 - 2 z) - b)",
            params: vec![opt("q", 0.0, "q >= 0"), req("s", "s > 0"), req("b", "b >= 0")],
        },
        Entry {
            id: "stable-subordinator",
            formula: "Psi(z) = -q - k (-z)^alpha",
            params: vec![req("alpha", "0 < alpha < 1"), opt("k", 1.0, "k > 0"), opt("q", 0.0, "q >= 0")],
        },
        Entry {
            id: "subordinator",
            formula: "Psi(z) = -phi(-z)",
            params: vec![ParamSpec { name: "phi", default: None, constraint: "{id, params} of a Bernstein function" }],
        },
        Entry {
            id: "neg-subordinator",
            formula: "Psi(z) = -phi(z), phi(0) > 0",
            params: vec![ParamSpec { name: "phi", default: None, constraint: "{id, params} of a Bernstein function" }],
        },
        Entry {
            id: "hypergeometric",
            formula: "Psi(z) = -Gamma(1-beta+gamma-z)/Gamma(1-beta-z) Gamma(beta_hat+gamma_hat+z)/Gamma(beta_hat+z)",
            params: vec![
                req("beta", "beta <= 1"),
                req("gamma", "0 < gamma < 1"),
                req("beta_hat", "beta_hat >= 0"),
                req("gamma_hat", "0 < gamma_hat < 1"),
            ],
        },
        Entry {
            id: "hyper-exponential",
            formula: "Psi(z) = sigma2 z^2/2 + mu z - q + sum l z/(r - z) - sum l' z/(r' + z)",
            params: vec![
                opt("q", 0.0, "q >= 0"),
                opt("sigma2", 0.0, "sigma2 >= 0"),
                opt("mu", 0.0, "real"),
                ParamSpec { name: "pos", default: None, constraint: "list of [rate, exponential parameter]" },
                ParamSpec { name: "neg", default: None, constraint: "list of [rate, exponential parameter]" },
            ],
        },
        Entry {
            id: "two-sided-heavy",
            formula: "phi_+ = z^alpha_plus, phi_- = z^alpha_minus",
            params: vec![req("alpha_plus", "0 < alpha_plus < 1"), req("alpha_minus", "0 < alpha_minus < 1")],
        },
        Entry {
            id: "custom-pair",
            formula: "Psi(z) = -phi_+(-z) phi_-(z)",
            params: vec![
                ParamSpec { name: "plus", default: None, constraint: "{id, params}" },
                ParamSpec { name: "minus", default: None, constraint: "{id, params}" },
            ],
        },
    ]
}

/// Parameter accessor that rejects unknown keys and non-numeric values.
struct Params<'a> {
    id: &'a str,
    map: Map<String, Value>,
    schema: Vec<ParamSpec>,
}

impl<'a> Params<'a> {
    fn new(id: &'a str, params: &Value, entries: &[Entry]) -> Result<Self> {
        let entry = entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnsupportedFamily(format!("unknown id '{id}'")))?;
        let map = match params {
            Value::Null => Map::new(),
            Value::Object(m) => m.clone(),
            other => return Err(Error::Parse(format!("parameters of '{id}' must be an object, got {other}"))),
        };
        for k in map.keys() {
            if !entry.params.iter().any(|p| p.name == k) {
                return Err(Error::Param(format!("'{id}' has no parameter '{k}'")));
            }
        }
        Ok(Params { id, map, schema: entry.params.clone() })
    }

    fn num(&self, name: &str) -> Result<f64> {
        match self.map.get(name) {
            Some(v) => v.as_f64().ok_or_else(|| Error::Parse(format!("'{}.{name}' must be a number", self.id))),
            None => self
                .schema
                .iter()
                .find(|p| p.name == name)
                .and_then(|p| p.default)
                .ok_or_else(|| Error::Param(format!("'{}' needs parameter '{name}'", self.id))),
        }
    }

    fn raw(&self, name: &str) -> Option<&Value> {
        self.map.get(name)
    }

    fn pairs(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let Some(v) = self.raw(name) else { return Ok(vec![]) };
        let bad = || Error::Parse(format!("'{}.{name}' must be a list of [a, b] pairs", self.id));
        v.as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|p| match p.as_array().map(|a| a.as_slice()) {
                Some([a, b]) => Ok((a.as_f64().ok_or_else(bad)?, b.as_f64().ok_or_else(bad)?)),
                _ => Err(bad()),
            })
            .collect()
    }
}

/// Builds a Bernstein function from its id and JSON parameters.
pub fn bernstein_from_json(id: &str, params: &Value) -> Result<BernsteinFunction> {
    let p = Params::new(id, params, &bernstein_entries())?;
    let kind = match id {
        "constant" => PhiKind::Constant { c: p.num("c")? },
        "affine" => PhiKind::Affine { q: p.num("q")?, d: p.num("d")? },
        "power" => PhiKind::Power { q: p.num("q")?, alpha: p.num("alpha")?, c: p.num("c")? },
        "shifted-ratio" => PhiKind::ShiftedRatio { a: p.num("a")?, b: p.num("b")? },
        "gamma-linear" => PhiKind::GammaLinear { a: p.num("a")?, b: p.num("b")? },
        "gamma-scaled" => PhiKind::GammaScaled { a: p.num("a")? },
        "gamma-ratio" => PhiKind::GammaRatio { a: p.num("a")?, b: p.num("b")? },
        "geom" => PhiKind::Geom { q: p.num("q")?, b: p.num("b")? },
        "ratio" => PhiKind::Ratio { a: p.num("a")? },
        "ratio-power" => PhiKind::RatioPower { a: p.num("a")?, alpha: p.num("alpha")? },
        "stable" => PhiKind::StableRatio { alpha: p.num("alpha")? },
        "q-gamma" => PhiKind::QGamma { q: p.num("q")? },
        "log-gamma" => PhiKind::LogGamma { q: p.num("q")?, c: p.num("c")?, theta: p.num("theta")? },
        "inverse-gaussian" => PhiKind::InverseGaussian { q: p.num("q")?, s: p.num("s")?, b: p.num("b")? },
        "custom-tail" => {
            if let Some(e) = p.raw("expression") {
                let src = e.as_str().ok_or_else(|| Error::Parse("custom-tail.expression must be a string".into()))?;
                return BernsteinFunction::from_expr(src, p.num("a_phi")?);
            }
            let atoms = p.pairs("atoms")?;
            let measure = if atoms.is_empty() { LevyMeasureSpec::Zero } else { LevyMeasureSpec::Atoms(atoms) };
            return BernsteinFunction::from_measure(p.num("kill")?, p.num("drift")?, measure);
        }
        _ => unreachable!("schema lookup guarantees a known id"),
    };
    BernsteinFunction::new(kind)
}

/// Nested `{id, params}` object.
fn nested_phi(v: Option<&Value>, what: &str) -> Result<BernsteinFunction> {
    let v = v.ok_or_else(|| Error::Param(format!("'{what}' is required")))?;
    let id = v
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse(format!("'{what}' needs a string 'id'")))?;
    bernstein_from_json(id, v.get("params").unwrap_or(&Value::Null))
}

/// Builds a Lévy model from its id and JSON parameters.
pub fn levy_from_json(id: &str, params: &Value) -> Result<LevyExponent> {
    let p = Params::new(id, params, &levy_entries())?;
    match id {
        "brownian" => LevyExponent::brownian(p.num("q")?, p.num("sigma2")?, p.num("mu")?),
        "dufresne" => LevyExponent::dufresne(p.num("mu")?),
        "killed-drift" => LevyExponent::killed_drift(p.num("q")?, p.num("d")?),
        "gamma-subordinator" => LevyExponent::subordinator(BernsteinFunction::new(PhiKind::LogGamma {
            q: p.num("q")?,
            c: p.num("c")?,
            theta: p.num("theta")?,
        })?),
        "inverse-gaussian-subordinator" => LevyExponent::subordinator(BernsteinFunction::new(
            PhiKind::InverseGaussian { q: p.num("q")?, s: p.num("s")?, b: p.num("b")? },
        )?),
        "stable-subordinator" => {
            let k = p.num("k")?;
            let base = BernsteinFunction::new(PhiKind::Power { q: 0.0, alpha: p.num("alpha")?, c: p.num("q")? / k })?;
            LevyExponent::subordinator(if k == 1.0 { base } else { base.scaled(k)? })
        }
        "subordinator" => LevyExponent::subordinator(nested_phi(p.raw("phi"), "phi")?),
        "neg-subordinator" => LevyExponent::neg_subordinator(nested_phi(p.raw("phi"), "phi")?),
        "hypergeometric" => {
            LevyExponent::hypergeometric(p.num("beta")?, p.num("gamma")?, p.num("beta_hat")?, p.num("gamma_hat")?)
        }
        "hyper-exponential" => LevyExponent::hyper_exponential(
            p.num("q")?,
            p.num("sigma2")?,
            p.num("mu")?,
            p.pairs("pos")?,
            p.pairs("neg")?,
        ),
        "two-sided-heavy" => LevyExponent::two_sided_heavy(p.num("alpha_plus")?, p.num("alpha_minus")?),
        "custom-pair" => {
            LevyExponent::custom_pair(nested_phi(p.raw("plus"), "plus")?, nested_phi(p.raw("minus"), "minus")?)
        }
        _ => unreachable!("schema lookup guarantees a known id"),
    }
}

/// Three parameter settings per strip-table row, used to regenerate the
/// table of strip parameters.
pub fn strip_table_samples() -> Vec<(&'static str, &'static str, Vec<Value>)> {
    vec![
        (
            "-q + mu z + sigma2 z^2/2",
            "brownian",
            vec![
                json!({"q": 1.0, "sigma2": 2.0, "mu": 0.0}),
                json!({"q": 0.5, "sigma2": 1.0, "mu": -0.7}),
                json!({"q": 2.0, "sigma2": 0.5, "mu": 1.3}),
            ],
        ),
        (
            "-q - c log(1 - z/theta)",
            "gamma-subordinator",
            vec![
                json!({"q": 1.0, "c": 1.0, "theta": 1.0}),
                json!({"q": 0.3, "c": 2.0, "theta": 0.5}),
                json!({"q": 2.5, "c": 0.7, "theta": 3.0}),
            ],
        ),
        (
            "-q - s (sqrt(b^2 - 2z) - b), q <= s b",
            "inverse-gaussian-subordinator",
            vec![
                json!({"q": 0.5, "s": 1.0, "b": 1.0}),
                json!({"q": 1.0, "s": 2.0, "b": 0.8}),
                json!({"q": 0.1, "s": 0.5, "b": 2.0}),
            ],
        ),
        (
            "-q - s (sqrt(b^2 - 2z) - b), q > s b",
            "inverse-gaussian-subordinator",
            vec![
                json!({"q": 2.0, "s": 1.0, "b": 1.0}),
                json!({"q": 3.0, "s": 2.0, "b": 0.5}),
                json!({"q": 1.5, "s": 0.5, "b": 2.0}),
            ],
        ),
        (
            "two-sided heavy-tailed",
            "two-sided-heavy",
            vec![
                json!({"alpha_plus": 0.5, "alpha_minus": 0.5}),
                json!({"alpha_plus": 0.3, "alpha_minus": 0.8}),
                json!({"alpha_plus": 0.9, "alpha_minus": 0.2}),
            ],
        ),
        (
            "hypergeometric",
            "hypergeometric",
            vec![
                json!({"beta": 0.5, "gamma": 0.5, "beta_hat": 0.5, "gamma_hat": 0.5}),
                json!({"beta": -0.3, "gamma": 0.2, "beta_hat": 1.1, "gamma_hat": 0.7}),
                json!({"beta": 0.9, "gamma": 0.8, "beta_hat": 0.2, "gamma_hat": 0.3}),
            ],
        ),
        (
            "meromorphic (hyper-exponential)",
            "hyper-exponential",
            vec![
                json!({"q": 1.0, "sigma2": 1.0, "mu": 0.5, "pos": [[1.0, 3.0]], "neg": [[1.0, 2.0]]}),
                json!({"q": 0.5, "sigma2": 0.0, "mu": 1.0, "pos": [[2.0, 1.5], [1.0, 4.0]], "neg": [[0.5, 1.0]]}),
                json!({"q": 2.0, "sigma2": 2.0, "mu": -1.0, "pos": [[1.0, 2.0]], "neg": [[1.0, 0.5], [2.0, 3.0]]}),
            ],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_schema_entry_builds_with_sample_params() {
        let samples: Vec<(&str, Value)> = vec![
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
            ("custom-tail", json!({"expression": "z + 1", "a_phi": -1.0})),
        ];
        for (id, p) in &samples {
            bernstein_from_json(id, p).unwrap_or_else(|e| panic!("{id}: {e}"));
        }
        for e in bernstein_entries() {
            assert!(samples.iter().any(|(id, _)| *id == e.id), "{} lacks a sample", e.id);
        }
        for (_, id, ps) in strip_table_samples() {
            for p in ps {
                levy_from_json(id, &p).unwrap_or_else(|e| panic!("{id} {p}: {e}"));
            }
        }
    }

    #[test]
    fn rejects_unknown_and_missing() {
        assert!(matches!(bernstein_from_json("affine", &json!({"x": 1})), Err(Error::Param(_))));
        assert!(matches!(bernstein_from_json("ratio", &json!({})), Err(Error::Param(_))));
        assert!(matches!(bernstein_from_json("nope", &json!({})), Err(Error::UnsupportedFamily(_))));
        assert!(matches!(levy_from_json("brownian", &json!({"sigma2": "a"})), Err(Error::Parse(_))));
    }
}
