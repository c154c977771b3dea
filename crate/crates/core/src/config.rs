//! Versioned JSON problem configuration (`"schema": 1`).
//!
//! ```json
//! {
//!   "schema": 1,
//!   "kernel": { "name": "log" },
//!   "field": { "name": "gaussian", "params": { "scale": 1 } },
//!   "multiplicities": [1, 1],
//!   "domain": { "kind": "axis" },
//!   "solver": { "spread_tol": 1e-10 }
//! }
//! ```
//!
//! Errors carry the JSON pointer of the offending value.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bojanov::Weight;
use crate::error::{Error, Result};
use crate::model::{Field, Kernel, Multiplicities, Problem, ProblemDomain, Sample};
use crate::oracle::GridSpec;
use crate::serde_ext::parse_ext;
use crate::solver::SolveOptions;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSpec {
    Table {
        table: Vec<Sample>,
        value_at_zero: f64,
    },
    Named {
        name: String,
        #[serde(default)]
        params: Map<String, Value>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Table {
        table: Vec<Sample>,
    },
    Named {
        name: String,
        #[serde(default)]
        params: Map<String, Value>,
    },
}

/// Nodes and `t` range for a CSV dump of `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub nodes: Vec<f64>,
    pub t_range: (f64, f64),
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub kernel: KernelSpec,
    /// Exactly one of `field` and `weight` is set; a weight `w` means `J = log w`.
    pub field: Option<FieldSpec>,
    pub weight: Option<Weight>,
    pub multiplicities: Multiplicities,
    pub domain: ProblemDomain,
    pub solver: SolveOptions,
    pub grid: GridSpec,
    pub verify_trials: usize,
    pub output: Option<String>,
    pub sample: Option<SampleSpec>,
}

fn child(ptr: &str, key: &str) -> String {
    format!("{ptr}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn as_object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::config(ptr, "expected an object"))
}

fn required<'a>(map: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| Error::config(child(ptr, key), "missing required field"))
}

fn number(v: &Value, ptr: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::config(ptr, "not a finite number")),
        Value::String(s) => parse_ext(s).ok_or_else(|| Error::config(ptr, format!("not a number: {s:?}"))),
        Value::Null => Ok(f64::NEG_INFINITY),
        _ => Err(Error::config(ptr, "expected a number")),
    }
}

fn param(params: &Map<String, Value>, key: &str, default: f64, ptr: &str) -> Result<f64> {
    match params.get(key) {
        Some(v) => number(v, &child(ptr, key)),
        None => Ok(default),
    }
}

fn samples(v: &Value, ptr: &str) -> Result<Vec<Sample>> {
    let arr = v.as_array().ok_or_else(|| Error::config(ptr, "expected an array of samples"))?;
    arr.iter()
        .enumerate()
        .map(|(i, s)| {
            let p = format!("{ptr}/{i}");
            match s {
                Value::Array(pair) if pair.len() == 2 => Ok(Sample {
                    t: number(&pair[0], &format!("{p}/0"))?,
                    value: number(&pair[1], &format!("{p}/1"))?,
                }),
                Value::Object(m) => Ok(Sample {
                    t: number(required(m, "t", &p)?, &child(&p, "t"))?,
                    value: number(required(m, "value", &p)?, &child(&p, "value"))?,
                }),
                _ => Err(Error::config(p, "expected {\"t\", \"value\"} or [t, value]")),
            }
        })
        .collect()
}

fn params_of(map: &Map<String, Value>, ptr: &str) -> Result<Map<String, Value>> {
    match map.get("params") {
        None => Ok(Map::new()),
        Some(v) => as_object(v, &child(ptr, "params")).cloned(),
    }
}

fn name_of(map: &Map<String, Value>, ptr: &str) -> Result<String> {
    required(map, "name", ptr)?
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::config(child(ptr, "name"), "expected a string"))
}

fn parse_kernel(v: &Value) -> Result<KernelSpec> {
    let ptr = "/kernel";
    let map = as_object(v, ptr)?;
    if let Some(t) = map.get("table") {
        let table = samples(t, &child(ptr, "table"))?;
        let value_at_zero = number(required(map, "value_at_zero", ptr)?, &child(ptr, "value_at_zero"))?;
        return Ok(KernelSpec::Table { table, value_at_zero });
    }
    let spec = KernelSpec::Named {
        name: name_of(map, ptr)?,
        params: params_of(map, ptr)?,
    };
    build_kernel(&spec)?;
    Ok(spec)
}

fn parse_field(v: &Value) -> Result<FieldSpec> {
    let ptr = "/field";
    let map = as_object(v, ptr)?;
    if let Some(t) = map.get("table") {
        return Ok(FieldSpec::Table {
            table: samples(t, &child(ptr, "table"))?,
        });
    }
    let spec = FieldSpec::Named {
        name: name_of(map, ptr)?,
        params: params_of(map, ptr)?,
    };
    build_field(&spec)?;
    Ok(spec)
}

fn parse_weight(v: &Value) -> Result<Weight> {
    let ptr = "/weight";
    let map = as_object(v, ptr)?;
    if let Some(t) = map.get("table") {
        return Ok(Weight::Table {
            samples: samples(t, &child(ptr, "table"))?,
        });
    }
    let name = name_of(map, ptr)?;
    let params = params_of(map, ptr)?;
    let pp = child(ptr, "params");
    match name.as_str() {
        "hermite" => Ok(Weight::Hermite),
        "freud" => Ok(Weight::Freud {
            exponent: param(&params, "exponent", 2.0, &pp)?,
        }),
        "constant" => Ok(Weight::Constant {
            value: param(&params, "value", 1.0, &pp)?,
        }),
        other => Err(Error::config(
            child(ptr, "name"),
            format!("unknown weight {other:?}; expected hermite, freud, constant or a table"),
        )),
    }
}

pub fn build_kernel(spec: &KernelSpec) -> Result<Kernel> {
    let ptr = "/kernel";
    match spec {
        KernelSpec::Table { table, value_at_zero } => {
            Kernel::table(table, *value_at_zero).map_err(|e| Error::config(child(ptr, "table"), e.to_string()))
        }
        KernelSpec::Named { name, params } => {
            let pp = child(ptr, "params");
            match name.as_str() {
                "log" => Ok(Kernel::log()),
                "inverse_power" => Kernel::inverse_power(param(params, "s", 1.0, &pp)?)
                    .map_err(|e| Error::config(child(&pp, "s"), e.to_string())),
                other => Err(Error::config(
                    child(ptr, "name"),
                    format!("unknown kernel {other:?}; expected log, inverse_power or a table"),
                )),
            }
        }
    }
}

pub fn build_field(spec: &FieldSpec) -> Result<Field> {
    let ptr = "/field";
    let wrap = |e: Error| Error::config(child(ptr, "params"), e.to_string());
    match spec {
        FieldSpec::Table { table } => Field::table(table).map_err(|e| Error::config(child(ptr, "table"), e.to_string())),
        FieldSpec::Named { name, params } => {
            let pp = child(ptr, "params");
            match name.as_str() {
                "gaussian" => Field::gaussian(param(params, "scale", 1.0, &pp)?).map_err(wrap),
                "freud" => Field::freud(
                    param(params, "scale", 1.0, &pp)?,
                    param(params, "exponent", 2.0, &pp)?,
                )
                .map_err(wrap),
                "linear" | "linear_decay" => Field::linear_decay(param(params, "slope", 1.0, &pp)?).map_err(wrap),
                "constant" => Field::constant(param(params, "value", 0.0, &pp)?).map_err(wrap),
                other => Err(Error::config(
                    child(ptr, "name"),
                    format!("unknown field {other:?}; expected gaussian, freud, linear, constant or a table"),
                )),
            }
        }
    }
}

fn from_section<T: serde::de::DeserializeOwned>(v: &Value, ptr: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::config(ptr, e.to_string()))
}

impl ProblemConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::config("", format!("invalid JSON: {e}")))?;
        Self::from_value(&root)
    }

    pub fn from_value(root: &Value) -> Result<Self> {
        let map = as_object(root, "")?;
        if let Some(v) = map.get("schema") {
            if v.as_u64() != Some(SCHEMA_VERSION) {
                return Err(Error::config("/schema", format!("unsupported schema {v}, expected {SCHEMA_VERSION}")));
            }
        }
        let kernel = parse_kernel(required(map, "kernel", "")?)?;
        let field = map.get("field").map(parse_field).transpose()?;
        let weight = map.get("weight").map(parse_weight).transpose()?;
        match (&field, &weight) {
            (Some(_), Some(_)) => return Err(Error::config("/weight", "give either a field or a weight, not both")),
            (None, None) => return Err(Error::config("/field", "missing required field (or /weight)")),
            _ => {}
        }
        let r_value = required(map, "multiplicities", "")?;
        let r_list = r_value
            .as_array()
            .ok_or_else(|| Error::config("/multiplicities", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, v)| number(v, &format!("/multiplicities/{i}")))
            .collect::<Result<Vec<f64>>>()?;
        let multiplicities =
            Multiplicities::new(r_list).map_err(|e| Error::config("/multiplicities", e.to_string()))?;
        let domain: ProblemDomain = match map.get("domain") {
            Some(v) => from_section(v, "/domain")?,
            None => ProblemDomain::Axis,
        };
        if let ProblemDomain::Segment { a, b } = domain {
            ProblemDomain::segment(a, b).map_err(|e| Error::config("/domain", e.to_string()))?;
        }
        let mut solver: SolveOptions = match map.get("solver") {
            Some(v) => from_section(v, "/solver")?,
            None => SolveOptions::default(),
        };
        if let Some(v) = map.get("assume_admissible") {
            solver.assume_admissible = v
                .as_bool()
                .ok_or_else(|| Error::config("/assume_admissible", "expected a boolean"))?;
        }
        solver.validate().map_err(|e| Error::config("/solver", e.to_string()))?;
        let grid: GridSpec = match map.get("grid") {
            Some(v) => from_section(v, "/grid")?,
            None => GridSpec::default(),
        };
        let verify_trials = match map.get("verify_trials") {
            Some(v) => v
                .as_u64()
                .ok_or_else(|| Error::config("/verify_trials", "expected a nonnegative integer"))? as usize,
            None => 200,
        };
        let output = match map.get("output") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Object(o)) => o.get("path").and_then(Value::as_str).map(str::to_owned),
            Some(_) => return Err(Error::config("/output", "expected a path string")),
        };
        let sample = map.get("sample").map(|v| from_section(v, "/sample")).transpose()?;
        Ok(Self {
            kernel,
            field,
            weight,
            multiplicities,
            domain,
            solver,
            grid,
            verify_trials,
            output,
            sample,
        })
    }

    pub fn kernel(&self) -> Result<Kernel> {
        build_kernel(&self.kernel)
    }

    pub fn field(&self) -> Result<Field> {
        match (&self.field, &self.weight) {
            (Some(f), _) => build_field(f),
            (None, Some(w)) => w.field().map_err(|e| Error::config("/weight", e.to_string())),
            (None, None) => Err(Error::config("/field", "missing required field (or /weight)")),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.kernel()?, self.field()?, self.multiplicities.clone(), self.domain)
    }
}
