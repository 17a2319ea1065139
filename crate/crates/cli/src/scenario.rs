//! `key = value` scenario files.
//!
//! ```text
//! # reference run
//! graph = reference.graph
//! x0 = 9, -2, 0.5, 8.5, 4
//! sigma = 0.5
//! t_end = 6
//! algorithm = self_triggered
//! ```
//!
//! Relative paths resolve against the scenario file's directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use surfacing_core::{Graph, PromiseFn, StateVector, TriggerConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: `{key}` {msg}")]
    Field {
        line: usize,
        key: &'static str,
        msg: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmSpec {
    SelfTriggered,
    Periodic(f64),
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::SelfTriggered => f.write_str("self_triggered"),
            AlgorithmSpec::Periodic(t) => write!(f, "periodic({t})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    /// File stem of the scenario, used to label comparison rows.
    pub name: String,
    pub graph_path: PathBuf,
    pub graph: Graph,
    pub x0: StateVector,
    pub algorithm: AlgorithmSpec,
    pub config: TriggerConfig,
    pub schedule: Vec<f64>,
    pub t_end: f64,
    pub output: PathBuf,
    /// Carried through for randomized suites; a single run is deterministic.
    pub seed: Option<u64>,
}

const KEYS: [&str; 11] = [
    "graph",
    "x0",
    "sigma",
    "promise_scale",
    "dwell",
    "t_max",
    "schedule",
    "t_end",
    "algorithm",
    "output",
    "seed",
];

struct Entry {
    line: usize,
    value: String,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let name = path
            .file_stem()
            .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
        Scenario::parse(&text, base, &name)
    }

    /// Parses scenario text. `base` anchors relative paths.
    pub fn parse(text: &str, base: &Path, name: &str) -> Result<Self, ScenarioError> {
        let entries = collect(text)?;
        let get = |key: &'static str| entries.get(key);

        let graph_entry = get("graph").ok_or(ScenarioError::Missing("graph"))?;
        let graph_path = base.join(&graph_entry.value);
        let graph = load_graph(&graph_path, graph_entry.line)?;
        let n = graph.n();

        let x0_entry = get("x0").ok_or(ScenarioError::Missing("x0"))?;
        let x0 = floats(x0_entry, "x0")?;
        if x0.len() != n {
            return Err(field(
                x0_entry,
                "x0",
                format!("has {} entries but the graph has {n} agents", x0.len()),
            ));
        }
        let x0 = StateVector::new(x0).map_err(|e| field(x0_entry, "x0", e.to_string()))?;

        let defaults = TriggerConfig::default();
        let sigma = optional(get("sigma"), "sigma", defaults.sigma)?;
        if let Some(e) = get("sigma") {
            if !(0.0..=1.0).contains(&sigma) {
                return Err(field(e, "sigma", format!("must be in [0, 1], got {sigma}")));
            }
        }
        let c = optional(get("promise_scale"), "promise_scale", 1.0)?;
        if let Some(e) = get("promise_scale") {
            if !(c > 0.0 && c.is_finite()) {
                return Err(field(
                    e,
                    "promise_scale",
                    format!("must be positive, got {c}"),
                ));
            }
        }
        let dwell = optional(get("dwell"), "dwell", defaults.dwell)?;
        if let Some(e) = get("dwell") {
            if !(dwell > 0.0 && dwell.is_finite()) {
                return Err(field(e, "dwell", format!("must be positive, got {dwell}")));
            }
        }
        let t_max = optional(get("t_max"), "t_max", defaults.t_max)?;
        if !(t_max >= dwell && t_max.is_finite()) {
            let msg = format!("must be finite and at least dwell ({dwell}), got {t_max}");
            return Err(match get("t_max") {
                Some(e) => field(e, "t_max", msg),
                None => field(
                    get("dwell").expect("default t_max only fails for large dwell"),
                    "dwell",
                    msg,
                ),
            });
        }

        let t_end_entry = get("t_end").ok_or(ScenarioError::Missing("t_end"))?;
        let t_end = float(t_end_entry, "t_end")?;
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(field(
                t_end_entry,
                "t_end",
                format!("must be positive, got {t_end}"),
            ));
        }

        let schedule = match get("schedule") {
            Some(e) => {
                let s = floats(e, "schedule")?;
                if s.len() != n {
                    return Err(field(
                        e,
                        "schedule",
                        format!("has {} entries but the graph has {n} agents", s.len()),
                    ));
                }
                if let Some(bad) = s.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                    return Err(field(
                        e,
                        "schedule",
                        format!("entries must be positive, got {bad}"),
                    ));
                }
                s
            }
            None => (1..=n).map(|i| 0.1 * i as f64).collect(),
        };

        let algorithm = match get("algorithm") {
            Some(e) => parse_algorithm(e)?,
            None => AlgorithmSpec::SelfTriggered,
        };

        let output = match get("output") {
            Some(e) => base.join(&e.value),
            None => base.join(format!("{name}-out")),
        };

        let seed = match get("seed") {
            Some(e) => Some(e.value.parse().map_err(|_| {
                field(
                    e,
                    "seed",
                    format!("expected an unsigned integer, got {:?}", e.value),
                )
            })?),
            None => None,
        };

        let config = TriggerConfig {
            sigma,
            dwell,
            t_max,
            promise: PromiseFn::Linear(c),
            ..defaults
        };
        config.validate().map_err(|e| ScenarioError::Syntax {
            line: t_end_entry.line,
            msg: e.to_string(),
        })?;

        Ok(Scenario {
            name: name.to_string(),
            graph_path,
            graph,
            x0,
            algorithm,
            config,
            schedule,
            t_end,
            output,
            seed,
        })
    }
}

fn collect(text: &str) -> Result<BTreeMap<&'static str, Entry>, ScenarioError> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line,
            msg: format!("expected `key = value`, got {body:?}"),
        })?;
        let key = key.trim();
        let key = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ScenarioError::Syntax {
                line,
                msg: format!("unknown key `{key}`"),
            })?;
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(ScenarioError::Field {
                line,
                key,
                msg: "has no value".into(),
            });
        }
        if let Some(prev) = entries.insert(key, Entry { line, value }) {
            return Err(ScenarioError::Field {
                line,
                key,
                msg: format!("already set on line {}", prev.line),
            });
        }
    }
    Ok(entries)
}

fn field(e: &Entry, key: &'static str, msg: String) -> ScenarioError {
    ScenarioError::Field {
        line: e.line,
        key,
        msg,
    }
}

fn float(e: &Entry, key: &'static str) -> Result<f64, ScenarioError> {
    parse_f64(&e.value)
        .ok_or_else(|| field(e, key, format!("expected a number, got {:?}", e.value)))
}

fn floats(e: &Entry, key: &'static str) -> Result<Vec<f64>, ScenarioError> {
    e.value
        .split(',')
        .map(|s| {
            let s = s.trim();
            parse_f64(s).ok_or_else(|| field(e, key, format!("expected a number, got {s:?}")))
        })
        .collect()
}

fn optional(e: Option<&Entry>, key: &'static str, default: f64) -> Result<f64, ScenarioError> {
    e.map_or(Ok(default), |e| float(e, key))
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_algorithm(e: &Entry) -> Result<AlgorithmSpec, ScenarioError> {
    let v = e.value.as_str();
    if v == "self_triggered" {
        return Ok(AlgorithmSpec::SelfTriggered);
    }
    let period = v
        .strip_prefix("periodic")
        .map(str::trim)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| {
            field(
                e,
                "algorithm",
                format!("expected `self_triggered` or `periodic(T)`, got {v:?}"),
            )
        })?;
    match parse_f64(period.trim()) {
        Some(t) if t > 0.0 => Ok(AlgorithmSpec::Periodic(t)),
        _ => Err(field(
            e,
            "algorithm",
            format!("period must be a positive number, got {period:?}"),
        )),
    }
}

fn load_graph(path: &Path, line: usize) -> Result<Graph, ScenarioError> {
    match Graph::load(path) {
        Ok(Ok(g)) => Ok(g),
        Ok(Err(err)) => Err(ScenarioError::Field {
            line,
            key: "graph",
            msg: format!("{}: {err}", path.display()),
        }),
        Err(err) => Err(ScenarioError::Field {
            line,
            key: "graph",
            msg: format!("cannot read {}: {err}", path.display()),
        }),
    }
}
