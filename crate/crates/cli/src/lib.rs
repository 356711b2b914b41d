//! Command-line adapters over `cid_core`.
//!
//! Each subcommand loads a model document, makes one library call and prints
//! the result as a JSON document with sorted keys. `--pretty` prints the same
//! content as an indented text summary instead.
//!
//! Exit codes: 0 success, 1 usage error, 2 model failed to load or validate,
//! 3 query error, 4 resource cap exceeded.

use std::path::{Path, PathBuf};

use cid_core::instances::instance_states;
use cid_core::{
    certify_causal_network, check_marginal_reproduction, counterfactual, d_separated, ensure_canonical,
    graphical_causes, graphical_fixed_set, optimal_policy_with_caps, oracle_causes, oracle_is_d_map, parse_hcf,
    parse_model, posterior, posterior_by_enumeration, removable_arcs, serialize_hcf, to_hcf, validate_diagram,
    value_of_information, Assignment, Caps, CauseReport, CounterfactualQuery, Diagram, Error, Factor, HcfDiagram,
    HcfOptions, VoiOptions,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_QUERY: i32 = 3;
pub const EXIT_CAP: i32 = 4;

/// Environment variable overriding the world-pair enumeration cap.
pub const CAP_WORLDS_VAR: &str = "CID_CAP_WORLDS";

/// Significant digits of every printed probability or utility.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Parser)]
#[command(
    name = "cid",
    version,
    about = "Decision-based causal queries over influence diagrams"
)]
struct Cli {
    /// Print an indented text summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    /// Minimal blocking sets on the graph.
    Graphical,
    /// Functional-world enumeration over the canonical form.
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Engine {
    /// Variable elimination with a min-fill order.
    Ve,
    /// Sum over the full joint.
    Enumeration,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model against every structural and numerical invariant.
    Validate {
        /// Model file.
        model: PathBuf,
    },
    /// Nodes the decisions cannot change once the given nodes are known.
    FixedSet {
        /// Model file.
        model: PathBuf,
        /// Comma-separated nodes held known.
        #[arg(long, default_value = "")]
        given: String,
    },
    /// Minimal cause sets of a node.
    Causes {
        /// Model file.
        model: PathBuf,
        /// Target node.
        #[arg(long)]
        of: String,
        #[arg(long, value_enum, default_value = "graphical")]
        method: Method,
        /// Assert that the diagram has passed `is-d-map`.
        #[arg(long)]
        d_map_verified: bool,
    },
    /// d-separation on the relevance arcs.
    DSep {
        /// Model file.
        model: PathBuf,
        /// Comma-separated first node set.
        #[arg(long)]
        x: String,
        /// Comma-separated second node set.
        #[arg(long)]
        y: String,
        /// Comma-separated conditioning set.
        #[arg(long, default_value = "")]
        z: String,
    },
    /// Relevance arcs that could be removed without changing any table.
    Minimal {
        /// Model file.
        model: PathBuf,
    },
    /// Rewrite into canonical form by extracting mechanisms.
    ToHcf {
        /// Model file.
        model: PathBuf,
        /// Proceed even if the model is not annotated causal.
        #[arg(long)]
        assume_causal: bool,
        /// Write the document here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Audit a canonical form against the model it came from.
    CheckHcf {
        /// Model file the canonical form was built from.
        original: PathBuf,
        /// Canonical-form document.
        hcf: PathBuf,
    },
    /// Posterior distribution of query variables.
    Infer {
        /// Model file.
        model: PathBuf,
        /// Decision settings as `name=state,...`.
        #[arg(long, default_value = "")]
        decisions: String,
        /// Observations as `name=state,...`.
        #[arg(long, default_value = "")]
        evidence: String,
        /// Comma-separated query variables.
        #[arg(long)]
        query: String,
        #[arg(long, value_enum, default_value = "ve")]
        engine: Engine,
    },
    /// Counterfactual query through the twin network.
    Counterfactual {
        /// Model file.
        model: PathBuf,
        /// Decisions actually taken, as `name=state,...`.
        #[arg(long, default_value = "")]
        factual_decisions: String,
        /// Factual observations as `name=state,...`.
        #[arg(long, default_value = "")]
        evidence: String,
        /// Hypothetical decisions as `name=state,...`.
        #[arg(long, default_value = "")]
        counterfactual_decisions: String,
        /// Comma-separated query variables, read in the hypothetical world.
        #[arg(long)]
        query: String,
    },
    /// Optimal policy and its expected utility.
    Evaluate {
        /// Model file.
        model: PathBuf,
    },
    /// Value of observing a node before a decision.
    Voi {
        /// Model file.
        model: PathBuf,
        /// Node to observe.
        #[arg(long)]
        node: String,
        /// Decision that gains the observation.
        #[arg(long)]
        decision: String,
        /// Let every later decision observe the node too.
        #[arg(long)]
        no_forgetting: bool,
    },
    /// Certify a causal network from its set decisions.
    CertifyCausal {
        /// Model file.
        model: PathBuf,
    },
    /// Check that every numerical independence is shown by the graph.
    IsDMap {
        /// Model file.
        model: PathBuf,
        /// Largest conditioning set tried.
        #[arg(long, default_value_t = 2)]
        max_cond: usize,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn invalid(path: &Path, e: Error) -> Self {
        Failure {
            code: if e.is_resource_cap() { EXIT_CAP } else { EXIT_INVALID },
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_resource_cap() { EXIT_CAP } else { EXIT_QUERY },
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(Value, Vec<String>, i32), Failure>;

/// Caps with [`CAP_WORLDS_VAR`] applied when it is set.
pub fn caps_from_env() -> std::result::Result<Caps, String> {
    let mut caps = Caps::default();
    if let Ok(v) = std::env::var(CAP_WORLDS_VAR) {
        caps.world_pairs = v
            .trim()
            .parse()
            .map_err(|_| format!("{CAP_WORLDS_VAR} must be a non-negative integer, got `{v}`"))?;
    }
    Ok(caps)
}

/// Runs one command line (including the program name) with the given caps.
pub fn run_with_caps<I, T>(argv: I, caps: &Caps) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Output {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Output {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match dispatch(&cli.command, caps) {
        Ok((value, warnings, code)) => Output {
            code,
            stdout: if cli.pretty {
                human(&value)
            } else {
                format!("{value}\n")
            },
            stderr: warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
        },
        Err(f) => Output {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}

/// [`run_with_caps`] with caps from the environment.
pub fn run_command<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match caps_from_env() {
        Ok(caps) => run_with_caps(argv, &caps),
        Err(message) => Output {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        },
    }
}

enum Loaded {
    Model(Diagram),
    Canonical(HcfDiagram),
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// Parses a model, or a canonical-form document when it lists mechanisms.
fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read(path)?;
    let has_mechanisms = serde_json::from_str::<Value>(&text)
        .ok()
        .is_some_and(|v| v.get("mechanisms").is_some());
    if has_mechanisms {
        parse_hcf(&text)
            .map(Loaded::Canonical)
            .map_err(|e| Failure::invalid(path, e))
    } else {
        parse_model(&text)
            .map(Loaded::Model)
            .map_err(|e| Failure::invalid(path, e))
    }
}

fn load_diagram(path: &Path) -> Result<Diagram, Failure> {
    Ok(match load(path)? {
        Loaded::Model(d) => d,
        Loaded::Canonical(h) => h.diagram,
    })
}

/// The diagram itself when already canonical, otherwise its canonical form.
fn canonical(loaded: Loaded, caps: &Caps, warnings: &mut Vec<String>) -> Result<Diagram, Failure> {
    match loaded {
        Loaded::Canonical(h) => Ok(h.diagram),
        Loaded::Model(d) if ensure_canonical(&d).is_ok() => Ok(d),
        Loaded::Model(d) => {
            let h = to_hcf(
                &d,
                &HcfOptions {
                    caps: caps.clone(),
                    ..HcfOptions::default()
                },
            )?;
            warnings.push("model is not in canonical form; answered on its canonical form with product priors".into());
            warnings.extend(h.warnings);
            Ok(h.diagram)
        }
    }
}

fn list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn assignment(text: &str) -> Result<Assignment, Failure> {
    Assignment::parse(text).map_err(|e| Failure::usage(e.to_string()))
}

/// `v` rounded to [`SIGNIFICANT_DIGITS`].
pub fn round(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

fn num(v: f64) -> Value {
    let r = round(v);
    // integral values print without a fractional part
    if r.fract() == 0.0 && r.abs() < 1e15 {
        json!(r as i64)
    } else {
        json!(r)
    }
}

fn cause_json(r: &CauseReport) -> Value {
    json!({
        "target": r.target,
        "method": r.method.to_string(),
        "cause_sets": r.cause_sets,
        "reason": r.reason,
    })
}

fn distribution_json(f: &Factor) -> Value {
    let cards = f.cards();
    let rows: Vec<Value> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let states = instance_states(&cards, i);
            let mut m = Map::new();
            for (v, s) in f.vars().iter().zip(states) {
                m.insert(v.name.clone(), json!(v.states[s]));
            }
            json!({"states": m, "probability": num(p)})
        })
        .collect();
    json!({"variables": f.scope(), "distribution": rows})
}

fn dispatch(cmd: &Command, caps: &Caps) -> Outcome {
    let mut warnings = Vec::new();
    let value = match cmd {
        Command::Validate { model } => {
            let text = read(model)?;
            return match parse_model(&text) {
                Ok(d) => {
                    let report = validate_diagram(&d);
                    Ok((
                        json!({"valid": true, "violations": report.violations}),
                        warnings,
                        EXIT_OK,
                    ))
                }
                Err(Error::InvalidDiagram(report)) => Ok((
                    json!({"valid": false, "violations": report.violations}),
                    warnings,
                    EXIT_INVALID,
                )),
                Err(e) => Err(Failure::invalid(model, e)),
            };
        }
        Command::FixedSet { model, given } => {
            let d = load_diagram(model)?;
            let r = graphical_fixed_set(&d, &list(given))?;
            if r.claim_only {
                warnings.push("diagram is not annotated causal; membership is only claimed".into());
            }
            json!({"given": r.given, "members": r.members, "claim_only": r.claim_only})
        }
        Command::Causes {
            model,
            of,
            method,
            d_map_verified,
        } => {
            let report = match method {
                Method::Graphical => graphical_causes(&load_diagram(model)?, of, *d_map_verified, caps)?,
                Method::Oracle => {
                    let d = canonical(load(model)?, caps, &mut warnings)?;
                    oracle_causes(&d, of, caps)?
                }
            };
            warnings.extend(report.warnings.iter().cloned());
            cause_json(&report)
        }
        Command::DSep { model, x, y, z } => {
            let d = load_diagram(model)?;
            let (x, y, z) = (list(x), list(y), list(z));
            json!({"x": x, "y": y, "z": z, "separated": d_separated(&d, &x, &y, &z)?})
        }
        Command::Minimal { model } => {
            let d = load_diagram(model)?;
            let arcs: Vec<Value> = removable_arcs(&d)
                .iter()
                .map(|e| json!({"from": e.from, "to": e.to}))
                .collect();
            json!({"minimal": arcs.is_empty(), "removable_arcs": arcs})
        }
        Command::ToHcf {
            model,
            assume_causal,
            output,
        } => {
            let d = load_diagram(model)?;
            let opts = HcfOptions {
                assume_causal: *assume_causal,
                caps: caps.clone(),
                ..HcfOptions::default()
            };
            let h = to_hcf(&d, &opts)?;
            warnings.extend(h.warnings.iter().cloned());
            let doc: Value = serde_json::from_str(&serialize_hcf(&h)).expect("serializer emits JSON");
            if let Some(path) = output {
                std::fs::write(path, serialize_hcf(&h) + "\n")
                    .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
                json!({"written": path.display().to_string(), "mechanisms": h.mechanisms.len()})
            } else {
                doc
            }
        }
        Command::CheckHcf { original, hcf } => {
            let orig = load_diagram(original)?;
            let h = match load(hcf)? {
                Loaded::Canonical(h) => h,
                Loaded::Model(_) => {
                    return Err(Failure {
                        code: EXIT_INVALID,
                        message: format!("{}: no mechanisms section", hcf.display()),
                    })
                }
            };
            let report = check_marginal_reproduction(&orig, &h);
            let mechanisms: Vec<Value> = h
                .mechanisms
                .iter()
                .map(|m| {
                    let labels = m.labels();
                    let parent_vars: Vec<_> = m
                        .prior
                        .parent_order
                        .iter()
                        .map(|p| h.diagram.variable(p).cloned())
                        .collect::<cid_core::Result<_>>()?;
                    let cards: Vec<usize> = parent_vars.iter().map(|v: &cid_core::Variable| v.card()).collect();
                    let rows: Vec<Value> = m
                        .prior
                        .rows
                        .iter()
                        .enumerate()
                        .map(|(i, row)| {
                            let given: Map<String, Value> = parent_vars
                                .iter()
                                .zip(instance_states(&cards, i))
                                .map(|(v, s)| (v.name.clone(), json!(v.states[s])))
                                .collect();
                            let probs: Map<String, Value> =
                                labels.iter().zip(row).map(|(l, &p)| (l.clone(), num(p))).collect();
                            json!({"given": given, "prior": probs})
                        })
                        .collect();
                    Ok(json!({"node": m.node, "target": m.target.name, "rows": rows}))
                })
                .collect::<cid_core::Result<_>>()?;
            let code = if report.passes() { EXIT_OK } else { EXIT_INVALID };
            return Ok((
                json!({
                    "passes": report.passes(),
                    "checked": report.checked,
                    "max_error": num(report.max_error),
                    "violations": report.violations,
                    "mechanisms": mechanisms,
                }),
                warnings,
                code,
            ));
        }
        Command::Infer {
            model,
            decisions,
            evidence,
            query,
            engine,
        } => {
            let d = load_diagram(model)?;
            let (dec, ev, q) = (assignment(decisions)?, assignment(evidence)?, list(query));
            let f = match engine {
                Engine::Ve => posterior(&d, &dec, &ev, &q)?,
                Engine::Enumeration => posterior_by_enumeration(&d, &dec, &ev, &q)?,
            };
            distribution_json(&f)
        }
        Command::Counterfactual {
            model,
            factual_decisions,
            evidence,
            counterfactual_decisions,
            query,
        } => {
            let q = CounterfactualQuery {
                factual_decisions: assignment(factual_decisions)?,
                factual_evidence: assignment(evidence)?,
                counterfactual_decisions: assignment(counterfactual_decisions)?,
                query: list(query),
            };
            let d = canonical(load(model)?, caps, &mut warnings)?;
            distribution_json(&counterfactual(&d, &q)?)
        }
        Command::Evaluate { model } => {
            let d = load_diagram(model)?;
            let (policy, eu) = optimal_policy_with_caps(&d, caps)?;
            let rules: Vec<Value> = policy
                .rules
                .iter()
                .map(|r| {
                    let choices: Vec<Value> = r
                        .entries()
                        .into_iter()
                        .map(|(when, choose)| {
                            let when: Map<String, Value> =
                                when.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                            json!({"when": when, "choose": choose})
                        })
                        .collect();
                    let observed: Vec<&str> = r.observed.iter().map(|v| v.name.as_str()).collect();
                    json!({"decision": r.decision.name, "observed": observed, "choices": choices})
                })
                .collect();
            json!({"expected_utility": num(eu), "policy": rules})
        }
        Command::Voi {
            model,
            node,
            decision,
            no_forgetting,
        } => {
            let d = load_diagram(model)?;
            let opts = VoiOptions {
                no_forgetting: *no_forgetting,
                caps: caps.clone(),
            };
            let v = value_of_information(&d, node, decision, &opts)?;
            json!({"node": node, "decision": decision, "value": num(v)})
        }
        Command::CertifyCausal { model } => {
            let c = certify_causal_network(&load_diagram(model)?);
            json!({"certified": c.certified, "reasons": c.reasons})
        }
        Command::IsDMap { model, max_cond } => {
            let v = oracle_is_d_map(&load_diagram(model)?, *max_cond, caps)?;
            json!({"is_d_map": v.is_d_map, "counterexample": v.counterexample, "checked": v.checked})
        }
    };
    Ok((value, warnings, EXIT_OK))
}

/// Indented `key: value` rendering of a JSON document.
pub fn human(v: &Value) -> String {
    let mut out = String::new();
    render(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("none".into()),
        Value::Object(m) if m.is_empty() => Some("none".into()),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::String(_))) => {
            let items: Vec<&str> = a.iter().filter_map(Value::as_str).collect();
            Some(format!("{{{}}}", items.join(", ")))
        }
        Value::Object(m) if m.values().all(|x| matches!(x, Value::String(_))) => {
            let items: Vec<String> = m
                .iter()
                .map(|(k, x)| format!("{k}={}", x.as_str().unwrap_or("")))
                .collect();
            Some(items.join(", "))
        }
        _ => None,
    }
}

fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_skip_blanks() {
        assert_eq!(list(" a, ,b "), vec!["a", "b"]);
        assert!(list("").is_empty());
    }

    #[test]
    fn integral_numbers_print_without_fraction() {
        assert_eq!(num(1.0).to_string(), "1");
        assert_eq!(num(0.5).to_string(), "0.5");
        assert_eq!(num(0.1 + 0.2).to_string(), "0.3");
    }

    #[test]
    fn human_rendering_nests() {
        let v = json!({"a": {"b": [1, 2]}, "c": [], "d": ["x", "y"], "e": {"k": "v"}});
        assert_eq!(human(&v), "a:\n  b:\n    - 1\n    - 2\nc: none\nd: {x, y}\ne: k=v\n");
    }
}
