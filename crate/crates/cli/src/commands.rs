use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bisimso_core::bisim::{bisimilar, quotient, BisimWitness};
use bisimso_core::checks;
use bisimso_core::format::{self, encoded_to_json, parse_encoded, system_to_json, system_to_value};
use bisimso_core::hierarchy::{cb_rank, encode_glasso, encode_tree_extension, partial_unravel, CBValue, EncodedSystem};
use bisimso_core::lasso::{klasso_recognize, lasso_decompose};
use bisimso_core::mso::system_type_with;
use bisimso_core::scc::{Condensation, SccKind};
use bisimso_core::semigroup::TypePair;
use bisimso_core::{Error, Guards, Lasso, PathAlgebra, Signature, TransitionSystem};
use serde_json::{json, Value};

use crate::Mode;

pub const INEQUIVALENT: u8 = 1;
pub const PARSE: u8 = 2;
pub const GUARD: u8 = 3;
pub const MISMATCH: u8 = 4;
pub const INTERNAL: u8 = 5;

/// Largest unravelling tried when a system is not already a tree extension.
const UNRAVEL_LIMIT: usize = 400;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: PARSE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_guard() {
            GUARD
        } else {
            match e {
                Error::VerifyFailed(_) | Error::NotComposable(_) | Error::NotEquivalence(_) => INTERNAL,
                _ => PARSE,
            }
        };
        CliError { code, message: e.to_string() }
    }
}

pub struct Output {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> CliError {
    let mut c = CliError::from(e);
    c.message = format!("{}: {}", path.display(), c.message);
    c
}

pub fn read_system(path: &Path) -> Result<TransitionSystem, CliError> {
    format::parse_system(&read(path)?).map_err(|e| in_file(path, e))
}

/// A lasso file, or a system that decomposes as a lasso.
pub fn read_lasso(path: &Path) -> Result<Lasso, CliError> {
    let text = read(path)?;
    if let Ok(l) = format::parse_lasso(&text) {
        return Ok(l);
    }
    let s = format::parse_system(&text).map_err(|e| in_file(path, e))?;
    lasso_decompose(&s).map_err(|e| in_file(path, e))
}

pub fn read_signature(path: &Path) -> Result<Signature, CliError> {
    let sig: Signature = serde_json::from_str(&read(path)?)
        .map_err(|e| in_file(path, Error::Syntax(e.to_string())))?;
    if sig.actions.is_empty() {
        return Err(CliError::usage(format!("{}: signature has no actions", path.display())));
    }
    Ok(Signature::new(&sig.actions, &sig.colors))
}

fn names(s: &TransitionSystem, vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| s.state_name(v).to_owned()).collect()
}

/// Shape of the reachable part, most specific first.
fn shape(s: &TransitionSystem, cb: CBValue, guards: &Guards) -> String {
    let cond = Condensation::of(s);
    let reach = s.reachable();
    let cyclic = (0..cond.len()).any(|c| cond.kinds[c] != SccKind::SingletonNoLoop && reach[cond.members[c][0]]);
    if !cyclic {
        return "tree extension (no cycles)".into();
    }
    if lasso_decompose(s).is_ok() {
        return "1-lasso".into();
    }
    if let Ok(k) = klasso_recognize(s) {
        return format!("{}-lasso", k.level());
    }
    if let Ok(e) = encode_tree_extension(s, 0, guards) {
        if let Ok(k) = klasso_recognize(&e.skeleton) {
            return format!("tree extension of a {}-lasso", k.level());
        }
    }
    let CBValue::Finite(k) = cb else {
        return "unrecognized (uncountably many branches)".into();
    };
    let generalised = partial_unravel(&quotient(s), UNRAVEL_LIMIT)
        .and_then(|u| encode_tree_extension(&u, 0, guards))
        .is_ok_and(|e| encode_glasso(&e.skeleton, 0, k + 1, guards).is_ok());
    if generalised {
        format!("bisimilar to a tree extension of a generalised {}-lasso", k + 1)
    } else {
        "unrecognized".into()
    }
}

pub fn analyze(s: &TransitionSystem, guards: &Guards) -> Result<Output, CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "states: {}, edges: {}, initial: {}", s.num_states(), s.num_edges(), s.state_name(s.initial()));
    let cond = Condensation::of(s);
    let _ = writeln!(text, "scc: {} component(s)", cond.len());
    let mut comps = Vec::new();
    for c in 0..cond.len() {
        let kind = match cond.kinds[c] {
            SccKind::SingletonNoLoop => "trivial",
            SccKind::Cycle => "cycle",
            SccKind::Other => "other",
        };
        let members = names(s, &cond.members[c]);
        let _ = writeln!(text, "  c{c} {kind} {{{}}}", members.join(", "));
        comps.push(json!({"kind": kind, "members": members}));
    }
    let cb = cb_rank(s);
    let shape = shape(s, cb.value, guards);
    let _ = writeln!(text, "cb_rank: {}, shape: {shape}", cb.value);
    let report = cb.report(s);
    // the report's first line repeats the rank
    for line in report.lines().skip(1) {
        let _ = writeln!(text, "{line}");
    }
    let q = quotient(s);
    let qcb = cb_rank(&q).value;
    let _ = writeln!(text, "quotient: {} states, cb_rank: {qcb}", q.num_states());
    let json = json!({
        "states": s.num_states(),
        "edges": s.num_edges(),
        "scc": comps,
        "cb_rank": cb.value.to_string(),
        "shape": shape,
        "witness": report.lines().skip(1).map(str::trim).collect::<Vec<_>>(),
        "quotient": {"states": q.num_states(), "cb_rank": qcb.to_string()},
    });
    Ok(Output { text, json, code: 0 })
}

pub fn equiv(a: &TransitionSystem, b: &TransitionSystem, mode: Mode, m: usize, guards: &Guards) -> Result<Output, CliError> {
    match mode {
        Mode::Bisim => Ok(match bisimilar(a, b) {
            BisimWitness::Related(rel) => {
                let pairs: Vec<(String, String)> =
                    rel.iter().map(|&(x, y)| (a.state_name(x).to_owned(), b.state_name(y).to_owned())).collect();
                let mut text = format!("bisimilar\nrelation: {} pair(s)\n", pairs.len());
                for (x, y) in &pairs {
                    let _ = writeln!(text, "  {x} ~ {y}");
                }
                Output { text, json: json!({"bisimilar": true, "relation": pairs}), code: 0 }
            }
            BisimWitness::Distinguished { depth } => Output {
                text: format!("not bisimilar\ndistinguished at modal depth {depth}\n"),
                json: json!({"bisimilar": false, "depth": depth}),
                code: INEQUIVALENT,
            },
        }),
        Mode::Mso => {
            let mut text = String::new();
            let mut ranks = Vec::new();
            let mut first_diff = None;
            for k in 0..=m {
                let eq = system_type_with(a, k, guards)? == system_type_with(b, k, guards)?;
                let _ = writeln!(text, "rank {k}: {}", if eq { "equal" } else { "different" });
                ranks.push(eq);
                if !eq && first_diff.is_none() {
                    first_diff = Some(k);
                }
            }
            // types at rank k refine those below, so one difference settles it
            let code = match first_diff {
                None => {
                    let _ = writeln!(text, "equivalent at rank {m}");
                    0
                }
                Some(k) => {
                    let _ = writeln!(text, "not equivalent at rank {m}\nfirst distinguishing rank: {k}");
                    INEQUIVALENT
                }
            };
            let json = json!({"rank": m, "equal": ranks, "first_distinguishing_rank": first_diff});
            Ok(Output { text, json, code })
        }
    }
}

fn pair(p: TypePair) -> String {
    format!("<e{},e{}>", p.alpha, p.beta)
}

fn class_block(alg: &PathAlgebra, name: &str, l: &Lasso, out: &mut String) -> Result<Value, CliError> {
    let p = alg.strong_pair(l)?;
    let k = alg.weak_type(l)?;
    let members: Vec<String> = alg.members(k).into_iter().map(pair).collect();
    let _ = writeln!(out, "{name}: strong type {}, weak type k{k}", pair(p));
    let _ = writeln!(out, "  class k{k}: {}", members.join(" "));
    Ok(json!({"strong": pair(p), "weak": k, "class": members}))
}

pub fn chain(a: &Lasso, b: &Lasso, m: usize, guards: &Guards) -> Result<Output, CliError> {
    let (sa, sb) = (a.to_system(), b.to_system());
    let alg = PathAlgebra::build_with(&Signature::of_systems([&sa, &sb]), m, guards)?;
    let mut text = format!("path algebra: rank {m}, {} elements\n", alg.len());
    let ta = class_block(&alg, "A", a, &mut text)?;
    let tb = class_block(&alg, "B", b, &mut text)?;
    if alg.weak_type(a)? != alg.weak_type(b)? {
        let _ = writeln!(text, "weak types differ");
        return Ok(Output { text, json: json!({"rank": m, "a": ta, "b": tb, "chain": null}), code: MISMATCH });
    }
    let c = alg.witness_chain(a, b, guards)?;
    c.check(guards)?;
    let _ = writeln!(text, "chain: {} system(s), verified", c.systems.len());
    for (i, s) in c.systems.iter().enumerate() {
        if i > 0 {
            let _ = writeln!(text, "link {}: {}", i - 1, c.links[i - 1]);
        }
        let _ = writeln!(text, "system {i}: {}", system_to_value(s));
    }
    let json = json!({
        "rank": m,
        "a": ta,
        "b": tb,
        "chain": {
            "links": c.links.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "systems": c.systems.iter().map(system_to_value).collect::<Vec<_>>(),
        },
    });
    Ok(Output { text, json, code: 0 })
}

pub fn algebra(sig: &Signature, m: usize, guards: &Guards) -> Result<Output, CliError> {
    let alg = PathAlgebra::build_with(sig, m, guards)?;
    let elements: Vec<Value> = (0..alg.len())
        .map(|e| json!({"id": e, "representative": alg.representative(e).to_string(), "unit": alg.is_unit(e)}))
        .collect();
    let idempotents: Vec<Value> = (0..alg.len())
        .filter_map(|e| alg.idempotent_power(e).ok().map(|(p, n)| json!({"element": e, "power": n, "idempotent": p})))
        .collect();
    let classes: Vec<Value> = alg
        .classes()
        .iter()
        .map(|c| json!({"id": c.id, "representative": pair(c.representative), "size": c.size, "linked": c.linked}))
        .collect();
    let json = json!({
        "rank": m,
        "signature": sig,
        "elements": elements,
        "product": alg.table(),
        "idempotents": idempotents,
        "classes": classes,
    });
    Ok(Output { text: alg.dump(), json, code: 0 })
}

/// Tree extension as is; otherwise the generalised-lasso reading of its
/// unravelled quotient.
fn encode_any(s: &TransitionSystem, m: usize, guards: &Guards) -> Result<(EncodedSystem, &'static str), CliError> {
    match encode_tree_extension(s, m, guards) {
        Ok(e) => Ok((e, "tree extension")),
        Err(e @ Error::NotRecognized(_)) => {
            let CBValue::Finite(k) = cb_rank(&quotient(s)).value else {
                return Err(e.into());
            };
            let u = partial_unravel(&quotient(s), UNRAVEL_LIMIT)?;
            Ok((encode_glasso(&u, m, k + 1, guards)?, "generalised lasso"))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn encode(s: &TransitionSystem, m: usize, guards: &Guards) -> Result<Output, CliError> {
    let (e, kind) = encode_any(s, m, guards)?;
    let text = format!("encoding: {kind}, rank {m}\n{}", e.report());
    let json = serde_json::from_str(&encoded_to_json(&e)).expect("encoding is json");
    Ok(Output { text, json, code: 0 })
}

pub fn decode(path: &Path) -> Result<Output, CliError> {
    let enc = parse_encoded(&read(path)?).map_err(|e| in_file(path, e))?;
    let s = enc.decode()?;
    Ok(Output { text: system_to_json(&s), json: system_to_value(&s), code: 0 })
}

pub fn selftest(seed: u64, fraction: f64) -> Result<Output, CliError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CliError::usage("--fraction must be in (0, 1]"));
    }
    let reports = checks::all(seed, fraction);
    let mut text = String::new();
    let mut rows = Vec::new();
    for r in &reports {
        let _ = writeln!(text, "{r}");
        rows.push(json!({
            "name": r.name,
            "passed": r.passed(),
            "samples": r.samples,
            "failures": r.failures,
            "skipped": r.skipped,
        }));
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(text, "{} of {} suites passed", reports.len() - failed, reports.len());
    let code = if failed == 0 { 0 } else { INEQUIVALENT };
    Ok(Output { text, json: json!({"seed": seed, "suites": rows}), code })
}
