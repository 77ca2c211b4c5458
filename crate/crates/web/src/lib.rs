//! Browser bindings: decide a reduction, draw the degree order, evaluate a
//! witness term. Each operation takes the workspace JSON text.
//!
//! The plain functions are target-independent and tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use wasm_bindgen::prelude::*;

use manyone::degrees::{degree_report, Mode};
use manyone::reduce::{decide, wtt_leq, Kind};
use manyone::term::{eval_term, parse_term};
use manyone::workspace::Workspace;

fn load(ws_json: &str) -> Result<Workspace, String> {
    Workspace::from_json(ws_json).map_err(|e| e.to_string())
}

fn parse_mode(mode: &str, ws: &Workspace) -> Result<Mode, String> {
    match mode {
        "m" => Ok(Mode::M),
        "sm" => Ok(Mode::Sm),
        "wtt" => Ok(Mode::Wtt(ws.star_truncation)),
        other => Err(format!("unknown mode `{other}` (expected m, sm or wtt)")),
    }
}

/// `YES` with the certificate JSON, or `NO (exhaustive at depth D)`.
pub fn decide_text(ws_json: &str, f: &str, g: &str, mode: &str) -> Result<String, String> {
    let ws = load(ws_json)?;
    let mode = parse_mode(mode, &ws)?;
    for name in [f, g] {
        if ws.problem(name).is_none() {
            return Err(format!("unknown problem `{name}`"));
        }
    }
    let mut env = ws.env.clone();
    let modes = if mode == Mode::M { vec![Mode::M] } else { vec![Mode::M, mode] };
    let table = ws.table(&env, &[], &modes).map_err(|e| e.to_string())?;
    let v = match mode {
        Mode::M => decide(&env, &table, f, g, Kind::M),
        Mode::Sm => decide(&env, &table, f, g, Kind::Sm),
        Mode::Wtt(n) => wtt_leq(&mut env, &table, f, g, n),
    }
    .map_err(|e| e.to_string())?;
    Ok(match v.cert() {
        Some(c) => format!("YES {f} ≤_{mode} {g}\n{}", c.to_json()),
        None => format!("NO (exhaustive at depth {})", v.universe_depth),
    })
}

/// DOT source of the `≤_m` degree order of all declared problems.
pub fn dot_text(ws_json: &str) -> Result<String, String> {
    let ws = load(ws_json)?;
    let mut env = ws.env.clone();
    let table = ws.table(&env, &[], &[Mode::M]).map_err(|e| e.to_string())?;
    let r = degree_report(&mut env, &table, &ws.problem_names(), Mode::M, false).map_err(|e| e.to_string())?;
    Ok(r.dot())
}

/// The relation a witness term denotes, one pair per line.
pub fn eval_text(ws_json: &str, term: &str) -> Result<String, String> {
    let ws = load(ws_json)?;
    let t = parse_term(term, &ws.env).map_err(|e| e.to_string())?;
    let m = eval_term(&t, &ws.env).map_err(|e| e.to_string())?;
    let mut s = format!("{} -> {}\n", m.src(), m.dst());
    for (x, y) in m.graph() {
        s.push_str(&format!("{x} -> {y}\n"));
    }
    Ok(s)
}

#[wasm_bindgen]
pub fn decide_reduction(ws_json: &str, f: &str, g: &str, mode: &str) -> Result<String, JsValue> {
    decide_text(ws_json, f, g, mode).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn hasse_dot(ws_json: &str) -> Result<String, JsValue> {
    dot_text(ws_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn evaluate_term(ws_json: &str, term: &str) -> Result<String, JsValue> {
    eval_text(ws_json, term).map_err(|e| JsValue::from_str(&e))
}
