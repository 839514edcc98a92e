//! JSON form of formulas.
//!
//! Nodes carry a `node` tag: `TRUE`, `FALSE`, `NOT`, `AND`, `OR`, `ZERO`,
//! `NORM_LE`, `POWER_COSET`, `IN_Q`. Terms are written as text together
//! with their kind.

use serde_json::{json, Value};

use super::ast::{Atom, Basic, Formula};
use super::parse::parse_term;
use super::term::{Term, Vars};
use crate::error::{Error, Result};

pub fn term_to_json(t: &Term, vars: &Vars) -> Value {
    let kind = match t {
        Term::Poly(_) => "poly",
        Term::Factored(_) => "factored",
    };
    json!({ "kind": kind, "text": t.display(vars).to_string() })
}

pub fn term_from_json(v: &Value, vars: &Vars) -> Result<Term> {
    let text = v
        .get("text")
        .and_then(Value::as_str)
        .or_else(|| v.as_str())
        .ok_or_else(|| bad("term needs a `text` field"))?;
    parse_term(text, vars)
}

fn bad(msg: &str) -> Error {
    Error::Syntax { pos: 0, msg: msg.into() }
}

pub fn formula_to_json(f: &Formula, vars: &Vars) -> Value {
    let t = |x: &Term| term_to_json(x, vars);
    match f {
        Formula::True => json!({ "node": "TRUE" }),
        Formula::False => json!({ "node": "FALSE" }),
        Formula::Not(a) => json!({ "node": "NOT", "arg": formula_to_json(a, vars) }),
        Formula::And(a, b) => json!({ "node": "AND", "args": [formula_to_json(a, vars), formula_to_json(b, vars)] }),
        Formula::Or(a, b) => json!({ "node": "OR", "args": [formula_to_json(a, vars), formula_to_json(b, vars)] }),
        Formula::Atom(Atom::Basic(Basic::Zero(x))) => json!({ "node": "ZERO", "f": t(x) }),
        Formula::Atom(Atom::Basic(Basic::NormLe(g, x))) => json!({ "node": "NORM_LE", "g": t(g), "f": t(x) }),
        Formula::Atom(Atom::Basic(Basic::PowerCoset { term, n, r, with_zero })) => {
            json!({ "node": "POWER_COSET", "f": t(term), "N": n, "r": r, "with_zero": with_zero })
        }
        Formula::Atom(Atom::InQ { term, n, m }) => json!({ "node": "IN_Q", "f": t(term), "N": n, "M": m }),
    }
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| bad(&format!("missing field `{k}`")))
}

fn uint(v: &Value, k: &str) -> Result<u64> {
    field(v, k)?.as_u64().ok_or_else(|| bad(&format!("`{k}` must be a nonnegative integer")))
}

pub fn formula_from_json(v: &Value, vars: &Vars) -> Result<Formula> {
    let node = field(v, "node")?.as_str().ok_or_else(|| bad("`node` must be a string"))?;
    let term = |k: &str| term_from_json(field(v, k)?, vars);
    let args = || -> Result<(Formula, Formula)> {
        match field(v, "args")?.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok((formula_from_json(a, vars)?, formula_from_json(b, vars)?)),
            _ => Err(bad("`args` must hold two formulas")),
        }
    };
    let power = |k: &str| -> Result<u32> {
        match uint(v, k)? {
            0 => Err(bad("powers must be at least 1")),
            n => u32::try_from(n).map_err(|_| bad("power too large")),
        }
    };
    Ok(match node {
        "TRUE" => Formula::True,
        "FALSE" => Formula::False,
        "NOT" => Formula::not(formula_from_json(field(v, "arg")?, vars)?),
        "AND" => {
            let (a, b) = args()?;
            Formula::and(a, b)
        }
        "OR" => {
            let (a, b) = args()?;
            Formula::or(a, b)
        }
        "ZERO" => Formula::basic(Basic::Zero(term("f")?)),
        "NORM_LE" => Formula::basic(Basic::NormLe(term("g")?, term("f")?)),
        "POWER_COSET" => Formula::basic(Basic::PowerCoset {
            term: term("f")?,
            n: power("N")?,
            r: uint(v, "r")? as usize,
            with_zero: v.get("with_zero").and_then(Value::as_bool).unwrap_or(false),
        }),
        "IN_Q" => Formula::Atom(Atom::InQ { term: term("f")?, n: power("N")?, m: power("M")? }),
        other => return Err(bad(&format!("unknown node `{other}`"))),
    })
}
