//! One function per subcommand. Each returns the artifact and whether its
//! verification passed.

use padicell::cells::{check_partition, decompose1, CellIndex, CellList, PresentedCell};
use padicell::lang::{normalize_at, parse_formula, parse_term, Vars};
use padicell::oracle::{TruncatedSample, DEFAULT_CAP};
use padicell::padic::PadicConfig;
use padicell::prepare::{prepare_param, verify_unit_residual_at, ResidualReport, Rooted};
use padicell::scalar::Scalar;
use padicell::skolem::{section, verify_section, SectionReport};
use padicell::valgroup::{evp_min, pres_member, translate, PresburgerCell};
use padicell::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::Params;

/// Failure lists in artifacts are cut to this many entries.
const SHOWN: usize = 10;

/// Random points checked per prepared piece.
const PIECE_SAMPLES: usize = 50;

/// Random tuples checked by `translate`.
const TUPLES: usize = 1000;

fn config(p: &Params) -> Result<PadicConfig> {
    PadicConfig::new(p.prime, p.work_prec)
}

fn sample(p: &Params) -> Result<TruncatedSample> {
    TruncatedSample::new(config(p)?, p.window, p.digits)
}

fn params_json(p: &Params) -> Value {
    json!({
        "prime": p.prime,
        "work_prec": p.work_prec,
        "n": p.n,
        "power": p.power,
        "window": p.window,
        "digits": p.digits,
        "seed": p.seed,
    })
}

fn params_from_json(v: &Value) -> Result<Params> {
    let bad = |k: &str| Error::Syntax { pos: 0, msg: format!("artifact params need `{k}`") };
    let get = |k: &str| v.get(k).and_then(Value::as_u64).ok_or_else(|| bad(k));
    let small = |k: &str| get(k).and_then(|x| u32::try_from(x).map_err(|_| bad(k)));
    Ok(Params {
        prime: small("prime")?,
        work_prec: small("work_prec")?,
        n: small("n")?,
        power: v.get("power").and_then(Value::as_u64).map(|x| x as u32),
        window: small("window")?,
        digits: small("digits")?,
        out: None,
        seed: get("seed")?,
    })
}

fn artifact(command: &str, input: &str, p: &Params, extra: Value, result: Value, verification: Value) -> Value {
    let mut params = params_json(p);
    if let (Some(dst), Value::Object(src)) = (params.as_object_mut(), extra) {
        dst.extend(src);
    }
    json!({
        "command": command,
        "input": input,
        "params": params,
        "result": result,
        "verification": verification,
    })
}

fn passed(v: &Value) -> bool {
    v["verification"]["passed"].as_bool().unwrap_or(false)
}

fn shown<T: serde::Serialize>(items: &[T]) -> Value {
    json!(items.iter().take(SHOWN).collect::<Vec<_>>())
}

fn cells_of(formula: &str, p: &Params, cfg: PadicConfig) -> Result<(CellList, padicell::lang::NormalForm)> {
    let vars = Vars::univariate();
    let f = parse_formula(formula, &vars)?;
    let nf = normalize_at(&f, &vars, cfg, p.power.unwrap_or(1))?;
    let cells = decompose1(&nf, cfg)?;
    Ok((cells, nf))
}

pub fn decompose(input: &str, p: &Params) -> Result<(Value, bool)> {
    let cfg = config(p)?;
    let (cells, nf) = cells_of(input, p, cfg)?;
    let rep = check_partition(&cells, &nf, &sample(p)?)?;
    let ver = json!({
        "passed": rep.ok(),
        "points": rep.points,
        "overlaps": shown(&rep.overlaps),
        "uncovered": shown(&rep.uncovered),
        "spurious": shown(&rep.spurious),
        "undecided": shown(&rep.undecided),
    });
    let out = artifact("decompose", input, p, json!({}), cells.to_json(), ver);
    let ok = passed(&out);
    Ok((out, ok))
}

fn residuals(pieces: &[padicell::prepare::PreparedPiece], theta: &Rooted, p: &Params, cfg: PadicConfig) -> Result<ResidualReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut rep = ResidualReport::default();
    for pc in pieces {
        let pts: Vec<Scalar> = match pc.cell.sample(cfg, p.window as i64, PIECE_SAMPLES, &mut rng) {
            Ok(v) => v.into_iter().filter_map(|mut x| x.pop()).collect(),
            Err(Error::EmptyCell) => Vec::new(),
            Err(e) => return Err(e),
        };
        rep.merge(verify_unit_residual_at(pc, theta, &pts, cfg));
    }
    Ok(rep)
}

pub fn prepare(input: &str, root: u32, p: &Params) -> Result<(Value, bool)> {
    let cfg = config(p)?;
    let term = parse_term(input, &Vars::univariate())?;
    let theta = Rooted::new(term, root)?;
    let pieces = prepare_param(&theta, p.n, cfg)?;
    let rep = residuals(&pieces, &theta, p, cfg)?;
    let mut ver = json!({
        "checked": rep.checked,
        "failures": shown(&rep.failures),
        "imprecise": rep.imprecise.len(),
    });
    let mut ok = rep.ok();
    if root == 1 {
        // Without roots the pieces cover the whole line.
        let cells: Vec<PresentedCell> = pieces.iter().map(|pc| pc.cell.clone()).collect();
        let index = CellIndex::new(&cells, cfg)?;
        let mut bad = Vec::new();
        let s = sample(p)?;
        for pt in s.points() {
            let hits = index.containing(&pt)?;
            if hits.len() != 1 {
                bad.push((pt.display(p.prime), hits));
            }
        }
        ok &= bad.is_empty();
        ver["partition_points"] = json!(s.size() as u64);
        ver["partition_failures"] = shown(&bad);
    }
    ver["passed"] = json!(ok);
    let result = json!({ "pieces": pieces.iter().map(|pc| pc.to_json()).collect::<Vec<_>>() });
    Ok((artifact("prepare", input, p, json!({ "root": root }), result, ver), ok))
}

pub fn skolem(input: &str, p: &Params) -> Result<(Value, bool)> {
    let cfg = config(p)?;
    let (cells, _) = cells_of(input, p, cfg)?;
    let s = sample(p)?;
    let mut results = Vec::new();
    let mut total = SectionReport::default();
    for cell in &cells.cells {
        let sec = section(cell, cfg)?;
        let rep = verify_section(cell, &sec, &s);
        total.checked += rep.checked;
        total.failures.extend(rep.failures);
        results.push(json!({ "cell": cell.to_json(), "section": sec.to_json() }));
    }
    let ok = total.ok();
    let ver = json!({ "passed": ok, "checked": total.checked, "failures": shown(&total.failures) });
    Ok((artifact("skolem", input, p, json!({}), json!({ "sections": results }), ver), ok))
}

pub fn translate_cell(input: &str, p: &Params) -> Result<(Value, bool)> {
    let cfg = config(p)?;
    let cell: PresburgerCell = serde_json::from_str(input).map_err(|e| Error::Syntax { pos: e.column(), msg: e.to_string() })?;
    let cell = PresburgerCell::new(cell.rows)?;
    let conds = translate(&cell);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let span = p.window as i64;
    let mut bad = Vec::new();
    let mut inside = 0u64;
    for _ in 0..TUPLES {
        let vt: Vec<i64> = (0..cell.d).map(|_| rng.gen_range(-span..=span)).collect();
        let vz: Vec<i64> = (0..2 * cell.d).map(|_| rng.gen_range(-span..=span)).collect();
        let mut elt = |v: i64| Scalar::prime_power(p.prime, v).mul(&Scalar::int(rng.gen_range(1..p.prime as i64)), cfg);
        let t: Vec<Scalar> = vt.iter().map(|v| elt(*v)).collect();
        let z: Vec<Scalar> = vz.iter().map(|v| elt(*v)).collect();
        let mut ring = true;
        for c in &conds {
            ring &= c.holds(&t, &z, cfg)?;
        }
        let pres = pres_member(&cell, &vz, &vt)?;
        inside += pres as u64;
        if ring != pres {
            bad.push(json!({ "v_t": vt, "v_z": vz, "ring": ring, "presburger": pres }));
        }
    }
    let ok = bad.is_empty();
    let ver = json!({ "passed": ok, "checked": TUPLES, "inside": inside, "failures": shown(&bad) });
    let result = serde_json::to_value(&conds).expect("serializable");
    Ok((artifact("translate", input, p, json!({}), json!({ "conditions": result }), ver), ok))
}

pub fn evpmin(input: &str, domain: &str, p: &Params) -> Result<(Value, bool)> {
    let cfg = config(p)?;
    let f = parse_term(input, &Vars::univariate())?;
    let (cells, _) = cells_of(domain, p, cfg)?;
    let first = evp_min(&f, &cells.cells, &sample(p)?)?;
    let finer_digits = if TruncatedSample::size_of(p.prime, p.window, 2 * p.digits) <= DEFAULT_CAP { 2 * p.digits } else { p.digits + 1 };
    let finer = TruncatedSample::new(cfg, p.window, finer_digits)?;
    let second = evp_min(&f, &cells.cells, &finer)?;
    let ok = first.valuation == second.valuation;
    let result = json!({
        "valuation": first.valuation,
        "point": first.point.display(p.prime),
        "scanned": first.scanned,
    });
    let ver = json!({ "passed": ok, "digits": finer_digits, "valuation": second.valuation, "scanned": second.scanned });
    Ok((artifact("evpmin", input, p, json!({ "domain": domain }), result, ver), ok))
}

/// Re-runs the recorded command and checks that it reproduces the stored
/// result and passes its own verification. Decompositions are also checked
/// from the stored cells.
pub fn verify(art: &Value, _: &Params) -> Result<(Value, bool)> {
    let bad = |m: &str| Error::Syntax { pos: 0, msg: m.into() };
    let command = art["command"].as_str().ok_or_else(|| bad("artifact needs `command`"))?;
    let input = art["input"].as_str().ok_or_else(|| bad("artifact needs `input`"))?;
    let params = &art["params"];
    let p = params_from_json(params)?;
    let (again, _) = match command {
        "decompose" => decompose(input, &p)?,
        "prepare" => {
            let root = params["root"].as_u64().ok_or_else(|| bad("prepare artifacts need `root`"))? as u32;
            prepare(input, root, &p)?
        }
        "skolem" => skolem(input, &p)?,
        "translate" => translate_cell(input, &p)?,
        "evpmin" => {
            let domain = params["domain"].as_str().ok_or_else(|| bad("evpmin artifacts need `domain`"))?;
            evpmin(input, domain, &p)?
        }
        other => return Err(bad(&format!("unknown command `{other}`"))),
    };
    let reproduced = again["result"] == art["result"];
    let mut stored_ok = true;
    let mut ver = json!({ "reproduced": reproduced, "rerun_passed": passed(&again) });
    if command == "decompose" {
        let cfg = config(&p)?;
        let cells = CellList::from_json(&art["result"], cfg)?;
        let (_, nf) = cells_of(input, &p, cfg)?;
        let rep = check_partition(&cells, &nf, &sample(&p)?)?;
        stored_ok = rep.ok();
        ver["stored_partition"] = json!(stored_ok);
    }
    let ok = reproduced && passed(&again) && stored_ok;
    ver["passed"] = json!(ok);
    let out = json!({ "command": "verify", "target": command, "input": input, "params": params, "verification": ver });
    Ok((out, ok))
}
