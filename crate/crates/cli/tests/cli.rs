use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: Option<&str>) -> (i32, Value) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_padicell"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    let Output { status, stdout, .. } = child.wait_with_output().unwrap();
    let v = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    (status.code().unwrap(), v)
}

const SET: &str = "(t^2 - 1) in P_2 && |t - 1| <= |25|";

#[test]
fn decompose_passes_and_reports_cells() {
    let (code, v) = run(&["decompose", SET, "--window", "3", "--digits", "4"], None);
    assert_eq!(code, 0);
    assert_eq!(v["verification"]["passed"], true);
    assert!(!v["result"]["cells"].as_array().unwrap().is_empty());
    assert_eq!(v["params"]["prime"], 5);
}

#[test]
fn irreducible_splitting_is_unsupported() {
    let (code, v) = run(&["decompose", "t^2-2 in P_2"], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "UnsupportedSplitting");
}

#[test]
fn syntax_errors_exit_two() {
    let (code, v) = run(&["prepare", "t^^2"], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "Syntax");
}

#[test]
fn missing_files_exit_three() {
    let (code, _) = run(&["decompose", "@/definitely/not/here"], None);
    assert_eq!(code, 3);
}

#[test]
fn prepare_with_a_root() {
    let (code, v) = run(&["prepare", "t", "--root", "2", "--prime", "3", "--n", "2"], None);
    assert_eq!(code, 0, "{v}");
    for piece in v["result"]["pieces"].as_array().unwrap() {
        assert_eq!(piece["e"], 2);
    }
}

#[test]
fn square_root_of_a_nonsquare_constant() {
    let (code, v) = run(&["prepare", "2", "--root", "2", "--prime", "5"], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "RootExtraction");
}

#[test]
fn skolem_sections_land_in_their_cells() {
    let (code, v) = run(&["skolem", SET, "--window", "3", "--digits", "3"], None);
    assert_eq!(code, 0, "{v}");
    assert!(v["verification"]["checked"].as_u64().unwrap() > 0);
}

#[test]
fn translate_reads_stdin() {
    let cell = r#"{"d":2,"rows":[
        {"lower":{"slot":0,"coeffs":[]},"upper":{"slot":2,"coeffs":[]},"cong":[1,2]},
        {"lower":{"slot":1,"coeffs":[3]},"upper":{"slot":3,"coeffs":[-1]},"cong":[2,3]}]}"#;
    let (code, v) = run(&["translate", "-", "--seed", "7"], Some(cell));
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["verification"]["checked"], 1000);
    assert!(!v["result"]["conditions"].as_array().unwrap().is_empty());
}

#[test]
fn evpmin_is_stable() {
    let (code, v) = run(&["evpmin", "t^2 + 5", "--domain", "|t| <= |1|", "--window", "3", "--digits", "4"], None);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["result"]["valuation"], 1);
}

#[test]
fn evpmin_rejects_unbounded_domains() {
    let (code, v) = run(&["evpmin", "t", "--domain", "t in P_2"], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "UnboundedDomain");
}

#[test]
fn artifacts_reverify_and_tampering_fails() {
    let dir = std::env::temp_dir().join(format!("padicell-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("a.json");
    let p = path.to_str().unwrap();
    let (code, _) = run(&["decompose", SET, "--window", "3", "--digits", "4", "--out", p], None);
    assert_eq!(code, 0);
    let at = format!("@{p}");
    let (code, v) = run(&["verify", &at], None);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["verification"]["reproduced"], true);

    let mut art: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    art["result"]["cells"].as_array_mut().unwrap().pop();
    let (code, v) = run(&["verify", "-"], Some(&art.to_string()));
    assert_eq!(code, 1, "{v}");
    assert_eq!(v["verification"]["passed"], false);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_is_deterministic() {
    let args = ["prepare", "t^2 - 1", "--n", "2", "--seed", "11"];
    assert_eq!(run(&args, None), run(&args, None));
}

fn schema(name: &str) -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas/v1/").to_string() + name;
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn has_required(v: &Value, s: &Value) -> bool {
    s["required"].as_array().map_or(true, |keys| keys.iter().all(|k| v.get(k.as_str().unwrap()).is_some()))
}

#[test]
fn outputs_carry_the_schema_fields() {
    let art = schema("artifact.schema.json");
    let (ok_shape, err_shape) = (&art["oneOf"][0], &art["oneOf"][1]);
    let (_, v) = run(&["prepare", "t^2 - 1"], None);
    assert!(has_required(&v, ok_shape) && has_required(&v["params"], &ok_shape["properties"]["params"]));
    let piece = schema("prepared_piece.schema.json");
    let cell = schema("cell.schema.json");
    for pc in v["result"]["pieces"].as_array().unwrap() {
        assert!(has_required(pc, &piece) && has_required(pc, &cell), "{pc}");
    }
    let (_, v) = run(&["skolem", SET, "--window", "2", "--digits", "2"], None);
    let sec = schema("section.schema.json");
    for s in v["result"]["sections"].as_array().unwrap() {
        assert!(has_required(&s["section"], &sec));
    }
    let (_, v) = run(&["decompose", "t^2-2 in P_2"], None);
    assert!(has_required(&v, err_shape));
}
