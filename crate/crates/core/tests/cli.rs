use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lebesgue")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: {e}\n{out}\n{err}")))
}

#[test]
fn integrate_reports_exact_values() {
    let (code, v) = json(&["integrate", "--fn", "dirichlet", "--domain", "[0,1]"]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], "0/1");
    assert_eq!(v["errorBound"], 0.0);
    let (_, v) = json(&["integrate", "--fn", "step:0,1/3,1,2,5", "--domain", "[0,1]", "--stages", "8"]);
    assert_eq!(v["value"], "4/1");
    let (_, v) = json(&["integrate", "--fn", "poly:0,1", "--set", "[0,1/2]|[1/4,1]"]);
    assert_eq!(v["value"], "1/2");
}

#[test]
fn integrate_unbounded_cases() {
    let (code, v) = json(&["integrate", "--fn", "inv-sqrt", "--domain", "[0,1]", "--schedule", "12", "--stages", "8"]);
    assert_eq!(code, 0);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() <= v["errorBound"].as_f64().unwrap() + 0.05, "{v}");
    let (code, v) = json(&["integrate", "--fn", "const:1", "--domain", "R", "--stages", "2", "--schedule", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "plus-infinity");
}

#[test]
fn riemann_and_dini() {
    let (code, v) = json(&["riemann", "--fn", "poly:0,0,1", "--interval", "[0,1]"]);
    assert_eq!(code, 0);
    assert_eq!(v["exact"], "1/3");
    let (code, v) = json(&["riemann", "--fn", "dirichlet", "--interval", "[0,1]"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "not-riemann-integrable");
    let (code, v) = json(&["dini", "--fn", "thomae", "--alpha", "1/10", "--eps", "1/100"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    let (code, v) = json(&["dini", "--fn", "dirichlet", "--alpha", "1/2", "--eps", "1/10", "--max-n", "64"]);
    assert_eq!(code, 1);
    assert_eq!(v["heavyLength"], "1/1");
}

#[test]
fn measure_and_decompose() {
    let (code, v) = json(&["measure", "--set", "[0,1]x[0,1]|[1/2,2]x[0,1/2]"]);
    assert_eq!(code, 0);
    assert_eq!(v["measure"], "3/2");
    assert_eq!(v["length"], "7/4");
    assert_eq!(v["viaIntegral"], "3/2");
    let (code, v) = json(&["--seed", "3", "measure", "--random", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["allAgree"], true);
    let (code, v) = json(&["decompose", "--set", "(0,1)", "--depth", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["length"], "15/16");
}

#[test]
fn cantor_measure_output() {
    let (code, v) = json(&["cantor", "--kind", "svc", "--stage", "10", "--emit", "measure"]);
    assert_eq!(code, 0);
    assert_eq!(v["measureRemoved"], "1023/2048");
    let (_, v) = json(&["cantor", "--kind", "ternary", "--stage", "2"]);
    assert_eq!(v["removed"].as_array().unwrap().len(), 3);
}

#[test]
fn convergence_commands() {
    let (code, v) = json(&["egorov", "--seq", "power", "--eps", "1/8", "--sigmas", "1/2,1/4,1/8,1/16"]);
    assert_eq!(code, 0, "{v}");
    let (code, _) = json(&["egorov", "--seq", "trapezoid", "--eps", "1/8"]);
    assert_eq!(code, 1);
    let (code, v) = json(&["converge", "--law", "dominated", "--seq", "spike"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "hypothesis-violated");
    let (code, v) = json(&["converge", "--law", "monotone", "--seq", "ramp"]);
    assert_eq!(code, 0, "{v}");
    let (code, v) = json(&["converge", "--law", "fatou", "--seq", "spike"]);
    assert_eq!(code, 0);
    assert!((v["gap"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn fubini_commands() {
    let (code, v) = json(&["fubini", "--fn", "prod(poly:0,1;poly:0,1)", "--rect", "[0,1]x[0,1]"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "pass");
    let (code, v) = json(&["fubini", "--fn", "exp-abs-y", "--rect", "R2"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "not-summable");
    let (code, v) = json(&["fubini", "--set", "[0,1]x[0,1]x[0,2]|[1/2,3]x[0,1]x[1,3]", "--axis", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["integral"], v["volume"]);
}

#[test]
fn csv_and_svg_outputs() {
    let (code, out, _) = run(&["--csv", "decompose", "--set", "(0,1)x(0,1)", "--depth", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("level,cubes"));
    let path = std::env::temp_dir().join(format!("lebesgue-test-{}.svg", std::process::id()));
    let (code, _, _) = run(&["--svg", path.to_str().unwrap(), "cantor", "--kind", "svc", "--stage", "4"]);
    assert_eq!(code, 0);
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    std::fs::remove_file(path).ok();
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["integrate"]).0, 2);
    assert_eq!(run(&["integrate", "--fn", "nope"]).0, 2);
    assert_eq!(run(&["cantor", "--kind", "koch", "--stage", "2"]).0, 2);
    assert_eq!(run(&["measure", "--set", "[2,1]"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
}
