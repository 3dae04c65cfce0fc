use std::process::{Command, Output};

use serde_json::Value;

fn zgrade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zgrade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const EXAMPLE_SPEC: &str = r#"{"lower":[-3,1,6],"upper":["inf",2,"inf"]}"#;

#[test]
fn support_check_returns_witness() {
    let out = zgrade(&[
        "support-check",
        "--spec",
        EXAMPLE_SPEC,
        "--z",
        "5",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["result"]["status"], "yes");
    let w: Vec<i64> = serde_json::from_value(v["result"]["witness"].clone()).unwrap();
    assert_eq!(-3 * w[0] + w[1] + 6 * w[2], 5);
    assert!(w[1] <= 2);
}

#[test]
fn support_check_negative_exit_code() {
    let spec = r#"{"lower":[-2,4],"upper":["inf","inf"]}"#;
    let out = zgrade(&["support-check", "--spec", spec, "--z", "-3", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["result"]["status"], "exact_no");
}

#[test]
fn classify_second_family_triple() {
    let out = zgrade(&[
        "classify", "--a", "6", "--b", "10", "--c", "3", "--k", "1", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["pair_case"], "(4')");
    assert_eq!(v["variety"]["name"], "V_{2,1}");
    assert_eq!(v["report"]["d"], 2);
    assert_eq!(v["report"]["bhat"], false);
}

#[test]
fn classify_text_mentions_case() {
    let out = zgrade(&["classify", "--a", "15", "--b", "10", "--c", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("bhat true"), "{text}");
}

#[test]
fn verify_counterexample_from_model_file() {
    let dir = std::env::temp_dir().join(format!("zgrade-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.json");
    std::fs::write(
        &path,
        r#"{"spec":{"lower":[-1,0,1],"upper":["inf",2,"inf"]},"counts":[4,2,4]}"#,
    )
    .unwrap();
    let out = zgrade(&[
        "verify",
        "--model",
        path.to_str().unwrap(),
        "--poly",
        "[x1@0,x2@0]",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["verdict"]["status"], "counterexample");
    assert_eq!(v["verdict"]["value"], "2*e5e6");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn verify_identity_from_spec() {
    let spec = r#"{"lower":[-1,1,3],"upper":["inf",2,"inf"]}"#;
    let out = zgrade(&["verify", "--spec", spec, "--poly", "x1@1 x2@1 + x2@1 x1@1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("holds in scope"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        zgrade(&["verify", "--spec", EXAMPLE_SPEC, "--poly", "x1@"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        zgrade(&["support-check", "--spec", "{oops", "--z", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(zgrade(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        zgrade(&["chain", "--d", "2", "--c", "3", "--k1", "2", "--k2", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn variety_not_full_support_is_negative() {
    let out = zgrade(&["variety", "--a", "9", "--b", "6", "--c", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = zgrade(&[
        "variety", "--a", "3", "--b", "1", "--c", "1", "--k", "inf", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["name"], "V_can");
}

#[test]
fn gen_identities_scaled_family() {
    let out = zgrade(&[
        "gen-identities",
        "--family",
        "can",
        "--scaled",
        "2",
        "--degree-bound",
        "2",
        "--window",
        "4",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let list: Vec<String> = serde_json::from_value(v["identities"].clone()).unwrap();
    assert!(list.contains(&"x1@3".to_string()));
    assert_eq!(v["count"].as_u64().unwrap() as usize, list.len());
}

#[test]
fn cross_checks() {
    let spec = r#"{"lower":[-1,1,3],"upper":["inf",2,"inf"]}"#;
    let out = zgrade(&[
        "cross-check",
        "quotient",
        "--spec",
        spec,
        "--poly",
        "[x1@2, x2@0]",
        "--d",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let scaled = r#"{"spec":{"lower":[-2,0,2],"upper":["inf",2,"inf"]},"counts":[4,2,4]}"#;
    let out = zgrade(&[
        "cross-check",
        "scaling",
        "--model",
        scaled,
        "--poly",
        "[x1@-1, x2@1]",
        "--d",
        "2",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["report"]["agree"], true);
    let out = zgrade(&[
        "cross-check",
        "support",
        "--spec",
        EXAMPLE_SPEC,
        "--rank",
        "14",
        "--max-length",
        "8",
        "--window",
        "15",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn chain_and_determinism() {
    let args = [
        "chain",
        "--d",
        "3",
        "--c",
        "1",
        "--k1",
        "2",
        "--k2",
        "4",
        "--json",
        "--threads",
        "2",
    ];
    let first = zgrade(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(json_of(&first)["poly"], "x1@1 x2@1 x3@1");
    assert_eq!(first.stdout, zgrade(&args).stdout);
}
