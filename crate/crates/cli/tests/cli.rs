use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny")
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn expected() -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture().join("expected.json")).unwrap()).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexiprofile"))
        .args(args)
        .env_remove("LEXIPROFILE_DATA_DIR")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

struct Args {
    v: Vec<String>,
}

impl Args {
    fn new(cmd: &str, out: &Path) -> Self {
        let f = fixture();
        let p = |s: &str| f.join(s).display().to_string();
        Args {
            v: vec![
                cmd.into(),
                "--roster".into(),
                p("roster.csv"),
                "--lexicon-dir".into(),
                p("lexicons"),
                "--out".into(),
                out.display().to_string(),
            ],
        }
    }

    fn models(mut self, labels: &[&str]) -> Self {
        for l in labels {
            self.v.push("--embeddings".into());
            self.v.push(format!("{l}={}", fixture().join(format!("{l}.vec")).display()));
        }
        self
    }

    fn with(mut self, extra: &[&str]) -> Self {
        self.v.extend(extra.iter().map(|s| s.to_string()));
        self
    }

    fn strs(&self) -> Vec<&str> {
        self.v.iter().map(String::as_str).collect()
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn close(a: &Value, b: f64, what: &str) {
    let a = a.as_f64().unwrap_or_else(|| panic!("{what}: not a number: {a}"));
    assert!((a - b).abs() <= 1e-9, "{what}: {a} vs {b}");
}

fn by_person(records: &Value) -> BTreeMap<String, &Value> {
    records
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["person"].as_str().unwrap().to_owned(), r))
        .collect()
}

const BIG5: [&str; 5] = ["openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"];

#[test]
fn profiles_match_the_reference_implementation() {
    let dir = tempfile::tempdir().unwrap();
    ok(&Args::new("profile", dir.path()).models(&["model", "model2"]).strs());
    let got = read_json(&dir.path().join("profiles.json"));
    let want = expected();

    let batches = got["batches"].as_array().unwrap();
    assert_eq!(batches.len(), 2);
    for batch in batches {
        let label = batch["model_source"].as_str().unwrap();
        let records = by_person(&batch["records"]);
        let reference = want["models"][label]["profiles"].as_array().unwrap();
        assert_eq!(records.len(), reference.len());
        assert_eq!(batch["failures"][0]["person"], "ghost");
        for r in reference {
            let person = r["person"].as_str().unwrap();
            let g = records[person];
            let w = |k: &str| r[k].as_f64().unwrap();
            close(&g["likeability"]["raw"], w("likeability"), "likeability");
            close(&g["efp"]["valence"], w("valence"), "valence");
            close(&g["efp"]["arousal"], w("arousal"), "arousal");
            close(&g["efp"]["ep_raw"], w("ep"), "ep");
            close(&g["efp"]["ep_transformed"], w("ep_transformed"), "ep_transformed");
            for d in BIG5 {
                close(&g["big5"][d], w(d), d);
                close(&g["z"][d], w(&format!("z_{d}")), d);
            }
            for z in ["likeability", "valence", "arousal", "ep"] {
                close(&g["z"][z], w(&format!("z_{z}")), z);
            }
            assert_eq!(g["likeability"]["missing_tokens"], serde_json::json!(["missingword"]));
        }
    }

    let averaged = by_person(&got["averaged"]["records"]);
    for r in want["averaged"].as_array().unwrap() {
        let g = averaged[r["person"].as_str().unwrap()];
        close(&g["likeability"]["raw"], r["likeability"].as_f64().unwrap(), "avg likeability");
        close(&g["efp"]["ep_raw"], r["ep"].as_f64().unwrap(), "avg ep");
        for d in BIG5 {
            close(&g["big5"][d], r[d].as_f64().unwrap(), d);
        }
    }
    assert_eq!(got["averaged"]["model_source"], "averaged");

    let csv = std::fs::read_to_string(dir.path().join("profiles.csv")).unwrap();
    // header + 6 persons x (2 models + averaged)
    assert_eq!(csv.lines().count(), 1 + 18);
}

#[test]
fn validation_groups_and_comparison_match_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    let want = expected();
    let norms = fixture().join("norms.csv").display().to_string();
    ok(&Args::new("validate", dir.path())
        .models(&["model", "model2"])
        .with(&["--norms", &norms])
        .strs());
    let v = read_json(&dir.path().join("validation.json"));
    for entry in v["validations"].as_array().unwrap() {
        let kind = entry["score_kind"].as_str().unwrap();
        let reference = &want["models"][entry["model"].as_str().unwrap()]["validation"][kind];
        close(&entry["r"], reference["r"].as_f64().unwrap(), kind);
        assert_eq!(entry["n_words_used"], reference["n_words_used"]);
        assert_eq!(entry["n_words_missing"], 1);
        let points = std::fs::read_to_string(dir.path().join(entry["points_csv"].as_str().unwrap())).unwrap();
        assert_eq!(points.lines().next(), Some("score,rating"));
        assert_eq!(points.lines().count(), 15);
    }

    ok(&Args::new("groups", dir.path()).models(&["model"]).with(&["--persons", "ada,flo"]).strs());
    let g = read_json(&dir.path().join("groups.json"));
    assert_eq!(g["source"], "model");
    for study in g["studies"].as_array().unwrap() {
        let d = study["dimension"].as_str().unwrap();
        let reference = &want["models"]["model"]["groups"][d];
        for k in ["f_stat", "p_value", "eta_squared"] {
            close(&study["anova"][k], reference[k].as_f64().unwrap(), k);
        }
    }
    let long = std::fs::read_to_string(dir.path().join("groups_long.csv")).unwrap();
    assert_eq!(long.lines().count(), 1 + 6 * 5);
    let radar = std::fs::read_to_string(dir.path().join("radar.csv")).unwrap();
    assert_eq!(radar.lines().count(), 1 + 2 * 5);

    ok(&Args::new("compare", dir.path())
        .models(&["model", "model2"])
        .with(&["--fields", "likeability"])
        .strs());
    let c = read_json(&dir.path().join("comparison.json"));
    close(&c["cross_model"][0]["r"], want["cross_model_likeability_r"].as_f64().unwrap(), "cross r");
    assert_eq!(c["cross_model"].as_array().unwrap().len(), 1);
    // likeability:valence within each model and the average
    assert_eq!(c["within_model"].as_array().unwrap().len(), 3);
}

#[test]
fn compare_and_groups_read_back_profile_output() {
    let dir = tempfile::tempdir().unwrap();
    ok(&Args::new("profile", dir.path()).models(&["model", "model2"]).strs());
    let profiles = dir.path().join("profiles.json").display().to_string();
    let from_file = tempfile::tempdir().unwrap();
    let fresh = tempfile::tempdir().unwrap();
    ok(&Args::new("compare", from_file.path()).with(&["--profiles", &profiles]).strs());
    ok(&Args::new("compare", fresh.path()).models(&["model", "model2"]).strs());
    let a = read_json(&from_file.path().join("comparison.json"));
    let b = read_json(&fresh.path().join("comparison.json"));
    assert_eq!(a["cross_model"], b["cross_model"]);
    assert_eq!(a["within_model"], b["within_model"]);

    ok(&Args::new("groups", from_file.path()).with(&["--profiles", &profiles]).strs());
    assert_eq!(read_json(&from_file.path().join("groups.json"))["source"], "averaged");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = Args::new("profile", dir.path()).models(&["model", "model2"]);
    let snapshot = || {
        ["profiles.json", "profiles.csv"].map(|f| std::fs::read(dir.path().join(f)).unwrap())
    };
    ok(&args.strs());
    let first = snapshot();
    ok(&args.strs());
    assert_eq!(first, snapshot());
}

#[test]
fn missing_roster_fails_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = Args::new("profile", dir.path()).models(&["model"]);
    args.v[2] = "/no/such/roster.csv".into();
    let out = run(&args.strs());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/no/such/roster.csv"), "{err}");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn failed_runs_leave_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&Args::new("groups", dir.path())
        .models(&["model"])
        .with(&["--persons", "ada,nobody"])
        .strs());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nobody"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    let out = run(&Args::new("validate", dir.path()).models(&["model"]).strs());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--norms"));
}

#[test]
fn outputs_validate_against_the_published_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let norms = fixture().join("norms.csv").display().to_string();
    ok(&Args::new("profile", dir.path()).models(&["model", "model2"]).strs());
    ok(&Args::new("validate", dir.path()).models(&["model"]).with(&["--norms", &norms]).strs());
    ok(&Args::new("compare", dir.path()).models(&["model", "model2"]).strs());
    ok(&Args::new("groups", dir.path()).models(&["model", "model2"]).strs());
    for (output, schema_file) in [
        ("profiles.json", "profile.schema.json"),
        ("validation.json", "validation.schema.json"),
        ("comparison.json", "comparison.schema.json"),
        ("groups.json", "groups.schema.json"),
    ] {
        let validator = jsonschema::validator_for(&schema(schema_file)).unwrap();
        let doc = read_json(&dir.path().join(output));
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{output}: {errors:?}");
        assert_eq!(doc["schema_version"], "1");
    }
    // the schemas are strict enough to reject a broken document
    let validator = jsonschema::validator_for(&schema("profile.schema.json")).unwrap();
    let mut doc = read_json(&dir.path().join("profiles.json"));
    doc["batches"][0]["records"][0]["domain"] = "sports".into();
    assert!(!validator.is_valid(&doc));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "embeddings = [\"model={}\"]\nroster = \"{}\"\nlexicon_dir = \"{}\"\nddof = 1\noov = \"skip\"\nformat = \"json\"\nout = \"{}\"\n",
            f.join("model.vec").display(),
            f.join("roster.csv").display(),
            f.join("lexicons").display(),
            dir.path().join("from_config").display(),
        ),
    )
    .unwrap();
    let cfg = config.display().to_string();
    ok(&["profile", "--config", &cfg]);
    let doc = read_json(&dir.path().join("from_config/profiles.json"));
    assert_eq!(doc["metadata"]["config"]["scoring"]["ddof"], 1);
    assert!(!dir.path().join("from_config/profiles.csv").exists());

    let flagged = dir.path().join("from_flags").display().to_string();
    ok(&["profile", "--config", &cfg, "--ddof", "0", "--out", &flagged]);
    let doc = read_json(&dir.path().join("from_flags/profiles.json"));
    assert_eq!(doc["metadata"]["config"]["scoring"]["ddof"], 0);

    std::fs::write(&config, "no_such_key = 1\n").unwrap();
    let out = run(&["profile", "--config", &cfg]);
    assert!(!out.status.success());
}

#[test]
fn data_dir_environment_variable_supplies_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    std::fs::copy(fixture().join("roster.csv"), data.join("roster.csv")).unwrap();
    std::fs::create_dir(data.join("lexicons")).unwrap();
    for e in std::fs::read_dir(fixture().join("lexicons")).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), data.join("lexicons").join(e.file_name())).unwrap();
    }
    let out_dir = dir.path().join("out");
    let model = format!("model={}", fixture().join("model.vec").display());
    let out = Command::new(env!("CARGO_BIN_EXE_lexiprofile"))
        .args(["profile", "--embeddings", &model, "--out", out_dir.to_str().unwrap()])
        .env("LEXIPROFILE_DATA_DIR", &data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&out_dir.join("profiles.json"));
    assert_eq!(doc["batches"][0]["records"].as_array().unwrap().len(), 6);
    assert!(doc["metadata"]["warnings"].as_array().unwrap().iter().all(|w| !w
        .as_str()
        .unwrap()
        .contains("placeholder")));
}

#[test]
fn bundled_placeholders_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let roster = f.join("roster.csv").display().to_string();
    let model = format!("model={}", f.join("model.vec").display());
    let out_dir = dir.path().display().to_string();
    // the bundled lexicons barely overlap the fixture vocabulary
    let out = run(&["profile", "--roster", &roster, "--embeddings", &model, "--out", &out_dir]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("model"), "{err}");

    let allow = dir.path().join("tokens.txt");
    ok(&["export-allowlist", "--roster", &roster, "--output", allow.to_str().unwrap()]);
    let tokens = std::fs::read_to_string(&allow).unwrap();
    assert!(tokens.lines().any(|t| t == "sincere"));
    assert!(tokens.lines().any(|t| t == "ghost"));
    let mut sorted: Vec<&str> = tokens.lines().collect();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted, tokens.lines().collect::<Vec<_>>());
}
