use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn adr(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adr")).args(args).arg("--out").arg(out).output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.cfg");
    fs::write(&path, "seeds = 2\ndata.samples_per_cluster = 40\nensemble.trees = 10,50,100,200\nablation.trees = 10\n")
        .unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn missing_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = adr(&["adr-select", "--input", "/nonexistent/data.csv"], &dir.path().join("o"));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn bad_config_value_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = adr(&["gen", "--set", "seeds=lots"], &dir.path().join("o"));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeds"));
}

#[test]
fn gen_then_select_on_the_written_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let gen = dir.path().join("gen");
    assert!(adr(&["gen", "--config", &cfg], &gen).status.success());
    let (header, rows) = csv_rows(&gen.join("data.csv"));
    assert_eq!(header.split(',').count(), 13);
    assert_eq!(rows.len(), 80);

    let sel = dir.path().join("sel");
    let input = gen.join("data.csv");
    let args = ["adr-select", "--input", input.to_str().unwrap(), "--header", "--label-column", "13"];
    assert!(adr(&args, &sel).status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sel.join("report.json")).unwrap()).unwrap();
    for subset in report["subsets"].as_array().unwrap() {
        let features = subset["features"].as_array().unwrap();
        assert!(features.iter().all(|f| (1..=12).contains(&f.as_u64().unwrap())));
    }
    let (header, rows) = csv_rows(&sel.join("partition.csv"));
    assert_eq!(header, "row,supersample");
    assert_eq!(rows.len(), 80);
    assert_eq!(rows[0][0], "1");
}

#[test]
fn ensemble_model_has_four_rows_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("em");
    assert!(adr(&["ensemble-model", "--config", &small_config(dir.path())], &out).status.success());
    let (header, rows) = csv_rows(&out.join("results.csv"));
    assert_eq!(header, "method,trees,mean_acc,std_acc,n");
    for method in ["adr-el", "rf"] {
        let trees: Vec<&str> = rows.iter().filter(|r| r[0] == method).map(|r| r[1].as_str()).collect();
        assert_eq!(trees, ["10", "50", "100", "200"], "{method}");
    }
}

#[test]
fn transfer_has_nine_fractions_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tr");
    let args = ["transfer", "--config", &small_config(dir.path()), "--set", "data.samples_per_cluster=30"];
    assert!(adr(&args, &out).status.success());
    let (_, rows) = csv_rows(&out.join("results.csv"));
    for method in ["adr-ttl", "gk-ttl", "mi-ttl"] {
        assert_eq!(rows.iter().filter(|r| r[0] == method).count(), 9, "{method}");
    }
}

#[test]
fn ablation_deltas_are_finite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ab");
    assert!(adr(&["ablation", "--config", &small_config(dir.path())], &out).status.success());
    let (header, rows) = csv_rows(&out.join("deltas.csv"));
    assert_eq!(header, "learner,trees,adr_minus_gk,adr_minus_mi");
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[2].parse::<f64>().unwrap().is_finite() && r[3].parse::<f64>().unwrap().is_finite());
    }
}
