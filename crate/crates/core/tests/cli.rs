use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_shadow-rds");

fn run(config: &Path, env_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(["run", "--config"]).arg(config).env_remove("SHADOW_RDS_OUTPUT_DIR");
    if let Some(d) = env_dir {
        cmd.env("SHADOW_RDS_OUTPUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn shadow_run_writes_files_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!("scenario = \"uniform-diag\"\nkind = \"shadow\"\nc = 0.0\noutput_dir = \"{}\"\n", out.display()),
    );
    let o = run(&cfg, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("shadow.csv")).unwrap();
    assert!(csv.starts_with("n,delta_n,defect_n,deviation,bound,pass\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 1 + 65);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["results"]["L"].as_f64(), Some(3.0));
    assert!(summary["results"]["max_scaled_deviation"].as_f64().unwrap() <= 3.0);
    assert!(out.join("iterations.csv").exists());
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("o{k}"));
        let cfg = write_config(
            tmp.path(),
            &format!("c{k}.toml"),
            &format!("scenario = \"nonuniform-layered\"\nkind = \"shadow\"\nseed = 7\noutput_dir = \"{}\"\n", out.display()),
        );
        assert_eq!(run(&cfg, None).status.code(), Some(0));
        texts.push((fs::read(out.join("shadow.csv")).unwrap(), fs::read(out.join("iterations.csv")).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn environment_overrides_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!("scenario = \"remark-scalar\"\nkind = \"lyapunov\"\nN = 500\nsamples = 3\noutput_dir = \"{}\"\n", tmp.path().join("ignored").display()),
    );
    let env_dir = tmp.path().join("from-env");
    assert_eq!(run(&cfg, Some(&env_dir)).status.code(), Some(0));
    let csv = fs::read_to_string(env_dir.join("lyapunov.csv")).unwrap();
    assert!(csv.starts_with("orbit_id,direction,N,exponent,residual\n"));
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn conservation_on_remark_reports_minus_log_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!("scenario = \"remark-scalar\"\nkind = \"conservation\"\noutput_dir = \"{}\"\n", out.display()),
    );
    assert_eq!(run(&cfg, None).status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(out.join("conservation.csv")).unwrap();
    let forward: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).filter(|r| &r[0] == "forward").collect();
    assert_eq!(forward.len(), 1);
    assert_eq!(&forward[0][2], "backward");
    assert!((forward[0][4].parse::<f64>().unwrap() + 2f64.ln()).abs() < 1e-9);
    assert_eq!(&forward[0][5], "true");
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, body) in [
        "scenario = \"no-such\"\nkind = \"shadow\"\n",
        "scenario = \"uniform-diag\"\nkind = \"dance\"\n",
        "scenario = \"uniform-diag\"\nkind = \"shadow\"\nbogus = 1\n",
        "not toml at all",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("c{i}.toml"), body);
        assert_eq!(run(&cfg, None).status.code(), Some(2), "{body}");
    }
    assert_eq!(run(&tmp.path().join("missing.toml"), None).status.code(), Some(2));
    let o = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_certificate_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // c = 0.2 gives q = 1.2, so the scenario cannot be certified
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!("scenario = \"uniform-diag\"\nkind = \"shadow\"\nc = 0.2\noutput_dir = \"{}\"\n", tmp.path().display()),
    );
    let o = run(&cfg, None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("contraction"));
}

#[test]
fn list_and_selftest() {
    let o = Command::new(BIN).arg("list-scenarios").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["uniform-diag", "uniform-rot-coupled", "nonuniform-layered", "remark-scalar"] {
        assert!(text.contains(name));
    }
    let o = Command::new(BIN).arg("selftest").output().unwrap();
    assert!(o.status.success());
    assert!(!String::from_utf8(o.stdout).unwrap().contains("[FAIL]"));
}

#[test]
fn invariants_on_all_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!("scenario = \"all\"\nkind = \"invariants\"\noutput_dir = \"{}\"\n", out.display()),
    );
    let o = run(&cfg, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("invariants.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("true")));
}
