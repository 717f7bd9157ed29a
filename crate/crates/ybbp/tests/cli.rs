use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use ybbp::cli::parse_family;
use ybbp::config::{ExperimentConfig, SchemeChoice};
use ybbp::io::{self, ObservedFile};
use ybbp_core::abc::Observed;
use ybbp_core::observation::{extract_basic, extract_extended};
use ybbp_core::LawFamily;

fn ybbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ybbp")).args(args).output().unwrap()
}

fn write_config(dir: &Path, value: &Value) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, value.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn base(generations: usize) -> Value {
    json!({
        "seed": 42,
        "model": {
            "theta": {"alpha": 0.46, "beta": 0.005, "m_R": 3.2, "m_r": 4.0},
            "initial": {"females": 10, "males_R": 5, "males_r": 5},
            "generations": generations,
            "retry_until": "both_positive"
        },
        "abc": {"pool_size": 20000, "tolerance_quantile": 0.01},
        "predictive": {"horizon": 1, "replicates": 5}
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulated_files_reload_as_the_same_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base(12));
    let out = dir.path().join("sim");
    let res = ybbp(&["simulate", "--config", &cfg, "-o", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", stderr(&res));

    let path = io::read_path(&out.join("path.csv")).unwrap();
    assert_eq!(path.horizon(), 12);
    let basic = ObservedFile::read(&out.join("observed_basic.csv")).unwrap();
    let extended = ObservedFile::read(&out.join("observed_extended.csv")).unwrap();
    assert!(basic.extended.is_none());
    assert_eq!(basic, extended.basic_only());

    match basic.to_observed(SchemeChoice::Auto, Path::new("b")).unwrap() {
        Observed::Basic(b) => assert_eq!(b, extract_basic(&path).unwrap()),
        other => panic!("expected basic, got {other:?}"),
    }
    let variant = extended.implied_variant().unwrap();
    match extended.to_observed(SchemeChoice::Auto, Path::new("e")).unwrap() {
        Observed::Extended(e, v) => {
            assert_eq!(v, variant);
            assert_eq!(e, extract_extended(&path, variant).unwrap());
        }
        other => panic!("expected extended, got {other:?}"),
    }
}

#[test]
fn zero_generations_write_only_the_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base(0);
    cfg["model"].as_object_mut().unwrap().remove("retry_until");
    let cfg = write_config(dir.path(), &cfg);
    let out = dir.path().join("sim");
    assert!(ybbp(&["simulate", "--config", &cfg, "-o", out.to_str().unwrap()]).status.success());
    let path = io::read_path(&out.join("path.csv")).unwrap();
    assert_eq!(path.states.len(), 1);
    assert_eq!((path.states[0].females, path.states[0].males()), (10, 10));
    assert!(!out.join("observed_basic.csv").exists());
    assert!(!out.join("observed_extended.csv").exists());
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base(10));
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        assert!(ybbp(&["simulate", "--config", &cfg, "--seed", seed, "-o", out.to_str().unwrap()]).status.success());
        std::fs::read(out.join("path.csv")).unwrap()
    };
    assert_eq!(run("a", "7"), run("b", "7"));
    assert_ne!(run("a", "7"), run("c", "8"));
}

#[test]
fn infer_predict_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base(12));
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    assert!(ybbp(&["simulate", "--config", &cfg, "-o", &p("sim")]).status.success());

    let res = ybbp(&["infer", "--config", &cfg, "--scheme", "basic", "--plots", "--observed", &p("sim/observed_basic.csv"), "-o", &p("inf")]);
    assert!(res.status.success(), "{}", stderr(&res));
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(text.contains("scheme basic"), "{text}");
    assert!(text.contains("P(beta=0|data)"), "{text}");

    let summary: Value = serde_json::from_str(&std::fs::read_to_string(p("inf/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["meta"]["seed"], 42);
    assert_eq!(summary["run"]["scheme"], "basic");
    assert_eq!(summary["parameters"]["beta"]["hpd_support"], "positive_part");
    assert_eq!(summary["parameters"]["alpha"]["hpd_support"], "all");
    assert!(summary["parameters"]["beta"]["spike_probability"].is_number());
    let n = summary["run"]["n_accepted"].as_u64().unwrap();
    let groups = summary["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 2);
    for g in groups {
        assert_eq!(g["a1"].as_u64().unwrap() + g["a2"].as_u64().unwrap(), n);
    }
    for f in ["posterior.csv", "posterior.json", "density_alpha.csv", "group_A1_beta.csv", "group_A2_m_r.csv", "plots/alpha.svg"] {
        assert!(dir.path().join("inf").join(f).exists(), "{f} missing");
    }
    let (posterior, sidecar) = io::read_posterior(Path::new(&p("inf/posterior.csv"))).unwrap();
    assert_eq!(posterior.draws.len() as u64, n);
    assert_eq!(sidecar.unwrap().n_accepted as u64, n);

    let res = ybbp(&["predict", "--config", &cfg, "--posterior", &p("inf/posterior.csv"), "--observed", &p("sim/observed_basic.csv"), "-o", &p("pred")]);
    assert!(res.status.success(), "{}", stderr(&res));
    let rows = std::fs::read_to_string(p("pred/predictive.csv")).unwrap();
    let data_rows = rows.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(data_rows as u64, n * 5);
    assert!(dir.path().join("pred/predictive_summary.json").exists());

    let res = ybbp(&["report", "--config", &cfg, "-o", &p("rep"), &p("inf")]);
    assert!(res.status.success(), "{}", stderr(&res));
    let csv = std::fs::read_to_string(p("rep/report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("run,law_family,n_accepted,alpha_mean,alpha_hpd")));
    assert!(csv.lines().any(|l| l.starts_with("inf,poisson,")));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();

    let mut no_seed = base(5);
    no_seed.as_object_mut().unwrap().remove("seed");
    let cfg = write_config(dir.path(), &no_seed);
    let res = ybbp(&["simulate", "--config", &cfg, "-o", &p("x")]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("seed"));

    let mut typo = base(5);
    typo["abc"]["pool_sise"] = json!(10);
    let cfg = write_config(dir.path(), &typo);
    let res = ybbp(&["simulate", "--config", &cfg, "-o", &p("x")]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("abc"), "{}", stderr(&res));

    let cfg = write_config(dir.path(), &base(5));
    let res = ybbp(&["infer", "--config", &cfg, "--observed", &p("missing.csv"), "-o", &p("x")]);
    assert_eq!(res.status.code(), Some(2));

    let res = ybbp(&["predict", "--config", &cfg, "-o", &p("x")]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("posterior"));

    std::fs::create_dir(p("empty")).unwrap();
    let res = ybbp(&["report", "--config", &cfg, "-o", &p("x"), &p("empty")]);
    assert_eq!(res.status.code(), Some(2));

    assert!(ybbp(&["simulate", "--config", &cfg, "-o", &p("sim")]).status.success());
    let res = ybbp(&["infer", "--config", &cfg, "--workers", "0", "-o", &p("x"), "--observed", &p("sim/observed_basic.csv")]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn too_few_compatible_paths_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base(10));
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    assert!(ybbp(&["simulate", "--config", &cfg, "-o", &p("sim")]).status.success());
    let res = ybbp(&[
        "infer", "--config", &cfg, "--pool-size", "2000", "--quantile", "0.001",
        "--observed", &p("sim/observed_extended.csv"), "-o", &p("inf"),
    ]);
    assert_eq!(res.status.code(), Some(3), "{}", stderr(&res));
    assert!(stderr(&res).contains("abc.pool_size"));
}

#[test]
fn report_rejects_mixed_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base(12));
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    assert!(ybbp(&["simulate", "--config", &cfg, "-o", &p("sim")]).status.success());
    let obs = p("sim/observed_basic.csv");
    assert!(ybbp(&["infer", "--config", &cfg, "--observed", &obs, "-o", &p("runs/a")]).status.success());
    assert!(ybbp(&["infer", "--config", &cfg, "--observed", &obs, "--quantile", "0.02", "-o", &p("runs/b")]).status.success());
    let res = ybbp(&["report", "--config", &cfg, "-o", &p("rep"), &p("runs")]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("tolerance_quantile"), "{}", stderr(&res));
}

#[test]
fn worker_count_and_output_dir_do_not_change_the_hash() {
    let mut a = base(5);
    let b = a.clone();
    a["workers"] = json!(8);
    a["io"] = json!({"output_dir": "/tmp/elsewhere"});
    let ha = ExperimentConfig::from_json(&a.to_string()).unwrap().hash();
    let hb = ExperimentConfig::from_json(&b.to_string()).unwrap().hash();
    assert_eq!(ha, hb);
}

#[test]
fn law_family_flags() {
    assert_eq!(parse_family("poisson").unwrap(), LawFamily::Poisson);
    assert_eq!(parse_family("negbin:2.5").unwrap(), LawFamily::Negbin { k: 2.5 });
    assert!(parse_family("negbin:-1").is_err());
    assert!(parse_family("geometric").is_err());
}
