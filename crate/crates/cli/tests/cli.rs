use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn diracep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diracep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    diracep(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    let out = diracep(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(code(&["bands", "--model", "nosuchmodel", "--k-range", "0:1:3"]), 2);
    assert_eq!(code(&["bands", "--model", "h3", "--k-range", "1:0:3"]), 2);
    // two fixed axes leave nothing to sweep
    assert_eq!(code(&["bands", "--model", "h3", "--tau", "1", "--k", "0"]), 2);
    // the imaginary cone has no tau axis
    assert_eq!(code(&["bands", "--model", "imagcone", "--tau-range", "0:1:3"]), 2);
    assert_eq!(
        code(&["isospectral", "--model-a", "haprime", "--model-b", "h3"]),
        2,
        "dimension mismatch"
    );
    assert_eq!(code(&["bands", "--model", "h3", "--config", "/nonexistent/run.cfg"]), 2);
}

#[test]
fn unresolved_degeneracy_exits_4() {
    let out = diracep(&["classify", "--model", "imagcone", "--point", "k=0,g=0"]);
    assert_eq!(out.status.code(), Some(4));
    // the report is still written
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["report"]["label"], "Unresolved");
}

#[test]
fn non_degenerate_point_exits_5() {
    assert_eq!(code(&["classify", "--model", "h3", "--point", "tau=0.5,k=0.3"]), 5);
    assert_eq!(
        code(&["puiseux", "--model", "h3", "--point", "tau=0.5,k=0.3", "--direction", "1,0"]),
        5
    );
}

#[test]
fn classify_reports_dirac_ep() {
    let doc = json(&["classify", "--model", "h3", "--point", "tau=1,k=0"]);
    let r = &doc["report"];
    assert_eq!(r["label"], "DiracEP");
    assert_eq!(r["geometric_multiplicity"], 1);
    assert_eq!(r["algebraic_multiplicity"], 2);
    assert_eq!(doc["config"]["seedless"], true);
}

#[test]
fn csv_round_trips_byte_identically() {
    let out = diracep(&[
        "bands", "--model", "bloch", "--tau", "1.2", "--k-range", "-0.5:0.5:11", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["param1", "band", "re_omega", "im_omega"]
    );
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(&header).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        // every float survives a parse and re-format unchanged
        let fields: Vec<String> = rec
            .iter()
            .enumerate()
            .map(|(i, f)| match i {
                1 => f.parse::<usize>().unwrap().to_string(),
                _ => format!("{:.16e}", f.parse::<f64>().unwrap()),
            })
            .collect();
        writer.write_record(&fields).unwrap();
        rows += 1;
    }
    assert_eq!(rows, 11 * 17);
    assert_eq!(writer.into_inner().unwrap(), out.stdout);
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(&cfg, "# sweep\nmodel = h3\nv0 = 2\nk_range = -0.1:0.1:5\ntau = 1\n");
    let cfg = cfg.to_str().unwrap();

    let v0 = |doc: &Value| doc["config"]["command"]["bands"]["model"]["params"]["v0"].clone();
    let from_file = json(&["--config", cfg, "bands"]);
    assert_eq!(v0(&from_file), "2.0000000000000000e0");
    assert_eq!(from_file["config"]["command"]["bands"]["model"]["model"], "h3");
    let overridden = json(&["--config", cfg, "bands", "--v0", "3", "--k-range", "-0.1:0.1:3"]);
    assert_eq!(v0(&overridden), "3.0000000000000000e0");
    let k = &overridden["bands"]["axes"][1]["values"];
    assert_eq!(k.as_array().unwrap().len(), 3);

    write(Path::new(cfg), "not a key value line\n");
    assert_eq!(code(&["--config", cfg, "bands"]), 2);
}

#[test]
fn output_file_matches_stdout_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["cone", "--model", "hbprime", "--point", "tau=1,k=0", "--format", "csv"];
    let stdout = diracep(&args).stdout;
    let mut paths = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let p = dir.path().join(name);
        let mut with_out = args.to_vec();
        with_out.extend(["--out", p.to_str().unwrap()]);
        assert_eq!(code(&with_out), 0);
        paths.push(p);
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    assert_eq!(a, stdout);
    // no temporary files left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = |t: &'static str| {
        [
            "isospectral", "--model-a", "haprime", "--model-b", "hbprime", "--tau-range",
            "0:2:21", "--k-range", "-0.5:0.5:21", "--threads", t,
        ]
    };
    assert_eq!(diracep(&args("1")).stdout, diracep(&args("4")).stdout);
}

#[test]
fn gnuplot_stub_written_next_to_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bands.csv");
    let status = code(&[
        "bands", "--model", "h3", "--tau-range", "0.9:1.1:5", "--k-range", "-0.1:0.1:5",
        "--format", "csv", "--gnuplot-stub", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(status, 0);
    let stub = std::fs::read_to_string(dir.path().join("bands.gp")).unwrap();
    assert!(stub.contains("bands.csv"));
}
