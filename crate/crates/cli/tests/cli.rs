use std::process::{Command, Output};

fn sgroth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgroth")).args(args).output().expect("run sgroth")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn geval_branching_prints_exact_value() {
    let o = sgroth(&["geval", "--lambda", "1", "--N", "2", "--p", "1/2", "--backend", "branching"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "3/2");
}

#[test]
fn measure_geometric_level_one() {
    let o = sgroth(&["measure", "--phi-geom", "1/2", "--level", "1", "--tol", "1e-10"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let atoms = v["atoms"].as_array().unwrap();
    assert!(atoms.len() > 20);
    for (m, a) in atoms.iter().enumerate() {
        let part = a["partition"].as_array().unwrap();
        let len = part.first().map(|x| x.as_u64().unwrap()).unwrap_or(0);
        assert_eq!(len as usize, m);
        assert_eq!(a["prob"].as_str().unwrap(), format!("1/{}", 1u64 << (m + 1)));
    }
    assert!(v["tail_mass"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn fivevertex_row_partition_function() {
    let o = sgroth(&["fivevertex", "z", "--n", "3", "--lambda", "4,3,2", "--mu", "4,2", "--p", "1/2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1/32");
}

#[test]
fn verify_runs_all_backends() {
    let o = sgroth(&["geval", "--lambda", "2,1", "--N", "30", "--p", "1/3", "--verify"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["agree"], true);
    assert_eq!(v["values"].as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(sgroth(&["geval", "--lambda", "1", "--N", "2", "--p", "3/2"]).status.code(), Some(2));
    let o = sgroth(&["geval", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(sgroth(&["asym", "gaussian", "--sigma", "1", "--x", "0.3", "--tol", "1e-30"]).status.code(), Some(1));
}

#[test]
fn seeded_output_is_byte_identical() {
    let args = ["sample-path", "--alpha", "1", "--N", "12", "--p", "3/10", "--seed", "5"];
    let (a, b) = (sgroth(&args), sgroth(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = sgroth(&["tasep", "run", "--n", "2", "--p", "1/2", "--samples", "2e3"]);
    let d = sgroth(&["tasep", "run", "--n", "2", "--p", "1/2", "--samples", "2e3"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn render_round_trip() {
    let dir = std::env::temp_dir().join(format!("sgroth-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("path.json");
    let svg = dir.join("fig.svg");
    std::fs::write(&path, "[[], [1], [2,1], [2,2,1]]").unwrap();
    let o = sgroth(&["fivevertex", "render", "--path-file", path.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert!(o.status.success());
    let s = std::fs::read_to_string(&svg).unwrap();
    assert!(s.starts_with("<?xml") && s.trim_end().ends_with("</svg>"));
    std::fs::write(&path, "[[], [3,1]]").unwrap();
    assert_eq!(sgroth(&["fivevertex", "render", "--path-file", path.to_str().unwrap()]).status.code(), Some(2));
}
