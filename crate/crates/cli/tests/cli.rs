use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ellipse_contact::{oracle_distance, OracleSettings, PairConfiguration};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ellipse-contact"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse::<f64>().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

const PAIR: [&str; 14] = [
    "--a1",
    "2",
    "--b1",
    "1",
    "--a2",
    "2",
    "--b2",
    "1",
    "--theta1",
    "0",
    "--theta2",
    "30",
    "--theta-d",
    "10",
];

#[test]
fn distance_simple_cases() {
    let o = run(&[
        "distance",
        "--a1",
        "1",
        "--b1",
        "1",
        "--a2",
        "1",
        "--b2",
        "1",
        "--theta1",
        "0",
        "--theta2",
        "0",
        "--theta-d",
        "0",
    ]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "d "), 2.0);

    let o = run(&[
        "distance",
        "--a1",
        "2",
        "--b1",
        "1",
        "--a2",
        "2",
        "--b2",
        "1",
        "--theta1",
        "0",
        "--theta2",
        "0",
        "--theta-d",
        "0",
        "--json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["d"].as_f64().unwrap(), 4.0);
}

#[test]
fn distance_matches_oracle() {
    let mut args = vec!["distance"];
    args.extend(PAIR);
    args.push("--json");
    let v: Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
    let d = v["d"].as_f64().unwrap();
    let cfg = PairConfiguration::from_degrees((2.0, 1.0), (2.0, 1.0), 0.0, 30.0, 10.0).unwrap();
    let o = oracle_distance(&cfg, &OracleSettings::default()).unwrap();
    assert!((d - o).abs() / o < 1e-7);
    assert!(v["residuals"]["on_ellipse2"].as_f64().unwrap() < 1e-9);
}

#[test]
fn invalid_input_exits_2() {
    let o = run(&[
        "distance",
        "--a1",
        "1",
        "--b1",
        "2",
        "--a2",
        "1",
        "--b2",
        "1",
        "--theta1",
        "0",
        "--theta2",
        "0",
        "--theta-d",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("a >= b > 0"));
    assert_eq!(run(&["distance", "--a1", "x"]).status.code(), Some(2));
}

#[test]
fn contact_and_overlap() {
    let o = run(&[
        "contact",
        "--a1",
        "2",
        "--b1",
        "1",
        "--a2",
        "2",
        "--b2",
        "1",
        "--theta1",
        "0",
        "--theta2",
        "0",
        "--theta-d",
        "0",
        "--json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["contact_point"], serde_json::json!([2.0, 0.0]));

    let verdict = |x: &str, y: &str| {
        let o = run(&[
            "overlap", "--a1", "1", "--b1", "1", "--a2", "1", "--b2", "1", "--theta1", "0", "--theta2", "0", "--x", x,
            "--y", y,
        ]);
        assert!(o.status.success());
        stdout(&o).lines().next().unwrap().to_string()
    };
    assert_eq!(verdict("1.5", "0"), "overlapping");
    assert_eq!(verdict("0", "-2"), "tangent");
    assert_eq!(verdict("2.5", "0"), "disjoint");
    assert!(verdict("0", "0").starts_with("overlapping"));
}

fn batch_rows(out: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn batch_csv_with_rejects_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(
        &input,
        "id,a1,b1,a2,b2,theta1,theta2,theta_d\n\
         c,1,1,1,1,0,0,0\n\
         t,2,1,2,1,0,0,0\n\
         bad,1,2,1,1,0,0,0\n\
         g,2,1,2,1,0,30,10\n\
         worse,1,1,1\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let rejects = dir.path().join("rejects.txt");
    let o = run(&[
        "batch",
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--rejects",
        rejects.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rej = fs::read_to_string(&rejects).unwrap();
    assert!(rej.contains("line 4:") && rej.contains("line 6:"), "{rej}");

    let first = fs::read_to_string(&out).unwrap();
    let rows = batch_rows(&first);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][8].parse::<f64>().unwrap(), 2.0);
    assert_eq!(rows[1][8].parse::<f64>().unwrap(), 4.0);

    // the output is a valid input; d must come back bit for bit
    let again = dir.path().join("again.csv");
    let o = run(&["batch", out.to_str().unwrap(), "-o", again.to_str().unwrap()]);
    assert!(o.status.success());
    let second = fs::read_to_string(&again).unwrap();
    for (a, b) in batch_rows(&first).iter().zip(batch_rows(&second).iter()) {
        assert_eq!(
            a[8].parse::<f64>().unwrap().to_bits(),
            b[8].parse::<f64>().unwrap().to_bits()
        );
    }
    assert_eq!(first, second);
}

#[test]
fn batch_jsonl_and_rejection_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    fs::write(
        &input,
        "{\"id\": 1, \"a1\": 2, \"b1\": 1, \"a2\": 2, \"b2\": 1, \"theta1\": 0, \"theta2\": 90, \"theta_d\": 0}\n\
         {\"a1\": 1, \"b1\": 1, \"a2\": 3, \"b2\": 3, \"theta1\": 0, \"theta2\": 0, \"theta_d\": 45}\n",
    )
    .unwrap();
    let o = run(&["batch", input.to_str().unwrap()]);
    assert!(o.status.success());
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "1");
    assert!((lines[0]["d"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!((lines[1]["d"].as_f64().unwrap() - 4.0).abs() < 1e-12);

    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "a1,b1,a2,b2,theta1,theta2,theta_d\n1,2,1,1,0,0,0\nnope,1,1,1,0,0,0\n1,1,1,1,0,0,0\n",
    )
    .unwrap();
    let o = run(&["batch", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn excluded_area_values() {
    let area = |angle: &str| field(&stdout(&run(&["excluded-area", "--angle", angle])), "");
    assert!((area("30") - 26.4).abs() <= 0.05);
    assert!((area("0") - 25.1327).abs() <= 1e-3);
    assert!((area("90") - 29.7).abs() <= 0.05);

    let o = run(&["excluded-area", "--sweep", "0:90:1", "--panels", "256"]);
    let text = stdout(&o);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 91);
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(run(&["excluded-area", "--sweep", "0:90"]).status.code(), Some(2));
}

#[test]
fn curves() {
    let o = run(&[
        "boundary", "--a1", "1", "--b1", "1", "--a2", "2", "--b2", "2", "-n", "64",
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("theta_deg,x,y\n"));
    for l in text.lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1].hypot(v[2]) - 3.0).abs() < 1e-12);
    }
    assert_eq!(text.lines().count(), 65);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("locus.json");
    let o = run(&[
        "locus",
        "--theta2",
        "45",
        "-n",
        "90",
        "--json",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 90);
    assert_eq!(v["closed"], true);
    assert_eq!(run(&["locus", "-n", "4"]).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = run(&["verify", "--trials", "100", "--seed", "7"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("failures     0"));
    assert_eq!(run(&["verify", "--trials", "10", "--tol", "0"]).status.code(), Some(1));
    let o = run(&["verify", "--trials", "50", "--stratum", "circles", "--tol", "1e-12"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(run(&["verify", "--stratum", "squares"]).status.code(), Some(2));
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn simulate_runs_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.conf",
        "n_particles = 16\nspecies = 2 1 1\nbox = 16 16\nmax_translation = 0.3\n\
         max_rotation_deg = 10\nseed = 4\nsweeps = 20\nsample_every = 10\n",
    );
    let traj = |name: &str| {
        let out = dir.path().join(name);
        let o = run(&["simulate", "-c", &cfg, "-o", out.to_str().unwrap(), "--audit"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out).unwrap()
    };
    let a = traj("a.jsonl");
    assert_eq!(a, traj("b.jsonl"));
    let lines: Vec<Value> = a.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1]["sweep"], 10);
    assert_eq!(lines[1]["positions"].as_array().unwrap().len(), 16);
    assert!(lines[1]["S"].as_f64().unwrap() <= 1.0);
    assert_eq!(lines[3]["summary"]["audit_failures"], 0);

    let dense = write_config(
        dir.path(),
        "dense.json",
        r#"{"n_particles": 64, "species": [{"a": 2, "b": 1, "fraction": 1}], "box": [20, 20],
            "max_translation": 0.1, "max_rotation_deg": 1, "seed": 1, "sweeps": 1}"#,
    );
    let o = run(&["simulate", "-c", &dense]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("packing"));
}

#[test]
fn thread_cap_is_validated() {
    let o = bin()
        .args(["excluded-area", "--angle", "30"])
        .env("ELLIPSE_CONTACT_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = bin()
        .args(["excluded-area"])
        .env("ELLIPSE_CONTACT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
