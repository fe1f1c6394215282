use std::process::{Command, Output};

fn gaussfid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussfid")).args(args).output().expect("spawn gaussfid")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn fidelity_value(args: &[&str]) -> f64 {
    let mut all = vec!["fidelity"];
    all.extend_from_slice(args);
    let out = gaussfid(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out).split_whitespace().next().unwrap().parse().unwrap()
}

fn curve(state: &str, extra: &[&str]) -> Vec<(f64, f64)> {
    let mut args = vec!["curve", "--state", state];
    args.extend_from_slice(extra);
    let out = gaussfid(&args);
    assert_eq!(code(&out), 0, "{state}: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,fidelity,method,error_estimate"));
    lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols.len(), 4, "{l}");
            (cols[0].parse().unwrap(), cols[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn fidelity_examples() {
    assert!((fidelity_value(&["--state", "number:1", "--gamma", "1"]) - 10.0 / 27.0).abs() < 1e-10);
    assert!((fidelity_value(&["--state", "coherent:0", "--gamma", "2"]) - 0.5).abs() < 1e-10);
    let a = fidelity_value(&["--state", "number:2", "--gamma", "1", "--method", "a-gamma"]);
    let b = fidelity_value(&["--state", "number:2", "--gamma", "1", "--method", "closed-form"]);
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn thermal_entanglement_by_purification() {
    // default dim for this route is the two-mode guard
    let out = gaussfid(&["fidelity", "--state", "thermal:1", "--gamma", "1", "--method", "direct"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let fields: Vec<&str> = text.split_whitespace().collect();
    let (value, err): (f64, f64) = (fields[0].parse().unwrap(), fields[2].parse().unwrap());
    assert_eq!(fields[1], "direct_overlap");
    assert!((value - 0.4).abs() <= err, "{value} +- {err}");
    assert!(err < 1e-9);
}

#[test]
fn fidelity_line_has_value_method_error() {
    let out = gaussfid(&["fidelity", "--state", "number:1", "--gamma", "1"]);
    let text = stdout(&out);
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields.len(), 3, "{text}");
    assert_eq!(fields[0], "0.37037037037");
    assert_eq!(fields[1], "weyl_quadrature");
    assert!(fields[2].parse::<f64>().unwrap() < 1e-6);
}

#[test]
fn fidelity_json() {
    let out = gaussfid(&["fidelity", "--state", "vacuum", "--gamma", "2", "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["fidelity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["method"], "weyl_quadrature");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&gaussfid(&["fidelity", "--state", "number:1", "--gamma", "-1"])), 2);
    assert_eq!(code(&gaussfid(&["fidelity", "--state", "fock:1", "--gamma", "1"])), 2);
    assert_eq!(code(&gaussfid(&["channel", "--state", "number:", "--gamma", "1"])), 2);
    assert_eq!(code(&gaussfid(&["fidelity", "--state", "number:1", "--gamma", "1", "--method", "a-gamma", "--dim", "64"])), 2);
    assert_eq!(code(&gaussfid(&["curve", "--state", "vacuum", "--gamma-min", "2", "--gamma-max", "1"])), 2);
    assert_eq!(code(&gaussfid(&["curve", "--state", "vacuum", "--steps", "1"])), 2);
    // sampling at γ = 0 is degenerate
    assert_eq!(code(&gaussfid(&["curve", "--state", "vacuum", "--method", "mc", "--samples", "10"])), 2);
    // squeezed n̄ = 1 does not fit in 8 levels
    assert_eq!(code(&gaussfid(&["fidelity", "--state", "squeezed:1", "--gamma", "1", "--dim", "8"])), 3);
}

#[test]
fn curve_two_steps_starts_at_one() {
    for state in ["number:1", "squeezed:1", "coherent:0.5,0.5", "superposition01"] {
        let rows = curve(state, &["--gamma-min", "0", "--gamma-max", "2", "--steps", "2"]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], (0.0, 1.0), "{state}");
        assert_eq!(rows[1].0, 2.0);
    }
}

#[test]
fn curve_is_deterministic_and_writes_files() {
    let args = ["curve", "--state", "number:2", "--steps", "9", "--gamma-min", "0.25", "--method", "mc", "--samples", "2000", "--seed", "3"];
    let a = gaussfid(&args);
    let b = gaussfid(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let mut with_out = args.to_vec();
    with_out.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let c = gaussfid(&with_out);
    assert_eq!(code(&c), 0);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn curve_gamma_ascending() {
    let rows = curve("number:1", &["--steps", "17"]);
    assert_eq!(rows.len(), 17);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    assert_eq!(rows[0].0, 0.0);
    assert_eq!(rows[16].0, 4.0);
}

#[test]
fn figure_one_stacking() {
    let stack: Vec<Vec<(f64, f64)>> =
        ["vacuum", "squeezed:1", "number:1", "number:2"].iter().map(|s| curve(s, &["--steps", "17"])).collect();
    for k in 1..17 {
        for pair in stack.windows(2) {
            let (g, upper) = pair[0][k];
            let lower = pair[1][k].1;
            assert!(upper > lower, "gamma={g}: {upper} !> {lower}");
        }
    }
}

#[test]
fn figure_two_ordering() {
    let ent = curve("thermal:1:entanglement", &["--steps", "17"]);
    let ens = curve("thermal:1:ensemble", &["--steps", "17"]);
    let coh = curve("coherent:0", &["--steps", "17"]);
    for k in 1..17 {
        let g = ent[k].0;
        assert!(ent[k].1 < ens[k].1 && ens[k].1 < coh[k].1, "gamma={g}");
        assert!((ent[k].1 - 1.0 / (1.0 + 1.5 * g)).abs() < 1e-6, "gamma={g}");
        assert!((ens[k].1 - 1.0 / (1.0 + 3.0 * g + g * g / 4.0).sqrt()).abs() < 1e-6, "gamma={g}");
    }
}

fn channel_dump(args: &[&str]) -> (Vec<String>, Vec<(usize, usize, f64, f64)>) {
    let mut all = vec!["channel"];
    all.extend_from_slice(args);
    let out = gaussfid(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let header: Vec<String> = text.lines().take_while(|l| l.starts_with('#')).map(String::from).collect();
    let mut body = text.lines().skip(header.len());
    assert_eq!(body.next(), Some("row,col,re,im"));
    let entries = body
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].parse().unwrap(), c[1].parse().unwrap(), c[2].parse().unwrap(), c[3].parse().unwrap())
        })
        .collect();
    (header, entries)
}

#[test]
fn channel_vacuum_becomes_thermal() {
    let (header, entries) = channel_dump(&["--state", "vacuum", "--gamma", "1", "--dim", "24"]);
    assert!(header.iter().any(|l| l.starts_with("# trace=")));
    assert!(header.iter().any(|l| l.starts_with("# min_eigenvalue=")));
    assert_eq!(entries.len(), 24 * 24);
    // thermal n̄ = 1/2: p_n = (2/3)(1/3)^n
    for (i, j, re, im) in entries {
        let want = if i == j { (2.0 / 3.0) * (1.0f64 / 3.0).powi(i as i32) } else { 0.0 };
        assert!((re - want).abs() < 1e-11 && im.abs() < 1e-11, "[{i},{j}] {re} vs {want}");
    }
}

#[test]
fn channel_identity_round_trips() {
    let (_, entries) = channel_dump(&["--state", "superposition01", "--gamma", "0", "--dim", "4"]);
    for (i, j, re, im) in entries {
        let want = if i < 2 && j < 2 { 0.5 } else { 0.0 };
        assert!((re - want).abs() < 1e-15 && im == 0.0, "[{i},{j}]");
    }
}

#[test]
fn channel_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.json");
    let out = gaussfid(&["channel", "--state", "number:1", "--gamma", "0.5", "--dim", "16", "--json", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["dim"], 16);
    assert!((v["trace"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["min_eigenvalue"].as_f64().unwrap() > -1e-12);
}

#[test]
fn verify_scaling_single_case() {
    let out = gaussfid(&["verify", "--suite", "scaling", "--gamma", "1", "--state", "number:1", "--json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let report = &v[0];
    assert_eq!(report["suite"], "scaling");
    assert!(report["checks"].as_u64().unwrap() >= 1);
    assert!(report["failures"].as_array().unwrap().is_empty());
    // scaling tolerance is 1e-6, so a ratio below 0.1 means residual < 1e-7
    assert!(report["worst_ratio"].as_f64().unwrap() < 0.1);
}

#[test]
fn verify_bound_random_states() {
    let out = gaussfid(&["verify", "--suite", "bound", "--trials", "50", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).starts_with("PASS bound"));
}
