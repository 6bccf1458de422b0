use std::process::{Command, Output};

fn sqr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqr")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn summary_row(text: &str) -> Vec<String> {
    text.lines().last().unwrap().split(',').map(String::from).collect()
}

#[test]
fn quiet_ideal_network_is_clean() {
    let o = sqr(&["simulate", "--attack", "none", "--T", "1", "--gamma", "0", "--mu", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0-1");
    assert_eq!(row[3], "0.00000000");
    assert_eq!(row[6], "0.00000000");
    assert_eq!(row[8], "false");
    assert_eq!(summary_row(&text)[0], "false");
}

#[test]
fn path_attack_is_detected() {
    let o = sqr(&[
        "simulate", "--seed", "11", "--K", "4000", "--H2", "400", "--H3", "1000", "--attack", "path", "--eta-path", "0.5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let d3: f64 = row[6].parse().unwrap();
    assert!((d3 - 0.25).abs() <= 3.0 * (0.25 * 0.75 / 1000.0f64).sqrt(), "{d3}");
    assert_eq!(row[8], "true");
    assert_eq!(summary_row(&text)[0], "true");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\nK = 600\nnum_nodes = 4\npairs = \"0-1,2-3\"\nH2 = 100\nH3 = 100\nloss_db = 0.5\ngamma = 0.01\nmu = 0.01\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let o = sqr(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--H3",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert!(rows[1].starts_with("0-1,100,"));
    assert!(rows[2].starts_with("2-3,100,"));
    assert!(rows[1].split(',').nth(4) == Some("200"));
    assert!(rows[3].starts_with("total,200,"));
}

#[test]
fn bad_config_names_key_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "T = 0.9\nloss_db = 1.0\n").unwrap();
    let o = sqr(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`T`"));

    std::fs::write(&cfg, "eta_path = 2.0\nattack = \"path\"\n").unwrap();
    let o = sqr(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta_path"));

    let o = sqr(&["simulate", "--K", "10", "--H2", "6", "--H3", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`K`"));
}

#[test]
fn missing_config_file_is_io_error() {
    let o = sqr(&["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn figure2_usage_errors() {
    let o = sqr(&["figure2", "--loss-min", "2", "--loss-max", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sqr(&["figure2", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sqr(&["figure2", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn figure2_defaults_and_short_range() {
    let text = stdout(&sqr(&["figure2"]));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 62);
    assert!(rows[61].ends_with(",1.00000000"));
    let text = stdout(&sqr(&["figure2", "--loss-max", "0.5"]));
    for row in text.lines().skip(1) {
        let g: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(g < 1.0);
    }
}

#[test]
fn overhead_example_row() {
    let o = sqr(&["overhead", "--K", "100", "--H3", "20", "--eta", "0.2", "--trials", "1000000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let (exact, bound, mc, se) = (row[3], row[4], row[5], row[6]);
    assert!(exact <= bound);
    assert!((mc - exact).abs() < 3.0 * se);
    assert!(text.contains("\nepsilon,eta_max,alpha,beta,g1,H_sum,H_paper_constant\n0.0100000000,0.100000000,93,93,186,"));
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let o = sqr(&["verify", "--d", "2", "--samples", "30", "--scatter-samples", "50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("invariant,status,detail\n"));
    assert!(!text.contains(",FAIL,"));
    assert!(text.contains("\ndisturbance,indistinguishability\n"));

    let o = sqr(&["verify", "--samples", "30", "--scatter-samples", "50", "--inject-violation"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("round_trip_constraint_no_type3_disturbance,FAIL,"));

    let o = sqr(&["verify", "--d", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
