use std::process::{Command, Output};

fn spir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spir")).args(args).output().expect("spir runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn retrieve_reports_capacity() {
    let o = spir(&["retrieve", "--n", "4", "--m", "2", "--t", "2", "--k-files", "2", "--want", "1", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("rate: 1/4 (capacity 1/4)"), "{out}");
    assert!(out.contains("matches stored file: yes"));
    assert!(out.contains("round 2:"));
}

#[test]
fn retrieve_writes_a_replayable_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.txt");
    let mut args: Vec<&str> = "retrieve --n 5 --m 2 --t 1 --want 2 --seed 11 --transcript".split(' ').collect();
    args.push(path.to_str().unwrap());
    let o = spir(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# spir-transcript v1 n=5 m=2 t=1 k=2 q=7 want=2 seed=11"));
    let t = spir_core::sim::Transcript::read_from(text.as_bytes()).unwrap();
    assert_eq!(spir_core::sim::replay(&t).unwrap(), t);
}

#[test]
fn invalid_configs_exit_two() {
    let o = spir(&["retrieve", "--n", "3", "--m", "2", "--t", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("N must be ≥ M+T"));

    let o = spir(&["retrieve", "--n", "4", "--m", "2", "--t", "2", "--q", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("modulus must be prime > N"));

    let o = spir(&["retrieve", "--n", "4", "--m", "2", "--t", "2", "--want", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audit_exit_codes() {
    let o = spir(&["audit", "--mode", "db", "--n", "2", "--m", "1", "--t", "1", "--k-files", "2", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: PASS"));

    let o = spir(&["audit", "--mode", "user", "--structural", "--n", "8", "--m", "3", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));

    for mutant in ["no-mask", "short-mask"] {
        let o = spir(&["audit", "--mode", "db", "--mutant", mutant, "--n", "2", "--m", "1", "--t", "1", "--q", "3"]);
        assert_eq!(o.status.code(), Some(1), "{mutant}");
        assert!(stdout(&o).contains("witness:"));
    }

    let o = spir(&["audit", "--mode", "user", "--mutant", "no-randomization", "--n", "2", "--m", "1", "--t", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn audit_ceiling_exits_three_with_count() {
    let o = spir(&["audit", "--mode", "db", "--n", "4", "--m", "2", "--t", "2", "--q", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("3814697265625"), "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_spir"))
        .args(["audit", "--mode", "db", "--n", "2", "--m", "1", "--t", "1", "--q", "3"])
        .env("SPIR_ENUM_CEILING", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn entropy_and_codes_audits() {
    let o = spir(&["audit", "--mode", "entropy", "--n", "3", "--m", "1", "--t", "2", "--q", "3", "--points", "1,2,0"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let o = spir(&["audit", "--mode", "codes", "--n", "7", "--m", "3", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Schur product dimension: 4 (expected 4)"));
}

#[test]
fn sweep_rows_meet_the_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = spir(&["sweep", "--n-min", "2", "--n-max", "8", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,M,T,K,q,capacity,achieved_rate,secrecy_bound,achieved_secrecy,decode_ok"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 84);
    for r in &rows {
        assert_eq!(r[5], r[6], "{r:?}");
        assert_eq!(r[7], r[8], "{r:?}");
        assert_eq!(r[9], "true");
    }
    assert!(text.contains("\n4,2,2,2,5,1/4,1/4,3,3,true\n"));
}

#[test]
fn empty_sweep_is_header_only() {
    let o = spir(&["sweep", "--n-min", "6", "--n-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "N,M,T,K,q,capacity,achieved_rate,secrecy_bound,achieved_secrecy,decode_ok\n");
}
