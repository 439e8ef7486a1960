use std::path::PathBuf;
use std::process::{Command, Output};

const REFERENCE: &str = "\
p = 3
n = 1
s = 1
f_support = [2] t1; [-2] t2
p_support = [1] [1] 1
t_bar = 1, 1
";

fn write_config(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("unitroot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_unitroot"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("UNITROOT_THREADS", t),
        None => cmd.env_remove("UNITROOT_THREADS"),
    };
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
}

#[test]
fn weights_on_a_symmetric_pair() {
    let cfg = write_config("weights.conf", "p = 3\nn = 1\nf_support = [2] t1; [-2] t2\nt_bar = 1, 2\nW_sym = 2\n");
    let o = run(&["weights", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert_eq!(value(&r, "weights.f.D"), Some("2"));
    for (u, w) in [("0", "0"), ("1", "1/2"), ("-1", "1/2"), ("2", "1"), ("-3", "3/2"), ("4", "2")] {
        assert_eq!(value(&r, &format!("weights.f.w[{u}]")), Some(w), "w({u})");
    }
    assert_eq!(value(&r, "weights.f.w[5]"), None);
}

#[test]
fn expsum_reference() {
    let cfg = write_config("expsum.conf", REFERENCE);
    let o = run(&["expsum", "--config", cfg.to_str().unwrap(), "--tdeg", "2"], None);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert_eq!(value(&r, "expsum.S1[1]"), Some("1+z"));
    assert_eq!(value(&r, "expsum.S2[1]"), Some("-4-3z"));
    assert_eq!(value(&r, "expsum.S3[1]"), None);
    assert_eq!(value(&r, "input.d_T"), Some("2"));
}

#[test]
fn verify_reference_passes() {
    let cfg = write_config("verify.conf", REFERENCE);
    let out = cfg.with_extension("report");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = std::fs::read_to_string(&out).unwrap();
    assert_eq!(value(&r, "verify.agreement"), Some("pass"));
    assert_eq!(value(&r, "verify.joint"), Some("3"));
    for route in ["unit_l", "beta_det", "f_ratio", "total_det"] {
        let v = value(&r, &format!("verify.{route}.value")).unwrap();
        assert_eq!(v, "[1,2,1;0,0,0] mod 3^3", "{route}");
    }
    assert_eq!(value(&r, "status.result"), Some("pass"));
}

#[test]
fn config_errors_exit_2() {
    let cfg = write_config("composite.conf", &REFERENCE.replace("p = 3", "p = 4"));
    let o = run(&["weights", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 1, column 5") && err.contains("composite"), "{err}");

    let cfg = write_config("zero.conf", &REFERENCE.replace("t_bar = 1, 1", "t_bar = 0, 1"));
    let o = run(&["weights", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 6, column 9: zero residue"));

    let o = run(&["weights", "--config", "/nonexistent/unitroot.conf"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["weights", "--config", cfg.to_str().unwrap()], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn too_few_kappa_digits_exit_3() {
    let cfg = write_config("short.conf", &format!("{REFERENCE}M = 2\n"));
    let o = run(&["unitroot", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("precision exhausted"));
}

#[test]
fn failed_check_exits_1() {
    // one fiber degree is far too few for three certified digits
    let cfg = write_config("shallow.conf", &format!("{REFERENCE}max_fiber_degree = 1\n"));
    let o = run(&["lfunction", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let r = stdout(&o);
    assert_eq!(value(&r, "lfunction.unit.certified"), Some("fail"));
    assert_eq!(value(&r, "status.result"), Some("fail"));
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let cfg = write_config("det.conf", REFERENCE);
    for cmd in ["dworkdet", "unitroot"] {
        let one = run(&[cmd, "--config", cfg.to_str().unwrap()], Some("1"));
        let four = run(&[cmd, "--config", cfg.to_str().unwrap()], Some("4"));
        assert_eq!(one.status.code(), Some(0));
        assert_eq!(stdout(&one), stdout(&four), "{cmd}");
        assert_eq!(stdout(&one), stdout(&run(&[cmd, "--config", cfg.to_str().unwrap()], None)));
    }
}

#[test]
fn precision_flag_changes_the_target() {
    let cfg = write_config("prec.conf", REFERENCE);
    let o = run(&["unitroot", "--config", cfg.to_str().unwrap(), "--precision", "3"], None);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert_eq!(value(&r, "input.N"), Some("3"));
    assert!(value(&r, "unitroot.f_ratio").unwrap().ends_with("mod 3^3"));
}
