use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sts(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sts"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, args: &[&str], name: &str) -> PathBuf {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", name]);
    let o = sts(&full, dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(name)
}

#[test]
fn verify_fano() {
    let tmp = TempDir::new().unwrap();
    gen(tmp.path(), &["pg", "2"], "fano.sts");
    let o = sts(&["verify", "fano.sts"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "complete order=7 blocks=7\n");
}

#[test]
fn fano_file_is_bit_exact() {
    let tmp = TempDir::new().unwrap();
    let path = gen(tmp.path(), &["pg", "2"], "fano.sts");
    let text = fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sts v=7 complete=1");
    assert_eq!(lines.len(), 8);
    let mut sorted = lines[1..].to_vec();
    sorted.sort_by_key(|l| {
        l.split(' ')
            .skip(1)
            .map(|w| w.parse::<u32>().unwrap())
            .collect::<Vec<_>>()
    });
    assert_eq!(sorted, lines[1..].to_vec());
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn pg3_subsystem_listing() {
    let tmp = TempDir::new().unwrap();
    gen(tmp.path(), &["pg", "3"], "pg3.sts");
    let o = sts(&["subsystems", "pg3.sts"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let count = |k: &str| {
        out.lines()
            .filter(|l| l.starts_with(&format!("subsys order={k} ")))
            .count()
    };
    assert_eq!((count("3"), count("7"), count("15")), (35, 15, 1));
    assert_eq!(out.lines().last().unwrap(), "total=51 nontrivial_proper=15 truncated=0");
}

#[test]
fn double_hexagon_13_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    gen(tmp.path(), &["hexleave", "13", "--seed", "7"], "hex13.sts");
    let a = sts(&["double", "hex13.sts", "--seed", "1", "-o", "a.sts"], tmp.path());
    let b = sts(&["double", "hex13.sts", "--seed", "1", "-o", "b.sts"], tmp.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let text = fs::read(tmp.path().join("a.sts")).unwrap();
    assert_eq!(text, fs::read(tmp.path().join("b.sts")).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("sts v=27 complete=1\n"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("cert doubling u=13 seed=1 "))
            .count(),
        1
    );

    let o = sts(&["verify", "a.sts", "--against", "hex13.sts"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rebuilt=1 violations=0 unsafe_cosets=0 pass"));

    let o = sts(&["free", "a.sts"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn tampered_certificate_fails() {
    let tmp = TempDir::new().unwrap();
    gen(tmp.path(), &["hexleave", "13", "--seed", "7"], "hex13.sts");
    sts(&["double", "hex13.sts", "-o", "d.sts"], tmp.path());
    let text = fs::read_to_string(tmp.path().join("d.sts")).unwrap();
    let tampered: String = text
        .lines()
        .map(|l| match l.strip_prefix("cert ") {
            Some(_) => {
                let (head, rest) = l.split_once("phi=").unwrap();
                let (phi, tail) = rest.split_once(' ').unwrap();
                let mut phi: Vec<&str> = phi.split(',').collect();
                phi.swap(3, 7);
                format!("{head}phi={} {tail}\n", phi.join(","))
            }
            None => format!("{l}\n"),
        })
        .collect();
    fs::write(tmp.path().join("t.sts"), tampered).unwrap();
    let o = sts(&["verify", "t.sts", "--against", "hex13.sts"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn generators_are_seed_deterministic() {
    let tmp = TempDir::new().unwrap();
    for kind in [["random", "19"], ["random-partial", "17"], ["hexleave", "15"]] {
        let a = sts(&["gen", kind[0], kind[1], "--seed", "42"], tmp.path());
        let b = sts(&["gen", kind[0], kind[1], "--seed", "42"], tmp.path());
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn embed_writes_steps_and_certificates() {
    let tmp = TempDir::new().unwrap();
    gen(tmp.path(), &["hexleave", "13", "--seed", "7"], "hex13.sts");
    let o = sts(&["embed", "hex13.sts", "--steps", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("status complete order=27 steps=1"));
    let step = fs::read_to_string(tmp.path().join("hex13.step1.sts")).unwrap();
    assert!(step.starts_with("sts v=27 complete=1\n"));
    let cert = fs::read_to_string(tmp.path().join("hex13.cert")).unwrap();
    assert_eq!(cert.lines().count(), 1);

    let o = sts(&["embed", "hex13.sts", "--steps", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn embed_respects_max_order() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("k13.sts"), "sts v=13 complete=0\n").unwrap();
    let o = sts(&["embed", "k13.sts", "--steps", "3", "--max-order", "100"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn iso_and_free_exit_codes() {
    let tmp = TempDir::new().unwrap();
    gen(tmp.path(), &["pg", "2"], "fano.sts");
    gen(tmp.path(), &["pg", "3"], "pg3.sts");
    gen(tmp.path(), &["bose", "15"], "bose15.sts");
    assert_eq!(sts(&["iso", "fano.sts", "fano.sts"], tmp.path()).status.code(), Some(0));
    assert_eq!(
        sts(&["iso", "pg3.sts", "bose15.sts"], tmp.path()).status.code(),
        Some(1)
    );
    assert_eq!(sts(&["free", "pg3.sts"], tmp.path()).status.code(), Some(1));
    assert_eq!(
        sts(&["free", "pg3.sts", "--forbid", "fano.sts"], tmp.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        sts(&["free", "fano.sts", "--forbid", "pg3.sts"], tmp.path())
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn structured_format_round_trips() {
    let tmp = TempDir::new().unwrap();
    let o = sts(
        &["gen", "bose", "15", "--format", "structured", "-o", "b.json"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let o = sts(&["verify", "b.json"], tmp.path());
    assert_eq!(stdout(&o), "complete order=15 blocks=35\n");
    let o = sts(&["verify", "b.json", "--format", "structured"], tmp.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["blocks"], 35);
}

#[test]
fn input_errors_exit_4() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("dup.sts"), "sts v=7 complete=0\nb 0 1 2\nb 0 1 3\n").unwrap();
    let o = sts(&["verify", "dup.sts"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(sts(&["verify", "missing.sts"], tmp.path()).status.code(), Some(4));
    assert_eq!(sts(&["gen", "pg"], tmp.path()).status.code(), Some(4));
    assert_eq!(sts(&["--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn amalgamate_over_a_block() {
    let tmp = TempDir::new().unwrap();
    gen(tmp.path(), &["pg", "2"], "left.sts");
    gen(tmp.path(), &["pg", "2"], "right.sts");
    gen(tmp.path(), &["pg", "3"], "pg3.sts");
    fs::write(tmp.path().join("glue.txt"), "0 0\n1 1\n2 2\n").unwrap();
    let o = sts(
        &[
            "amalgamate",
            "left.sts",
            "right.sts",
            "--glue",
            "glue.txt",
            "--forbid",
            "pg3.sts",
            "--steps",
            "1",
        ],
        tmp.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("amalgam order=24 blocks=39 witness_order=13"));
    assert!(stdout(&o).contains("status truncated order=55 steps=1"));
    assert!(stdout(&o).contains("check step=1 left=1 right=1 witness=1 class_free=1"));
    assert!(tmp.path().join("amalgam.cert").exists());
}
