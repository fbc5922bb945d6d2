//! The `scatter` binary: exit codes, scenario files and stage decomposition.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scatter_cli::artifacts;
use scatter_cli::Scenario;

fn scatter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scatter")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scatter-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// ex1a on coarse meshes so a full run takes a few seconds.
fn small_scenario(dir: &Path) -> String {
    let mut s = Scenario::builtin("ex1a").unwrap();
    s.forward.h = 0.02;
    s.sampling.h = 0.04;
    s.inversion_h = 0.04;
    s.noise = 0.1;
    let path = dir.join("small.txt");
    std::fs::write(&path, s.to_text()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn unknown_scenario_exits_with_one() {
    let out = scatter(&["forward", "--scenario", "no-such-scenario", "--out", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("built-in"));
}

#[test]
fn malformed_scenario_exits_with_two_and_names_the_line() {
    let dir = scratch("bad");
    let path = dir.join("bad.txt");
    let text = Scenario::builtin("ex1a").unwrap().to_text().replace("physics.k = ", "physics.k = abc");
    std::fs::write(&path, &text).unwrap();
    let line = text.lines().position(|l| l.starts_with("physics.k")).unwrap() + 1;
    let out = scatter(&["gen-scenario", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("line {line}")));
}

#[test]
fn invalid_override_exits_with_one() {
    let out = scatter(&["gen-scenario", "--scenario", "ex1a", "--mu", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_scenario_round_trips() {
    for name in scatter_cli::scenario::BUILTIN {
        let out = scatter(&["gen-scenario", "--scenario", name]);
        assert!(out.status.success());
        let parsed = Scenario::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
        assert_eq!(parsed, Scenario::builtin(name).unwrap());
    }
}

#[test]
fn missing_inputs_fail_cleanly() {
    let dir = scratch("missing");
    let out = scatter(&["invert", "--scenario", "ex1a", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn stages_reproduce_the_pipeline() {
    let dir = scratch("stages");
    let scenario = small_scenario(&dir);
    let (one, staged) = (dir.join("one"), dir.join("staged"));
    let (one, staged) = (one.to_str().unwrap(), staged.to_str().unwrap());
    assert!(scatter(&["pipeline", "--scenario", &scenario, "--out", one]).status.success());
    for stage in ["forward", "sample", "invert"] {
        let out = scatter(&[stage, "--scenario", &scenario, "--out", staged]);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let files = artifacts::pipeline_files(Path::new(one));
    assert!(files.len() >= 10);
    for f in files {
        let name = f.file_name().unwrap();
        let a = std::fs::read(&f).unwrap();
        let b = std::fs::read(Path::new(staged).join(name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
    let _ = std::fs::remove_dir_all(&dir);
}
