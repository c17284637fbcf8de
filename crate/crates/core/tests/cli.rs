mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use evoorder::cnf::parse_dimacs;

fn evoorder(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoorder")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_reports_steps_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("f.evoset"), "a\na b\n").unwrap();
    fs::write(dir.path().join("ord.txt"), "0 1\n").unwrap();
    fs::write(dir.path().join("bad.txt"), "1 0\n").unwrap();
    fs::write(dir.path().join("short.txt"), "0\n").unwrap();

    let o = evoorder(dir.path(), &["check", "f.evoset", "ord.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "step 0: set 0 new=a old=-\nstep 1: set 1 new=b old=a\nACCEPTED\n");

    let o = evoorder(dir.path(), &["check", "f.evoset", "bad.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "step 0: set 1 new=a old=-\nREJECTED at step 1: no-new-element\n");

    let o = evoorder(dir.path(), &["check", "f.evoset", "short.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: short.txt: "), "{}", stderr(&o));
}

#[test]
fn format_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cnf"), "p cnf 2 1\n1 2 0\n").unwrap();
    let o = evoorder(dir.path(), &["sat", "bad.cnf"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o), "error: bad.cnf: line 2: clause has 2 literals; exactly 3 are required\n");

    fs::write(dir.path().join("bad.evoset"), "a\nb {} c\n").unwrap();
    let o = evoorder(dir.path(), &["solve", "bad.evoset"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: bad.evoset: line 2: "));

    let o = evoorder(dir.path(), &["explode"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn duplicate_tokens_warn_but_load() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("f.evoset"), "a a b\n").unwrap();
    let o = evoorder(dir.path(), &["solve", "f.evoset", "-v"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("duplicate element \"a\""));
    assert_eq!(stdout(&o), "EVOLUTIONARY\n0\nstates=1 memo_hits=0 precheck=none\n");
}

#[test]
fn solve_modes_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("split.evoset"), "a\nb\n").unwrap();
    let o = evoorder(dir.path(), &["solve", "split.evoset", "-v"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "NOT EVOLUTIONARY\nstates=0 memo_hits=0 precheck=disconnected\n");

    let o = evoorder(dir.path(), &["solve", "split.evoset", "--no-precheck", "-v"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).ends_with("precheck=none\n"));

    fs::write(dir.path().join("chain.evoset"), "b c\na\na b\n").unwrap();
    let o = evoorder(dir.path(), &["solve", "chain.evoset", "--brute-force", "--witness", "w.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "EVOLUTIONARY\n1 2 0\n");
    assert_eq!(fs::read_to_string(dir.path().join("w.txt")).unwrap(), "1 2 0\n");
}

#[test]
fn reduce_solve_extract_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("phi.cnf"), "c satisfiable\np cnf 3 2\n1 2 -3 0\n-1 -2 3 0\n").unwrap();

    let o = evoorder(dir.path(), &["reduce", "phi.cnf", "--out", "i.evoset", "--map", "i.map"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let map = fs::read_to_string(dir.path().join("i.map")).unwrap();
    assert!(map.starts_with("vars 3\nclauses 4\nduplicated yes\nset 0 T\nset 1 Tprime\nset 2 L 1\n"));

    let o = evoorder(dir.path(), &["solve", "i.evoset", "--witness", "w.txt"]);
    assert_eq!(o.status.code(), Some(0));

    let o = evoorder(dir.path(), &["check", "i.evoset", "w.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("ACCEPTED\n"));

    let o = evoorder(dir.path(), &["extract", "i.map", "w.txt", "-v"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().next().unwrap();
    let values: Vec<bool> =
        line.split_whitespace().map(|t| t.parse::<i64>().unwrap()).take_while(|&v| v != 0).map(|v| v > 0).collect();
    let formula = parse_dimacs(&fs::read_to_string(dir.path().join("phi.cnf")).unwrap()).unwrap();
    assert!(common::satisfies(&formula, &values));
    assert_eq!(out.lines().count(), 1 + 3);
}

#[test]
fn sat_forward_check_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("phi.cnf"), "p cnf 2 2\n-1 -1 2 0\n1 2 2 0\n").unwrap();

    let o = evoorder(dir.path(), &["sat", "phi.cnf"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 2 0\n");
    fs::write(dir.path().join("alpha.txt"), stdout(&o)).unwrap();

    assert_eq!(
        evoorder(dir.path(), &["reduce", "phi.cnf", "--out", "i.evoset", "--map", "i.map"]).status.code(),
        Some(0)
    );
    let o = evoorder(dir.path(), &["forward", "i.map", "alpha.txt", "--out", "ord.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(evoorder(dir.path(), &["check", "i.evoset", "ord.txt"]).status.code(), Some(0));
    let o = evoorder(dir.path(), &["extract", "i.map", "ord.txt"]);
    assert_eq!(stdout(&o), "1 2 0\n");

    // A falsifying assignment produces an ordering the verifier rejects.
    fs::write(dir.path().join("bad.txt"), "-1 -2 0\n").unwrap();
    assert_eq!(evoorder(dir.path(), &["forward", "i.map", "bad.txt", "--out", "bad_ord.txt"]).status.code(), Some(0));
    assert_eq!(evoorder(dir.path(), &["check", "i.evoset", "bad_ord.txt"]).status.code(), Some(1));
    let o = evoorder(dir.path(), &["extract", "i.map", "bad_ord.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("untrusted"));
}

#[test]
fn unsatisfiable_formula_reduces_to_non_evolutionary_family() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("phi.cnf"), "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").unwrap();
    let o = evoorder(dir.path(), &["sat", "phi.cnf"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "UNSAT\n");
    for extra in [&[][..], &["--no-duplicate"][..]] {
        let mut args = vec!["reduce", "phi.cnf", "--out", "i.evoset", "--map", "i.map"];
        args.extend_from_slice(extra);
        assert_eq!(evoorder(dir.path(), &args).status.code(), Some(0));
        assert_eq!(evoorder(dir.path(), &["solve", "i.evoset"]).status.code(), Some(1));
    }
}

#[test]
fn generators_are_deterministic_and_consumable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "family", "--sets", "5", "--universe", "5", "--density", "0.4", "--seed", "1"];
    let a = evoorder(dir.path(), &args);
    let b = evoorder(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    fs::write(dir.path().join("g.evoset"), &a.stdout).unwrap();
    let code = evoorder(dir.path(), &["solve", "g.evoset"]).status.code();
    assert!(matches!(code, Some(0) | Some(1)));

    let args = ["gen", "cnf", "--vars", "3", "--clauses", "5", "--seed", "7"];
    let a = evoorder(dir.path(), &args);
    assert_eq!(a.stdout, evoorder(dir.path(), &args).stdout);
    fs::write(dir.path().join("g.cnf"), &a.stdout).unwrap();
    assert!(matches!(evoorder(dir.path(), &["sat", "g.cnf"]).status.code(), Some(0) | Some(1)));
}

#[test]
fn reduce_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("phi.cnf"), "p cnf 3 2\n1 2 -3 0\n-1 2 3 0\n").unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let fam = format!("i{k}.evoset");
        let map = format!("i{k}.map");
        assert_eq!(evoorder(dir.path(), &["reduce", "phi.cnf", "--out", &fam, "--map", &map]).status.code(), Some(0));
        outputs.push((fs::read(dir.path().join(&fam)).unwrap(), fs::read(dir.path().join(&map)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}
