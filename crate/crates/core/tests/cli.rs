use std::fs;
use std::path::{Path, PathBuf};

use ptnet::cli::cli_main;
use ptnet::fixtures::{ADDITION_NET, APSUM_RM};
use ptnet::format::{parse_net, TraceDocument};
use ptnet::reachability::RgDocument;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn ptnet(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ptnet").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn workspace() -> (TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let rm = dir.path().join("apsum.rm");
    let net = dir.path().join("addition.net");
    fs::write(&rm, APSUM_RM).unwrap();
    fs::write(&net, ADDITION_NET).unwrap();
    (dir, rm, net)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compiled_apsum_decodes_to_ten() {
    let (dir, rm, _) = workspace();
    for (backend, mode) in
        [("inhibitor", "petri+inhibitor"), ("priority", "petri+priority"), ("strong-sleptsov", "sleptsov/strong")]
    {
        let net = dir.path().join(format!("apsum-{backend}.net"));
        let manifest = dir.path().join(format!("apsum-{backend}.json"));
        let c = ptnet(&["compile", s(&rm), "--backend", backend, "-o", s(&net), "--manifest", s(&manifest)]);
        assert_eq!(c.code, 0, "{}", c.err);
        assert!(c.out.contains(&format!("--mode {mode}")), "{}", c.out);

        let r = ptnet(&["run", s(&net), "--mode", mode, "--manifest", s(&manifest)]);
        assert_eq!(r.code, 0, "{}", r.err);
        assert!(r.out.contains("termination: dead"), "{}", r.out);
        assert!(r.out.contains("control: q13"), "{}", r.out);
        assert!(r.out.lines().any(|l| l == "r1 = 10"), "{}", r.out);
    }
}

#[test]
fn compile_set_overrides_input() {
    let (dir, rm, _) = workspace();
    let net = dir.path().join("a.net");
    let manifest = dir.path().join("a.json");
    let c = ptnet(&[
        "compile",
        s(&rm),
        "--backend",
        "inhibitor",
        "-o",
        s(&net),
        "--manifest",
        s(&manifest),
        "--set",
        "r2=6",
    ]);
    assert_eq!(c.code, 0, "{}", c.err);
    let r = ptnet(&["run", s(&net), "--mode", "petri+inhibitor", "--manifest", s(&manifest)]);
    assert!(r.out.lines().any(|l| l == "r1 = 21"), "{}", r.out);
}

#[test]
fn rm_run_prints_registers() {
    let (_dir, rm, _) = workspace();
    let r = ptnet(&["rm-run", s(&rm)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("halted after"), "{}", r.out);
    assert!(r.out.contains("at pc 13"));
    assert!(r.out.lines().any(|l| l == "r1 = 10"));
    assert!(r.out.lines().any(|l| l == "r2 = 0"));

    let r = ptnet(&["rm-run", s(&rm), "--set", "r2=10"]);
    assert!(r.out.lines().any(|l| l == "r1 = 55"), "{}", r.out);

    let r = ptnet(&["rm-run", s(&rm), "--max-steps", "3"]);
    assert_eq!(r.code, 0);
    assert!(r.out.starts_with("budget after 3 steps"), "{}", r.out);
}

#[test]
fn verify_zerocheck_passes() {
    let r = ptnet(&["verify-zerocheck", "--x-max", "50"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.lines().filter(|l| l.starts_with("x=")).count(), 51);
    assert!(r.out.contains("zero check verified for x in 0..=50"));
}

#[test]
fn selftest_passes() {
    let r = ptnet(&["selftest"]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    assert_eq!(r.out.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{}", r.out);
}

#[test]
fn rg_writes_dot_and_json() {
    let (dir, _, net) = workspace();
    let dot = dir.path().join("rg.dot");
    let json = dir.path().join("rg.json");
    let r = ptnet(&["rg", s(&net), "--mode", "sleptsov", "--dot", s(&dot), "--json", s(&json)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("nodes: 4\nedges: 4\ndead: 1\ntruncated: false"), "{}", r.out);

    let dot = fs::read_to_string(dot).unwrap();
    assert!(dot.starts_with("digraph rg {"));
    assert_eq!(dot.matches(" -> ").count(), 4);
    assert!(dot.contains("label=\"2·t1\"") && dot.contains("label=\"3·t2\""));

    let doc: RgDocument = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(doc.nodes.len(), 4);
    assert_eq!(doc.edges.len(), 4);
}

#[test]
fn rg_budget_truncates() {
    let (_dir, _, net) = workspace();
    let r = ptnet(&["rg", s(&net), "--mode", "petri", "--budget", "5"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("truncated: true"), "{}", r.out);
    assert_eq!(ptnet(&["rg", s(&net), "--mode", "petri", "--budget", "0"]).code, 2);
}

#[test]
fn run_trace_replays() {
    let (dir, _, net) = workspace();
    let trace = dir.path().join("trace.json");
    let r = ptnet(&["run", s(&net), "--mode", "salwicki-sleptsov/weak", "--seed", "7", "--trace", s(&trace)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("final: {5·p3}"), "{}", r.out);
    let doc: TraceDocument = serde_json::from_str(&fs::read_to_string(trace).unwrap()).unwrap();
    assert_eq!(doc.seed, Some(7));
    let (n, _) = parse_net(ADDITION_NET).unwrap();
    let replayed = doc.replay(&n).unwrap();
    assert_eq!(n.format_marking(replayed.final_marking()), "{5·p3}");
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let (dir, _, net) = workspace();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let trace = dir.path().join(format!("t{i}.json"));
        let dot = dir.path().join(format!("g{i}.dot"));
        let run = ptnet(&["run", s(&net), "--mode", "salwicki-sleptsov/weak", "--seed", "42", "--trace", s(&trace)]);
        let rg = ptnet(&["rg", s(&net), "--mode", "petri", "--dot", s(&dot)]);
        outputs.push((run.out, rg.out, fs::read(trace).unwrap(), fs::read(dot).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn usage_errors_exit_two() {
    let (dir, rm, net) = workspace();
    let missing = dir.path().join("missing.net");
    let r = ptnet(&["rg", s(&missing), "--mode", "petri"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("missing.net"), "{}", r.err);

    assert_eq!(ptnet(&["run", s(&net), "--mode", "petri/strong"]).code, 2);
    assert_eq!(ptnet(&["run", s(&net), "--mode", "petri", "--policy", "first", "--seed", "1"]).code, 2);
    assert_eq!(ptnet(&["compile", s(&rm), "--backend", "bogus", "-o", "x.net"]).code, 2);
    assert_eq!(ptnet(&["rm-run", s(&rm), "--set", "r9=1"]).code, 2);
    assert_eq!(ptnet(&["frobnicate"]).code, 2);

    let bad = dir.path().join("bad.net");
    fs::write(&bad, "place p1\narc p1 -> nowhere\n").unwrap();
    let r = ptnet(&["run", s(&bad), "--mode", "petri"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("line 2, column 11"), "{}", r.err);
}

#[test]
fn runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("source.net");
    fs::write(&source, "place p1\ntrans t1\narc t1 -> p1\n").unwrap();
    let r = ptnet(&["run", s(&source), "--mode", "sleptsov"]);
    assert_eq!(r.code, 1, "{}", r.err);
    assert!(r.err.contains("unbounded"), "{}", r.err);

    let inhib = dir.path().join("inhib.net");
    fs::write(&inhib, "place p1\ntrans t1\narc p1 -> t1\ninhib p1 -o t1\n").unwrap();
    assert_ne!(ptnet(&["run", s(&inhib), "--mode", "petri"]).code, 0);

    let rm = dir.path().join("trap.rm");
    fs::write(&rm, "registers 1\n1: Q 1\n").unwrap();
    let r = ptnet(&["rm-run", s(&rm)]);
    assert_eq!(r.code, 1, "{}", r.err);
}

#[test]
fn help_exits_zero() {
    let r = ptnet(&["--help"]);
    assert_eq!(r.code, 0);
    for sub in ["run", "rg", "compile", "rm-run", "verify-zerocheck", "selftest"] {
        assert!(r.out.contains(sub), "{sub} missing from help");
    }
}
