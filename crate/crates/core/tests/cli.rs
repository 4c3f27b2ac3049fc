use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_sparse-ivf");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("SEISMIC_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn generate(dir: &Path) {
    ok(
        dir,
        &[
            "gen-synthetic", "--docs", "1500", "--num-queries", "20", "--sparse-dim", "3000",
            "--docs-out", "docs.svec", "--queries-out", "queries.svec", "--seed", "5",
        ],
    );
}

fn build(dir: &Path, out: &str, extra: &[&str]) {
    let mut args = vec!["build-index", "--data", "docs.svec", "--out", out, "--sketch-dim", "128"];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

#[test]
fn full_coverage_search_matches_exact_topk() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);
    ok(d, &["exact-topk", "--data", "docs.svec", "--queries", "queries.svec", "--out", "truth.tsv"]);
    build(d, "index.sivf", &["--inverted-out", "index.spii"]);
    ok(d, &["search", "--index", "index.sivf", "--queries", "queries.svec", "--ell", "1.0", "--out", "a.tsv"]);
    ok(
        d,
        &[
            "search", "--index", "index.sivf", "--queries", "queries.svec", "--ell", "1.0", "--sub", "inverted",
            "--inverted", "index.spii", "--out", "b.tsv",
        ],
    );
    let truth = fs::read(d.join("truth.tsv")).unwrap();
    assert_eq!(fs::read(d.join("a.tsv")).unwrap(), truth);
    assert_eq!(fs::read(d.join("b.tsv")).unwrap(), truth);
    assert_eq!(String::from_utf8(truth).unwrap().lines().count(), 20);
}

#[test]
fn bench_emits_one_row_per_point_and_system() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);
    build(d, "index.sivf", &[]);
    let out = ok(
        d,
        &[
            "bench", "--index", "index.sivf", "--queries", "queries.svec",
            "--systems", "ivf-exhaustive,ivf-inverted,linscan-budgeted", "--ell", "0.01,0.02,0.05,0.1",
        ],
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "system,k,ell_fraction,accuracy,qps,frac_evaluated,repeats");
    assert_eq!(lines.len() - 1, 12);
    assert!(lines[1].starts_with("ivf-exhaustive,10,0.01,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);
    let first = fs::read(d.join("docs.svec")).unwrap();
    generate(d);
    assert_eq!(fs::read(d.join("docs.svec")).unwrap(), first);
    for name in ["x", "y"] {
        build(d, &format!("{name}.sivf"), &["--inverted-out", &format!("{name}.spii"), "--seed", "3"]);
        ok(d, &["search", "--index", &format!("{name}.sivf"), "--queries", "queries.svec", "--ell", "0.05", "--out", &format!("{name}.tsv")]);
    }
    for ext in ["sivf", "spii", "tsv"] {
        assert_eq!(fs::read(d.join(format!("x.{ext}"))).unwrap(), fs::read(d.join(format!("y.{ext}"))).unwrap(), "{ext}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);
    build(d, "index.sivf", &[]);
    fs::write(d.join("run.toml"), "k = 7\n[search]\nk = 3\nell = \"0.2\"\n").unwrap();
    let out = ok(d, &["--config", "run.toml", "search", "--index", "index.sivf", "--queries", "queries.svec"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("k = 3") && stderr.contains("ell = 0.2") && stderr.contains("resolved-ell = 300"));
    let first = String::from_utf8(out.stdout).unwrap();
    assert_eq!(first.lines().next().unwrap().split('\t').count(), 6);
    let out = ok(d, &["--config", "run.toml", "search", "--index", "index.sivf", "--queries", "queries.svec", "--k", "2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().next().unwrap().split('\t').count(), 4);
    let out = ok(d, &["--config", "run.toml", "exact-topk", "--data", "docs.svec", "--queries", "queries.svec"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().next().unwrap().split('\t').count(), 14);
}

#[test]
fn build_reports_defaulted_partition_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);
    let out = run(d, &["build-index", "--data", "docs.svec", "--out", "i.sivf", "--sketch-dim", "128"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("partitions = auto") && stderr.contains("resolved-partitions = 155"), "{stderr}");
    let stats = ok(d, &["index-stats", "--index", "i.sivf"]);
    assert!(String::from_utf8_lossy(&stats.stdout).contains("partitions\t155"));
}

#[test]
fn referenced_dataset_resolves_relative_to_index() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);
    fs::create_dir(d.join("idx")).unwrap();
    build(d, "idx/ref.sivf", &["--reference-dataset"]);
    let embedded_dir = PathBuf::from("idx/emb.sivf");
    build(d, embedded_dir.to_str().unwrap(), &[]);
    assert!(fs::metadata(d.join("idx/ref.sivf")).unwrap().len() < fs::metadata(d.join("idx/emb.sivf")).unwrap().len());
    let a = ok(d, &["search", "--index", "idx/ref.sivf", "--queries", "queries.svec"]);
    let b = ok(d, &["search", "--index", "idx/emb.sivf", "--queries", "queries.svec"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
    assert_eq!(run(d, &["--version"]).status.code(), Some(0));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(d, &["search", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(d, &["search", "--index", "missing.sivf", "--queries", "q.svec"]).status.code(), Some(1));
    assert_eq!(run(d, &["search", "--queries", "q.svec"]).status.code(), Some(1));
    fs::write(d.join("junk.svec"), b"SVEC\x01\x00").unwrap();
    assert_eq!(run(d, &["exact-topk", "--data", "junk.svec", "--queries", "junk.svec"]).status.code(), Some(2));
    generate(d);
    let out = run(d, &["build-index", "--data", "docs.svec", "--out", "s.sivf", "--transform", "sinnamon"]);
    assert_eq!(out.status.code(), Some(1));
    build(d, "index.sivf", &[]);
    assert_eq!(run(d, &["search", "--index", "index.sivf", "--queries", "queries.svec", "--ell", "1.5"]).status.code(), Some(1));
    assert_eq!(run(d, &["search", "--index", "index.sivf", "--queries", "queries.svec", "--partitions"]).status.code(), Some(1));
    assert_eq!(run(d, &["search", "--index", "docs.svec", "--queries", "queries.svec"]).status.code(), Some(2));
    fs::write(d.join("bad.toml"), "k = [").unwrap();
    assert_eq!(run(d, &["--config", "bad.toml", "search", "--index", "index.sivf", "--queries", "queries.svec"]).status.code(), Some(1));
}

#[test]
fn validate_theorems_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate-theorems", "--trials", "10000"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("overall: PASS"));
}

#[test]
fn hybrid_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen-synthetic", "--kind", "hybrid", "--docs", "800", "--num-queries", "10",
            "--docs-out", "docs.svec", "--queries-out", "queries.svec",
        ],
    );
    ok(d, &["exact-topk", "--data", "docs.svec", "--queries", "queries.svec", "--w-dense", "0.3", "--out", "truth.tsv"]);
    build(d, "h.sivf", &[]);
    ok(d, &["search", "--index", "h.sivf", "--queries", "queries.svec", "--w-dense", "0.3", "--ell", "1.0", "--out", "s.tsv"]);
    assert_eq!(fs::read(d.join("s.tsv")).unwrap(), fs::read(d.join("truth.tsv")).unwrap());
    let out = ok(d, &["bench", "--index", "h.sivf", "--queries", "queries.svec", "--w-dense", "0.3", "--truth", "truth.tsv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
    let out = run(d, &["search", "--index", "h.sivf", "--queries", "queries.svec", "--sub", "inverted"]);
    assert_eq!(out.status.code(), Some(1));
}
