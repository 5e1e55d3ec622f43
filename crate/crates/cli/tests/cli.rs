use std::fs;
use std::path::Path;

use multidraw_cli::run;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["multidraw"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("urn.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn value<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no '{key}' in\n{out}"))
}

#[test]
fn classify_named_examples() {
    let r = cli(&["classify", "--preset", "friedman m=2 c=1"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(value(&r.out, "index"), "-1");
    assert_eq!(value(&r.out, "regime"), "small-index");
    assert!(value(&r.out, "family").contains("Friedman"));
    assert_eq!(value(&r.out, "table.mean"), "n");
    assert_eq!(value(&r.out, "table.variance"), "n");
    assert!(value(&r.out, "table.limit_law").contains("N(0, 1)"));

    let r = cli(&["classify", "--preset", "polya m=2 c=1"]);
    assert_eq!(r.code, 0);
    assert_eq!(value(&r.out, "regime"), "triangular");
    assert!(value(&r.out, "family").contains("Polya"));

    let r = cli(&["classify", "--preset", "logic-circuit m=3"]);
    assert_eq!(r.code, 0);
    assert!(value(&r.out, "family").contains("logic-circuit"));

    let r = cli(&["classify", "--preset", "degenerate m=3 c=2"]);
    assert_eq!(r.code, 0);
    assert_eq!(value(&r.out, "index"), "0");
    assert_eq!(value(&r.out, "regime"), "degenerate");

    let r = cli(&["classify", "--preset", "m2-condition"]);
    assert_eq!(r.code, 0);
    assert!(value(&r.out, "affine").starts_with("yes"));
}

#[test]
fn classify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "w0 = 2\nb0 = 2\n[urn]\na = [1, 0, 2]\nsigma = 2\n");
    let r = cli(&["classify", "--config", &cfg]);
    assert_eq!(r.code, 2);
    assert!(value(&r.out, "affine").contains("row 0"), "{}", r.out);

    // b_0 = -2 is below what model M or R allows
    let cfg = write_config(dir.path(), "w0 = 2\nb0 = 2\n[urn]\na = [3, 2, 1]\nsigma = 1\n");
    let r = cli(&["classify", "--config", &cfg]);
    assert_eq!(r.code, 3, "{}", r.out);

    let cfg = write_config(dir.path(), "w0 = 2\n[urn]\na = [3, 2, 1]\nsigmaa = 4\n");
    let r = cli(&["classify", "--config", &cfg]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("line"), "{}", r.err);

    assert_eq!(cli(&["classify", "--preset", "nope"]).code, 1);
    assert_eq!(cli(&["frobnicate"]).code, 1);
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn exact_polya_mean_column() {
    let r = cli(&["exact", "--preset", "polya m=2 c=1"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let mut rows = r.out.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    let mean_col = header.iter().position(|h| *h == "mean").unwrap();
    for (n, row) in rows.enumerate() {
        // W0 = 1, T0 = 2, sigma = 2: E[W_n] = (2n + 2)/2
        assert_eq!(row.split(',').nth(mean_col).unwrap(), format!("{}/1", n + 1), "n = {n}");
    }
}

#[test]
fn exact_degenerate_variance_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = \"degenerate m=3 c=2\"\n[exact]\nn_max = 5\n");
    let r = cli(&["exact", "--config", &cfg]);
    assert_eq!(r.code, 0, "{}", r.err);
    let mut rows = r.out.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "variance").unwrap();
    let vars: Vec<&str> = rows.map(|row| row.split(',').nth(col).unwrap()).collect();
    assert_eq!(vars, vec!["0/1"; 6]);
}

#[test]
fn oracle_check_flag_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model = \"R\"\nw0 = 3\nb0 = 1\n[urn]\na = [1, 2, 3]\nsigma = 3\n");
    let r = cli(&["exact", "--config", &cfg, "--oracle-check"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.err.contains("result = pass"), "{}", r.err);
    let r = cli(&["oracle-check", "--preset", "logic-circuit m=3", "--model", "M"]);
    assert_eq!(r.code, 0, "{}", r.err);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "preset = \"friedman m=3 c=1\"\n[simulate]\nn_steps = 300\nreplicates = 40\nraw_path = true\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        fs::create_dir(d).unwrap();
        let r = cli(&["simulate", "--config", &cfg, "--seed", "11", "--out", d.to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}", r.err);
    }
    for name in ["trace.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn simulate_degenerate_finals_agree() {
    let dir = tempfile::tempdir().unwrap();
    let r = cli(&["simulate", "--preset", "degenerate m=2 c=3", "--checkpoints", "final", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.err);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut rows = trace.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    let n_col = header.iter().position(|h| *h == "n").unwrap();
    let col = header.iter().position(|h| *h == "white").unwrap();
    let finals: Vec<&str> = rows
        .map(|row| row.split(',').collect::<Vec<_>>())
        .filter(|f| f[n_col] == "1000")
        .map(|f| f[col])
        .collect();
    assert!(!finals.is_empty());
    assert!(finals.iter().all(|w| *w == (2 + 3 * 1000).to_string()), "{finals:?}");
}

#[test]
fn verify_routes_large_index_away_from_clt() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "preset = \"large-index\"\n[verify]\nclt_replicates = 100\nratio_steps = 512\nratio_replicates = 40\nl2_steps = 2048\nl2_replicates = 40\n",
    );
    let r = cli(&["verify", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(r.code == 0 || r.code == 4, "{}", r.err);
    assert_eq!(value(&r.out, "test.clt.status"), "unsupported");
    assert!(value(&r.out, "test.clt.note").contains("large"), "{}", r.out);
    assert_ne!(value(&r.out, "test.l2-cauchy.status"), "unsupported");
    assert_ne!(value(&r.out, "test.l2-constant.status"), "unsupported");
    assert!(dir.path().join("report.csv").exists());
}

#[test]
fn verify_runs_martingale_check_on_triangular_urn() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "preset = \"polya m=2 c=1\"\n[verify]\nratio_steps = 512\nratio_replicates = 40\nl2_steps = 2048\nl2_replicates = 40\n",
    );
    let r = cli(&["verify", "--config", &cfg]);
    assert!(r.code == 0 || r.code == 4, "{}", r.err);
    assert_ne!(value(&r.out, "test.l2-cauchy.status"), "unsupported");
    assert!(value(&r.out, "test.l2-cauchy.note").contains("g_n W_n"));
}

#[test]
fn shipped_configs_classify() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let r = cli(&["classify", "--config", path.to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}: {}{}", path.display(), r.out, r.err);
        seen += 1;
    }
    assert!(seen >= 4);
}
