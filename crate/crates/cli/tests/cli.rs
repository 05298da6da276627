use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_trailforge"));
    c.env_remove("TRAILFORGE_WORKERS").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small fixture city with a config tuned for fast runs.
fn city(dir: &Path, extra: &str) -> PathBuf {
    let city = dir.join("city");
    ok(&["fixture", "--out", s(&city), "--rows", "60", "--cols", "60", "--pois", "40"]);
    let cfg = city.join("run.txt");
    let text = format!(
        "poi_file = pois.txt\nroad_file = roads.txt\ncell_size_m = 10\ncorpus_count = 60\n\
         corpus_mean_steps = 80\nstarts = 2\nseeds = 2\ndistances = 40\nsweep_distance = 30\n{extra}"
    );
    std::fs::write(&cfg, text).unwrap();
    cfg
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn lines(p: &Path) -> Vec<String> {
    String::from_utf8(read(p)).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn build_is_idempotent_and_artifacts_reload() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "");
    let out = dir.path().join("out");
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    let names = ["world.bin", "landscape.txt", "spacing.txt", "corpus_features.csv"];
    let first: Vec<Vec<u8>> = names.iter().map(|n| read(&out.join(n))).collect();
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    for (n, bytes) in names.iter().zip(&first) {
        assert_eq!(&read(&out.join(n)), bytes, "{n} changed on rebuild");
    }
    let w = trailforge::persist::load_world(&out.join("world.bin")).unwrap();
    assert!(w.road_count() > 0);
    let l = std::fs::read_to_string(out.join("landscape.txt")).unwrap();
    trailforge::RewardLandscape::from_text(&l).unwrap();
    let sp = std::fs::read_to_string(out.join("spacing.txt")).unwrap();
    sp.parse::<trailforge::postprocess::SpacingModel>().unwrap();
}

#[test]
fn corrupt_poi_file_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "");
    let pois = cfg.parent().unwrap().join("pois.txt");
    let mut text = std::fs::read_to_string(&pois).unwrap();
    text.push_str("not,a,number,here\n");
    let bad_line = text.lines().count();
    std::fs::write(&pois, text).unwrap();
    let out = run(&["--config", s(&cfg), "--out", s(&dir.path().join("out")), "build"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains(&format!("line {bad_line}")), "{err}");
}

#[test]
fn missing_inputs_and_artifacts_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    std::fs::write(&cfg, "poi_file = nope.txt\nroad_file = nope2.txt\n").unwrap();
    let out = dir.path().join("out");
    let r = run(&["--config", s(&cfg), "--out", s(&out), "build"]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("does not exist"));
    let r = run(&["--config", s(&cfg), "--out", s(&out), "generate"]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("run `build` first"));
    let r = run(&["--out", s(&out), "render", "--what", "heatmap"]);
    assert!(!r.status.success());
    let r = run(&["--config", s(&dir.path().join("absent.txt")), "build"]);
    assert!(!r.status.success());
}

#[test]
fn generate_cardinality_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "");
    let out = dir.path().join("out");
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    ok(&["--config", s(&cfg), "--out", s(&out), "generate"]);
    let stats = lines(&out.join("stats.csv"));
    let header: Vec<&str> = stats[0].split(',').collect();
    for col in ["wall_time", "opened", "closed", "combined_score"] {
        assert!(header.contains(&col), "missing {col}");
    }
    assert_eq!(stats.len() - 1, 8);
    assert_eq!(lines(&out.join("trajectories.txt")).len(), 8);
    assert_eq!(lines(&out.join("paths.txt")).len(), 8);
    let traj = read(&out.join("trajectories.txt"));
    let parsed = trailforge::ingest::load_trajectories(&out.join("trajectories.txt")).unwrap();
    assert!(parsed.iter().all(|t| t.points.len() >= 2));

    ok(&["--config", s(&cfg), "--out", s(&out), "generate"]);
    assert_eq!(read(&out.join("trajectories.txt")), traj);

    ok(&["--out", s(&out), "eval"]);
    let w = lines(&out.join("eval_wilcoxon.csv"));
    assert!(w[0].starts_with("distance,metric,n,"));
    assert_eq!(w.len() - 1, 9);
    assert!(lines(&out.join("eval_summary.csv")).len() == 3);
}

#[test]
fn seed_flag_changes_starts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "");
    let out = dir.path().join("out");
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    ok(&["--config", s(&cfg), "--out", s(&out), "--seed", "1", "generate"]);
    let a = read(&out.join("paths.txt"));
    ok(&["--config", s(&cfg), "--out", s(&out), "--seed", "2", "generate"]);
    assert_ne!(read(&out.join("paths.txt")), a);
}

#[test]
fn alpha_sweep_counts_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "");
    let out = dir.path().join("out");
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    ok(&["--config", s(&cfg), "--out", s(&out), "--max-starts", "1", "sweep", "--kind", "alpha"]);
    let sw = out.join("sweep_alpha");
    let records = lines(&sw.join("records.csv"));
    for mode in ["attraction", "feature"] {
        let n = records.iter().filter(|l| l.contains(&format!(",{mode},ok,"))).count();
        assert_eq!(n, 21, "{mode}");
        let curve = lines(&sw.join("curves").join(format!("start0_{mode}.csv")));
        assert_eq!(curve[0], "percentage,distance");
        assert_eq!(curve.len() - 1, 210);
        let d: Vec<f64> = curve[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }
    let summary = lines(&sw.join("summary.csv"));
    assert_eq!(summary.len() - 1, 42);
}

#[test]
fn multiplier_sweep_subset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "");
    let out = dir.path().join("out");
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    let args = ["--config", s(&cfg), "--out", s(&out), "--max-permutations", "6", "sweep", "--kind", "multipliers"];
    ok(&args);
    let records = lines(&out.join("sweep_multipliers").join("records.csv"));
    for start in 0..2 {
        for mode in ["attraction", "feature"] {
            let n = records[1..]
                .iter()
                .filter(|l| l.starts_with(&format!("{start},")) && l.contains(&format!(",{mode},")))
                .count();
            assert_eq!(n, 6);
        }
    }
    let variants: std::collections::BTreeSet<&str> =
        records[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(variants.len(), 6);
}

#[test]
fn renders_are_valid_xml() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "log_visits = true\n");
    let out = dir.path().join("out");
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    ok(&["--config", s(&cfg), "--out", s(&out), "generate"]);
    let listed = ok(&["--out", s(&out), "render"]);
    let files: Vec<&str> = listed.lines().collect();
    // heat map, three planes, paths and one search view per generation
    assert_eq!(files.len(), 1 + 3 + 1 + 8);
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{f}: {e}"));
    }

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, format!("{}\n", trailforge::planner::DUMP_HEADER)).unwrap();
    let listed = ok(&["--out", s(&out), "render", "--what", "search", "--input", s(&empty)]);
    let text = std::fs::read_to_string(listed.trim()).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let classes: Vec<&str> = doc.descendants().filter_map(|n| n.attribute("class")).collect();
    assert_eq!(classes, vec!["axis", "axis"]);

    let r = run(&["--out", s(&out), "render", "--what", "paths", "--input", s(&dir.path().join("none.txt"))]);
    assert!(!r.status.success());
}

#[test]
fn workers_env_var_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = city(dir.path(), "");
    let out = dir.path().join("out");
    ok(&["--config", s(&cfg), "--out", s(&out), "build"]);
    let r = bin()
        .env("TRAILFORGE_WORKERS", "2")
        .args(["--config", s(&cfg), "--out", s(&out), "generate"])
        .output()
        .unwrap();
    assert!(r.status.success());
    let r = bin()
        .env("TRAILFORGE_WORKERS", "many")
        .args(["--config", s(&cfg), "--out", s(&out), "generate"])
        .output()
        .unwrap();
    assert!(!r.status.success());
}
