use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use swarmcalc::io::{CurveFile, HistFile, LogFile};
use swarmcalc::urn::histogram_modes;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swarmcalc"));
    cmd.env_remove("SWARMCALC_SEED");
    cmd
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert_eq!(code(&out), 0, "{args:?} failed: {}", stderr(&out));
    out
}

fn curve(path: &Path) -> CurveFile {
    CurveFile::read(fs::File::open(path).unwrap()).unwrap()
}

fn write(path: &Path, text: &str) -> PathBuf {
    fs::write(path, text).unwrap();
    path.to_path_buf()
}

fn binomial(n: u64) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row.iter().map(|c| c / 2f64.powi(n as i32)).collect()
}

fn performance(p: [f64; 3], x: f64) -> f64 {
    p[0] * x.powf(p[1]) * (p[2] * x).exp()
}

fn curve_text(rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::from("x,y\n");
    for (x, y) in rows {
        s.push_str(&format!("{x},{y:e}\n"));
    }
    s
}

#[test]
fn steady_state_at_zero_feedback_is_binomial() {
    let dir = TempDir::new().unwrap();
    let out = ok(
        dir.path(),
        &["analyze", "steady-state", "--phi", "0", "--n", "4"],
    );
    let pi = CurveFile::read(out.stdout.as_slice()).unwrap();
    let want = binomial(4);
    assert_eq!(want, [0.0625, 0.25, 0.375, 0.25, 0.0625]);
    for (row, w) in pi.rows.iter().zip(&want) {
        assert!((row.y - w).abs() < 1e-9, "{} vs {w}", row.y);
    }
}

#[test]
fn mfpt_two_marble_urn() {
    let dir = TempDir::new().unwrap();
    let out = ok(
        dir.path(),
        &["analyze", "mfpt", "--phi", "0", "--n", "2", "--target", "2"],
    );
    let t = CurveFile::read(out.stdout.as_slice()).unwrap();
    // from B=1 the urn moves up or down with probability 1/2 each: t1 = 1 + t0/2, t0 = 1 + t1
    assert_eq!(t.rows[0].y, 4.0);
    assert_eq!(t.rows[1].y, 3.0);
    assert_eq!(t.rows[2].y, 0.0);
}

#[test]
fn splitting_endpoints() {
    let dir = TempDir::new().unwrap();
    for method in ["exact", "formula"] {
        let out = ok(
            dir.path(),
            &[
                "analyze",
                "splitting",
                "--phi",
                "1",
                "--n",
                "20",
                "--a",
                "3",
                "--b",
                "17",
                "--method",
                method,
            ],
        );
        let sigma = CurveFile::read(out.stdout.as_slice()).unwrap();
        assert_eq!(sigma.rows.first().unwrap().y, 0.0);
        assert_eq!(sigma.rows.last().unwrap().y, 1.0);
        assert_eq!(sigma.rows.len(), 15);
    }
}

#[test]
fn simulate_zero_feedback_histogram_peaks_at_half() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--profile",
            "sine",
            "--phi",
            "0",
            "--n",
            "64",
            "--steps",
            "2000",
            "--out",
            "sim",
        ],
    );
    let hist = HistFile::read(fs::File::open(dir.path().join("sim/hist.csv")).unwrap()).unwrap();
    let column = hist.column(0.0);
    assert_eq!(column.len(), 65);
    let modes = histogram_modes(&column, 2);
    assert_eq!(modes.len(), 1, "{modes:?}");
    assert!((30..=34).contains(&modes[0]), "{modes:?}");
}

#[test]
fn zero_steps_give_one_trajectory_row() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--phi",
            "0.3",
            "--n",
            "10",
            "--steps",
            "0",
            "--replicates",
            "4",
            "--out",
            "s",
        ],
    );
    let traj = curve(&dir.path().join("s/trajectory.csv"));
    assert_eq!(traj.rows.len(), 1);
    assert_eq!((traj.rows[0].x, traj.rows[0].y), (0.0, 5.0));
}

fn digests(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_is_deterministic_and_seeded() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str, seed: &'static str| {
        [
            "simulate",
            "--phi",
            "0.75",
            "--n",
            "16",
            "--steps",
            "300",
            "--replicates",
            "50",
            "--seed",
            seed,
            "--out",
            out,
        ]
    };
    ok(dir.path(), &args("a", "11"));
    ok(dir.path(), &args("b", "11"));
    ok(dir.path(), &args("c", "12"));
    assert_eq!(
        digests(&dir.path().join("a")),
        digests(&dir.path().join("b"))
    );
    assert_ne!(
        digests(&dir.path().join("a")),
        digests(&dir.path().join("c"))
    );
    let seq = run_in(
        dir.path(),
        &[&["--sequential"][..], &args("d", "11")].concat(),
    );
    assert_eq!(code(&seq), 0);
    assert_eq!(
        digests(&dir.path().join("a")),
        digests(&dir.path().join("d"))
    );
}

#[test]
fn seed_environment_overrides_flag() {
    let dir = TempDir::new().unwrap();
    let base = [
        "simulate",
        "--phi",
        "0.6",
        "--n",
        "12",
        "--steps",
        "200",
        "--replicates",
        "20",
    ];
    ok(
        dir.path(),
        &[&base[..], &["--seed", "5", "--out", "flag"]].concat(),
    );
    let out = bin()
        .current_dir(dir.path())
        .env("SWARMCALC_SEED", "5")
        .args([&base[..], &["--seed", "99", "--out", "env"]].concat())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        digests(&dir.path().join("flag")),
        digests(&dir.path().join("env"))
    );
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("env/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([5]));
    let argv: Vec<String> = serde_json::from_value(manifest["argv"].clone()).unwrap();
    assert_eq!(&argv[argv.len() - 2..], ["--seed", "5"]);

    let bad = bin()
        .current_dir(dir.path())
        .env("SWARMCALC_SEED", "x")
        .args([&base[..], &["--out", "z"]].concat())
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

/// Deletes every recorded output, replays the manifest and compares bytes.
fn assert_replays(dir: &Path, manifest: &str) {
    let m: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join(manifest)).unwrap()).unwrap();
    let outputs: Vec<String> = m["outputs"].as_object().unwrap().keys().cloned().collect();
    assert!(!outputs.is_empty());
    let before: Vec<Vec<u8>> = outputs
        .iter()
        .map(|p| fs::read(dir.join(p)).unwrap())
        .collect();
    for p in &outputs {
        fs::remove_file(dir.join(p)).unwrap();
    }
    let out = run_in(dir, &["replay", manifest]);
    assert_eq!(code(&out), 0, "replay of {manifest}: {}", stderr(&out));
    for (p, bytes) in outputs.iter().zip(&before) {
        assert_eq!(
            &fs::read(dir.join(p)).unwrap(),
            bytes,
            "{p} differs after replay"
        );
    }
}

#[test]
fn manifests_replay_byte_identically() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--phi",
            "0.8",
            "--n",
            "16",
            "--steps",
            "400",
            "--replicates",
            "30",
            "--seed",
            "3",
            "--out",
            "sim",
        ],
    );
    assert_replays(d, "sim/manifest.json");

    ok(
        d,
        &[
            "analyze",
            "steady-state",
            "--phi",
            "0.7",
            "--n",
            "30",
            "--out",
            "pi.csv",
        ],
    );
    assert_replays(d, "pi.csv.manifest.json");
    ok(
        d,
        &[
            "analyze",
            "splitting",
            "--phi",
            "0.2",
            "--n",
            "30",
            "--a",
            "4",
            "--b",
            "26",
            "--out",
            "sigma.csv",
        ],
    );
    assert_replays(d, "sigma.csv.manifest.json");
    ok(
        d,
        &[
            "analyze", "mfpt", "--phi", "0.75", "--n", "12", "--target", "10", "--out", "t.csv",
        ],
    );
    assert_replays(d, "t.csv.manifest.json");

    let p = [0.00248537, 1.23745, -0.199589];
    write(
        &d.join("perf.csv"),
        &curve_text((1..=55).map(|x| (x as f64, performance(p, x as f64)))),
    );
    ok(
        d,
        &[
            "fit",
            "performance",
            "--data",
            "perf.csv",
            "--out",
            "fit.csv",
        ],
    );
    assert_replays(d, "fit.csv.manifest.json");

    ok(
        d,
        &[
            "estimate",
            "--log",
            "sim/log.csv",
            "--predict-steady-state",
            "--out",
            "est",
        ],
    );
    assert_replays(d, "est/manifest.json");

    ok(
        d,
        &[
            "scenario-dc",
            "--agents",
            "16",
            "--steps",
            "600",
            "--windows",
            "uniform:200",
            "--seed",
            "4",
            "--out-dir",
            "dc",
        ],
    );
    assert_replays(d, "dc/manifest.json");
}

#[test]
fn replay_detects_changes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let p = [0.00248537, 1.23745, -0.199589];
    write(
        &d.join("perf.csv"),
        &curve_text((1..=55).map(|x| (x as f64, performance(p, x as f64)))),
    );
    ok(
        d,
        &[
            "fit",
            "performance",
            "--data",
            "perf.csv",
            "--out",
            "fit.csv",
        ],
    );
    let path = d.join("fit.csv.manifest.json");
    let original = fs::read_to_string(&path).unwrap();
    let mut m: serde_json::Value = serde_json::from_str(&original).unwrap();
    m["outputs"]["fit.csv"] = serde_json::json!("0".repeat(64));
    fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(code(&run_in(d, &["replay", "fit.csv.manifest.json"])), 4);

    fs::write(&path, original).unwrap();
    write(&d.join("perf.csv"), "x,y\n1,2\n");
    assert_eq!(code(&run_in(d, &["replay", "fit.csv.manifest.json"])), 2);
}

#[test]
fn fit_performance_prints_appendix_layout() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let p = [0.00248537, 1.23745, -0.199589];
    write(
        &d.join("perf.csv"),
        &curve_text((1..=55).map(|x| (x as f64, performance(p, x as f64)))),
    );
    let out = ok(
        d,
        &[
            "fit",
            "performance",
            "--data",
            "perf.csv",
            "--gnuplot-table",
        ],
    );
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(
        lines[0].starts_with("function") && lines[0].contains("x^b"),
        "{text}"
    );
    assert_eq!(lines[1].split_whitespace().last(), Some("52"));
    assert!(lines[2].starts_with("root mean square of residuals"));
    let params: Vec<&str> = lines
        .iter()
        .copied()
        .filter(|l| l.contains("+/-"))
        .collect();
    assert_eq!(params.len(), 3);
    for (line, (name, want)) in params
        .iter()
        .zip([("a1a2", p[0]), ("b", p[1]), ("c", p[2])])
    {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields[0], name);
        let got: f64 = fields[1].parse().unwrap();
        assert!(
            ((got - want) / want).abs() < 5e-3,
            "{name}: {got} vs {want}"
        );
        assert!(fields.last().unwrap().ends_with("%)"), "{line}");
    }

    let plain = stdout(&ok(
        d,
        &[
            "fit",
            "performance",
            "--data",
            "perf.csv",
            "--init",
            "b=1.5",
        ],
    ));
    assert!(
        plain.contains("parameter,value,stderr,percent,fixed,at_bound"),
        "{plain}"
    );
}

#[test]
fn narrow_fit_frees_only_cooperation() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (a1, b, a2, c) = (0.0106104, 3.23718, 0.213822, -0.182333);
    let data = curve_text((5..=40).map(|n| {
        (
            n as f64,
            a1 * (n as f64).powf(b) * a2 * (c * n as f64).exp(),
        )
    }));
    write(&d.join("taxis.csv"), &data);
    let out = ok(
        d,
        &[
            "fit",
            "narrow",
            "--data",
            "taxis.csv",
            "--range",
            "20:22",
            "--fix",
            "a2=0.213822",
            "c=-0.182333",
        ],
    );
    let text = stdout(&out);
    assert!(text.contains("dof,1\n"), "{text}");
    let row = |name: &str| -> Vec<String> {
        text.lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap()
            .split(',')
            .map(str::to_string)
            .collect()
    };
    assert_eq!(row("a2")[4], "true");
    assert_eq!(row("c")[4], "true");
    assert_eq!(row("a1")[4], "false");
    assert_eq!(row("b")[4], "false");
    let got_b: f64 = row("b")[1].parse().unwrap();
    assert!((got_b - b).abs() / b < 5e-3);
    assert_eq!(
        code(&run_in(
            d,
            &[
                "fit",
                "narrow",
                "--data",
                "taxis.csv",
                "--range",
                "20:22",
                "--fix",
                "a2=0.2"
            ]
        )),
        2
    );
}

#[test]
fn csv_problems_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(&d.join("empty.csv"), "");
    let out = run_in(d, &["fit", "performance", "--data", "empty.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("empty"), "{}", stderr(&out));

    write(&d.join("header.csv"), "x,y\n");
    assert_eq!(
        code(&run_in(d, &["fit", "performance", "--data", "header.csv"])),
        2
    );

    write(&d.join("bad.csv"), "x,y\n1,2\n2,3\n3,oops\n4,5\n");
    let out = run_in(d, &["fit", "performance", "--data", "bad.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    write(&d.join("short.csv"), "x,y\n1,2\n2\n");
    let out = run_in(d, &["fit", "performance", "--data", "short.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn usage_and_io_exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&run_in(d, &["simulate", "--phi", "0.5"])), 2);
    assert_eq!(
        code(&run_in(
            d,
            &["simulate", "--phi", "1.5", "--n", "8", "--out", "x"]
        )),
        2
    );
    assert_eq!(
        code(&run_in(
            d,
            &["simulate", "--phi", "0.5", "--n", "1", "--out", "x"]
        )),
        2
    );
    assert_eq!(
        code(&run_in(
            d,
            &[
                "analyze",
                "splitting",
                "--phi",
                "0.5",
                "--n",
                "8",
                "--a",
                "5",
                "--b",
                "3"
            ]
        )),
        2
    );
    assert_eq!(
        code(&run_in(d, &["fit", "performance", "--data", "missing.csv"])),
        3
    );
    write(&d.join("blocker"), "a file, not a directory");
    assert_eq!(
        code(&run_in(
            d,
            &[
                "simulate",
                "--phi",
                "0.5",
                "--n",
                "8",
                "--steps",
                "5",
                "--replicates",
                "2",
                "--out",
                "blocker/sub"
            ]
        )),
        3
    );
}

#[test]
fn fully_masked_log_exits_four() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(&d.join("mid.csv"), "s,r_b,r_r,visits\n0.5,40,38,100\n");
    let out = run_in(d, &["estimate", "--log", "mid.csv", "--out", "est"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn estimate_recovers_simulated_profile() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--phi",
            "0.5",
            "--n",
            "32",
            "--steps",
            "4000",
            "--replicates",
            "2000",
            "--seed",
            "1",
            "--out",
            "sim",
        ],
    );
    ok(d, &["estimate", "--log", "sim/log.csv", "--out", "est"]);
    let est = curve(&d.join("est/estimate.csv"));
    let mid = est.rows.iter().find(|r| r.x == 0.5).unwrap();
    assert_eq!(mid.marker.as_deref(), Some("undefined-at-pole"));
    assert!(mid.y.is_nan());
    let usable: Vec<_> = est.rows.iter().filter(|r| r.marker.is_none()).collect();
    let best = usable.iter().max_by(|a, b| a.y.total_cmp(&b.y)).unwrap();
    assert!((0.3..=0.7).contains(&best.x), "peak at s = {}", best.x);
    assert!((best.y - 0.5).abs() < 0.1, "peak value {}", best.y);
    for r in usable.iter().filter(|r| (0.3..=0.7).contains(&r.x)) {
        let want = 0.5 * (std::f64::consts::PI * r.x).sin();
        assert!((r.y - want).abs() < 0.1, "P({}) = {} vs {want}", r.x, r.y);
    }
}

#[test]
fn predicted_steady_state_at_zero_feedback_is_binomial() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--phi",
            "0",
            "--n",
            "16",
            "--steps",
            "3000",
            "--replicates",
            "2000",
            "--seed",
            "2",
            "--out",
            "sim",
        ],
    );
    ok(
        d,
        &[
            "estimate",
            "--log",
            "sim/log.csv",
            "--predict-steady-state",
            "--out",
            "est",
        ],
    );
    let pi = curve(&d.join("est/predicted.csv"));
    let tv: f64 = pi
        .rows
        .iter()
        .zip(binomial(16))
        .map(|(r, w)| (r.y - w).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "total variation {tv}");
}

#[test]
fn scenario_without_recognition_never_revises() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "scenario-dc",
            "--agents",
            "20",
            "--steps",
            "2000",
            "--recognition",
            "0",
            "--windows",
            "uniform:500",
            "--out-dir",
            "dc",
        ],
    );
    let logs: Vec<PathBuf> = fs::read_dir(d.join("dc/logs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(logs.len(), 4);
    for p in logs {
        let log = LogFile::read(fs::File::open(&p).unwrap()).unwrap();
        assert!(
            log.rows.iter().all(|r| r.r_b == 0 && r.r_r == 0),
            "{}",
            p.display()
        );
        assert_eq!(log.rows.iter().map(|r| r.visits).sum::<u64>(), 500);
    }
}

#[test]
fn scenario_seeds_differ_with_equal_schemas() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for (seed, out) in [("1", "a"), ("2", "b")] {
        ok(
            d,
            &[
                "scenario-dc",
                "--agents",
                "24",
                "--steps",
                "1500",
                "--windows",
                "doubling:100",
                "--seed",
                seed,
                "--out-dir",
                out,
            ],
        );
    }
    let header = |p: PathBuf| {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    for f in ["trajectory.csv", "phi_series.csv", "logs/window_0000.csv"] {
        assert_eq!(header(d.join("a").join(f)), header(d.join("b").join(f)));
    }
    assert_ne!(
        fs::read(d.join("a/trajectory.csv")).unwrap(),
        fs::read(d.join("b/trajectory.csv")).unwrap()
    );
}

#[test]
fn scenario_pipeline_gives_growing_feedback() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = ok(
        d,
        &[
            "scenario-dc",
            "--agents",
            "64",
            "--steps",
            "40000",
            "--windows",
            "doubling:16",
            "--noise",
            "misread",
            "--primed-memory",
            "4",
            "--replicates",
            "380",
            "--s0-spread",
            "0.05:0.95:19",
            "--seed",
            "7",
            "--growth-fit",
            "--stride",
            "1000",
            "--out-dir",
            "dc",
        ],
    );
    let series = fs::read_to_string(d.join("dc/phi_series.csv")).unwrap();
    let phis: Vec<(f64, f64)> = series
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    let late = &phis[phis.len() - 3..];
    let mean = late.iter().map(|p| p.1).sum::<f64>() / 3.0;
    assert!(mean > 0.5 && mean < 1.0, "late phi {mean}: {series}");
    let text = stdout(&out);
    let b_line = text
        .lines()
        .find(|l| l.starts_with("b "))
        .unwrap_or_else(|| panic!("{text}"));
    let b: f64 = b_line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(b < 0.0, "{text}");
}

#[test]
fn outputs_round_trip_through_the_parser() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--phi",
            "0.9",
            "--n",
            "20",
            "--steps",
            "500",
            "--replicates",
            "40",
            "--phi-scan",
            "0:0.25:1",
            "--out",
            "sim",
        ],
    );
    ok(
        d,
        &[
            "estimate",
            "--log",
            "sim/log.csv",
            "--family",
            "rational",
            "--out",
            "est",
        ],
    );
    let reread = |p: &Path, kind: &str| -> Vec<u8> {
        let mut buf = Vec::new();
        let f = fs::File::open(p).unwrap();
        match kind {
            "curve" => CurveFile::read(f).unwrap().write(&mut buf).unwrap(),
            "hist" => HistFile::read(f).unwrap().write(&mut buf).unwrap(),
            _ => LogFile::read(f).unwrap().write(&mut buf).unwrap(),
        }
        buf
    };
    for (file, kind) in [
        ("sim/trajectory.csv", "curve"),
        ("sim/hist.csv", "hist"),
        ("sim/log.csv", "log"),
        ("est/estimate.csv", "curve"),
    ] {
        let p = d.join(file);
        assert_eq!(reread(&p, kind), fs::read(&p).unwrap(), "{file}");
    }
    let hist = HistFile::read(fs::File::open(d.join("sim/hist.csv")).unwrap()).unwrap();
    let phis: Vec<f64> = hist.rows.iter().map(|r| r.phi).collect();
    assert!(phis.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(hist.rows.len(), 5 * 21);
}
