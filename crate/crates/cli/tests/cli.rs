use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SUBCOMMANDS: [&str; 11] = [
    "synth",
    "rqa-features",
    "rp-export",
    "featurize",
    "train-identifier",
    "identify",
    "train-recognizer",
    "recognize",
    "evaluate",
    "importance",
    "augment",
];

fn gk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gesturekeeper"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Two subjects, one repetition per gesture.
fn small_corpus(dir: &Path) {
    let o = gk(&[
        "synth",
        "--out",
        p(dir),
        "--subjects",
        "2",
        "--reps",
        "1",
        "--seed",
        "7",
        "--id-subjects",
        "2",
        "--adl-minutes",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

fn write_stream(path: &Path, n: usize) {
    let mut text = String::from("t,acc_x,acc_y,acc_z,gyro_x,gyro_y,gyro_z,mag_x,mag_y,mag_z\n");
    for i in 0..n {
        let v = (i as f64 * 0.07).sin();
        text.push_str(&format!("{i},{v},{},0,0,0,0,0,0,1\n", 9.81 + v));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn synth_small_corpus() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("d");
    small_corpus(&out);
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("segments = 24"), "{manifest}");
    let labels = std::fs::read_to_string(out.join("recognition/S01.labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 1 + 12);
    assert!(out.join("recognition/S02.imu.csv").exists());
}

#[test]
fn rqa_features_window_count() {
    let tmp = TempDir::new().unwrap();
    let (s, f) = (tmp.path().join("s.csv"), tmp.path().join("f.csv"));
    write_stream(&s, 1000);
    let o = gk(&["rqa-features", "--in", p(&s), "--out", p(&f)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&f).unwrap();
    assert_eq!(text.lines().next(), Some("window_start,rr,tra"));
    assert_eq!(text.lines().count() - 1, 36);
}

#[test]
fn params_file_overrides_defaults() {
    let tmp = TempDir::new().unwrap();
    let (s, f, params) = (
        tmp.path().join("s.csv"),
        tmp.path().join("f.csv"),
        tmp.path().join("p.txt"),
    );
    write_stream(&s, 1000);
    std::fs::write(
        &params,
        "# wider windows\nrqa.window = 250\nrqa.step = 50\n",
    )
    .unwrap();
    let o = gk(&[
        "rqa-features",
        "--in",
        p(&s),
        "--out",
        p(&f),
        "--params",
        p(&params),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&f).unwrap().lines().count() - 1, 16);

    std::fs::write(&params, "rqa.windw = 250\n").unwrap();
    let o = gk(&[
        "rqa-features",
        "--in",
        p(&s),
        "--out",
        p(&f),
        "--params",
        p(&params),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rqa.windw"));
}

#[test]
fn rp_export_writes_pgm() {
    let tmp = TempDir::new().unwrap();
    let (s, img) = (tmp.path().join("s.csv"), tmp.path().join("rp.pgm"));
    write_stream(&s, 300);
    let o = gk(&[
        "rp-export",
        "--in",
        p(&s),
        "--out",
        p(&img),
        "--start",
        "50",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(&img).unwrap();
    assert!(bytes.starts_with(b"P5\n122 122\n255\n"));
    let o = gk(&[
        "rp-export",
        "--in",
        p(&s),
        "--out",
        p(&img),
        "--start",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn every_subcommand_lists_defaults() {
    for sub in SUBCOMMANDS {
        let o = gk(&[sub, "--help"]);
        assert!(o.status.success());
        let help = String::from_utf8_lossy(&o.stdout);
        for needle in [
            "rqa.window      = 125",
            "rqa.step        = 25",
            "rqa.tau         = 1",
            "rqa.m           = 4",
            "rqa.epsilon     = 0.1",
            "id.kernel       = poly",
            "id.gamma        = 0.95",
            "id.cost         = 3",
            "id.degree       = 3",
            "id.coef0        = 2",
            "rec.kernel      = radial",
            "rec.gamma       = 0.005",
            "rec.cost        = 1",
            "--seed",
            "--params",
        ] {
            assert!(help.contains(needle), "{sub} --help lacks '{needle}'");
        }
    }
}

#[test]
fn usage_errors_exit_1() {
    let o = gk(&["synth", "--out", "x", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    let o = gk(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));
    let o = gk(&["evaluate", "--out", "x", "--classifier", "tree"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let o = gk(&[
        "rqa-features",
        "--in",
        "/nonexistent/s.csv",
        "--out",
        p(&tmp.path().join("f.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/s.csv"));

    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "t,acc_x\n0,1\n").unwrap();
    let o = gk(&[
        "rqa-features",
        "--in",
        p(&bad),
        "--out",
        p(&tmp.path().join("f.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn evaluate_needs_two_subjects() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("d");
    small_corpus(&corpus);
    let ds = tmp.path().join("ds.csv");
    assert!(gk(&[
        "featurize",
        "--in",
        p(&corpus.join("recognition")),
        "--out",
        p(&ds)
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&ds).unwrap();
    let one: Vec<&str> = text.lines().filter(|l| !l.contains(",S02")).collect();
    let single = tmp.path().join("one.csv");
    std::fs::write(&single, one.join("\n") + "\n").unwrap();
    let o = gk(&[
        "evaluate",
        "--data",
        p(&single),
        "--out",
        p(&tmp.path().join("ev")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("need ≥2 subjects"), "{}", stderr(&o));
}

#[test]
fn train_and_recognize_round_trip() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("d");
    small_corpus(&corpus);
    let model = tmp.path().join("rec.model");
    let o = gk(&[
        "train-recognizer",
        "--in",
        p(&corpus.join("recognition")),
        "--features",
        "all",
        "--model",
        p(&model),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("66 pairwise models"));

    let out = tmp.path().join("r.csv");
    let o = gk(&[
        "recognize",
        "--in",
        p(&corpus.join("recognition/S01.imu.csv")),
        "--segments",
        p(&corpus.join("recognition/S01.labels.csv")),
        "--model",
        p(&model),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("start,end,label"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn augment_doubles_rows() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("d");
    small_corpus(&corpus);
    let (ds, aug) = (tmp.path().join("ds.csv"), tmp.path().join("aug.csv"));
    assert!(gk(&[
        "featurize",
        "--in",
        p(&corpus.join("recognition")),
        "--out",
        p(&ds)
    ])
    .status
    .success());
    let o = gk(&[
        "augment",
        "--data",
        p(&ds),
        "--out",
        p(&aug),
        "--sigma",
        "0.5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(&aug).unwrap().lines().count(),
        1 + 48
    );
}

#[test]
fn outputs_are_byte_identical_across_jobs() {
    let tmp = TempDir::new().unwrap();
    let mut files = Vec::new();
    for jobs in ["1", "3"] {
        let root = tmp.path().join(jobs);
        let corpus = root.join("d");
        let o = gk(&[
            "synth",
            "--out",
            p(&corpus),
            "--subjects",
            "3",
            "--reps",
            "1",
            "--id-subjects",
            "2",
            "--adl-minutes",
            "1",
            "--seed",
            "11",
            "--jobs",
            jobs,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let ds = root.join("ds.csv");
        assert!(gk(&[
            "featurize",
            "--in",
            p(&corpus.join("recognition")),
            "--out",
            p(&ds),
            "--jobs",
            jobs
        ])
        .status
        .success());
        let imp = root.join("imp.csv");
        let o = gk(&[
            "importance",
            "--data",
            p(&ds),
            "--reps",
            "2",
            "--out",
            p(&imp),
            "--jobs",
            jobs,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let ev = root.join("ev");
        let o = gk(&[
            "evaluate",
            "--data",
            p(&ds),
            "--features",
            "statistical",
            "--out",
            p(&ev),
            "--jobs",
            jobs,
            "--seed",
            "5",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(
            [
                "d/recognition/S03.imu.csv",
                "d/identification/I02.imu.csv",
                "ds.csv",
                "imp.csv",
                "ev/report.csv",
            ]
            .map(|f| std::fs::read(root.join(f)).unwrap()),
        );
    }
    assert_eq!(files[0], files[1]);
}
