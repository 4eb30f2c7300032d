use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use voxsep::scene::synth;
use voxsep::signal::{load_wav, write_wav};
use voxsep::MonoSignal;
use voxsep_cli::REPORT_SCHEMA;

fn voxsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voxsep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn assert_schema_valid(report: &Value) {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(report)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn demo_scene(dir: &Path) -> Vec<String> {
    assert_ok(&voxsep(&[
        "--seed",
        "3",
        "--out",
        &s(dir),
        "simulate",
        "--demo",
        "--duration",
        "2",
        "--rate",
        "16000",
    ]));
    (1..=3).map(|i| s(&dir.join(format!("x{i}.wav")))).collect()
}

#[test]
fn identity_manifest_copies_the_source() {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("talker.wav");
    write_wav(&synth::sine(200.0, 0.4, 0.5, 16000).unwrap(), &src).unwrap();
    std::fs::write(
        tmp.path().join("scene.json"),
        r#"{"sources": ["talker.wav"], "mixing": "identity"}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    assert_ok(&voxsep(&[
        "--out",
        &s(&out),
        "simulate",
        &s(&tmp.path().join("scene.json")),
    ]));
    assert!(std::fs::read(&src).unwrap() == std::fs::read(out.join("x1.wav")).unwrap());
    let meta = read_json(&out.join("scene.json"));
    assert_eq!(meta["mixing_kind"], "identity");
    assert_eq!(meta["condition_number"], 1.0);
}

#[test]
fn manifest_with_mixing_csv_and_noise() {
    let tmp = tempfile::tempdir().unwrap();
    for (k, f) in [150.0, 230.0].iter().enumerate() {
        write_wav(
            &synth::sine(*f, 0.3, 0.5, 8000).unwrap(),
            tmp.path().join(format!("s{k}.wav")),
        )
        .unwrap();
    }
    std::fs::write(tmp.path().join("a.csv"), "1,0.5\n0.25,1\n").unwrap();
    std::fs::write(
        tmp.path().join("m.json"),
        r#"{"sources": ["s0.wav", "s1.wav"], "mixing": "a.csv", "snr_db": 20, "seed": 5}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    assert_ok(&voxsep(&[
        "--out",
        &s(&out),
        "simulate",
        &s(&tmp.path().join("m.json")),
    ]));
    let meta = read_json(&out.join("scene.json"));
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["mixing"][0][1], 0.5);
    assert_eq!(
        std::fs::read_to_string(out.join("mixing.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
    assert_eq!(load_wav(out.join("x2.wav")).unwrap()[0].len(), 4000);
}

#[test]
fn demo_scene_shape_and_reproducibility() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        assert_ok(&voxsep(&[
            "--seed",
            "9",
            "--out",
            &s(d),
            "simulate",
            "--demo",
            "--duration",
            "1",
            "--snr-db",
            "20",
        ]));
    }
    for i in 1..=3 {
        let name = format!("x{i}.wav");
        let x = std::fs::read(a.join(&name)).unwrap();
        assert!(x == std::fs::read(b.join(&name)).unwrap());
        let src = load_wav(a.join(format!("sources/s{i}.wav"))).unwrap();
        assert_eq!(load_wav(a.join(&name)).unwrap()[0].len(), src[0].len());
    }
    assert!(
        std::fs::read(a.join("scene.json")).unwrap()
            == std::fs::read(b.join("scene.json")).unwrap()
    );
    // the written manifest reproduces the scene
    let c = tmp.path().join("c");
    assert_ok(&voxsep(&[
        "--out",
        &s(&c),
        "simulate",
        &s(&a.join("manifest.json")),
    ]));
    for i in 1..=3 {
        let name = format!("x{i}.wav");
        assert!(std::fs::read(a.join(&name)).unwrap() == std::fs::read(c.join(&name)).unwrap());
    }
}

#[test]
fn separate_with_refs_scores_the_demo_scene() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("scene");
    let x = demo_scene(&scene);
    let refs: Vec<String> = (1..=3)
        .map(|i| s(&scene.join(format!("sources/s{i}.wav"))))
        .collect();
    let out = tmp.path().join("sep");
    let o = s(&out);
    let mut args = vec!["--out", o.as_str(), "separate"];
    args.extend(x.iter().map(|v| v.as_str()));
    args.push("--refs");
    args.extend(refs.iter().map(|v| v.as_str()));
    assert_ok(&voxsep(&args));
    let sep = read_json(&out.join("separation.json"));
    assert_eq!(sep["order"], "reference");
    for r in sep["score"]["per_source_correlation"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() >= 0.95);
    }
    for (k, o) in sep["outputs"].as_array().unwrap().iter().enumerate() {
        let w = load_wav(out.join(o["file"].as_str().unwrap()))
            .unwrap()
            .remove(0);
        let peak = w.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 0.5).abs() < 1e-3, "component {k} peak {peak}");
        assert!(o["wav_scale"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(sep["unmixing"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(sep["whitening"]["eigenvalues"].as_array().unwrap().len(), 3);
}

#[test]
fn too_many_components_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let x = tmp.path().join("x.wav");
    write_wav(&synth::white_noise(0.1, 0.2, 8000, 1).unwrap(), &x).unwrap();
    let out = voxsep(&[
        "--out",
        &s(tmp.path()),
        "separate",
        &s(&x),
        "--components",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn single_channel_separation_standardizes() {
    let tmp = tempfile::tempdir().unwrap();
    let x = tmp.path().join("x.wav");
    let input = synth::demo_sources(1, 0.5, 8000).unwrap().remove(0);
    write_wav(&input, &x).unwrap();
    assert_ok(&voxsep(&[
        "--out",
        &s(tmp.path()),
        "separate",
        &s(&x),
        "--components",
        "1",
    ]));
    let y = load_wav(tmp.path().join("s1.wav")).unwrap().remove(0);
    let back = load_wav(&x).unwrap().remove(0);
    let r = voxsep::scene::pearson(y.samples(), back.samples()).unwrap();
    assert!(r.abs() > 0.9999, "{r}");
}

#[test]
fn enhance_writes_a_denoised_file() {
    let tmp = tempfile::tempdir().unwrap();
    let rate = 16000;
    let gap = MonoSignal::zeros(rate as usize / 2, rate).unwrap();
    let tone = synth::sine(300.0, 0.5, 1.0, rate).unwrap();
    let clean = MonoSignal::concat(&[gap.clone(), tone, gap]).unwrap();
    let noise = synth::white_noise(0.05, clean.duration_s(), rate, 2).unwrap();
    let noisy: Vec<f64> = clean
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(a, b)| a + b)
        .collect();
    let input = tmp.path().join("noisy.wav");
    write_wav(&MonoSignal::new(noisy, rate).unwrap(), &input).unwrap();
    let output = tmp.path().join("clean.wav");
    assert_ok(&voxsep(&[
        "--out",
        &s(tmp.path()),
        "enhance",
        &s(&input),
        &s(&output),
        "--alpha",
        "2.5",
        "--beta",
        "0.01",
    ]));
    let y = load_wav(&output).unwrap().remove(0);
    let head = &y.samples()[2048..6000];
    let rms = (head.iter().map(|v| v * v).sum::<f64>() / head.len() as f64).sqrt();
    assert!(rms < 0.02, "{rms}");
    assert_ok(&voxsep(&["--out", &s(tmp.path()), "enhance", &s(&input)]));
    assert!(tmp.path().join("noisy_enhanced.wav").exists());
    assert!(tmp.path().join("run_info.json").exists());

    let bad = voxsep(&[
        "--out",
        &s(tmp.path()),
        "enhance",
        &s(&input),
        "--alpha",
        "0.5",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn analyze_tone_report() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("tone.wav");
    write_wav(&synth::sine(220.0, 0.5, 1.5, 44100).unwrap(), &input).unwrap();
    let report = tmp.path().join("tone_report.json");
    assert_ok(&voxsep(&[
        "--out",
        &s(tmp.path()),
        "analyze",
        &s(&input),
        "--report",
        &s(&report),
        "--csv",
        "--calib-spl",
        "90",
    ]));
    let r = read_json(&report);
    assert_schema_valid(&r);
    assert!((r["f0"]["mean_hz"].as_f64().unwrap() - 220.0).abs() < 1.0);
    assert!(r["f0"]["voiced_fraction"].as_f64().unwrap() >= 0.9);
    assert!(r["jitter"]["local_pct"].as_f64().unwrap() < 0.01);
    assert!(r["shimmer"]["local_pct"].as_f64().unwrap() < 0.05);
    assert!(r["semitone_sd"].as_f64().unwrap() < 0.01);
    assert_eq!(r["loudness"]["dbfs_to_spl"], 90.0);
    assert_eq!(
        r["provenance"]["config"]["calibration"]["dbfs_to_spl"],
        90.0
    );
    assert_eq!(r["provenance"]["inputs"][0]["name"], "tone.wav");
    let f0 = std::fs::read_to_string(tmp.path().join("tone_f0.csv")).unwrap();
    assert!(f0.starts_with("time_s,f0_hz,voiced,peak_r\n"));
    assert!(tmp.path().join("tone_loudness.csv").exists());
}

#[test]
fn analyze_silence_reports_nulls_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("quiet.wav");
    write_wav(&MonoSignal::zeros(16000, 16000).unwrap(), &input).unwrap();
    let out = voxsep(&["--out", &s(tmp.path()), "analyze", &s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_json(&tmp.path().join("quiet.json"));
    assert_schema_valid(&r);
    assert!(r["f0"]["mean_hz"].is_null());
    assert!(r["sharpness_acum"].is_null());
    assert_eq!(r["null_reasons"]["f0.mean_hz"], "no_voiced_frames");
    assert_eq!(r["null_reasons"]["loudness.mean_phon"], "zero_loudness");
    for (k, v) in r["jitter"].as_object().unwrap() {
        assert!(v.is_null());
        assert!(r["null_reasons"][format!("jitter.{k}")].is_string());
    }
}

#[test]
fn analyze_concat_and_multiple_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("task2.wav");
    let b = tmp.path().join("task3.wav");
    write_wav(&synth::sine(180.0, 0.5, 0.6, 16000).unwrap(), &a).unwrap();
    write_wav(&synth::sine(200.0, 0.5, 0.6, 16000).unwrap(), &b).unwrap();
    assert_ok(&voxsep(&[
        "--out",
        &s(tmp.path()),
        "analyze",
        &s(&a),
        &s(&b),
        "--concat",
    ]));
    let r = read_json(&tmp.path().join("task2+task3.json"));
    assert!((r["duration_s"].as_f64().unwrap() - 1.2).abs() < 1e-9);
    assert_eq!(r["provenance"]["derivation"][0], "concat");

    let sep = tmp.path().join("sep");
    assert_ok(&voxsep(&["--out", &s(&sep), "analyze", &s(&a), &s(&b)]));
    assert!(sep.join("task2.json").exists() && sep.join("task3.json").exists());
    let table = std::fs::read_to_string(sep.join("comparison.csv")).unwrap();
    assert!(table.starts_with("signal_id,feature,value,unit\n"));

    let clash = voxsep(&[
        "--out",
        &s(&sep),
        "analyze",
        &s(&a),
        &s(&b),
        "--report",
        "x.json",
    ]);
    assert_eq!(clash.status.code(), Some(1));
}

#[test]
fn pipeline_emits_reports_and_table() {
    let tmp = tempfile::tempdir().unwrap();
    let x = demo_scene(&tmp.path().join("scene"));
    let out = tmp.path().join("run");
    let o = s(&out);
    let mut args = vec!["--seed", "3", "--out", o.as_str(), "pipeline"];
    args.extend(x.iter().map(|v| v.as_str()));
    assert_ok(&voxsep(&args));
    for k in 1..=3 {
        let r = read_json(&out.join(format!("reports/s{k}.json")));
        assert_schema_valid(&r);
        assert_eq!(r["provenance"]["command"], "pipeline");
        assert_eq!(r["provenance"]["inputs"].as_array().unwrap().len(), 3);
        assert!(out.join(format!("enhanced/s{k}.wav")).exists());
        assert!(out.join(format!("contours/s{k}_f0.csv")).exists());
    }
    let table = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("signal_id,feature,value,unit"));
    let ids: std::collections::BTreeSet<&str> =
        lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids.into_iter().collect::<Vec<_>>(), ["s1", "s2", "s3"]);
    let enhance = read_json(&out.join("enhanced/enhance.json"));
    assert_eq!(enhance.as_array().unwrap().len(), 3);
}

#[test]
fn config_file_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("tone.wav");
    write_wav(&synth::sine(150.0, 0.5, 1.0, 16000).unwrap(), &input).unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"seed": 4, "perturb": {"pq_order": 7}}"#).unwrap();
    assert_ok(&voxsep(&[
        "--config",
        &s(&cfg),
        "--out",
        &s(tmp.path()),
        "analyze",
        &s(&input),
    ]));
    let r = read_json(&tmp.path().join("tone.json"));
    assert!(r["jitter"]["ppq7_pct"].is_number());
    assert_eq!(r["provenance"]["seed"], 4);

    std::fs::write(&cfg, r#"{"perturb": {"order": 7}}"#).unwrap();
    let bad = voxsep(&[
        "--config",
        &s(&cfg),
        "--out",
        &s(tmp.path()),
        "analyze",
        &s(&input),
    ]);
    assert_eq!(bad.status.code(), Some(1));

    assert_eq!(voxsep(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(voxsep(&["--help"]).status.code(), Some(0));
    let missing: PathBuf = tmp.path().join("absent.wav");
    assert_eq!(
        voxsep(&["--out", &s(tmp.path()), "analyze", &s(&missing)])
            .status
            .code(),
        Some(2)
    );
    let garbage = tmp.path().join("garbage.wav");
    std::fs::write(&garbage, b"not a wav file at all").unwrap();
    assert_eq!(
        voxsep(&["--out", &s(tmp.path()), "analyze", &s(&garbage)])
            .status
            .code(),
        Some(2)
    );
}
