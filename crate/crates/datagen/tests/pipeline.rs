use std::fs;
use std::path::Path;
use std::process::Command;

use isar_core::imaging::{read_f32, CrossRangeStatus};
use isar_datagen::manifest::Manifest;
use isar_datagen::{run_generation, verify_manifest, DatasetConfig, Precision, TargetConfig, MANIFEST_NAME};

fn tiny(out: &Path) -> DatasetConfig {
    DatasetConfig {
        output_dir: out.to_path_buf(),
        targets: vec![TargetConfig { label: "bicycle".into(), mesh: None, speed_mps: 5.0 }],
        routes: vec!["S2E".into()],
        duration_s: 2.0,
        last_cpi: Some(3),
        snr_db: vec![0.0, 10.0],
        wind_mps: vec![2.5],
        precision: Precision::F32,
        ..DatasetConfig::default()
    }
}

fn rewrite_manifest(path: &Path, f: impl Fn(&mut serde_json::Value)) {
    let text = fs::read_to_string(path).unwrap();
    let lines: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if i > 0 {
                f(&mut v);
            }
            v.to_string()
        })
        .collect();
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn generates_verifies_and_flags_damage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    let s = run_generation(&cfg).unwrap();
    // CPIs 2 and 3, each ideal + 2 noisy + 1 cluttered
    assert_eq!(s.written, 8);
    let rep = verify_manifest(&s.manifest).unwrap();
    assert!(rep.is_clean(), "{rep}");
    assert_eq!(rep.totals().ideal, 2);

    let m = Manifest::read(&s.manifest).unwrap();
    assert!(!m.header.incomplete);
    for e in &m.entries {
        let (h, px) = read_f32(&dir.path().join(&e.f32)).unwrap();
        assert_eq!(px.dim(), (1200, 667));
        assert_eq!(h.meta.cpi_index, e.cpi_index);
        assert_eq!(h.cross_range, e.cross_range);
        assert_ne!(e.cross_range, CrossRangeStatus::Undefined);
        assert!(px.iter().all(|p| p.is_finite()));
    }

    let victim = m.entries[3].png.clone().unwrap();
    fs::remove_file(dir.path().join(&victim)).unwrap();
    let rep = verify_manifest(&s.manifest).unwrap();
    assert_eq!(rep.issues.len(), 1, "{rep}");
    assert!(rep.issues[0].message.contains(&victim));

    let path = dir.path().join(MANIFEST_NAME);
    rewrite_manifest(&path, |v| {
        if v["corruption"]["kind"] == "noise" && v["corruption"]["snr_db"] == 10.0 {
            v["corruption"]["snr_db"] = serde_json::json!(7.0);
        }
    });
    let rep = verify_manifest(&path).unwrap();
    assert!(rep.issues.iter().any(|i| i.message.contains("not on the ladder")), "{rep}");
}

#[test]
fn resumes_missing_images_and_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    let first = run_generation(&cfg).unwrap();
    let m = Manifest::read(&first.manifest).unwrap();
    let target = &m.entries.iter().find(|e| e.image_id.contains("wind_")).unwrap().f32;
    let original = fs::read(dir.path().join(target)).unwrap();
    fs::remove_file(dir.path().join(target)).unwrap();

    let again = run_generation(&cfg).unwrap();
    assert_eq!(again.written, 1);
    assert_eq!(again.reused, 7);
    assert_eq!(fs::read(dir.path().join(target)).unwrap(), original);
    assert!(verify_manifest(&again.manifest).unwrap().is_clean());

    let other = tempfile::tempdir().unwrap();
    run_generation(&tiny(other.path())).unwrap();
    for e in &m.entries {
        assert_eq!(
            fs::read(dir.path().join(&e.f32)).unwrap(),
            fs::read(other.path().join(&e.f32)).unwrap(),
            "{}",
            e.image_id
        );
    }

    let changed = DatasetConfig { duration_s: 2.5, ..cfg };
    let err = run_generation(&changed).unwrap_err();
    assert!(err.to_string().contains("different configuration"), "{err}");
}

#[test]
fn rejects_mislabelled_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(dir.path());
    cfg.targets[0].mesh = Some("builtin:truck".into());
    let err = run_generation(&cfg).unwrap_err();
    assert!(format!("{err:#}").contains("labelled"), "{err:#}");

    let mut cfg = tiny(dir.path());
    cfg.targets[0].mesh = Some(dir.path().join("nowhere.obj").to_string_lossy().into_owned());
    let err = run_generation(&cfg).unwrap_err();
    assert!(format!("{err:#}").contains("target bicycle"), "{err:#}");
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_isar-forge");
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    fs::write(
        &cfg_path,
        "output_dir = \"out\"\nroutes = [\"S2E\"]\nduration_s = 2.0\nlast_cpi = 2\nprecision = \"f32\"\n\
         [[targets]]\nlabel = \"bicycle\"\nspeed_mps = 5.0\n",
    )
    .unwrap();
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let cfg = cfg_path.to_str().unwrap();

    let dry = run(&["generate", "--config", cfg, "--dry-run"]);
    assert_eq!(dry.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&dry.stdout).contains("total images: 9"));

    assert_eq!(run(&["generate", "--config", cfg]).status.code(), Some(0));
    let manifest = dir.path().join("out").join(MANIFEST_NAME);
    assert_eq!(run(&["verify", "--manifest", manifest.to_str().unwrap()]).status.code(), Some(0));

    fs::remove_file(dir.path().join("out/bicycle/S2E/ideal/002.f32")).unwrap();
    assert_eq!(run(&["verify", "--manifest", manifest.to_str().unwrap()]).status.code(), Some(3));

    fs::write(&cfg_path, "durations = 1\n").unwrap();
    assert_eq!(run(&["generate", "--config", cfg]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
