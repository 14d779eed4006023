//! Smoke tests for the binary: happy paths stay cheap (no training) and the
//! failure paths exit with the documented codes.

use std::path::Path;
use std::process::Command;

fn vicnn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vicnn"))
}

#[test]
fn stimuli_writes_pngs_masks_sidecars_and_run_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = vicnn()
        .args(["stimuli", "--out"])
        .arg(dir.path())
        .args(["--kind", "all", "--colored", "both"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for stem in ["dungeon_s4_gray", "dungeon_s4_color", "chevreul_s10_gray"] {
        assert!(dir.path().join(format!("{stem}.png")).exists(), "{stem}.png");
        assert!(dir.path().join(format!("{stem}.json")).exists(), "{stem}.json");
    }
    assert!(dir.path().join("run_manifest.json").exists());
}

#[test]
fn prepare_synthesizes_and_emits_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out_dir = dir.path().join("data");
    let out = vicnn()
        .args(["prepare", "--synth", "6", "--seed", "3", "--corpus"])
        .arg(&corpus)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"sample_seed\""));
    assert_eq!(corpus.read_dir().unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "png")
    }).count(), 6);
}

#[test]
fn zoo_list_names_every_builder() {
    let out = vicnn().args(["zoo", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "base",
        "jain2009",
        "jain2009-pool",
        "jain2009-dilated-2",
        "jain2009-dilated-4",
        "jain2009-dilated-8",
        "jain2009-residual",
        "deep-residual-8",
    ] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
    // the base net's documented budget
    assert!(text.contains("1211"), "base param count missing:\n{text}");
}

#[test]
fn gradcheck_subcommand_passes() {
    let out = vicnn().args(["gradcheck", "--seed", "1"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("conv2d_s1_d1"));
}

#[test]
fn bad_usage_and_bad_inputs_use_distinct_exit_codes() {
    // clap usage error
    let out = vicnn().args(["train", "--task", "denoise"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // unknown architecture is a validation error, not a usage error
    let dir = tempfile::tempdir().unwrap();
    let out = vicnn()
        .args(["train", "--task", "denoise", "--arch", "nope", "--corpus"])
        .arg(dir.path())
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(2));

    // unreadable checkpoint
    let out = vicnn()
        .args(["eval", "--ckpt", "/nonexistent.vicnn", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());

    // config with an unknown key is rejected
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"no_such_option": 1}"#).unwrap();
    let out = vicnn()
        .arg("--config")
        .arg(&cfg)
        .args(["zoo", "list"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn eval_on_a_saved_checkpoint_writes_csv_and_svgs() {
    // hand-rolled identity-ish checkpoint: zero weights, zero bias
    use vicnn::trainer::{Checkpoint, CheckpointMeta, TrainConfig};
    let dir = tempfile::tempdir().unwrap();
    let spec = vicnn::zoo::build_base_net(3);
    let params = vicnn::ModelParams::init(&spec, 0);
    let ckpt = Checkpoint {
        spec,
        params,
        meta: CheckpointMeta {
            config: TrainConfig::new(vicnn::data::Task::Denoise, 0),
            history: Vec::new(),
            adam_steps: 0,
            best_epoch: 0,
            manifest_digest: None,
            diverged: false,
        },
    };
    let path = dir.path().join("m.vicnn");
    ckpt.save(&path).unwrap();

    let out_dir = dir.path().join("eval");
    let out = vicnn()
        .args(["eval", "--illusion", "dungeon", "--ckpt"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("effects.csv")).unwrap();
    assert!(csv.starts_with("model,stimulus,colored,scale,kernel,channel,effect,expected,verdict,tau"));
    assert!(csv.lines().count() > 1);
    assert!(has_svg(&out_dir));
    assert!(out_dir.join("run_manifest.json").exists());
}

fn has_svg(dir: &Path) -> bool {
    dir.read_dir()
        .unwrap()
        .any(|e| e.unwrap().path().extension().is_some_and(|x| x == "svg"))
}
