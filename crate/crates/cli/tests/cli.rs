use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use erosion_core::harness::load_sweep;
use erosion_core::nn::{load_model, Model};

const TRAIN: &str = r#"
architecture = { type = "kim_cnn", embed_dim = 16, filters_per_size = 8 }

[train]
epochs = 3

[data]
val_fraction = 0.25
synthetic = { n = 800, vocab_size = 100, signal_tokens = 8, noise_tokens_per_example = 6 }
"#;

const SWEEP: &str = r#"
grid = [0.0, 0.001, 0.1, 1.0]
repeats = 2
master_seed = 5

[model.train]
architecture = { type = "kim_cnn", embed_dim = 16, filters_per_size = 8 }
train = { epochs = 2 }

[dataset]
val_fraction = 0.25
source = { synthetic = { n = 600, vocab_size = 100, signal_tokens = 8, noise_tokens_per_example = 6 } }

[erosion]
method = "noise_post"
selector = "all"
"#;

fn bin(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neural-erosion"))
        .current_dir(dir)
        .args(args.split_whitespace())
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &str) -> String {
    let out = bin(dir, args);
    assert!(
        out.status.success(),
        "`{args}` failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr_of_failure(dir: &Path, args: &str) -> String {
    let out = bin(dir, args);
    assert!(!out.status.success(), "`{args}` unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn trained(dir: &Path) {
    fs::write(dir.join("train.toml"), TRAIN).unwrap();
    let out = ok(dir, "train --config train.toml --data synthetic --out base.ckpt");
    assert!(out.contains("validation accuracy"));
}

#[test]
fn train_then_prune_writes_a_loadable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    trained(d);
    ok(
        d,
        "erode --ckpt base.ckpt --method prune --select conv --fraction 0.5 --seed 3 --out pruned.ckpt",
    );
    let base: Model = load_model(d.join("base.ckpt")).unwrap();
    let pruned: Model = load_model(d.join("pruned.ckpt")).unwrap();
    assert_eq!(base.arch, pruned.arch);
    for (a, b) in base.params.entries().iter().zip(pruned.params.entries()) {
        if a.path().starts_with("conv") {
            let zeros = b.weight.data().iter().filter(|&&w| w == 0.0).count();
            assert_eq!(zeros, (0.5 * a.weight.numel() as f64).round() as usize);
        } else {
            assert!(a.bit_eq(b));
        }
    }
}

#[test]
fn erode_with_zero_sigma_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    trained(d);
    ok(
        d,
        "erode --ckpt base.ckpt --method noise_post --sigma 0 --out same.ckpt",
    );
    assert_eq!(
        fs::read(d.join("base.ckpt")).unwrap(),
        fs::read(d.join("same.ckpt")).unwrap()
    );
}

#[test]
fn erode_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    trained(d);
    let e = stderr_of_failure(
        d,
        "erode --ckpt base.ckpt --method noise_post --fraction 0.5 --out x.ckpt",
    );
    assert!(e.contains("requires sigma"), "{e}");
    let e = stderr_of_failure(
        d,
        "erode --ckpt base.ckpt --method noise_train --sigma 0.1 --out x.ckpt",
    );
    assert!(e.contains("erosion_hook"), "{e}");
    let e = stderr_of_failure(
        d,
        "erode --ckpt base.ckpt --method deactivate --select dense --fraction 0.5 --out x.ckpt",
    );
    assert!(e.contains("not deactivatable"), "{e}");
    let e = stderr_of_failure(
        d,
        "erode --ckpt missing.ckpt --method prune --fraction 0.5 --out x.ckpt",
    );
    assert!(e.contains("missing.ckpt"), "{e}");
    stderr_of_failure(d, "erode --ckpt base.ckpt --method melt --sigma 0.1 --out x.ckpt");
    assert!(!d.join("x.ckpt").exists());
}

#[test]
fn sweep_is_deterministic_and_report_rerenders_it() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("sweep.toml"), SWEEP).unwrap();
    ok(d, "sweep --config sweep.toml --out a");
    ok(d, "sweep --config sweep.toml --out b");
    for f in ["results.csv", "accuracy.svg", "sweep.json"] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    ok(d, "report --sweep a --out c");
    for f in ["results.csv", "accuracy.svg"] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("c").join(f)).unwrap(),
            "{f}"
        );
    }

    let result = load_sweep(d.join("a")).unwrap();
    assert_eq!(result.records.len(), 8);
    for r in result.records.iter().filter(|r| r.magnitude == 0.0) {
        assert_eq!(r.accuracy, result.baseline_accuracy);
        assert_eq!(r.label_divergence, 0.0);
    }
    let csv = fs::read_to_string(d.join("a/results.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("magnitude,seed,accuracy,label_divergence"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn sweep_reports_missing_checkpoint_path() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = SWEEP.replace(
        "[model.train]\narchitecture = { type = \"kim_cnn\", embed_dim = 16, filters_per_size = 8 }\ntrain = { epochs = 2 }",
        "[model]\ncheckpoint = \"nowhere.ckpt\"",
    );
    assert_ne!(config, SWEEP);
    fs::write(d.join("sweep.toml"), config).unwrap();
    let e = stderr_of_failure(d, "sweep --config sweep.toml --out a");
    assert!(e.contains("nowhere.ckpt"), "{e}");
}

#[test]
fn iq_score_calibration_and_overrides() {
    let d = Path::new(".");
    let score = |args: &str| -> f64 { ok(d, &format!("iq-score {args}")).trim().parse().unwrap() };
    assert_eq!(score("--verbal 25 --quant 13"), 100.0);
    assert_eq!(score("--verbal 50 --quant 26"), 130.0);
    assert_eq!(score("--verbal 0 --quant 0"), 70.0);
    assert_eq!(
        score("--verbal 50 --quant 26 --weights 0.7,0.3 --baseline 90 --slope 40"),
        110.0
    );
    stderr_of_failure(d, "iq-score --verbal 51 --quant 0");
    stderr_of_failure(d, "iq-score --verbal 5 --quant 2 --weights 0.7");
}
