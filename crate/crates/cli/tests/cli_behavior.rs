//! Subcommand behavior: outputs, exit codes, determinism and the
//! stdout/stderr split.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use changekit::io::{save_manifest, save_mask, ManifestEntry};
use changekit::mask::LabelMask;
use changekit_testkit::corpus::write_manifest_fixture;

fn changekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_changekit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_changekit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is a single JSON document")
}

fn write_mask_fixture(dir: &Path) -> PathBuf {
    // Three building blobs and one road blob.
    let mut mask = LabelMask::new(64, 64).unwrap();
    mask.fill_rect(2, 2, 5, 5, 2).unwrap();
    mask.fill_rect(30, 30, 33, 33, 2).unwrap();
    mask.fill_rect(50, 8, 55, 12, 2).unwrap();
    mask.fill_rect(10, 50, 30, 52, 1).unwrap();
    let path = dir.join("mask.png");
    save_mask(&mask, &path).unwrap();
    path
}

fn write_rgb_image(dir: &Path, name: &str, side: u32, tweak: bool) -> PathBuf {
    let mut img = image::RgbImage::new(side, side);
    for (x, y, pixel) in img.enumerate_pixels_mut() {
        let base = ((x * 7 + y * 13) % 251) as u8;
        pixel.0 = [base, base.wrapping_add(40), base.wrapping_add(90)];
        if tweak && x > side / 2 && y > side / 2 {
            pixel.0 = [255, 0, 0];
        }
    }
    let path = dir.join(name);
    img.save(&path).unwrap();
    path
}

#[test]
fn analyze_mask_reports_counts_instances_and_regions() {
    let dir = tempfile::tempdir().unwrap();
    let mask = write_mask_fixture(dir.path());
    let report = stdout_json(&changekit(&["analyze-mask", mask.to_str().unwrap()]));
    assert_eq!(report["counts"]["building"], 3);
    assert_eq!(report["counts"]["road"], 1);
    assert_eq!(report["instances"].as_array().unwrap().len(), 4);
    assert_eq!(report["regions"]["building"].as_array().unwrap().len(), 3);
}

#[test]
fn analyze_mask_of_all_zero_mask_reports_zero_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.png");
    save_mask(&LabelMask::new(32, 32).unwrap(), &path).unwrap();
    let report = stdout_json(&changekit(&["analyze-mask", path.to_str().unwrap()]));
    assert_eq!(report["counts"]["road"], 0);
    assert_eq!(report["counts"]["building"], 0);
    assert!(report["instances"].as_array().unwrap().is_empty());
}

#[test]
fn analyze_mask_rejects_corrupt_png_with_validation_exit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corrupt.png");
    std::fs::write(&path, b"this is not a png").unwrap();
    let output = changekit(&["analyze-mask", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(!output.stderr.is_empty());
}

#[test]
fn missing_mask_file_is_an_io_error() {
    let output = changekit(&["analyze-mask", "/nonexistent/mask.png"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn compose_prompt_emits_the_fixed_section_order() {
    let dir = tempfile::tempdir().unwrap();
    let mask = write_mask_fixture(dir.path());
    let output = changekit(&[
        "compose-prompt",
        "new buildings appear",
        mask.to_str().unwrap(),
        "Describe the changes.",
    ]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.matches("<image>").count(), 2);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "<image> <image>");
    assert!(lines[1].starts_with("Scene summary: new buildings appear"));
    assert!(lines[2].starts_with("Change details: Changed roads: 1"));
    assert!(lines[3].starts_with("Question: Describe the changes."));
}

#[test]
fn compose_prompt_merges_history_without_new_placeholders() {
    let dir = tempfile::tempdir().unwrap();
    let mask = write_mask_fixture(dir.path());
    let history = dir.path().join("history.jsonl");
    std::fs::write(
        &history,
        concat!(
            "{\"role\":\"user\",\"content\":\"Any change in <image> and <image>? Please answer yes or no.\"}\n",
            "{\"role\":\"assistant\",\"content\":\"Yes\"}\n"
        ),
    )
    .unwrap();
    let output = changekit(&[
        "compose-prompt",
        "new buildings appear",
        mask.to_str().unwrap(),
        "Where exactly?",
        "--history",
        history.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.matches("<image>").count(), 2);
    assert!(text.starts_with("User: "));
}

#[test]
fn compose_prompt_rejects_empty_query() {
    let dir = tempfile::tempdir().unwrap();
    let mask = write_mask_fixture(dir.path());
    let output = changekit(&["compose-prompt", "caption", mask.to_str().unwrap(), "  "]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn build_dataset_prints_stats_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 42, 12, 5);
    let out_a = dir.path().join("a.jsonl");
    let out_b = dir.path().join("b.jsonl");

    let first = changekit(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        out_a.to_str().unwrap(),
        "--seed",
        "11",
    ]);
    let stats = stdout_json(&first);
    assert_eq!(stats["caption"], 5 * 5 + 7);
    assert_eq!(stats["binary"], 12);
    assert_eq!(stats["total"], 32 + 12 + 24 + 24 + 36);

    let second = changekit(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        out_b.to_str().unwrap(),
        "--seed",
        "11",
    ]);
    assert!(second.status.success());
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
}

#[test]
fn build_dataset_of_empty_manifest_succeeds_with_zero_stats() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    save_manifest(&[], &manifest).unwrap();
    let out = dir.path().join("out.jsonl");
    let output = changekit(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        out.to_str().unwrap(),
    ]);
    let stats = stdout_json(&output);
    assert_eq!(stats["total"], 0);
    assert_eq!(std::fs::read(&out).unwrap(), b"");
}

#[test]
fn build_dataset_with_bad_mask_fails_loudly() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.png"), b"not a png").unwrap();
    std::fs::write(dir.path().join("img.png"), b"x").unwrap();
    let entries = vec![ManifestEntry {
        pair_id: "p1".into(),
        image_before: "img.png".into(),
        image_after: "img.png".into(),
        mask: "bad.png".into(),
        changed: false,
        captions: vec![],
        split: None,
    }];
    let manifest = dir.path().join("manifest.json");
    save_manifest(&entries, &manifest).unwrap();
    let out = dir.path().join("out.jsonl");
    let output = changekit(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(!output.stderr.is_empty());
    assert!(output.stdout.is_empty());
}

#[test]
fn stats_subcommand_recounts_a_built_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 5, 6, 3);
    let out = dir.path().join("out.jsonl");
    changekit(&["build-dataset", manifest.to_str().unwrap(), out.to_str().unwrap()]);
    let stats = stdout_json(&changekit(&["stats", out.to_str().unwrap()]));
    assert_eq!(stats["caption"], 5 * 3 + 3);
    assert_eq!(stats["dialogue"], 18);
}

#[test]
fn evaluate_scores_perfectly_against_ground_truth_echo() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 9, 8, 4);
    let out = dir.path().join("out.jsonl");
    changekit(&["build-dataset", manifest.to_str().unwrap(), out.to_str().unwrap()]);

    // Echo every non-dialogue ground truth as the prediction.
    let records = changekit::io::read_jsonl(&out).unwrap();
    let preds_path = dir.path().join("preds.jsonl");
    let mut lines = String::new();
    for record in &records {
        if record.task == changekit::builder::Task::Dialogue {
            continue;
        }
        lines.push_str(
            &serde_json::to_string(&serde_json::json!({
                "id": record.record_id,
                "prediction": record.last_answer(),
            }))
            .unwrap(),
        );
        lines.push('\n');
    }
    std::fs::write(&preds_path, lines).unwrap();

    let report = stdout_json(&changekit(&[
        "evaluate",
        out.to_str().unwrap(),
        preds_path.to_str().unwrap(),
    ]));
    assert_eq!(report["binary"]["scores"]["accuracy"], 1.0);
    assert_eq!(report["count"]["scores"]["mae_road"], 0.0);
    assert_eq!(report["localization"]["scores"]["subset_accuracy"], 1.0);
    assert_eq!(report["caption"]["scores"]["bleu4"], 100.0);
    assert_eq!(report["coverage"]["missing_predictions"], 0);
}

#[test]
fn evaluate_warns_on_missing_predictions_and_scores_them_wrong() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 13, 4, 2);
    let out = dir.path().join("out.jsonl");
    changekit(&["build-dataset", manifest.to_str().unwrap(), out.to_str().unwrap()]);

    let records = changekit::io::read_jsonl(&out).unwrap();
    let preds_path = dir.path().join("preds.jsonl");
    let mut lines = String::new();
    for (i, record) in records
        .iter()
        .filter(|r| r.task == changekit::builder::Task::Binary)
        .enumerate()
    {
        if i % 2 == 0 {
            lines.push_str(
                &serde_json::to_string(&serde_json::json!({
                    "id": record.record_id,
                    "prediction": record.last_answer(),
                }))
                .unwrap(),
            );
            lines.push('\n');
        }
    }
    std::fs::write(&preds_path, lines).unwrap();

    let output = changekit(&[
        "evaluate",
        out.to_str().unwrap(),
        preds_path.to_str().unwrap(),
        "--task",
        "binary",
    ]);
    let report = stdout_json(&output);
    assert_eq!(report["coverage"]["missing_predictions"], 2);
    assert_eq!(report["binary"]["unparseable"], 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("warning"));
}

#[test]
fn evaluate_binary_confusion_matches_a_hand_count() {
    // gts [yes, no, yes, no] with preds [yes, yes, no, no]:
    // one TP, one FP, one FN, one TN.
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 21, 4, 2);
    let out = dir.path().join("out.jsonl");
    changekit(&["build-dataset", manifest.to_str().unwrap(), out.to_str().unwrap()]);

    let records = changekit::io::read_jsonl(&out).unwrap();
    let binary: Vec<_> = records
        .iter()
        .filter(|r| r.task == changekit::builder::Task::Binary)
        .collect();
    assert_eq!(binary.len(), 4);
    // Corpus fixture puts the changed pairs first.
    assert_eq!(binary[0].last_answer(), "Yes");
    assert_eq!(binary[1].last_answer(), "Yes");
    assert_eq!(binary[2].last_answer(), "No");
    assert_eq!(binary[3].last_answer(), "No");

    let preds = ["Yes", "No", "Yes", "No"];
    let mut lines = String::new();
    for (record, pred) in binary.iter().zip(preds) {
        lines.push_str(
            &serde_json::to_string(
                &serde_json::json!({"id": record.record_id, "prediction": pred}),
            )
            .unwrap(),
        );
        lines.push('\n');
    }
    let preds_path = dir.path().join("preds.jsonl");
    std::fs::write(&preds_path, lines).unwrap();

    let report = stdout_json(&changekit(&[
        "evaluate",
        out.to_str().unwrap(),
        preds_path.to_str().unwrap(),
        "--task",
        "binary",
    ]));
    assert_eq!(report["binary"]["scores"]["accuracy"], 0.5);
    assert_eq!(report["binary"]["scores"]["precision"], 0.5);
    assert_eq!(report["binary"]["scores"]["recall"], 0.5);
    assert_eq!(report["binary"]["scores"]["f1"], 0.5);
}

#[test]
fn vision_demo_is_deterministic_and_shape_correct() {
    let dir = tempfile::tempdir().unwrap();
    let before = write_rgb_image(dir.path(), "before.png", 64, false);
    let after = write_rgb_image(dir.path(), "after.png", 64, true);

    let run = || {
        changekit(&[
            "vision-demo",
            before.to_str().unwrap(),
            after.to_str().unwrap(),
            "--seed",
            "5",
        ])
    };
    let first = run();
    let second = run();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same seed must give identical bytes");

    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(report["pyramid"][0]["height"], 16);
    assert_eq!(report["pyramid"][3]["height"], 2);
    assert_eq!(report["decoded"]["height"], 32);
    assert_eq!(report["mask"]["height"], 64);
}

#[test]
fn vision_demo_with_zero_head_reports_no_changes() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_rgb_image(dir.path(), "same.png", 64, false);
    let report = stdout_json(&changekit(&[
        "vision-demo",
        img.to_str().unwrap(),
        img.to_str().unwrap(),
        "--zero-head",
    ]));
    assert_eq!(report["changed_components"], 0);
    assert_eq!(report["mask"]["changed_pixels"], 0);
    assert_eq!(report["mask"]["min"], 0.5);
    assert_eq!(report["mask"]["max"], 0.5);
    assert!(report["regions"].as_array().unwrap().is_empty());
}

#[test]
fn vision_demo_rejects_non_divisible_images() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_rgb_image(dir.path(), "odd.png", 48, false);
    let output = changekit(&[
        "vision-demo",
        img.to_str().unwrap(),
        img.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn config_file_applies_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let mask = write_mask_fixture(dir.path());
    let config = dir.path().join("config.txt");
    std::fs::write(&config, "min_area=1000\n").unwrap();

    // With min_area 1000 every component is filtered out.
    let filtered = stdout_json(&run_in(
        dir.path(),
        &["analyze-mask", mask.to_str().unwrap(), "--config", config.to_str().unwrap()],
    ));
    assert_eq!(filtered["counts"]["building"], 0);

    // The flag wins over the file.
    let unfiltered = stdout_json(&run_in(
        dir.path(),
        &[
            "analyze-mask",
            mask.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
            "--min-area",
            "1",
        ],
    ));
    assert_eq!(unfiltered["counts"]["building"], 3);
}

#[test]
fn invalid_dialogues_per_pair_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 2, 2, 1);
    let out = dir.path().join("out.jsonl");
    let output = changekit(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        out.to_str().unwrap(),
        "--dialogues-per-pair",
        "0",
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unknown_arguments_exit_with_validation_code() {
    let output = changekit(&["no-such-subcommand"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn custom_template_bank_replaces_the_builtin_one() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 31, 2, 1);

    // Minimal valid bank: five probe templates per family.
    let mut bank = String::new();
    for family in [
        "caption",
        "binary",
        "count",
        "localization",
        "dialogue_open",
        "dialogue_caption",
        "dialogue_count",
        "dialogue_localization",
    ] {
        let follow_up = family.starts_with("dialogue_") && family != "dialogue_open";
        let images = if follow_up { "" } else { " <image> <image>" };
        let category = if family.contains("count") || family.contains("localization") {
            " {category}"
        } else {
            ""
        };
        for i in 0..5 {
            bank.push_str(&format!("{family}\tprobe {family} {i}{category}{images}\n"));
        }
    }
    let bank_path = dir.path().join("bank.tsv");
    std::fs::write(&bank_path, bank).unwrap();

    let out = dir.path().join("out.jsonl");
    let output = changekit(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        out.to_str().unwrap(),
        "--template-bank",
        bank_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let body = std::fs::read_to_string(&out).unwrap();
    assert!(body.contains("probe caption"));
    assert!(body.contains("probe count"));

    // A bank violating the five-per-family rule is a validation error.
    std::fs::write(&bank_path, "caption\tonly one <image> <image>\n").unwrap();
    let output = changekit(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        out.to_str().unwrap(),
        "--template-bank",
        bank_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn evaluate_output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest_fixture(dir.path(), 77, 6, 3);
    let out = dir.path().join("out.jsonl");
    changekit(&["build-dataset", manifest.to_str().unwrap(), out.to_str().unwrap()]);

    let records = changekit::io::read_jsonl(&out).unwrap();
    let preds_path = dir.path().join("preds.jsonl");
    let mut lines = String::new();
    for record in records
        .iter()
        .filter(|r| r.task != changekit::builder::Task::Dialogue)
    {
        lines.push_str(
            &serde_json::to_string(&serde_json::json!({
                "id": record.record_id,
                "prediction": record.last_answer(),
            }))
            .unwrap(),
        );
        lines.push('\n');
    }
    std::fs::write(&preds_path, lines).unwrap();

    let run = || changekit(&["evaluate", out.to_str().unwrap(), preds_path.to_str().unwrap()]);
    let first = run();
    let second = run();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}
