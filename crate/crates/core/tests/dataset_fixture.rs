use std::fs;
use std::path::Path;

use affect_core::classify::ClassifierKind;
use affect_core::model::{apply_exclusions, ExclusionRule, Flavor};
use affect_core::pipeline::{
    generate_synthetic_dataset, load_dataset, results_table, run_trials, summarize, ExperimentConfig, SynthSpec,
};
use affect_core::Error;

fn ecg_file(start: f64, n: usize) -> String {
    let mut s = String::from("# channel=ECG units=mV rate=256 sampling=uniform\n");
    for i in 0..n {
        s.push_str(&format!("{}\t{}\n", start + i as f64 / 256.0, (i as f64 * 0.1).sin()));
    }
    s
}

/// Two subjects with three rated trials each, both classes in both dimensions.
fn fixture(root: &Path) {
    for subject in ["S1", "S2"] {
        let sdir = root.join(subject);
        fs::create_dir_all(&sdir).unwrap();
        fs::write(sdir.join("ratings.tsv"), "video_id\tvalence\tarousal\nV1\t7\t6\nV2\t3\t7\nV3\t8\t2\n").unwrap();
        for video in ["V1", "V2", "V3"] {
            let vdir = sdir.join(video);
            fs::create_dir_all(&vdir).unwrap();
            fs::write(vdir.join("ECG.tsv"), ecg_file(0.0, 512)).unwrap();
        }
    }
}

#[test]
fn fixture_loads_six_trials() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    let trials = load_dataset(tmp.path(), Flavor::EmoWearLike).unwrap();
    assert_eq!(trials.len(), 6);
    assert!(trials.iter().all(|t| !t.faulty));
    assert_eq!(trials[0].subject_id.as_str(), "S1");
    assert_eq!(trials[5].video_id.as_str(), "V3");
}

#[test]
fn faulty_flag_drops_one_trial() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    fs::write(tmp.path().join("exclusions.tsv"), "subject_id\tvideo_id\treason\nS2\tV1\tsensor dropout\n").unwrap();
    let trials = load_dataset(tmp.path(), Flavor::EmoWearLike).unwrap();
    assert_eq!(trials.iter().filter(|t| t.faulty).count(), 1);
    let (kept, report) = apply_exclusions(trials, &ExclusionRule::default()).unwrap();
    assert_eq!(kept.len(), 5, "{report:?}");
}

#[test]
fn non_monotone_timestamps_name_the_file_line() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    let bad = tmp.path().join("S1").join("V2").join("ECG.tsv");
    fs::write(&bad, "# channel=ECG units=mV rate=256 sampling=uniform\n0\t1\n0.01\t2\n0.005\t3\n").unwrap();
    let err = load_dataset(tmp.path(), Flavor::EmoWearLike).unwrap_err();
    let text = err.to_string();
    assert!(matches!(err, Error::Parse { .. }), "{text}");
    assert!(text.contains("ECG.tsv") && text.contains('4') && text.contains("sample offset 2"), "{text}");
}

#[test]
fn rated_video_without_directory_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    fs::remove_dir_all(tmp.path().join("S1").join("V3")).unwrap();
    assert!(load_dataset(tmp.path(), Flavor::EmoWearLike).is_err());
}

#[test]
fn deap_run_has_one_row_per_classifier() {
    let mut spec = SynthSpec::default();
    spec.flavor = Flavor::DeapLike;
    spec.subjects = 3;
    spec.trials = 8;
    let data = generate_synthetic_dataset(&spec, 9).unwrap();
    let mut cfg = ExperimentConfig::for_flavor(Flavor::DeapLike, 9);
    cfg.classifiers = vec![ClassifierKind::NaiveBayes, ClassifierKind::Svm, ClassifierKind::LogReg];
    cfg.baseline_repetitions = 10;
    let out = run_trials(data.trials, &cfg).unwrap();
    let table = results_table(&summarize(&out.rows, cfg.sidedness), &cfg.dimensions);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    let classifiers: Vec<&str> = rows
        .iter()
        .filter(|r| r.split('\t').nth(1) != Some("-"))
        .map(|r| &r[..r.find('\t').unwrap()])
        .collect();
    assert_eq!(classifiers, ["NB", "SVM", "LR"], "{table}");
    assert!(rows.iter().all(|r| r.contains("BVP\tall") || r.contains("-\t-")), "{table}");
}
