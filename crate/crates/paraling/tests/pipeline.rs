use std::path::Path;

use paraling::commands::{cmd_attribution, cmd_experiment, cmd_extract, cmd_stats, cmd_synth};
use paraling::manifest::{read_manifest, write_manifest, Strictness};
use paraling::store::read_store;
use paraling::RunConfig;
use paraling_core::{ClassifierKind, FEATURE_COUNT};

fn corpus(dir: &Path, languages: usize, clips: usize) -> RunConfig {
    let cfg = RunConfig {
        out: dir.join("corpus"),
        synth_languages: languages,
        synth_clips: clips,
        workers: 1,
        seed: 3,
        reps: 2,
        ..RunConfig::default()
    };
    cmd_synth(&cfg).unwrap();
    RunConfig {
        manifest: Some(dir.join("corpus/manifest.csv")),
        out: dir.join("run"),
        ..cfg
    }
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn extract_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = corpus(dir.path(), 2, 2);
    let first = cmd_extract(&cfg).unwrap();
    let table = read_store(&cfg.store_path()).unwrap();
    assert_eq!(table.rows.len(), 4);
    let header = read(&cfg.store_path());
    assert_eq!(header.lines().next().unwrap().split(',').count(), FEATURE_COUNT + 4);
    assert!(cfg.out.join("extract_summary.json").exists());

    cfg.out = dir.path().join("run2");
    let second = cmd_extract(&cfg).unwrap();
    assert_eq!(first.artifacts, second.artifacts);
    assert_eq!(
        std::fs::read(dir.path().join("run/features.csv")).unwrap(),
        std::fs::read(dir.path().join("run2/features.csv")).unwrap()
    );
}

#[test]
fn unreadable_recording_strict_vs_lenient() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = corpus(dir.path(), 2, 2);
    let manifest_path = cfg.manifest.clone().unwrap();
    let mut m = read_manifest(&manifest_path, Strictness::Strict).unwrap();
    m.records[1].path = "missing.wav".into();
    write_manifest(&manifest_path, &m.records).unwrap();

    let err = cmd_extract(&cfg).unwrap_err();
    assert!(format!("{err:#}").contains(&m.records[1].id));
    assert!(!cfg.store_path().exists());

    cfg.mode = Strictness::Lenient;
    let summary = cmd_extract(&cfg).unwrap();
    assert_eq!(read_store(&cfg.store_path()).unwrap().rows.len(), 3);
    assert!(summary.notes.iter().any(|n| n.contains(&m.records[1].id)));
}

#[test]
fn two_language_protocol_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus(dir.path(), 2, 20);
    cmd_extract(&cfg).unwrap();

    let forest = cmd_experiment(&cfg).unwrap();
    assert_eq!(forest.results.len(), 9);
    let heat = read(&cfg.out.join("heatmap.csv"));
    let lines: Vec<&str> = heat.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "train\\test,lang00,lang01,all-but-train");
    assert!(lines[3].starts_with("all-but-test,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 4));
    assert_eq!(read(&cfg.out.join("conditions.csv")).lines().count(), 10);
    assert_eq!(read(&cfg.out.join("repetitions.csv")).lines().count(), 19);
    assert!(cfg.out.join("model_all.json").exists());
    assert!(cfg.out.join("schema.txt").exists());

    let again = cmd_experiment(&cfg).unwrap();
    assert_eq!(again.summary.artifacts, forest.summary.artifacts);

    let logistic_cfg = RunConfig {
        classifier: ClassifierKind::Logistic,
        out: dir.path().join("run_lr"),
        store: Some(cfg.store_path()),
        ..cfg.clone()
    };
    let lr = cmd_experiment(&logistic_cfg).unwrap();
    assert_eq!(lr.summary.config.classifier, ClassifierKind::Logistic);
    let names = |a: &std::collections::BTreeMap<String, String>| a.keys().cloned().collect::<Vec<_>>();
    assert_eq!(names(&lr.summary.artifacts), names(&forest.summary.artifacts));
    assert!(read(&logistic_cfg.out.join("conditions.csv")).contains(",logistic,"));

    let stats = cmd_stats(&cfg).unwrap();
    assert_eq!(stats.analysis.languages.len(), 2);
    assert_eq!(read(&cfg.out.join("stats.csv")).lines().count(), 1 + 2 * FEATURE_COUNT);
    let important = read(&cfg.out.join("important.csv"));
    assert_eq!(important.lines().count(), 1 + stats.analysis.important_features().len());

    let a = cmd_attribution(&cfg).unwrap();
    assert_eq!(a.ranking.len(), FEATURE_COUNT);
    let b = cmd_attribution(&cfg).unwrap();
    assert_eq!(a.summary.artifacts, b.summary.artifacts);
    assert!(read(&cfg.out.join("importance.csv")).starts_with("rank,feature,importance\n1,"));
}

#[test]
fn attribution_rejects_mismatched_store() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus(dir.path(), 2, 20);
    cmd_extract(&cfg).unwrap();
    cmd_experiment(&RunConfig { reps: 1, ..cfg.clone() }).unwrap();

    let store = read(&cfg.store_path());
    let trimmed: String = store
        .lines()
        .map(|l| {
            let mut cells: Vec<&str> = l.split(',').collect();
            cells.pop();
            cells.join(",") + "\n"
        })
        .collect();
    let other = dir.path().join("trimmed.csv");
    std::fs::write(&other, trimmed).unwrap();
    let err = cmd_attribution(&RunConfig {
        store: Some(other),
        model: Some(cfg.model_path()),
        ..cfg.clone()
    })
    .unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains(&FEATURE_COUNT.to_string()) && msg.contains(&(FEATURE_COUNT - 1).to_string()), "{msg}");
}

#[test]
fn single_language_store_is_rejected_by_protocol_but_not_stats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus(dir.path(), 1, 10);
    cmd_extract(&cfg).unwrap();
    assert!(cmd_experiment(&cfg).is_err());
    let stats = cmd_stats(&cfg).unwrap();
    let meaningful: Vec<&str> = stats
        .analysis
        .results
        .iter()
        .filter(|r| r.meaningful)
        .map(|r| r.feature_name.as_str())
        .collect();
    assert_eq!(stats.analysis.important_features(), meaningful);
}
