use std::io::Cursor;

use paraling::config::{ConfigError, RunConfig};
use paraling::manifest::{parse_manifest, ManifestError, Strictness};
use paraling::model_io::{self, ModelFile, ModelFileError};
use paraling::store::{store_from_bytes, store_to_bytes, StoreError};
use paraling::wav::{encode_wav, load_wav, WavEncoding, WavError};
use paraling_core::table::{FeatureRow, FeatureTable, Label, Split};
use paraling_core::{AudioBuffer, ClassifierKind, Dataset, Matrix, Model};
use proptest::prelude::*;

fn hound_bytes<S: hound::Sample + Copy>(spec: hound::WavSpec, samples: &[S]) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    let mut w = hound::WavWriter::new(&mut out, spec).unwrap();
    for &s in samples {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
    out.into_inner()
}

fn spec(channels: u16, rate: u32, bits: u16, format: hound::SampleFormat) -> hound::WavSpec {
    hound::WavSpec {
        channels,
        sample_rate: rate,
        bits_per_sample: bits,
        sample_format: format,
    }
}

#[test]
fn pcm16_scaling() {
    let bytes = hound_bytes(spec(1, 8000, 16, hound::SampleFormat::Int), &[0i16, 16384, -32768]);
    let buf = load_wav(&bytes).unwrap();
    assert_eq!(buf.samples(), &[0.0, 0.5, -1.0]);
    assert_eq!(buf.sample_rate(), 8000);
}

#[test]
fn stereo_is_averaged() {
    let bytes = hound_bytes(spec(2, 16000, 32, hound::SampleFormat::Float), &[1.0f32, 0.0, 0.5, 0.5, -1.0, 0.0]);
    assert_eq!(load_wav(&bytes).unwrap().samples(), &[0.5, 0.5, -0.5]);
}

#[test]
fn empty_data_chunk() {
    let bytes = hound_bytes::<i16>(spec(1, 16000, 16, hound::SampleFormat::Int), &[]);
    assert_eq!(bytes.len(), 44);
    assert!(matches!(load_wav(&bytes), Err(WavError::EmptyPayload)));
}

#[test]
fn bad_headers_and_encodings() {
    assert!(matches!(load_wav(b"not a wav file at all, definitely"), Err(WavError::MalformedHeader(_))));
    assert!(matches!(load_wav(b""), Err(WavError::MalformedHeader(_))));
    let eight = hound_bytes(spec(1, 8000, 8, hound::SampleFormat::Int), &[0i8, 5, -5]);
    assert!(matches!(load_wav(&eight), Err(WavError::UnsupportedEncoding(_))));
    let wide = hound_bytes(spec(1, 8000, 24, hound::SampleFormat::Int), &[0i32, 5, -5]);
    assert!(matches!(load_wav(&wide), Err(WavError::UnsupportedEncoding(_))));
}

proptest! {
    #[test]
    fn pcm16_round_trip(samples in proptest::collection::vec(-1.0f64..=1.0, 1..500), rate in 8000u32..48000) {
        let buf = AudioBuffer::new(samples.clone(), rate).unwrap();
        let back = load_wav(&encode_wav(&buf, WavEncoding::Pcm16).unwrap()).unwrap();
        prop_assert_eq!(back.sample_rate(), rate);
        for (a, b) in samples.iter().zip(back.samples()) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn float_round_trip_is_exact(samples in proptest::collection::vec(-1.0f32..=1.0, 1..500)) {
        let samples: Vec<f64> = samples.into_iter().map(f64::from).collect();
        let buf = AudioBuffer::new(samples.clone(), 16000).unwrap();
        let back = load_wav(&encode_wav(&buf, WavEncoding::Float32).unwrap()).unwrap();
        prop_assert_eq!(back.samples(), &samples[..]);
    }
}

const MANIFEST: &str = "id,path,language,label,split\n\
a1,a1.wav,hindi,abusive,train\n\
a2,a2.wav,hindi,Non_Abusive,test\n\
a3,sub/a3.wav,tamil,Abusive,train\n";

#[test]
fn manifest_valid_rows() {
    let m = parse_manifest(MANIFEST.as_bytes(), Strictness::Strict).unwrap();
    assert_eq!(m.records.len(), 3);
    assert_eq!(m.records[2].label, Label::Abusive);
    assert_eq!(m.records[1].label, Label::NonAbusive);
    assert_eq!(m.records[1].split, Split::Test);
}

#[test]
fn manifest_duplicate_names_both_lines() {
    let text = format!("{MANIFEST}a1,other.wav,tamil,abusive,test\n");
    let err = parse_manifest(text.as_bytes(), Strictness::Strict).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("`a1`") && msg.contains("line 2") && msg.contains("line 5"), "{msg}");
}

#[test]
fn manifest_strict_and_lenient() {
    let text = format!("{MANIFEST}b1,b1.wav,tamil,maybe,train\nb2,,tamil,abusive,train\n");
    match parse_manifest(text.as_bytes(), Strictness::Strict) {
        Err(ManifestError::Rows(issues)) => {
            assert_eq!(issues.iter().map(|i| i.line).collect::<Vec<_>>(), vec![5, 6]);
        }
        other => panic!("{other:?}"),
    }
    let m = parse_manifest(text.as_bytes(), Strictness::Lenient).unwrap();
    assert_eq!(m.records.len(), 3);
    assert_eq!(m.skipped.len(), 2);
    assert!(matches!(
        parse_manifest(b"id,file,language,label,split\n", Strictness::Strict),
        Err(ManifestError::Header(_))
    ));
}

fn small_table() -> FeatureTable {
    let rows = (0..6)
        .map(|i| FeatureRow {
            id: format!("r{i}"),
            language: if i < 3 { "x".into() } else { "y".into() },
            label: if i % 2 == 0 { Label::Abusive } else { Label::NonAbusive },
            split: if i % 3 == 2 { Split::Test } else { Split::Train },
            values: vec![i as f64 / 3.0, 0.1 + 1e-17 * i as f64, -2.5e-300, 1e300],
        })
        .collect();
    FeatureTable::new(vec!["a".into(), "b".into(), "c".into(), "d".into()], rows).unwrap()
}

#[test]
fn store_round_trip_is_bit_identical() {
    let t = small_table();
    let bytes = store_to_bytes(&t).unwrap();
    let back = store_from_bytes(&bytes).unwrap();
    assert_eq!(back, t);
    assert_eq!(store_to_bytes(&back).unwrap(), bytes);
    let header = String::from_utf8(bytes).unwrap();
    assert!(header.starts_with("id,language,label,split,a,b,c,d\n"));
}

#[test]
fn store_rejects_bad_cells() {
    let text = "id,language,label,split,a\nr1,x,abusive,train,1.0\nr2,x,abusive,train,oops\n";
    match store_from_bytes(text.as_bytes()) {
        Err(StoreError::Row { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(matches!(store_from_bytes(b"a,b\n"), Err(StoreError::Header)));
}

#[test]
fn model_file_round_trip_and_schema_check() {
    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 3) as f64]).collect();
    let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
    let data = Dataset::ungrouped(Matrix::from_rows(&rows).unwrap(), y).unwrap();
    for kind in [ClassifierKind::Forest, ClassifierKind::Logistic] {
        let model = Model::train(kind, &data, 5).unwrap();
        let file = ModelFile::new(model, vec!["p".into(), "q".into()], "all".into(), 5);
        let bytes = model_io::to_bytes(&file).unwrap();
        let back = model_io::from_bytes(&bytes).unwrap();
        assert_eq!(back, file);
        assert_eq!(
            back.model.predict_proba(data.x()).unwrap(),
            file.model.predict_proba(data.x()).unwrap()
        );
        let err = back.check_columns(&["p".into()]).unwrap_err();
        assert!(matches!(err, ModelFileError::ColumnCount { model: 2, store: 1 }));
        assert!(err.to_string().contains('2') && err.to_string().contains('1'));
        assert!(back.check_columns(&["p".into(), "z".into()]).is_err());
    }
    let mut v: serde_json::Value = serde_json::from_slice(b"{\"format\":\"other\",\"version\":1}").unwrap();
    v["feature_names"] = serde_json::json!([]);
    assert!(model_io::from_bytes(v.to_string().as_bytes()).is_err());
}

#[test]
fn config_file_and_overrides() {
    let mut cfg = RunConfig::default();
    cfg.apply_text("# run\nclassifier = logistic\nreps = 3\nseed=9 # inline\nmode = lenient\nhop_ms = 5\nmel_bands = 20\n")
        .unwrap();
    assert_eq!(cfg.classifier, ClassifierKind::Logistic);
    assert_eq!((cfg.reps, cfg.seed), (3, 9));
    assert_eq!(cfg.mode, Strictness::Lenient);
    assert_eq!(cfg.extraction.hop_ms, 5.0);
    assert_eq!(cfg.extraction.mel_bands, 20);
    cfg.set("reps", "7").unwrap();
    assert_eq!(cfg.reps, 7);

    let mut again = RunConfig::default();
    again.apply_text(&cfg.to_text()).unwrap();
    assert_eq!(again, cfg);

    let err = RunConfig::default().apply_text("reps = 2\nbogus = 1\n").unwrap_err();
    assert!(matches!(err, ConfigError::Line { line: 2, .. }), "{err}");
    assert!(RunConfig::default().apply_text("no equals sign").is_err());
    let mut zero = RunConfig::default();
    zero.reps = 0;
    assert!(zero.validate().is_err());
}
