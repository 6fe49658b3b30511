use mcc_core::datasets::{LabeledSet, Split};
use mcc_core::preprocess::{EventSpan, SensorSession};
use mcc_core::{DistanceKind, DistanceSpec, MccModel, Template, Window};
use mcc_tools::formats::{
    infer_sample_rate, model_from_json, model_to_json, parse_ucr, read_samples, read_session, write_annotations,
    write_samples, write_session, ClassMapping,
};

fn awkward_model() -> MccModel {
    let values = [0.1 + 0.2, 1e-300, f64::MIN_POSITIVE / 8.0, -0.0, 123_456_789.123_456_79, 1.0 / 3.0];
    MccModel {
        templates: vec![
            Template {
                center: Window::from_row_major(values.to_vec(), 3, 2).unwrap(),
                radius: 2.0f64.sqrt(),
                rank: Some(1),
                coverage_count: 7,
            },
            Template {
                center: Window::from_row_major(values.iter().map(|v| v * -7.1).collect(), 3, 2).unwrap(),
                radius: 0.0,
                rank: Some(2),
                coverage_count: 0,
            },
        ],
        distance: DistanceSpec { kind: DistanceKind::DtwDependent, band_radius: Some(2) },
        window_shape: (3, 2),
        preprocessing_fingerprint: "improved/sha256:00".into(),
    }
}

#[test]
fn model_json_round_trip_is_bit_exact() {
    let model = awkward_model();
    let text = model_to_json(&model);
    let back = model_from_json(&text).unwrap();
    for (a, b) in model.templates.iter().zip(&back.templates) {
        let bits = |w: &Window| w.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.center), bits(&b.center));
        assert_eq!(a.radius.to_bits(), b.radius.to_bits());
    }
    assert_eq!(back, model);
    assert_eq!(model_to_json(&back), text);
}

#[test]
fn model_json_layout() {
    let v: serde_json::Value = serde_json::from_str(&model_to_json(&awkward_model())).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["distance"]["kind"], "dtw");
    assert_eq!(v["distance"]["band"], 2);
    assert_eq!(v["window_shape"], serde_json::json!([3, 2]));
    // Rows are frames.
    assert_eq!(v["templates"][0]["center"].as_array().unwrap().len(), 3);
    assert_eq!(v["templates"][0]["center"][0].as_array().unwrap().len(), 2);
    assert_eq!(v["templates"][1]["rank"], 2);
}

#[test]
fn malformed_models_are_data_errors() {
    let good = model_to_json(&awkward_model());
    let edit = |f: &dyn Fn(&mut serde_json::Value)| {
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        f(&mut v);
        v.to_string()
    };
    for bad in [
        good.replace("\"format_version\": 1", "\"format_version\": 9"),
        good.replace("\"dtw\"", "\"cosine\""),
        edit(&|v| v["window_shape"][1] = 3.into()),
        edit(&|v| v["templates"][0]["radius"] = (-1.0).into()),
        edit(&|v| v["templates"][1]["rank"] = 1.into()),
        "{".to_string(),
    ] {
        let err = model_from_json(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
    }
}

#[test]
fn samples_round_trip_channel_major() {
    let w = |base: f64| {
        Window::from_frames(&[[base, base + 10.0], [base + 1.0, base + 11.0], [base + 2.0, base + 12.0]]).unwrap()
    };
    let set = LabeledSet::new("tiny", vec![w(0.0), w(100.0), w(0.5)], vec![true, false, true])
        .unwrap()
        .with_split(Split { train: vec![0, 1], test: vec![2] })
        .unwrap();
    let subjects = vec!["a".to_string(), "a".into(), "b".into()];
    let dir = tempfile::tempdir().unwrap();
    write_samples(dir.path(), &set, Some(&subjects)).unwrap();

    let csv = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "label,ch0_t0,ch0_t1,ch0_t2,ch1_t0,ch1_t1,ch1_t2");
    assert_eq!(lines.next().unwrap(), "1,0,1,2,10,11,12");
    assert_eq!(lines.next().unwrap(), "0,100,101,102,110,111,112");

    let (back, shape) = read_samples(dir.path()).unwrap();
    assert_eq!(back, set);
    assert_eq!(shape.subjects.unwrap(), subjects);
    assert_eq!((shape.len, shape.channels, shape.n_samples), (3, 2, 3));
}

#[test]
fn samples_reject_bad_rows() {
    let set = LabeledSet::new("one", vec![Window::point(&[1.0, 2.0]).unwrap()], vec![true]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_samples(dir.path(), &set, None).unwrap();
    let path = dir.path().join("samples.csv");
    std::fs::write(&path, "label,ch0_t0,ch1_t0\n2,1,2\n").unwrap();
    assert_eq!(read_samples(dir.path()).unwrap_err().exit_code(), 3);
    std::fs::write(&path, "label,ch0_t0,ch1_t0\n1,x,2\n").unwrap();
    assert_eq!(read_samples(dir.path()).unwrap_err().exit_code(), 3);
    std::fs::write(&path, "label,ch0_t0,ch1_t0\n1,1,2\n0,1,2\n").unwrap();
    assert_eq!(read_samples(dir.path()).unwrap_err().exit_code(), 3);
}

#[test]
fn session_round_trip() {
    let frames: Vec<[f64; 2]> = (0..100).map(|t| [t as f64 * 0.25, -(t as f64)]).collect();
    let spans = vec![EventSpan::new(0.5, 0.7, "cough").unwrap(), EventSpan::new(1.2, 1.2, "other").unwrap()];
    let s = SensorSession::new(Window::from_frames(&frames).unwrap(), 50.0, vec!["x".into(), "y".into()], spans).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    let ann = dir.path().join("s.annotations.csv");
    write_session(&data, &s).unwrap();
    write_annotations(&ann, &s.annotations).unwrap();
    let back = read_session(&data, Some(&ann)).unwrap();
    assert_eq!(back.data.values(), s.data.values());
    assert_eq!(back.data.shape(), s.data.shape());
    assert_eq!(back.channel_names, s.channel_names);
    assert_eq!(back.annotations, s.annotations);
    assert!((back.sample_rate_hz - 50.0).abs() < 1e-9);
}

#[test]
fn sample_rate_tolerance() {
    let uniform: Vec<f64> = (0..50).map(|t| t as f64 * 0.02).collect();
    assert!((infer_sample_rate(&uniform).unwrap() - 50.0).abs() < 1e-9);
    let mut slight = uniform.clone();
    slight[10] += 0.0001; // 0.5% of a step
    assert!(infer_sample_rate(&slight).is_ok());
    let mut gap = uniform.clone();
    for t in gap.iter_mut().skip(20) {
        *t += 0.001; // one 5% step
    }
    assert!(infer_sample_rate(&gap).is_err());
    assert!(infer_sample_rate(&[0.0]).is_err());
    assert!(infer_sample_rate(&[0.0, 0.02, 0.02, 0.04]).is_err());
}

fn mapping(pos: &[&str], neg: &[&str]) -> ClassMapping {
    ClassMapping {
        positive: pos.iter().map(|s| s.to_string()).collect(),
        negative: neg.iter().map(|s| s.to_string()).collect(),
    }
}

#[test]
fn ucr_parsing() {
    let text = "1\t0.5\t1.5\n2.0,2,3\n3\t9\t9\n\n4.0\t-1\t-2\n";
    let (samples, labels) = parse_ucr(text, &mapping(&["1", "2"], &["4"]), "t").unwrap();
    assert_eq!(labels, vec![true, true, false]);
    assert_eq!(samples[1].values(), &[2.0, 3.0]);
    assert_eq!(samples[2].shape(), (2, 1));

    let err = parse_ucr(text, &mapping(&["1", "2"], &["2.0"]), "t").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert_eq!(parse_ucr("1\t1\t2\n2\t1\n", &mapping(&["1"], &["2"]), "t").unwrap_err().exit_code(), 3);
    assert_eq!(parse_ucr("1\t1\tz\n", &mapping(&["1"], &["2"]), "t").unwrap_err().exit_code(), 3);
}
