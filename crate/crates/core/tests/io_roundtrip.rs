use paretoir::data::{load_dataset, save_dataset, DatasetFormat, FeatureDataset, LabelMatrix};
use paretoir::emr::{build_emr_model, load_model, save_model};
use paretoir::data::RetrievalConfig;
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = (FeatureDataset, Option<LabelMatrix>)> {
    (1usize..30, 1usize..6, 0usize..4).prop_flat_map(|(n, m, c)| {
        (
            prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, n * m),
            prop::collection::vec(any::<bool>(), n * c),
            any::<bool>(),
        )
            .prop_map(move |(features, bits, with_labels)| {
                let ids = (0..n).map(|i| format!("item-{i}")).collect();
                let ds = FeatureDataset::new(ids, features, m).unwrap();
                let labels = (with_labels && c > 0).then(|| {
                    let names = (0..c).map(|j| format!("tag{j}")).collect();
                    LabelMatrix::new(names, bits, n).unwrap()
                });
                (ds, labels)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn binary_round_trip_is_bit_exact((ds, labels) in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.bin");
        save_dataset(&p, DatasetFormat::Binary, &ds, labels.as_ref()).unwrap();
        let (back, back_labels) = load_dataset(&p, DatasetFormat::Binary).unwrap();
        prop_assert_eq!(back.ids(), ds.ids());
        let bits = |d: &FeatureDataset| d.features().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&ds));
        prop_assert_eq!(back_labels, labels);
    }

    #[test]
    fn csv_round_trip_is_close((ds, labels) in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        save_dataset(&p, DatasetFormat::Csv, &ds, labels.as_ref()).unwrap();
        let (back, back_labels) = load_dataset(&p, DatasetFormat::Csv).unwrap();
        prop_assert_eq!(back.ids(), ds.ids());
        prop_assert_eq!(back.dim(), ds.dim());
        for (a, b) in back.features().iter().zip(ds.features()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        prop_assert_eq!(back_labels.map(|l| l.names().len()), labels.as_ref().map(|l| l.names().len()));
    }
}

#[test]
fn model_files_are_deterministic() {
    let rows: Vec<Vec<f64>> = (0..90).map(|i| vec![(i % 9) as f64, (i / 9) as f64 * 0.5, (i as f64).sin()]).collect();
    let ds = FeatureDataset::from_rows(&rows).unwrap();
    let cfg = RetrievalConfig {
        anchor_count: 16,
        nearest_anchors: 4,
        ..RetrievalConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.emr"), dir.path().join("b.emr"));
    save_model(&a, &build_emr_model(&ds, &cfg, 7).unwrap()).unwrap();
    save_model(&b, &build_emr_model(&ds, &cfg, 7).unwrap()).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let loaded = load_model(&a, Some(&ds)).unwrap();
    assert_eq!(loaded, build_emr_model(&ds, &cfg, 7).unwrap());
}
