use foresight_core::dataset::ssds::{encode_dataset, Dataset};
use foresight_core::dataset::{read_dataset, samples_for_frames, write_dataset, DatasetError, Supervision};
use foresight_core::explore::{run_exploration, ExploreConfig};
use foresight_core::{generate_floorplan, ClassId, FloorplanSpec};

fn ten_samples() -> Vec<foresight_core::dataset::TrainingSample> {
    let plan = generate_floorplan(&FloorplanSpec::with_seed(5)).unwrap();
    let start = plan.free_cells().nth(3).unwrap();
    let cfg = ExploreConfig {
        keep_first: 2,
        ..ExploreConfig::default()
    };
    let frames = run_exploration(&plan, start, &cfg).unwrap();
    let mut samples = samples_for_frames(5, &frames, &plan, Supervision::Unexplored).unwrap();
    samples.truncate(10);
    samples
}

#[test]
fn ten_samples_round_trip_through_a_file() {
    let samples = ten_samples();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.ssds");
    write_dataset(&samples, &path).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), samples);
    let ds = Dataset::open(&path).unwrap();
    assert_eq!(ds.len(), 10);
    assert_eq!(ds.index().len(), 10);
}

#[test]
fn records_are_addressable_by_key() {
    let samples = ten_samples();
    let ds = Dataset::from_bytes(encode_dataset(&samples)).unwrap();
    for s in &samples {
        let got = ds.get(s.plan_id, s.frame.step as u32, s.query).unwrap();
        assert_eq!(&got, s);
    }
    let err = ds.get(99, 0, ClassId::BEDROOM).unwrap_err();
    assert!(matches!(err, DatasetError::NotFound { plan_id: 99, .. }));
}

#[test]
fn truncated_final_record_names_its_index() {
    let bytes = encode_dataset(&ten_samples());
    for cut in [1, 5, 100] {
        let err = Dataset::from_bytes(bytes[..bytes.len() - cut].to_vec()).unwrap_err();
        assert!(matches!(err, DatasetError::ChecksumMismatch { record: 9 }), "{err}");
    }
}

#[test]
fn corrupted_payload_byte_fails_its_checksum() {
    let mut bytes = encode_dataset(&ten_samples());
    let n = bytes.len();
    bytes[n - 50] ^= 0x01;
    let ds = Dataset::from_bytes(bytes).unwrap();
    assert!(ds.record(8).is_ok());
    assert!(matches!(ds.record(9), Err(DatasetError::ChecksumMismatch { record: 9 })));
}

#[test]
fn observed_only_supervision_survives_the_round_trip() {
    let plan = generate_floorplan(&FloorplanSpec::with_seed(2)).unwrap();
    let start = plan.free_cells().next().unwrap();
    let frames = run_exploration(&plan, start, &ExploreConfig::default()).unwrap();
    let samples = samples_for_frames(2, &frames[..1], &plan, Supervision::Explored).unwrap();
    let back = Dataset::from_bytes(encode_dataset(&samples)).unwrap().samples().unwrap();
    assert_eq!(back, samples);
    assert!(back.iter().all(|s| s.supervision == Supervision::Explored));
}
