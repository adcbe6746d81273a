use foresight_core::dataset::ssds::{encode_dataset, Dataset};
use foresight_core::dataset::DatasetError;
use foresight_core::grid::tiny_two_room;
use foresight_core::predict::protocol::{decode_request, ProtocolError};
use foresight_core::predict::{decode_response, encode_response};
use foresight_core::raster::{self, RasterError};
use foresight_core::ClassId;

const SEMGRID: &[u8] = include_bytes!("fixtures/tiny.semgrid");
const SSDS: &[u8] = include_bytes!("fixtures/tiny.ssds");
const REQUEST: &[u8] = include_bytes!("fixtures/tiny_request.ssp1");
const RESPONSE: &[u8] = include_bytes!("fixtures/tiny_response.ssp1");

#[test]
fn semgrid_fixture_is_the_tiny_plan() {
    let grid = raster::decode(SEMGRID).unwrap();
    assert_eq!(grid, tiny_two_room());
    assert_eq!(raster::encode(&grid), SEMGRID);
    assert!(SEMGRID.starts_with(b"SEMGRIDv1 8 8 10\n"));
}

#[test]
fn semgrid_corruptions() {
    let mut bad = SEMGRID.to_vec();
    bad[0] = b'X';
    assert!(matches!(raster::decode(&bad), Err(RasterError::BadMagic)));

    let mut bad = SEMGRID.to_vec();
    let n = bad.len();
    bad[n - 1] = 10;
    assert!(matches!(raster::decode(&bad), Err(RasterError::LabelOutOfRange { value: 10, .. })));

    assert!(matches!(
        raster::decode(&SEMGRID[..SEMGRID.len() - 3]),
        Err(RasterError::Truncated { expected: 64, got: 61 })
    ));

    let mut bad = SEMGRID.to_vec();
    bad.push(0);
    assert!(matches!(raster::decode(&bad), Err(RasterError::TrailingData(1))));

    let mut bad = SEMGRID.to_vec();
    bad[15] = b'1';
    assert!(matches!(raster::decode(&bad), Err(RasterError::ChannelCount(11))));
}

#[test]
fn ssds_fixture_round_trips() {
    let ds = Dataset::from_bytes(SSDS.to_vec()).unwrap();
    assert_eq!(ds.len(), 14);
    let samples = ds.samples().unwrap();
    assert_eq!(encode_dataset(&samples), SSDS);
    assert_eq!(samples[0].gt, tiny_two_room());
    let queries: Vec<u8> = samples[..7].iter().map(|s| s.query.id()).collect();
    assert_eq!(queries, vec![0, 1, 2, 3, 4, 5, 6]);
    assert_eq!(samples[7].frame.step, 1);
}

#[test]
fn ssds_corruptions() {
    let mut bad = SSDS.to_vec();
    bad[0] = b'X';
    assert!(matches!(Dataset::from_bytes(bad), Err(DatasetError::BadMagic)));

    let mut bad = SSDS.to_vec();
    bad[4] = 9;
    assert!(matches!(Dataset::from_bytes(bad), Err(DatasetError::UnsupportedVersion(9))));

    let mut bad = SSDS.to_vec();
    bad[6] = 15;
    assert!(matches!(Dataset::from_bytes(bad), Err(DatasetError::CorruptRecordHeader { record: 14, .. })));

    let mut bad = SSDS.to_vec();
    bad[6] = 13;
    assert!(matches!(Dataset::from_bytes(bad), Err(DatasetError::RecordCountMismatch { declared: 13, .. })));

    let mut bad = SSDS.to_vec();
    bad[30] ^= 0xff;
    let ds = Dataset::from_bytes(bad).unwrap();
    assert!(matches!(ds.record(0), Err(DatasetError::ChecksumMismatch { record: 0 })));

    assert!(matches!(
        Dataset::from_bytes(SSDS[..SSDS.len() - 2].to_vec()),
        Err(DatasetError::ChecksumMismatch { record: 13 })
    ));
}

#[test]
fn ssp1_fixtures_round_trip() {
    let req = decode_request(REQUEST).unwrap();
    assert_eq!((req.query, req.height, req.width), (ClassId::BEDROOM, 8, 8));
    let mut rebuilt = REQUEST[..16].to_vec();
    for layer in &req.layers {
        rebuilt.extend_from_slice(layer);
    }
    assert_eq!(rebuilt, REQUEST);

    let resp = decode_response(RESPONSE, ClassId::KITCHEN).unwrap();
    assert_eq!(encode_response(&resp.global_probs), RESPONSE);
    assert_eq!(resp.area_prob.values, resp.global_probs.channel(ClassId::KITCHEN));
}

#[test]
fn ssp1_corruptions() {
    let mut bad = REQUEST.to_vec();
    bad[1] = b'X';
    assert!(matches!(decode_request(&bad), Err(ProtocolError::BadMagic)));

    let mut bad = REQUEST.to_vec();
    bad[4] = 3;
    assert!(matches!(decode_request(&bad), Err(ProtocolError::VersionMismatch(3))));

    let mut bad = REQUEST.to_vec();
    bad[7] = 7;
    assert!(matches!(decode_request(&bad), Err(ProtocolError::BadQuery(7))));

    let mut bad = REQUEST.to_vec();
    bad[20] = 2;
    assert!(matches!(decode_request(&bad), Err(ProtocolError::BadLayerValue { channel: 0, value: 2 })));

    assert!(matches!(decode_request(&REQUEST[..REQUEST.len() - 1]), Err(ProtocolError::ShapeMismatch(_))));

    assert!(matches!(
        decode_response(REQUEST, ClassId::BEDROOM),
        Err(ProtocolError::UnexpectedMessageType { got: 1, expected: 2 })
    ));

    assert!(matches!(
        decode_response(&RESPONSE[..10], ClassId::BEDROOM),
        Err(ProtocolError::Truncated { need: 15, got: 10 })
    ));
}
