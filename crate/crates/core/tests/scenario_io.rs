mod common;

use bundlesim::scenario_io::{
    parse_additional_file, parse_detector_output, parse_network_file, parse_routes_file,
    write_additional_file, write_detector_output, write_network_file, write_routes_file,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn network_roundtrip(net in common::network()) {
        let bytes = write_network_file(&net);
        prop_assert_eq!(parse_network_file(&bytes).unwrap(), net);
    }

    #[test]
    fn routes_roundtrip(file in common::route_file()) {
        let bytes = write_routes_file(&file);
        prop_assert_eq!(parse_routes_file(&bytes).unwrap(), file);
    }

    #[test]
    fn additional_roundtrip((net, add) in common::network_and_additional()) {
        let bytes = write_additional_file(&add);
        prop_assert_eq!(parse_additional_file(&bytes, &net).unwrap(), add);
    }

    #[test]
    fn detector_output_roundtrip(intervals in common::detector_output()) {
        let bytes = write_detector_output(&intervals).unwrap();
        prop_assert_eq!(parse_detector_output(&bytes).unwrap(), intervals);
    }

    #[test]
    fn arbitrary_bytes_never_crash(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let net = common::line_network(&[100.0], 10.0);
        let _ = parse_network_file(&bytes);
        let _ = parse_routes_file(&bytes);
        let _ = parse_additional_file(&bytes, &net);
        let _ = parse_detector_output(&bytes);
    }

    #[test]
    fn mutated_documents_never_crash(net in common::network(), cut in 0usize..4096, byte in any::<u8>()) {
        let mut bytes = write_network_file(&net);
        let at = cut % bytes.len();
        bytes[at] = byte;
        let _ = parse_network_file(&bytes);
        bytes.truncate(at);
        let _ = parse_network_file(&bytes);
    }
}

#[test]
fn reference_files_parse() {
    use bundlesim::reference;
    let net = parse_network_file(reference::NETWORK.as_bytes()).unwrap();
    let add = parse_additional_file(reference::ADDITIONAL.as_bytes(), &net).unwrap();
    assert_eq!(add.stops.len(), 2);
    assert_eq!(add.detectors.len(), 6);
    let vt = parse_routes_file(reference::VTYPES.as_bytes()).unwrap();
    assert_eq!(vt.vtypes.len(), 2);
    let net60 = parse_network_file(reference::NETWORK_60KMH.as_bytes()).unwrap();
    assert_eq!(net60.edge("c3").unwrap().speed_limit, 16.67);
    assert_eq!(net.edge("c3").unwrap().speed_limit, 13.89);
}
