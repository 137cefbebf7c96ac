use std::path::PathBuf;

use lace_core::data::{encode_cifar100, parse_records, CIFAR_RECORD};
use lace_core::Error;
use proptest::prelude::*;

fn fixture(records: &[(u8, u8, Vec<u8>)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(records.len() * CIFAR_RECORD);
    for (coarse, fine, pixels) in records {
        out.push(*coarse);
        out.push(*fine);
        out.extend(pixels);
    }
    out
}

fn record() -> impl Strategy<Value = (u8, u8, Vec<u8>)> {
    (0u8..20, 0u8..100, proptest::collection::vec(any::<u8>(), 3072))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_is_bit_exact(records in proptest::collection::vec(record(), 1..5)) {
        let bytes = fixture(&records);
        let ds = parse_records(&bytes).unwrap();
        prop_assert_eq!(ds.len(), records.len());
        let coarse: Vec<u8> = records.iter().map(|r| r.0).collect();
        prop_assert_eq!(encode_cifar100(&ds, Some(&coarse)).unwrap(), bytes);
    }

    #[test]
    fn bad_lengths_report_offset(n in 1usize..4, extra in 1usize..CIFAR_RECORD) {
        let bytes = vec![0u8; n * CIFAR_RECORD + extra];
        match parse_records(&bytes) {
            Err(Error::Parse { offset, .. }) => prop_assert_eq!(offset, n * CIFAR_RECORD),
            other => prop_assert!(false, "expected parse error, got {:?}", other),
        }
    }
}

#[test]
fn fine_label_out_of_range() {
    let mut bytes = fixture(&[(0, 5, vec![0; 3072]), (0, 100, vec![0; 3072])]);
    match parse_records(&bytes) {
        Err(Error::Parse { offset, .. }) => assert_eq!(offset, CIFAR_RECORD + 1),
        other => panic!("expected parse error, got {other:?}"),
    }
    bytes.clear();
    assert!(matches!(parse_records(&bytes), Err(Error::Parse { offset: 0, .. })));
}

/// `$CIFAR100_DIR`, or `data/cifar-100-binary` at the workspace root.
pub fn cifar_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("CIFAR100_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/cifar-100-binary"));
    (dir.join("train.bin").is_file() && dir.join("test.bin").is_file()).then_some(dir)
}

#[test]
fn real_files_if_present() {
    let Some(dir) = cifar_dir() else {
        eprintln!("CIFAR-100 binaries not found, skipping");
        return;
    };
    for (name, n) in [("train.bin", 50_000), ("test.bin", 10_000)] {
        let ds = lace_core::data::parse_cifar100_file(&dir.join(name)).unwrap();
        assert_eq!(ds.len(), n);
        assert!(ds.labels().iter().all(|&l| l < 100));
    }
}
