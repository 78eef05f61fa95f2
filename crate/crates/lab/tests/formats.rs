use hypercyclic_core::carleson::{cantor_like_set, sample_nodes, Arc};
use hypercyclic_core::hstar::{gram_matrix, KernelCoefficients};
use hypercyclic_core::outer::{boundary_weight, outer_function};
use hypercyclic_core::{CVector, Complex64};
use hypercyclic_lab::formats::{
    read_continuity_csv, read_json, write_continuity_csv, write_json, ContinuityRecord, GramFile, Header, KernelFile,
    OuterFile, SetFile,
};
use proptest::prelude::*;

fn header() -> Header {
    Header::new("test", serde_json::json!({}))
}

#[test]
fn gram_and_outer_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let set = cantor_like_set(5, 1.0 / 3.0, Arc::full_circle()).unwrap();
    let phi = outer_function(boundary_weight(&set, 2.0, 1 << 12).unwrap()).unwrap();
    let nodes = sample_nodes(&set, 3, usize::MAX).unwrap();
    let gram = gram_matrix(&nodes, &phi).unwrap();

    let path = dir.path().join("gram.json");
    write_json(&path, &header(), &GramFile::from(&gram)).unwrap();
    let back = read_json::<GramFile>(&path).unwrap().body.to_gram().unwrap();
    assert_eq!(back.entries(), gram.entries());

    let path = dir.path().join("outer.json");
    write_json(&path, &header(), &OuterFile::from(&phi)).unwrap();
    let back = read_json::<OuterFile>(&path).unwrap().body.to_outer().unwrap();
    assert_eq!(back.weight().modulus(), phi.weight().modulus());
    assert_eq!(back.value_at_zero(), phi.value_at_zero());

    let path = dir.path().join("set.json");
    write_json(&path, &header(), &SetFile::from(&set)).unwrap();
    let back = read_json::<SetFile>(&path).unwrap().body.to_set().unwrap();
    assert_eq!(back, set);
}

#[test]
fn mismatched_outer_file_is_rejected() {
    let set = cantor_like_set(3, 1.0 / 3.0, Arc::full_circle()).unwrap();
    let mut file = OuterFile::from(&outer_function(boundary_weight(&set, 2.0, 256).unwrap()).unwrap());
    file.modulus.pop();
    assert!(file.to_outer().is_err());
}

proptest! {
    #[test]
    fn set_files_round_trip(depth in 0u32..7, ratio in 0.05f64..0.95) {
        let set = cantor_like_set(depth, ratio, Arc::full_circle()).unwrap();
        let text = serde_json::to_string(&SetFile::from(&set)).unwrap();
        let back: SetFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_set().unwrap(), set);
    }

    #[test]
    fn kernel_files_round_trip(
        angles in proptest::collection::btree_set(0u32..1000, 2..8),
        re in proptest::collection::vec(-1e3f64..1e3, 8),
        im in proptest::collection::vec(-1e3f64..1e3, 8),
    ) {
        let angles: Vec<f64> = angles.into_iter().map(|a| a as f64 * 0.00628).collect();
        let nodes = hypercyclic_core::carleson::NodeFamily::from_angles(&angles).unwrap();
        let n = nodes.len();
        let coeffs = CVector::from_fn(n, |k, _| Complex64::new(re[k], im[k]));
        let f = KernelCoefficients::new(nodes, coeffs).unwrap();
        let text = serde_json::to_string(&KernelFile::from(&f)).unwrap();
        let back: KernelFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_coefficients().unwrap(), f);
    }

    #[test]
    fn continuity_csv_round_trips(rows in proptest::collection::vec((0usize..100, 0usize..100, 0f64..2.0, 0f64..10.0), 0..20)) {
        let rows: Vec<ContinuityRecord> = rows
            .into_iter()
            .map(|(n, m, chordal_gap, kernel_gap)| ContinuityRecord { n, m, chordal_gap, kernel_gap })
            .collect();
        let mut buf = Vec::new();
        write_continuity_csv(&mut buf, &rows).unwrap();
        prop_assert!(buf.starts_with(b"n,m,chordal_gap,kernel_gap"));
        prop_assert_eq!(read_continuity_csv(buf.as_slice()).unwrap(), rows);
    }
}
