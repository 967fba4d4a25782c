use num_complex::Complex64;
use num_rational::BigRational;

use uniconvex::convexseq::{construct_dirichlet_like, construct_small_alpha, ConvexSequence};
use uniconvex::expsum::{ExpSumSpec, Frequencies, GridSpec};
use uniconvex::interp::{knots_from_sequence, ConvexInterpolant};
use uniconvex_lab::grid::{eval_grid, FastPath};
use uniconvex_lab::io;

#[test]
fn sequence_csv_round_trip() {
    let seq = construct_dirichlet_like(1024, 1.0).unwrap();
    let mut buf = Vec::new();
    io::write_sequence_csv(&seq, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("n,a_n,exact_num,exact_den\n1,"));
    assert_eq!(text.lines().count(), 1025);
    let back = io::read_sequence_csv(buf.as_slice()).unwrap();
    assert_eq!(back.values(), seq.values());
    assert!(back.exact_values().is_none());
}

#[test]
fn exact_columns_round_trip() {
    let exact: Vec<BigRational> = (1..=20i64)
        .map(|k| BigRational::new((k * 20 + k * k).into(), 800.into()))
        .collect();
    let seq = ConvexSequence::from_exact(exact.clone());
    let mut buf = Vec::new();
    io::write_sequence_csv(&seq, &mut buf).unwrap();
    let back = io::read_sequence_csv(buf.as_slice()).unwrap();
    assert_eq!(back.exact_values().unwrap(), exact.as_slice());
}

#[test]
fn malformed_csv_names_the_field() {
    let bad = "n,a_n,exact_num,exact_den\n1,0.5,1,0\n";
    let err = io::read_sequence_csv(bad.as_bytes()).unwrap_err();
    assert!(format!("{err:#}").contains("exact_den"), "{err:#}");
    let bad = "n,a_n,exact_num,exact_den\n2,0.5,,\n";
    let err = io::read_sequence_csv(bad.as_bytes()).unwrap_err();
    assert!(format!("{err:#}").contains("field n"), "{err:#}");
}

#[test]
fn hits_round_trip() {
    for seq in [
        construct_dirichlet_like(4096, 1.5).unwrap(),
        construct_small_alpha(1024, 0.25).unwrap(),
    ] {
        let recs = io::hits_json(&seq);
        assert!(!recs.is_empty());
        let text = serde_json::to_string(&recs).unwrap();
        let back = io::read_hits_json(&text).unwrap();
        assert_eq!(back.as_slice(), seq.hits().unwrap());
        let rebuilt = ConvexSequence::from_values(seq.values().to_vec()).with_hits(back);
        assert!(rebuilt.verify_hits());
    }
}

#[test]
fn interpolant_round_trip_is_bit_identical() {
    let seq = construct_dirichlet_like(512, 1.0).unwrap();
    let f = ConvexInterpolant::build_c2(&knots_from_sequence(&seq).unwrap())
        .unwrap()
        .with_extension(1.2);
    let text = serde_json::to_string(&f).unwrap();
    let g: ConvexInterpolant = serde_json::from_str(&text).unwrap();
    assert_eq!(f, g);
    let (lo, hi) = f.domain();
    for i in 0..=1000 {
        let x = lo + (hi - lo) * i as f64 / 1000.0;
        let (a, b) = (f.eval(x).unwrap(), g.eval(x).unwrap());
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
        assert_eq!(a.2.to_bits(), b.2.to_bits());
    }
}

#[test]
fn spec_file_round_trip() {
    let spec = ExpSumSpec::new(
        Frequencies::Custom(vec![0.1, -0.25, 1.0 / 3.0]),
        vec![0.5, 1.5, 2.5],
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(0.1, 0.2),
        ],
    )
    .unwrap();
    let file = io::SpecFile::from_spec(&spec);
    let text = serde_json::to_string(&file).unwrap();
    let back: io::SpecFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back.to_spec().unwrap(), spec);

    let canon = ExpSumSpec::canonical(vec![0.0; 2], vec![Complex64::new(1.0, 0.0); 2]).unwrap();
    let text = serde_json::to_string(&io::SpecFile::from_spec(&canon)).unwrap();
    assert!(text.contains("\"xi\":\"canonical\""));
}

#[test]
fn malformed_spec_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("spec.json");
    std::fs::write(&p, r#"{"N": 2, "xi": "canonical", "eta": [0, 0], "b": [[1, 0]]}"#).unwrap();
    let err = format!("{:#}", io::read_spec_file(&p).unwrap_err());
    assert!(err.contains("field b"), "{err}");
    std::fs::write(&p, r#"{"N": 1, "xi": "weird", "eta": [0], "b": [[1, 0]]}"#).unwrap();
    let err = format!("{:#}", io::read_spec_file(&p).unwrap_err());
    assert!(err.contains("field xi"), "{err}");
    std::fs::write(&p, r#"{"N": 1, "xi": "canonical", "b": [[1, 0]]}"#).unwrap();
    let err = format!("{:#}", io::read_spec_file(&p).unwrap_err());
    assert!(err.contains("eta"), "{err}");
}

#[test]
fn matrix_round_trip() {
    let spec = ExpSumSpec::canonical(vec![0.3; 8], vec![Complex64::new(1.0, 0.5); 8]).unwrap();
    let grid = GridSpec::new(0.0, 8.0, 32, 0.0, 64.0, 5).unwrap();
    let data = eval_grid(&spec, &grid, FastPath::Auto).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.bin");
    io::write_matrix(&p, &data, &grid).unwrap();
    let (back, side) = io::read_matrix(&p).unwrap();
    assert_eq!(back, data);
    assert_eq!((side.rows, side.cols), (5, 32));
    assert!(io::write_matrix(&p, &data[1..], &grid).is_err());
}

proptest::proptest! {
    #[test]
    fn csv_floats_round_trip_bitwise(vals in proptest::collection::vec(-1e6f64..1e6, 1..64)) {
        let seq = ConvexSequence::from_values(vals.clone());
        let mut buf = Vec::new();
        io::write_sequence_csv(&seq, &mut buf).unwrap();
        let back = io::read_sequence_csv(buf.as_slice()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        proptest::prop_assert_eq!(bits(back.values()), bits(&vals));
    }
}
