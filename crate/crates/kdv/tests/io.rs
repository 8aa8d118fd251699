use obscost_kdv::io::{read_snapshot, write_snapshot, write_trajectory_csv};
use obscost_kdv::{build_operator, evolve, rough_state, EvolveOptions, Grid, KdvError, Scheme};

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let g = Grid::new(4.0, 40).unwrap();
    let u = rough_state(&g, 9, 30);
    let mut buf = Vec::new();
    write_snapshot(&u, &mut buf).unwrap();
    assert_eq!(buf.len(), 16 + 8 * 40);
    assert_eq!(&buf[..4], b"KDVS");
    assert_eq!(u16::from_le_bytes([buf[4], buf[5]]), 1);
    assert_eq!(u32::from_le_bytes([buf[6], buf[7], buf[8], buf[9]]), 40);
    assert!(buf[10..16].iter().all(|b| *b == 0));
    let back = read_snapshot(buf.as_slice()).unwrap();
    assert!(back.iter().zip(&u).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn malformed_snapshots_rejected() {
    let mut buf = Vec::new();
    write_snapshot(&[1.0, 2.0], &mut buf).unwrap();
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(matches!(read_snapshot(bad.as_slice()), Err(KdvError::BadSnapshot(_))));
    assert!(matches!(read_snapshot(&buf[..20]), Err(KdvError::BadSnapshot(_))));
    assert!(matches!(read_snapshot(&buf[..8]), Err(KdvError::BadSnapshot(_))));
    let mut v2 = buf.clone();
    v2[4] = 2;
    assert!(read_snapshot(v2.as_slice()).is_err());
}

#[test]
fn csv_has_one_row_per_stored_state() {
    let g = Grid::new(5.5, 64).unwrap();
    let op = build_operator(g).unwrap();
    let tr = evolve(&op, &rough_state(&g, 1, 20), 0.1, 0.01, Scheme::Trapezoidal, &EvolveOptions::every(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_trajectory_csv(&tr, std::fs::File::create(&path).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,flux,l2_norm,h1_norm,h3_norm");
    assert_eq!(lines.len(), 1 + tr.states.len());
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[2] - 1.0).abs() < 1e-12);
    assert!(first[3] >= first[2] && first[4] >= first[3]);
}
