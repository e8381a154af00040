mod common;

use proptest::prelude::*;
use zklab_core::profile_io::{load, read_ground_state, save, to_string};
use zklab_core::*;

#[test]
fn ground_state_round_trip_is_bit_exact() {
    let q = common::ground(2, 2.0);
    let text = to_string(&q);
    let back = read_ground_state(text.as_bytes()).unwrap();
    assert_eq!(back, q);
    for (a, b) in back.values().iter().zip(q.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.profile");
    save(&path, &q).unwrap();
    assert_eq!(load(&path).unwrap(), q);
}

#[test]
fn header_lines() {
    let q = solve_ground_state(1, 2.0, &SolverConfig::with_grid(30.0, 64)).unwrap();
    let text = to_string(&q);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[2], "d=1");
    assert!(lines[5].starts_with("rmax="));
    assert_eq!(lines[6], "n=64");
    assert_eq!(lines.len(), 11 + 64);
}

#[test]
fn malformed_input_is_reported_with_line() {
    let q = solve_ground_state(1, 2.0, &SolverConfig::with_grid(30.0, 64)).unwrap();
    let text = to_string(&q).replacen("n=64", "n=sixty", 1);
    assert!(matches!(read_ground_state(text.as_bytes()), Err(CoreError::Parse { line: 7, .. })));
    let truncated: String = to_string(&q).lines().take(40).map(|l| format!("{l}\n")).collect();
    assert!(matches!(read_ground_state(truncated.as_bytes()), Err(CoreError::Parse { .. })));
    assert!(read_ground_state("garbage".as_bytes()).is_err());
}

proptest! {
    #[test]
    fn arbitrary_profiles_round_trip(seed in prop::collection::vec(-1e3f64..1e3, 64), scale in 1e-300f64..1e300) {
        let grid = RadialGrid::new(20.0, 64).unwrap();
        let values: Vec<f64> = seed.iter().map(|v| v * scale).collect();
        let derivs: Vec<f64> = seed.iter().rev().map(|v| v / scale.sqrt()).collect();
        let q = GroundState {
            d: 2,
            p: 2.0 + seed[0] / 1e4,
            c: 1.0,
            profile: RadialProfile::new(grid, values, derivs).unwrap(),
            ode_residual_norm: scale,
            tail_rate: 0.1 * seed[1],
            newton_iters: 3,
        };
        let back = read_ground_state(to_string(&q).as_bytes()).unwrap();
        prop_assert_eq!(back, q);
    }
}
