mod common;

use maxblow::space::{
    distinct_ball_family, doubling_certificate, gen_dyadic_interval, gen_grid_torus, gen_power_weight, load_space,
    open_ball, save_space, verify_quasi_metric, RadiusWindow, SpaceDescriptor, SpaceError,
};
use rand::Rng;

fn window_2_to_7() -> RadiusWindow {
    let grid: Vec<f64> = (1..=7).rev().map(|j| 2f64.powi(-j)).collect();
    RadiusWindow::new(grid[0], 0.5, grid).unwrap()
}

/// Doubling constants of a dyadic space from integer cell arithmetic:
/// `B(i, r)` holds the cells `j` with `|i − j| < r·2^L`, and cell `j` has
/// mass proportional to `cell_mass(j)`.
fn dyadic_oracle(depth: u32, radii: &[f64], cell_mass: impl Fn(u64) -> u64) -> (f64, f64) {
    let n = 1u64 << depth;
    let mass = |i: u64, r: f64| -> u64 {
        let reach = r * n as f64;
        (0..n).filter(|&j| (i.abs_diff(j) as f64) < reach).map(&cell_mass).sum()
    };
    let mut a: f64 = 0.0;
    let mut delta: f64 = 0.0;
    for i in 0..n {
        for &r in radii {
            let (big, small) = (mass(i, r) as f64, mass(i, r / 2.0) as f64);
            a = a.max(big / small);
            delta = delta.max(small / big);
        }
    }
    (a, delta)
}

#[test]
fn dyadic_ten_doubling_baseline() {
    let s = gen_dyadic_interval(10).unwrap();
    let w = window_2_to_7();
    let cert = doubling_certificate(&s, &w).unwrap();
    let (a, delta) = dyadic_oracle(10, w.grid(), |_| 1);
    assert_eq!(cert.a_const, a);
    assert_eq!(cert.delta_const, delta);
    // Frozen baselines.
    assert_eq!(cert.a_const, 15.0 / 7.0);
    assert_eq!(cert.delta_const, 511.0 / 767.0);
    assert!((cert.a_const - 2.0).abs() <= 0.25 * 2.0);
    assert!(cert.reverse_doubling);
}

#[test]
fn power_weight_doubling() {
    let s = gen_power_weight(10, 1.0).unwrap();
    let w = window_2_to_7();
    let cert = doubling_certificate(&s, &w).unwrap();
    // weight of cell j is (2j+1)/2^{2L+1}.
    let (a, delta) = dyadic_oracle(10, w.grid(), |j| 2 * j + 1);
    assert!((cert.a_const - a).abs() <= 1e-14 * a);
    assert!((cert.delta_const - delta).abs() <= 1e-14);
    assert!(cert.a_const <= 4.0 + 1e-12);
    assert!(cert.reverse_doubling);
}

#[test]
fn torus_doubling_is_near_four() {
    let s = gen_grid_torus(2, 32).unwrap();
    let w = RadiusWindow::dyadic(4.0 / 32.0, 0.25).unwrap();
    let cert = doubling_certificate(&s, &w).unwrap();
    assert!((3.0..=6.0).contains(&cert.a_const), "a = {}", cert.a_const);
    assert!(cert.reverse_doubling);
}

#[test]
fn single_point_space_fails_reverse_doubling() {
    let s = SpaceDescriptor::from_table(vec![vec![0.0]], vec![2.0]).unwrap();
    let cert = doubling_certificate(&s, &RadiusWindow::dyadic(0.25, 4.0).unwrap()).unwrap();
    assert_eq!((cert.a_const, cert.delta_const), (1.0, 1.0));
    assert!(!cert.reverse_doubling);
    let q = verify_quasi_metric(&s).unwrap();
    assert_eq!((q.c0, q.c1), (1.0, 1.0));
}

#[test]
fn quasi_metric_constants() {
    let line = SpaceDescriptor::from_table(
        vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
        vec![1.0; 3],
    )
    .unwrap();
    let q = verify_quasi_metric(&line).unwrap();
    assert_eq!((q.c0, q.c1, q.symmetric), (1.0, 2.0, true));

    let skew = SpaceDescriptor::from_table(
        vec![vec![0.0, 1.0, 2.0], vec![3.0, 0.0, 2.0], vec![2.0, 2.0, 0.0]],
        vec![1.0; 3],
    )
    .unwrap();
    let q = verify_quasi_metric(&skew).unwrap();
    assert_eq!(q.c0, 3.0);
    assert!(!q.symmetric);

    // Brute-force c1 on random spaces.
    let mut rng = common::rng(5);
    for _ in 0..20 {
        let n = rng.gen_range(3..30);
        let s = common::random_space(&mut rng, n);
        let q = verify_quasi_metric(&s).unwrap();
        let mut c1: f64 = 1.0;
        let mut c0: f64 = 1.0;
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    c0 = c0.max(s.dist(y, x) / s.dist(x, y));
                }
                for z in 0..n {
                    let detour = s.dist(x, z).max(s.dist(z, y));
                    if detour > 0.0 {
                        c1 = c1.max(s.dist(x, y) / detour);
                    }
                }
            }
        }
        assert_eq!((q.c0, q.c1), (c0, c1));
    }
}

#[test]
fn axiom_violations_are_reported() {
    let zero = SpaceDescriptor::from_table(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0; 2]);
    assert_eq!(zero, Err(SpaceError::ZeroDistanceOffDiagonal(0, 1)));
    let negative = SpaceDescriptor::from_table(vec![vec![0.0, -1.0], vec![1.0, 0.0]], vec![1.0; 2]);
    assert!(matches!(negative, Err(SpaceError::NegativeDistance(0, 1, _))));
    let diagonal = SpaceDescriptor::from_table(vec![vec![0.5, 1.0], vec![1.0, 0.0]], vec![1.0; 2]);
    assert_eq!(diagonal, Err(SpaceError::NonzeroDiagonal(0, 0.5)));
}

#[test]
fn open_ball_examples() {
    let s = gen_dyadic_interval(2).unwrap();
    assert_eq!(open_ball(&s, 1, 0.3).unwrap().members, vec![0, 1, 2]);
    assert_eq!(open_ball(&s, 1, 0.1).unwrap().members, vec![1]);
    assert_eq!(open_ball(&s, 1, 5.0).unwrap().members, vec![0, 1, 2, 3]);
    assert_eq!(open_ball(&s, 4, 1.0), Err(SpaceError::InvalidPoint(4)));
    assert_eq!(open_ball(&s, 0, 0.0), Err(SpaceError::NonpositiveRadius(0.0)));
}

#[test]
fn four_cell_family_matches_radius_scan() {
    let s = gen_dyadic_interval(2).unwrap();
    let families = distinct_ball_family(&s);
    for (x, family) in families.iter().enumerate() {
        let mut listed: Vec<Vec<usize>> = family
            .entries()
            .map(|(_, m)| {
                let mut m = m.to_vec();
                m.sort_unstable();
                m
            })
            .collect();
        listed.sort();
        let mut scanned: Vec<Vec<usize>> =
            (1..=10_000).map(|i| open_ball(&s, x, i as f64 * 1.2e-4).unwrap().members).collect();
        scanned.sort();
        scanned.dedup();
        assert_eq!(listed, scanned, "center {x}");
    }
}

#[test]
fn random_balls_are_family_entries() {
    let s = gen_power_weight(6, 1.5).unwrap();
    let families = distinct_ball_family(&s);
    let mut rng = common::rng(77);
    for _ in 0..10_000 {
        let x = rng.gen_range(0..s.n());
        let r = rng.gen_range(1e-4..1.5);
        let ball = open_ball(&s, x, r).unwrap().members;
        assert!(families[x].entries().any(|(_, m)| {
            let mut m = m.to_vec();
            m.sort_unstable();
            m == ball
        }));
    }
}

#[test]
fn random_space_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::rng(9);
    for i in 0..12 {
        let n = rng.gen_range(1..20);
        let s = common::random_space(&mut rng, n);
        let path = dir.path().join(format!("s{i}.txt"));
        save_space(&s, &path).unwrap();
        let back = load_space(&path).unwrap();
        assert_eq!(back.weights(), s.weights());
        for x in 0..n {
            assert_eq!(back.row(x), s.row(x));
        }
    }
}
