mod common;

use std::sync::Arc;

use bathchain::chainmap::{
    block_lanczos_map, build_mapping, front_index, lanczos_map, MappingSeed, TimeDependentCouplings,
};
use bathchain::model::SingletFissionParams;
use bathchain::Error;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lanczos_matches_householder_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let (w, a, _) = random_bath(&mut rng, 8);
        let m = lanczos_map(&w, &a).unwrap();
        let (diag, off) = householder_tridiagonal(&w, &a);
        let band = m.band();
        for k in 0..8 {
            assert!((band.alpha[k] - diag[k]).abs() < 1e-10, "alpha {k}");
        }
        for k in 1..8 {
            assert!((band.beta[k].abs() - off[k - 1]).abs() < 1e-10, "beta {k}");
        }
    }
}

#[test]
fn block_lanczos_random_ten_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (w, a, b) = random_bath(&mut rng, 10);
    let m = block_lanczos_map(&w, &a, &b).unwrap();
    let wmax = w[9];
    assert!(orthogonality_residual(m.transform()) < 1e-10);
    assert!(off_band_residual(&m) < 1e-8 * wmax);
    assert!(m.band().kappa[2..].iter().any(|k| k.abs() > 1e-6));
}

#[test]
fn parallel_seeds_are_degenerate() {
    let w = [1.0, 2.0, 3.0];
    let a = [0.3, 0.4, 0.5];
    let b: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
    assert!(matches!(
        block_lanczos_map(&w, &a, &b),
        Err(Error::DegenerateSeeds { .. })
    ));
}

#[test]
fn singlet_fission_preset_mappings() {
    for (diag, od) in [(80.0, 60.0), (80.0, 30.0), (20.0, 30.0)] {
        let bath = SingletFissionParams::reference(diag, od).bath().unwrap();
        let wmax = *bath.frequencies().last().unwrap();
        for seed in [
            MappingSeed::Lanczos { seed: "z".into() },
            MappingSeed::BlockLanczos {
                first: "z".into(),
                second: "x".into(),
            },
        ] {
            let m = build_mapping(&bath, &seed).unwrap();
            assert_eq!(m.modes(), 300);
            assert!(orthogonality_residual(m.transform()) < 1e-10);
            assert!(off_band_residual(&m) < 1e-8 * wmax);
        }
    }
}

#[test]
fn block_lanczos_localizes_both_seeds_at_zero() {
    let bath = SingletFissionParams::reference(80.0, 60.0).bath().unwrap();
    let seed = MappingSeed::BlockLanczos {
        first: "z".into(),
        second: "x".into(),
    };
    let m = Arc::new(build_mapping(&bath, &seed).unwrap());
    let tc = TimeDependentCouplings::new(m, &bath).unwrap();
    for ch in ["z", "x"] {
        let c = tc.couplings_at(ch, 0.0).unwrap();
        let scale = c[0].norm().max(c[1].norm());
        assert!(c[2..].iter().all(|v| v.norm() < 1e-10 * scale.max(1.0)), "{ch}");
    }
}

#[test]
fn wave_grid_single_time_is_one_hot() {
    let bath = fig2_bath(50);
    let m = Arc::new(build_mapping(&bath, &MappingSeed::Lanczos { seed: "x".into() }).unwrap());
    let tc = TimeDependentCouplings::new(m, &bath).unwrap();
    let grid = tc.coupling_wave_grid("x", &[0.0]).unwrap();
    assert_eq!(grid.len(), 1);
    assert!(grid[0][0] > 0.0);
    assert!(grid[0][1..].iter().all(|v| *v < 1e-10 * grid[0][0]));
}

#[test]
fn traveling_wave_front() {
    let modes = 200;
    let bath = fig2_bath(modes);
    let times: Vec<f64> = (0..=300).map(|i| i as f64 * 0.2).collect();
    for seed in [
        MappingSeed::Lanczos { seed: "z".into() },
        MappingSeed::BlockLanczos {
            first: "z".into(),
            second: "x".into(),
        },
    ] {
        let m = Arc::new(build_mapping(&bath, &seed).unwrap());
        let tc = TimeDependentCouplings::new(m, &bath).unwrap();
        for ch in ["z", "x"] {
            let grid = tc.coupling_wave_grid(ch, &times).unwrap();
            let fronts: Vec<usize> = grid.iter().map(|row| front_index(row, 0.99)).collect();
            assert!(
                front_violation(&fronts, modes, 2).is_none(),
                "{seed:?} {ch}: {:?}",
                front_violation(&fronts, modes, 2)
            );
            assert!(fronts.last().unwrap() > &fronts[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_lanczos_invariants(n in 2usize..=64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, a, _) = random_bath(&mut rng, n);
        let m = lanczos_map(&w, &a).unwrap();
        let wmax = w[n - 1];
        prop_assert!(orthogonality_residual(m.transform()) < 1e-10);
        prop_assert!(off_band_residual(&m) < 1e-8 * wmax);
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..n {
            prop_assert!((m.transform()[(i, 0)] - a[i] / na).abs() < 1e-12);
        }
        prop_assert!(m.band().beta[1..].iter().all(|&b| b > 0.0));
    }

    #[test]
    fn random_block_lanczos_invariants(n in 2usize..=64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, a, b) = random_bath(&mut rng, n);
        let m = block_lanczos_map(&w, &a, &b).unwrap();
        prop_assert!(orthogonality_residual(m.transform()) < 1e-10);
        prop_assert!(off_band_residual(&m) < 1e-8 * w[n - 1]);
    }

    #[test]
    fn coupling_norm_is_conserved(n in 2usize..=64, seed in any::<u64>(), block in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, a, b) = random_bath(&mut rng, n);
        let bath = bathchain::spectral::DiscretizedBath::from_parts(
            w,
            vec![
                bathchain::spectral::BathChannel { label: "a".into(), couplings: a.clone() },
                bathchain::spectral::BathChannel { label: "b".into(), couplings: b.clone() },
            ],
        )
        .unwrap();
        let mapping_seed = if block {
            MappingSeed::BlockLanczos { first: "a".into(), second: "b".into() }
        } else {
            MappingSeed::Lanczos { seed: "a".into() }
        };
        let m = Arc::new(build_mapping(&bath, &mapping_seed).unwrap());
        let tc = TimeDependentCouplings::new(m, &bath).unwrap();
        for (ch, src) in [("a", &a), ("b", &b)] {
            let total: f64 = src.iter().map(|c| c * c).sum();
            for _ in 0..20 {
                let t = rng.gen_range(-100.0..100.0);
                let s: f64 = tc.couplings_at(ch, t).unwrap().iter().map(|c| c.norm_sqr()).sum();
                prop_assert!((s - total).abs() <= 1e-10 * total);
            }
        }
        let c = tc.couplings_at("a", 0.0).unwrap();
        prop_assert!(c[1..].iter().all(|v| v.norm() < 1e-10 * c[0].norm()));
    }
}
