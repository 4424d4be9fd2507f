use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ops::{annihilation, number, projector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..dim)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

fn random_mps(dims: &[usize], bond: usize, seed: u64) -> MpsState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dims.len();
    let mut tensors = Vec::new();
    let mut left = 1;
    for (i, &d) in dims.iter().enumerate() {
        let right = if i + 1 == n { 1 } else { bond };
        let data = (0..left * d * right)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        tensors.push(SiteTensor::new(left, d, right, data).unwrap());
        left = right;
    }
    let mut s = MpsState::from_tensors(tensors).unwrap();
    s.normalize();
    s
}

fn dense_overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Singular values of the dense vector reshaped across the cut after
/// `sites_left` sites.
fn dense_schmidt(v: &[Complex64], dims: &[usize], sites_left: usize) -> Vec<f64> {
    let rows: usize = dims[..sites_left].iter().product();
    let cols = v.len() / rows;
    let m = DMatrix::from_row_slice(rows, cols, v);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[test]
fn product_state_basics() {
    let s = MpsState::product_state(&[2, 4, 4, 4], &[0, 0, 0, 0]).unwrap();
    assert!((s.norm_squared() - 1.0).abs() < 1e-15);
    assert!(s.bond_dims().iter().all(|&b| b == 1));
    let mut work = s.clone();
    for bond in 0..3 {
        assert_eq!(work.bond_entropy(bond).unwrap(), 0.0);
    }
    let p = s.expectation(&[(0, projector(2, 0, 0))]).unwrap();
    assert!((p.re - 1.0).abs() < 1e-15 && p.im.abs() < 1e-15);
    assert!(MpsState::product_state(&[2, 3], &[0, 3]).is_err());
    assert!(MpsState::product_state(&[2, 3], &[0]).is_err());
}

#[test]
fn canonicalize_product_state_is_noop() {
    let s = MpsState::product_state(&[2, 3, 3], &[1, 0, 2]).unwrap();
    let mut t = s.clone();
    t.canonicalize(0).unwrap();
    for (a, b) in s.tensors().iter().zip(t.tensors()) {
        assert_eq!(a.dims(), b.dims());
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).norm() < 1e-15);
        }
    }
}

#[test]
fn center_sweep_preserves_state() {
    let dims = [2, 3, 3, 3, 3, 2];
    let s = random_mps(&dims, 5, 11);
    let before = s.to_dense().unwrap();
    let mut t = s.clone();
    for c in 0..dims.len() {
        t.move_center(c).unwrap();
        assert!(t.isometry_residual() < 1e-10);
    }
    for c in (0..dims.len()).rev() {
        t.move_center(c).unwrap();
        assert!(t.isometry_residual() < 1e-10);
    }
    t.canonicalize(3).unwrap();
    assert!(t.isometry_residual() < 1e-10);
    let after = t.to_dense().unwrap();
    assert!((dense_overlap(&before, &after) - 1.0).norm() < 1e-12);
}

#[test]
fn truncation_of_constructed_pair() {
    let a = 0.999f64.sqrt();
    let b = 0.001f64.sqrt();
    // a|00⟩ + b|11⟩
    let v = vec![c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0)];
    let mut s = MpsState::from_dense(&v, &[2, 2]).unwrap();
    let tr = s.truncate_bond(0, 1e-2, usize::MAX).unwrap();
    assert_eq!(tr.kept, 1);
    assert!((s.discarded_weight() - 0.001).abs() < 1e-14);
    assert!((s.norm_squared() - 1.0).abs() < 1e-12);
    assert_eq!(s.bond_dims(), vec![1]);
}

#[test]
fn zero_cutoff_keeps_state() {
    let dims = [2, 3, 3, 2];
    let mut s = random_mps(&dims, 4, 5);
    let before = s.to_dense().unwrap();
    s.move_center(1).unwrap();
    s.truncate_bond(1, 0.0, usize::MAX).unwrap();
    assert_eq!(s.discarded_weight(), 0.0);
    let after = s.to_dense().unwrap();
    assert!((dense_overlap(&before, &after) - 1.0).norm() < 1e-12);
    assert!(s.truncate_bond(0, 0.0, 4).is_err());
}

#[test]
fn kept_spectrum_matches_dense_svd() {
    let dims = [2, 3, 3, 3, 3, 3];
    let v = random_vector(dims.iter().product(), 21);
    for bond in 0..dims.len() - 1 {
        let mut s = MpsState::from_dense(&v, &dims).unwrap();
        let exact = dense_schmidt(&v, &dims, bond + 1);
        let weights = s.schmidt_weights(bond).unwrap();
        for (w, e) in weights.iter().zip(&exact) {
            assert!((w - e * e).abs() < 1e-10, "bond {bond}");
        }
        // hard-truncate to 3 values and compare with the leading dense ones
        s.move_center(bond).unwrap();
        let tr = s.truncate_bond(bond, 0.0, 3).unwrap();
        let kept = tr.kept.min(exact.len());
        let total: f64 = exact.iter().map(|x| x * x).sum();
        let dense_discarded: f64 = exact[kept..].iter().map(|x| x * x).sum::<f64>() / total;
        assert!((tr.discarded - dense_discarded).abs() < 1e-10);
        let after = s.schmidt_weights(bond).unwrap();
        let kept_total: f64 = exact[..kept].iter().map(|x| x * x).sum();
        for (w, e) in after.iter().zip(&exact[..kept]) {
            assert!((w - e * e / kept_total).abs() < 1e-10);
        }
    }
}

#[test]
fn entropy_matches_reduced_density_matrix() {
    let dims = [2, 4, 4, 4, 4, 2];
    let dim: usize = dims.iter().product();
    assert!(dim <= 4096);
    let v = random_vector(dim, 3);
    let s = MpsState::from_dense(&v, &dims).unwrap();
    let all = s.all_schmidt_weights().unwrap();
    for bond in 0..dims.len() - 1 {
        let rows: usize = dims[..=bond].iter().product();
        let cols = dim / rows;
        let m = DMatrix::from_row_slice(rows, cols, &v);
        let rho = &m * m.adjoint();
        let eig = rho.symmetric_eigen();
        let exact: f64 = eig
            .eigenvalues
            .iter()
            .filter(|&&p| p > 1e-300)
            .map(|&p| -p * p.ln())
            .sum();
        let mut t = s.clone();
        let got = t.bond_entropy(bond).unwrap();
        assert!((got - exact).abs() < 1e-10, "bond {bond}: {got} vs {exact}");
        assert!((entropy_of(&all[bond]) - exact).abs() < 1e-10);
    }
}

#[test]
fn bell_pair_entropy_is_ln2() {
    let h = 0.5f64.sqrt();
    let v = vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
    let mut s = MpsState::from_dense(&v, &[2, 2]).unwrap();
    assert!((s.bond_entropy(0).unwrap() - 2f64.ln()).abs() < 1e-14);
}

#[test]
fn expectation_identities() {
    let dims = [2, 3, 3, 3];
    let s = random_mps(&dims, 4, 8);
    let id = s.expectation(&[]).unwrap();
    assert!((id.re - 1.0).abs() < 1e-12 && id.im.abs() < 1e-12);
    let herm = s.expectation(&[(1, number(3)), (3, number(3))]).unwrap();
    assert!(herm.im.abs() < 1e-10);
    assert!(s.expectation(&[(1, number(4))]).is_err());
}

#[test]
fn number_operator_on_single_excitation() {
    // system in |0⟩, one quantum shared among three modes
    let dims = [2, 3, 3, 3];
    let amps = [0.6, 0.0, 0.8];
    let dim: usize = dims.iter().product();
    let mut v = vec![c(0.0, 0.0); dim];
    for (k, a) in amps.iter().enumerate() {
        let mut idx = 0;
        for (site, &d) in dims.iter().enumerate() {
            let occ = if site == k + 1 { 1 } else { 0 };
            idx = idx * d + occ;
        }
        v[idx] = c(*a, 0.0);
    }
    let s = MpsState::from_dense(&v, &dims).unwrap();
    for (k, a) in amps.iter().enumerate() {
        let n = s.expectation(&[(k + 1, number(3))]).unwrap();
        assert!((n.re - a * a).abs() < 1e-12);
    }
    let coherence = s
        .expectation(&[(1, annihilation(3).adjoint()), (3, annihilation(3))])
        .unwrap();
    assert!((coherence.re - 0.48).abs() < 1e-12);
}

#[test]
fn dense_round_trip_and_cap() {
    let dims = [2, 3, 4];
    let v = random_vector(24, 9);
    let s = MpsState::from_dense(&v, &dims).unwrap();
    let w = s.to_dense().unwrap();
    for (a, b) in v.iter().zip(&w) {
        assert!((a - b).norm() < 1e-12);
    }
    let big = MpsState::product_state(&[2; 15], &[0; 15]).unwrap();
    assert!(matches!(big.to_dense(), Err(Error::DimensionCap { .. })));
}

#[test]
fn two_site_swap_exchanges_sites() {
    let dims = [2, 3, 4];
    let v = random_vector(24, 13);
    let mut s = MpsState::from_dense(&v, &dims).unwrap();
    s.move_center(1).unwrap();
    s.apply_two_site(1, None, true, Sweep::Right, 0.0, usize::MAX).unwrap();
    assert_eq!(s.local_dims(), vec![2, 4, 3]);
    let w = s.to_dense().unwrap();
    for a in 0..2 {
        for b in 0..3 {
            for cc in 0..4 {
                let orig = v[(a * 3 + b) * 4 + cc];
                let swapped = w[(a * 4 + cc) * 3 + b];
                assert!((orig - swapped).norm() < 1e-12);
            }
        }
    }
    assert_eq!(s.center(), 2);
    assert!(s.isometry_residual() < 1e-10);
}

#[test]
fn two_site_gate_matches_dense() {
    let dims = [2, 3, 2];
    let v = random_vector(12, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let g = CMatrix::from_fn(6, 6, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut s = MpsState::from_dense(&v, &dims).unwrap();
    s.apply_two_site(0, Some(&g), false, Sweep::Left, 0.0, usize::MAX).unwrap();
    let w = s.to_dense().unwrap();
    let full = g.kronecker(&CMatrix::identity(2, 2));
    let expect = &full * nalgebra::DVector::from_column_slice(&v);
    let n = expect.norm();
    for (a, b) in w.iter().zip(expect.iter()) {
        assert!((a - b / n).norm() < 1e-12);
    }
}

#[test]
fn checkpoint_round_trip() {
    let s = random_mps(&[2, 3, 3, 2], 3, 4);
    let mut buf = Vec::new();
    write_checkpoint(&s, &mut buf).unwrap();
    assert_eq!(&buf[..8], CHECKPOINT_MAGIC);
    let t = read_checkpoint(buf.as_slice()).unwrap();
    assert_eq!(t.local_dims(), s.local_dims());
    assert_eq!(t.center(), s.center());
    for (a, b) in s.tensors().iter().zip(t.tensors()) {
        assert_eq!(a, b);
    }
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(read_checkpoint(bad.as_slice()).is_err());
    assert!(read_checkpoint(&buf[..buf.len() - 3]).is_err());
}

proptest! {
    #[test]
    fn larger_cutoff_never_keeps_more(
        mut values in prop::collection::vec(0.0f64..1.0, 1..20),
        c1 in 0.0f64..0.5,
        c2 in 0.0f64..0.5,
    ) {
        values.sort_by(|a, b| b.total_cmp(a));
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let a = truncation_rank(&values, lo, usize::MAX);
        let b = truncation_rank(&values, hi, usize::MAX);
        prop_assert!(b.kept <= a.kept);
        prop_assert!(a.discarded <= lo + 1e-12);
        prop_assert!(b.discarded <= hi + 1e-12);
    }

    #[test]
    fn discarded_weight_accumulates(seed in 0u64..200, cutoff in 0.0f64..0.2, max_bond in 1usize..4) {
        let mut s = random_mps(&[2, 3, 3, 3], 4, seed);
        let mut last = 0.0;
        for bond in 0..3 {
            s.move_center(bond).unwrap();
            s.truncate_bond(bond, cutoff, max_bond).unwrap();
            prop_assert!(s.discarded_weight() >= last);
            prop_assert!((s.norm_squared() - 1.0).abs() < 1e-12);
            prop_assert!(s.bond_dims()[bond] <= max_bond);
            last = s.discarded_weight();
        }
    }
}
