use ctoq::linop::{
    eig_hermitian, fidelity, func_on_support, kron, kron_all, partial_trace, permute_subsystems, schatten_norm,
    singular_values, trace_distance, Mat, C64,
};
use ctoq::qcore::{max_entangled, max_entangled_ket, purify, Channel};
use ctoq::random::{ginibre, random_density, stream_rng};
use ctoq::{Operator, Tolerances};
use proptest::prelude::*;

fn random_op(rows: usize, cols: usize, seed: u64) -> Operator {
    Operator::from_mat(ginibre(rows, cols, &mut stream_rng(seed, 0)))
}

/// tr_B by explicit index sums over a row-major (a, b) layout.
fn trace_out_second(m: &Mat, da: usize, db: usize) -> Mat {
    Mat::from_fn(da, da, |i, j| (0..db).map(|b| m[(i * db + b, j * db + b)]).sum())
}

fn trace_out_first(m: &Mat, da: usize, db: usize) -> Mat {
    Mat::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum())
}

#[test]
fn partial_trace_of_product() {
    let mut rng = stream_rng(1, 0);
    let rho = random_density(3, 3, &mut rng);
    let sigma = random_density(2, 2, &mut rng);
    let joint = kron(&rho, &sigma);
    assert!(partial_trace(&joint, &[0]).unwrap().max_abs_diff(&rho) < 1e-12);
    assert!(partial_trace(&joint, &[1]).unwrap().max_abs_diff(&sigma) < 1e-12);
    let bell = max_entangled(2);
    assert!(partial_trace(&bell, &[0]).unwrap().max_abs_diff(&Operator::identity(&[2]).scale(0.5)) < 1e-15);
}

#[test]
fn fuchs_van_de_graaf_on_500_pairs() {
    let tol = Tolerances::default();
    let mut rng = stream_rng(500, 0);
    for i in 0..500 {
        let d = 2 + i % 4;
        let a = random_density(d, 1 + i % d, &mut rng);
        let b = random_density(d, 1 + (i / 4) % d, &mut rng);
        let f = fidelity(&a, &b, &tol).unwrap();
        let t = trace_distance(&a, &b).unwrap();
        assert!(1.0 - f.sqrt() <= t + 1e-9, "pair {i}");
        assert!(t <= (1.0 - f).max(0.0).sqrt() + 1e-9, "pair {i}");
    }
}

#[test]
fn partial_trace_matches_index_sums() {
    for seed in 0..5 {
        let mut rng = stream_rng(seed, 0);
        let rho = random_density(12, 4, &mut rng).reshape_dims(vec![3, 4], vec![3, 4]).unwrap();
        let a = partial_trace(&rho, &[0]).unwrap();
        let b = partial_trace(&rho, &[1]).unwrap();
        assert!((a.data() - trace_out_second(rho.data(), 3, 4)).norm() < 1e-13);
        assert!((b.data() - trace_out_first(rho.data(), 3, 4)).norm() < 1e-13);
        assert!((a.trace() - rho.trace()).norm() < 1e-13);
    }
}

#[test]
fn partial_trace_three_factors() {
    let mut rng = stream_rng(9, 0);
    let rho = random_density(12, 12, &mut rng).reshape_dims(vec![2, 3, 2], vec![2, 3, 2]).unwrap();
    // keep the middle factor: trace out (a) then (c) by the two-factor oracle
    let ac = trace_out_first(rho.data(), 2, 6);
    let mid = trace_out_second(&ac, 3, 2);
    let got = partial_trace(&rho, &[1]).unwrap();
    assert!((got.data() - mid).norm() < 1e-13);
    assert!(partial_trace(&rho, &[1, 0]).is_err());
}

#[test]
fn eig_reconstructs_random_hermitian() {
    let tol = Tolerances::default();
    let g = random_op(6, 6, 4);
    let h = Operator::from_mat(g.data() + g.data().adjoint());
    let e = eig_hermitian(&h, &tol).unwrap();
    assert!(e.reconstruct_with(|x| x).max_abs_diff(&h) < 1e-10);
    assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn norm_examples() {
    assert!((schatten_norm(&Operator::identity(&[5]), 1.0).unwrap() - 5.0).abs() < 1e-12);
    let d = Operator::diag(&[3.0, -4.0]);
    assert!((schatten_norm(&d, 1.0).unwrap() - 7.0).abs() < 1e-12);
    assert!((schatten_norm(&d, f64::INFINITY).unwrap() - 4.0).abs() < 1e-12);
    assert!(schatten_norm(&d, 0.5).is_err());
}

#[test]
fn trace_distance_examples() {
    let mut rng = stream_rng(2, 0);
    let rho = random_density(3, 2, &mut rng);
    assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-12);
    let p0 = Operator::diag(&[1.0, 0.0]);
    let p1 = Operator::diag(&[0.0, 1.0]);
    assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-12);
    // eigenvalues of Φ − π⊗π are 1 − 1/d² once and −1/d² three times
    let pi = Operator::identity(&[2]).scale(0.5);
    let td = trace_distance(&max_entangled(2), &kron(&pi, &pi).reshape_dims(vec![2, 2], vec![2, 2]).unwrap()).unwrap();
    assert!((td - 0.75).abs() < 1e-12);
}

#[test]
fn fidelity_examples() {
    let tol = Tolerances::default();
    let mut rng = stream_rng(5, 0);
    let rho = random_density(4, 4, &mut rng);
    assert!((fidelity(&rho, &rho, &tol).unwrap() - 1.0).abs() < 1e-9);
    let p0 = Operator::diag(&[1.0, 0.0]);
    let p1 = Operator::diag(&[0.0, 1.0]);
    assert!(fidelity(&p0, &p1, &tol).unwrap().abs() < 1e-12);
    let psi = ginibre(4, 1, &mut rng);
    let psi = &psi / C64::new(psi.norm(), 0.0);
    let proj = Operator::from_mat(&psi * psi.adjoint());
    let expect = (psi.adjoint() * rho.data() * &psi)[(0, 0)].re;
    let got = fidelity(&proj, &rho, &tol).unwrap();
    assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
}

#[test]
fn inverse_square_root_on_support() {
    let tol = Tolerances::default();
    let id = Operator::identity(&[3]);
    assert!(func_on_support(&id, |x| x.powf(-0.5), 1e-12, &tol).unwrap().max_abs_diff(&id) < 1e-14);
    let f = func_on_support(&Operator::diag(&[4.0, 0.0]), |x| x.powf(-0.5), 1e-12, &tol).unwrap();
    assert!(f.max_abs_diff(&Operator::diag(&[0.5, 0.0])) < 1e-14);
    let g = ginibre(5, 3, &mut stream_rng(6, 0));
    let pi = Operator::from_mat(&g * g.adjoint());
    let ih = func_on_support(&pi, |x| x.powf(-0.5), 5.0 * f64::EPSILON, &tol).unwrap();
    let supp = ih.data() * pi.data() * ih.data();
    let q = ctoq::linop::orthonormal_columns(&g);
    assert!((supp - &q * q.adjoint()).norm() < 1e-9);
}

#[test]
fn identity_channel_and_depolarizing_on_entangled_half() {
    let phi = max_entangled(3);
    let id = Channel::identity(&[3]).tensor(&Channel::identity(&[3]));
    assert!(id.apply(&phi).unwrap().max_abs_diff(&phi) < 1e-14);
    let dep = Channel::fully_depolarizing(&[3]);
    let out = dep.apply_to(&phi, &[0]).unwrap();
    let pi = Operator::identity(&[3]).scale(1.0 / 3.0);
    assert!(out.max_abs_diff(&kron(&pi, &pi)) < 1e-14);
}

#[test]
fn purification_marginal() {
    let tol = Tolerances::default();
    let mut rng = stream_rng(8, 0);
    for rank in [1, 2, 4] {
        let rho = random_density(4, rank, &mut rng);
        let p = purify(&rho, &tol).unwrap();
        let marg = partial_trace(&p, &[0]).unwrap();
        assert!(marg.max_abs_diff(&rho) < 1e-9);
    }
    let k = max_entangled_ket(1);
    assert_eq!(k.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let x = random_op(a, b, seed);
        let y = random_op(b, c, seed ^ 1);
        let z = random_op(c, a, seed ^ 2);
        let l = kron(&kron(&x, &y), &z);
        let r = kron(&x, &kron(&y, &z));
        prop_assert!((l.data() - r.data()).norm() < 1e-12);
        prop_assert_eq!(l.row_dims(), &[a, b, c][..]);
        prop_assert!((kron_all(&[x, y, z]).data() - l.data()).norm() < 1e-12);
    }

    #[test]
    fn kron_entries(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let x = random_op(a, a, seed);
        let y = random_op(b, b, seed ^ 7);
        let k = kron(&x, &y);
        for i in 0..a * b {
            for j in 0..a * b {
                let e = x.data()[(i / b, j / b)] * y.data()[(i % b, j % b)];
                prop_assert!((k.data()[(i, j)] - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn schatten_two_is_frobenius(seed in any::<u64>(), r in 1usize..6, c in 1usize..6) {
        let a = random_op(r, c, seed);
        let fro = a.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let s2 = schatten_norm(&a, 2.0).unwrap();
        prop_assert!((s2 * s2 - fro).abs() < 1e-10 * (1.0 + fro));
        let s1: f64 = singular_values(&a).iter().sum();
        prop_assert!((schatten_norm(&a, 1.0).unwrap() - s1).abs() < 1e-10 * (1.0 + s1));
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = stream_rng(seed, 0);
        let a = random_density(d, d, &mut rng);
        let b = random_density(d, 1, &mut rng);
        let c = random_density(d, 2, &mut rng);
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn fuchs_van_de_graaf(seed in any::<u64>(), d in 2usize..5, r1 in 1usize..5, r2 in 1usize..5) {
        let tol = Tolerances::default();
        let mut rng = stream_rng(seed, 0);
        let a = random_density(d, r1, &mut rng);
        let b = random_density(d, r2, &mut rng);
        let f = fidelity(&a, &b, &tol).unwrap();
        let t = trace_distance(&a, &b).unwrap();
        prop_assert!(1.0 - f.sqrt() <= t + 1e-9);
        prop_assert!(t <= (1.0 - f).max(0.0).sqrt() + 1e-9);
    }

    #[test]
    fn permutation_round_trip(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let rho = random_density(12, 3, &mut rng).reshape_dims(vec![2, 3, 2], vec![2, 3, 2]).unwrap();
        let p = permute_subsystems(&rho, &[2, 0, 1]).unwrap();
        prop_assert_eq!(p.row_dims(), &[2, 2, 3][..]);
        let back = permute_subsystems(&p, &[1, 2, 0]).unwrap();
        prop_assert!(back.max_abs_diff(&rho) < 1e-14);
    }
}
