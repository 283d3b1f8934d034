use ctoq::haarhp::{
    derived_quantities, haar_mean_pairwise_overlap, hp_channel, hp_states, min_eig_stats_run, run_experiment, theorem3_bound,
    xi_b_rad, HpConfig, MonteCarlo, XiSpec,
};
use ctoq::linop::{kron, partial_trace, permute_subsystems, Operator};
use ctoq::ppgm::build_ppgm;
use ctoq::qcore::{pauli_basis, purify, OrthoBasis, PauliKind};
use ctoq::random::{haar_unitary, random_density, stream_rng};
use ctoq::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn mixed_xi() -> XiSpec {
    XiSpec::Mixed(vec![0.5, 0.25, 0.125, 0.125])
}

/// tr_{S_in}[U(ρ ⊗ ξ^{B_in B_rad})U†] reordered to B_rad ⊗ S_rad.
fn direct_output(u: &Operator, rho: &Operator, cfg: &HpConfig) -> Operator {
    let t = tol();
    let pur = purify(&cfg.initial_state, &t).unwrap();
    let (dk, db) = (cfg.dim_msg(), cfg.dim_bh());
    let dr = pur.nrows() / db;
    let (d_in, d_rad) = (cfg.dim_s_in(), cfg.dim_s_rad());
    let joint = kron(&rho.reshape_dims(vec![dk], vec![dk]).unwrap(), &pur.reshape_dims(vec![db, dr], vec![db, dr]).unwrap())
        .reshape_dims(vec![dk * db, dr], vec![dk * db, dr])
        .unwrap();
    let big_u = kron(u, &Operator::identity(&[dr])).reshape_dims(vec![dk * db, dr], vec![dk * db, dr]).unwrap();
    let out = big_u.mul(&joint).unwrap().mul(&big_u.dagger()).unwrap();
    let split = out.reshape_dims(vec![d_in, d_rad, dr], vec![d_in, d_rad, dr]).unwrap();
    let kept = partial_trace(&split, &[1, 2]).unwrap();
    permute_subsystems(&kept, &[1, 0]).unwrap()
}

#[test]
fn kraus_route_matches_unitary_evolution() {
    let t = tol();
    let mut rng = stream_rng(1, 0);
    let cases = [
        (2, 1, 1, XiSpec::Pure),
        (2, 1, 2, XiSpec::MaximallyMixed),
        (3, 1, 2, mixed_xi()),
        (2, 2, 3, XiSpec::Mixed(vec![0.75, 0.25])),
    ];
    for (n, k, l, xi) in cases {
        let cfg = HpConfig::new(n, k, l, &xi, 0, 1).unwrap();
        let u = haar_unitary(cfg.dim_s(), &mut rng);
        let ch = hp_channel(&u, &cfg.initial_state, &cfg, &t).unwrap();
        assert!(ch.tp_defect() < 1e-12);
        for _ in 0..3 {
            let rho = random_density(cfg.dim_msg(), 2, &mut rng);
            let a = ch.apply(&rho).unwrap();
            let b = direct_output(&u, &rho, &cfg);
            assert!(a.max_abs_diff(&b) < 1e-12, "({n},{k},{l}): {}", a.max_abs_diff(&b));
        }
    }
}

#[test]
fn nothing_radiated_gives_constant_output() {
    let t = tol();
    let mut rng = stream_rng(2, 0);
    for xi in [XiSpec::Pure, XiSpec::MaximallyMixed] {
        let cfg = HpConfig::new(2, 1, 0, &xi, 0, 1).unwrap();
        let u = haar_unitary(cfg.dim_s(), &mut rng);
        let ch = hp_channel(&u, &cfg.initial_state, &cfg, &t).unwrap();
        let expect = xi_b_rad(&cfg, &t).unwrap();
        let basis = OrthoBasis::computational(2);
        let (states, _) = hp_states(&ch, &basis).unwrap();
        for s in &states {
            assert!(s.data().iter().zip(expect.data().iter()).all(|(a, b)| (a - b).norm() < 1e-12));
        }
        let b = build_ppgm(&ch, &basis, &t).unwrap();
        assert!((b.delta_cl() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn everything_radiated_is_isometric() {
    let t = tol();
    let cfg = HpConfig::new(2, 1, 3, &XiSpec::Pure, 5, 20).unwrap();
    let mut rng = stream_rng(3, 0);
    let u = haar_unitary(8, &mut rng);
    let ch = hp_channel(&u, &cfg.initial_state, &cfg, &t).unwrap();
    assert_eq!(ch.kraus().len(), 1);
    let k = ch.kraus()[0].data();
    assert!((k.adjoint() * k - nalgebra::DMatrix::identity(2, 2)).norm() < 1e-12);
    for o in run_experiment(&cfg, &t).unwrap() {
        let r = o.result.unwrap();
        assert!(r.delta_cl_x.abs() < 1e-8 && r.delta_cl_z.abs() < 1e-8 && r.delta_q_ctoq.abs() < 1e-8);
    }
}

#[test]
fn hp_states_linearity_and_basis_independence() {
    let t = tol();
    let cfg = HpConfig::new(2, 2, 2, &XiSpec::Mixed(vec![0.75, 0.25]), 0, 1).unwrap();
    let u = haar_unitary(cfg.dim_s(), &mut stream_rng(4, 0));
    let ch = hp_channel(&u, &cfg.initial_state, &cfg, &t).unwrap();
    let z = pauli_basis(2, PauliKind::Z).unwrap();
    let x = pauli_basis(2, PauliKind::X).unwrap();
    let (sz, pz) = hp_states(&ch, &z).unwrap();
    let (sx, px) = hp_states(&ch, &x).unwrap();
    let avg = sz.iter().fold(Operator::zeros(pz.row_dims(), pz.col_dims()), |acc, s| acc.add(s).unwrap()).scale(0.25);
    assert!(avg.max_abs_diff(&pz) < 1e-10);
    assert!(pz.max_abs_diff(&px) < 1e-12);
    for s in sz.iter().chain(&sx) {
        assert!((s.trace().re - 1.0).abs() < 1e-12);
        assert!(ctoq::linop::min_eigenvalue(s) > -1e-12);
    }
}

#[test]
fn derived_quantities_from_spectrum() {
    let t = tol();
    let cfg = HpConfig::new(3, 1, 2, &mixed_xi(), 0, 1).unwrap();
    let d = derived_quantities(&cfg, &t);
    let h2 = -(0.25f64 + 0.0625 + 2.0 * 0.015625).log2();
    assert!((d.h2_bin - h2).abs() < 1e-12);
    assert_eq!(d.rank, 4);
    assert!((d.lambda_xi - 0.5).abs() < 1e-12);
    assert!((d.ell_th - (1.0 + (3.0 - h2) / 2.0)).abs() < 1e-12);
}

#[test]
fn first_haar_moment() {
    for d in [2usize, 5] {
        let xs: Vec<f64> = (0..5000).map(|t| haar_unitary(d, &mut stream_rng(77, t)).data()[(0, 0)].norm_sqr()).collect();
        let mc = MonteCarlo::from_samples(&xs);
        assert!(mc.z_score(1.0 / d as f64).abs() <= 3.0, "d={d}: {mc:?}");
    }
}

#[test]
fn trial_overlaps_match_closed_form() {
    let t = tol();
    for l in [1, 2] {
        let cfg = HpConfig::new(2, 1, l, &XiSpec::MaximallyMixed, 21, 500).unwrap();
        let xs: Vec<f64> = run_experiment(&cfg, &t).unwrap().into_iter().map(|o| o.result.unwrap().pairwise_overlap_z).collect();
        let mc = MonteCarlo::from_samples(&xs);
        assert!(mc.z_score(haar_mean_pairwise_overlap(&cfg)).abs() <= 3.0, "l={l}: {mc:?}");
    }
}

#[test]
fn experiments_are_deterministic() {
    let t = tol();
    let cfg = HpConfig::new(2, 1, 2, &XiSpec::Pure, 8, 6).unwrap();
    let a = run_experiment(&cfg, &t).unwrap();
    let b = run_experiment(&cfg, &t).unwrap();
    assert_eq!(a, b);
    let other = HpConfig::new(2, 1, 2, &XiSpec::Pure, 9, 6).unwrap();
    assert_ne!(a, run_experiment(&other, &t).unwrap());
}

#[test]
fn small_eigenvalue_fraction() {
    let t = tol();
    // reference fractions from an independent numpy simulation (3000 draws, minimum over both j):
    // pure (3,1,2) 1.0, pure (3,1,3) 0.4357, maximally mixed (3,1,2) 0.0137
    let cfg = HpConfig::new(3, 1, 2, &XiSpec::Pure, 4, 200).unwrap();
    let (frac, thr) = min_eig_stats_run(&cfg, 0.5, &t).unwrap();
    assert!(frac > 0.9, "{frac}");
    assert!((thr - 0.5 / 4.0).abs() < 1e-15);
    let cfg = HpConfig::new(3, 1, 3, &XiSpec::Pure, 4, 400).unwrap();
    let (frac, _) = min_eig_stats_run(&cfg, 0.5, &t).unwrap();
    assert!((frac - 0.4357).abs() < 0.08, "{frac}");
    let cfg = HpConfig::new(3, 1, 2, &XiSpec::MaximallyMixed, 4, 200).unwrap();
    let (frac, _) = min_eig_stats_run(&cfg, 0.5, &t).unwrap();
    assert!((0.0..0.1).contains(&frac), "{frac}");
    let cfg0 = HpConfig::new(3, 1, 0, &XiSpec::Pure, 4, 20).unwrap();
    let (f0, _) = min_eig_stats_run(&cfg0, 0.5, &t).unwrap();
    assert!(f0 == 0.0 || f0 == 1.0);
}

#[test]
fn theorem3_first_term_decreases() {
    let t = tol();
    let mut prev = f64::INFINITY;
    for l in 0..=5 {
        let cfg = HpConfig::new(4, 1, l, &XiSpec::Pure, 0, 1).unwrap();
        let b = theorem3_bound(&cfg, 0.5, &t).unwrap();
        assert!(b.first_term < prev);
        prev = b.first_term;
        assert!(b.vacuous);
    }
}
