use ctoq::ctoq::{build_ctoq, decoded_choi, theorem1_report, CtoQMap};
use ctoq::ppgm::{build_ppgm_with, PpgmMethod};
use ctoq::random::{random_basis, random_channel, random_density, random_povm, stream_rng};
use ctoq::Tolerances;

#[test]
fn structured_decoder_matches_explicit_kraus() {
    let tol = Tolerances::default();
    for seed in 0..12u64 {
        let mut rng = stream_rng(seed, 0);
        let d = 2 + (seed as usize % 2);
        let dc = d + (seed as usize % 3);
        let ch = random_channel(d, dc, 1 + seed as usize % 3, &mut rng).unwrap();
        let pe = random_povm(dc, d, &mut rng).unwrap();
        let pf = random_povm(dc, d, &mut rng).unwrap();
        let e = random_basis(d, &mut rng);
        let f = random_basis(d, &mut rng);
        let dec = build_ctoq(&pe, &pf, &e, &f, &tol).unwrap();
        let explicit = decoded_choi(&dec.total, &ch).unwrap();
        let map = CtoQMap::new(&pe, &pf, &e, &f).unwrap();
        let fast = map.decoded_choi(&ch).unwrap();
        let diff = explicit.max_abs_diff(&fast);
        assert!(diff < 1e-12, "seed {seed}: {diff}");

        let x = random_density(dc, dc, &mut rng);
        let a = dec.total.apply(&x).unwrap();
        let b = map.apply(&x).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }
}

#[test]
fn factored_ppgm_matches_spectral() {
    let tol = Tolerances::default();
    for seed in 0..12u64 {
        let mut rng = stream_rng(100 + seed, 0);
        let d = 2 + (seed as usize % 3);
        let dc = 2 * d + 1;
        let nk = 1 + seed as usize % 2;
        let ch = random_channel(d, dc, nk, &mut rng).unwrap();
        let basis = random_basis(d, &mut rng);
        let a = build_ppgm_with(&ch, &basis, PpgmMethod::Spectral, &tol).unwrap();
        let b = build_ppgm_with(&ch, &basis, PpgmMethod::Factored, &tol).unwrap();
        for (x, y) in a.povm.elements().iter().zip(b.povm.elements()) {
            assert!(x.max_abs_diff(y) < 1e-9, "seed {seed}: {}", x.max_abs_diff(y));
        }
        for (x, y) in a.projectors.iter().zip(&b.projectors) {
            assert!(x.max_abs_diff(y) < 1e-9);
        }
        assert!((a.lambda_min - b.lambda_min).abs() < 1e-10);
    }
}

#[test]
fn theorem1_holds_on_a_few_instances() {
    let tol = Tolerances::default();
    for seed in 0..10u64 {
        let mut rng = stream_rng(900 + seed, 0);
        let d = 2 + (seed as usize % 3);
        let ch = random_channel(d, d + 1, 2, &mut rng).unwrap();
        let pe = random_povm(d + 1, d, &mut rng).unwrap();
        let pf = random_povm(d + 1, d, &mut rng).unwrap();
        let e = random_basis(d, &mut rng);
        let f = random_basis(d, &mut rng);
        let r = theorem1_report(&ch, &pe, &pf, &e, &f, &tol).unwrap();
        assert!(r.slack() >= -1e-9, "{r:?}");
    }
}
