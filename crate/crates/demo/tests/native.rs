use ctoq_demo::{hp_sweep_rows, theorem1_curve_points, theorem3_rows};

#[test]
fn curve_starts_exact_and_respects_bounds() {
    for noise in ["depolarizing", "dephasing", "random"] {
        let pts = theorem1_curve_points(3, noise, 5, 1).unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts[0].delta_q.abs() < 1e-9 && pts[0].theorem1.abs() < 1e-6);
        for p in &pts {
            assert!(p.delta_q <= p.theorem1 + 1e-9, "{noise}: {p:?}");
            // √Ξ turns a rounding-level Ξ ≈ 1e-16 into ~1e-8
            assert!(p.theorem1 <= p.corollary1 + 1e-7, "{noise}: {p:?}");
        }
    }
}

#[test]
fn dephasing_endpoint() {
    // full Z-dephasing keeps E perfectly and scrambles F: Δ_E = 0, Δ_F = (d−1)/d
    let pts = theorem1_curve_points(2, "dephasing", 1, 0).unwrap();
    let last = &pts[1];
    assert!(last.delta_e.abs() < 1e-12);
    assert!((last.delta_f - 0.5).abs() < 1e-12);
    assert!((last.theorem1 - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn sweep_endpoints() {
    let rows = hp_sweep_rows(2, 1, "pure", 10, 4).unwrap();
    assert_eq!(rows.len(), 4);
    assert!((rows[0].delta_cl_z - 0.5).abs() < 1e-12);
    assert!(rows[3].delta_q.abs() < 1e-9);
    assert!(hp_sweep_rows(5, 2, "pure", 10, 4).is_err());
}

#[test]
fn theorem3_rows_shape() {
    let rows = theorem3_rows(4, 1, "pure", 0.5).unwrap();
    assert_eq!(rows.len(), 6);
    assert!((rows[3].log2_delta - 43.455_200_172_358_15).abs() < 1e-9);
    assert!(rows.iter().all(|r| r.vacuous));
    assert!(theorem3_rows(2, 1, "maximally_mixed", 0.0).is_err());
    let json = ctoq_demo::theorem3_table(2, 1, "pure", 0.5).unwrap();
    assert!(json.starts_with('['));
}
