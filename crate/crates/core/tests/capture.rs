use cctskit::capture::{capture_capital, capture_cost_per_tonne, co2_captured, cost_supply_curve, estimate, CaptureCostParams};
use cctskit::fixtures::mini_gulf;
use proptest::prelude::*;

#[test]
fn ammonia_plant_cost() {
    let c = capture_cost_per_tonne(5.0009, 0.94, &CaptureCostParams::default()).unwrap();
    assert!((c - 27.0 * 5.0009f64.powf(-0.415)).abs() < 1e-12);
    assert!((c - 13.84).abs() < 0.05, "{c}");
}

#[test]
fn unit_capture_costs_c0_for_every_row() {
    let p = CaptureCostParams::default();
    for r in &p.rows {
        assert_eq!(capture_cost_per_tonne(1.0, r.concentration, &p).unwrap(), r.c0);
    }
}

#[test]
fn capital_matches_annualization() {
    let p = CaptureCostParams::default();
    let k = capture_capital(5.0009, 0.94, &p).unwrap();
    let expected = 0.5 * (27.0 * 5.0009f64.powf(-0.415)) * 5.0009e6 * 0.90 / 0.106;
    assert!((k - expected).abs() <= 1e-9 * expected);
    assert!((k / 1e8 - 2.94).abs() < 0.01, "{k}");
}

#[test]
fn supply_curve_is_sorted_and_cumulative() {
    let g = mini_gulf().unwrap();
    let p = CaptureCostParams::default();
    let curve = cost_supply_curve(&g.facilities, &p).unwrap();
    assert!(curve.windows(2).all(|w| w[0].cost <= w[1].cost));
    let total: f64 = g
        .facilities
        .iter()
        .map(|f| estimate(f, &p).unwrap().captured)
        .sum();
    assert!((curve.last().unwrap().cumulative - total).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn captured_is_exact_product(emitted in 0.0f64..50.0, frac in 0.0f64..=1.0) {
        let p = CaptureCostParams::default();
        prop_assert_eq!(co2_captured(emitted, frac, &p).unwrap(), emitted * frac * 0.95);
    }

    #[test]
    fn unit_cost_falls_with_scale(q in 0.01f64..20.0, k in 1.01f64..5.0, conc in 0.02f64..1.0) {
        let p = CaptureCostParams::default();
        let a = capture_cost_per_tonne(q, conc, &p).unwrap();
        let b = capture_cost_per_tonne(q * k, conc, &p).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn richer_streams_are_cheaper(q in 0.05f64..20.0, c in 0.05f64..0.9, dc in 0.01f64..0.09) {
        // At and above 1 Mt/y both C0 and the scale exponent favor high concentration.
        let p = CaptureCostParams::default();
        let q = q.max(1.0);
        prop_assert!(capture_cost_per_tonne(q, c + dc, &p).unwrap() <= capture_cost_per_tonne(q, c, &p).unwrap());
    }
}
