use lmfrail::LmmParams;
use lmfrail_wasm_demo::{inspect, region_slice, simulate_and_fit};

#[test]
fn slice_contains_origin_and_traces_the_sheet() {
    let s = region_slice(0.0, (-0.5, 0.5), 0.2, 41, 21).unwrap();
    assert_eq!(s.member.len(), 41 * 21);
    // λ3 = 0 sits in the middle column of the bottom row.
    assert_eq!(s.member[20], 1);
    assert!(!s.boundary.is_empty());
    assert!(s.boundary.iter().all(|&(_, l4, _)| l4 > 0.0));
    assert!(region_slice(0.0, (0.5, -0.5), 0.2, 41, 21).is_err());
}

#[test]
fn inspection_locates_points() {
    let on_sheet = lmfrail::region::boundary_param(4.0, 1.0).unwrap().lambda;
    let i = inspect(on_sheet, 10.0).unwrap();
    assert_eq!(i.location, "sheet");
    assert!((i.double_root.unwrap() - 4.0).abs() < 1e-6);
    assert_eq!(inspect(LmmParams::new(0.0, 0.0, -1.0), 10.0).unwrap().location, "outside");
    assert_eq!(inspect(LmmParams::new(0.1, 0.0, 0.02), 10.0).unwrap().location, "interior");
    assert_eq!(i.q_curve.len(), 201);
}

#[test]
fn round_trip_produces_both_fits() {
    let r = simulate_and_fit(150, 0.2, 3).unwrap();
    assert!(r.events > 0 && r.events <= 150);
    assert!((r.lmm.beta - r.beta_true).abs() < 1.0);
    assert!((r.em.beta - r.beta_true).abs() < 1.0);
    assert_eq!(r.diagnostics.len(), 10);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"diagnostics\""));
    assert!(simulate_and_fit(5, 0.2, 3).is_err());
}
