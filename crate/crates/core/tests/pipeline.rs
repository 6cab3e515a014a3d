use secstab_core::equilibrium::{find_equilibrium_default, EquilibriumStatus, SolverSettings};
use secstab_core::kepler::OrbitConfig;
use secstab_core::stability::{classify_spatial, SpatialVerdict};
use secstab_core::sweep::{evaluate_cell, CellStatus};

#[test]
fn equilibrium_moves_continuously_with_a() {
    let settings = SolverSettings::default();
    let mut prev: Option<f64> = None;
    for k in 0..12 {
        let a = 0.1 + 0.03 * k as f64;
        let cfg = OrbitConfig::new(a, 0.4, 0.0).unwrap();
        let eq = find_equilibrium_default(&cfg, &settings).unwrap();
        assert_eq!(eq.status, EquilibriumStatus::Found, "a = {a}");
        let e = eq.e_star().unwrap();
        if let Some(p) = prev {
            assert!(e > p && e - p < 0.05, "a = {a}: {p} -> {e}");
        }
        prev = Some(e);
    }
}

#[test]
fn cell_agrees_with_the_separate_stages() {
    let settings = SolverSettings::default();
    let cfg = OrbitConfig::new(2.2, 0.5, 1e-3).unwrap();
    let eq = find_equilibrium_default(&cfg, &settings).unwrap();
    let rec = classify_spatial(&cfg, &eq, &settings).unwrap();
    assert_eq!(rec.spatial_verdict, SpatialVerdict::LinearlyStable);
    let cell = evaluate_cell(2.2, 0.5, 1e-3, &settings);
    assert_eq!(cell.status, CellStatus::Found);
    assert_eq!(cell.record.unwrap(), rec);
}

#[test]
fn tightening_the_quadrature_keeps_the_equilibrium() {
    let coarse = SolverSettings::default();
    let mut fine = coarse;
    fine.quad.tol = 1e-12;
    let cfg = OrbitConfig::new(0.45, 0.6, 0.0).unwrap();
    let e1 = find_equilibrium_default(&cfg, &coarse)
        .unwrap()
        .e_star()
        .unwrap();
    let e2 = find_equilibrium_default(&cfg, &fine)
        .unwrap()
        .e_star()
        .unwrap();
    assert!((e1 - e2).abs() < 1e-8, "{e1} vs {e2}");
}
