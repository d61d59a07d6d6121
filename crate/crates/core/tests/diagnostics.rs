use saddlekit::diagnostics::{
    check_asymptotics, check_pointwise_bound, check_symmetry, diagnose, energy, energy_by_r, monotonicity_minima,
    nonlinear_residual, ResidualStencil,
};
use saddlekit::field::{extend_odd, ExtendedField};
use saddlekit::grid::TriGrid;
use saddlekit::nonlinearity::builtin;
use saddlekit::profile::build_profile;
use saddlekit::solver::{iterate_maximal, iterate_minimal, SolveOptions};

#[test]
fn report_for_small_run() {
    let spec = builtin("allen_cahn").unwrap();
    let profile = build_profile(&spec, 8.0, 512).unwrap();
    let grid = TriGrid::new(2, 12.0, 0.125).unwrap();
    let opts = SolveOptions::default();
    let max = iterate_maximal(&grid, &spec, &profile, &opts).unwrap();
    let min = iterate_minimal(&grid, &spec, &opts).unwrap();
    let rep = diagnose(&max, Some(&min.field), &spec, &profile).unwrap();
    assert!(rep.passes(grid.h), "{rep:?}");
    assert_eq!(rep.symmetry_defect, 0.0);
    assert_eq!(rep.energy_by_r.len(), 3);
    let e: Vec<f64> = rep.energy_by_r.iter().map(|r| r[2]).collect();
    let spread = (e.iter().copied().fold(0.0, f64::max) - e.iter().copied().fold(f64::MAX, f64::min)) / e[2];
    assert!(spread < 0.25);

    let json = serde_json::to_value(&rep).unwrap();
    let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    keys.sort();
    assert_eq!(
        keys,
        ["asym_sup_grad", "asym_sup_u", "bound_violation", "energy_by_R", "monotonicity_minima", "symmetry_defect"]
    );
}

#[test]
fn bound_and_monotonicity_flag_bad_fields() {
    let spec = builtin("allen_cahn").unwrap();
    let profile = build_profile(&spec, 8.0, 512).unwrap();
    let grid = TriGrid::new(2, 4.0, 0.25).unwrap();
    let mut f = iterate_maximal(&grid, &spec, &profile, &SolveOptions::default()).unwrap();
    assert!(check_pointwise_bound(&f, &profile) <= 1e-8);
    let k = grid.index(10, 3);
    f.values[k] += 0.5;
    assert!(check_pointwise_bound(&f, &profile) > 0.1);
    assert!(!monotonicity_minima(&f).passes(1e-8));
}

#[test]
fn energy_of_constant_state() {
    // u = 1 has zero energy; u = 0 has G(0) times the quarter disc area
    let spec = builtin("allen_cahn").unwrap();
    let one = ExtendedField::from_fn(1, 0.05, 40, |_, _| 1.0);
    assert_eq!(energy(&one, &spec, 2.0).unwrap(), 0.0);
    let zero = one.map(|_| 0.0);
    let area = std::f64::consts::PI;
    let e = energy(&zero, &spec, 2.0).unwrap();
    assert!((e - 0.25 * area).abs() < 0.02 * area, "{e}");
    assert!(energy(&zero, &spec, 3.0).is_err());
    let rows = energy_by_r(&zero, &spec, &[1.0, 2.0]).unwrap();
    assert_eq!(rows[1][0], 2.0);
    assert_eq!(rows[1][2], rows[1][1] / 2.0);
}

#[test]
fn exact_profile_has_no_asymptotic_gap() {
    let profile = build_profile(&builtin("allen_cahn").unwrap(), 8.0, 512).unwrap();
    let h = 0.125;
    let v = ExtendedField::from_fn(2, h, 64, |i, j| profile.eval((i as f64 - j as f64) * h / 2f64.sqrt()));
    let (gu, gg) = check_asymptotics(&v, &profile, (4.0, 6.0)).unwrap();
    assert!(gu < 1e-14, "{gu}");
    assert!(gg < 0.01, "{gg}");
    assert_eq!(check_symmetry(&v), 0.0);
}

#[test]
fn residual_vanishes_for_one_dimensional_solution() {
    // for m = 1 the profile of (s - t)/sqrt 2 solves the planar equation exactly
    let spec = builtin("allen_cahn").unwrap();
    let profile = build_profile(&spec, 8.0, 512).unwrap();
    let mut last = f64::INFINITY;
    for h in [0.25, 0.125, 0.0625] {
        let n = (8.0 / h) as usize;
        let v = ExtendedField::from_fn(1, h, n, |i, j| profile.eval((i as f64 - j as f64) * h / 2f64.sqrt()));
        let r = nonlinear_residual(&v, &spec, ResidualStencil::Central2, 1.0, 7.0);
        assert!(r < last / 3.0, "{r} {last}");
        last = r;
    }
    let grid = TriGrid::new(2, 6.0, 0.25).unwrap();
    let f = iterate_maximal(&grid, &spec, &profile, &SolveOptions::default()).unwrap();
    let ext = extend_odd(&f);
    assert!(nonlinear_residual(&ext, &spec, ResidualStencil::Central2, 1.0, 5.0) < 1e-8);
}

#[test]
fn maximal_energy_below_envelope() {
    let spec = builtin("allen_cahn").unwrap();
    let profile = build_profile(&spec, 8.0, 512).unwrap();
    let grid = TriGrid::new(2, 8.0, 0.125).unwrap();
    let ext = extend_odd(&iterate_maximal(&grid, &spec, &profile, &SolveOptions::default()).unwrap());
    let env = ExtendedField::from_fn(2, grid.h, grid.n, |i, j| profile.eval((i as f64 - j as f64) * grid.h / 2f64.sqrt()));
    for r in [4.0, 6.0, 8.0] {
        assert!(energy(&env, &spec, r).unwrap() >= energy(&ext, &spec, r).unwrap() - 1e-6);
    }
}
