use saddlekit::diagnostics::check_symmetry;
use saddlekit::field::{extend_odd, FieldKind};
use saddlekit::grid::{Tag, TriGrid};
use saddlekit::nonlinearity::builtin;
use saddlekit::operator::FirstOrderScheme;
use saddlekit::profile::build_profile;
use saddlekit::solver::{
    discretize, initial_maximal, inscribed_disc, iterate_maximal, iterate_maximal_observed, iterate_minimal,
    solve_full_square, tag_counts, SolveOptions,
};
use saddlekit::Error;

#[test]
fn maximal_iterates_decrease() {
    let spec = builtin("allen_cahn").unwrap();
    let profile = build_profile(&spec, 8.0, 512).unwrap();
    let grid = TriGrid::new(2, 8.0, 0.125).unwrap();
    let start = initial_maximal(&grid, &profile);
    let mut prev = start.clone();
    let mut worst = f64::NEG_INFINITY;
    let field = iterate_maximal_observed(&grid, &spec, &profile, &SolveOptions::default(), &mut |_, u| {
        worst = worst.max(u.iter().zip(&prev).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max));
        prev = u.to_vec();
    })
    .unwrap();
    assert!(field.converged);
    assert_eq!(field.kind, FieldKind::Maximal);
    assert!(worst <= 1e-10, "{worst}");
    assert!(field.history.len() <= 200);
    assert!(field.history.last().unwrap().update <= 1e-10);
    assert_eq!(field.values, prev);

    // data on the cone and the outer edge are untouched
    for (i, j) in grid.nodes() {
        if matches!(grid.tag(i, j), Tag::ConeEdge | Tag::OuterEdge) {
            assert_eq!(field.at(i, j), start[grid.index(i, j)]);
        }
    }
    assert!(grid.nodes().filter(|&(i, j)| i != j).all(|(i, j)| field.at(i, j) > 0.0));
}

#[test]
fn minimal_below_maximal() {
    let spec = builtin("sine").unwrap();
    let profile = build_profile(&spec, 8.0, 512).unwrap();
    let grid = TriGrid::new(2, 8.0, 0.125).unwrap();
    let opts = SolveOptions::default();
    let max = iterate_maximal(&grid, &spec, &profile, &opts).unwrap();
    let min = iterate_minimal(&grid, &spec, &opts).unwrap();
    assert!(min.field.converged && min.upward.converged);
    assert!(min.lambda1 < spec.f_prime(0.0));
    assert!(min.eps > 0.0 && min.eps < 1.0);
    assert!(min.gap_ok, "{}", min.gap);
    for k in 0..grid.len() {
        assert!(min.upward.values[k] >= -1e-8);
        assert!(min.upward.values[k] <= min.field.values[k] + 1e-8);
        assert!(min.field.values[k] <= max.values[k] + 1e-8);
    }
}

#[test]
fn disc_fits_in_triangle() {
    let grid = TriGrid::new(3, 24.0, 0.125).unwrap();
    let (cs, ct, rho) = inscribed_disc(&grid);
    // distance to t = 0, s = R and s = t
    assert!(ct - rho > 0.0);
    assert!(grid.r - cs - rho > 0.0);
    assert!((cs - ct) / 2f64.sqrt() - rho > 0.0);
}

#[test]
fn operator_is_dominant() {
    let spec = builtin("allen_cahn").unwrap();
    for m in 1..=4 {
        let sys = discretize(m, 6.0, 0.25, &spec, FirstOrderScheme::Hybrid).unwrap();
        assert_eq!(sys.op.dominance_violation(), None, "m = {m}");
    }
    let err = discretize(5, 6.0, 0.25, &spec, FirstOrderScheme::Central).err().unwrap();
    assert!(matches!(err, Error::NotDiagonallyDominant { .. }));
}

#[test]
fn tags_partition_triangle() {
    let grid = TriGrid::new(2, 2.0, 0.25).unwrap();
    let [interior, cone, outer, axis] = tag_counts(&grid);
    assert_eq!(interior + cone + outer + axis, grid.len());
    assert_eq!(cone, 9);
    assert_eq!(outer, 8);
    assert_eq!(axis, 7);
    assert!(TriGrid::new(2, 1.0, 0.25).is_err());
    assert!(TriGrid::new(2, 2.0, 0.3).is_err());
}

#[test]
fn full_square_is_odd() {
    let spec = builtin("allen_cahn").unwrap();
    let profile = build_profile(&spec, 8.0, 512).unwrap();
    let opts = SolveOptions::default();
    let (full, converged) = solve_full_square(2, 6.0, 0.25, &spec, &profile, &opts).unwrap();
    assert!(converged);
    assert!(check_symmetry(&full) <= 10.0 * 0.25 * 0.25);
    let grid = TriGrid::new(2, 6.0, 0.25).unwrap();
    let tri = extend_odd(&iterate_maximal(&grid, &spec, &profile, &opts).unwrap());
    let diff = full.values.iter().zip(&tri.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
}
