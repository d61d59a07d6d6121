use num_rational::Ratio;
use saddlekit::field::{extend_odd, ExtendedField};
use saddlekit::grid::TriGrid;
use saddlekit::solver::{iterate_maximal, SolveOptions};
use saddlekit::nonlinearity::builtin;
use saddlekit::profile::{build_profile, Profile1D};
use saddlekit::stability::{
    cone_vanishing_stability, default_z_cut, disjoint_instability_family, family_ratio, hardy_margin, identity_form,
    eta_cutoff, quadratic_form, quadratic_form_values, rho_integral, test_values, verdict, Bump, EtaParams, Radial,
    TestFunction, Verdict,
};
use saddlekit::Error;

fn envelope(m: usize, r: f64, h: f64, p: &Profile1D) -> ExtendedField {
    let n = (r / h).round() as usize;
    ExtendedField::from_fn(m, h, n, |i, j| p.eval((i as f64 - j as f64) * h / 2f64.sqrt()))
}

fn ac() -> Profile1D {
    build_profile(&builtin("allen_cahn").unwrap(), 8.0, 512).unwrap()
}

#[test]
fn rho_integral_examples() {
    let e = EtaParams::new(0.01, 100.0, 1.75).unwrap();
    assert!(rho_integral(3, &e, 1e-12).unwrap() < 0.0);
    // Hardy: positive margin means no negative direction
    for m in 4..=6 {
        assert!(rho_integral(m, &e, 1e-12).unwrap() >= -1e-6);
    }
    struct Zero;
    impl Radial for Zero {
        fn value(&self, _: f64) -> f64 {
            0.0
        }
        fn deriv(&self, _: f64) -> f64 {
            0.0
        }
        fn breakpoints(&self) -> Vec<f64> {
            vec![1.0, 2.0]
        }
    }
    assert_eq!(rho_integral(3, &Zero, 1e-12).unwrap(), 0.0);
    assert!(eta_cutoff(0.5, 0.6, 10.0, 1.75).is_err());
    assert_eq!(eta_cutoff(0.5, 0.1, 10.0, 1.75).unwrap(), 1.0 - 10f64.powf(-1.75));
}

#[test]
fn hardy_margins_exact() {
    let expect = [(1, Ratio::new(1, 4)), (2, Ratio::new(-7, 4)), (3, Ratio::new(-7, 4)), (4, Ratio::new(1, 4)), (5, Ratio::new(17, 4))];
    for (m, r) in expect {
        assert_eq!(hardy_margin(m), r, "m = {m}");
    }
}

#[test]
fn verdicts() {
    assert_eq!(verdict(&[[4.0, -0.5], [8.0, -0.7]], -1.75), Verdict::UnstableDemonstrated);
    assert_eq!(verdict(&[[4.0, 0.5]], 0.25), Verdict::AsymptoticallyStableMargin);
    assert_eq!(verdict(&[[4.0, 0.5]], -1.75), Verdict::Inconclusive);
}

#[test]
fn support_checks_name_required_r() {
    let p = ac();
    let v = envelope(3, 16.0, 0.25, &p);
    let xi = TestFunction::EtaUz { a: 4.0, eta: EtaParams::default(), z_cut: default_z_cut(&p) };
    match quadratic_form(&v, p.spec(), &xi) {
        Err(Error::SupportTooLarge { required_r, .. }) => assert!(required_r > 40.0),
        other => panic!("{other:?}"),
    }
    assert!(identity_form(&v, 4.0, &EtaParams::default(), 17.0).is_err());
    assert!(test_values(&v, &TestFunction::Explicit(vec![0.0; 3])).is_err());
    let fam = disjoint_instability_family(&v, p.spec(), &p, 3, 4.0, &EtaParams::default());
    assert!(matches!(fam, Err(Error::SupportTooLarge { .. })));
    assert!(disjoint_instability_family(&envelope(2, 16.0, 0.25, &p), p.spec(), &p, 1, 4.0, &EtaParams::default()).is_err());
    assert_eq!(family_ratio(&EtaParams::default()), 128.0);
    assert_eq!(family_ratio(&EtaParams::new(0.25, 2.0, 1.75).unwrap()), 16.0);
}

#[test]
fn additivity_on_disjoint_supports() {
    let p = ac();
    let v = envelope(3, 32.0, 0.25, &p);
    let z_cut = default_z_cut(&p);
    let eta = EtaParams::new(0.25, 2.0, 1.75).unwrap();
    let x1 = test_values(&v, &TestFunction::EtaUz { a: 1.0, eta, z_cut }).unwrap();
    let x2 = test_values(&v, &TestFunction::EtaUz { a: 10.0, eta, z_cut }).unwrap();
    let sum: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
    let (q1, q2) = (quadratic_form_values(&v, p.spec(), &x1), quadratic_form_values(&v, p.spec(), &x2));
    let q = quadratic_form_values(&v, p.spec(), &sum);
    assert!((q - q1 - q2).abs() <= 1e-9 * q.abs().max(q1.abs() + q2.abs()));
}

#[test]
fn cone_vanishing_is_positive_on_envelope() {
    let p = ac();
    let v = envelope(2, 12.0, 0.125, &p);
    let res = cone_vanishing_stability(&v, p.spec(), 8, 7).unwrap();
    assert_eq!(res.values.len(), 8);
    assert!(res.min_q >= -1e-8, "{}", res.min_q);
    let again = cone_vanishing_stability(&v, p.spec(), 8, 7).unwrap();
    assert_eq!(res.values, again.values);
    let b = Bump { yc: 3.0, zc: 0.0, sy: 1.0, sz: 0.5 };
    assert!(quadratic_form(&v, p.spec(), &TestFunction::ConeVanishing(b)).unwrap() > 0.0);
}

#[test]
fn scaled_identity_matches_direct() {
    // on a computed solution the two evaluations of Q(xi_a)/a^3 agree to discretisation error
    let p = ac();
    let grid = TriGrid::new(3, 40.0, 0.125).unwrap();
    let v = extend_odd(&iterate_maximal(&grid, p.spec(), &p, &SolveOptions::default()).unwrap());
    let eta = EtaParams::new(0.25, 4.0, 1.75).unwrap();
    let z_cut = default_z_cut(&p);
    for a in [2.0, 4.0] {
        let id = identity_form(&v, a, &eta, z_cut).unwrap();
        let direct = quadratic_form(&v, p.spec(), &TestFunction::EtaUz { a, eta, z_cut }).unwrap() / a.powi(3);
        assert!((id - direct).abs() < 0.1 * id.abs().max(direct.abs()), "{id} {direct}");
    }
}
