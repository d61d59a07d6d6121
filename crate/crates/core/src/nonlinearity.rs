//! Bistable nonlinearities f with potential G (G' = -f) and wells at +-M.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct NonlinearitySpec {
    pub name: String,
    f: ScalarFn,
    f_prime: Option<ScalarFn>,
    g: ScalarFn,
    pub well: f64,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("NonlinearitySpec")
            .field("name", &self.name)
            .field("well", &self.well)
            .field("analytic_derivative", &self.f_prime.is_some())
            .finish()
    }
}

pub const BUILTINS: &[&str] = &["allen_cahn", "sine"];

pub fn builtin(name: &str) -> Result<NonlinearitySpec> {
    match name {
        "allen_cahn" => Ok(NonlinearitySpec {
            name: name.into(),
            f: Arc::new(|u| u - u * u * u),
            f_prime: Some(Arc::new(|u| 1.0 - 3.0 * u * u)),
            g: Arc::new(|u| 0.25 * (1.0 - u * u).powi(2)),
            well: 1.0,
        }),
        "sine" => Ok(NonlinearitySpec {
            name: name.into(),
            f: Arc::new(|u| (PI * u).sin()),
            f_prime: Some(Arc::new(|u| PI * (PI * u).cos())),
            g: Arc::new(|u| (1.0 + (PI * u).cos()) / PI),
            well: 1.0,
        }),
        other => Err(Error::UnknownNonlinearity(other.into())),
    }
}

impl NonlinearitySpec {
    /// `f_prime = None` falls back to central differences with step 1e-6 M.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: Option<ScalarFn>,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        well: f64,
    ) -> Result<Self> {
        if !(well > 0.0 && well.is_finite()) {
            return Err(Error::Domain(format!("well location must be positive, got {well}")));
        }
        Ok(NonlinearitySpec {
            name: name.into(),
            f: Arc::new(f),
            f_prime,
            g: Arc::new(potential),
            well,
        })
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    #[inline]
    pub fn f_prime(&self, u: f64) -> f64 {
        match &self.f_prime {
            Some(d) => d(u),
            None => {
                let e = 1e-6 * self.well;
                ((self.f)(u + e) - (self.f)(u - e)) / (2.0 * e)
            }
        }
    }

    #[inline]
    pub fn potential(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.f_prime.is_some()
    }

    /// -f'(M), the mass in the iteration operator.
    pub fn mass(&self) -> f64 {
        -self.f_prime(self.well)
    }

    /// Unchecked g(rho) = f(rho) - f'(M) rho, for use inside solver loops.
    #[inline]
    pub fn g_unchecked(&self, rho: f64) -> f64 {
        self.f(rho) + self.mass() * rho
    }

    pub fn decay_rate(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn identity_tol(&self) -> f64 {
        if self.f_prime.is_some() {
            1e-10
        } else {
            1e-6
        }
    }
}

pub fn g_shifted(spec: &NonlinearitySpec, rho: f64) -> Result<f64> {
    if !(0.0..=spec.well).contains(&rho) {
        return Err(Error::Domain(format!("rho = {rho} outside [0, {}]", spec.well)));
    }
    Ok(spec.g_unchecked(rho))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub location: Option<f64>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub g_increasing: bool,
    pub ratio_decreasing: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_violation(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

pub fn validate(spec: &NonlinearitySpec, samples: usize) -> Result<ValidationReport> {
    if samples < 16 {
        return Err(Error::Domain(format!("need at least 16 samples, got {samples}")));
    }
    let m = spec.well;
    let tol = spec.identity_tol();
    let inner: Vec<f64> = (1..samples).map(|k| m * k as f64 / samples as f64).collect();
    let mut checks = Vec::new();

    let point = |name, w: f64, v: f64| Check {
        name,
        passed: v.abs() <= tol,
        location: Some(w),
        value: Some(v),
    };
    checks.push(point("G(M)=0", m, spec.potential(m)));
    checks.push(point("G(-M)=0", -m, spec.potential(-m)));
    checks.push(point("f(0)=0", 0.0, spec.f(0.0)));
    checks.push(point("f(M)=0", m, spec.f(m)));

    let first_bad = |name, pts: &mut dyn Iterator<Item = f64>, ok: &dyn Fn(f64) -> Option<f64>| {
        for w in pts {
            if let Some(v) = ok(w) {
                return Check { name, passed: false, location: Some(w), value: Some(v) };
            }
        }
        Check { name, passed: true, location: None, value: None }
    };

    checks.push(first_bad(
        "G>0 on (-M,M)",
        &mut inner.iter().flat_map(|&w| [w, -w]).chain([0.0]),
        &|w| {
            let v = spec.potential(w);
            (v <= 0.0).then_some(v)
        },
    ));
    checks.push(first_bad(
        "G>=0 on [-2M,2M]",
        &mut (0..=4 * samples).map(|k| -2.0 * m + m * k as f64 / samples as f64),
        &|w| {
            let v = spec.potential(w);
            (v < -tol).then_some(v)
        },
    ));
    checks.push(first_bad("f odd", &mut inner.iter().copied(), &|w| {
        let v = spec.f(-w) + spec.f(w);
        (v.abs() > tol).then_some(v)
    }));

    let fp: Vec<f64> = inner.iter().map(|&w| spec.f_prime(w)).collect();
    let mut fp_check = Check { name: "f' decreasing on (0,M)", passed: true, location: None, value: None };
    for k in 1..fp.len() {
        if fp[k] >= fp[k - 1] {
            fp_check = Check {
                name: fp_check.name,
                passed: false,
                location: Some(inner[k]),
                value: Some(fp[k] - fp[k - 1]),
            };
            break;
        }
    }
    checks.push(fp_check);
    let fpm = spec.f_prime(m);
    checks.push(Check { name: "f'(M)<0", passed: fpm < 0.0, location: Some(m), value: Some(fpm) });

    let grid: Vec<f64> = (0..=samples).map(|k| m * k as f64 / samples as f64).collect();
    let gvals: Vec<f64> = grid.iter().map(|&r| spec.g_unchecked(r)).collect();
    let g_bad = (1..gvals.len()).find(|&k| gvals[k] < gvals[k - 1]);
    checks.push(Check {
        name: "g increasing on [0,M]",
        passed: g_bad.is_none(),
        location: g_bad.map(|k| grid[k]),
        value: g_bad.map(|k| gvals[k] - gvals[k - 1]),
    });
    let ratio: Vec<f64> = grid[1..].iter().map(|&r| spec.f(r) / r).collect();
    let r_bad = (1..ratio.len()).find(|&k| ratio[k] > ratio[k - 1]);
    checks.push(Check {
        name: "f(rho)/rho decreasing on (0,M]",
        passed: r_bad.is_none(),
        location: r_bad.map(|k| grid[k + 1]),
        value: r_bad.map(|k| ratio[k] - ratio[k - 1]),
    });

    Ok(ValidationReport {
        g_increasing: g_bad.is_none(),
        ratio_decreasing: r_bad.is_none(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let ac = builtin("allen_cahn").unwrap();
        assert_eq!(ac.potential(0.0), 0.25);
        assert_eq!(ac.f(1.0), 0.0);
        assert_eq!(ac.mass(), 2.0);
        let sine = builtin("sine").unwrap();
        assert!((sine.potential(0.0) - 0.636_619_772_367_581_3).abs() < 1e-15);
        assert!((sine.mass() - PI).abs() < 1e-15);
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let e = builtin("quintic").unwrap_err().to_string();
        assert!(e.contains("allen_cahn") && e.contains("sine"));
    }

    #[test]
    fn g_shifted_values() {
        let ac = builtin("allen_cahn").unwrap();
        assert_eq!(g_shifted(&ac, 0.0).unwrap(), 0.0);
        assert_eq!(g_shifted(&ac, 1.0).unwrap(), 2.0);
        assert_eq!(g_shifted(&ac, 0.5).unwrap(), 1.375);
        assert!(g_shifted(&ac, 1.5).is_err());
        assert!(g_shifted(&ac, -0.1).is_err());
    }

    #[test]
    fn builtins_validate() {
        for name in BUILTINS {
            let rep = validate(&builtin(name).unwrap(), 1000).unwrap();
            assert!(rep.passed(), "{name}: {:?}", rep.first_violation());
            assert!(rep.g_increasing && rep.ratio_decreasing);
        }
    }

    #[test]
    fn linear_f_fails_at_well_potential() {
        let lin = NonlinearitySpec::custom("linear", |u| u, None, |u| 1.0 - 0.5 * u * u, 1.0).unwrap();
        let rep = validate(&lin, 100).unwrap();
        assert_eq!(rep.first_violation().unwrap().name, "G(M)=0");
    }

    #[test]
    fn finite_difference_derivative() {
        let ac = builtin("allen_cahn").unwrap();
        let fd = NonlinearitySpec::custom("ac_fd", |u| u - u * u * u, None, |u| 0.25 * (1.0 - u * u).powi(2), 1.0)
            .unwrap();
        for k in 0..20 {
            let u = -1.0 + 0.1 * k as f64;
            assert!((fd.f_prime(u) - ac.f_prime(u)).abs() < 1e-8);
        }
        assert!(validate(&fd, 500).unwrap().passed());
    }

    #[test]
    fn too_few_samples() {
        assert!(validate(&builtin("sine").unwrap(), 8).is_err());
    }
}
