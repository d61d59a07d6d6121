//! Pointwise bound, energy, asymptotics, monotonicity and symmetry checks.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ExtendedField, SaddleField};
use crate::grid::Tag;
use crate::nonlinearity::NonlinearitySpec;
use crate::profile::Profile1D;

pub const BOUND_TOL: f64 = 1e-8;
pub const MONOTONE_TOL: f64 = 1e-8;

/// max over nodes of |u| - |u0((s - t)/sqrt 2)|.
pub fn check_pointwise_bound(field: &SaddleField, profile: &Profile1D) -> f64 {
    let g = &field.grid;
    g.nodes()
        .map(|(i, j)| {
            let (s, t) = g.coords(i, j);
            field.at(i, j).abs() - profile.eval((s - t) * FRAC_1_SQRT_2).abs()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Energy with c_m = 1 over the quarter disc s^2 + t^2 < r_eval^2, midpoint rule per cell.
pub fn energy(field: &ExtendedField, spec: &NonlinearitySpec, r_eval: f64) -> Result<f64> {
    if r_eval > field.r() + 1e-12 {
        return Err(Error::Domain(format!("R_eval = {r_eval} exceeds grid R = {}", field.r())));
    }
    let (h, n, m) = (field.h, field.n, field.m as i32);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (s, t) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if s * s + t * t >= r_eval * r_eval {
                continue;
            }
            let (a, b, c, d) = (field.at(i, j), field.at(i + 1, j), field.at(i, j + 1), field.at(i + 1, j + 1));
            let us = 0.5 * ((b - a) + (d - c)) / h;
            let ut = 0.5 * ((c - a) + (d - b)) / h;
            let u = 0.25 * (a + b + c + d);
            let w = (s * t).powi(m - 1);
            total += w * (0.5 * (us * us + ut * ut) + spec.potential(u));
        }
    }
    Ok(total * h * h)
}

pub fn energy_by_r(field: &ExtendedField, spec: &NonlinearitySpec, radii: &[f64]) -> Result<Vec<[f64; 3]>> {
    let p = 2 * field.m as i32 - 1;
    radii
        .iter()
        .map(|&r| {
            let e = energy(field, spec, r)?;
            Ok([r, e, e / r.powi(p)])
        })
        .collect()
}

/// sup |u - u0(z)| and sup |grad_h u - grad U| over T_R nodes with y in the band.
pub fn check_asymptotics(field: &ExtendedField, profile: &Profile1D, band: (f64, f64)) -> Result<(f64, f64)> {
    let (h, n) = (field.h, field.n);
    let d = |i: usize, j: usize, axis: usize| -> f64 {
        let (k, step) = if axis == 0 { (i, (1, 0)) } else { (j, (0, 1)) };
        let fwd = |a: usize, b: usize| field.at(a + step.0, b + step.1);
        let bwd = |a: usize, b: usize| field.at(a - step.0, b - step.1);
        if k == 0 {
            (fwd(i, j) - field.at(i, j)) / h
        } else if k == n {
            (field.at(i, j) - bwd(i, j)) / h
        } else {
            (fwd(i, j) - bwd(i, j)) / (2.0 * h)
        }
    };
    let (mut gap_u, mut gap_g, mut count) = (0.0f64, 0.0f64, 0usize);
    for i in 0..=n {
        for j in 0..=i {
            let (s, t) = (i as f64 * h, j as f64 * h);
            let (y, z) = ((s + t) * FRAC_1_SQRT_2, (s - t) * FRAC_1_SQRT_2);
            if y < band.0 || y > band.1 {
                continue;
            }
            count += 1;
            gap_u = gap_u.max((field.at(i, j) - profile.eval(z)).abs());
            let du = profile.eval_deriv(z) * FRAC_1_SQRT_2;
            let (es, et) = (d(i, j, 0) - du, d(i, j, 1) + du);
            gap_g = gap_g.max((es * es + et * et).sqrt());
        }
    }
    if count == 0 {
        return Err(Error::Domain(format!("no nodes with y in [{}, {}]", band.0, band.1)));
    }
    Ok((gap_u, gap_g))
}

/// Minima of -D_t u, D_s u, D_y u, D_z u (plain forward differences) over interior nodes of T_R.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityMinima {
    pub neg_dt: f64,
    pub ds: f64,
    pub dy: f64,
    pub dz: f64,
}

impl MonotonicityMinima {
    pub fn passes(&self, tol: f64) -> bool {
        [self.neg_dt, self.ds, self.dy, self.dz].iter().all(|&v| v >= -tol)
    }
}

pub fn monotonicity_minima(field: &SaddleField) -> MonotonicityMinima {
    let g = &field.grid;
    let mut out = MonotonicityMinima { neg_dt: f64::INFINITY, ds: f64::INFINITY, dy: f64::INFINITY, dz: f64::INFINITY };
    for (i, j) in g.nodes() {
        if g.tag(i, j) != Tag::Interior {
            continue;
        }
        let u = field.at(i, j);
        out.neg_dt = out.neg_dt.min(u - field.at(i, j + 1));
        out.ds = out.ds.min(field.at(i + 1, j) - u);
        out.dy = out.dy.min(field.at(i + 1, j + 1) - u);
        out.dz = out.dz.min(field.at(i + 1, j - 1) - u);
    }
    out
}

/// sup |u(s,t) + u(t,s)|.
pub fn check_symmetry(field: &ExtendedField) -> f64 {
    let n = field.n;
    let mut worst = 0.0f64;
    for i in 0..=n {
        for j in 0..=i {
            worst = worst.max((field.at(i, j) + field.at(j, i)).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualStencil {
    Central2,
    Central4,
}

/// sup |-(u_ss + u_tt) - (m-1)(u_s/s + u_t/t) - f(u)| over nodes of T_R off the cone with
/// t > 0, |x| >= r_min and s <= s_max, using even reflection across the axes.
pub fn nonlinear_residual(
    field: &ExtendedField,
    spec: &NonlinearitySpec,
    stencil: ResidualStencil,
    r_min: f64,
    s_max: f64,
) -> f64 {
    let (h, n, m) = (field.h, field.n as isize, field.m as f64);
    let reach = if stencil == ResidualStencil::Central4 { 2 } else { 1 };
    let mut worst = 0.0f64;
    for i in 1..=(n - reach) {
        for j in 1..i {
            let (s, t) = (i as f64 * h, j as f64 * h);
            if s > s_max + 1e-12 || s * s + t * t < r_min * r_min {
                continue;
            }
            let u = |a: isize, b: isize| field.at_reflected(a, b);
            let d = |di: isize, dj: isize| -> (f64, f64) {
                let p = |k: isize| u(i + k * di, j + k * dj);
                match stencil {
                    ResidualStencil::Central2 => ((p(1) - p(-1)) / (2.0 * h), (p(1) - 2.0 * p(0) + p(-1)) / (h * h)),
                    ResidualStencil::Central4 => (
                        (-p(2) + 8.0 * p(1) - 8.0 * p(-1) + p(-2)) / (12.0 * h),
                        (-p(2) + 16.0 * p(1) - 30.0 * p(0) + 16.0 * p(-1) - p(-2)) / (12.0 * h * h),
                    ),
                }
            };
            let (us, uss) = d(1, 0);
            let (ut, utt) = d(0, 1);
            let r = -(uss + utt) - (m - 1.0) * (us / s + ut / t) - spec.f(u(i, j));
            worst = worst.max(r.abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub bound_violation: f64,
    #[serde(rename = "energy_by_R")]
    pub energy_by_r: Vec<[f64; 3]>,
    pub asym_sup_u: f64,
    pub asym_sup_grad: f64,
    pub monotonicity_minima: MonotonicityMinima,
    pub symmetry_defect: f64,
}

impl DiagnosticsReport {
    /// Bound and monotonicity within 1e-8; symmetry defect within 10 h^2.
    pub fn passes(&self, h: f64) -> bool {
        let finite = [self.bound_violation, self.asym_sup_u, self.asym_sup_grad, self.symmetry_defect]
            .iter()
            .chain(self.energy_by_r.iter().flatten())
            .all(|v| v.is_finite());
        finite
            && self.bound_violation <= BOUND_TOL
            && self.monotonicity_minima.passes(MONOTONE_TOL)
            && self.symmetry_defect <= 10.0 * h * h
    }
}

/// Full report for a maximal field and, optionally, the minimal one.
pub fn diagnose(
    maximal: &SaddleField,
    minimal: Option<&SaddleField>,
    spec: &NonlinearitySpec,
    profile: &Profile1D,
) -> Result<DiagnosticsReport> {
    let r = maximal.grid.r;
    let ext = crate::field::extend_odd(maximal);
    let mut bound = check_pointwise_bound(maximal, profile);
    if let Some(mn) = minimal {
        bound = bound.max(check_pointwise_bound(mn, profile));
    }
    let (asym_u, asym_g) = check_asymptotics(&ext, profile, (0.5 * r, 0.75 * r))?;
    Ok(DiagnosticsReport {
        bound_violation: bound,
        energy_by_r: energy_by_r(&ext, spec, &[0.5 * r, 0.75 * r, r])?,
        asym_sup_u: asym_u,
        asym_sup_grad: asym_g,
        monotonicity_minima: monotonicity_minima(maximal),
        symmetry_defect: check_symmetry(&ext),
    })
}
