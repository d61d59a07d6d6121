//! Principal Dirichlet eigenpair of -Delta_h - (m-1)(d_s/s + d_t/t) + V on a
//! lattice region, by inverse iteration.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linsolve::{omega_for, sor_solve, LinearTolerance};
use crate::operator::{FirstOrderScheme, LatticeOperator};

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: f64,
    pub nodes: Vec<(usize, usize)>,
    /// positive, sup-normalised to 1
    pub vector: Vec<f64>,
    pub iterations: usize,
}

pub fn principal_eigenpair(
    m: usize,
    h: f64,
    region: &[(usize, usize)],
    potential: &[f64],
) -> Result<Eigenpair> {
    if region.is_empty() {
        return Err(Error::Domain("empty eigen region".into()));
    }
    if potential.len() != region.len() {
        return Err(Error::Domain(format!(
            "potential has {} values for {} region nodes",
            potential.len(),
            region.len()
        )));
    }
    let index: HashMap<(usize, usize), usize> = region.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let vmin = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = (-vmin).max(0.0);
    let op = LatticeOperator::assemble(
        m,
        h,
        FirstOrderScheme::Hybrid,
        region.to_vec(),
        |i, j| index.get(&(i, j)).copied(),
        |_, _| 0.0,
        |g| potential[g] + shift,
    )?;
    let (imin, imax) = region.iter().fold((usize::MAX, 0), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (jmin, jmax) = region.iter().fold((usize::MAX, 0), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    let lx = (imax - imin + 2) as f64 * h;
    let ly = (jmax - jmin + 2) as f64 * h;
    let omega = omega_for(&op, vmin + shift + PI * PI * (1.0 / (lx * lx) + 1.0 / (ly * ly)));
    let tol = LinearTolerance::default();

    let mut x = vec![1.0; region.len()];
    let mut y = x.clone();
    let mut last = f64::NAN;
    for it in 1..=500 {
        sor_solve(&op, &x, &mut y, &tol, omega)?;
        let ymax = y.iter().copied().fold(0.0, f64::max);
        if !(ymax > 0.0) {
            return Err(Error::EigenStagnation { last });
        }
        for v in y.iter_mut() {
            *v /= ymax;
        }
        let ay = op.apply(&y);
        let quotient = ay.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / y.iter().map(|v| v * v).sum::<f64>();
        let lambda = quotient - shift;
        let done = (lambda - last).abs() <= 1e-8 * lambda.abs().max(1.0);
        last = lambda;
        x.copy_from_slice(&y);
        if done {
            return Ok(Eigenpair { lambda, nodes: region.to_vec(), vector: y, iterations: it });
        }
    }
    Err(Error::EigenStagnation { last })
}

/// Lattice points strictly inside the disc of radius `rho` centred at (cs, ct).
pub fn disc_region(h: f64, cs: f64, ct: f64, rho: f64) -> Vec<(usize, usize)> {
    let lo = |c: f64| ((c - rho) / h).floor().max(0.0) as usize;
    let hi = |c: f64| ((c + rho) / h).ceil() as usize;
    let mut out = Vec::new();
    for i in lo(cs)..=hi(cs) {
        for j in lo(ct)..=hi(ct) {
            let (s, t) = (i as f64 * h, j as f64 * h);
            if (s - cs).powi(2) + (t - ct).powi(2) < rho * rho {
                out.push((i, j));
            }
        }
    }
    out
}
