//! Red-black successive over-relaxation on a `LatticeOperator`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Block, LatticeOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTolerance {
    /// relative residual in the discrete 2-norm, raised to the rounding level
    pub rel: f64,
    /// max-norm residual floor, raised automatically to the rounding level
    pub abs: f64,
    pub max_sweeps: usize,
}

impl Default for LinearTolerance {
    fn default() -> Self {
        LinearTolerance { rel: 1e-11, abs: 1e-12, max_sweeps: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SolveStats {
    pub sweeps: usize,
    pub rel_residual: f64,
    pub max_residual: f64,
    pub omega: f64,
}

/// Over-relaxation factor from a lower bound on the spectrum of the operator, scaled by the
/// median diagonal (the axis rows for m > 2 are heavier and would push omega too close to 2).
pub fn omega_for(op: &LatticeOperator, lambda_lower: f64) -> f64 {
    let mut d: Vec<f64> = op.blocks.iter().flat_map(|b| b.diag.iter().copied()).collect();
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, typical, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    let mu = (lambda_lower / *typical).clamp(1e-12, 1.0);
    let rho = 1.0 - mu;
    2.0 / (1.0 + (1.0 - rho * rho).max(0.0).sqrt())
}

const CHUNK: usize = 2048;

fn half_sweep(b: &Block, rhs: &[f64], x: &mut [f64], other: &[f64], omega: f64) {
    x.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, xs)| {
        let base = ci * CHUNK;
        for (o, xv) in xs.iter_mut().enumerate() {
            let l = base + o;
            let (lo, hi) = (b.start[l] as usize, b.start[l + 1] as usize);
            let mut s = rhs[l];
            for e in lo..hi {
                s += b.w[e] * other[b.cols[e] as usize];
            }
            *xv += omega * (s / b.diag[l] - *xv);
        }
    });
}

fn residual_norms(b: &Block, rhs: &[f64], x: &[f64], other: &[f64]) -> (f64, f64) {
    x.par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, xs)| {
            let base = ci * CHUNK;
            let mut acc = (0.0, 0.0f64);
            for (o, xv) in xs.iter().enumerate() {
                let l = base + o;
                let (lo, hi) = (b.start[l] as usize, b.start[l + 1] as usize);
                let mut r = rhs[l] - b.diag[l] * xv;
                for e in lo..hi {
                    r += b.w[e] * other[b.cols[e] as usize];
                }
                acc.0 += r * r;
                acc.1 = acc.1.max(r.abs());
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)))
}

/// Solve A x = rhs starting from the contents of `x`.
pub fn sor_solve(
    op: &LatticeOperator,
    rhs: &[f64],
    x: &mut [f64],
    tol: &LinearTolerance,
    omega: f64,
) -> Result<SolveStats> {
    let r = op.split(rhs);
    let mut xs = op.split(x);
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let scale = op.max_diag();
    let mut omega = omega;
    let check_every = 8;
    let mut best = f64::INFINITY;
    let mut best_max = f64::INFINITY;
    let mut flat = 0;
    let mut sweeps = 0;
    loop {
        let (s2r, mr) = residual_norms(&op.blocks[0], &r[0], &xs[0], &xs[1]);
        let (s2b, mb) = residual_norms(&op.blocks[1], &r[1], &xs[1], &xs[0]);
        let rel = (s2r + s2b).sqrt() / rhs_norm;
        let max_res = mr.max(mb);
        let xmax = xs.iter().flat_map(|v| v.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
        let floor = tol.abs.max(64.0 * f64::EPSILON * scale * xmax.max(1.0));
        let xnorm = xs.iter().flat_map(|v| v.iter()).map(|v| v * v).sum::<f64>().sqrt();
        let rel_floor = tol.rel.max(64.0 * f64::EPSILON * scale * xnorm / rhs_norm);
        if !rel.is_finite() {
            return Err(Error::LinearSolve { residual: rel, sweeps });
        }
        if max_res < 0.5 * best_max {
            best_max = max_res;
            flat = 0;
        } else {
            flat += 1;
        }
        // the relative test is met and the max residual sits at round-off
        let stalled = rel <= rel_floor && flat >= 64;
        if rel <= rel_floor && (max_res <= floor || stalled) {
            op.merge(&xs, x);
            return Ok(SolveStats { sweeps, rel_residual: rel, max_residual: max_res, omega });
        }
        if sweeps >= tol.max_sweeps {
            return Err(Error::LinearSolve { residual: rel, sweeps });
        }
        // SOR residuals are far from monotone for omega near 2; only damp on real growth
        if rel > 1e4 * best {
            omega = 1.0 + 0.5 * (omega - 1.0);
            best = rel;
        }
        best = best.min(rel);
        for _ in 0..check_every {
            let (xr, xb) = xs.split_at_mut(1);
            half_sweep(&op.blocks[0], &r[0], &mut xr[0], &xb[0], omega);
            half_sweep(&op.blocks[1], &r[1], &mut xb[0], &xr[0], omega);
        }
        sweeps += check_every;
    }
}
