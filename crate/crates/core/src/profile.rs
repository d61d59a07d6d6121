//! The odd heteroclinic u0 of -u'' = f(u), built by quadrature of
//! phi(sigma) = int_0^sigma dw / sqrt(2 G(w)) and inversion.

use std::cell::Cell;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::quadrature::integrate;

#[derive(Debug, Clone)]
pub struct Profile1D {
    spec: NonlinearitySpec,
    pub tau_max: f64,
    step: f64,
    tau: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    // Hermite slopes per interval after the Fritsch-Carlson limiter
    slopes: Vec<(f64, f64)>,
    pub decay_rate: f64,
    pub tail_amplitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub tau_max: f64,
    pub decay_rate: f64,
    pub dissipation_integral: f64,
    pub hamiltonian_residual_sup: f64,
}

// Rounding in G near the wells limits phi to about eps/(2G); the error this
// leaves in u is that times du0, which stays tiny.
fn phi_tol(spec: &NonlinearitySpec, sigma: f64) -> f64 {
    1e-14 / (2.0 * spec.potential(sigma)).clamp(1e-300, 1.0)
}

fn phi_increment(spec: &NonlinearitySpec, a: f64, b: f64, bad: &Cell<Option<f64>>) -> Result<f64> {
    integrate(
        |w| {
            let g = spec.potential(w);
            if g > 0.0 {
                1.0 / (2.0 * g).sqrt()
            } else {
                if bad.get().is_none() {
                    bad.set(Some(w));
                }
                f64::NAN
            }
        },
        a,
        b,
        phi_tol(spec, b),
    )
}

pub fn build_profile(spec: &NonlinearitySpec, tau_max: f64, nodes: usize) -> Result<Profile1D> {
    if !(tau_max >= 4.0) {
        return Err(Error::Domain(format!("tau_max must be >= 4, got {tau_max}")));
    }
    if nodes < 64 {
        return Err(Error::Domain(format!("need at least 64 nodes, got {nodes}")));
    }
    let m = spec.well;
    let c = spec.mass();
    if !(c > 0.0) {
        return Err(Error::Profile(format!("f'(M) = {} is not negative", -c)));
    }
    let step = 2.0 * tau_max / (nodes - 1) as f64;
    let tau: Vec<f64> = (0..nodes).map(|k| -tau_max + k as f64 * step).collect();

    // targets tau >= 0 in increasing order; safeguarded Newton inside a
    // monotone bisection bracket, using phi'(sigma) = 1/sqrt(2G(sigma))
    let half: Vec<usize> = (0..nodes).filter(|&k| 2 * k + 1 >= nodes).collect();
    let bad = Cell::new(None);
    let wrap = |e: Error| match bad.get() {
        Some(w) => Error::Profile(format!("G(w) <= 0 at w = {w}")),
        None => e,
    };
    let mut u = vec![0.0; nodes];
    let (mut base, mut phi_base) = (0.0_f64, 0.0_f64);
    for &k in &half {
        let target = tau[k].max(0.0);
        let (mut lo, mut hi) = (base, m);
        let mut sig = base;
        let mut val = phi_base;
        for _ in 0..200 {
            if (val - target).abs() <= phi_tol(spec, sig) {
                break;
            }
            if val < target {
                lo = sig;
            } else {
                hi = sig;
            }
            let g = spec.potential(sig);
            let newton = sig + (target - val) * (2.0 * g.max(0.0)).sqrt();
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if next == sig || hi - lo <= 4.0 * f64::EPSILON * m {
                break;
            }
            sig = next;
            val = phi_base + phi_increment(spec, base, sig, &bad).map_err(wrap)?;
        }
        base = sig;
        phi_base = val;
        u[k] = sig;
        u[nodes - 1 - k] = -sig;
    }
    if nodes % 2 == 1 {
        u[nodes / 2] = 0.0;
    }
    for k in 1..nodes {
        if u[k] <= u[k - 1] {
            return Err(Error::Profile(format!("table not increasing at tau = {}", tau[k])));
        }
    }

    let du: Vec<f64> = u.iter().map(|&v| (2.0 * spec.potential(v)).max(0.0).sqrt()).collect();
    let slopes = (0..nodes - 1)
        .map(|k| {
            let delta = (u[k + 1] - u[k]) / step;
            let (a, b) = (du[k] / delta, du[k + 1] / delta);
            let r = a * a + b * b;
            if r > 9.0 {
                let s = 3.0 / r.sqrt();
                (s * du[k], s * du[k + 1])
            } else {
                (du[k], du[k + 1])
            }
        })
        .collect();

    Ok(Profile1D {
        spec: spec.clone(),
        tau_max,
        step,
        tail_amplitude: m - u[nodes - 1],
        decay_rate: c.sqrt(),
        tau,
        u,
        du,
        slopes,
    })
}

impl Profile1D {
    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    pub fn nodes(&self) -> usize {
        self.tau.len()
    }

    pub fn table(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.tau.len()).map(|k| (self.tau[k], self.u[k], self.du[k]))
    }

    fn locate(&self, tau: f64) -> (usize, f64) {
        let x = (tau + self.tau_max) / self.step;
        let k = (x.floor() as usize).min(self.tau.len() - 2);
        (k, x - k as f64)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let m = self.spec.well;
        if tau > self.tau_max {
            return m - self.tail_amplitude * (-self.decay_rate * (tau - self.tau_max)).exp();
        }
        if tau < 0.0 {
            return -self.eval(-tau);
        }
        let (k, t) = self.locate(tau);
        let (d0, d1) = self.slopes[k];
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.u[k] + h10 * self.step * d0 + h01 * self.u[k + 1] + h11 * self.step * d1
    }

    pub fn eval_deriv(&self, tau: f64) -> f64 {
        let a = tau.abs();
        if a > self.tau_max {
            return self.tail_amplitude * self.decay_rate * (-self.decay_rate * (a - self.tau_max)).exp();
        }
        (2.0 * self.spec.potential(self.eval(tau))).max(0.0).sqrt()
    }

    /// Smallest C with du0(tau) <= C exp(-c |tau|) on the table and tail.
    pub fn decay_constant(&self) -> f64 {
        let c = self.decay_rate;
        let core = self
            .tau
            .iter()
            .zip(&self.du)
            .map(|(t, d)| d * (c * t.abs()).exp())
            .fold(0.0, f64::max);
        core.max(self.tail_amplitude * c * (c * self.tau_max).exp())
    }

    pub fn hamiltonian_residual_sup(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.du)
            .map(|(&u, &d)| (0.5 * d * d - self.spec.potential(u)).abs())
            .fold(0.0, f64::max)
    }

    /// sup |-(u_{k+1} - 2u_k + u_{k-1})/dtau^2 - f(u_k)| over interior table nodes.
    pub fn ode_residual_sup(&self) -> f64 {
        let h2 = self.step * self.step;
        (1..self.u.len() - 1)
            .map(|k| {
                let lap = (self.u[k + 1] - 2.0 * self.u[k] + self.u[k - 1]) / h2;
                (lap + self.spec.f(self.u[k])).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn dissipation_integral(&self) -> f64 {
        let top = self.u[self.u.len() - 1];
        let spec = &self.spec;
        let core = integrate(|w| (2.0 * spec.potential(w)).max(0.0).sqrt(), 0.0, top, 1e-14)
            .expect("smooth integrand on a compact interval");
        2.0 * core + self.tail_amplitude.powi(2) * self.decay_rate
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            tau_max: self.tau_max,
            decay_rate: self.decay_rate,
            dissipation_integral: self.dissipation_integral(),
            hamiltonian_residual_sup: self.hamiltonian_residual_sup(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tau,u0,du0")?;
        for (t, u, d) in self.table() {
            writeln!(out, "{t:.16e},{u:.16e},{d:.16e}")?;
        }
        Ok(())
    }
}

/// u0(b.x + c) for a unit vector b.
pub fn eval_1d_family(p: &Profile1D, b: &[f64], c: f64, x: &[f64]) -> Result<f64> {
    if b.len() != x.len() {
        return Err(Error::Domain(format!("direction has {} entries, point has {}", b.len(), x.len())));
    }
    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("|b| = {norm}, expected 1")));
    }
    let arg: f64 = b.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + c;
    Ok(p.eval(arg))
}
