//! Second variation Q_v(xi) = int (y^2 - z^2)^{m-1} {xi_y^2 + xi_z^2 - f'(v) xi^2} dy dz
//! (c_m = 1), the destabilising family xi_a = eta(y/a) v_z, and Hardy margins.

use std::f64::consts::FRAC_1_SQRT_2;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ExtendedField;
use crate::nonlinearity::NonlinearitySpec;
use crate::profile::Profile1D;
use crate::quadrature::integrate_pieces;

pub use crate::eigen::{disc_region, principal_eigenpair, Eigenpair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaParams {
    pub rho1: f64,
    pub rho2: f64,
    pub alpha: f64,
}

impl Default for EtaParams {
    fn default() -> Self {
        EtaParams { rho1: 0.1, rho2: 10.0, alpha: 1.75 }
    }
}

impl EtaParams {
    pub fn new(rho1: f64, rho2: f64, alpha: f64) -> Result<Self> {
        if !(rho1 > 0.0 && 2.0 * rho1 < 1.0 && rho2 > 1.0 && rho2.is_finite()) {
            return Err(Error::Domain(format!("need 0 < 2 rho1 < 1 < rho2, got rho1 = {rho1}, rho2 = {rho2}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("need alpha > 0, got {alpha}")));
        }
        Ok(EtaParams { rho1, rho2, alpha })
    }

    /// The range 3/2 < alpha < 2 that makes the m = 3 integral negative for small rho1, large rho2.
    pub fn in_negative_range(&self) -> bool {
        self.alpha > 1.5 && self.alpha < 2.0
    }

    pub fn value(&self, rho: f64) -> f64 {
        let EtaParams { rho1, rho2, alpha } = *self;
        let c = rho2.powf(-alpha);
        if rho < rho1 || rho > rho2 {
            0.0
        } else if rho <= 2.0 * rho1 {
            (1.0 - c) * (rho - rho1) / rho1
        } else if rho <= 1.0 {
            1.0 - c
        } else {
            rho.powf(-alpha) - c
        }
    }

    /// One-sided (from the right) derivative at the kinks.
    pub fn deriv(&self, rho: f64) -> f64 {
        let EtaParams { rho1, rho2, alpha } = *self;
        if rho < rho1 || rho >= rho2 {
            0.0
        } else if rho < 2.0 * rho1 {
            (1.0 - rho2.powf(-alpha)) / rho1
        } else if rho < 1.0 {
            0.0
        } else {
            -alpha * rho.powf(-alpha - 1.0)
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        vec![self.rho1, 2.0 * self.rho1, 1.0, self.rho2]
    }
}

pub fn eta_cutoff(rho: f64, rho1: f64, rho2: f64, alpha: f64) -> Result<f64> {
    Ok(EtaParams::new(rho1, rho2, alpha)?.value(rho))
}

/// A Lipschitz radial cutoff with compact support in (0, inf), smooth between breakpoints.
pub trait Radial: Sync {
    fn value(&self, rho: f64) -> f64;
    fn deriv(&self, rho: f64) -> f64;
    fn breakpoints(&self) -> Vec<f64>;
}

impl Radial for EtaParams {
    fn value(&self, rho: f64) -> f64 {
        EtaParams::value(self, rho)
    }
    fn deriv(&self, rho: f64) -> f64 {
        EtaParams::deriv(self, rho)
    }
    fn breakpoints(&self) -> Vec<f64> {
        EtaParams::breakpoints(self)
    }
}

/// int rho^{2(m-1)} (eta'^2 - 2(m-1) eta^2 / rho^2) d rho.
pub fn rho_integral(m: usize, eta: &dyn Radial, tol: f64) -> Result<f64> {
    let k = (m as f64) - 1.0;
    let mut b = eta.breakpoints();
    b.sort_by(f64::total_cmp);
    b.dedup();
    if b.len() < 2 || !(b[0] > 0.0) {
        return Err(Error::Domain("eta needs at least two breakpoints with support in (0, inf)".into()));
    }
    integrate_pieces(
        |r| {
            let (e, d) = (eta.value(r), eta.deriv(r));
            r.powf(2.0 * k) * (d * d - 2.0 * k * e * e / (r * r))
        },
        &b,
        tol,
    )
}

/// Minimum of rho_integral over a steps^3 grid of the box rho1 in [0.005, 0.1] (log),
/// rho2 in [10, 200] (log), alpha in [1.1, 1.9].
pub fn rho_integral_search(m: usize, steps: usize) -> Result<(f64, EtaParams)> {
    if steps < 2 {
        return Err(Error::Domain("rho_integral_search needs at least 2 steps per axis".into()));
    }
    let lerp = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (steps - 1) as f64;
    let geo = |lo: f64, hi: f64, k: usize| lerp(lo.ln(), hi.ln(), k).exp();
    let params: Vec<EtaParams> = (0..steps.pow(3))
        .map(|k| (k / (steps * steps), (k / steps) % steps, k % steps))
        .map(|(a, b, c)| EtaParams::new(geo(0.005, 0.1, a), geo(10.0, 200.0, b), lerp(1.1, 1.9, c)))
        .collect::<Result<_>>()?;
    let vals = params
        .par_iter()
        .map(|e| rho_integral(m, e, 1e-10).map(|v| (v, *e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().fold((f64::INFINITY, params[0]), |x, y| if y.0 < x.0 { y } else { x }))
}

/// (2m - 3)^2/4 - 2(m - 1), exactly.
pub fn hardy_margin(m: usize) -> Ratio<i64> {
    let m = m as i64;
    Ratio::new((2 * m - 3).pow(2), 4) - Ratio::from_integer(2 * (m - 1))
}

pub fn hardy_margin_f64(m: usize) -> f64 {
    let r = hardy_margin(m);
    *r.numer() as f64 / *r.denom() as f64
}

/// Smooth bump in y and z: exp(-d^2/2 sigma^2) (1 - (d/4 sigma)^2)^3 inside 4 sigma, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub yc: f64,
    pub zc: f64,
    pub sy: f64,
    pub sz: f64,
}

fn bump1(d: f64, sigma: f64) -> f64 {
    let r = d / (4.0 * sigma);
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-0.5 * (d / sigma).powi(2)).exp() * (1.0 - r * r).powi(3)
    }
}

impl Bump {
    pub fn value(&self, y: f64, z: f64) -> f64 {
        bump1(y - self.yc, self.sy) * bump1(z - self.zc, self.sz)
    }

    /// Largest s or t reached by the support.
    pub fn reach(&self) -> f64 {
        (self.yc + 4.0 * self.sy + self.zc.abs() + 4.0 * self.sz) * FRAC_1_SQRT_2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// xi = eta(y/a) v_z, cut off where |z| > z_cut
    EtaUz { a: f64, eta: EtaParams, z_cut: f64 },
    /// xi = z B(y, z)
    ConeVanishing(Bump),
    /// values on the (n+1)^2 lattice of [0,R]^2
    Explicit(Vec<f64>),
}

/// Nodal central differences of v in s and t (zero across the axes by even reflection).
fn nodal_gradient(v: &ExtendedField) -> (Vec<f64>, Vec<f64>) {
    let (n, h) = (v.n, v.h);
    let w = n + 1;
    let mut us = vec![0.0; w * w];
    let mut ut = vec![0.0; w * w];
    for i in 0..=n {
        for j in 0..=n {
            let k = i * w + j;
            us[k] = if i == 0 {
                0.0
            } else if i == n {
                (v.at(i, j) - v.at(i - 1, j)) / h
            } else {
                (v.at(i + 1, j) - v.at(i - 1, j)) / (2.0 * h)
            };
            ut[k] = if j == 0 {
                0.0
            } else if j == n {
                (v.at(i, j) - v.at(i, j - 1)) / h
            } else {
                (v.at(i, j + 1) - v.at(i, j - 1)) / (2.0 * h)
            };
        }
    }
    (us, ut)
}

fn support_error(needed_st: f64, v: &ExtendedField) -> Error {
    Error::SupportTooLarge {
        needed: needed_st,
        available: v.r() - v.h,
        required_r: needed_st + 2.0 * v.h,
    }
}

/// Lattice values of a test function; fails if the support reaches the last two lattice lines.
pub fn test_values(v: &ExtendedField, xi: &TestFunction) -> Result<Vec<f64>> {
    let (n, h) = (v.n, v.h);
    let w = n + 1;
    match xi {
        TestFunction::Explicit(vals) => {
            if vals.len() != w * w {
                return Err(Error::Domain(format!("explicit test function has {} values, grid has {}", vals.len(), w * w)));
            }
            Ok(vals.clone())
        }
        TestFunction::EtaUz { a, eta, z_cut } => {
            let reach = (a * eta.rho2 + z_cut) * FRAC_1_SQRT_2;
            if reach > v.r() - 2.0 * h {
                return Err(support_error(reach, v));
            }
            let (us, ut) = nodal_gradient(v);
            let mut out = vec![0.0; w * w];
            for i in 0..=n {
                for j in 0..=n {
                    let (s, t) = (i as f64 * h, j as f64 * h);
                    let (y, z) = ((s + t) * FRAC_1_SQRT_2, (s - t) * FRAC_1_SQRT_2);
                    if z.abs() > *z_cut {
                        continue;
                    }
                    let k = i * w + j;
                    out[k] = eta.value(y / a) * (us[k] - ut[k]) * FRAC_1_SQRT_2;
                }
            }
            Ok(out)
        }
        TestFunction::ConeVanishing(b) => {
            if b.reach() > v.r() - 2.0 * h {
                return Err(support_error(b.reach(), v));
            }
            Ok((0..w * w)
                .map(|k| {
                    let (s, t) = ((k / w) as f64 * h, (k % w) as f64 * h);
                    let (y, z) = ((s + t) * FRAC_1_SQRT_2, (s - t) * FRAC_1_SQRT_2);
                    z * b.value(y, z)
                })
                .collect())
        }
    }
}

/// Cell-centred quadrature of the second variation for lattice values xi.
pub fn quadratic_form_values(v: &ExtendedField, spec: &NonlinearitySpec, xi: &[f64]) -> f64 {
    let (n, h, m) = (v.n, v.h, v.m as i32);
    let w = n + 1;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                let (k00, k10, k01, k11) = (i * w + j, (i + 1) * w + j, i * w + j + 1, (i + 1) * w + j + 1);
                let (a, b, c, d) = (xi[k00], xi[k10], xi[k01], xi[k11]);
                if a == 0.0 && b == 0.0 && c == 0.0 && d == 0.0 {
                    continue;
                }
                let xs = 0.5 * ((b - a) + (d - c)) / h;
                let xt = 0.5 * ((c - a) + (d - b)) / h;
                let xc = 0.25 * (a + b + c + d);
                let vc = 0.25 * (v.values[k00] + v.values[k10] + v.values[k01] + v.values[k11]);
                let pot = spec.f_prime(vc);
                let (s, t) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                acc += (2.0 * s * t).powi(m - 1) * (xs * xs + xt * xt - pot * xc * xc);
            }
            acc
        })
        .sum::<f64>()
        * h
        * h
}

pub fn quadratic_form(v: &ExtendedField, spec: &NonlinearitySpec, xi: &TestFunction) -> Result<f64> {
    Ok(quadratic_form_values(v, spec, &test_values(v, xi)?))
}

/// Q(xi_a)/a^{2m-3} through the identity obtained by differentiating the equation in z,
/// which needs only first derivatives of v (integrand written in rho = y/a).
pub fn identity_form(v: &ExtendedField, a: f64, eta: &EtaParams, z_cut: f64) -> Result<f64> {
    let (n, h, m) = (v.n, v.h, v.m as f64);
    let reach = (a * eta.rho2 + z_cut) * FRAC_1_SQRT_2;
    if reach > v.r() - 2.0 * h {
        return Err(support_error(reach, v));
    }
    let (us, ut) = nodal_gradient(v);
    let w = n + 1;
    let k1 = m - 1.0;
    let total: f64 = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..=n {
                let (s, t) = (i as f64 * h, j as f64 * h);
                let (y, z) = ((s + t) * FRAC_1_SQRT_2, (s - t) * FRAC_1_SQRT_2);
                let rho = y / a;
                if !(z.abs() < y) || z.abs() > z_cut || rho < eta.rho1 || rho > eta.rho2 {
                    continue;
                }
                let k = i * w + j;
                let vz = (us[k] - ut[k]) * FRAC_1_SQRT_2;
                let vy = (us[k] + ut[k]) * FRAC_1_SQRT_2;
                let e = eta.value(rho);
                let de = eta.deriv(rho);
                let q = z * z / (a * a * rho * rho);
                let om = 1.0 - q;
                acc += rho.powf(2.0 * k1)
                    * om.powf(k1)
                    * (de * de * vz * vz
                        - e * e
                            * (2.0 * k1 * (1.0 + q) / (rho * rho * om * om) * vz * vz
                                - 4.0 * k1 * z / (a * rho.powi(3) * om * om) * vy * vz));
            }
            acc
        })
        .sum();
    Ok(total * h * h / a)
}

/// |z| beyond which du0 < 1e-10, used to truncate xi_a.
pub fn default_z_cut(profile: &Profile1D) -> f64 {
    (profile.decay_constant() / 1e-10).ln() / profile.decay_rate
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    UnstableDemonstrated,
    AsymptoticallyStableMargin,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub m: usize,
    pub q_values: Vec<[f64; 2]>,
    pub rho_integral: f64,
    pub prefactor: f64,
    pub limit_rhs: f64,
    pub hardy_margin: f64,
    pub verdict: Verdict,
    /// direct cell-centred quadrature of Q(xi_a)/a^{2m-3}, for comparison
    #[serde(skip)]
    pub direct_q_values: Vec<[f64; 2]>,
    /// m = 3: whether the largest a is closer to the limit than the smallest
    #[serde(skip)]
    pub trend_toward_limit: Option<bool>,
}

pub fn verdict(q_values: &[[f64; 2]], hardy: f64) -> Verdict {
    if q_values.iter().any(|q| q[1] < 0.0) {
        Verdict::UnstableDemonstrated
    } else if hardy > 0.0 {
        Verdict::AsymptoticallyStableMargin
    } else {
        Verdict::Inconclusive
    }
}

pub fn instability_scan(
    v: &ExtendedField,
    spec: &NonlinearitySpec,
    profile: &Profile1D,
    a_list: &[f64],
    eta: &EtaParams,
) -> Result<StabilityReport> {
    let m = v.m;
    let z_cut = default_z_cut(profile);
    let p = 2 * m as i32 - 3;
    let mut q_values = Vec::new();
    let mut direct = Vec::new();
    for &a in a_list {
        q_values.push([a, identity_form(v, a, eta, z_cut)?]);
        let xi = TestFunction::EtaUz { a, eta: *eta, z_cut };
        direct.push([a, quadratic_form(v, spec, &xi)? / a.powi(p)]);
    }
    let prefactor = profile.dissipation_integral();
    let rho = rho_integral(m, eta, 1e-12)?;
    let limit = prefactor * rho;
    let hardy = hardy_margin_f64(m);
    let trend = (m == 3 && q_values.len() >= 2).then(|| {
        let by_a = |pick: fn(f64, f64) -> bool| {
            q_values.iter().copied().reduce(|x, y| if pick(y[0], x[0]) { y } else { x }).unwrap()
        };
        let (lo, hi) = (by_a(|a, b| a < b), by_a(|a, b| a > b));
        (hi[1] - limit).abs() < (lo[1] - limit).abs()
    });
    Ok(StabilityReport {
        m,
        verdict: verdict(&q_values, hardy),
        q_values,
        rho_integral: rho,
        prefactor,
        limit_rhs: limit,
        hardy_margin: hardy,
        direct_q_values: direct,
        trend_toward_limit: trend,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeVanishingResult {
    pub min_q: f64,
    pub bumps: Vec<Bump>,
    pub values: Vec<f64>,
}

/// Random bumps with y-centre in [1, y_max], z-centre in [-2, 2], widths in [0.4, 2.5] x [0.3, 1.5].
pub fn random_bump(rng: &mut impl Rng, r: f64, h: f64) -> Bump {
    loop {
        let sy = rng.gen_range(0.4..2.5);
        let sz = rng.gen_range(0.3..1.5);
        let y_max = (r - 2.0 * h) * std::f64::consts::SQRT_2;
        let b = Bump { yc: rng.gen_range(1.0..y_max.max(1.5)), zc: rng.gen_range(-2.0..2.0), sy, sz };
        if b.reach() <= r - 2.0 * h {
            return b;
        }
    }
}

pub fn cone_vanishing_stability(
    v: &ExtendedField,
    spec: &NonlinearitySpec,
    trials: usize,
    seed: u64,
) -> Result<ConeVanishingResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_reach = (1.0 + 4.0 * 0.4 + 4.0 * 0.3) * FRAC_1_SQRT_2;
    if v.r() - 2.0 * v.h < min_reach + 1.0 {
        return Err(support_error(min_reach + 1.0, v));
    }
    let bumps: Vec<Bump> = (0..trials).map(|_| random_bump(&mut rng, v.r(), v.h)).collect();
    let values = bumps
        .iter()
        .map(|b| quadratic_form(v, spec, &TestFunction::ConeVanishing(*b)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConeVanishingResult { min_q: values.iter().copied().fold(f64::INFINITY, f64::min), bumps, values })
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub test_function: TestFunction,
    pub a: f64,
    /// Q(xi_a)/a^{2m-3} through the identity form
    pub q_scaled: f64,
    /// Q(xi_a) by direct quadrature
    pub q_direct: f64,
}

/// Scale factor 2^k between consecutive members so that the y-supports are disjoint.
pub fn family_ratio(eta: &EtaParams) -> f64 {
    let mut k = 2.0;
    while k * eta.rho1 <= eta.rho2 * (1.0 + 1e-9) {
        k *= 2.0;
    }
    k
}

/// `count` functions xi_{a_i}, a_i = a0 k^i, with disjoint supports and Q < 0 each (m = 3).
pub fn disjoint_instability_family(
    v: &ExtendedField,
    spec: &NonlinearitySpec,
    profile: &Profile1D,
    count: usize,
    a0: f64,
    eta: &EtaParams,
) -> Result<Vec<FamilyMember>> {
    if v.m != 3 {
        return Err(Error::Domain(format!("the family is defined for m = 3, got m = {}", v.m)));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let z_cut = default_z_cut(profile);
    let k = family_ratio(eta);
    let a_last = a0 * k.powi(count as i32 - 1);
    let reach = (a_last * eta.rho2 + z_cut) * FRAC_1_SQRT_2;
    if reach > v.r() - 2.0 * v.h {
        return Err(support_error(reach, v));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let a = a0 * k.powi(i as i32);
        let xi = TestFunction::EtaUz { a, eta: *eta, z_cut };
        let q_scaled = identity_form(v, a, eta, z_cut)?;
        let q_direct = quadratic_form(v, spec, &xi)?;
        if !(q_scaled < 0.0 && q_direct < 0.0) {
            return Err(Error::NoNegativeDirection { a, q: q_scaled.max(q_direct) });
        }
        out.push(FamilyMember { test_function: xi, a, q_scaled, q_direct });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_pieces() {
        let e = EtaParams::new(0.1, 10.0, 1.75).unwrap();
        let c = 10f64.powf(-1.75);
        assert!((e.value(1.0) - (1.0 - c)).abs() < 1e-15);
        assert_eq!(e.value(10.0), 0.0);
        assert_eq!(e.value(0.1), 0.0);
        assert!((e.value(0.2) - (1.0 - c)).abs() < 1e-15);
        assert!(EtaParams::new(0.6, 10.0, 1.75).is_err());
        assert!(EtaParams::new(0.1, 0.9, 1.75).is_err());
        assert!(EtaParams::new(0.1, 10.0, -1.0).is_err());
        assert!(e.in_negative_range());
    }

    #[test]
    fn hardy_exact() {
        assert_eq!(hardy_margin(2), Ratio::new(-7, 4));
        assert_eq!(hardy_margin(3), Ratio::new(-7, 4));
        assert_eq!(hardy_margin(4), Ratio::new(1, 4));
        assert_eq!(hardy_margin(5), Ratio::new(17, 4));
    }

    #[test]
    fn family_spacing() {
        assert_eq!(family_ratio(&EtaParams::default()), 128.0);
    }
}
