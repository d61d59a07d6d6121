//! Adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let d = r * XK[i];
        let s = f(c - d) + f(c + d);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Integrate f over [a, b] to absolute tolerance `tol`, always refining the
/// interval with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let (total, err) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.2, acc.1 + p.3));
        if !total.is_finite() || !err.is_finite() {
            let bad = parts.iter().find(|p| !p.2.is_finite() || !p.3.is_finite()).unwrap_or(&parts[0]);
            return Err(Error::Quadrature { a: bad.0, b: bad.1 });
        }
        if err <= tol.max(50.0 * f64::EPSILON * total.abs()) {
            return Ok(total);
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .unwrap();
        let (lo, hi, _, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if parts.len() >= MAX_INTERVALS || mid <= lo || mid >= hi {
            return Err(Error::Quadrature { a: lo, b: hi });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts[worst] = (lo, mid, v1, e1);
        parts.push((mid, hi, v2, e2));
    }
}

/// Integrate over consecutive breakpoints, splitting the tolerance evenly.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<f64> {
    let n = breaks.len().saturating_sub(1).max(1) as f64;
    breaks
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / n))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1e-13).unwrap();
        assert!((v - (255.0 / 8.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_kink() {
        let v = integrate_pieces(|x: f64| x.abs().sqrt(), &[-1.0, 0.0, 1.0], 1e-10).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn nonfinite_is_error() {
        assert!(integrate(|x| 1.0 / x, 0.0, 1.0, 1e-10).is_err());
    }
}
