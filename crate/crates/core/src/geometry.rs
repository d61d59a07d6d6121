//! Coordinates relative to the Simons cone {|x1| = |x2|} in R^m x R^m.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeCoords {
    pub m: usize,
    pub s: f64,
    pub t: f64,
    pub y: f64,
    pub z: f64,
}

impl ConeCoords {
    pub fn from_st(m: usize, s: f64, t: f64) -> Self {
        let (y, z) = st_to_yz(s, t);
        ConeCoords { m, s, t, y, z }
    }

    pub fn from_yz(m: usize, y: f64, z: f64) -> Self {
        let (s, t) = yz_to_st(y, z);
        ConeCoords { m, s, t, y, z }
    }
}

#[inline]
pub fn st_to_yz(s: f64, t: f64) -> (f64, f64) {
    ((s + t) * FRAC_1_SQRT_2, (s - t) * FRAC_1_SQRT_2)
}

#[inline]
pub fn yz_to_st(y: f64, z: f64) -> (f64, f64) {
    ((y + z) * FRAC_1_SQRT_2, (y - z) * FRAC_1_SQRT_2)
}

fn check_dim(m: usize, x: &[f64]) -> Result<()> {
    if m == 0 || x.len() != 2 * m {
        return Err(Error::Geometry(format!("point has {} coordinates, expected 2m = {}", x.len(), 2 * m)));
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn to_cone_coords(m: usize, x: &[f64]) -> Result<ConeCoords> {
    check_dim(m, x)?;
    Ok(ConeCoords::from_st(m, norm(&x[..m]), norm(&x[m..])))
}

pub fn dist_to_cone(c: &ConeCoords) -> f64 {
    (c.s - c.t).abs() * FRAC_1_SQRT_2
}

/// x0 = (alpha x1, beta x2) with alpha s = beta t = (s + t)/2.
pub fn foot_point(m: usize, x: &[f64]) -> Result<Vec<f64>> {
    let c = to_cone_coords(m, x)?;
    if c.s == 0.0 || c.t == 0.0 {
        return Err(Error::Geometry("foot point undefined when s = 0 or t = 0".into()));
    }
    let r = 0.5 * (c.s + c.t);
    let (alpha, beta) = (r / c.s, r / c.t);
    Ok(x[..m].iter().map(|v| alpha * v).chain(x[m..].iter().map(|v| beta * v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let c = to_cone_coords(2, &[3.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!((c.s, c.t), (3.0, 1.0));
        assert!((c.y - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((c.z - 2f64.sqrt()).abs() < 1e-15);
        assert!((dist_to_cone(&c) - 2f64.sqrt()).abs() < 1e-15);
        let x0 = foot_point(2, &[3.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(x0, vec![2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(to_cone_coords(2, &[1.0, 2.0, 3.0]).is_err());
        assert!(foot_point(2, &[1.0, 0.0, 0.0, 0.0]).is_err());
        let o = to_cone_coords(2, &[0.0; 4]).unwrap();
        assert_eq!((o.s, o.t, o.y, o.z), (0.0, 0.0, 0.0, 0.0));
        let d = to_cone_coords(1, &[0.7, 0.7]).unwrap();
        assert_eq!(d.z, 0.0);
    }
}
