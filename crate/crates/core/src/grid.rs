//! The triangle T_R = {0 <= t <= s <= R} on a uniform lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Interior,
    ConeEdge,
    OuterEdge,
    Axis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriGrid {
    pub m: usize,
    pub r: f64,
    pub h: f64,
    pub n: usize,
}

/// R/h as an integer, or an error if h does not divide R.
pub fn lattice_size(r: f64, h: f64) -> Result<usize> {
    if !(r > 0.0 && h > 0.0 && r.is_finite() && h.is_finite()) {
        return Err(Error::Grid(format!("R = {r} and h = {h} must be positive")));
    }
    let q = r / h;
    let n = q.round();
    if (q - n).abs() > 1e-9 * q.max(1.0) {
        return Err(Error::Grid(format!("h = {h} does not divide R = {r}")));
    }
    Ok(n as usize)
}

impl TriGrid {
    pub fn new(m: usize, r: f64, h: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Grid("m must be at least 1".into()));
        }
        let n = lattice_size(r, h)?;
        if n < 8 {
            return Err(Error::Grid(format!("R/h = {n} is below the minimum of 8")));
        }
        Ok(TriGrid { m, r, h, n })
    }

    pub fn len(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i <= self.n);
        i * (i + 1) / 2 + j
    }

    /// Corner (R,R) and the origin are tagged as cone edge.
    pub fn tag(&self, i: usize, j: usize) -> Tag {
        if j == i {
            Tag::ConeEdge
        } else if i == self.n {
            Tag::OuterEdge
        } else if j == 0 {
            Tag::Axis
        } else {
            Tag::Interior
        }
    }

    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h, j as f64 * self.h)
    }

    /// All (i, j), row-major by i then j.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.n).flat_map(|i| (0..=i).map(move |j| (i, j)))
    }

    pub fn is_unknown(&self, i: usize, j: usize) -> bool {
        matches!(self.tag(i, j), Tag::Interior | Tag::Axis)
    }
}
