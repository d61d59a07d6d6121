//! Fields on T_R and their odd extension to the full square [0,R]^2.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::grid::TriGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Iterate,
    Maximal,
    Minimal,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterRecord {
    pub k: usize,
    /// sup |u_{k+1} - u_k|
    pub update: f64,
    /// sup (u_{k+1} - u_k) for downward runs, sup (u_k - u_{k+1}) for upward ones
    pub wrong_way: f64,
    pub residual: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct SaddleField {
    pub grid: TriGrid,
    pub values: Vec<f64>,
    pub kind: FieldKind,
    pub history: Vec<IterRecord>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldMetadata {
    pub m: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
    pub kind: FieldKind,
    pub iterations: usize,
    pub final_update: f64,
    pub final_residual: f64,
}

impl SaddleField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn metadata(&self) -> FieldMetadata {
        let last = self.history.last();
        FieldMetadata {
            m: self.grid.m,
            r: self.grid.r,
            h: self.grid.h,
            kind: self.kind,
            iterations: self.history.len(),
            final_update: last.map_or(0.0, |r| r.update),
            final_residual: last.map_or(0.0, |r| r.residual),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,t,u")?;
        for (i, j) in self.grid.nodes() {
            let (s, t) = self.grid.coords(i, j);
            writeln!(out, "{s:.16e},{t:.16e},{:.16e}", self.at(i, j))?;
        }
        Ok(())
    }
}

/// Values on the lattice (i, j), 0 <= i, j <= n, of [0,R]^2.
#[derive(Debug, Clone)]
pub struct ExtendedField {
    pub m: usize,
    pub h: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl ExtendedField {
    pub fn from_fn(m: usize, h: f64, n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                values.push(f(i, j));
            }
        }
        ExtendedField { m, h, n, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }

    /// Value with even reflection across s = 0 and t = 0.
    #[inline]
    pub fn at_reflected(&self, i: isize, j: isize) -> f64 {
        self.at(i.unsigned_abs(), j.unsigned_abs())
    }

    pub fn r(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ExtendedField { values: self.values.iter().map(|&v| f(v)).collect(), ..*self }
    }
}

/// u(s,t) = -u(t,s) on the reflected triangle.
pub fn extend_odd(field: &SaddleField) -> ExtendedField {
    let g = &field.grid;
    ExtendedField::from_fn(g.m, g.h, g.n, |i, j| if j <= i { field.at(i, j) } else { -field.at(j, i) })
}
