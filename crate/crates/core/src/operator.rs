//! Five-point discretization of -(u_ss + u_tt) - (m-1)(u_s/s + u_t/t) + diag
//! on an arbitrary set of lattice unknowns, stored split by red/black colour.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstOrderScheme {
    /// Central differences while (m-1)h/(2x) <= 1, upwind towards larger x beyond.
    #[default]
    Hybrid,
    /// Central everywhere; assembly fails where that breaks diagonal dominance.
    Central,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Block {
    pub ids: Vec<u32>,
    pub diag: Vec<f64>,
    pub start: Vec<u32>,
    pub cols: Vec<u32>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LatticeOperator {
    pub m: usize,
    pub h: f64,
    pub nodes: Vec<(usize, usize)>,
    pub(crate) color: Vec<u8>,
    pub(crate) local: Vec<u32>,
    pub(crate) blocks: [Block; 2],
    /// Contribution of Dirichlet neighbours, to be added to the right-hand side.
    pub bnd: Vec<f64>,
}

/// Coefficients (towards +1, towards -1) of one direction of the stencil at lattice index k.
fn direction(m: usize, h: f64, k: usize, scheme: FirstOrderScheme) -> Option<(f64, f64)> {
    let h2 = h * h;
    if k == 0 {
        let c = 2.0 * m as f64 / h2;
        return Some((c, 0.0));
    }
    let a = (m as f64 - 1.0) / (2.0 * k as f64);
    if a <= 1.0 {
        Some(((1.0 + a) / h2, (1.0 - a) / h2))
    } else if scheme == FirstOrderScheme::Central {
        None
    } else {
        Some(((1.0 + 2.0 * a) / h2, 1.0 / h2))
    }
}

impl LatticeOperator {
    /// `id(i, j)` gives the unknown number of a lattice point or `None` for Dirichlet points,
    /// whose value is `boundary(i, j)`. Unknowns on s = 0 or t = 0 use even reflection.
    pub fn assemble(
        m: usize,
        h: f64,
        scheme: FirstOrderScheme,
        nodes: Vec<(usize, usize)>,
        id: impl Fn(usize, usize) -> Option<usize>,
        boundary: impl Fn(usize, usize) -> f64,
        diag_extra: impl Fn(usize) -> f64,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut color = vec![0u8; n];
        let mut local = vec![0u32; n];
        let mut counts = [0u32; 2];
        for (g, &(i, j)) in nodes.iter().enumerate() {
            let c = ((i + j) % 2) as u8;
            color[g] = c;
            local[g] = counts[c as usize];
            counts[c as usize] += 1;
        }
        let mut blocks = [Block::default(), Block::default()];
        for b in blocks.iter_mut() {
            b.start.push(0);
        }
        let mut bnd = vec![0.0; n];
        for (g, &(i, j)) in nodes.iter().enumerate() {
            let b = &mut blocks[color[g] as usize];
            let mut diag = diag_extra(g);
            let mut acc = 0.0;
            for axis in 0..2 {
                let k = if axis == 0 { i } else { j };
                let (plus, minus) =
                    direction(m, h, k, scheme).ok_or(Error::NotDiagonallyDominant { i, j })?;
                diag += plus + minus;
                for (step, coef) in [(1isize, plus), (-1, minus)] {
                    if coef == 0.0 {
                        continue;
                    }
                    let (ni, nj) = if axis == 0 {
                        ((i as isize + step) as usize, j)
                    } else {
                        (i, (j as isize + step) as usize)
                    };
                    match id(ni, nj) {
                        Some(q) => {
                            debug_assert_ne!(color[q], color[g]);
                            b.cols.push(local[q]);
                            b.w.push(coef);
                        }
                        None => acc += coef * boundary(ni, nj),
                    }
                }
            }
            bnd[g] = acc;
            b.ids.push(g as u32);
            b.diag.push(diag);
            b.start.push(b.cols.len() as u32);
        }
        Ok(LatticeOperator { m, h, nodes, color, local, blocks, bnd })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_diag(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.diag.iter().copied()).fold(0.0, f64::max)
    }

    pub(crate) fn split(&self, x: &[f64]) -> [Vec<f64>; 2] {
        let mut out = [
            vec![0.0; self.blocks[0].ids.len()],
            vec![0.0; self.blocks[1].ids.len()],
        ];
        for (g, v) in x.iter().enumerate() {
            out[self.color[g] as usize][self.local[g] as usize] = *v;
        }
        out
    }

    pub(crate) fn merge(&self, parts: &[Vec<f64>; 2], x: &mut [f64]) {
        for (c, b) in self.blocks.iter().enumerate() {
            for (l, &g) in b.ids.iter().enumerate() {
                x[g as usize] = parts[c][l];
            }
        }
    }

    /// A x, without the boundary contribution.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let parts = self.split(x);
        let mut out = vec![0.0; x.len()];
        for (c, b) in self.blocks.iter().enumerate() {
            let other = &parts[1 - c];
            for (l, &g) in b.ids.iter().enumerate() {
                let (lo, hi) = (b.start[l] as usize, b.start[l + 1] as usize);
                let off: f64 = (lo..hi).map(|e| b.w[e] * other[b.cols[e] as usize]).sum();
                out[g as usize] = b.diag[l] * parts[c][l] - off;
            }
        }
        out
    }

    /// First row (as lattice node) whose diagonal does not dominate its off-diagonals.
    pub fn dominance_violation(&self) -> Option<(usize, usize)> {
        for b in &self.blocks {
            for (l, &g) in b.ids.iter().enumerate() {
                let (lo, hi) = (b.start[l] as usize, b.start[l + 1] as usize);
                let off: f64 = b.w[lo..hi].iter().sum();
                let neg = b.w[lo..hi].iter().any(|&w| w < 0.0);
                if neg || off > b.diag[l] * (1.0 + 1e-14) {
                    return Some(self.nodes[g as usize]);
                }
            }
        }
        None
    }

    /// Row of the operator as (diag, [(neighbour unknown, coefficient)]) with A = diag - sum.
    pub fn row(&self, g: usize) -> (f64, Vec<(usize, f64)>) {
        let c = self.color[g] as usize;
        let b = &self.blocks[c];
        let l = self.local[g] as usize;
        let other = &self.blocks[1 - c];
        let (lo, hi) = (b.start[l] as usize, b.start[l + 1] as usize);
        let offs = (lo..hi).map(|e| (other.ids[b.cols[e] as usize] as usize, b.w[e])).collect();
        (b.diag[l], offs)
    }
}
