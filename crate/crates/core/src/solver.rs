//! Monotone iteration {-Delta - f'(M)} u_{k+1} = g(u_k) on T_R.

use serde::{Deserialize, Serialize};

use crate::eigen::{disc_region, principal_eigenpair};
use crate::error::{Error, Result};
use crate::field::{ExtendedField, FieldKind, IterRecord, SaddleField};
use crate::grid::{lattice_size, Tag, TriGrid};
use crate::linsolve::{omega_for, sor_solve, LinearTolerance};
use crate::nonlinearity::NonlinearitySpec;
use crate::operator::{FirstOrderScheme, LatticeOperator};
use crate::profile::Profile1D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub k_max: usize,
    pub linear: LinearTolerance,
    pub scheme: FirstOrderScheme,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            k_max: 500,
            linear: LinearTolerance::default(),
            scheme: FirstOrderScheme::Hybrid,
        }
    }
}

/// Unknown numbering of T_R: every node that is not on the cone edge or the outer edge.
pub struct TriSystem {
    pub grid: TriGrid,
    pub op: LatticeOperator,
    pub slot: Vec<Option<usize>>,
}

impl TriSystem {
    pub fn new(
        grid: &TriGrid,
        spec: &NonlinearitySpec,
        scheme: FirstOrderScheme,
        boundary: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut slot = vec![None; grid.len()];
        let mut nodes = Vec::new();
        for (i, j) in grid.nodes() {
            if grid.is_unknown(i, j) {
                slot[grid.index(i, j)] = Some(nodes.len());
                nodes.push((i, j));
            }
        }
        let c = spec.mass();
        let op = LatticeOperator::assemble(
            grid.m,
            grid.h,
            scheme,
            nodes,
            |i, j| if j <= i && i <= grid.n { slot[grid.index(i, j)] } else { None },
            boundary,
            |_| c,
        )?;
        Ok(TriSystem { grid: *grid, op, slot })
    }

    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.op.nodes.iter().map(|&(i, j)| full[self.grid.index(i, j)]).collect()
    }

    pub fn scatter(&self, x: &[f64], full: &mut [f64]) {
        for (g, &(i, j)) in self.op.nodes.iter().enumerate() {
            full[self.grid.index(i, j)] = x[g];
        }
    }
}

/// The operator L = -Delta_h - (m-1)(d_s/s + d_t/t)_h - f'(M) on T_R with zero Dirichlet data.
pub fn discretize(m: usize, r: f64, h: f64, spec: &NonlinearitySpec, scheme: FirstOrderScheme) -> Result<TriSystem> {
    let grid = TriGrid::new(m, r, h)?;
    TriSystem::new(&grid, spec, scheme, |_, _| 0.0)
}

pub fn outer_data<'a>(grid: &TriGrid, profile: &'a Profile1D) -> impl Fn(usize, usize) -> f64 + 'a {
    let grid = *grid;
    move |i, j| {
        if i == j {
            0.0
        } else {
            let (s, t) = grid.coords(i, j);
            profile.eval((s - t) * std::f64::consts::FRAC_1_SQRT_2)
        }
    }
}

/// Iterate 0 of the maximal problem: u0(z) at every node.
pub fn initial_maximal(grid: &TriGrid, profile: &Profile1D) -> Vec<f64> {
    let data = outer_data(grid, profile);
    grid.nodes().map(|(i, j)| data(i, j)).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Down,
    Up,
}

fn run_monotone(
    sys: &TriSystem,
    spec: &NonlinearitySpec,
    x0: Vec<f64>,
    opts: &SolveOptions,
    dir: Direction,
    observer: &mut dyn FnMut(usize, &[f64]),
) -> Result<(Vec<f64>, Vec<IterRecord>, bool)> {
    let omega = omega_for(&sys.op, spec.mass());
    let mut u = x0;
    let mut history = Vec::new();
    let mut rhs = vec![0.0; u.len()];
    for k in 0..opts.k_max {
        for (g, r) in rhs.iter_mut().enumerate() {
            *r = spec.g_unchecked(u[g]) + sys.op.bnd[g];
        }
        let mut next = u.clone();
        let stats = sor_solve(&sys.op, &rhs, &mut next, &opts.linear, omega)?;
        let (mut update, mut wrong) = (0.0f64, f64::NEG_INFINITY);
        for (a, b) in next.iter().zip(&u) {
            let d = a - b;
            update = update.max(d.abs());
            wrong = wrong.max(if dir == Direction::Down { d } else { -d });
        }
        history.push(IterRecord { k: k + 1, update, wrong_way: wrong, residual: stats.rel_residual, sweeps: stats.sweeps });
        observer(k + 1, &next);
        u = next;
        if update <= opts.tol {
            return Ok((u, history, true));
        }
    }
    Ok((u, history, false))
}

pub fn iterate_maximal(
    grid: &TriGrid,
    spec: &NonlinearitySpec,
    profile: &Profile1D,
    opts: &SolveOptions,
) -> Result<SaddleField> {
    iterate_maximal_observed(grid, spec, profile, opts, &mut |_, _| {})
}

/// As `iterate_maximal`, handing every iterate (as a full node vector) to `observer`.
pub fn iterate_maximal_observed(
    grid: &TriGrid,
    spec: &NonlinearitySpec,
    profile: &Profile1D,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(usize, &[f64]),
) -> Result<SaddleField> {
    let sys = TriSystem::new(grid, spec, opts.scheme, outer_data(grid, profile))?;
    let mut full = initial_maximal(grid, profile);
    let x0 = sys.gather(&full);
    let mut buf = full.clone();
    let (x, history, converged) = run_monotone(&sys, spec, x0, opts, Direction::Down, &mut |k, x| {
        sys.scatter(x, &mut buf);
        observer(k, &buf);
    })?;
    sys.scatter(&x, &mut full);
    Ok(SaddleField { grid: *grid, values: full, kind: FieldKind::Maximal, history, converged })
}

#[derive(Debug, Clone)]
pub struct MinimalSolution {
    /// downward limit from the constant supersolution M
    pub field: SaddleField,
    /// upward limit from eps * phi1 on the inscribed disc
    pub upward: SaddleField,
    pub eps: f64,
    pub lambda1: f64,
    pub gap: f64,
    pub gap_ok: bool,
}

/// Disc inside T_R used for the subsolution, with radius 0.9 of the inradius.
pub fn inscribed_disc(grid: &TriGrid) -> (f64, f64, f64) {
    let r = grid.r * (1.0 - std::f64::consts::FRAC_1_SQRT_2);
    (grid.r - r, r, 0.9 * r)
}

/// Largest eps in (0, M) with f(eps)/eps >= lambda.
fn eps_threshold(spec: &NonlinearitySpec, lambda: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, spec.well);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spec.f(mid) / mid >= lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn iterate_minimal(grid: &TriGrid, spec: &NonlinearitySpec, opts: &SolveOptions) -> Result<MinimalSolution> {
    let sys = TriSystem::new(grid, spec, opts.scheme, |_, _| 0.0)?;
    let n = sys.op.len();

    let (down, hist_down, conv_down) = run_monotone(&sys, spec, vec![spec.well; n], opts, Direction::Down, &mut |_, _| {})?;

    let (cs, ct, rho) = inscribed_disc(grid);
    let region: Vec<(usize, usize)> = disc_region(grid.h, cs, ct, rho)
        .into_iter()
        .filter(|&(i, j)| j <= i && i <= grid.n && sys.slot[grid.index(i, j)].is_some())
        .collect();
    let pair = principal_eigenpair(grid.m, grid.h, &region, &vec![0.0; region.len()])?;
    let fp0 = spec.f_prime(0.0);
    if pair.lambda >= fp0 {
        return Err(Error::Domain(format!(
            "principal eigenvalue {:.4} of the inscribed disc is not below f'(0) = {fp0:.4}; increase R",
            pair.lambda
        )));
    }
    let eps = 0.5 * eps_threshold(spec, pair.lambda);
    let mut x0 = vec![0.0; n];
    for (k, &(i, j)) in pair.nodes.iter().enumerate() {
        x0[sys.slot[grid.index(i, j)].unwrap()] = eps * pair.vector[k];
    }
    let (up, hist_up, conv_up) = run_monotone(&sys, spec, x0, opts, Direction::Up, &mut |_, _| {})?;

    let gap = up.iter().zip(&down).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut full_down = vec![0.0; grid.len()];
    let mut full_up = vec![0.0; grid.len()];
    sys.scatter(&down, &mut full_down);
    sys.scatter(&up, &mut full_up);
    Ok(MinimalSolution {
        field: SaddleField { grid: *grid, values: full_down, kind: FieldKind::Minimal, history: hist_down, converged: conv_down },
        upward: SaddleField { grid: *grid, values: full_up, kind: FieldKind::Minimal, history: hist_up, converged: conv_up },
        eps,
        lambda1: pair.lambda,
        gap,
        gap_ok: gap <= 10.0 * grid.h * grid.h,
    })
}

/// Picard iteration on the whole square [0,R]^2 without imposing odd symmetry,
/// with data u0((s-t)/sqrt 2) on s = R and t = R.
pub fn solve_full_square(
    m: usize,
    r: f64,
    h: f64,
    spec: &NonlinearitySpec,
    profile: &Profile1D,
    opts: &SolveOptions,
) -> Result<(ExtendedField, bool)> {
    let n = lattice_size(r, h)?;
    let u0 = |i: usize, j: usize| profile.eval((i as f64 - j as f64) * h * std::f64::consts::FRAC_1_SQRT_2);
    let nodes: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let c = spec.mass();
    let op = LatticeOperator::assemble(
        m,
        h,
        opts.scheme,
        nodes,
        |i, j| (i < n && j < n).then_some(i * n + j),
        u0,
        |_| c,
    )?;
    let omega = omega_for(&op, c);
    let mut u: Vec<f64> = op.nodes.iter().map(|&(i, j)| u0(i, j)).collect();
    let mut rhs = vec![0.0; u.len()];
    let mut converged = false;
    for _ in 0..opts.k_max {
        for (g, rv) in rhs.iter_mut().enumerate() {
            *rv = spec.g_unchecked(u[g]) + op.bnd[g];
        }
        let mut next = u.clone();
        sor_solve(&op, &rhs, &mut next, &opts.linear, omega)?;
        let update = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next;
        if update <= opts.tol {
            converged = true;
            break;
        }
    }
    let field = ExtendedField::from_fn(m, h, n, |i, j| if i < n && j < n { u[i * n + j] } else { u0(i, j) });
    Ok((field, converged))
}

pub fn tag_counts(grid: &TriGrid) -> [usize; 4] {
    let mut c = [0; 4];
    for (i, j) in grid.nodes() {
        c[match grid.tag(i, j) {
            Tag::Interior => 0,
            Tag::ConeEdge => 1,
            Tag::OuterEdge => 2,
            Tag::Axis => 3,
        }] += 1;
    }
    c
}
