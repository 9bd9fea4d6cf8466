//! Temporal convergence against the manufactured solution
//! `Φ(x, y, t) = cos t · sin(πx/2) sin(πy/2)` on `(0, 8)²`.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::{
    self, chemical_potential, ExactSolution, Forcing, SolverConfig, StartupStrategy,
};
use crate::spectral::{Field2D, Grid2D, SpectralOps};

/// Exact solution and matching source term. The source is built with the
/// discrete spatial operators, so the sampled solution solves the
/// semi-discrete problem exactly and only the temporal error remains.
pub struct ManufacturedSolution {
    ops: SpectralOps,
    epsilon: f64,
    profile: Field2D,
}

impl ManufacturedSolution {
    /// `cos t · sin(πx/2) sin(πy/2)`.
    pub fn new(grid: Grid2D, epsilon: f64) -> Self {
        let profile = Field2D::from_fn(grid, |x, y| (PI * x / 2.0).sin() * (PI * y / 2.0).sin());
        Self::with_profile(grid, epsilon, profile)
    }

    /// `cos t · profile(x, y)`.
    pub fn with_profile(grid: Grid2D, epsilon: f64, profile: Field2D) -> Self {
        ManufacturedSolution {
            ops: SpectralOps::new(grid),
            epsilon,
            profile,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.ops.grid()
    }
}

impl ExactSolution for ManufacturedSolution {
    fn exact(&self, t: f64) -> Field2D {
        self.profile.scale(t.cos())
    }
}

impl Forcing for ManufacturedSolution {
    fn forcing(&self, t: f64) -> Field2D {
        let phi = self.exact(t);
        let lap_mu = self
            .ops
            .laplacian(&chemical_potential(&self.ops, &phi, self.epsilon));
        self.profile.lincomb(-t.sin(), &lap_mu, -1.0)
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceSetup {
    pub grid_points: usize,
    pub length: f64,
    pub epsilon: f64,
    pub t_end: f64,
    pub fp_tol: f64,
    pub dealias: bool,
}

impl Default for ConvergenceSetup {
    fn default() -> Self {
        ConvergenceSetup {
            grid_points: 128,
            length: 8.0,
            epsilon: 0.02,
            t_end: 1.0,
            fp_tol: 1e-12,
            dealias: false,
        }
    }
}

/// One run of the study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub k: usize,
    pub steps: usize,
    pub tau: f64,
    /// Quadrature-weighted `(Σ e² ΔxΔy)^{1/2}`.
    pub error_l2: f64,
    /// Unweighted grid norm `(Σ e²)^{1/2}`.
    pub error_grid: f64,
    /// `log2(e(N/2)/e(N))` against the previous row of the same order.
    pub order: Option<f64>,
}

impl ConvergenceRow {
    pub const CSV_HEADER: &'static str = "k,N,tau,error_l2,error_grid,order";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{}",
            self.k,
            self.steps,
            self.tau,
            self.error_l2,
            self.error_grid,
            self.order.map(|o| format!("{o:.4}")).unwrap_or_default()
        )
    }
}

impl fmt::Display for ConvergenceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = self
            .order
            .map(|o| format!("{o:.2}"))
            .unwrap_or_else(|| "-".into());
        write!(
            f,
            "BDF{}  N={:<5} tau={:.2e}  e_l2={:.3e}  e_grid={:.3e}  order={order}",
            self.k, self.steps, self.tau, self.error_l2, self.error_grid
        )
    }
}

/// Runs BDF-k with `steps` uniform steps to `t_end` from exact starting
/// levels; returns `(weighted L², grid ℓ²)` errors at the final time.
pub fn manufactured_error(setup: &ConvergenceSetup, k: usize, steps: usize) -> Result<(f64, f64)> {
    if steps < k {
        return Err(Error::InvalidArgument(format!(
            "BDF-{k} needs at least {k} steps, got {steps}"
        )));
    }
    let grid = Grid2D::square(setup.grid_points, setup.length)?;
    let exact = std::sync::Arc::new(ManufacturedSolution::new(grid, setup.epsilon));
    let tau = setup.t_end / steps as f64;
    let mut config = SolverConfig::new(k, setup.epsilon, tau)
        .with_startup(StartupStrategy::Exact)
        .with_forcing(exact.clone());
    config.fp_tol = setup.fp_tol;
    config.dealias = setup.dealias;
    let traj = solver::run(config, exact.exact(0.0), Some(exact.as_ref()), setup.t_end)?;
    let err = traj.final_field.sub(&exact.exact(setup.t_end));
    let sq: f64 = err.values().iter().map(|e| e * e).sum();
    Ok(((sq * grid.cell_area()).sqrt(), sq.sqrt()))
}

/// Every `(k, N)` pair, run in parallel; rows sorted by `k` then `N`.
pub fn convergence_study(
    setup: &ConvergenceSetup,
    ks: &[usize],
    ns: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    let mut jobs: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| ns.iter().map(move |&n| (k, n)))
        .collect();
    jobs.sort_unstable();
    jobs.dedup();
    let results: Vec<Result<ConvergenceRow>> = jobs
        .par_iter()
        .map(|&(k, n)| {
            let (error_l2, error_grid) = manufactured_error(setup, k, n)?;
            Ok(ConvergenceRow {
                k,
                steps: n,
                tau: setup.t_end / n as f64,
                error_l2,
                error_grid,
                order: None,
            })
        })
        .collect();
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    for i in 1..rows.len() {
        if rows[i].k == rows[i - 1].k {
            let ratio = rows[i - 1].error_grid / rows[i].error_grid;
            let steps = rows[i].steps as f64 / rows[i - 1].steps as f64;
            rows[i].order = Some(ratio.ln() / steps.ln());
        }
    }
    Ok(rows)
}
