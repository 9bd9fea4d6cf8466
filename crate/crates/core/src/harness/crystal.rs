//! Crystal growth from randomly perturbed square seeds in a supercooled
//! liquid of constant density.

use crate::error::{Error, Result};
use crate::harness::rng::SplitMix64;
use crate::solver::{Simulation, SolverConfig, StartupStrategy, StepRecord};
use crate::spectral::{Field2D, Grid2D};

#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub center: (f64, f64),
    pub side: f64,
    pub amplitude: f64,
}

impl Patch {
    /// Closed square: both coordinates within `side/2` of the center.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let h = 0.5 * self.side;
        (x - self.center.0).abs() <= h && (y - self.center.1).abs() <= h
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NucleationSpec {
    pub mean_density: f64,
    pub patches: Vec<Patch>,
    pub seed: u64,
}

impl NucleationSpec {
    /// Three seeds on `(0, 256)²`.
    pub fn full_scale(seed: u64) -> Self {
        let patch = |cx, cy, a| Patch {
            center: (cx, cy),
            side: 10.0,
            amplitude: a,
        };
        NucleationSpec {
            mean_density: 0.285,
            patches: vec![
                patch(64.0, 196.0, 0.25),
                patch(128.0, 64.0, 0.3),
                patch(196.0, 196.0, 0.35),
            ],
            seed,
        }
    }

    /// The same layout with centers scaled to `(0, 128)²`; sides unchanged.
    pub fn desk_scale(seed: u64) -> Self {
        let mut spec = Self::full_scale(seed);
        for p in &mut spec.patches {
            p.center = (p.center.0 / 2.0, p.center.1 / 2.0);
        }
        spec
    }

    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        for (i, p) in self.patches.iter().enumerate() {
            let h = 0.5 * p.side;
            let inside = p.side > 0.0
                && p.center.0 - h >= 0.0
                && p.center.0 + h <= grid.lx
                && p.center.1 - h >= 0.0
                && p.center.1 + h <= grid.ly;
            if !inside {
                return Err(Error::InvalidArgument(format!(
                    "patch {i} does not fit in the domain"
                )));
            }
            if p.amplitude.is_nan() || p.amplitude < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "patch {i} has negative amplitude"
                )));
            }
        }
        Ok(())
    }

    /// `Φ̄` everywhere plus `A·u` inside each patch, `u` uniform in (−1, 1).
    /// Draws come from one stream, patch by patch in listed order, grid points
    /// in row-major order within a patch.
    pub fn initial_field(&self, grid: Grid2D) -> Result<Field2D> {
        self.validate(&grid)?;
        let mut field = Field2D::constant(grid, self.mean_density);
        let mut rng = SplitMix64::new(self.seed);
        let ny = grid.ny;
        let values = field.values_mut();
        for p in &self.patches {
            for i in 0..grid.nx {
                for j in 0..ny {
                    if p.contains(grid.x(i), grid.y(j)) {
                        values[i * ny + j] += p.amplitude * rng.uniform_pm1();
                    }
                }
            }
        }
        Ok(field)
    }
}

#[derive(Clone, Debug)]
pub struct GrowthSetup {
    pub grid: Grid2D,
    pub config: SolverConfig,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
}

impl GrowthSetup {
    /// 128² on `(0, 128)²`, ε = 0.25, τ = 0.1, T = 100.
    pub fn desk(k: usize) -> Result<Self> {
        Ok(GrowthSetup {
            grid: Grid2D::square(128, 128.0)?,
            config: SolverConfig::new(k, 0.25, 0.1).with_startup(StartupStrategy::Bootstrap),
            t_end: 100.0,
            snapshot_times: vec![1.0, 20.0, 30.0, 40.0, 50.0, 100.0],
        })
    }

    /// 256² on `(0, 256)²`, T = 1000.
    pub fn full(k: usize) -> Result<Self> {
        Ok(GrowthSetup {
            grid: Grid2D::square(256, 256.0)?,
            config: SolverConfig::new(k, 0.25, 0.1).with_startup(StartupStrategy::Bootstrap),
            t_end: 1000.0,
            snapshot_times: vec![1.0, 200.0, 300.0, 400.0, 500.0, 1000.0],
        })
    }

    fn snapshot_steps(&self) -> Vec<usize> {
        self.snapshot_times
            .iter()
            .map(|t| (t / self.config.tau).round() as usize)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct GrowthOutput {
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<(f64, Field2D)>,
    pub final_field: Field2D,
    pub max_volume_drift: f64,
    pub linf_exceeded: bool,
}

/// Runs the growth experiment. `on_snapshot` sees each snapshot as it is
/// taken, including `t = 0` when listed.
pub fn crystal_growth(
    spec: &NucleationSpec,
    setup: &GrowthSetup,
    mut on_snapshot: impl FnMut(f64, &Field2D) -> Result<()>,
) -> Result<GrowthOutput> {
    let phi0 = spec.initial_field(setup.grid)?;
    let wanted = setup.snapshot_steps();
    let mut snapshots = Vec::new();
    if wanted.contains(&0) {
        on_snapshot(0.0, &phi0)?;
        snapshots.push((0.0, phi0.clone()));
    }
    let mut sim = Simulation::start(setup.config.clone(), phi0, None)?;
    for rec in &sim.records()[1..] {
        if wanted.contains(&rec.step) {
            return Err(Error::InvalidArgument(format!(
                "snapshot at t = {} falls inside the start-up levels",
                rec.time
            )));
        }
    }
    sim.run_until(setup.t_end, |rec, phi| {
        if wanted.contains(&rec.step) {
            on_snapshot(rec.time, phi)?;
            snapshots.push((rec.time, phi.clone()));
        }
        Ok(())
    })?;
    Ok(GrowthOutput {
        max_volume_drift: sim.max_volume_drift(),
        linf_exceeded: sim.linf_exceeded(),
        final_field: sim.current().clone(),
        records: sim.records().to_vec(),
        snapshots,
    })
}
