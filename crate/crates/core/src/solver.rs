//! Implicit BDF-k scheme for the PFC equation
//!
//! ```text
//! (1/τ) Σ_{j=1}^{n} b_{n−j} ∇_τφ^j = Δμ^n + g^n,   μ^n = (1+Δ)²φ^n + (φ^n)³ − εφ^n,
//! ```
//!
//! solved at each level by a fixed-point iteration in which every linear term
//! is implicit and diagonal in Fourier space and only the cubic is lagged:
//!
//! ```text
//! [b_0/τ + |κ|²((1−|κ|²)² − ε)] φ̂^(s+1) = b_0/τ φ̂^{n−1} − (1/τ) Ĥ − |κ|² (φ^(s))³^ + ĝ^n
//! ```
//!
//! where `H = Σ_{m=1}^{k−1} b_m ∇_τφ^{n−m}` collects the history.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gradient_structure::{self, GradientStructure};
use crate::kernels::{bdf_kernels, rational_to_f64};
use crate::spectral::{dot, Field2D, SpectralOps, Spectrum2D, MEAN_ZERO_TOL};

/// Source term `g(x, t)` added to the right-hand side.
pub trait Forcing: Send + Sync {
    fn forcing(&self, t: f64) -> Field2D;
}

/// Closed-form solution used by the `exact` start-up strategy.
pub trait ExactSolution: Send + Sync {
    fn exact(&self, t: f64) -> Field2D;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartupStrategy {
    /// Sample a supplied closed-form solution at `t_1..t_{k−1}`.
    Exact,
    /// Backward Euler with substep `τ·τ^{k/2}`, sampled at the coarse levels.
    Bootstrap,
}

impl std::str::FromStr for StartupStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(StartupStrategy::Exact),
            "bootstrap" => Ok(StartupStrategy::Bootstrap),
            _ => Err(Error::InvalidArgument(format!(
                "unknown start-up strategy `{s}`"
            ))),
        }
    }
}

#[derive(Clone)]
pub struct SolverConfig {
    pub k: usize,
    pub epsilon: f64,
    pub tau: f64,
    /// Fixed-point stop: max-norm of the update.
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub startup: StartupStrategy,
    /// 2/3-rule truncation of the cubic term.
    pub dealias: bool,
    /// Turn a violated energy-stability time-step restriction into an error.
    pub strict: bool,
    pub bootstrap_max_substeps: usize,
    pub forcing: Option<Arc<dyn Forcing>>,
}

impl std::fmt::Debug for SolverConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverConfig")
            .field("k", &self.k)
            .field("epsilon", &self.epsilon)
            .field("tau", &self.tau)
            .field("fp_tol", &self.fp_tol)
            .field("fp_max_iters", &self.fp_max_iters)
            .field("startup", &self.startup)
            .field("dealias", &self.dealias)
            .field("strict", &self.strict)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl SolverConfig {
    pub fn new(k: usize, epsilon: f64, tau: f64) -> Self {
        SolverConfig {
            k,
            epsilon,
            tau,
            fp_tol: 1e-12,
            fp_max_iters: 200,
            startup: StartupStrategy::Bootstrap,
            dealias: false,
            strict: false,
            bootstrap_max_substeps: 10_000,
            forcing: None,
        }
    }

    pub fn with_startup(mut self, startup: StartupStrategy) -> Self {
        self.startup = startup;
        self
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Largest step allowed by `τ ≤ (2/(3ε))·min{b_0, σ_Lk}`; only the
    /// solvability part `b_0` applies for orders without a gradient structure.
    pub fn step_limit(&self) -> Result<f64> {
        let b0 = rational_to_f64(&bdf_kernels(self.k)?.b0());
        let cap = match gradient_structure::structure(self.k) {
            Ok(s) => b0.min(s.sigma_f64()),
            Err(_) => b0,
        };
        Ok(2.0 / (3.0 * self.epsilon) * cap)
    }

    pub fn validate(&self) -> Result<()> {
        bdf_kernels(self.k)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {}",
                self.tau
            )));
        }
        if self.fp_tol.is_nan() || self.fp_tol <= 0.0 || self.fp_max_iters == 0 {
            return Err(Error::InvalidArgument(
                "fixed-point tolerance and iteration cap must be positive".into(),
            ));
        }
        let limit = self.step_limit()?;
        if self.tau > limit {
            if self.strict {
                return Err(Error::TimeStepRestriction {
                    tau: self.tau,
                    limit,
                });
            }
            log::warn!(
                "time step {} exceeds the energy-stability restriction {limit:.6}; the energy law is not guaranteed",
                self.tau
            );
        }
        Ok(())
    }
}

/// `μ = (1+Δ)²φ + φ³ − εφ`.
pub fn chemical_potential(ops: &SpectralOps, phi: &Field2D, epsilon: f64) -> Field2D {
    let mut mu = ops.one_plus_lap_sq(phi);
    for (m, &p) in mu.values_mut().iter_mut().zip(phi.values()) {
        *m += p * p * p - epsilon * p;
    }
    mu
}

/// `E[φ] = ½‖(1+Δ)φ‖² + ¼‖φ² − ε‖² − ¼ε²|Ω|`.
pub fn energy(ops: &SpectralOps, phi: &Field2D, epsilon: f64) -> f64 {
    let lin = ops.one_plus_lap(phi);
    let quartic = phi.map(|p| p * p - epsilon);
    0.5 * dot(&lin, &lin) + 0.25 * dot(&quartic, &quartic)
        - 0.25 * epsilon * epsilon * phi.grid().area()
}

/// `⟨φ, 1⟩`.
pub fn volume(phi: &Field2D) -> f64 {
    phi.grid().cell_area() * phi.sum()
}

/// `−‖∇μ‖²`.
pub fn dissipation_rate(ops: &SpectralOps, mu: &Field2D) -> f64 {
    -ops.gradient_norm_sq(mu)
}

/// `E[φ^n] + (1/τ) Q`, with `Q` the functional `G_k` evaluated on the level
/// differences with every square taken in the H⁻¹ norm. `levels` holds the
/// most recent levels, oldest first; missing history counts as zero.
pub fn modified_energy(
    ops: &SpectralOps,
    structure: &GradientStructure,
    levels: &[Field2D],
    tau: f64,
    epsilon: f64,
) -> Result<f64> {
    let newest = levels
        .last()
        .ok_or_else(|| Error::InvalidArgument("modified energy needs at least one level".into()))?;
    let depth = structure.g.depth();
    let scale = newest.rms();
    let mut diffs = Vec::with_capacity(depth + 1);
    for lag in 0..=depth {
        if levels.len() < lag + 2 {
            diffs.push(None);
            continue;
        }
        let hi = &levels[levels.len() - 1 - lag];
        let lo = &levels[levels.len() - 2 - lag];
        let d = hi.sub(lo);
        let (mean, rms) = (d.mean(), d.rms());
        if mean.abs() > MEAN_ZERO_TOL * rms.max(scale) {
            return Err(Error::NotMeanZero { mean, rms });
        }
        diffs.push(Some(ops.forward(&d)));
    }
    let mut q = 0.0;
    for term in &structure.g.terms {
        let mut combo: Option<Spectrum2D> = None;
        for (lag, c) in term.stencil.to_f64().into_iter().enumerate() {
            let Some(d) = &diffs[lag] else { continue };
            if c != 0.0 {
                combo
                    .get_or_insert_with(|| Spectrum2D::zeros(*newest.grid()))
                    .axpy(c, d);
            }
        }
        if let Some(s) = combo {
            q += gradient_structure::q_to_f64(&term.weight) * ops.norm_hm1_sq_spectrum(&s);
        }
    }
    Ok(energy(ops, newest, epsilon) + q / tau)
}

/// Diagonal implicit solver for one fixed BDF formula and step size.
#[derive(Clone, Debug)]
pub(crate) struct Stepper {
    b: Vec<f64>,
    tau: f64,
    epsilon: f64,
    symbol: Vec<f64>,
    cubic: bool,
}

impl Stepper {
    pub(crate) fn new(ops: &SpectralOps, b: Vec<f64>, tau: f64, epsilon: f64) -> Result<Self> {
        let b0_tau = b[0] / tau;
        let symbol: Vec<f64> = ops
            .k2()
            .iter()
            .map(|&k2| b0_tau + k2 * ((1.0 - k2) * (1.0 - k2) - epsilon))
            .collect();
        let min_symbol = symbol.iter().copied().fold(f64::INFINITY, f64::min);
        if min_symbol <= 0.0 {
            return Err(Error::SymbolNotPositive { min_symbol });
        }
        Ok(Stepper {
            b,
            tau,
            epsilon,
            symbol,
            cubic: true,
        })
    }

    /// History part `b_0 φ^{n−1} − Σ_{m≥1} b_m ∇φ^{n−m}`, scaled by `1/τ`.
    fn explicit_part(&self, history: &[Field2D]) -> Field2D {
        let len = history.len();
        let prev = &history[len - 1];
        let mut lin = prev.scale(self.b[0] / self.tau);
        for m in 1..self.b.len() {
            let hi = &history[len - m];
            let lo = &history[len - m - 1];
            let c = -self.b[m] / self.tau;
            lin.axpy(c, hi);
            lin.axpy(-c, lo);
        }
        lin
    }

    /// Solves for the next level given at least `k` previous levels (oldest
    /// first). Returns the new level and the number of fixed-point iterations.
    pub(crate) fn step(
        &self,
        ops: &SpectralOps,
        history: &[Field2D],
        forcing: Option<&Field2D>,
        cfg: &SolverConfig,
        step_index: usize,
    ) -> Result<(Field2D, usize)> {
        debug_assert!(history.len() >= self.b.len());
        let mut lin = self.explicit_part(history);
        if let Some(g) = forcing {
            lin.axpy(1.0, g);
        }
        let rhs = ops.forward(&lin);
        let k2 = ops.k2();
        let mut iterate = history[history.len() - 1].clone();
        let mut last_update = f64::INFINITY;
        for iter in 1..=cfg.fp_max_iters {
            let mut s = if self.cubic {
                ops.forward(&iterate.map(|p| p * p * p))
            } else {
                Spectrum2D::zeros(*iterate.grid())
            };
            if cfg.dealias {
                ops.dealias(&mut s);
            }
            for (((c, r), &kk), &sym) in s
                .coeffs_mut()
                .iter_mut()
                .zip(rhs.coeffs())
                .zip(k2)
                .zip(&self.symbol)
            {
                *c = (*r - *c * kk) / sym;
            }
            let next = ops.inverse(&s);
            if !next.is_finite() {
                return Err(Error::NonFinite { step: step_index });
            }
            last_update = next.max_abs_diff(&iterate);
            iterate = next;
            if last_update <= cfg.fp_tol {
                return Ok((iterate, iter));
            }
        }
        Err(Error::FixedPointDivergence {
            iters: cfg.fp_max_iters,
            last_update,
        })
    }

    /// Max-norm residual of the scheme at the newest level of `levels`
    /// (oldest first), relative to the size of its terms.
    pub(crate) fn residual(
        &self,
        ops: &SpectralOps,
        levels: &[Field2D],
        forcing: Option<&Field2D>,
    ) -> f64 {
        let len = levels.len();
        let mut dk = Field2D::zeros(*levels[0].grid());
        for (m, bm) in self.b.iter().enumerate() {
            dk.axpy(bm / self.tau, &levels[len - 1 - m]);
            dk.axpy(-bm / self.tau, &levels[len - 2 - m]);
        }
        let mu = chemical_potential(ops, &levels[len - 1], self.epsilon);
        let lap_mu = ops.laplacian(&mu);
        let mut res = dk.sub(&lap_mu);
        let mut scale = dk.max_abs() + lap_mu.max_abs();
        if let Some(g) = forcing {
            res.axpy(-1.0, g);
            scale += g.max_abs();
        }
        if scale == 0.0 {
            0.0
        } else {
            res.max_abs() / scale
        }
    }
}

/// Relative residual of the BDF-k scheme at the newest of `levels` (oldest
/// first, at least `k + 1` levels).
pub fn scheme_residual(
    ops: &SpectralOps,
    cfg: &SolverConfig,
    levels: &[Field2D],
    t: f64,
) -> Result<f64> {
    let b = bdf_kernels(cfg.k)?.to_f64();
    if levels.len() < cfg.k + 1 {
        return Err(Error::InvalidArgument(format!(
            "residual of BDF-{} needs {} levels",
            cfg.k,
            cfg.k + 1
        )));
    }
    let stepper = Stepper::new(ops, b, cfg.tau, cfg.epsilon)?;
    let g = cfg.forcing.as_ref().map(|f| f.forcing(t));
    Ok(stepper.residual(ops, levels, g.as_ref()))
}

/// Starting levels `φ^1..φ^{k−1}`.
pub fn startup(
    ops: &SpectralOps,
    cfg: &SolverConfig,
    phi0: &Field2D,
    exact: Option<&dyn ExactSolution>,
) -> Result<Vec<Field2D>> {
    let count = cfg.k - 1;
    if count == 0 {
        return Ok(Vec::new());
    }
    match cfg.startup {
        StartupStrategy::Exact => {
            let exact = exact.ok_or_else(|| {
                Error::InvalidArgument("exact start-up needs a closed-form solution".into())
            })?;
            Ok((1..=count)
                .map(|j| exact.exact(j as f64 * cfg.tau))
                .collect())
        }
        StartupStrategy::Bootstrap => {
            let substeps = bootstrap_substeps(cfg.k, cfg.tau);
            if substeps > cfg.bootstrap_max_substeps {
                return Err(Error::StartupBudget {
                    needed: substeps,
                    limit: cfg.bootstrap_max_substeps,
                });
            }
            let h = cfg.tau / substeps as f64;
            let euler = Stepper::new(ops, vec![1.0], h, cfg.epsilon)?;
            let mut levels = Vec::with_capacity(count);
            let mut current = phi0.clone();
            for level in 1..=count {
                for sub in 1..=substeps {
                    let t = (level - 1) as f64 * cfg.tau + sub as f64 * h;
                    let g = cfg.forcing.as_ref().map(|f| f.forcing(t));
                    let (next, _) =
                        euler.step(ops, std::slice::from_ref(&current), g.as_ref(), cfg, level)?;
                    current = next;
                }
                levels.push(current.clone());
            }
            Ok(levels)
        }
    }
}

/// Backward-Euler substeps per coarse step: `⌈τ / (τ·τ^{k/2})⌉`, at least one.
pub fn bootstrap_substeps(k: usize, tau: f64) -> usize {
    let ratio = tau.powf(-(k as f64) / 2.0);
    // Guard against ratios like 10.000000000000002 rounding up.
    let r = ratio.round();
    let n = if (ratio - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        ratio.ceil()
    };
    (n as usize).max(1)
}

/// Per-step diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    /// Defined once the history covers the gradient-structure window and the
    /// order has a gradient structure (k = 3, 4, 5).
    pub modified_energy: Option<f64>,
    pub volume: f64,
    pub dissipation_rate: f64,
    pub fp_iters: usize,
    pub max_abs: f64,
}

/// Most recent levels plus the diagnostic series.
#[derive(Clone, Debug)]
pub struct SolverState {
    /// At most `k + 1` levels, oldest first; the newest is `φ^n`.
    pub history: VecDeque<Field2D>,
    pub n: usize,
    pub t: f64,
    pub records: Vec<StepRecord>,
}

impl SolverState {
    pub fn current(&self) -> &Field2D {
        self.history.back().expect("state always holds a level")
    }

    pub fn energy_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    pub fn volume_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.volume).collect()
    }

    pub fn modified_energy_series(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.modified_energy).collect()
    }
}

/// A BDF-k run: configuration, operators and evolving state.
#[derive(Clone)]
pub struct Simulation {
    config: SolverConfig,
    ops: SpectralOps,
    stepper: Stepper,
    structure: Option<GradientStructure>,
    state: SolverState,
    initial_volume: f64,
    linf_limit: f64,
    linf_exceeded: bool,
}

impl Simulation {
    /// Validates the configuration, computes the starting levels and records
    /// diagnostics for `φ^0..φ^{k−1}`.
    pub fn start(
        config: SolverConfig,
        phi0: Field2D,
        exact: Option<&dyn ExactSolution>,
    ) -> Result<Self> {
        config.validate()?;
        let ops = SpectralOps::new(*phi0.grid());
        let b = bdf_kernels(config.k)?.to_f64();
        let stepper = Stepper::new(&ops, b, config.tau, config.epsilon)?;
        let structure = gradient_structure::structure(config.k).ok();
        let initial_volume = volume(&phi0);
        let starting = startup(&ops, &config, &phi0, exact)?;
        let mut linf = phi0.max_abs();
        for f in &starting {
            linf = linf.max(f.max_abs());
        }
        let mut sim = Simulation {
            ops,
            stepper,
            structure,
            state: SolverState {
                history: VecDeque::with_capacity(config.k + 2),
                n: 0,
                t: 0.0,
                records: Vec::new(),
            },
            initial_volume,
            linf_limit: 10.0 * linf.max(f64::MIN_POSITIVE),
            linf_exceeded: false,
            config,
        };
        sim.push_level(phi0, 0)?;
        for (j, f) in starting.into_iter().enumerate() {
            sim.push_level(f, 0)?;
            debug_assert_eq!(sim.state.n, j + 1);
        }
        Ok(sim)
    }

    fn push_level(&mut self, phi: Field2D, fp_iters: usize) -> Result<()> {
        let n = if self.state.history.is_empty() {
            0
        } else {
            self.state.n + 1
        };
        self.state.history.push_back(phi);
        while self.state.history.len() > self.config.k + 1 {
            self.state.history.pop_front();
        }
        self.state.n = n;
        self.state.t = n as f64 * self.config.tau;
        let phi = self.state.current();
        let mu = chemical_potential(&self.ops, phi, self.config.epsilon);
        let max_abs = phi.max_abs();
        if max_abs > self.linf_limit && !self.linf_exceeded {
            log::warn!("max-norm {max_abs:.3e} at step {n} exceeds ten times the initial bound");
            self.linf_exceeded = true;
        }
        let modified_energy = match &self.structure {
            Some(s) if n + 1 >= self.config.k => {
                let levels: Vec<Field2D> = self.state.history.iter().cloned().collect();
                Some(modified_energy(
                    &self.ops,
                    s,
                    &levels,
                    self.config.tau,
                    self.config.epsilon,
                )?)
            }
            _ => None,
        };
        let record = StepRecord {
            step: n,
            time: self.state.t,
            energy: energy(&self.ops, phi, self.config.epsilon),
            modified_energy,
            volume: volume(phi),
            dissipation_rate: dissipation_rate(&self.ops, &mu),
            fp_iters,
            max_abs,
        };
        self.state.records.push(record);
        Ok(())
    }

    /// One BDF-k step; returns the record of the new level.
    pub fn advance(&mut self) -> Result<&StepRecord> {
        let n = self.state.n + 1;
        let t = n as f64 * self.config.tau;
        let g = self.config.forcing.as_ref().map(|f| f.forcing(t));
        let k = self.config.k;
        let len = self.state.history.len();
        let history: Vec<Field2D> = self
            .state
            .history
            .iter()
            .skip(len.saturating_sub(k))
            .cloned()
            .collect();
        // BDF-k at level n needs φ^{n−k}..φ^{n−1}.
        if history.len() < k {
            return Err(Error::InvalidArgument(format!(
                "history holds {} of {k} levels",
                history.len()
            )));
        }
        let (next, iters) = self
            .stepper
            .step(&self.ops, &history, g.as_ref(), &self.config, n)?;
        self.push_level(next, iters)?;
        Ok(self.state.records.last().unwrap())
    }

    /// Steps until `t_end` (rounded to a whole number of steps), calling
    /// `observer` after every new level.
    pub fn run_until(
        &mut self,
        t_end: f64,
        mut observer: impl FnMut(&StepRecord, &Field2D) -> Result<()>,
    ) -> Result<()> {
        let target = (t_end / self.config.tau).round() as usize;
        while self.state.n < target {
            self.advance()?;
            let rec = self.state.records.last().unwrap();
            observer(rec, self.state.current())?;
        }
        Ok(())
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn current(&self) -> &Field2D {
        self.state.current()
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.state.records
    }

    pub fn initial_volume(&self) -> f64 {
        self.initial_volume
    }

    /// Largest `|⟨φ^n,1⟩ − ⟨φ^0,1⟩|` so far.
    pub fn max_volume_drift(&self) -> f64 {
        self.state
            .records
            .iter()
            .map(|r| (r.volume - self.initial_volume).abs())
            .fold(0.0, f64::max)
    }

    pub fn linf_exceeded(&self) -> bool {
        self.linf_exceeded
    }

    /// Scheme residual at the current level.
    pub fn residual(&self) -> f64 {
        let levels: Vec<Field2D> = self.state.history.iter().cloned().collect();
        if levels.len() < self.config.k + 1 {
            return 0.0;
        }
        let g = self
            .config
            .forcing
            .as_ref()
            .map(|f| f.forcing(self.state.t));
        self.stepper.residual(&self.ops, &levels, g.as_ref())
    }
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub final_field: Field2D,
    pub max_volume_drift: f64,
    pub linf_exceeded: bool,
}

/// Start-up followed by BDF-k steps up to `t_end`.
pub fn run(
    config: SolverConfig,
    phi0: Field2D,
    exact: Option<&dyn ExactSolution>,
    t_end: f64,
) -> Result<Trajectory> {
    if t_end < config.k as f64 * config.tau {
        return Err(Error::InvalidArgument(format!(
            "final time {t_end} is shorter than k·τ = {}",
            config.k as f64 * config.tau
        )));
    }
    let mut sim = Simulation::start(config, phi0, exact)?;
    sim.run_until(t_end, |_, _| Ok(()))?;
    Ok(Trajectory {
        max_volume_drift: sim.max_volume_drift(),
        linf_exceeded: sim.linf_exceeded(),
        final_field: sim.current().clone(),
        records: sim.state.records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;
    use std::f64::consts::PI;

    fn grid8() -> Grid2D {
        Grid2D::square(32, 8.0).unwrap()
    }

    struct Steady {
        ops: SpectralOps,
        phi: Field2D,
        eps: f64,
    }

    impl Forcing for Steady {
        fn forcing(&self, _t: f64) -> Field2D {
            self.ops
                .laplacian(&chemical_potential(&self.ops, &self.phi, self.eps))
                .scale(-1.0)
        }
    }

    #[test]
    fn chemical_potential_examples() {
        let g = grid8();
        let ops = SpectralOps::new(g);
        assert_eq!(
            chemical_potential(&ops, &Field2D::zeros(g), 0.02).max_abs(),
            0.0
        );
        let c = 0.7;
        let mu = chemical_potential(&ops, &Field2D::constant(g, c), 0.02);
        assert!((mu.at(3, 5) - (c + c * c * c - 0.02 * c)).abs() < 1e-14);
        let f = Field2D::from_fn(g, |x, _| (PI * x / 2.0).sin());
        let m = (1.0 - PI * PI / 4.0).powi(2);
        let direct = Field2D::from_fn(g, |x, _| {
            let s = (PI * x / 2.0).sin();
            m * s + s * s * s - 0.02 * s
        });
        assert!(chemical_potential(&ops, &f, 0.02).max_abs_diff(&direct) < 1e-11);
    }

    #[test]
    fn energy_examples() {
        let g = grid8();
        let ops = SpectralOps::new(g);
        assert!(energy(&ops, &Field2D::zeros(g), 0.3).abs() < 1e-13);
        let unit = Grid2D::square(4, 1.0).unwrap();
        let c = 0.4;
        let e = energy(&SpectralOps::new(unit), &Field2D::constant(unit, c), 0.0);
        assert!((e - (c * c / 2.0 + c.powi(4) / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn volume_and_dissipation_examples() {
        let g = grid8();
        let ops = SpectralOps::new(g);
        assert_eq!(volume(&Field2D::zeros(g)), 0.0);
        assert!((volume(&Field2D::constant(g, 0.3)) - 64.0 * 0.3).abs() < 1e-13);
        assert_eq!(dissipation_rate(&ops, &Field2D::constant(g, 2.0)), 0.0);
        let kappa = PI / 2.0;
        let s = Field2D::from_fn(g, |x, _| (kappa * x).sin());
        assert!((dissipation_rate(&ops, &s) + kappa * kappa * 32.0).abs() < 1e-11);
    }

    #[test]
    fn steady_forced_state_is_preserved() {
        let g = grid8();
        let ops = SpectralOps::new(g);
        let phi = Field2D::from_fn(g, |x, y| 0.3 * (PI * x / 2.0).sin() * (PI * y / 4.0).cos());
        let forcing = Arc::new(Steady {
            ops: ops.clone(),
            phi: phi.clone(),
            eps: 0.1,
        });
        let cfg = SolverConfig::new(3, 0.1, 0.05).with_forcing(forcing);
        let traj = run(cfg, phi.clone(), None, 0.5).unwrap();
        assert_eq!(traj.records.len(), 11);
        assert!(traj.final_field.max_abs_diff(&phi) < 1e-11);
    }

    #[test]
    fn linear_mode_solved_in_one_iteration() {
        let g = grid8();
        let ops = SpectralOps::new(g);
        let (tau, eps) = (0.1, 0.02);
        let mut stepper = Stepper::new(&ops, vec![1.0], tau, eps).unwrap();
        stepper.cubic = false;
        let kappa2 = PI * PI / 4.0;
        let f = Field2D::from_fn(g, |x, _| (PI * x / 2.0).sin());
        let cfg = SolverConfig::new(1, eps, tau);
        let (next, iters) = stepper
            .step(&ops, std::slice::from_ref(&f), None, &cfg, 1)
            .unwrap();
        let factor = (1.0 / tau) / (1.0 / tau + kappa2 * ((1.0 - kappa2).powi(2) - eps));
        assert!(next.max_abs_diff(&f.scale(factor)) < 1e-13);
        // The second pass only confirms the first.
        assert_eq!(iters, 2);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = grid8();
        let traj = run(
            SolverConfig::new(4, 0.25, 0.1),
            Field2D::zeros(g),
            None,
            1.0,
        )
        .unwrap();
        assert!(traj
            .records
            .iter()
            .all(|r| r.energy.abs() < 1e-13 && r.volume == 0.0));
        assert_eq!(traj.final_field.max_abs(), 0.0);
    }

    #[test]
    fn symbol_guard_rejects_large_steps() {
        let g = Grid2D::square(32, 32.0).unwrap();
        let ops = SpectralOps::new(g);
        // b0/τ − 2ε < 0 with a mode near |κ|² = 1.
        assert!(matches!(
            Stepper::new(&ops, vec![1.0], 100.0, 0.5),
            Err(Error::SymbolNotPositive { .. })
        ));
    }

    #[test]
    fn step_limit_and_strict_mode() {
        let cfg = SolverConfig::new(5, 0.25, 0.1);
        let limit = cfg.step_limit().unwrap();
        assert!((limit - 8.0 / 3.0 * 646631.0 / 1920000.0).abs() < 1e-14);
        assert!(cfg.validate().is_ok());
        let mut big = SolverConfig::new(5, 0.25, 1.0);
        assert!(big.validate().is_ok());
        big.strict = true;
        assert!(matches!(
            big.validate(),
            Err(Error::TimeStepRestriction { .. })
        ));
        assert!(SolverConfig::new(3, 1.5, 0.1).validate().is_err());
        assert!(SolverConfig::new(7, 0.1, 0.1).validate().is_err());
    }

    #[test]
    fn modified_energy_single_difference() {
        let g = grid8();
        let ops = SpectralOps::new(g);
        let s3 = gradient_structure::structure(3).unwrap();
        let base = Field2D::from_fn(g, |x, y| 0.2 * (PI * x / 4.0).cos() * (PI * y / 2.0).sin());
        let d = Field2D::from_fn(g, |x, y| {
            0.05 * (PI * x / 2.0).sin() + 0.01 * (PI * y).cos()
        });
        let now = base.add(&d);
        let tau = 0.1;
        let levels = [base.clone(), base.clone(), now.clone()];
        let ek = modified_energy(&ops, &s3, &levels, tau, 0.25).unwrap();
        let expected = energy(&ops, &now, 0.25)
            + (1.0 / 6.0 + 49.0 / 96.0) / tau * ops.norm_hm1_sq(&d).unwrap();
        assert!((ek - expected).abs() < 1e-12 * expected.abs());
        let still = [now.clone(), now.clone(), now.clone()];
        assert_eq!(
            modified_energy(&ops, &s3, &still, tau, 0.25).unwrap(),
            energy(&ops, &now, 0.25)
        );
        let shifted = [now.clone(), now.clone(), now.map(|v| v + 1e-3)];
        assert!(matches!(
            modified_energy(&ops, &s3, &shifted, tau, 0.25),
            Err(Error::NotMeanZero { .. })
        ));
    }

    #[test]
    fn exact_startup_requires_a_solution() {
        let g = grid8();
        let ops = SpectralOps::new(g);
        let cfg = SolverConfig::new(3, 0.1, 0.1).with_startup(StartupStrategy::Exact);
        assert!(startup(&ops, &cfg, &Field2D::zeros(g), None).is_err());
    }

    #[test]
    fn bootstrap_substep_counts() {
        assert_eq!(bootstrap_substeps(4, 0.1), 100);
        assert_eq!(bootstrap_substeps(3, 0.1), 32);
        assert_eq!(bootstrap_substeps(2, 1.0), 1);
        let g = grid8();
        let ops = SpectralOps::new(g);
        let cfg = SolverConfig::new(5, 0.1, 0.01);
        assert!(matches!(
            startup(&ops, &cfg, &Field2D::zeros(g), None),
            Err(Error::StartupBudget {
                needed: 100000,
                limit: 10000
            })
        ));
    }

    #[test]
    fn run_rejects_short_horizon() {
        let g = grid8();
        assert!(run(SolverConfig::new(3, 0.1, 0.1), Field2D::zeros(g), None, 0.2).is_err());
    }
}
