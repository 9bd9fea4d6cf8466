//! Aggregated invariant suite.
//!
//! Every check reports a signed excess (how far the checked quantity lies
//! beyond its bound; negative means slack) next to a nominal tolerance. The
//! effective tolerance is the nominal one times a scale factor, so a report
//! run with scale 0 separates rounding-level residuals (within the nominal
//! tolerance) from genuine violations.

use std::fmt;

use crate::error::Result;
use crate::gradient_structure::{bdf6_counterexample, bk_lambda_min, structure, verify_identity};
use crate::harness::rng::SplitMix64;
use crate::kernels::{bdf_kernels, doc_decay_bound, doc_kernels, orthogonality_residual};
use crate::matrix_analysis::{check_young_inequalities, eig_report, m1, m2};
use crate::spectral::{
    doc_field_inequality_slack, embedding_slack, green_residuals, holder_slack, Field2D, Grid2D,
    SpectralOps,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// Within the nominal tolerance but above the scaled one.
    ToleranceExceeded,
    Violated,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::ToleranceExceeded => "TOLERANCE",
            Outcome::Violated => "FAIL",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub excess: f64,
    pub tolerance: f64,
    pub outcome: Outcome,
}

/// Deliberate corruption used to show that the suite detects it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Perturb one DOC kernel by a relative 1e-3.
    CorruptDocKernel,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub tolerance_scale: f64,
    pub fault: Option<Fault>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tolerance_scale: 1.0,
            fault: None,
            seed: 20240601,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.outcome == Outcome::Pass)
    }

    pub fn find(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.checks.iter().filter(|c| c.outcome == outcome).count()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<9} {:<34} excess {:>11.3e}  tol {:.1e}",
                c.outcome.to_string(),
                c.name,
                c.excess,
                c.tolerance
            )?;
        }
        write!(
            f,
            "{} checks: {} pass, {} tolerance, {} fail",
            self.checks.len(),
            self.count(Outcome::Pass),
            self.count(Outcome::ToleranceExceeded),
            self.count(Outcome::Violated)
        )
    }
}

struct Recorder<'a> {
    opts: &'a VerifyOptions,
    checks: Vec<CheckResult>,
}

impl Recorder<'_> {
    fn record(&mut self, name: impl Into<String>, excess: Result<f64>, tolerance: f64) {
        let name = name.into();
        let excess = match excess {
            Ok(x) => x,
            Err(e) => {
                log::warn!("{name}: {e}");
                f64::NAN
            }
        };
        let outcome = if excess <= tolerance * self.opts.tolerance_scale {
            Outcome::Pass
        } else if excess <= tolerance {
            Outcome::ToleranceExceeded
        } else {
            Outcome::Violated
        };
        self.checks.push(CheckResult {
            name,
            excess,
            tolerance,
            outcome,
        });
    }
}

fn normal_field(grid: Grid2D, rng: &mut SplitMix64) -> Field2D {
    let mut f = Field2D::zeros(grid);
    for v in f.values_mut() {
        *v = rng.standard_normal();
    }
    f
}

fn mean_zero_field(grid: Grid2D, rng: &mut SplitMix64) -> Field2D {
    let f = normal_field(grid, rng);
    let m = f.mean();
    f.map(|v| v - m)
}

/// Runs every invariant suite at modest default sizes.
pub fn verify_all(opts: &VerifyOptions) -> VerifyReport {
    let mut r = Recorder {
        opts,
        checks: Vec::new(),
    };
    let mut rng = SplitMix64::new(opts.seed);

    for k in 3..=6 {
        let excess = (|| {
            let b = bdf_kernels(k)?.to_f64();
            let mut theta = doc_kernels(k, 201)?;
            if opts.fault == Some(Fault::CorruptDocKernel) {
                theta.values_mut()[5] *= 1.0 + 1e-3;
            }
            Ok(orthogonality_residual(theta.values(), &b, k, 200))
        })();
        r.record(format!("orthogonality k={k}"), excess, 1e-11);
    }

    for k in 3..=5 {
        let excess = (|| {
            let theta = doc_kernels(k, 400)?;
            let mut worst = f64::NEG_INFINITY;
            for (j, t) in theta.values().iter().enumerate() {
                worst = worst.max(t.abs() / doc_decay_bound(k, j)? - 1.0);
            }
            Ok(worst)
        })();
        r.record(format!("doc decay bound k={k}"), excess, 0.0);
    }

    for k in 3..=5 {
        let excess = (|| {
            let mut worst = 0.0f64;
            for _ in 0..100 {
                let v: Vec<f64> = (0..120).map(|_| rng.standard_normal()).collect();
                worst = worst.max(verify_identity(k, &v, 119)?);
            }
            Ok(worst)
        })();
        r.record(format!("gradient identity k={k}"), excess, 1e-10);

        match bk_lambda_min(k, 200).and_then(|l| Ok((structure(k)?.sigma_f64() - l, m1(k)? - l))) {
            Ok((to_sigma, to_m1)) => {
                r.record(
                    format!("lambda_min(B_k) >= sigma k={k}"),
                    Ok(to_sigma),
                    1e-8,
                );
                r.record(format!("lambda_min(B_k) >= m1 k={k}"), Ok(to_m1), 1e-6);
            }
            Err(e) => r.record(format!("lambda_min(B_k) k={k}"), Err(e), 1e-8),
        }

        let excess = eig_report(k, 100)
            .map(|e| (e.lambda_max_theta - e.m3).max(e.m1 / e.m2 - e.lambda_min_theta));
        r.record(format!("Theta_k eigenvalue bounds k={k}"), excess, 1e-8);

        let excess = check_young_inequalities(k, 100, 60, rng.next_u64()).map(|s| -s);
        r.record(format!("Young-type inequalities k={k}"), excess, 1e-10);
    }

    r.record(
        "BDF-6 indefinite by size 200",
        bdf6_counterexample(200).map(|(_, l)| l),
        0.0,
    );

    let grid = Grid2D::square(32, 8.0).expect("valid grid");
    let ops = SpectralOps::new(grid);
    let (mut green, mut embed, mut holder, mut round_trip) =
        (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
    let mut spectral_err = None;
    for _ in 0..20 {
        let v = mean_zero_field(grid, &mut rng);
        let w = normal_field(grid, &mut rng);
        let back = ops.inverse(&ops.forward(&w));
        round_trip = round_trip.max(back.max_abs_diff(&w) / w.max_abs());
        match (
            green_residuals(&ops, &v, &w),
            embedding_slack(&ops, &v),
            holder_slack(&ops, &v),
        ) {
            (Ok(g), Ok(e), Ok(h)) => {
                green = green.max(g.into_iter().fold(0.0, f64::max));
                embed = embed.max(-e);
                holder = holder.max(-h);
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => spectral_err = Some(e.to_string()),
        }
    }
    let wrap = |x: f64| match &spectral_err {
        Some(e) => Err(crate::Error::InvalidArgument(e.clone())),
        None => Ok(x),
    };
    r.record("transform round trip", wrap(round_trip), 1e-12);
    r.record("Green identities", wrap(green), 1e-10);
    r.record("H^-1 embedding inequality", wrap(embed), 1e-10);
    r.record("generalized Hoelder inequality", wrap(holder), 1e-10);

    let small = Grid2D::square(16, 8.0).expect("valid grid");
    let small_ops = SpectralOps::new(small);
    for k in 3..=5 {
        let excess = (|| {
            let len = 12;
            let theta = doc_kernels(k, len)?;
            let (m1k, m2k) = (m1(k)?, m2(k, len)?);
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..5 {
                let fields: Vec<Field2D> =
                    (0..len).map(|_| mean_zero_field(small, &mut rng)).collect();
                for eps in [0.4, 1.0] {
                    let s = doc_field_inequality_slack(
                        &small_ops,
                        theta.values(),
                        &fields,
                        eps,
                        m1k,
                        m2k,
                    )?;
                    worst = worst.max(-s);
                }
            }
            Ok(worst)
        })();
        r.record(format!("field convolution inequality k={k}"), excess, 1e-9);
    }

    VerifyReport { checks: r.checks }
}
