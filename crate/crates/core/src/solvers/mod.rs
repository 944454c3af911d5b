//! Base phase retrieval solvers behind one dispatch point.
//!
//! * [`wf`]: truncated Wirtinger flow on intensities, with spectral init.
//! * [`altproj`]: alternating projections on magnitudes.
//! * [`tuner`]: alternating projections restricted to unit-modulus vectors,
//!   used for the low-dimensional phase tuning problem.
//!
//! Every solver runs `restarts` independently seeded attempts and keeps the
//! one with the smallest final residual (lowest restart index on ties). A
//! restart that reaches the tolerance ends the search early.

pub mod altproj;
pub mod lstsq;
pub mod tuner;
pub mod wf;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::MeasurementKind;
use crate::krbd::MeasurementOperator;
use crate::linalg::{ComplexVec, C64};
use crate::rng::derive_seed;

pub use altproj::{altproj_solve, altproj_trace};
pub use lstsq::{pinv_factor, LeastSquares};
pub use tuner::unit_modulus_tune;
pub use wf::{spectral_init, wf_solve, wf_solve_from};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    WfTruncated,
    AltProj,
    UnitModulusTuner,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wf" | "wf_truncated" | "twf" => Ok(SolverKind::WfTruncated),
            "ap" | "alt_proj" | "altproj" => Ok(SolverKind::AltProj),
            "unit_modulus" | "unit_modulus_tuner" => Ok(SolverKind::UnitModulusTuner),
            other => Err(Error::InvalidParams(format!("unknown solver `{other}`"))),
        }
    }
}

/// Truncated Wirtinger flow parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WFParams {
    pub max_iters: usize,
    pub step_size: f64,
    pub init_power_iters: usize,
    /// Spectral-init truncation: keep `b_r ≤ trunc_y² · mean(b)`.
    pub trunc_y: f64,
    pub trunc_lb: f64,
    pub trunc_ub: f64,
    pub trunc_h: f64,
    pub tol: f64,
}

impl Default for WFParams {
    fn default() -> Self {
        Self {
            max_iters: 400,
            step_size: 0.2,
            init_power_iters: 100,
            trunc_y: 3.0,
            trunc_lb: 0.3,
            trunc_ub: 5.0,
            trunc_h: 5.0,
            tol: 1e-8,
        }
    }
}

impl WFParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.step_size,
            self.trunc_y,
            self.trunc_lb,
            self.trunc_ub,
            self.trunc_h,
            self.tol,
        ];
        if self.max_iters == 0 || self.init_power_iters == 0 || positive.iter().any(|v| v.is_nan() || *v <= 0.0) {
            return Err(Error::InvalidParams("WF parameters must be positive".into()));
        }
        if self.trunc_lb >= self.trunc_ub {
            return Err(Error::InvalidParams("trunc_lb must be below trunc_ub".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApInit {
    Random,
    Spectral,
}

/// Alternating projection parameters (also used by the unit-modulus tuner).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct APParams {
    pub max_iters: usize,
    pub tol: f64,
    pub init: ApInit,
}

impl Default for APParams {
    fn default() -> Self {
        Self {
            max_iters: 600,
            tol: 1e-10,
            init: ApInit::Random,
        }
    }
}

impl APParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParams("AP parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Which base solver to run, with what parameters and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub wf: WFParams,
    pub ap: APParams,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self::wf(0)
    }
}

impl SolverSpec {
    pub fn wf(seed: u64) -> Self {
        Self {
            kind: SolverKind::WfTruncated,
            wf: WFParams::default(),
            ap: APParams::default(),
            seed,
            restarts: 1,
        }
    }

    pub fn alt_proj(seed: u64) -> Self {
        Self {
            kind: SolverKind::AltProj,
            ..Self::wf(seed)
        }
    }

    /// Unit-modulus tuner with its default of 50 restarts.
    pub fn tuner(seed: u64) -> Self {
        Self {
            kind: SolverKind::UnitModulusTuner,
            restarts: 50,
            ..Self::wf(seed)
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParams("restarts must be at least 1".into()));
        }
        match self.kind {
            SolverKind::WfTruncated => self.wf.validate(),
            SolverKind::AltProj | SolverKind::UnitModulusTuner => self.ap.validate(),
        }
    }

    /// Measurement kind the solver consumes.
    pub fn input_kind(&self) -> MeasurementKind {
        match self.kind {
            SolverKind::WfTruncated => MeasurementKind::Intensity,
            SolverKind::AltProj | SolverKind::UnitModulusTuner => MeasurementKind::Magnitude,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub restarts_used: usize,
    pub wall_time_seconds: f64,
    pub converged: bool,
}

/// Outcome of a single seeded attempt.
#[derive(Clone, Debug)]
pub(crate) struct Attempt {
    pub z: Vec<C64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Runs attempts `0..restarts` with seeds `derive_seed(seed, r)`, keeping the
/// lowest residual. Fails only if every attempt fails.
pub(crate) fn best_of_restarts(
    restarts: usize,
    seed: u64,
    mut attempt: impl FnMut(usize, u64) -> Result<Attempt>,
) -> Result<(ComplexVec, SolverReport)> {
    let start = Instant::now();
    let mut best: Option<Attempt> = None;
    let mut first_err = None;
    let mut used = 0;
    for r in 0..restarts.max(1) {
        used += 1;
        match attempt(r, derive_seed(seed, r as u64)) {
            Ok(a) => {
                let done = a.converged;
                if best.as_ref().is_none_or(|b| a.residual < b.residual) {
                    best = Some(a);
                }
                if done {
                    break;
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(a) => Ok((
            ComplexVec::from_vec(a.z),
            SolverReport {
                iterations: a.iterations,
                final_residual: a.residual,
                restarts_used: used,
                wall_time_seconds: start.elapsed().as_secs_f64(),
                converged: a.converged,
            },
        )),
        None => Err(first_err.expect("at least one attempt ran")),
    }
}

/// Runs the solver named by `spec` on `(op, measurements)`, converting the
/// measurements to the kind the solver consumes.
pub fn solve_with_spec<O: MeasurementOperator + ?Sized>(
    spec: &SolverSpec,
    op: &O,
    measurements: &[f64],
    kind: MeasurementKind,
) -> Result<(ComplexVec, SolverReport)> {
    spec.validate()?;
    let input = kind.convert(measurements, spec.input_kind());
    match spec.kind {
        SolverKind::WfTruncated => wf::solve(op, &input, &spec.wf, spec.seed, spec.restarts),
        SolverKind::AltProj => altproj::solve(op, &input, &spec.ap, spec.seed, spec.restarts),
        SolverKind::UnitModulusTuner => tuner::solve(op, &input, &spec.ap, spec.seed, spec.restarts),
    }
}

pub(crate) fn check_rows<O: MeasurementOperator + ?Sized>(op: &O, len: usize) -> Result<()> {
    if op.rows() != len {
        return Err(Error::DimensionMismatch {
            context: "measurements vs operator rows",
            expected: op.rows(),
            found: len,
        });
    }
    Ok(())
}
