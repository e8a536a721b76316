//! Semi-implicit finite difference integrator for the stochastic Allen-Cahn
//! equation on `[−a,b]` with `m(−a) = −1`, `m(b) = +1`:
//!
//! ```text
//! (I − ½Δt D₂) m_{k+1} = m_k − Δt V'(m_k) + √ε ξ_k,
//! ```
//!
//! one tridiagonal solve per step. The implicit Laplacian makes the linear
//! part unconditionally stable, so `Δt` is set by accuracy, not by `Δx²`.
//! Space-time white noise is discretized per interior node as independent
//! `N(0, Δt/Δx)` increments drawn from the counter-based generator keyed by
//! `(seed, step, node)`; trajectories are bit-reproducible in parallel.

use crate::profiles::{eval_potential, Domain, Profile, ProfileError, WaveParams};
use crate::rng;
use thiserror::Error;

/// Hard cap on grid size; `build_domain` refuses anything larger.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Any sample beyond this magnitude aborts the run: the cubic reaction has
/// exploded under a too-large time step.
pub const BLOW_UP_THRESHOLD: f64 = 10.0;

#[derive(Debug, Error)]
pub enum SpdeError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("grid would need {needed} points, exceeding the cap {cap}")]
    GridTooLarge { needed: usize, cap: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("field blew up (|m| > {BLOW_UP_THRESHOLD}) at step {step}")]
    BlowUp { step: u64 },
    #[error("deterministic relaxation did not converge within {max_steps} steps (residual {residual:.3e})")]
    NoConvergence { max_steps: u64, residual: f64 },
}

/// Full parameter set of one SPDE run.
#[derive(Debug, Clone)]
pub struct SpdeConfig {
    pub domain: Domain,
    /// Noise intensity ε (the forcing is √ε dW).
    pub eps: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Keep every `snapshot_stride`-th step in the trajectory.
    pub snapshot_stride: usize,
    pub seed: u64,
    pub initial: Profile,
}

impl SpdeConfig {
    pub fn validate(&self) -> Result<(), SpdeError> {
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(SpdeError::InvalidConfig(format!("eps must be >= 0, got {}", self.eps)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SpdeError::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.dt > self.horizon {
            return Err(SpdeError::InvalidConfig(format!(
                "dt {} exceeds horizon {}",
                self.dt, self.horizon
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(SpdeError::InvalidConfig("snapshot_stride must be >= 1".into()));
        }
        if self.initial.domain() != &self.domain {
            return Err(SpdeError::InvalidConfig("initial profile lives on another grid".into()));
        }
        let v = self.initial.values();
        if v[0] != -1.0 || v[v.len() - 1] != 1.0 {
            return Err(SpdeError::InvalidConfig(
                "initial profile must carry the Dirichlet endpoints (-1, +1) exactly".into(),
            ));
        }
        Ok(())
    }
}

/// Thinned sequence of field snapshots with their times.
#[derive(Debug, Clone)]
pub struct FieldTrajectory {
    pub snapshots: Vec<(f64, Profile)>,
    pub config: SpdeConfig,
}

/// Reaction term used by the generic stepper. The public SPDE always runs
/// the cubic; the other variants are oracle hooks (pure heat mode, the
/// linearization around a frozen state for Ornstein-Uhlenbeck checks).
#[derive(Debug, Clone)]
pub enum Reaction {
    /// `V'(m) = m³ − m`.
    Cubic,
    /// No reaction: pure stochastic heat equation.
    None,
    /// `coeff(x) · m`, explicit in time.
    Linear(Profile),
}

/// Grid with spacing at most `dx_target` whose endpoints land on nodes.
pub fn build_domain(a: f64, b: f64, dx_target: f64) -> Result<Domain, SpdeError> {
    if !(dx_target > 0.0) {
        return Err(SpdeError::InvalidConfig(format!("dx_target must be > 0, got {dx_target}")));
    }
    let cells = ((a + b) / dx_target - 1e-9).ceil().max(2.0);
    if !cells.is_finite() || cells >= MAX_GRID_POINTS as f64 {
        return Err(SpdeError::GridTooLarge {
            needed: if cells.is_finite() { cells as usize + 1 } else { usize::MAX },
            cap: MAX_GRID_POINTS,
        });
    }
    Ok(Domain::new(a, b, cells as usize + 1)?)
}

/// One vector of space-time white noise increments on the interior nodes:
/// independent `N(0, Δt/Δx)`, fully determined by `(seed, step)`.
pub fn sample_noise_increment(dom: &Domain, dt: f64, seed: u64, step: u64) -> Vec<f64> {
    let sd = (dt / dom.spacing()).sqrt();
    (0..dom.interior_points())
        .map(|i| sd * rng::normal(seed, rng::streams::SPDE_NOISE, step, i as u64))
        .collect()
}

/// Precomputed forward-elimination coefficients of `I − ½Δt D₂`.
///
/// The matrix is constant along a run, so the Thomas sweep is factored once
/// and each step costs two O(N) substitutions.
pub struct Stepper {
    dom: Domain,
    dt: f64,
    /// off-diagonal of the implicit matrix, `−Δt/(2Δx²)`
    off: f64,
    /// modified diagonal from the forward sweep
    denom: Vec<f64>,
}

impl Stepper {
    pub fn new(dom: &Domain, dt: f64) -> Self {
        let n = dom.interior_points();
        let dx = dom.spacing();
        let r = dt / (2.0 * dx * dx);
        let diag = 1.0 + 2.0 * r;
        let off = -r;
        // Thomas forward sweep on the constant tridiagonal
        let mut denom = vec![diag; n];
        for i in 1..n {
            denom[i] = diag - off * off / denom[i - 1];
        }
        Self { dom: dom.clone(), dt, off, denom }
    }

    /// Solve `(I − ½Δt D₂) x = rhs` in place (rhs holds interior values).
    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 1..n {
            rhs[i] -= self.off * rhs[i - 1] / self.denom[i - 1];
        }
        rhs[n - 1] /= self.denom[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.off * rhs[i + 1]) / self.denom[i];
        }
    }

    /// Advance one step with explicit reaction and noise, implicit diffusion,
    /// and the given Dirichlet boundary pair.
    ///
    /// `scratch` must be reusable storage; it avoids per-step allocation in
    /// long runs. `out` must live on the same grid as `state`.
    #[allow(clippy::too_many_arguments)]
    pub fn step_into(
        &self,
        state: &Profile,
        eps: f64,
        seed: u64,
        step: u64,
        reaction: &Reaction,
        boundary: (f64, f64),
        scratch: &mut Vec<f64>,
        out: &mut Profile,
    ) -> Result<(), SpdeError> {
        let n = self.dom.interior_points();
        let dx = self.dom.spacing();
        let v = state.values();
        scratch.resize(n, 0.0);
        let sqrt_eps = eps.sqrt();
        let noise_sd = (self.dt / dx).sqrt();
        for i in 0..n {
            let m = v[i + 1];
            let f = match reaction {
                Reaction::Cubic => m * m * m - m,
                Reaction::None => 0.0,
                Reaction::Linear(c) => c.values()[i + 1] * m,
            };
            let mut rhs = m - self.dt * f;
            if eps > 0.0 {
                rhs += sqrt_eps
                    * noise_sd
                    * rng::normal(seed, rng::streams::SPDE_NOISE, step, i as u64);
            }
            scratch[i] = rhs;
        }
        // Dirichlet data enters the first/last interior rows of the implicit solve
        let r = self.dt / (2.0 * dx * dx);
        scratch[0] += r * boundary.0;
        scratch[n - 1] += r * boundary.1;
        self.solve(scratch);

        let ov = out.values_mut();
        ov[0] = boundary.0;
        ov[n + 1] = boundary.1;
        for i in 0..n {
            let x = scratch[i];
            if !x.is_finite() || x.abs() > BLOW_UP_THRESHOLD {
                return Err(SpdeError::BlowUp { step });
            }
            ov[i + 1] = x;
        }
        Ok(())
    }
}

/// Single semi-implicit step of the full SPDE with the `(−1, +1)` walls.
pub fn step_semi_implicit(
    state: &Profile,
    cfg: &SpdeConfig,
    step: u64,
) -> Result<Profile, SpdeError> {
    cfg.validate()?;
    let stepper = Stepper::new(&cfg.domain, cfg.dt);
    let mut out = state.clone();
    let mut scratch = Vec::new();
    stepper.step_into(
        state,
        cfg.eps,
        cfg.seed,
        step,
        &Reaction::Cubic,
        (-1.0, 1.0),
        &mut scratch,
        &mut out,
    )?;
    Ok(out)
}

/// Run the SPDE over the configured horizon, keeping every
/// `snapshot_stride`-th state (including the initial one).
///
/// Deterministic: `(seed, cfg) ↦ trajectory` is a pure function. On blow-up
/// the error carries the failing step index.
pub fn simulate(cfg: &SpdeConfig) -> Result<FieldTrajectory, SpdeError> {
    cfg.validate()?;
    let n_steps = (cfg.horizon / cfg.dt + 1e-9).floor() as u64;
    let stepper = Stepper::new(&cfg.domain, cfg.dt);
    let mut state = cfg.initial.clone();
    let mut next = cfg.initial.clone();
    let mut scratch = Vec::new();
    let mut snapshots = vec![(0.0, state.clone())];
    for k in 0..n_steps {
        stepper.step_into(
            &state,
            cfg.eps,
            cfg.seed,
            k,
            &Reaction::Cubic,
            (-1.0, 1.0),
            &mut scratch,
            &mut next,
        )?;
        std::mem::swap(&mut state, &mut next);
        let done = k + 1;
        if done % cfg.snapshot_stride as u64 == 0 {
            snapshots.push((done as f64 * cfg.dt, state.clone()));
        }
    }
    Ok(FieldTrajectory { snapshots, config: cfg.clone() })
}

/// Relax the deterministic (ε = 0) flow from `m̄` centered at the midpoint
/// until the step residual `‖m_{k+1} − m_k‖∞ / Δt` drops below `tol`.
///
/// Returns the stationary profile `m*_{a,b}`.
pub fn relax_deterministic(dom: &Domain, tol: f64) -> Result<Profile, SpdeError> {
    if !(tol > 0.0) {
        return Err(SpdeError::InvalidConfig(format!("tol must be > 0, got {tol}")));
    }
    let midpoint = 0.5 * (dom.b() - dom.a());
    let mut state = WaveParams::new(midpoint).sample(dom);
    {
        let v = state.values_mut();
        let n = v.len();
        v[0] = -1.0;
        v[n - 1] = 1.0;
    }
    let dt = 0.1;
    let stepper = Stepper::new(dom, dt);
    let mut next = state.clone();
    let mut scratch = Vec::new();
    let max_steps: u64 = 2_000_000;
    let mut residual = f64::INFINITY;
    for k in 0..max_steps {
        stepper.step_into(
            &state,
            0.0,
            0,
            k,
            &Reaction::Cubic,
            (-1.0, 1.0),
            &mut scratch,
            &mut next,
        )?;
        residual = state
            .values()
            .iter()
            .zip(next.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / dt;
        std::mem::swap(&mut state, &mut next);
        if residual <= tol {
            return Ok(state);
        }
    }
    Err(SpdeError::NoConvergence { max_steps, residual })
}
