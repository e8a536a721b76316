//! One-dimensional limit SDEs of the interface and the wall constructions:
//! soft exponential repulsion, the two-wall sinh drift, penalized and
//! exponential walls, the Skorokhod reflection map and the comparison
//! envelope.
//!
//! Comparison experiments share a single noise realization across processes
//! (common random numbers): the limit theorems they probe are pathwise, so
//! variance-free comparisons are the faithful test.

use crate::rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdeError {
    #[error("path must start at zero, got {0}")]
    NonZeroStart(f64),
    #[error("state became non-finite at step {step}")]
    BlowUp { step: usize },
    #[error("drift too stiff even after {halvings} local halvings at step {step}")]
    StiffnessCap { step: usize, halvings: u32 },
    #[error("paths have mismatched shape: {0}")]
    ShapeMismatch(String),
}

/// Uniformly sampled scalar path. `values[k]` is the state at time `k·dt`;
/// `sigma2` records the variance rate of the driving noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub dt: f64,
    pub values: Vec<f64>,
    pub sigma2: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len().saturating_sub(1)) as f64 * self.dt
    }

    /// Increment `values[k+1] − values[k]`.
    pub fn increment(&self, k: usize) -> f64 {
        self.values[k + 1] - self.values[k]
    }

    /// State at the sample nearest to time `t`.
    pub fn at_time(&self, t: f64) -> f64 {
        let idx = ((t / self.dt).round() as usize).min(self.values.len() - 1);
        self.values[idx]
    }
}

/// Drift field of the limit SDEs.
#[derive(Debug, Clone, Copy)]
pub enum DriftSpec {
    /// `12 e^{−4x}`: repulsion from the near wall on the ε⁻¹ time scale.
    SoftWall,
    /// `−24 sinh(4x)`: both walls at distance `¼ log ε⁻¹`.
    Sinh,
    /// `γ·max(0, −x)`: penalized reflection.
    Penalized { gamma: f64 },
    /// `12 γ e^{−4γx}`: the soft wall under diffusive rescaling by `γ = √λ`.
    ExpWall { gamma: f64 },
    /// Arbitrary drift, mainly for estimator oracles.
    Custom(fn(f64) -> f64),
}

/// Evaluate the drift at a point.
pub fn drift_eval(spec: &DriftSpec, x: f64) -> f64 {
    match spec {
        DriftSpec::SoftWall => 12.0 * (-4.0 * x).exp(),
        DriftSpec::Sinh => -24.0 * (4.0 * x).sinh(),
        DriftSpec::Penalized { gamma } => gamma * (-x).max(0.0),
        DriftSpec::ExpWall { gamma } => 12.0 * gamma * (-4.0 * gamma * x).exp(),
        DriftSpec::Custom(f) => f(x),
    }
}

/// Brownian path with variance rate `sigma2`: partial sums of `steps`
/// independent `N(0, σ²Δt)` increments starting from 0. Deterministic per
/// `(seed)` through the counter generator.
pub fn sample_brownian(sigma2: f64, dt: f64, steps: usize, seed: u64) -> Path {
    assert!(sigma2 >= 0.0 && dt > 0.0);
    let sd = (sigma2 * dt).sqrt();
    let mut values = Vec::with_capacity(steps + 1);
    let mut acc = 0.0;
    values.push(acc);
    for k in 0..steps {
        acc += sd * rng::normal(seed, rng::streams::BROWNIAN, k as u64, 0);
        values.push(acc);
    }
    Path { dt, values, sigma2 }
}

/// Maximum local halvings before a step is declared hopelessly stiff.
const MAX_HALVINGS: u32 = 48;

/// Euler-Maruyama on a supplied noise path:
/// `y_{k+1} = y_k + drift(y_k)Δt + ΔB_k`.
///
/// Steps with `|drift|·Δt > ½` are bisected locally (the Brownian increment
/// split linearly), which tames the superlinear sinh and exp-wall drifts
/// without changing the shared noise. Sharing `noise` across calls gives
/// pathwise-comparable solutions.
pub fn euler_maruyama(spec: &DriftSpec, y0: f64, noise: &Path) -> Result<Path, SdeError> {
    let n = noise.values.len();
    let mut values = Vec::with_capacity(n);
    values.push(y0);
    let mut y = y0;
    for k in 0..n - 1 {
        let db = noise.increment(k);
        y = advance(spec, y, noise.dt, db, k)?;
        if !y.is_finite() {
            return Err(SdeError::BlowUp { step: k });
        }
        values.push(y);
    }
    Ok(Path { dt: noise.dt, values, sigma2: noise.sigma2 })
}

fn advance(spec: &DriftSpec, y: f64, dt: f64, db: f64, step: usize) -> Result<f64, SdeError> {
    let mut stack: Vec<(f64, f64, u32)> = vec![(dt, db, 0)];
    let mut state = y;
    while let Some((h, d, depth)) = stack.pop() {
        let drift = drift_eval(spec, state);
        if drift.abs() * h > 0.5 && depth < MAX_HALVINGS {
            stack.push((0.5 * h, 0.5 * d, depth + 1));
            stack.push((0.5 * h, 0.5 * d, depth + 1));
            continue;
        }
        if drift.abs() * h > 0.5 {
            return Err(SdeError::StiffnessCap { step, halvings: MAX_HALVINGS });
        }
        state += drift * h + d;
        if !state.is_finite() {
            return Err(SdeError::BlowUp { step });
        }
    }
    Ok(state)
}

/// Skorokhod reflection of a path started at 0:
/// `Y(t) = B(t) + sup_{s≤t}(−B(s))⁺`, with the running supremum returned as
/// the local time.
pub fn skorokhod_map(b: &Path) -> Result<(Path, Path), SdeError> {
    let first = *b.values.first().ok_or_else(|| SdeError::ShapeMismatch("empty path".into()))?;
    if first != 0.0 {
        return Err(SdeError::NonZeroStart(first));
    }
    let mut running = 0.0_f64;
    let mut reflected = Vec::with_capacity(b.values.len());
    let mut local = Vec::with_capacity(b.values.len());
    for &x in &b.values {
        running = running.max(-x);
        local.push(running);
        reflected.push(x + running);
    }
    Ok((
        Path { dt: b.dt, values: reflected, sigma2: b.sigma2 },
        Path { dt: b.dt, values: local, sigma2: b.sigma2 },
    ))
}

/// Comparison envelope `Z_{δ,γ}(t) = δ + B(t) + ct + sup_{s≤t}[−B(s) − cs]`
/// with `c = 12 γ e^{−4γδ}`; it dominates the exp-wall process started
/// below δ.
pub fn envelope_upper(delta: f64, gamma: f64, b: &Path) -> Path {
    assert!(delta > 0.0 && gamma > 0.0);
    let c = 12.0 * gamma * (-4.0 * gamma * delta).exp();
    let mut running = 0.0_f64; // sup at t=0 is −B(0) − 0 = 0
    let mut values = Vec::with_capacity(b.values.len());
    for (k, &x) in b.values.iter().enumerate() {
        let t = k as f64 * b.dt;
        running = running.max(-x - c * t);
        values.push(delta + x + c * t + running);
    }
    Path { dt: b.dt, values, sigma2: b.sigma2 }
}

/// Violation report of the pathwise sandwich `Y_γ ≤ X_γ ≤ Z_{δ,γ}`.
#[derive(Debug, Clone)]
pub struct WallComparison {
    /// `max_t (Y_γ − X_γ)⁺`: defect of the lower inequality.
    pub lower_violation: f64,
    /// `max_t (X_γ − Z_{δ,γ})⁺`: defect of the upper inequality.
    pub upper_violation: f64,
    pub penalized: Path,
    pub exp_wall: Path,
    pub envelope: Path,
}

/// Integrate the penalized and exp-wall processes on shared noise, build the
/// envelope, and report the worst violations of `Y_γ ≤ X_γ ≤ Z_{δ,γ}`.
pub fn wall_comparison(gamma: f64, delta: f64, b: &Path) -> Result<WallComparison, SdeError> {
    let penalized = euler_maruyama(&DriftSpec::Penalized { gamma }, 0.0, b)?;
    let exp_wall = euler_maruyama(&DriftSpec::ExpWall { gamma }, 0.0, b)?;
    let envelope = envelope_upper(delta, gamma, b);
    let mut lower = 0.0_f64;
    let mut upper = 0.0_f64;
    for k in 0..b.values.len() {
        lower = lower.max(penalized.values[k] - exp_wall.values[k]);
        upper = upper.max(exp_wall.values[k] - envelope.values[k]);
    }
    Ok(WallComparison {
        lower_violation: lower.max(0.0),
        upper_violation: upper.max(0.0),
        penalized,
        exp_wall,
        envelope,
    })
}
