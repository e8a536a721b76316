//! Interface-center extraction and path rescalings.
//!
//! The center of a profile `f` is the root of
//!
//! ```text
//! g(ζ) = ⟨f − m̄_ζ, m̄'_ζ⟩,
//! ```
//!
//! i.e. the translate of the standing wave whose residual is orthogonal to
//! the translation mode. Within the tube `‖f − m̄_z‖∞ < δ` the root is
//! unique and Newton converges quadratically; `g'(ζ) ≈ ‖m̄'‖₂² = 4/3` there.

use crate::profiles::{eval_wave, eval_wave_second_deriv, Domain, Profile};
use crate::spde::FieldTrajectory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CenterError {
    #[error("profile outside the tube: ‖f − m̄_guess‖∞ = {deviation:.3} ≥ δ = {delta}")]
    OutsideTube { deviation: f64, delta: f64 },
    #[error("no sign change of the centering functional in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("center iteration did not reach tolerance (|g| = {g:.3e})")]
    NoConvergence { g: f64 },
    #[error("first snapshot already outside the tube")]
    Initialization,
    #[error("block length {t_block} is below twice the snapshot spacing {spacing}")]
    Resolution { t_block: f64, spacing: f64 },
    #[error("path is empty or not uniformly sampled")]
    BadPath,
}

/// Tube and stopping parameters: the profile must stay `δ`-close to some
/// translate whose center keeps `ℓ` away from the walls, and the tracked
/// center is stopped once `|X| ≥ α·a`.
#[derive(Debug, Clone, Copy)]
pub struct StoppingSpec {
    pub tube_radius: f64,
    pub wall_margin: f64,
    pub center_fraction: f64,
}

impl Default for StoppingSpec {
    fn default() -> Self {
        // wide enough for moderate-ε runs; override per experiment
        Self { tube_radius: 0.3, wall_margin: 1.0, center_fraction: 0.8 }
    }
}

impl StoppingSpec {
    pub fn validate(&self) -> bool {
        self.tube_radius > 0.0
            && self.wall_margin > 0.0
            && self.center_fraction > 0.0
            && self.center_fraction < 1.0
    }
}

/// Time scale a center path currently lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScale {
    /// SPDE time `t`.
    Raw,
    /// Soft-wall scale `τ = ε t`.
    Soft { eps: f64 },
    /// Hard-wall scale `θ = ε t / λ` with values divided by `√λ`,
    /// `λ = log ε⁻¹`.
    Hard { eps: f64, lambda: f64 },
}

/// Interface center as a function of time, possibly stopped.
#[derive(Debug, Clone)]
pub struct InterfacePath {
    pub times: Vec<f64>,
    pub centers: Vec<f64>,
    pub scale: TimeScale,
    pub stopped_at: Option<f64>,
}

impl InterfacePath {
    /// Spacing between consecutive samples (uniform by construction).
    pub fn spacing(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        Some(self.times[1] - self.times[0])
    }
}

fn centering_functional(f: &Profile, zeta: f64) -> (f64, f64) {
    // g(ζ) and g'(ζ) = ‖m̄'_ζ‖² − ⟨f − m̄_ζ, m̄''_ζ⟩ in one pass
    let dom = f.domain();
    let dx = dom.spacing();
    let n = dom.grid_points();
    let mut g = 0.0;
    let mut norm_sq = 0.0;
    let mut second = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let x = dom.node(i);
        let (m, mp) = eval_wave(zeta, x);
        let diff = f.values()[i] - m;
        g += w * diff * mp;
        norm_sq += w * mp * mp;
        second += w * diff * eval_wave_second_deriv(zeta, x);
    }
    (g * dx, (norm_sq - second) * dx)
}

fn tube_check(f: &Profile, guess: f64, spec: &StoppingSpec) -> Result<(), CenterError> {
    let dom = f.domain();
    let deviation = (0..dom.grid_points())
        .map(|i| {
            let (m, _) = eval_wave(guess, dom.node(i));
            (f.values()[i] - m).abs()
        })
        .fold(0.0, f64::max);
    if deviation >= spec.tube_radius {
        return Err(CenterError::OutsideTube { deviation, delta: spec.tube_radius });
    }
    Ok(())
}

/// Solve `⟨f − m̄_ζ, m̄'_ζ⟩ = 0` for ζ by Newton with bisection fallback.
///
/// Stops when `|g(ζ)| ≤ tol · ‖m̄'_ζ‖₂²`.
pub fn solve_center(
    f: &Profile,
    guess: f64,
    tol: f64,
    spec: &StoppingSpec,
) -> Result<f64, CenterError> {
    tube_check(f, guess, spec)?;
    let mut zeta = guess;
    for _ in 0..60 {
        let (g, gp) = centering_functional(f, zeta);
        let scale = norm_sq_wave_deriv(f.domain(), zeta);
        if g.abs() <= tol * scale {
            return Ok(zeta);
        }
        if gp.abs() < 0.1 {
            return bisect_center(f, guess, tol, spec);
        }
        zeta -= g / gp;
        if !zeta.is_finite() {
            return bisect_center(f, guess, tol, spec);
        }
    }
    let (g, _) = centering_functional(f, zeta);
    Err(CenterError::NoConvergence { g })
}

fn norm_sq_wave_deriv(dom: &Domain, zeta: f64) -> f64 {
    let dx = dom.spacing();
    let n = dom.grid_points();
    let mut s = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let (_, mp) = eval_wave(zeta, dom.node(i));
        s += w * mp * mp;
    }
    s * dx
}

fn bisect_center(
    f: &Profile,
    guess: f64,
    tol: f64,
    spec: &StoppingSpec,
) -> Result<f64, CenterError> {
    let half_width = (2.0 * spec.tube_radius).max(0.5);
    let mut lo = guess - half_width;
    let mut hi = guess + half_width;
    let (mut glo, _) = centering_functional(f, lo);
    let (ghi, _) = centering_functional(f, hi);
    if glo * ghi > 0.0 {
        return Err(CenterError::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (gm, _) = centering_functional(f, mid);
        if gm.abs() <= tol * norm_sq_wave_deriv(f.domain(), mid) {
            return Ok(mid);
        }
        if glo * gm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    let (g, _) = centering_functional(f, 0.5 * (lo + hi));
    Err(CenterError::NoConvergence { g })
}

/// First- and second-order center corrections around a reference translate:
/// `ζ ≈ z − ¾⟨m̄'_z, f−m̄_z⟩ − (9/16)⟨m̄'_z, f−m̄_z⟩⟨m̄''_z, f−m̄_z⟩`.
pub fn center_expansion(z: f64, f: &Profile) -> (f64, f64) {
    let dom = f.domain();
    let dx = dom.spacing();
    let n = dom.grid_points();
    let mut i1 = 0.0;
    let mut i2 = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let x = dom.node(i);
        let (m, mp) = eval_wave(z, x);
        let diff = f.values()[i] - m;
        i1 += w * diff * mp;
        i2 += w * diff * eval_wave_second_deriv(z, x);
    }
    i1 *= dx;
    i2 *= dx;
    (-0.75 * i1, -9.0 / 16.0 * i1 * i2)
}

/// Track the center along a trajectory, warm-starting each solve from the
/// previous center; stop (recording `stopped_at`) when the profile leaves
/// the tube or the center reaches `α·a`.
pub fn track_centers(
    traj: &FieldTrajectory,
    spec: &StoppingSpec,
    tol: f64,
) -> Result<InterfacePath, CenterError> {
    let mut times = Vec::with_capacity(traj.snapshots.len());
    let mut centers = Vec::with_capacity(traj.snapshots.len());
    let mut stopped_at = None;
    let a = traj.config.domain.a();
    let mut guess = initial_guess(&traj.snapshots[0].1);
    for (k, (t, snap)) in traj.snapshots.iter().enumerate() {
        let solved = solve_center(snap, guess, tol, spec);
        let zeta = match solved {
            Ok(z) => z,
            Err(CenterError::OutsideTube { .. }) if k == 0 => {
                return Err(CenterError::Initialization)
            }
            Err(CenterError::OutsideTube { .. }) => {
                stopped_at = Some(*t);
                break;
            }
            Err(e) => return Err(e),
        };
        if zeta.abs() >= spec.center_fraction * a {
            stopped_at = Some(*t);
            times.push(*t);
            centers.push(zeta);
            break;
        }
        times.push(*t);
        centers.push(zeta);
        guess = zeta;
    }
    Ok(InterfacePath { times, centers, scale: TimeScale::Raw, stopped_at })
}

/// Zero-crossing of the profile, a robust warm start for the first solve.
fn initial_guess(f: &Profile) -> f64 {
    let dom = f.domain();
    let v = f.values();
    for i in 0..v.len() - 1 {
        if v[i] <= 0.0 && v[i + 1] > 0.0 {
            let x0 = dom.node(i);
            let x1 = dom.node(i + 1);
            let t = -v[i] / (v[i + 1] - v[i]);
            return x0 + t * (x1 - x0);
        }
    }
    0.0
}

/// Which limit scaling to apply to a raw path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleMode {
    Soft,
    Hard,
}

/// Move a raw path to the soft scale `τ = εt` (values unchanged) or the
/// hard scale `θ = εt/λ`, values divided by `√λ`, `λ = log ε⁻¹`.
pub fn rescale_path(path: &InterfacePath, eps: f64, mode: RescaleMode) -> InterfacePath {
    assert!(eps > 0.0 && eps < 1.0, "rescaling needs ε in (0,1)");
    match mode {
        RescaleMode::Soft => InterfacePath {
            times: path.times.iter().map(|t| t * eps).collect(),
            centers: path.centers.clone(),
            scale: TimeScale::Soft { eps },
            stopped_at: path.stopped_at.map(|t| t * eps),
        },
        RescaleMode::Hard => {
            let lambda = (1.0 / eps).ln();
            let root = lambda.sqrt();
            InterfacePath {
                times: path.times.iter().map(|t| t * eps / lambda).collect(),
                centers: path.centers.iter().map(|x| x / root).collect(),
                scale: TimeScale::Hard { eps, lambda },
                stopped_at: path.stopped_at.map(|t| t * eps / lambda),
            }
        }
    }
}

/// Undo [`rescale_path`] using the stored tag. Exact inverse of the forward
/// arithmetic whenever ε (and √λ) are powers of two; otherwise exact to one
/// rounding per sample.
pub fn unscale_path(path: &InterfacePath) -> InterfacePath {
    match path.scale {
        TimeScale::Raw => path.clone(),
        TimeScale::Soft { eps } => InterfacePath {
            times: path.times.iter().map(|t| t / eps).collect(),
            centers: path.centers.clone(),
            scale: TimeScale::Raw,
            stopped_at: path.stopped_at.map(|t| t / eps),
        },
        TimeScale::Hard { eps, lambda } => {
            let root = lambda.sqrt();
            InterfacePath {
                times: path.times.iter().map(|t| t * lambda / eps).collect(),
                centers: path.centers.iter().map(|x| x * root).collect(),
                scale: TimeScale::Raw,
                stopped_at: path.stopped_at.map(|t| t * lambda / eps),
            }
        }
    }
}

/// Subsample the centers at the times nearest `n·T`, `n = 0, 1, …`.
pub fn block_sequence(path: &InterfacePath, t_block: f64) -> Result<Vec<(usize, f64)>, CenterError> {
    let spacing = path.spacing().ok_or(CenterError::BadPath)?;
    if t_block < 2.0 * spacing - 1e-12 {
        return Err(CenterError::Resolution { t_block, spacing });
    }
    let t_end = *path.times.last().unwrap();
    let mut out = Vec::new();
    let mut n = 0usize;
    loop {
        let target = n as f64 * t_block;
        if target > t_end + 0.5 * spacing {
            break;
        }
        let idx = ((target - path.times[0]) / spacing).round() as usize;
        if idx >= path.centers.len() {
            break;
        }
        out.push((n, path.centers[idx]));
        n += 1;
    }
    Ok(out)
}
