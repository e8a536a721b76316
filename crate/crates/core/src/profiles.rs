//! Closed-form building blocks of the Allen-Cahn interface problem.
//!
//! Everything here is exact up to floating point: the quartic double well
//! `V(m) = ¼(m²−1)²`, the tanh standing wave `m̄_ζ(x) = tanh(x−ζ)` solving
//! `½m̄'' = V'(m̄)`, the strictly increasing integral
//!
//! ```text
//! h_ζ(x) = ∫_ζ^x dy / m̄'_ζ(y)²  =  sinh(4u)/32 + sinh(2u)/4 + 3u/8,   u = x−ζ,
//! ```
//!
//! and the boundary layer φ_ζ, the harmonic extension of the Dirichlet data
//! mismatch across the kernel of `½∂² − V''(m̄_ζ)`:
//!
//! ```text
//! φ_ζ = m̄'_ζ [ c_ζ q_ζ + d_ζ ],    q_ζ(x) = (h_ζ(x) − h_ζ(−a)) / (h_ζ(b) − h_ζ(−a)).
//! ```
//!
//! `h` grows like `e^{4|u|}/64`, so it overflows f64 for `|u| ≳ 177`; it only
//! ever enters through the ratio `q_ζ ∈ [0,1]`, which is computed in log
//! space once any `h` saturates.

use thiserror::Error;

/// Whole-line value of `∫ m̄'(x)² dx`.
pub const WAVE_DERIV_L2_SQ: f64 = 4.0 / 3.0;

/// Argument beyond which `eval_h` saturates to ±∞ in f64.
pub const H_OVERFLOW_ARG: f64 = 177.0;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("domain: {0}")]
    Domain(String),
    #[error("center {zeta} outside the open interval ({lo}, {hi})")]
    CenterOutsideDomain { zeta: f64, lo: f64, hi: f64 },
    #[error("profile has {got} values for a grid of {expected} points")]
    LengthMismatch { got: usize, expected: usize },
}

/// Uniform grid on `[−a, b]`, the discretization stage for every field.
///
/// Node 0 sits exactly at `−a`, node `N−1` exactly at `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    left: f64,
    right: f64,
    n: usize,
}

impl Domain {
    /// Grid with endpoints `−a`, `b` and `n ≥ 3` equally spaced nodes.
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self, ProfileError> {
        if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= 0.0 {
            return Err(ProfileError::Domain(format!(
                "endpoints must be finite and positive, got a={a}, b={b}"
            )));
        }
        if a > b {
            return Err(ProfileError::Domain(format!(
                "expected a <= b, got a={a} > b={b}"
            )));
        }
        if n < 3 {
            return Err(ProfileError::Domain(format!("need at least 3 nodes, got {n}")));
        }
        Ok(Self { left: a, right: b, n })
    }

    /// Left wall position `a` (the wall itself is at `−a`).
    pub fn a(&self) -> f64 {
        self.left
    }

    /// Right wall position `b`.
    pub fn b(&self) -> f64 {
        self.right
    }

    /// Number of grid nodes.
    pub fn grid_points(&self) -> usize {
        self.n
    }

    /// Number of interior (non-Dirichlet) nodes.
    pub fn interior_points(&self) -> usize {
        self.n - 2
    }

    /// Grid spacing `Δx = (a+b)/(N−1)`.
    pub fn spacing(&self) -> f64 {
        (self.left + self.right) / (self.n - 1) as f64
    }

    /// Coordinate of node `i`; node 0 and node N−1 land exactly on the walls.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i == 0 {
            -self.left
        } else if i == self.n - 1 {
            self.right
        } else {
            -self.left + self.spacing() * i as f64
        }
    }

    /// All node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = ((x + self.left) / self.spacing()).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }
}

/// Real-valued function sampled on a [`Domain`] grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    domain: Domain,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self, ProfileError> {
        if values.len() != domain.grid_points() {
            return Err(ProfileError::LengthMismatch {
                got: values.len(),
                expected: domain.grid_points(),
            });
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: &Domain, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..domain.grid_points()).map(|i| f(domain.node(i))).collect();
        Self { domain: domain.clone(), values }
    }

    pub fn zeros(domain: &Domain) -> Self {
        Self { domain: domain.clone(), values: vec![0.0; domain.grid_points()] }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Trapezoid inner product `⟨self, other⟩` on the grid.
    pub fn inner(&self, other: &Profile) -> f64 {
        debug_assert_eq!(self.domain, other.domain);
        trapezoid_inner(&self.values, &other.values, self.domain.spacing())
    }

    /// Trapezoid `L₂` norm.
    pub fn l2_norm(&self) -> f64 {
        trapezoid_inner(&self.values, &self.values, self.domain.spacing()).sqrt()
    }

    /// Trapezoid `L₁` norm.
    pub fn l1_norm(&self) -> f64 {
        let dx = self.domain.spacing();
        let n = self.values.len();
        let mut s = 0.5 * (self.values[0].abs() + self.values[n - 1].abs());
        for v in &self.values[1..n - 1] {
            s += v.abs();
        }
        s * dx
    }

    /// Sup norm over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Trapezoid rule for `∫ f g` on a uniform grid.
pub fn trapezoid_inner(f: &[f64], g: &[f64], dx: f64) -> f64 {
    debug_assert_eq!(f.len(), g.len());
    let n = f.len();
    let mut s = 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]);
    for i in 1..n - 1 {
        s += f[i] * g[i];
    }
    s * dx
}

/// Standing wave parameters: just the interface center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub center: f64,
}

impl WaveParams {
    pub fn new(center: f64) -> Self {
        Self { center }
    }

    /// Sample `m̄_ζ` on a grid.
    pub fn sample(&self, dom: &Domain) -> Profile {
        let zeta = self.center;
        Profile::from_fn(dom, |x| (x - zeta).tanh())
    }

    /// Sample `m̄'_ζ` on a grid.
    pub fn sample_deriv(&self, dom: &Domain) -> Profile {
        let zeta = self.center;
        Profile::from_fn(dom, |x| sech2(x - zeta))
    }
}

/// `sech²(u)`, accurate in relative terms for all arguments.
#[inline]
pub fn sech2(u: f64) -> f64 {
    let e = (-2.0 * u.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Standing wave and its spatial derivative: `(tanh(x−ζ), sech²(x−ζ))`.
///
/// The derivative is strictly positive and satisfies `m̄' = 1 − m̄²`.
#[inline]
pub fn eval_wave(zeta: f64, x: f64) -> (f64, f64) {
    let u = x - zeta;
    (u.tanh(), sech2(u))
}

/// Second derivative `m̄''_ζ(x) = −2 m̄ m̄'`.
#[inline]
pub fn eval_wave_second_deriv(zeta: f64, x: f64) -> f64 {
    let (m, mp) = eval_wave(zeta, x);
    -2.0 * m * mp
}

/// Quartic double well: `(V, V', V'') = (¼(m²−1)², m³−m, 3m²−1)`.
#[inline]
pub fn eval_potential(m: f64) -> (f64, f64, f64) {
    let w = m * m - 1.0;
    (0.25 * w * w, m * w, 3.0 * m * m - 1.0)
}

/// `h_ζ(x) = ∫_ζ^x m̄'_ζ(y)^{−2} dy` in closed form.
///
/// Saturates to ±∞ once `sinh(4(x−ζ))` leaves f64 range (`|x−ζ| > 177`);
/// downstream ratios switch to [`eval_h_log_abs`] in that regime.
#[inline]
pub fn eval_h(zeta: f64, x: f64) -> f64 {
    let u = x - zeta;
    (4.0 * u).sinh() / 32.0 + (2.0 * u).sinh() / 4.0 + 0.375 * u
}

/// `(sign, ln|h_ζ(x)|)`, finite for every finite argument.
///
/// For `|u| > 40` the `sinh(4u)/32` term dominates all others by a factor
/// `e^{2|u|}/8 > 10^{33}`, so `ln|h| = 4|u| − ln 64` to full f64 precision.
pub fn eval_h_log_abs(zeta: f64, x: f64) -> (f64, f64) {
    let u = x - zeta;
    if u == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    if u.abs() <= 40.0 {
        let v = eval_h(zeta, x);
        (v.signum(), v.abs().ln())
    } else {
        (u.signum(), 4.0 * u.abs() - 64.0_f64.ln())
    }
}

/// Signed magnitude in log space: value = `sign · exp(ln_abs)`.
#[derive(Debug, Clone, Copy)]
struct LogMag {
    sign: f64,
    ln_abs: f64,
}

impl LogMag {
    fn of_h(zeta: f64, x: f64) -> Self {
        let (sign, ln_abs) = eval_h_log_abs(zeta, x);
        Self { sign, ln_abs }
    }

    /// `self − other` staying in log space.
    fn sub(self, other: LogMag) -> LogMag {
        if other.sign == 0.0 || other.ln_abs == f64::NEG_INFINITY {
            return self;
        }
        if self.sign == 0.0 || self.ln_abs == f64::NEG_INFINITY {
            return LogMag { sign: -other.sign, ln_abs: other.ln_abs };
        }
        let (hi, lo, flip) = if self.ln_abs >= other.ln_abs {
            (self, other, 1.0)
        } else {
            (other, self, -1.0)
        };
        let r = (lo.ln_abs - hi.ln_abs).exp(); // in [0, 1]
        if hi.sign * lo.sign < 0.0 {
            // magnitudes add
            LogMag { sign: flip * hi.sign, ln_abs: hi.ln_abs + r.ln_1p() }
        } else {
            // magnitudes cancel
            let diff = 1.0 - r;
            if diff <= 0.0 {
                LogMag { sign: 0.0, ln_abs: f64::NEG_INFINITY }
            } else {
                LogMag { sign: flip * hi.sign, ln_abs: hi.ln_abs + diff.ln() }
            }
        }
    }
}

/// `(sign, ln|h(u1) − h(u2)|)` with `h = h₀`, stable when either `h`
/// saturates f64 range. Used by the Green kernel's log-space route.
pub(crate) fn h_diff_log(u1: f64, u2: f64) -> (f64, f64) {
    let d = LogMag::of_h(0.0, u1).sub(LogMag::of_h(0.0, u2));
    (d.sign, d.ln_abs)
}

/// `q_ζ(x) = (h_ζ(x) − h_ζ(−a)) / (h_ζ(b) − h_ζ(−a))`, overflow-safe.
///
/// Monotone from 0 at `x = −a` to 1 at `x = b`.
pub fn eval_q(zeta: f64, dom: &Domain, x: f64) -> f64 {
    let (a, b) = (dom.a(), dom.b());
    if x <= -a {
        return 0.0;
    }
    if x >= b {
        return 1.0;
    }
    let hx = eval_h(zeta, x);
    let ha = eval_h(zeta, -a);
    let hb = eval_h(zeta, b);
    if hx.is_finite() && ha.is_finite() && hb.is_finite() {
        let denom = hb - ha;
        if denom.is_finite() && denom > 0.0 {
            return ((hx - ha) / denom).clamp(0.0, 1.0);
        }
    }
    // log-space fallback for saturated h
    let num = LogMag::of_h(zeta, x).sub(LogMag::of_h(zeta, -a));
    let den = LogMag::of_h(zeta, b).sub(LogMag::of_h(zeta, -a));
    if num.sign <= 0.0 {
        return 0.0;
    }
    (num.ln_abs - den.ln_abs).exp().clamp(0.0, 1.0)
}

/// Coefficients `c_ζ`, `d_ζ` of the boundary layer.
pub fn phi_coefficients(zeta: f64, dom: &Domain) -> (f64, f64) {
    let (m_left, _) = eval_wave(zeta, -dom.a());
    let (m_right, _) = eval_wave(zeta, dom.b());
    let c = 1.0 / (1.0 - m_left) + 1.0 / (1.0 + m_right);
    let d = -1.0 / (1.0 - m_left);
    (c, d)
}

/// Boundary layer `φ_ζ`: solves `½φ'' − V''(m̄_ζ)φ = 0` with
/// `φ(−a) = −1 − m̄_ζ(−a)`, `φ(b) = 1 − m̄_ζ(b)`.
pub fn eval_phi(zeta: f64, dom: &Domain) -> Result<Profile, ProfileError> {
    if !(zeta > -dom.a() && zeta < dom.b()) {
        return Err(ProfileError::CenterOutsideDomain {
            zeta,
            lo: -dom.a(),
            hi: dom.b(),
        });
    }
    let (c, d) = phi_coefficients(zeta, dom);
    Ok(Profile::from_fn(dom, |x| {
        let (_, mp) = eval_wave(zeta, x);
        mp * (c * eval_q(zeta, dom, x) + d)
    }))
}
