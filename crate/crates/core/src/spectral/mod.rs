//! Spectral analysis of the linearization `H_ζ = −½Δ + V''(m̄_ζ)` with
//! Dirichlet walls: eigenpairs, semigroups, Green kernels, the Kellogg
//! iteration and the wall asymptotics of the ground eigenvalue.
//!
//! Two Green operators coexist on purpose:
//! - [`green_solve`] inverts the assembled tridiagonal matrix. Kellogg
//!   quantities are built from it so the classical two-sided brackets hold
//!   as exact finite-dimensional identities.
//! - [`green_explicit`] / [`green_apply`] evaluate the closed-form kernel
//!
//!   ```text
//!   G(x,y) = 2 m̄'(x) m̄'(y) [h(x∧y)+h(a)] [h(b)−h(x∨y)] / (h(b)+h(a)),
//!   ```
//!
//!   and serve as the independent route checked against the matrix inverse.

mod eigen;

pub use eigen::{rayleigh_quotient, smallest_eigenvalues, sturm_count};

use crate::profiles::{
    eval_h, eval_potential, eval_wave, sech2, trapezoid_inner, Domain, Profile, WaveParams,
};
use thiserror::Error;

/// Modes with eigenvalue below this cutoff enter semigroup sums and the
/// weighted trace; the remainder is controlled by a Weyl tail bound.
pub const MODE_CUTOFF: f64 = 200.0;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("center {zeta} outside the open interval ({lo}, {hi})")]
    CenterOutsideDomain { zeta: f64, lo: f64, hi: f64 },
    #[error("requested {requested} eigenpairs, interior has {available} nodes")]
    TooManyModes { requested: usize, available: usize },
    #[error("eigen-iteration did not converge: residual {residual:.3e} for mode {mode}")]
    NoConvergence { mode: usize, residual: f64 },
    #[error("spectral truncation too coarse: tail estimate {tail:.3e} exceeds tolerance {tol:.3e}")]
    Truncation { tail: f64, tol: f64 },
    #[error("vanishing norm in Kellogg iteration")]
    DegenerateNorm,
}

/// Symmetric tridiagonal discretization of `H_ζ` on the interior nodes.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    domain: Domain,
    center: f64,
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Diagonal entries, one per interior node.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Off-diagonal entries, one per interior bond.
    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn interior_points(&self) -> usize {
        self.diagonal.len()
    }

    /// Apply the operator to an interior vector (Dirichlet ghosts are zero).
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diagonal[i] * v[i];
            if i > 0 {
                s += self.off_diagonal[i - 1] * v[i - 1];
            }
            if i < n - 1 {
                s += self.off_diagonal[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }
}

/// Eigenvalue with its trapezoid-normalized eigenfunction.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub eigenvalue: f64,
    pub eigenfunction: Profile,
}

/// Output of the Kellogg power iteration on the Green operator.
#[derive(Debug, Clone)]
pub struct KelloggReport {
    /// Eigenvalue estimate `‖Gφ‖₂ / ‖G²φ‖₂`, an upper bound on λ₀.
    pub mu: f64,
    pub e1: Profile,
    pub e2: Profile,
    /// Sup over grid rows of the kernel L₂ row norm.
    pub r: f64,
    /// Overlap `⟨Ψ₀, φ⟩`.
    pub c: f64,
    /// Upper bound on `μ − λ₀`.
    pub bracket_upper: f64,
    /// Upper bound on `‖Ψ₀ − e₂‖∞`.
    pub sup_bound: f64,
    /// Grid eigenvalues backing the brackets.
    pub lambda0: f64,
    pub lambda1: f64,
}

/// Wall geometry selecting the λ₀ asymptotic law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallMode {
    /// One near wall at distance `¼ log ε⁻¹`, the other exponentially far.
    OneWall,
    /// Both walls at distance `¼ log ε⁻¹`.
    TwoWall,
}

/// Assemble `−½D₂ + V''(m̄_ζ)` on the interior nodes.
pub fn assemble_operator(zeta: f64, dom: &Domain) -> Result<TridiagonalOperator, SpectralError> {
    if !(zeta > -dom.a() && zeta < dom.b()) {
        return Err(SpectralError::CenterOutsideDomain {
            zeta,
            lo: -dom.a(),
            hi: dom.b(),
        });
    }
    Ok(assemble_operator_with(dom, zeta, |x| {
        let (m, _) = eval_wave(zeta, x);
        eval_potential(m).2
    }))
}

/// Assemble with an arbitrary potential on the diagonal (test oracles use a
/// constant override; the OU check uses `V''` evaluated on a relaxed state).
pub fn assemble_operator_with(
    dom: &Domain,
    zeta: f64,
    potential: impl Fn(f64) -> f64,
) -> TridiagonalOperator {
    let n = dom.interior_points();
    let dx = dom.spacing();
    let inv2 = 1.0 / (dx * dx);
    let diagonal = (0..n).map(|i| inv2 + potential(dom.node(i + 1))).collect();
    let off_diagonal = vec![-0.5 * inv2; n.saturating_sub(1)];
    TridiagonalOperator { domain: dom.clone(), center: zeta, diagonal, off_diagonal }
}

/// The `k` lowest eigenpairs, ascending, trapezoid-orthonormal, Ψ₀ positive.
///
/// Sturm bisection brackets each eigenvalue, inverse iteration recovers the
/// vector, and the eigenvalue is then replaced by the compensated Rayleigh
/// quotient of the vector. The last step matters: the bisection floor is
/// `O(ε‖T‖) ≈ ε/Δx²`, far above ground eigenvalues of order `e^{−4a}`, while
/// the quotient is accurate to second order in the vector error.
pub fn eigenpairs(
    op: &TridiagonalOperator,
    k: usize,
) -> Result<Vec<SpectralPair>, SpectralError> {
    let n = op.interior_points();
    if k > n {
        return Err(SpectralError::TooManyModes { requested: k, available: n });
    }
    let estimates = smallest_eigenvalues(&op.diagonal, &op.off_diagonal, k);
    let dx = op.domain.spacing();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut pairs = Vec::with_capacity(k);
    for (mode, &lam) in estimates.iter().enumerate() {
        let res = eigen::inverse_iteration(
            &op.diagonal,
            &op.off_diagonal,
            lam,
            &vectors,
            mode as u64,
        );
        if !res.converged {
            return Err(SpectralError::NoConvergence { mode, residual: res.residual });
        }
        let mut v = res.vector;
        // trapezoid normalization: endpoints are zero, so ‖Ψ‖₂² = Δx Σ v²
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        fix_sign(mode, &mut v);
        let mut full = vec![0.0; op.domain.grid_points()];
        full[1..=n].copy_from_slice(&v);
        pairs.push(SpectralPair {
            eigenvalue: res.value,
            eigenfunction: Profile::new(op.domain.clone(), full).expect("grid sizes match"),
        });
        let mut unit = v;
        let l2: f64 = unit.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in unit.iter_mut() {
            *x /= l2;
        }
        vectors.push(unit);
    }
    Ok(pairs)
}

fn fix_sign(mode: usize, v: &mut [f64]) {
    let flip = if mode == 0 {
        v.iter().sum::<f64>() < 0.0
    } else {
        let mut idx = 0;
        let mut best = 0.0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                idx = i;
            }
        }
        v[idx] < 0.0
    };
    if flip {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Apply `g_t = e^{−tH}` (or `g_t^⊥` when `drop_ground` is set) through the
/// spectral sum `Σ e^{−λ_i t} ⟨Ψ_i, f⟩ Ψ_i`.
///
/// The part of `f` outside the computed span decays no faster than
/// `e^{−λ_max t}`; if that tail estimate exceeds `tol` a truncation error is
/// returned instead of a silently wrong profile.
pub fn semigroup_apply(
    pairs: &[SpectralPair],
    t: f64,
    f: &Profile,
    drop_ground: bool,
    tol: f64,
) -> Result<Profile, SpectralError> {
    assert!(t >= 0.0, "semigroup time must be nonnegative");
    assert!(!pairs.is_empty(), "need at least one spectral pair");
    let coeffs: Vec<f64> = pairs.iter().map(|p| p.eigenfunction.inner(f)).collect();
    // residual of f against the computed span
    let mut proj = vec![0.0; f.values().len()];
    for (p, &c) in pairs.iter().zip(&coeffs) {
        for (acc, &psi) in proj.iter_mut().zip(p.eigenfunction.values()) {
            *acc += c * psi;
        }
    }
    let dx = f.domain().spacing();
    let mut resid_sq = 0.0;
    for (i, (&fv, &pv)) in f.values().iter().zip(&proj).enumerate() {
        let w = if i == 0 || i == f.values().len() - 1 { 0.5 } else { 1.0 };
        resid_sq += w * (fv - pv) * (fv - pv);
    }
    let resid = (resid_sq * dx).sqrt();
    let lambda_max = pairs.last().unwrap().eigenvalue;
    let tail = (-lambda_max * t).exp() * resid;
    if tail > tol {
        return Err(SpectralError::Truncation { tail, tol });
    }
    let mut out = vec![0.0; f.values().len()];
    for (i, (p, &c)) in pairs.iter().zip(&coeffs).enumerate() {
        if drop_ground && i == 0 {
            continue;
        }
        let w = (-p.eigenvalue * t).exp() * c;
        for (acc, &psi) in out.iter_mut().zip(p.eigenfunction.values()) {
            *acc += w * psi;
        }
    }
    Ok(Profile::new(f.domain().clone(), out).expect("grid sizes match"))
}

/// Effective wall distances of the shifted problem: centering the wave at ζ
/// turns `[−a,b]` into `[−(a+ζ), b−ζ]` for the ζ = 0 kernel formulas.
fn shifted_walls(zeta: f64, dom: &Domain) -> (f64, f64) {
    (dom.a() + zeta, dom.b() - zeta)
}

/// Closed-form Green kernel `G(x,y)` of `H_ζ` with Dirichlet walls.
pub fn green_explicit(zeta: f64, dom: &Domain, x: f64, y: f64) -> f64 {
    let (ap, bp) = shifted_walls(zeta, dom);
    let lo = (x.min(y)) - zeta;
    let hi = (x.max(y)) - zeta;
    let ha = eval_h(0.0, ap);
    let hb = eval_h(0.0, bp);
    let h_lo = eval_h(0.0, lo);
    let h_hi = eval_h(0.0, hi);
    if ha.is_finite() && hb.is_finite() && h_lo.is_finite() && h_hi.is_finite() {
        return 2.0 * sech2(lo) * sech2(hi) * (h_lo + ha) * (hb - h_hi) / (hb + ha);
    }
    // log-space route once h saturates
    let ln_mp = |u: f64| 2.0 * (std::f64::consts::LN_2 - u.abs() - (-2.0 * u.abs()).exp().ln_1p());
    let (s1, l1) = crate::profiles::h_diff_log(lo, -ap);
    let (s2, l2) = crate::profiles::h_diff_log(bp, hi);
    let (s3, l3) = crate::profiles::h_diff_log(bp, -ap);
    if s1 <= 0.0 || s2 <= 0.0 {
        return 0.0;
    }
    debug_assert!(s3 > 0.0);
    (std::f64::consts::LN_2 + ln_mp(lo) + ln_mp(hi) + l1 + l2 - l3).exp()
}

/// Quadrature application of the explicit kernel via prefix sums:
/// `(Gf)(x) = 2m̄'(x)/(h_a+h_b) · [(h_b−h(x)) P(x) + (h(x)+h_a) S(x)]`.
pub fn green_apply(zeta: f64, dom: &Domain, f: &Profile) -> Profile {
    let n = dom.grid_points();
    let dx = dom.spacing();
    let (ap, bp) = shifted_walls(zeta, dom);
    let ha = eval_h(0.0, ap);
    let hb = eval_h(0.0, bp);
    let h: Vec<f64> = (0..n).map(|i| eval_h(zeta, dom.node(i))).collect();
    let mp: Vec<f64> = (0..n).map(|i| sech2(dom.node(i) - zeta)).collect();
    let fv = f.values();

    // prefix P_i = ∫_{−a}^{x_i} (h+h_a) m̄' f, suffix S_i = ∫_{x_i}^b (h_b−h) m̄' f
    let gl: Vec<f64> = (0..n).map(|i| (h[i] + ha) * mp[i] * fv[i]).collect();
    let gr: Vec<f64> = (0..n).map(|i| (hb - h[i]) * mp[i] * fv[i]).collect();
    let mut prefix = vec![0.0; n];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + 0.5 * dx * (gl[i - 1] + gl[i]);
    }
    let mut suffix = vec![0.0; n];
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i + 1] + 0.5 * dx * (gr[i] + gr[i + 1]);
    }

    let den = ha + hb;
    let values = (0..n)
        .map(|i| 2.0 * mp[i] / den * ((hb - h[i]) * prefix[i] + (h[i] + ha) * suffix[i]))
        .collect();
    Profile::new(dom.clone(), values).expect("grid sizes match")
}

/// Invert the assembled matrix: solves `H u = f` on interior nodes.
pub fn green_solve(op: &TridiagonalOperator, f: &Profile) -> Profile {
    let n = op.interior_points();
    let rhs: Vec<f64> = f.values()[1..=n].to_vec();
    let u = eigen::solve_tridiag(&op.diagonal, &op.off_diagonal, &rhs);
    let mut full = vec![0.0; op.domain.grid_points()];
    full[1..=n].copy_from_slice(&u);
    Profile::new(op.domain.clone(), full).expect("grid sizes match")
}

/// One entry of the ground-free Green kernel `G^⊥(x_i, x_j)`, computed from
/// the same discrete operator as the eigendata so the huge `Ψ₀Ψ₀/λ₀`
/// cancellation happens inside one consistent linear algebra problem.
pub fn green_perp_point(
    op: &TridiagonalOperator,
    ground: &SpectralPair,
    i: usize,
    j: usize,
) -> f64 {
    let n = op.interior_points();
    let grid = op.domain.grid_points();
    assert!(i < grid && j < grid);
    if i == 0 || j == 0 || i == grid - 1 || j == grid - 1 {
        return 0.0;
    }
    let dx = op.domain.spacing();
    let mut rhs = vec![0.0; n];
    rhs[j - 1] = 1.0 / dx; // discrete delta at node j
    let col = eigen::solve_tridiag(&op.diagonal, &op.off_diagonal, &rhs);
    let psi = ground.eigenfunction.values();
    col[i - 1] - psi[i] * psi[j] / ground.eigenvalue
}

/// Kellogg method: two Green applications of `φ = m̄'/‖m̄'‖₂` and the
/// classical two-sided error brackets built from grid `λ₀`, `λ₁`, `c`.
pub fn kellogg(zeta: f64, dom: &Domain) -> Result<KelloggReport, SpectralError> {
    let op = assemble_operator(zeta, dom)?;
    let pairs = eigenpairs(&op, 2)?;
    let lambda0 = pairs[0].eigenvalue;
    let lambda1 = pairs[1].eigenvalue;

    let mut phi = WaveParams::new(zeta).sample_deriv(dom);
    let norm = phi.l2_norm();
    for v in phi.values_mut() {
        *v /= norm;
    }

    let f1 = green_solve(&op, &phi);
    let f2 = green_solve(&op, &f1);
    let n1 = f1.l2_norm();
    let n2 = f2.l2_norm();
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(SpectralError::DegenerateNorm);
    }
    let mu = n1 / n2;
    let scale = |p: &Profile, s: f64| {
        let vals = p.values().iter().map(|v| v / s).collect();
        Profile::new(dom.clone(), vals).expect("grid sizes match")
    };
    let e1 = scale(&f1, n1);
    let e2 = scale(&f2, n2);

    let c = pairs[0].eigenfunction.inner(&phi).clamp(-1.0, 1.0);
    let one_minus_c2 = (1.0 - c * c).max(0.0);
    let ratio = lambda0 / lambda1;
    let bracket_upper = 0.5 * lambda0 * ratio * ratio * one_minus_c2 / (c * c);
    let r = kernel_row_norm_sup(zeta, dom);
    let sup_bound = r * lambda1 * ratio * ratio * one_minus_c2.sqrt() / c;

    Ok(KelloggReport {
        mu,
        e1,
        e2,
        r,
        c,
        bracket_upper,
        sup_bound,
        lambda0,
        lambda1,
    })
}

/// `R = sup_x (∫ G(x,y)² dy)^{1/2}` for the explicit kernel, via prefix sums.
fn kernel_row_norm_sup(zeta: f64, dom: &Domain) -> f64 {
    let n = dom.grid_points();
    let dx = dom.spacing();
    let (ap, bp) = shifted_walls(zeta, dom);
    let ha = eval_h(0.0, ap);
    let hb = eval_h(0.0, bp);
    let h: Vec<f64> = (0..n).map(|i| eval_h(zeta, dom.node(i))).collect();
    let mp: Vec<f64> = (0..n).map(|i| sech2(dom.node(i) - zeta)).collect();

    let gl: Vec<f64> = (0..n).map(|i| mp[i] * mp[i] * (h[i] + ha) * (h[i] + ha)).collect();
    let gr: Vec<f64> = (0..n).map(|i| mp[i] * mp[i] * (hb - h[i]) * (hb - h[i])).collect();
    let mut prefix = vec![0.0; n];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + 0.5 * dx * (gl[i - 1] + gl[i]);
    }
    let mut suffix = vec![0.0; n];
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i + 1] + 0.5 * dx * (gr[i] + gr[i + 1]);
    }
    let den = (ha + hb) * (ha + hb);
    let mut worst = 0.0_f64;
    for i in 0..n {
        let row = 4.0 * mp[i] * mp[i] / den
            * ((hb - h[i]) * (hb - h[i]) * prefix[i] + (h[i] + ha) * (h[i] + ha) * suffix[i]);
        worst = worst.max(row);
    }
    worst.sqrt()
}

/// Leading asymptotics of the ground eigenvalue:
/// `24 ε e^{−4ζ}` (one wall) or `48 ε cosh(4ζ)` (two walls).
pub fn lambda0_asymptotic(eps: f64, zeta: f64, mode: WallMode) -> f64 {
    assert!(eps > 0.0 && eps < 1.0, "asymptotic regime needs ε in (0,1)");
    match mode {
        WallMode::OneWall => 24.0 * eps * (-4.0 * zeta).exp(),
        WallMode::TwoWall => 48.0 * eps * (4.0 * zeta).cosh(),
    }
}

/// Weighted trace `∫ m̄'_ζ m̄_ζ G^{(ζ,⊥)}(x,x) dx` through the spectral sum
/// `Σ_{i≥1} Ψ_i(x)²/λ_i`, with the tail beyond the computed modes bounded by
/// the Weyl growth `λ_j ~ ½(jπ/L)²`.
pub fn gperp_weighted_trace(
    zeta: f64,
    dom: &Domain,
    pairs: &[SpectralPair],
) -> Result<f64, SpectralError> {
    let complete = pairs.len() == dom.interior_points();
    let lambda_max = pairs.last().map(|p| p.eigenvalue).unwrap_or(0.0);
    if !complete && lambda_max < MODE_CUTOFF {
        let tail = weyl_tail_bound(dom, pairs.len());
        return Err(SpectralError::Truncation { tail, tol: 0.0 });
    }
    let n = dom.grid_points();
    let dx = dom.spacing();
    let weight: Vec<f64> = (0..n)
        .map(|i| {
            let (m, mp) = eval_wave(zeta, dom.node(i));
            mp * m
        })
        .collect();
    let mut total = 0.0;
    for p in pairs.iter().skip(1) {
        let psi = p.eigenfunction.values();
        let sq: Vec<f64> = psi.iter().map(|x| x * x).collect();
        total += trapezoid_inner(&weight, &sq, dx) / p.eigenvalue;
    }
    Ok(total)
}

fn weyl_tail_bound(dom: &Domain, modes_used: usize) -> f64 {
    // sup|m̄' m̄| = 2/(3√3); Σ_{j>J} 1/λ_j ≤ (2L²/π²)/J
    let l = dom.a() + dom.b();
    let sup_w = 2.0 / (3.0 * 3.0_f64.sqrt());
    sup_w * 2.0 * l * l / (std::f64::consts::PI.powi(2) * modes_used.max(1) as f64)
}

/// Whole-line limit `Ḡ(x,y)` of the ground-free Green kernel.
pub fn gbar_kernel(x: f64, y: f64) -> f64 {
    let u = |z: f64| (4.0 * z).exp() / 24.0 + (2.0 * z).exp() / 3.0 + 0.5 * z - 0.375;
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    0.75 * sech2(x) * sech2(y) * (u(lo) + u(-hi) + 5.0 / 12.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Domain;
    use proptest::prelude::*;

    fn dom(a: f64, b: f64, n: usize) -> Domain {
        Domain::new(a, b, n).unwrap()
    }

    #[test]
    fn assemble_stencil_entries() {
        let d = dom(3.0, 3.0, 601);
        let dx = d.spacing();
        let op = assemble_operator(0.2, &d).unwrap();
        assert_eq!(op.interior_points(), 599);
        for (i, &di) in op.diagonal().iter().enumerate() {
            let x = d.node(i + 1);
            let (m, _) = eval_wave(0.2, x);
            let expect = 1.0 / (dx * dx) + (3.0 * m * m - 1.0);
            assert!((di - expect).abs() < 1e-9, "node {i}");
        }
        for &e in op.off_diagonal() {
            assert_eq!(e, -0.5 / (dx * dx));
        }
    }

    #[test]
    fn constant_potential_matches_dirichlet_laplacian() {
        // override V'' ≡ c: discrete eigenvalues (1/Δx²)(1−cos kπ/(n+1)) + c
        let d = dom(2.0, 2.0, 401);
        let c = 0.7;
        let op = assemble_operator_with(&d, 0.0, |_| c);
        let pairs = eigenpairs(&op, 4).unwrap();
        let n = op.interior_points();
        let dx = d.spacing();
        for (k, p) in pairs.iter().enumerate() {
            let exact_discrete = (1.0 - ((k + 1) as f64 * std::f64::consts::PI
                / (n as f64 + 1.0))
                .cos())
                / (dx * dx)
                + c;
            assert!(
                (p.eigenvalue - exact_discrete).abs() < 1e-9,
                "k={k}: {} vs {exact_discrete}",
                p.eigenvalue
            );
            // and the continuum value ½(kπ/L)² + c within O(Δx²)
            let l = 4.0;
            let cont = 0.5 * ((k + 1) as f64 * std::f64::consts::PI / l).powi(2) + c;
            assert!((p.eigenvalue - cont).abs() / cont < 1e-3, "k={k}");
        }
    }

    #[test]
    fn ground_state_positive_and_orthonormal() {
        let d = dom(3.0, 3.0, 1501);
        let op = assemble_operator(0.0, &d).unwrap();
        let pairs = eigenpairs(&op, 4).unwrap();
        assert!(pairs[0].eigenfunction.values()[1..1500].iter().all(|&v| v > -1e-12));
        for i in 0..4 {
            for j in 0..=i {
                let dot = pairs[i].eigenfunction.inner(&pairs[j].eigenfunction);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12, "({i},{j}): {dot}");
            }
        }
        for w in pairs.windows(2) {
            assert!(w[0].eigenvalue < w[1].eigenvalue);
        }
    }

    #[test]
    fn lambda0_two_wall_asymptotic_at_a3() {
        // The continuum deviation from 48e^{-4a} is already 1.90% at a=3;
        // Δx = 5e-4 keeps the O(Δx²) grid bias below 0.01% on top of it.
        let d = dom(3.0, 3.0, 12_001);
        let op = assemble_operator(0.0, &d).unwrap();
        let pairs = eigenpairs(&op, 1).unwrap();
        let target = 48.0 * (-12.0_f64).exp();
        let rel = (pairs[0].eigenvalue - target).abs() / target;
        assert!(rel < 0.02, "λ0 {} vs {target}, rel {rel}", pairs[0].eigenvalue);
    }

    #[test]
    fn spectral_gap_uniform_over_walls() {
        for &a in &[3.0_f64, 4.0, 5.0, 6.0] {
            let n = ((2.0 * a) / 4e-3).ceil() as usize + 1;
            let d = dom(a, a, n);
            let op = assemble_operator(0.0, &d).unwrap();
            let pairs = eigenpairs(&op, 2).unwrap();
            let gap = pairs[1].eigenvalue - pairs[0].eigenvalue;
            assert!(gap >= 0.5, "a={a}: gap {gap}");
        }
    }

    #[test]
    fn semigroup_identity_and_ground_removal() {
        let d = dom(3.0, 3.0, 801);
        let op = assemble_operator(0.0, &d).unwrap();
        let pairs = eigenpairs(&op, 6).unwrap();
        // f in the span: combination of modes 0..3
        let mut vals = vec![0.0; d.grid_points()];
        for (w, p) in [0.5, -0.3, 0.2, 0.1].iter().zip(&pairs) {
            for (acc, &psi) in vals.iter_mut().zip(p.eigenfunction.values()) {
                *acc += w * psi;
            }
        }
        let f = Profile::new(d.clone(), vals).unwrap();
        let id = semigroup_apply(&pairs, 0.0, &f, false, 1e-8).unwrap();
        let diff: f64 = id
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "identity defect {diff}");

        let g = semigroup_apply(&pairs, 1.0, &pairs[0].eigenfunction, true, 1e-8).unwrap();
        assert!(g.sup_norm() < 1e-10);
    }

    #[test]
    fn semigroup_truncation_reported() {
        let d = dom(3.0, 3.0, 801);
        let op = assemble_operator(0.0, &d).unwrap();
        let pairs = eigenpairs(&op, 2).unwrap();
        // a sharp bump has mass far outside two modes
        let f = Profile::from_fn(&d, |x| (-40.0 * x * x).exp());
        match semigroup_apply(&pairs, 0.0, &f, false, 1e-10) {
            Err(SpectralError::Truncation { tail, .. }) => assert!(tail > 1e-10),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn green_kernel_dirichlet_and_oracle() {
        let d = dom(3.0, 3.0, 1501);
        assert_eq!(green_explicit(0.0, &d, -3.0, 0.3), 0.0);
        assert_eq!(green_explicit(0.0, &d, 0.3, 3.0), 0.0);

        // Columns of the matrix inverse approximate the kernel. The discrete
        // delta sees the kernel kink, so agreement is first order in Δx.
        let column_err = |n: usize| -> f64 {
            let dn = dom(3.0, 3.0, n);
            let op = assemble_operator(0.0, &dn).unwrap();
            let dx = dn.spacing();
            let yj = dn.nearest_node(0.6);
            let mut delta = vec![0.0; dn.grid_points()];
            delta[yj] = 1.0 / dx;
            let f = Profile::new(dn.clone(), delta).unwrap();
            let col = green_solve(&op, &f);
            let mut worst = 0.0_f64;
            for &x in &[-0.6, 0.0, 0.6, 1.0] {
                let xi = dn.nearest_node(x);
                let exact = green_explicit(0.0, &dn, dn.node(xi), dn.node(yj));
                worst = worst.max((col.values()[xi] - exact).abs() / exact.abs());
            }
            worst
        };
        let e1 = column_err(1501);
        let e2 = column_err(3001);
        assert!(e1 < 4.0 * (6.0 / 1500.0), "column error {e1}");
        assert!(e2 < 0.7 * e1, "no first-order decay: {e1} -> {e2}");
    }

    #[test]
    fn green_apply_is_inverse_of_operator() {
        // ‖H(Gf) − f‖∞/‖f‖∞ is O(Δx²): Richardson ratio ≈ 4 under halving.
        let residual = |n: usize| -> f64 {
            let d = dom(3.0, 3.0, n);
            let dx = d.spacing();
            let f = Profile::from_fn(&d, |x| (-2.0 * x * x).exp());
            let gf = green_apply(0.0, &d, &f);
            let v = gf.values();
            let mut worst = 0.0_f64;
            for i in 1..d.grid_points() - 1 {
                let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
                let (m, _) = eval_wave(0.0, d.node(i));
                let (_, _, vpp) = eval_potential(m);
                worst = worst.max((-0.5 * lap + vpp * v[i] - f.values()[i]).abs());
            }
            worst
        };
        let r1 = residual(1201);
        let r2 = residual(2401);
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio} ({r1} -> {r2})");
        assert!(r1 < 0.1, "residual surprisingly large: {r1}");
    }

    #[test]
    fn green_apply_matches_ab_decomposition() {
        // G m̄' = 2h(a)‖m̄'‖² m̄' + 2m̄'B + A with B from independent quadrature
        let d = dom(3.0, 3.0, 2001);
        let dx = d.spacing();
        let n = d.grid_points();
        let mp = WaveParams::new(0.0).sample_deriv(&d);
        let gf = green_apply(0.0, &d, &mp);

        let ha = eval_h(0.0, 3.0);
        let hb = ha;
        let norm_sq = mp.inner(&mp);
        // B(x) = ∫_{−a}^x m̄'²h + h(x)∫_x^b m̄'², by direct quadrature
        let h: Vec<f64> = (0..n).map(|i| eval_h(0.0, d.node(i))).collect();
        let w2: Vec<f64> = mp.values().iter().map(|v| v * v).collect();
        let mut left = vec![0.0; n];
        for i in 1..n {
            left[i] = left[i - 1] + 0.5 * dx * (w2[i - 1] * h[i - 1] + w2[i] * h[i]);
        }
        let mut right = vec![0.0; n];
        for i in (0..n - 1).rev() {
            right[i] = right[i + 1] + 0.5 * dx * (w2[i] + w2[i + 1]);
        }
        // A(x) = −2m̄'(x)[h(x)+h(a)]/(h(b)+h(a)) ∫ m̄'²(y)[h(y)+h(a)] dy
        let mut integral_a = 0.0;
        for i in 0..n {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            integral_a += w * dx * w2[i] * (h[i] + ha);
        }
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            let b_i = left[i] + h[i] * right[i];
            let a_i = -2.0 * mp.values()[i] * (h[i] + ha) / (hb + ha) * integral_a;
            let expect = 2.0 * ha * norm_sq * mp.values()[i] + 2.0 * mp.values()[i] * b_i + a_i;
            worst = worst.max((gf.values()[i] - expect).abs());
            scale = scale.max(expect.abs());
        }
        assert!(worst < 1e-6 * scale, "decomposition defect {worst} at scale {scale}");
    }

    #[test]
    fn green_apply_linear() {
        let d = dom(3.0, 3.0, 501);
        let f = Profile::from_fn(&d, |x| (1.3 * x).sin());
        let g = Profile::from_fn(&d, |x| (-x * x).exp());
        let lhs = green_apply(0.0, &d, &{
            let vals = f
                .values()
                .iter()
                .zip(g.values())
                .map(|(a, b)| 2.0 * a - 0.5 * b)
                .collect();
            Profile::new(d.clone(), vals).unwrap()
        });
        let gf = green_apply(0.0, &d, &f);
        let gg = green_apply(0.0, &d, &g);
        for i in 0..d.grid_points() {
            let expect = 2.0 * gf.values()[i] - 0.5 * gg.values()[i];
            assert!((lhs.values()[i] - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn kellogg_symmetric_and_bracketed() {
        let d = dom(3.0, 3.0, 3001);
        let rep = kellogg(0.0, &d).unwrap();
        // e2 even in x
        let n = d.grid_points();
        for i in 0..n / 2 {
            let diff = (rep.e2.values()[i] - rep.e2.values()[n - 1 - i]).abs();
            assert!(diff < 1e-9, "asymmetry {diff} at {i}");
        }
        // λ0 ≤ μ ≤ λ0 + bracket, with rounding room scaled to λ0
        let slack = 1e-10 * rep.lambda0;
        assert!(rep.mu >= rep.lambda0 - slack, "μ {} < λ0 {}", rep.mu, rep.lambda0);
        assert!(
            rep.mu - rep.lambda0 <= rep.bracket_upper + slack,
            "excess {} vs bracket {}",
            rep.mu - rep.lambda0,
            rep.bracket_upper
        );
        assert!(rep.c > 0.9 && rep.c <= 1.0);
        // ‖Ψ0 − e2‖∞ below the computed sup bound
        let op = assemble_operator(0.0, &d).unwrap();
        let pairs = eigenpairs(&op, 1).unwrap();
        let diff: f64 = pairs[0]
            .eigenfunction
            .values()
            .iter()
            .zip(rep.e2.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff <= rep.sup_bound + 1e-12, "‖Ψ0−e2‖ {diff} vs bound {}", rep.sup_bound);
    }

    #[test]
    fn lambda0_asymptotic_values() {
        let two = lambda0_asymptotic((-12.0_f64).exp(), 0.0, WallMode::TwoWall);
        assert!((two - 48.0 * (-12.0_f64).exp()).abs() < 1e-18);
        assert!((two - 2.949e-4).abs() < 1e-6);
        let one = lambda0_asymptotic(0.3, 0.0, WallMode::OneWall);
        assert!((two / lambda0_asymptotic((-12.0_f64).exp(), 0.0, WallMode::OneWall) - 2.0).abs() < 1e-12);
        assert!((one - 24.0 * 0.3).abs() < 1e-12);
        let shifted = lambda0_asymptotic((-16.0_f64).exp(), 0.5, WallMode::OneWall);
        assert!((shifted - 24.0 * (-18.0_f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn weighted_trace_vanishes_by_symmetry() {
        let d = dom(3.0, 3.0, 801);
        let op = assemble_operator(0.0, &d).unwrap();
        let k = count_modes_below(&op, MODE_CUTOFF);
        let pairs = eigenpairs(&op, k).unwrap();
        let tr = gperp_weighted_trace(0.0, &d, &pairs).unwrap();
        assert!(tr.abs() < 1e-8, "trace {tr}");
    }

    #[test]
    fn weighted_trace_requires_cutoff() {
        let d = dom(3.0, 3.0, 801);
        let op = assemble_operator(0.0, &d).unwrap();
        let pairs = eigenpairs(&op, 3).unwrap();
        assert!(matches!(
            gperp_weighted_trace(0.0, &d, &pairs),
            Err(SpectralError::Truncation { .. })
        ));
    }

    #[test]
    fn gbar_value_at_origin() {
        assert!((gbar_kernel(0.0, 0.0) - 5.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn green_perp_consistent_with_spectral_sum() {
        let d = dom(3.0, 3.0, 1001);
        let op = assemble_operator(0.0, &d).unwrap();
        let k = count_modes_below(&op, MODE_CUTOFF);
        let pairs = eigenpairs(&op, k).unwrap();
        let i = d.nearest_node(0.5);
        let j = d.nearest_node(-0.25);
        let direct = green_perp_point(&op, &pairs[0], i, j);
        let mut summed = 0.0;
        for p in pairs.iter().skip(1) {
            summed += p.eigenfunction.values()[i] * p.eigenfunction.values()[j] / p.eigenvalue;
        }
        // the sum is truncated at the λ=200 cutoff; its Weyl tail is ~1e-3
        assert!((direct - summed).abs() < 2e-3, "{direct} vs {summed}");
    }

    pub(super) fn count_modes_below(op: &TridiagonalOperator, cutoff: f64) -> usize {
        // one past the cutoff so λ_max ≥ cutoff and the tail check passes
        (sturm_count(op.diagonal(), op.off_diagonal(), cutoff) + 1)
            .max(2)
            .min(op.interior_points())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn green_kernel_symmetric(x in -2.5..2.5f64, y in -2.5..2.5f64) {
            let d = Domain::new(3.0, 3.0, 301).unwrap();
            let gxy = green_explicit(0.0, &d, x, y);
            let gyx = green_explicit(0.0, &d, y, x);
            prop_assert!((gxy - gyx).abs() <= 1e-12 * gxy.abs().max(1.0));
        }

        #[test]
        fn gbar_symmetric(x in -3.0..3.0f64, y in -3.0..3.0f64) {
            prop_assert!((gbar_kernel(x, y) - gbar_kernel(y, x)).abs() < 1e-14);
        }
    }
}
