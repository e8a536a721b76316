//! Estimators and tests connecting simulated paths to the limit laws:
//! binned drift regression, quadratic-variation diffusion estimates,
//! Kolmogorov-Smirnov tests, sup distance and modulus of continuity.

use crate::sdelab::Path;
use thiserror::Error;

/// Bins with fewer samples than this are suppressed from drift fits.
pub const MIN_DRIFT_BIN_COUNT: usize = 200;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("need at least {need} increments, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("paths have mismatched shape: {0}")]
    ShapeMismatch(String),
    #[error("window δ = {delta} is below the sampling step {dt}")]
    Resolution { delta: f64, dt: f64 },
}

/// Binned conditional-mean drift estimate.
#[derive(Debug, Clone)]
pub struct DriftFit {
    pub bin_centers: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub count: Vec<usize>,
}

/// Conditional mean increment `E[Δy | y ∈ bin] / (lag·Δt)` over an ensemble,
/// with standard errors; bins holding fewer than [`MIN_DRIFT_BIN_COUNT`]
/// samples are dropped.
pub fn estimate_drift(paths: &[Path], lag: usize, bins: usize) -> Result<DriftFit, StatsError> {
    if paths.is_empty() || bins == 0 {
        return Err(StatsError::EmptyInput("paths/bins"));
    }
    assert!(lag >= 1);
    let dt = paths[0].dt;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in paths {
        if p.len() < lag + 1 {
            return Err(StatsError::TooShort { need: lag + 1, got: p.len() });
        }
        for &y in &p.values[..p.len() - lag] {
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    if !(hi > lo) {
        // all mass in a point: one degenerate bin
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut sum = vec![0.0; bins];
    let mut sumsq = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    let denom = lag as f64 * dt;
    for p in paths {
        for k in 0..p.len() - lag {
            let y = p.values[k];
            let v = (p.values[k + lag] - y) / denom;
            let b = (((y - lo) / width) as usize).min(bins - 1);
            sum[b] += v;
            sumsq[b] += v * v;
            count[b] += 1;
        }
    }
    let mut fit = DriftFit {
        bin_centers: Vec::new(),
        mean: Vec::new(),
        se: Vec::new(),
        count: Vec::new(),
    };
    for b in 0..bins {
        if count[b] < MIN_DRIFT_BIN_COUNT {
            continue;
        }
        let n = count[b] as f64;
        let mean = sum[b] / n;
        let var = (sumsq[b] / n - mean * mean).max(0.0);
        fit.bin_centers.push(lo + (b as f64 + 0.5) * width);
        fit.mean.push(mean);
        fit.se.push((var / n).sqrt());
        fit.count.push(count[b]);
    }
    if fit.bin_centers.is_empty() {
        return Err(StatsError::EmptyInput("no bin reached the minimum count"));
    }
    Ok(fit)
}

/// Realized quadratic variation per unit time, `Σ(Δy)² / horizon`.
///
/// For a line of slope `m` this returns `m²Δt` (vanishing with the step),
/// the documented discretization bias.
pub fn estimate_diffusion(path: &Path) -> Result<f64, StatsError> {
    let n = path.len();
    if n < 101 {
        return Err(StatsError::TooShort { need: 101, got: n });
    }
    let qv: f64 = (0..n - 1).map(|k| {
        let d = path.increment(k);
        d * d
    })
    .sum();
    Ok(qv / path.horizon())
}

/// Asymptotic Kolmogorov survival function `Q(λ) = 2Σ (−1)^{j−1} e^{−2j²λ²}`.
pub fn kolmogorov_pvalue(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Effective-sample-size correction of the asymptotic p-value
/// (`λ = (√n_e + 0.12 + 0.11/√n_e) D`).
fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    let root = n_eff.sqrt();
    kolmogorov_pvalue((root + 0.12 + 0.11 / root) * d)
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::EmptyInput("samples"));
    }
    let xs = sorted(xs);
    let ys = sorted(ys);
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0_f64;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n as f64 * m as f64) / (n + m) as f64;
    Ok((d, ks_pvalue(d, n_eff)))
}

/// One-sample Kolmogorov-Smirnov test against an analytic CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64), StatsError> {
    if xs.is_empty() {
        return Err(StatsError::EmptyInput("samples"));
    }
    let xs = sorted(xs);
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    for (k, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((k + 1) as f64 / n - f).abs());
        d = d.max((f - k as f64 / n).abs());
    }
    Ok((d, ks_pvalue(d, n)))
}

/// Max pointwise distance between two equally sampled paths.
pub fn sup_distance(p: &Path, q: &Path) -> Result<f64, StatsError> {
    if p.len() != q.len() || (p.dt - q.dt).abs() > 1e-15 * p.dt.max(q.dt) {
        return Err(StatsError::ShapeMismatch(format!(
            "lengths {}/{} steps {}/{}",
            p.len(),
            q.len(),
            p.dt,
            q.dt
        )));
    }
    Ok(p.values
        .iter()
        .zip(&q.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Modulus of continuity `ω_{δ,T} = max |p(t) − p(s)|` over `|t−s| < δ`,
/// `s, t ≤ T`, with a sliding min/max deque in O(n).
///
/// Index pairs satisfy `|i−j| ≤ ⌈δ/Δt⌉ − 1`, so for a line of slope `m` and
/// `δ` a multiple of `Δt` the result is `m(δ − Δt)`: the open window never
/// sees the full span δ on the grid.
pub fn modulus_of_continuity(p: &Path, delta: f64, t_max: f64) -> Result<f64, StatsError> {
    if delta < p.dt {
        return Err(StatsError::Resolution { delta, dt: p.dt });
    }
    let last = (((t_max / p.dt) + 1e-9).floor() as usize).min(p.len() - 1);
    let w = ((delta / p.dt - 1e-9).ceil() as usize).max(1) - 1; // max index separation
    if w == 0 || last == 0 {
        return Ok(0.0);
    }
    let vals = &p.values[..=last];
    let mut max_dq: std::collections::VecDeque<usize> = Default::default();
    let mut min_dq: std::collections::VecDeque<usize> = Default::default();
    let mut worst = 0.0_f64;
    for i in 0..vals.len() {
        while let Some(&f) = max_dq.front() {
            if i - f > w {
                max_dq.pop_front();
            } else {
                break;
            }
        }
        while let Some(&f) = min_dq.front() {
            if i - f > w {
                min_dq.pop_front();
            } else {
                break;
            }
        }
        while let Some(&bk) = max_dq.back() {
            if vals[bk] <= vals[i] {
                max_dq.pop_back();
            } else {
                break;
            }
        }
        while let Some(&bk) = min_dq.back() {
            if vals[bk] >= vals[i] {
                min_dq.pop_back();
            } else {
                break;
            }
        }
        max_dq.push_back(i);
        min_dq.push_back(i);
        worst = worst.max(vals[*max_dq.front().unwrap()] - vals[*min_dq.front().unwrap()]);
    }
    Ok(worst)
}

/// Weighted least squares line `y ≈ intercept + slope·x`.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    assert!(x.len() == y.len() && y.len() == w.len() && !x.is_empty());
    let sw: f64 = w.iter().sum();
    let mx: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((a, b), wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (a - mx) * (a - mx);
        sxy += wi * (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sdelab::{euler_maruyama, sample_brownian, DriftSpec};

    #[test]
    fn drift_estimator_zero_on_brownian() {
        let paths: Vec<Path> = (0..200)
            .map(|k| sample_brownian(1.0, 1e-3, 2000, rng::replica_seed(1, k)))
            .collect();
        let fit = estimate_drift(&paths, 1, 8).unwrap();
        for (i, &m) in fit.mean.iter().enumerate() {
            assert!(m.abs() < 3.5 * fit.se[i], "bin {i}: {m} vs se {}", fit.se[i]);
            assert!(fit.count[i] >= MIN_DRIFT_BIN_COUNT);
        }
    }

    #[test]
    fn drift_estimator_recovers_ou_slope() {
        // dX = −X dt + dB: binned drift is −x; fitted slope −1 ± 0.05
        let dt = 1e-3;
        let paths: Vec<Path> = (0..2000)
            .map(|k| {
                let noise = sample_brownian(1.0, dt, 5000, rng::replica_seed(7, k));
                euler_maruyama(&DriftSpec::Custom(|x| -x), 0.0, &noise).unwrap()
            })
            .collect();
        let fit = estimate_drift(&paths, 1, 12).unwrap();
        let w: Vec<f64> = fit.se.iter().map(|s| 1.0 / (s * s)).collect();
        let (_, slope) = weighted_linear_fit(&fit.bin_centers, &fit.mean, &w);
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");

        // lag consistency: doubling the lag moves the slope by < 1 pooled SE
        let fit2 = estimate_drift(&paths, 2, 12).unwrap();
        let w2: Vec<f64> = fit2.se.iter().map(|s| 1.0 / (s * s)).collect();
        let (_, slope2) = weighted_linear_fit(&fit2.bin_centers, &fit2.mean, &w2);
        let pooled_se = 0.05; // SE of the slope itself at this sample size
        assert!((slope - slope2).abs() < pooled_se, "{slope} vs {slope2}");
    }

    #[test]
    fn diffusion_estimator_values() {
        let p = sample_brownian(0.75, 1e-4, 1_000_000, 3);
        let d = estimate_diffusion(&p).unwrap();
        let band = 3.0 * 0.75 * (2.0 / 1e6_f64).sqrt();
        assert!((d - 0.75).abs() < band, "{d}");

        let flat = Path { dt: 0.01, values: vec![2.0; 200], sigma2: 0.0 };
        assert_eq!(estimate_diffusion(&flat).unwrap(), 0.0);

        // line of slope m: documented bias m²Δt
        let m = 3.0;
        let line = Path {
            dt: 0.01,
            values: (0..200).map(|k| m * k as f64 * 0.01).collect(),
            sigma2: 0.0,
        };
        let est = estimate_diffusion(&line).unwrap();
        assert!((est - m * m * 0.01).abs() < 1e-12, "{est}");

        let short = Path { dt: 0.01, values: vec![0.0; 50], sigma2: 0.0 };
        assert!(matches!(estimate_diffusion(&short), Err(StatsError::TooShort { .. })));
    }

    #[test]
    fn ks_two_sample_degenerate_cases() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        let ys = vec![2.0, 1.0, 4.0, 3.0];
        let (d, p) = ks_two_sample(&xs, &ys).unwrap();
        assert_eq!(d, 0.0);
        assert!(p > 0.999);

        let lo = vec![0.0, 0.1, 0.2];
        let hi = vec![5.0, 6.0, 7.0];
        let (d, _) = ks_two_sample(&lo, &hi).unwrap();
        assert_eq!(d, 1.0);

        assert!(matches!(ks_two_sample(&[], &ys), Err(StatsError::EmptyInput(_))));
    }

    #[test]
    fn ks_pvalues_calibrated_on_null() {
        // independent uniforms: p-values should be uniform; χ² on 10 bins
        let reps = 200;
        let n = 10_000;
        let mut hist = [0usize; 10];
        for r in 0..reps {
            let xs: Vec<f64> = (0..n)
                .map(|i| (rng::counter_u64(55, 1, r, i as u64) >> 11) as f64 / (1u64 << 53) as f64)
                .collect();
            let ys: Vec<f64> = (0..n)
                .map(|i| (rng::counter_u64(56, 2, r, i as u64) >> 11) as f64 / (1u64 << 53) as f64)
                .collect();
            let (_, p) = ks_two_sample(&xs, &ys).unwrap();
            hist[((p * 10.0) as usize).min(9)] += 1;
        }
        let expect = reps as f64 / 10.0;
        let chi2: f64 = hist
            .iter()
            .map(|&c| {
                let d = c as f64 - expect;
                d * d / expect
            })
            .sum();
        // df = 9, 0.999 quantile ≈ 27.9
        assert!(chi2 < 27.9, "χ² = {chi2}, hist {hist:?}");
    }

    #[test]
    fn ks_one_sample_against_uniform() {
        let n = 20_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| (rng::counter_u64(99, 3, 0, i as u64) >> 11) as f64 / (1u64 << 53) as f64)
            .collect();
        let (_, p) = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(p > 0.01, "p = {p}");
        // against a wrong CDF the test must reject
        let (_, p_bad) = ks_one_sample(&xs, |x| (x * x).clamp(0.0, 1.0)).unwrap();
        assert!(p_bad < 1e-6, "p_bad = {p_bad}");
    }

    #[test]
    fn sup_distance_cases() {
        let p = sample_brownian(1.0, 0.01, 100, 1);
        assert_eq!(sup_distance(&p, &p).unwrap(), 0.0);
        let shifted = Path {
            dt: p.dt,
            values: p.values.iter().map(|x| x + 0.7).collect(),
            sigma2: p.sigma2,
        };
        assert!((sup_distance(&p, &shifted).unwrap() - 0.7).abs() < 1e-15);
        let neg = Path {
            dt: p.dt,
            values: p.values.iter().map(|x| -x).collect(),
            sigma2: p.sigma2,
        };
        let sup = p.values.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        assert!((sup_distance(&p, &neg).unwrap() - 2.0 * sup).abs() < 1e-15);
        let other = sample_brownian(1.0, 0.01, 50, 1);
        assert!(matches!(sup_distance(&p, &other), Err(StatsError::ShapeMismatch(_))));
    }

    #[test]
    fn modulus_on_lines_and_constants() {
        let dt = 0.01;
        let m = 2.0;
        let line = Path {
            dt,
            values: (0..=200).map(|k| m * k as f64 * dt).collect(),
            sigma2: 0.0,
        };
        let delta = 0.1;
        let w = modulus_of_continuity(&line, delta, 2.0).unwrap();
        assert!((w - m * (delta - dt)).abs() < 1e-12, "{w}");

        let flat = Path { dt, values: vec![1.0; 100], sigma2: 0.0 };
        assert_eq!(modulus_of_continuity(&flat, 0.1, 0.9).unwrap(), 0.0);

        assert!(matches!(
            modulus_of_continuity(&line, 0.001, 1.0),
            Err(StatsError::Resolution { .. })
        ));
    }

    #[test]
    fn modulus_matches_brute_force() {
        let p = sample_brownian(1.0, 1e-3, 1000, 17);
        for &delta in &[5e-3, 0.02, 0.1] {
            let fast = modulus_of_continuity(&p, delta, 1.0).unwrap();
            // O(n²) scan with the same index convention
            let w = ((delta / p.dt - 1e-9).ceil() as usize).max(1) - 1;
            let mut brute = 0.0_f64;
            for i in 0..p.len() {
                for j in i.saturating_sub(w)..=i {
                    brute = brute.max((p.values[i] - p.values[j]).abs());
                }
            }
            assert_eq!(fast, brute, "delta {delta}");
        }
    }

    #[test]
    fn diffusion_invariant_under_smooth_drift() {
        // OU vs BM on the same noise: QV estimates agree to O(Δt)
        let noise = sample_brownian(0.75, 1e-4, 200_000, 23);
        let ou = euler_maruyama(&DriftSpec::Custom(|x| -x), 0.0, &noise).unwrap();
        let d_bm = estimate_diffusion(&noise).unwrap();
        let d_ou = estimate_diffusion(&ou).unwrap();
        assert!((d_bm - d_ou).abs() < 0.01 * d_bm, "{d_bm} vs {d_ou}");
    }
}
