//! Small statistical helpers: Kolmogorov–Smirnov distances and critical
//! values, least-squares line fits, and summary statistics.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sample mean and standard error (unbiased variance, `std / sqrt(m)`).
/// Returns `(mean, 0)` for samples of size one.
pub fn mean_and_stderr<F: Real>(xs: &[F]) -> (F, F) {
    let m = xs.len();
    assert!(m > 0, "mean of an empty sample");
    let mf = F::of_usize(m);
    let mean = xs.iter().copied().sum::<F>() / mf;
    if m == 1 {
        return (mean, F::zero());
    }
    let ss = xs
        .iter()
        .map(|&x| {
            let d = x - mean;
            d * d
        })
        .sum::<F>();
    let var = ss / F::of_usize(m - 1);
    (mean, (var / mf).sqrt())
}

/// One-sample Kolmogorov–Smirnov statistic `sup_x |F_m(x) − F(x)|`.
///
/// `sorted` must be ascending; `cdf` is the hypothesized distribution
/// function.
pub fn ks_statistic<F: Real>(sorted: &[F], cdf: impl Fn(F) -> F) -> F {
    let m = sorted.len();
    assert!(m > 0, "KS statistic of an empty sample");
    let mf = F::of_usize(m);
    let mut d = F::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        let hi = F::of_usize(i + 1) / mf - c;
        let lo = c - F::of_usize(i) / mf;
        d = d.max(hi.abs()).max(lo.abs());
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic; both inputs ascending.
pub fn two_sample_ks<F: Real>(a: &[F], b: &[F]) -> F {
    assert!(!a.is_empty() && !b.is_empty(), "KS of an empty sample");
    let (na, nb) = (F::of_usize(a.len()), F::of_usize(b.len()));
    let mut d = F::zero();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = F::of_usize(i) / na;
        let fb = F::of_usize(j) / nb;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Survival function of the Kolmogorov distribution,
/// `P(K > x) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2 k² x²)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * x * x).exp();
        if term < 1e-16 {
            break;
        }
        sum += sign * term;
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Upper critical value of the Kolmogorov distribution at `level`
/// (e.g. 0.01), found by bisection on [`kolmogorov_sf`].
pub fn kolmogorov_critical(level: f64) -> f64 {
    assert!(level > 0.0 && level < 1.0);
    let (mut lo, mut hi) = (1e-6, 4.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Asymptotic one-sample KS critical value: `c(level) / sqrt(m)`.
pub fn ks_critical_one_sample(m: usize, level: f64) -> f64 {
    kolmogorov_critical(level) / (m as f64).sqrt()
}

/// Asymptotic two-sample KS critical value:
/// `c(level) · sqrt((m + n) / (m n))`.
pub fn ks_critical_two_sample(m: usize, n: usize, level: f64) -> f64 {
    kolmogorov_critical(level) * ((m + n) as f64 / (m as f64 * n as f64)).sqrt()
}

/// Ordinary least squares fit of `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            context: "fit_line inputs",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::invalid("fit_line needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit_line: zero variance in x"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Nearest-rank upper quantile of an ascending sample: the element at rank
/// `ceil(q·m)` (1-based). Deterministic, no interpolation.
pub fn quantile_nearest_rank<F: Real>(sorted: &[F], q: f64) -> F {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr_bernoulli() {
        let xs: [f64; 4] = [1.0, 0.0, 1.0, 1.0];
        let (m, se) = mean_and_stderr(&xs);
        assert!((m - 0.75).abs() < 1e-15);
        // var = (3*0.0625 + 0.5625)/3 = 0.25, se = 0.5/2 = 0.25
        assert!((se - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ks_statistic_exact_on_tiny_sample() {
        // Uniform CDF, sample {0.5}: F_1 jumps 0→1 at 0.5, so D = 0.5.
        let d = ks_statistic(&[0.5f64], |x| x);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_critical_matches_tables() {
        // Classic asymptotic values: c(0.05) ≈ 1.3581, c(0.01) ≈ 1.6276.
        assert!((kolmogorov_critical(0.05) - 1.3581).abs() < 1e-3);
        assert!((kolmogorov_critical(0.01) - 1.6276).abs() < 1e-3);
    }

    #[test]
    fn fit_line_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.5 * x + 2.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_nearest_rank_is_order_statistic() {
        let xs: [f64; 10] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(quantile_nearest_rank(&xs, 0.9), 9.0);
        assert_eq!(quantile_nearest_rank(&xs, 1.0), 10.0);
        assert_eq!(quantile_nearest_rank(&xs, 0.05), 1.0);
    }
}
