//! Small statistics helpers used by the experiments and validation suites.

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Mean and standard error of the mean (sample standard deviation / sqrt(n)).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "linear fit needs two equal-length series of at least 2 points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("linear fit over non-finite values".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit with constant x".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Ranks starting at 1, ties receive their average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spearman {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with `n - 2` degrees of freedom.
    pub p_value: f64,
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidArgument(
            "spearman needs two equal-length series of at least 3 points".into(),
        ));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Spearman {
            rho: 0.0,
            p_value: 1.0,
        });
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = n - 2.0;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok(Spearman { rho, p_value })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins after pooling low-expectation outcomes.
    pub bins: usize,
}

/// Pearson goodness-of-fit of `observed` counts against probabilities
/// `expected`. Outcomes whose expected count is below `min_expected` are
/// pooled into one bin. An observation on a zero-probability outcome gives
/// `p = 0`.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if observed.len() != expected.len() {
        return Err(Error::InvalidArgument("observed and expected lengths differ".into()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("no observations".into()));
    }
    let total = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_e, mut pooled_o) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(ChiSquareTest {
                    statistic: f64::INFINITY,
                    dof: 0,
                    p_value: 0.0,
                    bins: 0,
                });
            }
            continue;
        }
        let e = p * total;
        if e < min_expected {
            pooled_e += e;
            pooled_o += o as f64;
        } else {
            bins.push((o as f64, e));
        }
    }
    if pooled_e > 0.0 {
        bins.push((pooled_o, pooled_e));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        1.0 - dist.cdf(statistic)
    };
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value,
        bins: bins.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| -0.5 * v + 2.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fit_r_squared_matches_hand_value() {
        // x = 0..3, y = (0, 1, 1, 2): sxy = 3, sxx = 5, syy = 2.
        let f = linear_fit(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((f.slope - 0.6).abs() < 1e-14);
        assert!((f.r_squared - 0.9).abs() < 1e-14);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_monotone() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let s = spearman(&x, &[5.0, 3.0, 2.0, 1.0, 0.5]).unwrap();
        assert_eq!(s.rho, -1.0);
        assert_eq!(s.p_value, 0.0);
        // d = (0, 0, 1, -1, 0) gives rho = 1 - 6*2/(5*24) = 0.9.
        let s = spearman(&x, &[1.0, 2.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((s.rho - 0.9).abs() < 1e-14);
        assert!(s.p_value > 0.01 && s.p_value < 0.1);
    }

    #[test]
    fn chi_square_perfect_fit_and_mismatch() {
        let t = chi_square_gof(&[250, 250, 500], &[0.25, 0.25, 0.5], 5.0).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 2);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let t = chi_square_gof(&[400, 100, 500], &[0.25, 0.25, 0.5], 5.0).unwrap();
        assert!(t.p_value < 1e-10);
        let t = chi_square_gof(&[1, 9], &[0.0, 1.0], 5.0).unwrap();
        assert_eq!(t.p_value, 0.0);
    }

    #[test]
    fn mean_stderr_basic() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
