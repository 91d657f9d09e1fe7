//! Small descriptive and testing helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation with denominator n - 1; zero for fewer than two values.
pub fn sample_sd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// sd / sqrt(n).
pub fn standard_error(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    sample_sd(x) / (x.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test on count histograms over the same bins.
///
/// Adjacent sparse bins (pooled expected count below 5) are merged left to right.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> ChiSquareTest {
    let len = a.len().max(b.len());
    let get = |v: &[usize], k: usize| v.get(k).copied().unwrap_or(0) as f64;
    let na: f64 = a.iter().sum::<usize>() as f64;
    let nb: f64 = b.iter().sum::<usize>() as f64;
    let total = na + nb;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for k in 0..len {
        acc.0 += get(a, k);
        acc.1 += get(b, k);
        let pooled = acc.0 + acc.1;
        if pooled * na.min(nb) / total >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    if merged.len() < 2 {
        return ChiSquareTest { statistic: 0.0, df: 0, p_value: 1.0 };
    }
    let mut stat = 0.0;
    for (oa, ob) in &merged {
        let pooled = oa + ob;
        let ea = pooled * na / total;
        let eb = pooled * nb / total;
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let df = merged.len() - 1;
    let p_value = 1.0 - ChiSquared::new(df as f64).expect("positive df").cdf(stat);
    ChiSquareTest { statistic: stat, df, p_value }
}
