//! Small statistics helpers shared by the analyses and the acceptance suite.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Total-variation distance between two count tables over the same keys.
pub fn tv_counts<K: Ord + Clone>(a: &BTreeMap<K, usize>, b: &BTreeMap<K, usize>) -> f64 {
    let na: usize = a.values().sum();
    let nb: usize = b.values().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
            let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

/// Two-sided KS distance `sup_x |F_emp(x) - G(x)|` against a continuous CDF,
/// checking both sides of every jump of the empirical CDF.
pub fn ks_continuous(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let below = i as f64 / n;
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let at = j as f64 / n;
        let g = cdf(x);
        d = d.max((g - below).abs()).max((at - g).abs());
        i = j;
    }
    d
}

/// One row of a statistics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub config: String,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

impl StatRow {
    pub fn new(config: impl Into<String>, statistic: impl Into<String>, value: f64, stderr: Option<f64>) -> Self {
        StatRow { config: config.into(), statistic: statistic.into(), value, stderr }
    }
}

/// CSV with header `config,statistic,value,stderr`.
pub fn write_stats_csv<W: Write>(rows: &[StatRow], mut out: W) -> io::Result<()> {
    writeln!(out, "config,statistic,value,stderr")?;
    for r in rows {
        let se = r.stderr.map(|s| format!("{s:.10e}")).unwrap_or_default();
        writeln!(out, "{},{},{:.10e},{}", r.config, r.statistic, r.value, se)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_edge_cases() {
        let a: BTreeMap<u32, usize> = [(0, 5), (1, 5)].into_iter().collect();
        let b: BTreeMap<u32, usize> = [(2, 3)].into_iter().collect();
        assert_eq!(tv_counts(&a, &a), 0.0);
        assert_eq!(tv_counts(&a, &b), 1.0);
    }

    #[test]
    fn ks_against_uniform() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_continuous(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12, "{d}");
    }

    #[test]
    fn pearson_signs() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x) - 1.0).abs() < 1e-12);
        let y = [4.0, 3.0, 2.0, 1.0];
        assert!((pearson(&x, &y) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_stats_csv(&[StatRow::new("c", "tv", 0.5, None)], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("config,statistic,value,stderr\nc,tv,5.0000000000e-1,\n"));
    }
}
