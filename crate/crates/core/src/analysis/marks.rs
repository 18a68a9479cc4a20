//! Joint law of the first activation marks `(sigma_ON, sigma_OFF)` of union-graph groups.

use crate::dynamics::Timeline;
use crate::error::{Error, Result};

pub const MIN_MARK_SAMPLE: usize = 100;

/// Limiting `P(sigma_ON <= s1, sigma_OFF <= s2) = (1 - e^{-(s2 - s1)} + s1) / (1 + t)`,
/// extended by `F(s1, s2) = F(s2, s2)` for `s2 < s1` and `s1` clamped to `[0, t]`.
pub fn mark_cdf_limit(t: f64, s1: f64, s2: f64) -> f64 {
    if s1 < 0.0 || s2 < 0.0 {
        return 0.0;
    }
    let s1 = s1.min(t).min(s2);
    let gap = s2 - s1;
    let decay = if gap.is_infinite() { 0.0 } else { (-gap).exp() };
    (1.0 - decay + s1) / (1.0 + t)
}

/// Empirical joint CDF of the first marks over all union-graph groups.
pub fn empirical_mark_cdf(timeline: &Timeline, s1: f64, s2: f64) -> f64 {
    let m = timeline.marks();
    if m.is_empty() {
        return 0.0;
    }
    let hits = m.iter().filter(|mk| mk.first_on() <= s1 && mk.first_off() <= s2).count();
    hits as f64 / m.len() as f64
}

/// Largest deviation between the empirical and limiting joint CDFs over the grid.
pub fn mark_law_test(timeline: &Timeline, grid: &[(f64, f64)]) -> Result<f64> {
    let got = timeline.groups().len();
    if got < MIN_MARK_SAMPLE {
        return Err(Error::InsufficientSample { got, needed: MIN_MARK_SAMPLE });
    }
    let t = timeline.horizon();
    let mut worst: f64 = 0.0;
    for &(s1, s2) in grid {
        if !(0.0..=t).contains(&s1) {
            return Err(Error::Range { s: s1, t });
        }
        if s2 < s1 {
            return Err(Error::Config(format!("grid point ({s1}, {s2}) needs s2 >= s1")));
        }
        worst = worst.max((empirical_mark_cdf(timeline, s1, s2) - mark_cdf_limit(t, s1, s2)).abs());
    }
    Ok(worst)
}

/// The 5 x 5 grid `s1 in {0, t/4, t/2, 3t/4, t}`, `s2 in {t, 1.5t, 2t, 3t, inf}`.
pub fn default_mark_grid(t: f64) -> Vec<(f64, f64)> {
    let mut grid = Vec::with_capacity(25);
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for b in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            grid.push((a * t, b * t));
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate;
    use crate::params::{GroupSizeLaw, Model, WeightModel};
    use crate::rng;

    #[test]
    fn closed_form_values() {
        assert_eq!(mark_cdf_limit(1.0, 0.0, f64::INFINITY), 0.5);
        assert_eq!(mark_cdf_limit(1.0, 1.0, f64::INFINITY), 1.0);
        assert_eq!(mark_cdf_limit(2.0, 0.0, 0.0), 0.0);
        assert_eq!(mark_cdf_limit(1.0, 0.8, 0.5), mark_cdf_limit(1.0, 0.5, 0.5));
    }

    #[test]
    fn closed_form_is_monotone() {
        for &t in &[0.5, 1.0, 3.0] {
            let pts: Vec<f64> = (0..=40).map(|i| i as f64 * t / 20.0).chain([f64::INFINITY]).collect();
            for &a in &pts {
                let mut prev = 0.0;
                for &b in &pts {
                    let v = mark_cdf_limit(t, a, b);
                    assert!(v >= prev - 1e-15 && (0.0..=1.0 + 1e-15).contains(&v));
                    prev = v;
                }
            }
            for &b in &pts {
                let mut prev = 0.0;
                for &a in &pts {
                    let v = mark_cdf_limit(t, a, b);
                    assert!(v >= prev - 1e-15);
                    prev = v;
                }
            }
            assert!((mark_cdf_limit(t, t, f64::INFINITY) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn small_timeline_is_rejected() {
        let m = Model::new(WeightModel::constant(20, 1.0).unwrap(), GroupSizeLaw::fixed(2).unwrap(), 1.0).unwrap();
        let tl = simulate(&m, &mut rng::seeded(1)).unwrap();
        assert!(matches!(mark_law_test(&tl, &[(0.0, 1.0)]), Err(Error::InsufficientSample { needed: 100, .. })));
    }

    #[test]
    fn empirical_marks_follow_the_limit() {
        let m = Model::new(WeightModel::constant(20_000, 1.0).unwrap(), GroupSizeLaw::fixed(2).unwrap(), 1.0).unwrap();
        let tl = simulate(&m, &mut rng::seeded(5)).unwrap();
        let dev = mark_law_test(&tl, &default_mark_grid(1.0)).unwrap();
        // about 4e4 groups: a few binomial standard errors of 0.0025
        assert!(dev < 0.015, "{dev}");
        assert!(mark_law_test(&tl, &[(2.0, 3.0)]).is_err());
    }
}
