//! Event-exact ON/OFF dynamics on `[0, t]`.
//!
//! The initial active set is a stationary sample. Every switch-ON draws an
//! `Exp(1)` lifetime. Switch-ON attempts arrive as one global Poisson stream
//! of rate `l_n`: each candidate names a distinct group `a` with intensity
//! `q_a`, and a candidate naming a group that is currently ON is dropped, which
//! leaves exactly rate `q_a` while OFF. No event queue is needed because an ON
//! group's OFF time is fixed at the moment it switches on.

use std::collections::HashMap;
use std::io::{self, Write};

use rand_distr::{Distribution, Exp, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{GroupSizeLaw, Model, WeightModel};
use crate::rng::SimRng;
use crate::sampler::{sample_scaled, sample_stationary, BipartiteState, CandidateStream, Group};

/// ON intervals `[on, off)` of one group. Groups ON at time 0 start at exactly 0;
/// the last OFF time may exceed the horizon and is never capped.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMark {
    intervals: Vec<(f64, f64)>,
}

impl ActivationMark {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Config("activation mark needs an interval".into()));
        }
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::Config(format!("intervals {:?} and {:?} overlap", w[0], w[1])));
            }
        }
        if let Some(&(on, off)) = intervals.iter().find(|&&(on, off)| !(off > on) || on < 0.0) {
            return Err(Error::Config(format!("interval ({on}, {off}) is not increasing")));
        }
        Ok(ActivationMark { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// `sigma_ON`.
    pub fn first_on(&self) -> f64 {
        self.intervals[0].0
    }

    /// `sigma_OFF`, the end of the first interval.
    pub fn first_off(&self) -> f64 {
        self.intervals[0].1
    }

    pub fn active_at(&self, s: f64) -> bool {
        self.intervals.iter().any(|&(on, off)| on <= s && s < off)
    }

    pub fn switch_on_count(&self) -> usize {
        self.intervals.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event<'a> {
    pub time: f64,
    pub kind: EventKind,
    pub members: &'a [u32],
}

/// Full history of every group that is ON somewhere in `[0, t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    n: usize,
    horizon: f64,
    groups: Vec<Group>,
    marks: Vec<ActivationMark>,
}

impl Timeline {
    /// Assembles a timeline from explicit groups and marks, e.g. a recorded run.
    pub fn from_parts(n: usize, horizon: f64, groups: Vec<Group>, marks: Vec<ActivationMark>) -> Result<Self> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::Config(format!("horizon {horizon} must be finite and >= 0")));
        }
        if groups.len() != marks.len() {
            return Err(Error::Config(format!("{} groups but {} marks", groups.len(), marks.len())));
        }
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by(|&a, &b| groups[a].cmp(&groups[b]));
        if order.windows(2).any(|w| groups[w[0]] == groups[w[1]]) {
            return Err(Error::InvalidGroup("duplicate group in timeline".into()));
        }
        for (g, m) in groups.iter().zip(&marks) {
            if g.members().last().is_some_and(|&v| v as usize >= n) {
                return Err(Error::InvalidGroup(format!("{:?} has a member outside [0, {n})", g.members())));
            }
            if m.first_on() > horizon {
                return Err(Error::Config(format!("group {:?} first switches on after the horizon", g.members())));
            }
        }
        let groups_sorted = order.iter().map(|&j| groups[j].clone()).collect();
        let marks_sorted = order.iter().map(|&j| marks[j].clone()).collect();
        Ok(Timeline { n, horizon, groups: groups_sorted, marks: marks_sorted })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Groups in sorted order, parallel to [`Timeline::marks`].
    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn marks(&self) -> &[ActivationMark] {
        &self.marks
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Group, &ActivationMark)> {
        self.groups.iter().zip(&self.marks)
    }

    pub fn initial_state(&self) -> BipartiteState {
        self.filtered(|m| m.first_on() == 0.0)
    }

    /// Groups active at time `s`.
    pub fn slice(&self, s: f64) -> Result<BipartiteState> {
        if !(0.0..=self.horizon).contains(&s) {
            return Err(Error::Range { s, t: self.horizon });
        }
        Ok(self.filtered(|m| m.active_at(s)))
    }

    /// Every group ON somewhere in `[0, t]`.
    pub fn union_graph(&self) -> BipartiteState {
        BipartiteState::from_sorted(self.n, self.groups.clone())
    }

    /// Number of groups with at least two ON intervals in `[0, t]`.
    pub fn count_multi_switch(&self) -> usize {
        self.marks.iter().filter(|m| m.switch_on_count() >= 2).count()
    }

    fn filtered(&self, keep: impl Fn(&ActivationMark) -> bool) -> BipartiteState {
        let groups = self
            .iter()
            .filter(|(_, m)| keep(m))
            .map(|(g, _)| g.clone())
            .collect();
        BipartiteState::from_sorted(self.n, groups)
    }

    /// Switch events in `(0, t]`, sorted by time, ties by kind then group.
    pub fn events(&self) -> Vec<Event<'_>> {
        let mut events = Vec::new();
        for (g, m) in self.iter() {
            for &(on, off) in m.intervals() {
                if on > 0.0 {
                    events.push(Event { time: on, kind: EventKind::On, members: g.members() });
                }
                if off <= self.horizon {
                    events.push(Event { time: off, kind: EventKind::Off, members: g.members() });
                }
            }
        }
        events.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then(a.kind.cmp(&b.kind))
                .then_with(|| a.members.cmp(b.members))
        });
        events
    }

    /// Event log as JSONL `{"time", "kind", "members"}`.
    pub fn write_events_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in self.events() {
            serde_json::to_writer(&mut out, &e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Simulates the ON/OFF dynamics on `[0, model.t]`.
pub fn simulate(model: &Model, rng: &mut SimRng) -> Result<Timeline> {
    let t = model.t;
    let initial = sample_stationary(model, rng)?;
    let mut index: HashMap<Group, usize> = HashMap::with_capacity(initial.group_count() * 2);
    let mut groups: Vec<Group> = Vec::with_capacity(initial.group_count() * 2);
    let mut intervals: Vec<Vec<(f64, f64)>> = Vec::with_capacity(initial.group_count() * 2);
    for g in initial.groups() {
        let off: f64 = Exp1.sample(rng);
        index.insert(g.clone(), groups.len());
        groups.push(g.clone());
        intervals.push(vec![(0.0, off)]);
    }
    let ell = model.weights.ell_n();
    if t > 0.0 && ell > 0.0 {
        let gaps = Exp::new(ell).map_err(|e| Error::Numeric(format!("Exp({ell}): {e}")))?;
        let mut stream = CandidateStream::new(&model.weights, &model.sizes)?;
        let mut now = 0.0;
        loop {
            now += gaps.sample(rng);
            if now > t {
                break;
            }
            let Some(g) = stream.draw(rng) else { continue };
            match index.get(&g) {
                Some(&j) => {
                    let last_off = intervals[j].last().map_or(0.0, |iv| iv.1);
                    if last_off > now {
                        continue;
                    }
                    let life: f64 = Exp1.sample(rng);
                    intervals[j].push((now, now + life));
                }
                None => {
                    let life: f64 = Exp1.sample(rng);
                    index.insert(g.clone(), groups.len());
                    groups.push(g);
                    intervals.push(vec![(now, now + life)]);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_unstable_by(|&a, &b| groups[a].cmp(&groups[b]));
    let mut sorted_groups = Vec::with_capacity(groups.len());
    let mut marks = Vec::with_capacity(groups.len());
    for j in order {
        sorted_groups.push(std::mem::replace(&mut groups[j], Group::from_sorted(Vec::new())));
        marks.push(ActivationMark { intervals: std::mem::take(&mut intervals[j]) });
    }
    Ok(Timeline { n: model.n(), horizon: t, groups: sorted_groups, marks })
}

/// Stationary sample of the graph with every rate scaled by `1 + t`.
pub fn sample_rescaled(model: &Model, rng: &mut SimRng) -> Result<BipartiteState> {
    sample_scaled(model, 1.0 + model.t, rng)
}

/// Closed-form upper bound on `sum_a (pi_union - pi_rescaled)^2 / pi_rescaled`:
/// `(1+t)^3 sum_k k^4 p_k^3 l_n^{-(k-1)} (k^2/l_n)^{k-2} (E[W_n^3]/E[W_n])^k`.
pub fn equivalence_bound(weights: &WeightModel, sizes: &GroupSizeLaw, t: f64) -> Result<f64> {
    let ell = weights.ell_n();
    let ratio = weights.empirical_moment(3) / weights.empirical_moment(1);
    let ln_ell = ell.ln();
    let lead = 3.0 * (1.0 + t).ln();
    let mut total = 0.0;
    let max = sizes.max_size();
    let mut k = 2usize;
    loop {
        if max.is_some_and(|m| k > m) {
            break;
        }
        let p = sizes.pmf(k);
        if p > 0.0 {
            let kf = k as f64;
            let ln_term = lead + 4.0 * kf.ln() + 3.0 * p.ln() - (kf - 1.0) * ln_ell
                + (kf - 2.0) * (2.0 * kf.ln() - ln_ell)
                + kf * ratio.ln();
            let term = ln_term.exp();
            if !term.is_finite() {
                return Err(Error::Numeric(format!("bound term at k = {k} overflowed")));
            }
            total += term;
            if k > 2 && term < 1e-18 {
                break;
            }
        }
        // Past k^2 ~ l_n the per-size factor stops shrinking.
        if (k * k) as f64 * ratio > ell {
            return Err(Error::Numeric(format!(
                "bound terms stop decaying at k = {k}; group sizes are too heavy for l_n = {ell}"
            )));
        }
        k += 1;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{GroupSizeLaw, Model, WeightModel};
    use crate::rng;

    fn pair_model(t: f64) -> Model {
        Model::new(WeightModel::constant(2, 1.0).unwrap(), GroupSizeLaw::fixed(2).unwrap(), t).unwrap()
    }

    fn er_model(n: usize, t: f64) -> Model {
        Model::new(WeightModel::constant(n, 1.0).unwrap(), GroupSizeLaw::fixed(2).unwrap(), t).unwrap()
    }

    #[test]
    fn zero_horizon_has_only_initial_state() {
        let m = er_model(1000, 0.0);
        let tl = simulate(&m, &mut rng::seeded(1)).unwrap();
        assert!(tl.events().is_empty());
        assert_eq!(tl.union_graph(), tl.slice(0.0).unwrap());
        assert_eq!(tl.count_multi_switch(), 0);
    }

    #[test]
    fn single_group_occupancy() {
        let m = pair_model(1000.0);
        let tl = simulate(&m, &mut rng::seeded(4)).unwrap();
        let mut on_time = 0.0;
        for (_, mark) in tl.iter() {
            for &(on, off) in mark.intervals() {
                on_time += off.min(1000.0) - on;
            }
        }
        let frac = on_time / 1000.0;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn intervals_are_consistent_and_deterministic() {
        let m = er_model(2000, 2.0);
        let a = simulate(&m, &mut rng::seeded(9)).unwrap();
        let b = simulate(&m, &mut rng::seeded(9)).unwrap();
        assert_eq!(a, b);
        for (_, mark) in a.iter() {
            assert!(ActivationMark::new(mark.intervals().to_vec()).is_ok());
            assert!(mark.first_on() <= a.horizon());
        }
        let ev = a.events();
        assert!(ev.windows(2).all(|w| w[0].time <= w[1].time));
    }

    #[test]
    fn slice_membership_and_range() {
        let mark = ActivationMark::new(vec![(0.2, 0.7)]).unwrap();
        assert!(mark.active_at(0.5));
        assert!(!mark.active_at(0.8));
        let tl = simulate(&er_model(100, 1.0), &mut rng::seeded(2)).unwrap();
        assert!(matches!(tl.slice(1.5), Err(Error::Range { .. })));
        assert!(matches!(tl.slice(-0.1), Err(Error::Range { .. })));
        assert_eq!(tl.slice(0.0).unwrap(), tl.initial_state());
        let union = tl.union_graph();
        for s in [0.0, 0.3, 0.6, 1.0] {
            for g in tl.slice(s).unwrap().groups() {
                assert!(union.contains(g));
            }
        }
        assert!(ActivationMark::new(vec![(0.0, 0.5), (0.4, 0.9)]).is_err());
    }

    #[test]
    fn union_inclusion_probability_single_group() {
        let m = pair_model(1.0);
        let mut rng = rng::seeded(77);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| simulate(&m, &mut rng).unwrap().union_graph().group_count() == 1)
            .count();
        let expected = 0.5 + 0.5 * (1.0 - (-1f64).exp());
        let freq = hits as f64 / trials as f64;
        assert!((freq - expected).abs() < 0.004, "{freq} vs {expected}");
    }

    #[test]
    fn multi_switch_below_bound_single_group() {
        // (t + t^2) q^2 / P(active in [0, t]) with q = t = 1
        let m = pair_model(1.0);
        let mut rng = rng::seeded(13);
        let trials = 50_000;
        let mut multi = 0;
        let mut union = 0;
        for _ in 0..trials {
            let tl = simulate(&m, &mut rng).unwrap();
            union += tl.union_graph().group_count();
            multi += tl.count_multi_switch();
        }
        let p_union = 0.5 + 0.5 * (1.0 - (-1f64).exp());
        let bound = 2.0 / p_union;
        let frac = multi as f64 / union as f64;
        assert!(frac < bound.min(1.0), "{frac}");
        assert!(frac > 0.0);
    }

    #[test]
    fn stationarity_of_group_count() {
        let m = er_model(2000, 1.0);
        let reps = 1000;
        let mut at0 = Vec::new();
        let mut mid = Vec::new();
        for r in 0..reps {
            let tl = simulate(&m, &mut rng::replica(5, r)).unwrap();
            at0.push(tl.slice(0.0).unwrap().group_count() as f64);
            mid.push(tl.slice(0.5).unwrap().group_count() as f64);
        }
        let (m0, s0) = crate::stats::mean_se(&at0);
        let (m1, s1) = crate::stats::mean_se(&mid);
        assert!((m0 - m1).abs() < 3.0 * (s0 * s0 + s1 * s1).sqrt(), "{m0} vs {m1}");
    }

    #[test]
    fn ever_active_count() {
        let n = 100_000;
        let tl = simulate(&er_model(n, 1.0), &mut rng::seeded(31)).unwrap();
        let ratio = tl.union_graph().group_count() as f64 / (n as f64 * 2.0);
        assert!((ratio - 1.0).abs() < 0.03, "{ratio}");
    }

    #[test]
    fn rescaled_single_group() {
        let m = pair_model(1.0);
        let mut rng = rng::seeded(3);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| sample_rescaled(&m, &mut rng).unwrap().group_count() == 1)
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.005, "{freq}");
    }

    #[test]
    fn rescaled_group_ratio() {
        let n = 100_000;
        let s = sample_rescaled(&er_model(n, 1.0), &mut rng::seeded(17)).unwrap();
        let ratio = s.group_count() as f64 / n as f64;
        assert!((ratio - 2.0).abs() < 0.04, "{ratio}");
    }

    #[test]
    fn rescaled_at_zero_horizon_is_stationary() {
        let m = er_model(500, 0.0);
        let a = sample_rescaled(&m, &mut rng::seeded(6)).unwrap();
        let b = sample_stationary(&m, &mut rng::seeded(6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equivalence_bound_examples() {
        let sizes = GroupSizeLaw::fixed(2).unwrap();
        let w = WeightModel::constant(1000, 1.0).unwrap();
        let b = equivalence_bound(&w, &sizes, 1.0).unwrap();
        assert!((b - 0.128).abs() < 1e-12, "{b}");
        let b2 = equivalence_bound(&WeightModel::constant(2000, 1.0).unwrap(), &sizes, 1.0).unwrap();
        assert!((b2 / b - 0.5).abs() < 1e-12);
        let b0 = equivalence_bound(&w, &sizes, 0.0).unwrap();
        assert!((b0 / b - 0.125).abs() < 1e-12);
        let pl = equivalence_bound(&WeightModel::constant(10_000, 1.0).unwrap(), &GroupSizeLaw::power_law(3.5).unwrap(), 1.0);
        assert!(pl.unwrap() > 0.0);
    }

    #[test]
    fn event_log_jsonl() {
        let tl = simulate(&er_model(50, 1.0), &mut rng::seeded(8)).unwrap();
        let mut buf = Vec::new();
        tl.write_events_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut last = 0.0;
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let time = v["time"].as_f64().unwrap();
            assert!(time >= last && time <= 1.0);
            last = time;
            assert!(matches!(v["kind"].as_str(), Some("on") | Some("off")));
        }
    }
}
