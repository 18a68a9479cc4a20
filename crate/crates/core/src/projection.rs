//! One-node projection: vertices `i`, `j` are joined by `X(i, j)` parallel
//! edges, one per active group containing both.

use std::io::{self, Write};

use crate::dynamics::Timeline;
use crate::error::{Error, Result};
use crate::sampler::BipartiteState;

pub const DEFAULT_CLIQUE_GUARD: usize = 10_000;

/// Projection multigraph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedMultigraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    multiplicity: Vec<u32>,
    degrees: Vec<u64>,
}

impl ProjectedMultigraph {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// `(j, X(i, j))` for every neighbour `j` of `i`, in increasing `j`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.neighbors[range.clone()].iter().copied().zip(self.multiplicity[range].iter().copied())
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.neighbors[range.clone()].binary_search(&(j as u32)) {
            Ok(pos) => self.multiplicity[range.start + pos],
            Err(_) => 0,
        }
    }

    /// `d_i = sum_j X(i, j) = sum_{a active, a contains i} (|a| - 1)`.
    pub fn degree(&self, i: usize) -> u64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Number of vertex pairs with `X(i, j) >= 1`.
    pub fn distinct_edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// `sum_{i<j} X(i, j)`.
    pub fn edge_count_with_multiplicity(&self) -> u64 {
        self.multiplicity.iter().map(|&m| m as u64).sum::<u64>() / 2
    }

    /// CSV `i,j,multiplicity` with `i < j`; `simple` writes multiplicity 1 throughout.
    pub fn write_edges_csv<W: Write>(&self, mut out: W, simple: bool) -> io::Result<()> {
        writeln!(out, "i,j,multiplicity")?;
        for i in 0..self.n() {
            for (j, m) in self.neighbors(i) {
                if (j as usize) > i {
                    writeln!(out, "{i},{j},{}", if simple { 1 } else { m })?;
                }
            }
        }
        Ok(())
    }
}

pub fn project(state: &BipartiteState) -> Result<ProjectedMultigraph> {
    project_with_guard(state, DEFAULT_CLIQUE_GUARD)
}

pub fn project_with_guard(state: &BipartiteState, clique_guard: usize) -> Result<ProjectedMultigraph> {
    let n = state.n();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut degrees = vec![0u64; n];
    for g in state.groups() {
        let k = g.size();
        if k > clique_guard {
            return Err(Error::Guard(format!("group of size {k} exceeds the clique guard {clique_guard}")));
        }
        let m = g.members();
        for (x, &i) in m.iter().enumerate() {
            degrees[i as usize] += (k - 1) as u64;
            for &j in &m[x + 1..] {
                pairs.push((i, j));
                pairs.push((j, i));
            }
        }
    }
    pairs.sort_unstable();
    let mut offsets = vec![0usize; n + 1];
    let mut neighbors = Vec::with_capacity(pairs.len());
    let mut multiplicity: Vec<u32> = Vec::with_capacity(pairs.len());
    let mut last: Option<(u32, u32)> = None;
    for p in pairs {
        if last == Some(p) {
            *multiplicity.last_mut().expect("run has a head") += 1;
        } else {
            offsets[p.0 as usize + 1] += 1;
            neighbors.push(p.1);
            multiplicity.push(1);
            last = Some(p);
        }
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    Ok(ProjectedMultigraph { offsets, neighbors, multiplicity, degrees })
}

/// `d_i(s)` on a time grid.
pub fn degree_process(timeline: &Timeline, vertex: u32, grid: &[f64]) -> Result<Vec<u64>> {
    if vertex as usize >= timeline.n() {
        return Err(Error::Config(format!("vertex {vertex} outside [0, {})", timeline.n())));
    }
    if let Some(&s) = grid.iter().find(|s| !(0.0..=timeline.horizon()).contains(*s)) {
        return Err(Error::Range { s, t: timeline.horizon() });
    }
    let mine: Vec<_> = timeline.iter().filter(|(g, _)| g.contains(vertex)).collect();
    Ok(grid
        .iter()
        .map(|&s| {
            mine.iter()
                .filter(|(_, m)| m.active_at(s))
                .map(|(g, _)| (g.size() - 1) as u64)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate;
    use crate::params::{GroupSizeLaw, Model, WeightModel};
    use crate::rng;
    use crate::sampler::{sample_stationary, Group};

    fn state(n: usize, groups: &[&[u32]]) -> BipartiteState {
        BipartiteState::new(n, groups.iter().map(|g| Group::new(g, n).unwrap()).collect()).unwrap()
    }

    #[test]
    fn triangle() {
        let p = project(&state(3, &[&[0, 1, 2]])).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(p.multiplicity(i, j), 1);
            assert_eq!(p.multiplicity(j, i), 1);
        }
        assert_eq!(p.degrees(), &[2, 2, 2]);
    }

    #[test]
    fn overlapping_groups_add_multiplicity() {
        let p = project(&state(3, &[&[0, 1], &[0, 1, 2]])).unwrap();
        assert_eq!(p.multiplicity(0, 1), 2);
        assert_eq!(p.degree(0), 3);
        assert_eq!(p.distinct_edge_count(), 3);
        assert_eq!(p.edge_count_with_multiplicity(), 4);
    }

    #[test]
    fn empty_state() {
        let p = project(&BipartiteState::empty(4)).unwrap();
        assert_eq!(p.degrees(), &[0, 0, 0, 0]);
        assert_eq!(p.distinct_edge_count(), 0);
    }

    #[test]
    fn clique_guard_trips() {
        let s = state(5, &[&[0, 1, 2, 3, 4]]);
        assert!(matches!(project_with_guard(&s, 4), Err(Error::Guard(_))));
        assert!(project_with_guard(&s, 5).is_ok());
    }

    #[test]
    fn edge_csv() {
        let p = project(&state(3, &[&[0, 1], &[0, 1, 2]])).unwrap();
        let mut buf = Vec::new();
        p.write_edges_csv(&mut buf, false).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,multiplicity\n0,1,2\n0,2,1\n1,2,1\n");
    }

    #[test]
    fn handshake_and_average_degree() {
        let n = 100_000;
        let sizes = GroupSizeLaw::finite(&[0.5, 0.3, 0.2]).unwrap();
        let m = Model::new(WeightModel::constant(n, 1.0).unwrap(), sizes.clone(), 0.0).unwrap();
        let s = sample_stationary(&m, &mut rng::seeded(12)).unwrap();
        let p = project(&s).unwrap();
        let total: u64 = p.degrees().iter().sum();
        assert_eq!(total, 2 * p.edge_count_with_multiplicity());
        let expected: usize = s.groups().iter().map(|g| g.size() * (g.size() - 1)).sum();
        assert_eq!(total as usize, expected);
        let avg = total as f64 / n as f64;
        let limit = sizes.mu2() - sizes.mu();
        assert!((avg / limit - 1.0).abs() < 0.02, "{avg} vs {limit}");
    }

    #[test]
    fn degree_process_basics() {
        let m = Model::new(WeightModel::constant(200, 1.0).unwrap(), GroupSizeLaw::fixed(3).unwrap(), 1.0).unwrap();
        let tl = simulate(&m, &mut rng::seeded(4)).unwrap();
        let grid = [0.0, 0.25, 0.5, 1.0];
        for v in 0..200u32 {
            let d = degree_process(&tl, v, &grid).unwrap();
            for (s, &dv) in grid.iter().zip(&d) {
                let p = project(&tl.slice(*s).unwrap()).unwrap();
                assert_eq!(p.degree(v as usize), dv);
            }
        }
        assert!(degree_process(&tl, 0, &[2.0]).is_err());
    }

    #[test]
    fn projection_commutes_with_slicing() {
        let m = Model::new(WeightModel::constant(300, 1.0).unwrap(), GroupSizeLaw::finite(&[0.5, 0.5]).unwrap(), 1.0)
            .unwrap();
        let tl = simulate(&m, &mut rng::seeded(10)).unwrap();
        for s in [0.0, 0.4, 0.9] {
            let direct = project(&tl.slice(s).unwrap()).unwrap();
            let groups: Vec<Group> =
                tl.iter().filter(|(_, mk)| mk.active_at(s)).map(|(g, _)| g.clone()).collect();
            let restricted = project(&BipartiteState::new(300, groups).unwrap()).unwrap();
            assert_eq!(direct, restricted);
        }
    }
}
