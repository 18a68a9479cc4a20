//! Connected components of the projection and the root's giant indicator over time.

use std::collections::{HashSet, VecDeque};

use crate::dynamics::Timeline;
use crate::error::{Error, Result};
use crate::projection::ProjectedMultigraph;
use crate::sampler::BipartiteState;
use crate::unionfind::UnionFind;

/// Component labels of the individuals and the largest component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMap {
    labels: Vec<u32>,
    sizes: Vec<usize>,
    giant: Option<u32>,
}

impl ComponentMap {
    fn from_union_find(mut uf: UnionFind) -> Self {
        let labels = uf.labels();
        let count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        // ties go to the smallest label
        let giant = (0..count).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).map(|l| l as u32);
        ComponentMap { labels, sizes, giant }
    }

    pub fn label(&self, v: u32) -> u32 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn component_size(&self, v: u32) -> usize {
        self.sizes[self.labels[v as usize] as usize]
    }

    pub fn giant_size(&self) -> usize {
        self.giant.map_or(0, |g| self.sizes[g as usize])
    }

    pub fn in_giant(&self, v: u32) -> bool {
        Some(self.labels[v as usize]) == self.giant
    }

    /// `|C_1| / n`; 0 for the empty vertex set.
    pub fn giant_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            0.0
        } else {
            self.giant_size() as f64 / self.labels.len() as f64
        }
    }
}

/// Components of the projection multigraph.
pub fn giant_fraction(graph: &ProjectedMultigraph) -> (f64, ComponentMap) {
    let mut uf = UnionFind::new(graph.n());
    for i in 0..graph.n() {
        for (j, _) in graph.neighbors(i) {
            uf.union(i as u32, j);
        }
    }
    let map = ComponentMap::from_union_find(uf);
    (map.giant_fraction(), map)
}

/// Components of the bipartite state restricted to individuals; groups are not counted.
pub fn giant_fraction_bipartite(state: &BipartiteState) -> (f64, ComponentMap) {
    let mut uf = UnionFind::new(state.n());
    for g in state.groups() {
        let m = g.members();
        for &v in &m[1..] {
            uf.union(m[0], v);
        }
    }
    let map = ComponentMap::from_union_find(uf);
    (map.giant_fraction(), map)
}

/// Individual-to-group incidence lists of a state, for ball exploration.
#[derive(Debug, Clone)]
pub struct Incidence<'a> {
    state: &'a BipartiteState,
    offsets: Vec<usize>,
    groups: Vec<u32>,
}

impl<'a> Incidence<'a> {
    pub fn new(state: &'a BipartiteState) -> Self {
        let n = state.n();
        let mut offsets = vec![0usize; n + 1];
        for g in state.groups() {
            for &v in g.members() {
                offsets[v as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut groups = vec![0u32; offsets[n]];
        for (a, g) in state.groups().iter().enumerate() {
            for &v in g.members() {
                groups[fill[v as usize]] = a as u32;
                fill[v as usize] += 1;
            }
        }
        Incidence { state, offsets, groups }
    }

    pub fn state(&self) -> &BipartiteState {
        self.state
    }

    /// Indices into `state.groups()` of the groups containing `v`.
    pub fn groups_of(&self, v: u32) -> &[u32] {
        &self.groups[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    /// Projection-graph distance from `root` to every individual within `radius`,
    /// as `(vertex, distance)` in BFS order.
    pub fn ball(&self, root: u32, radius: usize) -> Vec<(u32, usize)> {
        let mut seen_v = HashSet::from([root]);
        let mut seen_g = HashSet::new();
        let mut out = vec![(root, 0)];
        let mut queue = VecDeque::from([(root, 0usize)]);
        while let Some((v, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for &a in self.groups_of(v) {
                if !seen_g.insert(a) {
                    continue;
                }
                for &u in self.state.groups()[a as usize].members() {
                    if seen_v.insert(u) {
                        out.push((u, d + 1));
                        queue.push_back((u, d + 1));
                    }
                }
            }
        }
        out
    }

    /// `1{there is an individual at distance exactly r from root}`.
    pub fn boundary_nonempty(&self, root: u32, radius: usize) -> bool {
        self.ball(root, radius).last().is_some_and(|&(_, d)| d == radius)
    }
}

/// Fraction of individuals whose `r`-ball proxy disagrees with giant membership.
pub fn proxy_disagreement(state: &BipartiteState, radius: usize) -> f64 {
    let (_, map) = giant_fraction_bipartite(state);
    let inc = Incidence::new(state);
    let n = state.n();
    let bad = (0..n as u32).filter(|&v| inc.boundary_nonempty(v, radius) != map.in_giant(v)).count();
    bad as f64 / n as f64
}

/// `s -> 1{root in C_1^s}` sampled on a grid, with `r`-ball proxies.
#[derive(Debug, Clone, PartialEq)]
pub struct GiantTrajectory {
    pub root: u32,
    pub grid: Vec<f64>,
    pub indicator: Vec<bool>,
    /// `|C_1^s| / n` at each grid time: the indicator averaged over uniform roots.
    pub giant_fraction: Vec<f64>,
    /// `(r, 1{boundary of B_r(root) at time s is nonempty})`.
    pub proxies: Vec<(usize, Vec<bool>)>,
}

impl GiantTrajectory {
    /// Right-continuous step interpolation through the grid values.
    pub fn value_at(&self, s: f64) -> Option<bool> {
        let idx = self.grid.partition_point(|&g| g <= s);
        (idx > 0).then(|| self.indicator[idx - 1])
    }

    /// Grid times at which the indicator changes.
    pub fn jump_times(&self) -> Vec<f64> {
        self.indicator.windows(2).zip(&self.grid[1..]).filter(|(w, _)| w[0] != w[1]).map(|(_, &s)| s).collect()
    }
}

pub fn giant_trajectory(timeline: &Timeline, root: u32, grid: &[f64], radii: &[usize]) -> Result<GiantTrajectory> {
    if root as usize >= timeline.n() {
        return Err(Error::Config(format!("root {root} outside [0, {})", timeline.n())));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("grid must be nondecreasing".into()));
    }
    let mut indicator = Vec::with_capacity(grid.len());
    let mut fractions = Vec::with_capacity(grid.len());
    let mut proxies: Vec<(usize, Vec<bool>)> = radii.iter().map(|&r| (r, Vec::with_capacity(grid.len()))).collect();
    for &s in grid {
        let state = timeline.slice(s)?;
        let (frac, map) = giant_fraction_bipartite(&state);
        indicator.push(map.in_giant(root));
        fractions.push(frac);
        let inc = Incidence::new(&state);
        for (r, vals) in proxies.iter_mut() {
            vals.push(inc.boundary_nonempty(root, *r));
        }
    }
    Ok(GiantTrajectory { root, grid: grid.to_vec(), indicator, giant_fraction: fractions, proxies })
}
