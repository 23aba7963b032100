//! Event checkers applied to recorded WARM trajectories.
//!
//! Every verdict over an infinite family (all `k`, all `j > M′`) is evaluated
//! on the data available and carries a flag saying so.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::numeric::Z95;
use crate::params::ParamSet;
use crate::rng::RecordedUniforms;
use crate::urn::{corollary_classes, run_sequential, UrnState};
use crate::warm::{vertex_uniforms, WarmTrajectory};

/// Time-regularity of one vertex over its realised firings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeCheck {
    pub regular: bool,
    /// Number of firing times checked.
    pub checked: u64,
    /// Firings after the horizon are never checked, so this is always set
    /// unless a violation already decided the verdict.
    pub horizon_limited: bool,
}

/// `ε k/λ < T_k < k/(ελ)` for the given firing times.
///
/// A missing firing also counts against the upper bound: if `T_{K+1}` has not
/// happened by the horizon but `(K+1)/(ελ)` has passed, the vertex is late.
pub fn check_time_regular_times(times: &[f64], rate: f64, eps: f64, horizon: f64) -> TimeCheck {
    for (i, &t) in times.iter().enumerate() {
        let k = (i + 1) as f64;
        if !(eps * k / rate < t && t < k / (eps * rate)) {
            return TimeCheck { regular: false, checked: i as u64 + 1, horizon_limited: false };
        }
    }
    let next = (times.len() + 1) as f64;
    if next / (eps * rate) <= horizon {
        return TimeCheck { regular: false, checked: times.len() as u64, horizon_limited: false };
    }
    TimeCheck { regular: true, checked: times.len() as u64, horizon_limited: true }
}

pub fn check_time_regular(graph: &Graph, traj: &WarmTrajectory, v: VertexId, eps: f64) -> TimeCheck {
    check_time_regular_times(&traj.firing_times(v), graph.rate(v), eps, traj.horizon())
}

/// The three urn conditions on one vertex's uniforms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyaCheck {
    pub regular: bool,
    pub non_disturbing: bool,
    pub well_behaved: bool,
    /// Colours selected exactly `m − 1` times in the first `M` steps.
    pub p_children: BTreeSet<usize>,
    /// Fewer than `M` uniforms were available.
    pub regular_limited: bool,
    /// Last `j` checked for the non-disturbing bound (`M′` when complete).
    pub non_disturbing_checked_to: u64,
    /// Last `j` checked for the well-behaved bound; always a truncation.
    pub well_behaved_checked_to: u64,
}

impl PolyaCheck {
    pub fn good(&self) -> bool {
        self.regular && self.non_disturbing && self.well_behaved
    }

    pub fn horizon_limited(&self, params: &ParamSet) -> bool {
        self.regular_limited
            || (self.non_disturbing && self.non_disturbing_checked_to < params.mprime)
            || self.well_behaved
    }
}

/// `1 − n ((2m + ε⁻² q j)/(j/2))^α`; may be negative.
pub fn non_disturbing_bound(params: &ParamSet, j: u64) -> f64 {
    let j = j as f64;
    let inner = (2.0 * params.m as f64 + params.q * j / (params.eps * params.eps)) / (j / 2.0);
    1.0 - params.n as f64 * inner.powf(params.alpha)
}

/// Evaluate regularity, non-disturbance and good behaviour on `U_1, U_2, …`.
pub fn check_polya_conditions(uniforms: &[f64], params: &ParamSet) -> Result<PolyaCheck> {
    let big_m = params.big_m as usize;
    let (regular, p_children, regular_limited) = if uniforms.len() >= big_m {
        let init = UrnState::head_start(params.m, params.n as usize)?;
        let trace = run_sequential(&init, params.alpha, params.big_m, &mut RecordedUniforms::new(&uniforms[..big_m]))?;
        let (only_zero, exact) = corollary_classes(&trace, params.m)?;
        (only_zero && exact.len() >= 5, exact, false)
    } else {
        (false, BTreeSet::new(), true)
    };

    let mprime = params.mprime.min(uniforms.len() as u64);
    let mut non_disturbing = true;
    let mut nd_to = params.big_m;
    for j in params.big_m + 1..=mprime {
        nd_to = j;
        // Written as !(u <= bound) so a negative bound always fails.
        if !(uniforms[j as usize - 1] <= non_disturbing_bound(params, j)) {
            non_disturbing = false;
            break;
        }
    }

    let mut well_behaved = true;
    let mut wb_to = params.mprime;
    let mut count = 0u64;
    let cut = 1.0 - params.delta0 / 2.0;
    for j in params.mprime + 1..=uniforms.len() as u64 {
        wb_to = j;
        if uniforms[j as usize - 1] >= cut {
            count += 1;
        }
        if count as f64 > params.delta0 * j as f64 {
            well_behaved = false;
            break;
        }
    }

    Ok(PolyaCheck {
        regular,
        non_disturbing,
        well_behaved,
        p_children,
        regular_limited,
        non_disturbing_checked_to: nd_to,
        well_behaved_checked_to: wb_to,
    })
}

/// Which uniforms the goodness ledger reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UniformScope {
    /// Only `U_{k,v}` for firings that happened before the horizon.
    Realised,
    /// `U_{1,v} … U_{limit,v}` read straight from the vertex's choice stream.
    Stream { limit: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGoodness {
    pub name: String,
    pub time_regular: bool,
    pub time_good: bool,
    pub polya_regular: bool,
    pub polya_non_disturbing: bool,
    pub polya_well_behaved: bool,
    pub polya_good: bool,
    pub tree_good: bool,
    /// Local child indices (1-based) of the P-children.
    pub p_children: Vec<usize>,
    pub horizon_limited: bool,
}

/// Per-vertex goodness ledger, indexed by vertex id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub vertices: Vec<VertexGoodness>,
}

impl GoodnessReport {
    pub fn get(&self, v: VertexId) -> &VertexGoodness {
        &self.vertices[v.0]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Evaluate the ledger on every vertex. `params.n` must equal the arity of
/// every block.
pub fn goodness_report(
    graph: &Graph,
    traj: &WarmTrajectory,
    params: &ParamSet,
    scope: UniformScope,
) -> Result<GoodnessReport> {
    if graph.blocks().iter().any(|b| b.arity as u64 != params.n) {
        return Err(Error::InvalidInput(format!("parameter n = {} does not match the tree arity", params.n)));
    }
    let time: Vec<TimeCheck> = graph.vertices().map(|v| check_time_regular(graph, traj, v, params.eps)).collect();
    let mut out = Vec::with_capacity(graph.vertex_count());
    for v in graph.vertices() {
        let us = match scope {
            UniformScope::Realised => traj.realised_uniforms(v),
            UniformScope::Stream { limit } => vertex_uniforms(graph, traj.config.seed, v, limit),
        };
        let p = check_polya_conditions(&us, params)?;
        let children = graph.children(v);
        let time_good = children.iter().all(|c| time[c.0].regular);
        let time_limited = children.is_empty() || children.iter().any(|c| time[c.0].horizon_limited);
        let polya_good = p.good();
        out.push(VertexGoodness {
            name: graph.name(v),
            time_regular: time[v.0].regular,
            time_good,
            polya_regular: p.regular,
            polya_non_disturbing: p.non_disturbing,
            polya_well_behaved: p.well_behaved,
            polya_good,
            tree_good: time_good && polya_good,
            p_children: p.p_children.iter().copied().collect(),
            horizon_limited: time_limited || p.horizon_limited(params),
        });
    }
    Ok(GoodnessReport { vertices: out })
}

/// Children whose edge `v` reinforced exactly `m − 1` times in its first `M`
/// WARM firings; compared against the offline P-children as a diagnostic.
pub fn realised_children(graph: &Graph, traj: &WarmTrajectory, v: VertexId, params: &ParamSet) -> BTreeSet<usize> {
    let offset = usize::from(graph.parent(v).is_some());
    let mut counts = vec![0u64; graph.children(v).len()];
    for f in traj.firings(v).take(params.big_m as usize) {
        if f.edge_index >= offset && f.edge_index - offset < counts.len() {
            counts[f.edge_index - offset] += 1;
        }
    }
    counts.iter().enumerate().filter(|&(_, &c)| c == params.m - 1).map(|(i, _)| i + 1).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParentCheck {
    pub nurturing: bool,
    pub non_disturbing: bool,
    pub good: bool,
    pub horizon_limited: bool,
}

fn parent_of(graph: &Graph, v: VertexId) -> Result<VertexId> {
    graph.parent(v).ok_or_else(|| Error::InvalidInput(format!("{} has no parent", graph.name(v))))
}

/// Reinforcements of `v̄v` by `v̄` during `[0, t₀(v)]` and `(t₀(v), t₁(v)]`.
pub fn check_parent(graph: &Graph, traj: &WarmTrajectory, v: VertexId, params: &ParamSet) -> Result<ParentCheck> {
    let parent = parent_of(graph, v)?;
    let times = params.vertex_times(graph.rate(v));
    let edge = graph.parent_edge(v).expect("non-root has a parent edge");
    let idx = graph.local_index(parent, edge).expect("edge is incident to the parent");
    let (mut early, mut late) = (0u64, 0u64);
    for f in traj.firings(parent).filter(|f| f.edge_index == idx) {
        if f.time <= times.t0 {
            early += 1;
        } else if f.time <= times.t1 {
            late += 1;
        }
    }
    let nurturing = early == params.m - 1;
    let non_disturbing = late == 0;
    Ok(ParentCheck {
        nurturing,
        non_disturbing,
        good: nurturing && non_disturbing,
        horizon_limited: traj.horizon() < times.t1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparkCheck {
    pub neighbours_silent: bool,
    pub child_time_regular: bool,
    pub parent_timing: bool,
    pub parent_choices: bool,
    pub holds: bool,
    pub horizon_limited: bool,
}

/// The initial-spark event at `v̄` for a vertex `v` of depth at least 2.
pub fn check_spark(graph: &Graph, traj: &WarmTrajectory, v: VertexId, params: &ParamSet) -> Result<SparkCheck> {
    if graph.vertex(v).depth() < 2 {
        return Err(Error::InvalidInput(format!("{} must have depth >= 2", graph.name(v))));
    }
    let parent = parent_of(graph, v)?;
    let times = params.vertex_times(graph.rate(v));
    let neighbours_silent =
        graph.ball(parent).into_iter().skip(1).all(|u| traj.firings(u).next().is_none_or(|f| f.time >= times.t0));
    let child_time_regular = check_time_regular(graph, traj, v, params.eps).regular;
    let early: Vec<_> = traj.firings(parent).filter(|f| f.time <= times.t0).collect();
    let late = traj.firings(parent).any(|f| f.time > times.t0 && f.time <= times.t1);
    let parent_timing = early.len() as u64 == params.m - 1 && !late;
    let edge = graph.parent_edge(v).expect("non-root has a parent edge");
    let idx = graph.local_index(parent, edge).expect("edge is incident to the parent");
    let parent_choices = early.iter().all(|f| f.edge_index == idx);
    Ok(SparkCheck {
        neighbours_silent,
        child_time_regular,
        parent_timing,
        parent_choices,
        holds: neighbours_silent && child_time_regular && parent_timing && parent_choices,
        horizon_limited: traj.horizon() < times.t1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisconnectCheck {
    pub e1: bool,
    pub e2: bool,
    /// Both conditions held and the edge `v v_n` was reinforced anyway.
    pub violated: bool,
}

/// Disconnection conditions at a non-root vertex `v` and its last child `v_n`.
///
/// `v_n` must have children of its own: a leaf has a single edge and always
/// reinforces it, so the argument does not apply to truncated bottom layers.
pub fn check_disconnect(graph: &Graph, traj: &WarmTrajectory, v: VertexId) -> Result<DisconnectCheck> {
    parent_of(graph, v)?;
    let children = graph.children(v);
    let &last = children.last().ok_or_else(|| Error::InvalidInput(format!("{} has no children", graph.name(v))))?;
    if !graph.is_internal(last) {
        return Err(Error::InvalidInput(format!("last child {} is a leaf", graph.name(last))));
    }
    let n = children.len() as f64;
    let alpha = traj.config.alpha;
    let x = |j: u64| (1.0 + j as f64 / n).powf(alpha);
    let e1 = traj.firings(v).all(|f| f.uniform <= x(f.k - 1) / (1.0 + x(f.k - 1)));
    let e2 = traj.firings(last).all(|f| f.uniform >= 1.0 / (1.0 + x(f.k - 1)));
    let edge = graph.parent_edge(last).expect("child has a parent edge");
    let violated = e1 && e2 && traj.final_tallies[edge.0] > 1;
    Ok(DisconnectCheck { e1, e2, violated })
}

/// Vertices `v` where [`check_disconnect`] applies.
pub fn disconnect_candidates(graph: &Graph) -> Vec<VertexId> {
    graph
        .vertices()
        .filter(|&v| graph.parent(v).is_some() && graph.children(v).last().is_some_and(|&c| graph.is_internal(c)))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrystalTree {
    pub root: Option<VertexId>,
    /// Breadth-first order.
    pub nodes: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    /// Number of children appended under each node, aligned with `nodes`.
    pub offspring: Vec<usize>,
    /// Whether the node could have children inside the truncation.
    pub interior: Vec<bool>,
}

impl CrystalTree {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Breadth-first closure of tree-good P-children from `v`.
pub fn build_crystal_tree(graph: &Graph, report: &GoodnessReport, v: VertexId) -> CrystalTree {
    let mut tree = CrystalTree::default();
    if !report.get(v).tree_good {
        return tree;
    }
    tree.root = Some(v);
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        let children = graph.children(u);
        let mut added = 0;
        for &k in &report.get(u).p_children {
            let Some(&c) = children.get(k - 1) else { continue };
            if report.get(c).tree_good {
                tree.edges.push((u, c));
                queue.push_back(c);
                added += 1;
            }
        }
        tree.nodes.push(u);
        tree.offspring.push(added);
        tree.interior.push(graph.is_internal(u));
    }
    tree
}

/// Pooled offspring law of crystallisation trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwStatistics {
    pub histogram: BTreeMap<usize, u64>,
    pub nodes: u64,
    pub trees: u64,
    pub empty_trees: u64,
    /// `None` when no interior node was observed.
    pub mean: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub supercritical: bool,
}

impl GwStatistics {
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("offspring,count\n");
        for (k, c) in &self.histogram {
            let _ = writeln!(s, "{k},{c}");
        }
        s
    }
}

/// Offspring histogram over interior nodes, mean with a 95% interval, and
/// whether the interval lies above 1.
pub fn gw_statistics(trees: &[CrystalTree]) -> GwStatistics {
    let mut histogram = BTreeMap::new();
    let mut xs = Vec::new();
    for t in trees {
        for (i, &k) in t.offspring.iter().enumerate() {
            if t.interior[i] {
                *histogram.entry(k).or_insert(0) += 1;
                xs.push(k as f64);
            }
        }
    }
    let empty_trees = trees.iter().filter(|t| t.is_empty()).count() as u64;
    let n = xs.len();
    let (mean, ci) = if n == 0 {
        (None, None)
    } else {
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let half = Z95 * (var / n as f64).sqrt();
        (Some(mean), Some((mean - half, mean + half)))
    };
    GwStatistics {
        histogram,
        nodes: n as u64,
        trees: trees.len() as u64,
        empty_trees,
        mean,
        ci,
        supercritical: ci.is_some_and(|(lo, _)| lo > 1.0),
    }
}
