//! Continuous-time WARM process on a graph.
//!
//! Every vertex carries a Poisson clock of rate `λ_v`. At its `k`-th ring the
//! vertex reinforces one incident edge, chosen by the α-power rule applied to
//! the current tallies in local edge order with the uniform `U_{k,v}`.
//!
//! Clock gaps and choice uniforms come from per-vertex streams keyed by
//! `(seed, vertex name, purpose)`. `U_{k,v}` is the `k`-th output of the choice
//! stream, so it can be read without simulating anything.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::rng::Substream;
use crate::urn::select_weighted;

pub const DEFAULT_EVENT_CAP: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarmConfig {
    pub alpha: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Whether the uniform column is written to the event CSV.
    pub record_uniforms: bool,
    pub event_cap: u64,
}

impl WarmConfig {
    pub fn new(alpha: f64, horizon: f64, seed: u64) -> Self {
        Self { alpha, horizon, seed, record_uniforms: true, event_cap: DEFAULT_EVENT_CAP }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Clock stream of vertex `v`.
pub fn clock_stream(graph: &Graph, seed: u64, v: VertexId) -> Substream {
    Substream::derive(seed, graph.name(v).as_bytes(), "clock")
}

/// Choice stream of vertex `v`; its `k`-th uniform is `U_{k,v}`.
pub fn choice_stream(graph: &Graph, seed: u64, v: VertexId) -> Substream {
    Substream::derive(seed, graph.name(v).as_bytes(), "choice")
}

/// The first `count` choice uniforms of `v`.
pub fn vertex_uniforms(graph: &Graph, seed: u64, v: VertexId, count: u64) -> Vec<f64> {
    let s = choice_stream(graph, seed, v);
    (1..=count).map(|k| s.uniform_at(k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiringEvent {
    pub vertex: VertexId,
    /// Firing ordinal at this vertex, from 1.
    pub k: u64,
    pub time: f64,
    /// Local index of the reinforced edge.
    pub edge_index: usize,
    pub uniform: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarmTrajectory {
    pub config: WarmConfig,
    pub events: Vec<FiringEvent>,
    pub final_tallies: Vec<u64>,
    #[serde(skip)]
    by_vertex: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pending {
    time: f64,
    vertex: VertexId,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on time.
        other.time.total_cmp(&self.time).then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn local_tallies(graph: &Graph, tallies: &[u64], v: VertexId, buf: &mut Vec<u64>) {
    buf.clear();
    buf.extend(graph.vertex(v).edges.iter().map(|e| tallies[e.0]));
}

/// Simulate up to the horizon.
pub fn simulate(graph: &Graph, config: &WarmConfig) -> Result<WarmTrajectory> {
    config.validate()?;
    let n = graph.vertex_count();
    let mut clocks: Vec<Substream> = graph.vertices().map(|v| clock_stream(graph, config.seed, v)).collect();
    let choices: Vec<Substream> = graph.vertices().map(|v| choice_stream(graph, config.seed, v)).collect();
    let mut fired = vec![0u64; n];
    let mut tallies = vec![1u64; graph.edge_count()];
    let mut events = Vec::new();
    let mut heap = BinaryHeap::with_capacity(n);
    for v in graph.vertices() {
        if graph.degree(v) == 0 {
            continue;
        }
        let t = clocks[v.0].exponential() / graph.rate(v);
        heap.push(Pending { time: t, vertex: v });
    }
    let mut buf = Vec::new();
    while let Some(p) = heap.pop() {
        if p.time > config.horizon {
            break;
        }
        if heap.peek().is_some_and(|q| q.time == p.time) {
            return Err(Error::ClockTie { time: p.time });
        }
        if events.len() as u64 >= config.event_cap {
            return Err(Error::EventCap { cap: config.event_cap });
        }
        let v = p.vertex;
        fired[v.0] += 1;
        let k = fired[v.0];
        let u = choices[v.0].uniform_at(k);
        local_tallies(graph, &tallies, v, &mut buf);
        let i = select_weighted(&buf, u, config.alpha);
        tallies[graph.vertex(v).edges[i].0] += 1;
        events.push(FiringEvent { vertex: v, k, time: p.time, edge_index: i, uniform: u });
        let next = p.time + clocks[v.0].exponential() / graph.rate(v);
        heap.push(Pending { time: next, vertex: v });
    }
    Ok(WarmTrajectory::assemble(graph, config.clone(), events, tallies))
}

/// Build a trajectory from prescribed `(vertex, time, edge_index)` firings.
///
/// Each event gets the midpoint of its edge's selection interval as its
/// uniform, so the log is consistent with the selection rule.
pub fn replay(graph: &Graph, config: &WarmConfig, firings: &[(VertexId, f64, usize)]) -> Result<WarmTrajectory> {
    config.validate()?;
    let mut order: Vec<&(VertexId, f64, usize)> = firings.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut fired = vec![0u64; graph.vertex_count()];
    let mut tallies = vec![1u64; graph.edge_count()];
    let mut events = Vec::with_capacity(firings.len());
    let mut buf = Vec::new();
    for &&(v, time, i) in &order {
        if v.0 >= graph.vertex_count() {
            return Err(Error::UnknownVertex(format!("#{}", v.0)));
        }
        if !(time > 0.0 && time <= config.horizon) {
            return Err(Error::InvalidInput(format!("firing time {time} outside (0, horizon]")));
        }
        if i >= graph.degree(v) {
            return Err(Error::InvalidInput(format!("edge index {i} out of range at {}", graph.name(v))));
        }
        local_tallies(graph, &tallies, v, &mut buf);
        let w: Vec<f64> = buf.iter().map(|&t| (t as f64).powf(config.alpha)).collect();
        let total: f64 = w.iter().sum();
        let before: f64 = w[..i].iter().sum();
        let u = (before + 0.5 * w[i]) / total;
        fired[v.0] += 1;
        tallies[graph.vertex(v).edges[i].0] += 1;
        events.push(FiringEvent { vertex: v, k: fired[v.0], time, edge_index: i, uniform: u });
    }
    Ok(WarmTrajectory::assemble(graph, config.clone(), events, tallies))
}

impl WarmTrajectory {
    fn assemble(graph: &Graph, config: WarmConfig, events: Vec<FiringEvent>, final_tallies: Vec<u64>) -> Self {
        let mut t = Self { config, events, final_tallies, by_vertex: Vec::new() };
        t.rebuild_index(graph);
        t
    }

    /// Rebuilds the per-vertex event index after deserialisation.
    pub fn rebuild_index(&mut self, graph: &Graph) {
        let mut by_vertex = vec![Vec::new(); graph.vertex_count()];
        for (i, e) in self.events.iter().enumerate() {
            by_vertex[e.vertex.0].push(i);
        }
        self.by_vertex = by_vertex;
    }

    pub fn horizon(&self) -> f64 {
        self.config.horizon
    }

    /// Events at `v` in firing order.
    pub fn firings(&self, v: VertexId) -> impl Iterator<Item = &FiringEvent> + '_ {
        self.by_vertex[v.0].iter().map(move |&i| &self.events[i])
    }

    /// Firing times `T_{1,v}, T_{2,v}, …` up to the horizon.
    pub fn firing_times(&self, v: VertexId) -> Vec<f64> {
        self.firings(v).map(|e| e.time).collect()
    }

    /// Recorded uniforms at `v`, i.e. `U_{k,v}` for realised `k`.
    pub fn realised_uniforms(&self, v: VertexId) -> Vec<f64> {
        self.firings(v).map(|e| e.uniform).collect()
    }

    /// `#{k : T_{k,v} ≤ t}`.
    pub fn firing_count(&self, v: VertexId, t: f64) -> Result<u64> {
        let list = self.by_vertex.get(v.0).ok_or_else(|| Error::UnknownVertex(format!("#{}", v.0)))?;
        Ok(list.partition_point(|&i| self.events[i].time <= t) as u64)
    }

    /// `N_t(e)`, starting from 1.
    pub fn tally_at(&self, graph: &Graph, e: EdgeId, t: f64) -> Result<u64> {
        if e.0 >= graph.edge_count() {
            return Err(Error::UnknownEdge(e.0));
        }
        let ed = graph.edge(e);
        let mut n = 1;
        for v in [ed.upper, ed.lower] {
            let Some(i) = graph.local_index(v, e) else { continue };
            n += self.firings(v).take_while(|f| f.time <= t).filter(|f| f.edge_index == i).count() as u64;
        }
        Ok(n)
    }

    /// Reinforcements of `e` per unit time over `(a, b]`.
    pub fn linear_rate(&self, graph: &Graph, e: EdgeId, window: (f64, f64)) -> Result<f64> {
        let (a, b) = window;
        if !(a < b) {
            return Err(Error::InvalidInput(format!("empty window ({a}, {b})")));
        }
        let na = self.tally_at(graph, e, a)?;
        let nb = self.tally_at(graph, e, b)?;
        Ok((nb - na) as f64 / (b - a))
    }

    /// Rate over the second half of the horizon and whether it reaches
    /// `ε λ / 4`, with `λ` the rate of the edge's lower endpoint.
    pub fn survival(&self, graph: &Graph, e: EdgeId, eps: f64) -> Result<(f64, bool)> {
        let h = self.horizon();
        let rate = self.linear_rate(graph, e, (h / 2.0, h))?;
        let lambda = graph.rate(graph.edge(e).lower);
        Ok((rate, rate >= eps * lambda / 4.0))
    }

    /// `time,vertex,k,edge_index,uniform`.
    pub fn events_csv(&self, graph: &Graph) -> String {
        let mut s = String::from("time,vertex,k,edge_index,uniform\n");
        for e in &self.events {
            let u = if self.config.record_uniforms { format!("{:?}", e.uniform) } else { String::new() };
            let _ = writeln!(s, "{:?},{},{},{},{}", e.time, graph.name(e.vertex), e.k, e.edge_index, u);
        }
        s
    }

    /// `edge,tally`.
    pub fn tallies_csv(&self, graph: &Graph) -> String {
        let mut s = String::from("edge,tally\n");
        for e in graph.edges() {
            let _ = writeln!(s, "{},{}", graph.edge_name(e), self.final_tallies[e.0]);
        }
        s
    }
}
