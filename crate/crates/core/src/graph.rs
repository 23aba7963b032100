//! Truncated rooted trees with geometric firing rates, and chains of such trees
//! joined root-to-root.
//!
//! Vertices are addressed by their path from the root: the label `12` is the
//! second child of the first child. Each vertex orders its incident edges with
//! the parent edge first (index 0, absent at a root), then children in label
//! order, then spine edges at composite roots (previous block, next block).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

/// Shape and rate decay of one tree block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub arity: u32,
    pub depth: usize,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub block: usize,
    /// Child indices from the block root, each in `1..=arity`.
    pub label: Vec<u32>,
    pub rate: f64,
    pub parent: Option<VertexId>,
    pub children: Vec<VertexId>,
    /// Incident edges in local order.
    pub edges: Vec<EdgeId>,
}

impl Vertex {
    pub fn depth(&self) -> usize {
        self.label.len()
    }

    pub fn is_root(&self) -> bool {
        self.label.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Tree,
    Spine,
}

/// An edge `upper — lower`; for tree edges `upper` is the parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub upper: VertexId,
    pub lower: VertexId,
    pub kind: EdgeKind,
}

/// One incident edge as seen from a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub local: usize,
    pub edge: EdgeId,
    pub other: VertexId,
}

/// A single tree or a chain of trees with roots joined by spine edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    blocks: Vec<BlockSpec>,
    roots: Vec<VertexId>,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    #[serde(skip)]
    index: HashMap<(usize, Vec<u32>), VertexId>,
}

fn check_block(b: &BlockSpec) -> Result<()> {
    if b.arity < 2 || b.depth < 1 || !(b.q > 0.0 && b.q < 1.0) {
        return Err(Error::InvalidInput(format!("tree block needs arity >= 2, depth >= 1 and q in (0,1), got {b:?}")));
    }
    Ok(())
}

/// Complete `n`-ary tree of depth `depth` with rates `q^{d(v)}`.
pub fn build_tree(n: u32, depth: usize, q: f64) -> Result<Graph> {
    build_composite(&[BlockSpec { arity: n, depth, q }])
}

/// Trees joined by an edge between consecutive roots. Every root has rate 1.
pub fn build_composite(blocks: &[BlockSpec]) -> Result<Graph> {
    if blocks.is_empty() {
        return Err(Error::InvalidInput("composite graph needs at least one block".into()));
    }
    blocks.iter().try_for_each(check_block)?;
    let mut g = Graph {
        blocks: blocks.to_vec(),
        roots: Vec::new(),
        vertices: Vec::new(),
        edges: Vec::new(),
        index: HashMap::new(),
    };
    for (b, spec) in blocks.iter().enumerate() {
        let root = g.push_vertex(b, Vec::new(), 1.0, None);
        g.roots.push(root);
        // Breadth-first, so children appear in label order.
        let mut frontier = vec![root];
        for _ in 0..spec.depth {
            let mut next = Vec::with_capacity(frontier.len() * spec.arity as usize);
            for &p in &frontier {
                for c in 1..=spec.arity {
                    let mut label = g.vertices[p.0].label.clone();
                    label.push(c);
                    let rate = g.vertices[p.0].rate * spec.q;
                    let child = g.push_vertex(b, label, rate, Some(p));
                    let e = g.push_edge(p, child, EdgeKind::Tree);
                    g.vertices[child.0].edges.push(e);
                    g.vertices[p.0].children.push(child);
                    g.vertices[p.0].edges.push(e);
                    next.push(child);
                }
            }
            frontier = next;
        }
    }
    for w in 0..blocks.len().saturating_sub(1) {
        let (a, b) = (g.roots[w], g.roots[w + 1]);
        let e = g.push_edge(a, b, EdgeKind::Spine);
        g.vertices[a.0].edges.push(e);
        g.vertices[b.0].edges.push(e);
    }
    Ok(g)
}

impl Graph {
    fn push_vertex(&mut self, block: usize, label: Vec<u32>, rate: f64, parent: Option<VertexId>) -> VertexId {
        let id = VertexId(self.vertices.len());
        self.index.insert((block, label.clone()), id);
        self.vertices.push(Vertex { block, label, rate, parent, children: Vec::new(), edges: Vec::new() });
        id
    }

    fn push_edge(&mut self, upper: VertexId, lower: VertexId, kind: EdgeKind) -> EdgeId {
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge { upper, lower, kind });
        id
    }

    /// Rebuilds the label index after deserialisation.
    pub fn reindex(&mut self) {
        self.index = self.vertices.iter().enumerate().map(|(i, v)| ((v.block, v.label.clone()), VertexId(i))).collect();
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn root(&self, block: usize) -> VertexId {
        self.roots[block]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn rate(&self, v: VertexId) -> f64 {
        self.vertices[v.0].rate
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.vertices[v.0].edges.len()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.vertices[v.0].parent
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.vertices[v.0].children
    }

    /// Whether `v` has children (within the truncation).
    pub fn is_internal(&self, v: VertexId) -> bool {
        !self.vertices[v.0].children.is_empty()
    }

    /// Look up a vertex in block 0 by its child-index path.
    pub fn find(&self, label: &[u32]) -> Option<VertexId> {
        self.find_in(0, label)
    }

    pub fn find_in(&self, block: usize, label: &[u32]) -> Option<VertexId> {
        self.index.get(&(block, label.to_vec())).copied()
    }

    /// Look up a vertex by its display name.
    pub fn lookup(&self, name: &str) -> Result<VertexId> {
        let (block, label) = parse_name(name)?;
        self.find_in(block, &label).ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// Incident edges of `v` in local order.
    pub fn neighbours(&self, v: VertexId) -> Result<Vec<Incidence>> {
        let vx = self.vertices.get(v.0).ok_or_else(|| Error::UnknownVertex(format!("#{}", v.0)))?;
        Ok(vx
            .edges
            .iter()
            .enumerate()
            .map(|(local, &edge)| {
                let e = &self.edges[edge.0];
                let other = if e.upper == v { e.lower } else { e.upper };
                Incidence { local, edge, other }
            })
            .collect())
    }

    /// The edge at local index `i` of `v`.
    pub fn local_edge(&self, v: VertexId, i: usize) -> Option<EdgeId> {
        self.vertices[v.0].edges.get(i).copied()
    }

    /// The edge from `v` to its parent.
    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.vertices[v.0].parent.map(|_| self.vertices[v.0].edges[0])
    }

    /// Local index of `e` at `v`.
    pub fn local_index(&self, v: VertexId, e: EdgeId) -> Option<usize> {
        self.vertices[v.0].edges.iter().position(|&x| x == e)
    }

    /// Display name: `r` for a root, the child indices otherwise (dot
    /// separated once any arity reaches 10), prefixed `bJ:` in a composite.
    pub fn name(&self, v: VertexId) -> String {
        let vx = &self.vertices[v.0];
        let body = label_string(&vx.label, self.blocks[vx.block].arity);
        if self.blocks.len() > 1 {
            format!("b{}:{}", vx.block, body)
        } else {
            body
        }
    }

    /// `upper-lower` by vertex names.
    pub fn edge_name(&self, e: EdgeId) -> String {
        let ed = &self.edges[e.0];
        format!("{}-{}", self.name(ed.upper), self.name(ed.lower))
    }

    /// Descendants of `v` including `v`.
    pub fn descendants(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.vertices[out[i].0].children);
            i += 1;
        }
        out
    }

    /// `v` and its neighbours.
    pub fn ball(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        for &e in &self.vertices[v.0].edges {
            let ed = &self.edges[e.0];
            out.push(if ed.upper == v { ed.lower } else { ed.upper });
        }
        out
    }

    /// One line per vertex: `name rate parent children… ~spine…`.
    pub fn to_adjacency(&self) -> String {
        let mut s = String::new();
        for v in self.vertices() {
            let vx = self.vertex(v);
            s.push_str(&self.name(v));
            s.push(' ');
            s.push_str(&format!("{:?}", vx.rate));
            s.push(' ');
            match vx.parent {
                Some(p) => s.push_str(&self.name(p)),
                None => s.push('-'),
            }
            for &c in &vx.children {
                s.push(' ');
                s.push_str(&self.name(c));
            }
            for &e in &vx.edges {
                let ed = &self.edges[e.0];
                if ed.kind == EdgeKind::Spine {
                    let other = if ed.upper == v { ed.lower } else { ed.upper };
                    s.push_str(" ~");
                    s.push_str(&self.name(other));
                }
            }
            s.push('\n');
        }
        s
    }
}

fn label_string(label: &[u32], arity: u32) -> String {
    if label.is_empty() {
        return "r".to_string();
    }
    let parts: Vec<String> = label.iter().map(|d| d.to_string()).collect();
    if arity >= 10 {
        parts.join(".")
    } else {
        parts.concat()
    }
}

/// Parses `r`, `121`, `1.12.3` or `b2:121`.
pub fn parse_name(name: &str) -> Result<(usize, Vec<u32>)> {
    let bad = || Error::UnknownVertex(name.to_string());
    let (block, body) = match name.strip_prefix('b').and_then(|rest| rest.split_once(':')) {
        Some((b, body)) => (b.parse::<usize>().map_err(|_| bad())?, body),
        None => (0, name),
    };
    if body == "r" {
        return Ok((block, Vec::new()));
    }
    let label: Option<Vec<u32>> = if body.contains('.') {
        body.split('.').map(|p| p.parse().ok()).collect()
    } else {
        body.chars().map(|c| c.to_digit(10)).collect()
    };
    let label = label.ok_or_else(bad)?;
    if label.is_empty() || label.contains(&0) {
        return Err(bad());
    }
    Ok((block, label))
}

/// `1 2^{k-1} 111` for `k = 1..=count`.
pub fn spark_labels(count: usize) -> Vec<Vec<u32>> {
    (1..=count)
        .map(|k| {
            let mut l = vec![1];
            l.extend(std::iter::repeat_n(2, k - 1));
            l.extend([1, 1, 1]);
            l
        })
        .collect()
}

/// A spark vertex and, when requested, its anchor `v n 1 1 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spark {
    pub vertex: Vec<u32>,
    pub anchor: Option<Vec<u32>>,
}

/// Spark vertices of an `n`-ary tree truncated at `depth`.
pub fn spark_vertices(n: u32, depth: usize, count: usize, anchors: bool) -> Result<Vec<Spark>> {
    if n < 2 {
        return Err(Error::InvalidInput("sparks need arity >= 2".into()));
    }
    spark_labels(count)
        .into_iter()
        .map(|v| {
            let needed = if anchors { v.len() + 4 } else { v.len() };
            if needed > depth {
                return Err(Error::DepthOverflow { needed, depth });
            }
            let anchor = anchors.then(|| {
                let mut z = v.clone();
                z.extend([n, 1, 1, 1]);
                z
            });
            Ok(Spark { vertex: v, anchor })
        })
        .collect()
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_adjacency())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_tree_counts() {
        let q = 0.3;
        let g = build_tree(2, 2, q).unwrap();
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(g.edge_count(), 6);
        let mut rates: Vec<f64> = g.vertices().map(|v| g.rate(v)).collect();
        rates.sort_by(f64::total_cmp);
        let mut want = vec![1.0, q, q, q * q, q * q, q * q, q * q];
        want.sort_by(f64::total_cmp);
        assert_eq!(rates, want);
        let g = build_tree(3, 1, 0.5).unwrap();
        assert_eq!(g.degree(g.root(0)), 3);
        for l in 1..=3 {
            assert_eq!(g.degree(g.find(&[l]).unwrap()), 1);
        }
    }

    #[test]
    fn geometric_vertex_count() {
        let q = 0.7;
        let g = build_tree(2, 10, q).unwrap();
        assert_eq!(g.vertex_count(), (1 << 11) - 1);
        let deep = g.find(&[2; 10]).unwrap();
        let mut r = 1.0;
        for _ in 0..10 {
            r *= q;
        }
        assert_eq!(g.rate(deep), r);
    }

    #[test]
    fn degree_law() {
        let (n, d) = (3u32, 4usize);
        let g = build_tree(n, d, 0.5).unwrap();
        for v in g.vertices() {
            let depth = g.vertex(v).depth();
            let want = if depth == 0 {
                n as usize
            } else if depth < d {
                n as usize + 1
            } else {
                1
            };
            assert_eq!(g.degree(v), want);
        }
    }

    #[test]
    fn composite_degrees_and_counts() {
        let one = build_composite(&[BlockSpec { arity: 2, depth: 3, q: 0.5 }]).unwrap();
        assert_eq!(one, build_tree(2, 3, 0.5).unwrap());
        let g = build_composite(&[BlockSpec { arity: 2, depth: 1, q: 0.3 }, BlockSpec { arity: 3, depth: 1, q: 0.2 }])
            .unwrap();
        assert_eq!(g.degree(g.root(0)), 3);
        assert_eq!(g.degree(g.root(1)), 4);
        let blocks = [
            BlockSpec { arity: 2, depth: 3, q: 0.3 },
            BlockSpec { arity: 3, depth: 2, q: 0.2 },
            BlockSpec { arity: 4, depth: 2, q: 0.1 },
        ];
        let g = build_composite(&blocks).unwrap();
        let want: usize =
            blocks.iter().map(|b| (b.arity.pow(b.depth as u32 + 1) as usize - 1) / (b.arity as usize - 1)).sum();
        assert_eq!(g.vertex_count(), want);
        // Middle root: children, then previous spine, then next spine.
        let r1 = g.root(1);
        let nb = g.neighbours(r1).unwrap();
        assert_eq!(nb.len(), 5);
        assert_eq!(nb[3].other, g.root(0));
        assert_eq!(nb[4].other, g.root(2));
        assert_eq!(g.rate(r1), 1.0);
        assert_eq!(g.name(g.find_in(2, &[3, 1]).unwrap()), "b2:31");
    }

    #[test]
    fn neighbour_order() {
        let g = build_tree(2, 3, 0.5).unwrap();
        let nb = g.neighbours(g.root(0)).unwrap();
        assert_eq!(nb.iter().map(|i| g.name(i.other)).collect::<Vec<_>>(), ["1", "2"]);
        let v = g.find(&[1, 2]).unwrap();
        let nb = g.neighbours(v).unwrap();
        let names: Vec<_> = nb.iter().map(|i| g.name(i.other)).collect();
        assert_eq!(names, ["1", "121", "122"]);
        assert_eq!(nb.iter().map(|i| i.local).collect::<Vec<_>>(), [0, 1, 2]);
        let leaf = g.find(&[1, 2, 1]).unwrap();
        assert_eq!(g.neighbours(leaf).unwrap().len(), 1);
        assert!(g.neighbours(VertexId(999)).is_err());
    }

    #[test]
    fn names_round_trip() {
        let g = build_tree(11, 2, 0.5).unwrap();
        let v = g.find(&[11, 3]).unwrap();
        assert_eq!(g.name(v), "11.3");
        assert_eq!(g.lookup("11.3").unwrap(), v);
        assert_eq!(g.lookup("r").unwrap(), g.root(0));
        assert!(g.lookup("x").is_err());
        assert!(g.lookup("12.0").is_err());
    }

    #[test]
    fn spark_labels_and_overflow() {
        let s = spark_vertices(2, 8, 3, false).unwrap();
        assert_eq!(s[0].vertex, vec![1, 1, 1, 1]);
        assert_eq!(s[2].vertex, vec![1, 2, 2, 1, 1, 1]);
        let with = spark_vertices(3, 10, 2, true).unwrap();
        assert_eq!(with[1].anchor.as_deref(), Some(&[1, 2, 1, 1, 1, 3, 1, 1, 1][..]));
        assert!(matches!(spark_vertices(2, 8, 3, true), Err(Error::DepthOverflow { needed: 9, depth: 8 })));
    }

    #[test]
    fn spark_subtrees_are_disjoint() {
        let g = build_tree(2, 12, 0.5).unwrap();
        let sets: Vec<HashSet<VertexId>> = (1..=3)
            .map(|k| {
                let mut l = vec![1];
                l.extend(std::iter::repeat_n(2, k - 1));
                l.push(1);
                g.descendants(g.find(&l).unwrap()).into_iter().collect()
            })
            .collect();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(sets[i].is_disjoint(&sets[j]));
            }
        }
        // Anchor neighbourhoods: ball of the anchor's parent plus the anchor's subtree.
        let sparks = spark_vertices(2, 12, 3, true).unwrap();
        let zone: Vec<HashSet<VertexId>> = sparks
            .iter()
            .map(|s| {
                let z = g.find(s.anchor.as_ref().unwrap()).unwrap();
                let mut set: HashSet<_> = g.ball(g.parent(z).unwrap()).into_iter().collect();
                set.extend(g.descendants(z));
                set
            })
            .collect();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(zone[i].is_disjoint(&zone[j]));
            }
        }
    }

    #[test]
    fn adjacency_lines() {
        let g = build_tree(2, 1, 0.5).unwrap();
        assert_eq!(g.to_adjacency(), "r 1.0 - 1 2\n1 0.5 r\n2 0.5 r\n");
        let c = build_composite(&[BlockSpec { arity: 2, depth: 1, q: 0.5 }, BlockSpec { arity: 2, depth: 1, q: 0.5 }])
            .unwrap();
        assert!(c.to_adjacency().starts_with("b0:r 1.0 - b0:1 b0:2 ~b1:r\n"));
    }
}
