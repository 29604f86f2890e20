//! Simple undirected graphs with optional labels and attributes.
//!
//! A [`Graph`] is immutable once built. Vertices are `0..n`, edges are stored
//! once as `(u, v)` with `u < v` in ascending order, and every per-edge map
//! (labels, attributes) is aligned with that edge order.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Discrete vertex or edge label. Symbols from other sources are interned to
/// integers before they reach a graph.
pub type Label = i64;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    vertex_labels: Option<Vec<Label>>,
    vertex_attributes: Option<Vec<Vec<f64>>>,
    edge_labels: Option<Vec<Label>>,
    edge_attributes: Option<Vec<Vec<f64>>>,
}

impl Graph {
    /// Builds a graph from an edge list. Each unordered pair may appear at
    /// most once in either orientation.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "multi-edge between {} and {}",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted_edges(n, list))
    }

    fn from_sorted_edges(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            adjacency,
            vertex_labels: None,
            vertex_attributes: None,
            edge_labels: None,
            edge_attributes: None,
        }
    }

    /// Edge `{u, v}` iff `matrix[u][v] == 1`. The matrix must be square,
    /// symmetric, 0/1 valued, with a zero diagonal.
    pub fn from_adjacency<R: AsRef<[u8]>>(matrix: &[R]) -> Result<Self> {
        let n = matrix.len();
        let mut edges = Vec::new();
        for (u, row) in matrix.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::InvalidGraph(format!(
                    "adjacency matrix is not square: row {u} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (v, &x) in row.iter().enumerate() {
                if x > 1 {
                    return Err(Error::InvalidGraph(format!(
                        "adjacency entry ({u}, {v}) = {x} is not 0 or 1"
                    )));
                }
                if u == v && x != 0 {
                    return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
                }
            }
        }
        for u in 0..n {
            for v in (u + 1)..n {
                let (a, b) = (matrix[u].as_ref()[v], matrix[v].as_ref()[u]);
                if a != b {
                    return Err(Error::InvalidGraph(format!(
                        "adjacency matrix is not symmetric at ({u}, {v})"
                    )));
                }
                if a == 1 {
                    edges.push((u, v));
                }
            }
        }
        Ok(Self::from_sorted_edges(n, edges))
    }

    /// Builds a graph from an adjacency-list map. Lists may be one-sided;
    /// the edge set is symmetrized. With `n = None` the vertex count is one
    /// past the largest key and every neighbor must also be a key.
    pub fn from_edge_dictionary(
        dict: &BTreeMap<usize, Vec<usize>>,
        n: Option<usize>,
    ) -> Result<Self> {
        let n = match n {
            Some(n) => n,
            None => dict.keys().next_back().map_or(0, |&k| k + 1),
        };
        let mut edges = Vec::new();
        for (&u, neighbors) in dict {
            if u >= n {
                return Err(Error::InvalidGraph(format!("vertex {u} is outside 0..{n}")));
            }
            for &v in neighbors {
                if v >= n {
                    return Err(Error::InvalidGraph(format!(
                        "dangling vertex id {v} in the list of {u}"
                    )));
                }
                if u == v {
                    return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
                }
                edges.push((u.min(v), u.max(v)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_edges(n, edges))
    }

    pub fn with_vertex_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "vertex label map covers {} of {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.vertex_labels = Some(labels);
        Ok(self)
    }

    pub fn with_vertex_attributes(mut self, attributes: Vec<Vec<f64>>) -> Result<Self> {
        if attributes.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "vertex attribute map covers {} of {} vertices",
                attributes.len(),
                self.n
            )));
        }
        check_uniform_dimension(&attributes, "vertex")?;
        self.vertex_attributes = Some(attributes);
        Ok(self)
    }

    /// Attaches edge labels keyed by unordered vertex pair. Every edge must be
    /// covered and every key must be an edge.
    pub fn with_edge_labels(
        self,
        labels: impl IntoIterator<Item = ((usize, usize), Label)>,
    ) -> Result<Self> {
        let aligned = self.align_edge_map(labels, "label")?;
        self.with_aligned_edge_labels(aligned)
    }

    /// Attaches edge labels given in [`Graph::edges`] order.
    pub fn with_aligned_edge_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.edges.len() {
            return Err(Error::InvalidGraph(format!(
                "edge label map covers {} of {} edges",
                labels.len(),
                self.edges.len()
            )));
        }
        self.edge_labels = Some(labels);
        Ok(self)
    }

    pub fn with_edge_attributes(
        self,
        attributes: impl IntoIterator<Item = ((usize, usize), Vec<f64>)>,
    ) -> Result<Self> {
        let aligned = self.align_edge_map(attributes, "attribute")?;
        self.with_aligned_edge_attributes(aligned)
    }

    pub fn with_aligned_edge_attributes(mut self, attributes: Vec<Vec<f64>>) -> Result<Self> {
        if attributes.len() != self.edges.len() {
            return Err(Error::InvalidGraph(format!(
                "edge attribute map covers {} of {} edges",
                attributes.len(),
                self.edges.len()
            )));
        }
        check_uniform_dimension(&attributes, "edge")?;
        self.edge_attributes = Some(attributes);
        Ok(self)
    }

    fn align_edge_map<T>(
        &self,
        entries: impl IntoIterator<Item = ((usize, usize), T)>,
        what: &str,
    ) -> Result<Vec<T>> {
        let mut slots: Vec<Option<T>> = (0..self.edges.len()).map(|_| None).collect();
        for ((u, v), value) in entries {
            let idx = self.edge_index(u, v).ok_or_else(|| {
                Error::InvalidGraph(format!("edge {what} given for non-edge ({u}, {v})"))
            })?;
            slots[idx] = Some(value);
        }
        slots
            .into_iter()
            .zip(&self.edges)
            .map(|(slot, &(u, v))| {
                slot.ok_or_else(|| Error::InvalidGraph(format!("edge ({u}, {v}) has no {what}")))
            })
            .collect()
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Position of edge `{u, v}` in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn vertex_labels(&self) -> Option<&[Label]> {
        self.vertex_labels.as_deref()
    }

    pub fn vertex_attributes(&self) -> Option<&[Vec<f64>]> {
        self.vertex_attributes.as_deref()
    }

    /// Edge labels aligned with [`Graph::edges`].
    pub fn edge_labels(&self) -> Option<&[Label]> {
        self.edge_labels.as_deref()
    }

    pub fn edge_attributes(&self) -> Option<&[Vec<f64>]> {
        self.edge_attributes.as_deref()
    }

    pub fn edge_label(&self, u: usize, v: usize) -> Option<Label> {
        let labels = self.edge_labels.as_ref()?;
        self.edge_index(u, v).map(|i| labels[i])
    }

    /// Same structure, vertex labels replaced.
    pub fn relabeled(&self, labels: Vec<Label>) -> Result<Self> {
        self.clone().with_vertex_labels(labels)
    }

    pub fn to_adjacency(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.n]; self.n];
        for &(u, v) in &self.edges {
            m[u][v] = 1;
            m[v][u] = 1;
        }
        m
    }

    /// Two-sided adjacency lists with an explicit key for every vertex.
    pub fn to_edge_dictionary(&self) -> BTreeMap<usize, Vec<usize>> {
        (0..self.n)
            .map(|v| (v, self.adjacency[v].clone()))
            .collect()
    }

    /// Attaches the label/attribute maps of `self` to a graph with the same
    /// vertex and edge sets. Used by the round-trip constructors.
    pub fn copy_annotations_to(&self, other: Graph) -> Result<Graph> {
        if other.n != self.n || other.edges != self.edges {
            return Err(Error::InvalidGraph("structure differs".into()));
        }
        Ok(Graph {
            vertex_labels: self.vertex_labels.clone(),
            vertex_attributes: self.vertex_attributes.clone(),
            edge_labels: self.edge_labels.clone(),
            edge_attributes: self.edge_attributes.clone(),
            ..other
        })
    }

    /// Subgraph induced by `subset`, re-indexed in ascending original order.
    /// Labels and attributes are carried over.
    pub fn induced_subgraph(&self, subset: &[usize]) -> Result<Graph> {
        let mut keep: Vec<usize> = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&v| v >= self.n) {
            return Err(Error::InvalidGraph(format!(
                "vertex {bad} is outside 0..{}",
                self.n
            )));
        }
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i;
        }
        let mut edges = Vec::new();
        let mut kept_edges = Vec::new();
        for (idx, &(u, v)) in self.edges.iter().enumerate() {
            if new_id[u] != usize::MAX && new_id[v] != usize::MAX {
                edges.push((new_id[u], new_id[v]));
                kept_edges.push(idx);
            }
        }
        // new ids are monotone in the old ones, so the edge order is preserved
        let mut sub = Graph::from_sorted_edges(keep.len(), edges);
        sub.vertex_labels = self
            .vertex_labels
            .as_ref()
            .map(|l| keep.iter().map(|&v| l[v]).collect());
        sub.vertex_attributes = self
            .vertex_attributes
            .as_ref()
            .map(|a| keep.iter().map(|&v| a[v].clone()).collect());
        sub.edge_labels = self
            .edge_labels
            .as_ref()
            .map(|l| kept_edges.iter().map(|&e| l[e]).collect());
        sub.edge_attributes = self
            .edge_attributes
            .as_ref()
            .map(|a| kept_edges.iter().map(|&e| a[e].clone()).collect());
        Ok(sub)
    }

    /// Vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::InvalidGraph(
                "permutation length differs from order".into(),
            ));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidGraph("not a permutation".into()));
            }
        }
        let mut g = Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))?;
        if let Some(labels) = &self.vertex_labels {
            let mut out = vec![0; self.n];
            for (v, &l) in labels.iter().enumerate() {
                out[perm[v]] = l;
            }
            g = g.with_vertex_labels(out)?;
        }
        if let Some(attrs) = &self.vertex_attributes {
            let mut out = vec![Vec::new(); self.n];
            for (v, a) in attrs.iter().enumerate() {
                out[perm[v]] = a.clone();
            }
            g = g.with_vertex_attributes(out)?;
        }
        if let Some(labels) = &self.edge_labels {
            let map = self
                .edges
                .iter()
                .zip(labels)
                .map(|(&(u, v), &l)| ((perm[u], perm[v]), l));
            g = g.with_edge_labels(map)?;
        }
        if let Some(attrs) = &self.edge_attributes {
            let map = self
                .edges
                .iter()
                .zip(attrs)
                .map(|(&(u, v), a)| ((perm[u], perm[v]), a.clone()));
            g = g.with_edge_attributes(map)?;
        }
        Ok(g)
    }
}

fn check_uniform_dimension(vectors: &[Vec<f64>], what: &str) -> Result<()> {
    if let Some(first) = vectors.first() {
        if let Some((i, v)) = vectors
            .iter()
            .enumerate()
            .find(|(_, v)| v.len() != first.len())
        {
            return Err(Error::InvalidGraph(format!(
                "{what} attribute {i} has dimension {}, expected {}",
                v.len(),
                first.len()
            )));
        }
    }
    Ok(())
}

/// Direct (tensor) product graph together with the factor pair behind each
/// product vertex.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    pub graph: Graph,
    pub pairs: Vec<(usize, usize)>,
}

/// Direct product of `g` and `h`.
///
/// Product vertices are the pairs `(u, u')` in lexicographic order, restricted
/// to equal vertex labels when `match_labels` is set. `(u, u')` and `(v, v')`
/// are adjacent iff `{u, v}` is an edge of `g` and `{u', v'}` an edge of `h`;
/// when matching labels and both graphs carry edge labels, the two edge
/// labels must also agree.
pub fn direct_product(g: &Graph, h: &Graph, match_labels: bool) -> Result<ProductGraph> {
    let (gl, hl) = if match_labels {
        let gl = g
            .vertex_labels()
            .ok_or_else(|| Error::incompatible(0, "label-matching product needs vertex labels"))?;
        let hl = h
            .vertex_labels()
            .ok_or_else(|| Error::incompatible(1, "label-matching product needs vertex labels"))?;
        (Some(gl), Some(hl))
    } else {
        (None, None)
    };
    let compare_edges = match_labels && g.edge_labels().is_some() && h.edge_labels().is_some();

    let m = h.order();
    let mut index = vec![usize::MAX; g.order() * m];
    let mut pairs = Vec::new();
    for u in 0..g.order() {
        for up in 0..m {
            let keep = match (gl, hl) {
                (Some(a), Some(b)) => a[u] == b[up],
                _ => true,
            };
            if keep {
                index[u * m + up] = pairs.len();
                pairs.push((u, up));
            }
        }
    }

    let mut edges = Vec::new();
    for (ei, &(u, v)) in g.edges().iter().enumerate() {
        for (fi, &(up, vp)) in h.edges().iter().enumerate() {
            if compare_edges && g.edge_labels().unwrap()[ei] != h.edge_labels().unwrap()[fi] {
                continue;
            }
            for (a, b) in [((u, up), (v, vp)), ((u, vp), (v, up))] {
                let ia = index[a.0 * m + a.1];
                let ib = index[b.0 * m + b.1];
                if ia != usize::MAX && ib != usize::MAX {
                    edges.push((ia, ib));
                }
            }
        }
    }
    let mut graph = Graph::new(pairs.len(), edges)?;
    if let Some(gl) = gl {
        graph = graph.with_vertex_labels(pairs.iter().map(|&(u, _)| gl[u]).collect())?;
    }
    Ok(ProductGraph { graph, pairs })
}

/// Convenience for building a labeled graph from an edge list.
pub fn labeled(n: usize, edges: &[(usize, usize)], labels: &[Label]) -> Result<Graph> {
    Graph::new(n, edges.iter().copied())?.with_vertex_labels(labels.to_vec())
}

/// Interns arbitrary hashable symbols to dense labels in first-seen order.
#[derive(Debug, Default, Clone)]
pub struct SymbolTable<S: std::hash::Hash + Eq> {
    ids: HashMap<S, Label>,
}

impl<S: std::hash::Hash + Eq> SymbolTable<S> {
    pub fn new() -> Self {
        SymbolTable {
            ids: HashMap::new(),
        }
    }

    pub fn intern(&mut self, symbol: S) -> Label {
        let next = self.ids.len() as Label;
        *self.ids.entry(symbol).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}
