//! Acyclic multicast network model: unit-capacity directed edges, broadcast
//! (hyperedge) groups, max-flow and min-cut with hyperedges counted once,
//! the n-dimensional grid generator, and reduced-capacity construction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("graph contains a directed cycle")]
    CyclicGraph,
    #[error("sink {0} is not reachable from the source")]
    UnreachableSink(String),
    #[error("hyperedge groups at node {0} do not partition its outgoing edges")]
    MalformedHyperedge(String),
    #[error("capacity target {target} outside 1..{max_flow}")]
    InvalidTarget { target: usize, max_flow: usize },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("duplicate node {0}")]
    DuplicateNode(String),
    #[error("network has no sinks")]
    NoSinks,
    #[error("source {0} is also a sink")]
    SourceIsSink(String),
    #[error("node or edge index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("invalid grid spec: {0}")]
    BadGrid(String),
    #[error("malformed network file: {0}")]
    BadFormat(String),
}

/// A directed unit-capacity edge. `axis` tags grid edges with the coordinate
/// dimension they advance; relay forwarding uses it to route packets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub origin: NodeId,
    pub dest: NodeId,
    pub axis: Option<u8>,
}

/// An acyclic multicast network. Immutable once built; all operations here
/// are pure functions of the structure.
#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    edges: Vec<Edge>,
    source: NodeId,
    sinks: Vec<NodeId>,
    /// Per-node partition of its outgoing edges into broadcast groups.
    groups: Vec<Vec<Vec<EdgeId>>>,
    /// Nodes that perform random encoding; all other intermediates relay.
    coding: BTreeSet<NodeId>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    topo: Option<Vec<NodeId>>,
}

/// Result of [`Network::validate`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub topo_order: Vec<NodeId>,
    pub reachable: Vec<bool>,
}

/// Unit-capacity max-flow to one sink: the flow value and one edge-disjoint
/// path decomposition in original edge ids.
#[derive(Debug, Clone)]
pub struct FlowSummary {
    pub value: usize,
    pub paths: Vec<Vec<EdgeId>>,
}

/// Output of [`Network::reduce_capacity`].
#[derive(Debug, Clone)]
pub struct ReducedNetwork {
    pub network: Network,
    /// Deleted edges, as ids in the original network.
    pub deleted_edges: Vec<EdgeId>,
}

impl Network {
    /// Builds a network with singleton hyperedge groups and no coding nodes.
    pub fn new(
        names: Vec<String>,
        edge_list: Vec<(NodeId, NodeId)>,
        source: NodeId,
        sinks: Vec<NodeId>,
    ) -> Result<Self, NetError> {
        let n = names.len();
        {
            let mut seen = BTreeSet::new();
            for name in &names {
                if !seen.insert(name) {
                    return Err(NetError::DuplicateNode(name.clone()));
                }
            }
        }
        if source >= n {
            return Err(NetError::IndexOutOfRange(source));
        }
        if sinks.is_empty() {
            return Err(NetError::NoSinks);
        }
        for &s in &sinks {
            if s >= n {
                return Err(NetError::IndexOutOfRange(s));
            }
            if s == source {
                return Err(NetError::SourceIsSink(names[s].clone()));
            }
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        for (o, d) in edge_list {
            if o >= n || d >= n {
                return Err(NetError::IndexOutOfRange(o.max(d)));
            }
            edges.push(Edge { origin: o, dest: d, axis: None });
        }
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            out_edges[e.origin].push(id);
            in_edges[e.dest].push(id);
        }
        let groups = out_edges
            .iter()
            .map(|outs| outs.iter().map(|&e| vec![e]).collect())
            .collect();
        let mut net = Network {
            names,
            edges,
            source,
            sinks,
            groups,
            coding: BTreeSet::new(),
            out_edges,
            in_edges,
            topo: None,
        };
        net.topo = net.compute_topo();
        Ok(net)
    }

    /// Replaces the hyperedge partition at `node`. The groups must exactly
    /// partition the node's outgoing edges.
    pub fn with_groups(mut self, node: NodeId, groups: Vec<Vec<EdgeId>>) -> Result<Self, NetError> {
        if node >= self.names.len() {
            return Err(NetError::IndexOutOfRange(node));
        }
        let mut covered = BTreeSet::new();
        for g in &groups {
            if g.is_empty() {
                return Err(NetError::MalformedHyperedge(self.names[node].clone()));
            }
            for &e in g {
                if e >= self.edges.len()
                    || self.edges[e].origin != node
                    || !covered.insert(e)
                {
                    return Err(NetError::MalformedHyperedge(self.names[node].clone()));
                }
            }
        }
        if covered.len() != self.out_edges[node].len() {
            return Err(NetError::MalformedHyperedge(self.names[node].clone()));
        }
        self.groups[node] = groups;
        Ok(self)
    }

    pub fn with_coding<I: IntoIterator<Item = NodeId>>(mut self, nodes: I) -> Result<Self, NetError> {
        let set: BTreeSet<NodeId> = nodes.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&i| i >= self.names.len()) {
            return Err(NetError::IndexOutOfRange(bad));
        }
        self.coding = set;
        Ok(self)
    }

    pub fn with_axes(mut self, axes: &[(EdgeId, u8)]) -> Result<Self, NetError> {
        for &(e, axis) in axes {
            if e >= self.edges.len() {
                return Err(NetError::IndexOutOfRange(e));
            }
            self.edges[e].axis = Some(axis);
        }
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sinks(&self) -> &[NodeId] {
        &self.sinks
    }

    pub fn groups(&self, node: NodeId) -> &[Vec<EdgeId>] {
        &self.groups[node]
    }

    pub fn coding_nodes(&self) -> &BTreeSet<NodeId> {
        &self.coding
    }

    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.out_edges[node]
    }

    pub fn in_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.in_edges[node]
    }

    pub fn is_sink(&self, node: NodeId) -> bool {
        self.sinks.contains(&node)
    }

    /// Topological order, or `CyclicGraph`.
    pub fn topo_order(&self) -> Result<&[NodeId], NetError> {
        self.topo.as_deref().ok_or(NetError::CyclicGraph)
    }

    /// Kahn's algorithm, smallest node id first for a reproducible order.
    fn compute_topo(&self) -> Option<Vec<NodeId>> {
        let n = self.names.len();
        let mut indeg: Vec<usize> = (0..n).map(|i| self.in_edges[i].len()).collect();
        let mut ready: BTreeSet<NodeId> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&next) = ready.iter().next() {
            ready.remove(&next);
            order.push(next);
            for &e in &self.out_edges[next] {
                let d = self.edges[e].dest;
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.insert(d);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source] = true;
        while let Some(i) = queue.pop_front() {
            for &e in &self.out_edges[i] {
                let d = self.edges[e].dest;
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        seen
    }

    /// Checks acyclicity, sink reachability and hyperedge well-formedness.
    pub fn validate(&self) -> Result<ValidationReport, NetError> {
        let topo_order = self.topo_order()?.to_vec();
        let reachable = self.reachable_from_source();
        for &s in &self.sinks {
            if !reachable[s] {
                return Err(NetError::UnreachableSink(self.names[s].clone()));
            }
        }
        for node in 0..self.names.len() {
            let mut covered = BTreeSet::new();
            for g in &self.groups[node] {
                if g.is_empty() {
                    return Err(NetError::MalformedHyperedge(self.names[node].clone()));
                }
                for &e in g {
                    if e >= self.edges.len()
                        || self.edges[e].origin != node
                        || !covered.insert(e)
                    {
                        return Err(NetError::MalformedHyperedge(self.names[node].clone()));
                    }
                }
            }
            if covered.len() != self.out_edges[node].len() {
                return Err(NetError::MalformedHyperedge(self.names[node].clone()));
            }
        }
        Ok(ValidationReport { topo_order, reachable })
    }

    /// Unit-capacity max-flow to `sink`. Hyperedge groups count as single
    /// capacity units: all edges of a group carry identical information, so
    /// at most one of them appears in any edge-disjoint flow solution.
    pub fn max_flow(&self, sink: NodeId) -> Result<FlowSummary, NetError> {
        if sink >= self.names.len() {
            return Err(NetError::IndexOutOfRange(sink));
        }
        if !self.reachable_from_source()[sink] {
            return Err(NetError::UnreachableSink(self.names[sink].clone()));
        }
        let mut fg = FlowGraph::build(self, sink);
        let value = fg.run();
        let paths = fg.decompose_paths(value);
        Ok(FlowSummary { value, paths })
    }

    /// Min-cut elements separating source from `sink`, after max-flow. Each
    /// element is one capacity unit: a single edge, or a whole hyperedge
    /// group. Sorted by smallest contained edge id.
    pub fn min_cut(&self, sink: NodeId) -> Result<Vec<Vec<EdgeId>>, NetError> {
        if !self.reachable_from_source()[sink] {
            return Err(NetError::UnreachableSink(self.names[sink].clone()));
        }
        let mut fg = FlowGraph::build(self, sink);
        fg.run();
        let mut elements = fg.cut_elements(self);
        elements.sort_by_key(|el| el.iter().copied().min());
        Ok(elements)
    }

    /// Deletes `max_flow - q` elements of a min-cut (lexicographically
    /// smallest first) so the returned network has max-flow exactly `q` to
    /// `sink`.
    pub fn reduce_capacity(&self, sink: NodeId, q: usize) -> Result<ReducedNetwork, NetError> {
        let full = self.max_flow(sink)?.value;
        if q < 1 || q >= full {
            return Err(NetError::InvalidTarget { target: q, max_flow: full });
        }
        let elements = self.min_cut(sink)?;
        let mut deleted: BTreeSet<EdgeId> = BTreeSet::new();
        for el in elements.iter().take(full - q) {
            deleted.extend(el.iter().copied());
        }
        let network = self.without_edges(&deleted);
        let reduced_flow = network.max_flow(sink)?.value;
        assert_eq!(
            reduced_flow, q,
            "min-cut deletion must reduce the max-flow to exactly q"
        );
        Ok(ReducedNetwork {
            network,
            deleted_edges: deleted.into_iter().collect(),
        })
    }

    /// Copy of the network with the given edges removed. Node ids are stable;
    /// edge ids are remapped. Hyperedge groups shrink accordingly.
    pub fn without_edges(&self, remove: &BTreeSet<EdgeId>) -> Network {
        let mut remap = vec![usize::MAX; self.edges.len()];
        let mut edges = Vec::with_capacity(self.edges.len() - remove.len());
        for (id, e) in self.edges.iter().enumerate() {
            if !remove.contains(&id) {
                remap[id] = edges.len();
                edges.push(e.clone());
            }
        }
        let n = self.names.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            out_edges[e.origin].push(id);
            in_edges[e.dest].push(id);
        }
        let groups = self
            .groups
            .iter()
            .map(|gs| {
                gs.iter()
                    .map(|g| {
                        g.iter()
                            .filter(|&&e| remap[e] != usize::MAX)
                            .map(|&e| remap[e])
                            .collect::<Vec<_>>()
                    })
                    .filter(|g| !g.is_empty())
                    .collect()
            })
            .collect();
        let mut net = Network {
            names: self.names.clone(),
            edges,
            source: self.source,
            sinks: self.sinks.clone(),
            groups,
            coding: self.coding.clone(),
            out_edges,
            in_edges,
            topo: None,
        };
        net.topo = net.compute_topo();
        net
    }
}

/// Unit-capacity flow network over the node set extended with one virtual
/// node per hyperedge group, so each group contributes a single cut unit.
struct FlowGraph {
    /// Arc pairs: even index forward (cap starts at 1), odd index residual.
    arcs: Vec<FlowArc>,
    adj: Vec<Vec<usize>>,
    source: usize,
    sink: usize,
}

#[derive(Clone)]
struct FlowArc {
    to: usize,
    cap: u32,
    tag: ArcTag,
}

#[derive(Clone, Copy, PartialEq)]
enum ArcTag {
    Group { node: NodeId, group: usize },
    Edge(EdgeId),
    Residual,
}

impl FlowGraph {
    fn build(net: &Network, sink: NodeId) -> Self {
        let base = net.node_count();
        let total_groups: usize = (0..base).map(|i| net.groups(i).len()).sum();
        let mut fg = FlowGraph {
            arcs: Vec::new(),
            adj: vec![Vec::new(); base + total_groups],
            source: net.source(),
            sink,
        };
        let mut gnode = base;
        for node in 0..base {
            for (gidx, group) in net.groups(node).iter().enumerate() {
                fg.add_arc(node, gnode, ArcTag::Group { node, group: gidx });
                for &e in group {
                    fg.add_arc(gnode, net.edges()[e].dest, ArcTag::Edge(e));
                }
                gnode += 1;
            }
        }
        fg
    }

    fn add_arc(&mut self, from: usize, to: usize, tag: ArcTag) {
        let id = self.arcs.len();
        self.arcs.push(FlowArc { to, cap: 1, tag });
        self.arcs.push(FlowArc { to: from, cap: 0, tag: ArcTag::Residual });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
    }

    /// Edmonds-Karp; every augmentation carries one unit.
    fn run(&mut self) -> usize {
        let mut value = 0;
        loop {
            let mut parent = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([self.source]);
            let mut found = false;
            'bfs: while let Some(node) = queue.pop_front() {
                for &a in &self.adj[node] {
                    let arc = &self.arcs[a];
                    if arc.cap > 0 && parent[arc.to] == usize::MAX && arc.to != self.source {
                        parent[arc.to] = a;
                        if arc.to == self.sink {
                            found = true;
                            break 'bfs;
                        }
                        queue.push_back(arc.to);
                    }
                }
            }
            if !found {
                return value;
            }
            let mut node = self.sink;
            while node != self.source {
                let a = parent[node];
                self.arcs[a].cap -= 1;
                self.arcs[a ^ 1].cap += 1;
                node = self.arcs[a ^ 1].to;
            }
            value += 1;
        }
    }

    /// Walks saturated forward arcs from the source, `value` times, yielding
    /// edge-disjoint paths as original edge ids.
    fn decompose_paths(&self, value: usize) -> Vec<Vec<EdgeId>> {
        let mut consumed = vec![false; self.arcs.len()];
        let mut paths = Vec::with_capacity(value);
        for _ in 0..value {
            let mut path = Vec::new();
            let mut node = self.source;
            while node != self.sink {
                let a = *self.adj[node]
                    .iter()
                    .find(|&&a| {
                        a % 2 == 0 && self.arcs[a].cap == 0 && !consumed[a]
                    })
                    .expect("flow decomposition follows saturated arcs");
                consumed[a] = true;
                if let ArcTag::Edge(e) = self.arcs[a].tag {
                    path.push(e);
                }
                node = self.arcs[a].to;
            }
            paths.push(path);
        }
        paths
    }

    /// Saturated forward arcs crossing the residual-reachability cut.
    fn cut_elements(&self, net: &Network) -> Vec<Vec<EdgeId>> {
        let mut reach = vec![false; self.adj.len()];
        reach[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(node) = queue.pop_front() {
            for &a in &self.adj[node] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && !reach[arc.to] {
                    reach[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        let mut elements = Vec::new();
        for (from, arcs) in self.adj.iter().enumerate() {
            if !reach[from] {
                continue;
            }
            for &a in arcs {
                let arc = &self.arcs[a];
                if a % 2 == 0 && arc.cap == 0 && !reach[arc.to] {
                    match arc.tag {
                        ArcTag::Group { node, group } => {
                            elements.push(net.groups(node)[group].clone())
                        }
                        ArcTag::Edge(e) => elements.push(vec![e]),
                        ArcTag::Residual => unreachable!(),
                    }
                }
            }
        }
        elements
    }
}

/// Spec of an n-dimensional grid network with the sink off-axis at `nu`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub nu: Vec<u32>,
}

impl GridSpec {
    pub fn new(n: usize, nu: Vec<u32>) -> Result<Self, NetError> {
        if n < 2 {
            return Err(NetError::BadGrid(format!("dimension count {n} < 2")));
        }
        if nu.len() != n {
            return Err(NetError::BadGrid(format!(
                "expected {n} destination coordinates, got {}",
                nu.len()
            )));
        }
        if nu.iter().any(|&v| v == 0) {
            return Err(NetError::BadGrid(
                "destination must be off-axis: all coordinates >= 1".into(),
            ));
        }
        Ok(GridSpec { n, nu })
    }

    pub fn sum_nu(&self) -> u64 {
        self.nu.iter().map(|&v| u64::from(v)).sum()
    }

    /// Maximum number of coded edges credited to a flow solution for this
    /// grid: n * (sum(nu) - 2). This is the closed-form value the bounds use;
    /// it can exceed the coded-edge count of any realizable flow solution
    /// when n > 2, which only makes the bounds more conservative.
    pub fn eta(&self) -> u64 {
        self.n as u64 * (self.sum_nu() - 2)
    }
}

/// Closed-form eta for grid networks.
pub fn eta_grid(spec: &GridSpec) -> u64 {
    spec.eta()
}

/// Generates the n-dimensional grid network: nodes at all lattice points of
/// the box `[0, nu_1] x ... x [0, nu_n]`, one edge to each +1 neighbor,
/// source at the origin, sink at `nu`. Off-axis nodes (all coordinates
/// nonzero) other than the sink are marked as coding; on-axis nodes relay.
pub fn gen_grid(spec: &GridSpec) -> Network {
    let n = spec.n;
    let sizes: Vec<usize> = spec.nu.iter().map(|&v| v as usize + 1).collect();
    let total: usize = sizes.iter().product();

    let coord_of = |mut idx: usize| -> Vec<usize> {
        let mut c = vec![0; n];
        for d in (0..n).rev() {
            c[d] = idx % sizes[d];
            idx /= sizes[d];
        }
        c
    };
    let index_of = |c: &[usize]| -> usize {
        c.iter().zip(&sizes).fold(0, |acc, (&ci, &s)| acc * s + ci)
    };

    let mut names = Vec::with_capacity(total);
    for idx in 0..total {
        let c = coord_of(idx);
        names.push(
            c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
        );
    }

    let mut edge_list = Vec::new();
    let mut axes = Vec::new();
    for idx in 0..total {
        let c = coord_of(idx);
        for d in 0..n {
            if c[d] < spec.nu[d] as usize {
                let mut to = c.clone();
                to[d] += 1;
                axes.push((edge_list.len(), d as u8));
                edge_list.push((idx, index_of(&to)));
            }
        }
    }

    let sink = total - 1;
    let mut coding = Vec::new();
    for idx in 0..total {
        let c = coord_of(idx);
        if idx != sink && c.iter().all(|&v| v >= 1) {
            coding.push(idx);
        }
    }

    Network::new(names, edge_list, 0, vec![sink])
        .and_then(|net| net.with_axes(&axes))
        .and_then(|net| net.with_coding(coding))
        .expect("grid construction is well-formed")
}

/// Maximum number of coded edges over all edge-disjoint flow solutions of
/// multicast rate R (= min over sinks of max-flow), taken over sinks. An
/// edge is coded when its origin performs random encoding; edges grouped
/// into one hyperedge contribute a single coded unit.
///
/// Computed exactly as a min-cost flow (cost -1 per coded capacity unit), so
/// no enumeration cap is needed.
pub fn eta_general(net: &Network, coding: &BTreeSet<NodeId>) -> Result<usize, NetError> {
    let rate = net
        .sinks()
        .iter()
        .map(|&s| net.max_flow(s).map(|f| f.value))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min()
        .ok_or(NetError::NoSinks)?;
    let mut eta = 0;
    for &sink in net.sinks() {
        eta = eta.max(max_coded_flow(net, coding, sink, rate));
    }
    Ok(eta)
}

/// Successive shortest augmenting paths (Bellman-Ford, unit capacities) for
/// a flow of `rate` units that maximizes the number of coded group arcs.
fn max_coded_flow(net: &Network, coding: &BTreeSet<NodeId>, sink: NodeId, rate: usize) -> usize {
    let base = net.node_count();
    let total_groups: usize = (0..base).map(|i| net.groups(i).len()).sum();
    let n_nodes = base + total_groups;

    // arcs: (to, cap, cost); pairs as in FlowGraph.
    let mut arcs: Vec<(usize, u32, i64)> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    let add = |arcs: &mut Vec<(usize, u32, i64)>, adj: &mut Vec<Vec<usize>>, from: usize, to: usize, cost: i64| {
        adj[from].push(arcs.len());
        arcs.push((to, 1, cost));
        adj[to].push(arcs.len());
        arcs.push((from, 0, -cost));
    };
    let mut gnode = base;
    for node in 0..base {
        let coded = node != net.source() && coding.contains(&node);
        for group in net.groups(node) {
            add(&mut arcs, &mut adj, node, gnode, if coded { -1 } else { 0 });
            for &e in group {
                add(&mut arcs, &mut adj, gnode, net.edges()[e].dest, 0);
            }
            gnode += 1;
        }
    }

    let source = net.source();
    let mut total_cost = 0i64;
    for _ in 0..rate {
        // Bellman-Ford on the residual graph.
        let mut dist = vec![i64::MAX; n_nodes];
        let mut parent = vec![usize::MAX; n_nodes];
        dist[source] = 0;
        for _ in 0..n_nodes {
            let mut changed = false;
            for (from, list) in adj.iter().enumerate() {
                if dist[from] == i64::MAX {
                    continue;
                }
                for &a in list {
                    let (to, cap, cost) = arcs[a];
                    if cap > 0 && dist[from] + cost < dist[to] {
                        dist[to] = dist[from] + cost;
                        parent[to] = a;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink] == i64::MAX {
            break;
        }
        total_cost += dist[sink];
        let mut node = sink;
        while node != source {
            let a = parent[node];
            arcs[a].1 -= 1;
            arcs[a ^ 1].1 += 1;
            node = arcs[a ^ 1].0;
        }
    }
    (-total_cost) as usize
}

/// On-disk network description. Either an explicit node/edge listing or a
/// `grid` spec (or both; when both are present they must agree on shape).
///
/// Keys: `nodes`, `edges` (ordered name pairs), `source`, `sinks`,
/// `hyperedges` (per-node list of global edge-index groups), `coding_nodes`,
/// optional `axes` (per-edge dimension tags) and `grid` (`{n, nu}`).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sinks: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hyperedges: BTreeMap<String, Vec<Vec<EdgeId>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coding_nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<Option<u8>>>,
}

impl NetworkFile {
    pub fn from_json(text: &str) -> Result<Self, NetError> {
        serde_json::from_str(text).map_err(|e| NetError::BadFormat(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network file serializes")
    }

    /// Materializes the network. Returns the grid spec when one was given so
    /// callers can use the grid closed-form bounds.
    pub fn to_network(&self) -> Result<(Network, Option<GridSpec>), NetError> {
        if let Some(g) = &self.grid {
            let spec = GridSpec::new(g.n, g.nu.clone())?;
            let net = gen_grid(&spec);
            if !self.nodes.is_empty() && self.nodes.len() != net.node_count() {
                return Err(NetError::BadFormat(format!(
                    "grid spec generates {} nodes but file lists {}",
                    net.node_count(),
                    self.nodes.len()
                )));
            }
            if !self.edges.is_empty() && self.edges.len() != net.edges().len() {
                return Err(NetError::BadFormat(format!(
                    "grid spec generates {} edges but file lists {}",
                    net.edges().len(),
                    self.edges.len()
                )));
            }
            return Ok((net, Some(spec)));
        }

        let mut ids: BTreeMap<&str, NodeId> = BTreeMap::new();
        for (i, name) in self.nodes.iter().enumerate() {
            if ids.insert(name.as_str(), i).is_some() {
                return Err(NetError::DuplicateNode(name.clone()));
            }
        }
        let lookup = |name: &str| -> Result<NodeId, NetError> {
            ids.get(name).copied().ok_or_else(|| NetError::UnknownNode(name.to_string()))
        };
        let source = lookup(
            self.source
                .as_deref()
                .ok_or_else(|| NetError::BadFormat("missing source".into()))?,
        )?;
        let sinks = self.sinks.iter().map(|s| lookup(s)).collect::<Result<Vec<_>, _>>()?;
        let edge_list = self
            .edges
            .iter()
            .map(|(o, d)| Ok((lookup(o)?, lookup(d)?)))
            .collect::<Result<Vec<_>, NetError>>()?;
        let mut net = Network::new(self.nodes.clone(), edge_list, source, sinks)?;
        if let Some(axes) = &self.axes {
            if axes.len() != self.edges.len() {
                return Err(NetError::BadFormat("axes length differs from edges".into()));
            }
            let tags: Vec<(EdgeId, u8)> = axes
                .iter()
                .enumerate()
                .filter_map(|(e, a)| a.map(|axis| (e, axis)))
                .collect();
            net = net.with_axes(&tags)?;
        }
        for (name, groups) in &self.hyperedges {
            net = net.with_groups(lookup(name)?, groups.clone())?;
        }
        let coding = self
            .coding_nodes
            .iter()
            .map(|n| lookup(n))
            .collect::<Result<Vec<_>, _>>()?;
        net = net.with_coding(coding)?;
        Ok((net, None))
    }

    /// Full explicit dump of a network; includes the grid spec when known.
    pub fn from_network(net: &Network, grid: Option<&GridSpec>) -> Self {
        let nodes: Vec<String> = (0..net.node_count()).map(|i| net.name(i).to_string()).collect();
        let edges = net
            .edges()
            .iter()
            .map(|e| (net.name(e.origin).to_string(), net.name(e.dest).to_string()))
            .collect();
        let axes_list: Vec<Option<u8>> = net.edges().iter().map(|e| e.axis).collect();
        let axes = axes_list.iter().any(|a| a.is_some()).then_some(axes_list);
        let mut hyperedges = BTreeMap::new();
        for node in 0..net.node_count() {
            let default: Vec<Vec<EdgeId>> =
                net.out_edges(node).iter().map(|&e| vec![e]).collect();
            if net.groups(node) != default.as_slice() {
                hyperedges.insert(net.name(node).to_string(), net.groups(node).to_vec());
            }
        }
        NetworkFile {
            grid: grid.cloned(),
            nodes,
            edges,
            source: Some(net.name(net.source()).to_string()),
            sinks: net.sinks().iter().map(|&s| net.name(s).to_string()).collect(),
            hyperedges,
            coding_nodes: net.coding_nodes().iter().map(|&c| net.name(c).to_string()).collect(),
            axes,
        }
    }
}
