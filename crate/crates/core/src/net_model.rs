//! Road network: nodes, single-lane directed edges, fixed-time traffic-light
//! programs and routes as edge sequences.
//!
//! Positions are one-dimensional: a vehicle on an edge is located by its
//! offset in meters from the edge start.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("dangling node reference `{0}`")]
    DanglingNode(String),
    #[error("node `{node}` references missing traffic-light program `{program}`")]
    MissingProgram { node: String, program: String },
    #[error("node `{0}` kind and tls reference disagree")]
    TlsMismatch(String),
    #[error("edge `{0}` must have length > 0")]
    NonPositiveLength(String),
    #[error("edge `{0}` must have speed limit > 0")]
    NonPositiveSpeed(String),
    #[error("edge `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("edge `{0}` has negative priority")]
    NegativePriority(String),
    #[error("traffic-light program `{0}` has no phases")]
    NoPhases(String),
    #[error("traffic-light program `{0}` has a phase with non-positive duration")]
    NonPositivePhase(String),
    #[error("traffic-light program `{0}` has a negative offset")]
    NegativeOffset(String),
    #[error("traffic-light program `{program}`: phase state length {got} does not match {expected} controlled edges")]
    PhaseStateLength {
        program: String,
        expected: usize,
        got: usize,
    },
    #[error("traffic-light program `{program}` controls unknown edge `{edge}`")]
    UnknownControlledEdge { program: String, edge: String },
    #[error("traffic-light program `{program}` controls edge `{edge}` which does not end at a node it is attached to")]
    UncontrolledJunction { program: String, edge: String },
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("route `{0}` is empty")]
    EmptyRoute(String),
    #[error("route `{route}` is disconnected between `{from}` and `{to}`")]
    Disconnected {
        route: String,
        from: String,
        to: String,
    },
    #[error("no path from `{from}` to `{to}`")]
    NoPath { from: String, to: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Plain,
    TrafficLight,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Plain => "plain",
            NodeKind::TrafficLight => "traffic_light",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub tls: Option<String>,
    /// Display coordinates, carried through untouched.
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl Node {
    pub fn plain(id: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            kind: NodeKind::Plain,
            tls: None,
            x: None,
            y: None,
        }
    }

    pub fn traffic_light(id: impl Into<String>, program: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            kind: NodeKind::TrafficLight,
            tls: Some(program.into()),
            x: None,
            y: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Meters.
    pub length: f64,
    /// m/s.
    pub speed_limit: f64,
    pub priority: i64,
    /// Vehicle-class tags allowed on this edge; empty means unrestricted.
    pub allowed: BTreeSet<String>,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        length: f64,
        speed_limit: f64,
        priority: i64,
    ) -> Self {
        Edge {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            length,
            speed_limit,
            priority,
            allowed: BTreeSet::new(),
        }
    }

    pub fn allows(&self, vclass: &str) -> bool {
        self.allowed.is_empty() || self.allowed.contains(vclass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LightState {
    Green,
    Yellow,
    Red,
}

impl LightState {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'g' | 'G' => Some(LightState::Green),
            'y' | 'Y' => Some(LightState::Yellow),
            'r' | 'R' => Some(LightState::Red),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            LightState::Green => 'g',
            LightState::Yellow => 'y',
            LightState::Red => 'r',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub duration: f64,
    /// One state per controlled edge, in the program's edge order.
    pub states: Vec<LightState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficLightProgram {
    pub id: String,
    /// Time into the cycle at t = 0.
    pub offset: f64,
    pub controlled: Vec<String>,
    pub phases: Vec<Phase>,
}

impl TrafficLightProgram {
    pub fn cycle(&self) -> f64 {
        self.phases.iter().map(|p| p.duration).sum()
    }

    /// Index of the phase active at simulation time `t`.
    pub fn phase_at(&self, t: f64) -> usize {
        let cycle = self.cycle();
        let mut pos = (t + self.offset).rem_euclid(cycle);
        for (i, phase) in self.phases.iter().enumerate() {
            if pos < phase.duration {
                return i;
            }
            pos -= phase.duration;
        }
        self.phases.len() - 1
    }

    /// Signal shown to `edge` at time `t`, or `None` if the edge is not controlled.
    pub fn state_for(&self, edge: &str, t: f64) -> Option<LightState> {
        let idx = self.controlled.iter().position(|e| e == edge)?;
        Some(self.phases[self.phase_at(t)].states[idx])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub id: String,
    pub edges: Vec<String>,
}

/// Validated road network. Collections keep file order so serialization is
/// stable; lookups go through the id indices.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    programs: Vec<TrafficLightProgram>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    program_index: HashMap<String, usize>,
    outgoing: HashMap<String, Vec<usize>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && self.programs == other.programs
    }
}

impl Network {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn programs(&self) -> &[TrafficLightProgram] {
        &self.programs
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edge_index.get(id).map(|&i| &self.edges[i])
    }

    pub fn program(&self, id: &str) -> Option<&TrafficLightProgram> {
        self.program_index.get(id).map(|&i| &self.programs[i])
    }

    /// Edges leaving `node`, in file order.
    pub fn outgoing(&self, node: &str) -> impl Iterator<Item = &Edge> {
        self.outgoing
            .get(node)
            .into_iter()
            .flatten()
            .map(move |&i| &self.edges[i])
    }

    /// Program governing the downstream end of `edge`, if that end is a
    /// signalized node and the program lists the edge.
    pub fn signal_at_end(&self, edge: &str) -> Option<&TrafficLightProgram> {
        let e = self.edge(edge)?;
        let node = self.node(&e.to)?;
        let program = self.program(node.tls.as_deref()?)?;
        program.controlled.iter().any(|c| c == edge).then_some(program)
    }

    pub fn validate_route(&self, route: &Route) -> Result<(), NetError> {
        if route.edges.is_empty() {
            return Err(NetError::EmptyRoute(route.id.clone()));
        }
        let mut prev: Option<&Edge> = None;
        for id in &route.edges {
            let e = self
                .edge(id)
                .ok_or_else(|| NetError::UnknownEdge(id.clone()))?;
            if let Some(p) = prev {
                if p.to != e.from {
                    return Err(NetError::Disconnected {
                        route: route.id.clone(),
                        from: p.id.clone(),
                        to: e.id.clone(),
                    });
                }
            }
            prev = Some(e);
        }
        Ok(())
    }

    /// Shortest path by length from the start of `from` to the end of `to`,
    /// both edges included. Only edges accepted by `usable` are traversed
    /// (the endpoints too). Ties break on edge file order, so the result is
    /// deterministic.
    pub fn shortest_path(
        &self,
        from: &str,
        to: &str,
        usable: impl Fn(&Edge) -> bool,
    ) -> Result<Vec<String>, NetError> {
        let start = *self
            .edge_index
            .get(from)
            .ok_or_else(|| NetError::UnknownEdge(from.to_string()))?;
        let goal = *self
            .edge_index
            .get(to)
            .ok_or_else(|| NetError::UnknownEdge(to.to_string()))?;
        let no_path = || NetError::NoPath {
            from: from.to_string(),
            to: to.to_string(),
        };
        if !usable(&self.edges[start]) || !usable(&self.edges[goal]) {
            return Err(no_path());
        }

        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                other
                    .0
                    .total_cmp(&self.0)
                    .then_with(|| other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        // dist[i] = length of the path up to and including edge i
        let mut dist = vec![f64::INFINITY; self.edges.len()];
        let mut prev = vec![usize::MAX; self.edges.len()];
        let mut heap = BinaryHeap::new();
        dist[start] = self.edges[start].length;
        heap.push(Entry(dist[start], start));
        while let Some(Entry(d, i)) = heap.pop() {
            if d > dist[i] {
                continue;
            }
            if i == goal {
                break;
            }
            for &j in self.outgoing.get(&self.edges[i].to).into_iter().flatten() {
                if !usable(&self.edges[j]) {
                    continue;
                }
                let nd = d + self.edges[j].length;
                if nd < dist[j] {
                    dist[j] = nd;
                    prev[j] = i;
                    heap.push(Entry(nd, j));
                }
            }
        }
        if !dist[goal].is_finite() {
            return Err(no_path());
        }
        let mut path = vec![goal];
        let mut cur = goal;
        while cur != start {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        Ok(path.into_iter().map(|i| self.edges[i].id.clone()).collect())
    }
}

/// Validate the three collections and index them.
pub fn build_network(
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    programs: Vec<TrafficLightProgram>,
) -> Result<Network, NetError> {
    let mut program_index = HashMap::new();
    for (i, p) in programs.iter().enumerate() {
        if program_index.insert(p.id.clone(), i).is_some() {
            return Err(NetError::DuplicateId(p.id.clone()));
        }
        if p.phases.is_empty() {
            return Err(NetError::NoPhases(p.id.clone()));
        }
        if !(p.offset >= 0.0) || !p.offset.is_finite() {
            return Err(NetError::NegativeOffset(p.id.clone()));
        }
        for phase in &p.phases {
            if !(phase.duration > 0.0) || !phase.duration.is_finite() {
                return Err(NetError::NonPositivePhase(p.id.clone()));
            }
            if phase.states.len() != p.controlled.len() {
                return Err(NetError::PhaseStateLength {
                    program: p.id.clone(),
                    expected: p.controlled.len(),
                    got: phase.states.len(),
                });
            }
        }
    }

    let mut node_index = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if node_index.insert(n.id.clone(), i).is_some() {
            return Err(NetError::DuplicateId(n.id.clone()));
        }
        match (&n.kind, &n.tls) {
            (NodeKind::TrafficLight, Some(tls)) => {
                if !program_index.contains_key(tls) {
                    return Err(NetError::MissingProgram {
                        node: n.id.clone(),
                        program: tls.clone(),
                    });
                }
            }
            (NodeKind::Plain, None) => {}
            _ => return Err(NetError::TlsMismatch(n.id.clone())),
        }
    }

    let mut edge_index = HashMap::new();
    let mut outgoing: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, e) in edges.iter().enumerate() {
        if edge_index.insert(e.id.clone(), i).is_some() {
            return Err(NetError::DuplicateId(e.id.clone()));
        }
        for end in [&e.from, &e.to] {
            if !node_index.contains_key(end) {
                return Err(NetError::DanglingNode(end.clone()));
            }
        }
        if e.from == e.to {
            return Err(NetError::SelfLoop(e.id.clone()));
        }
        if !(e.length > 0.0) || !e.length.is_finite() {
            return Err(NetError::NonPositiveLength(e.id.clone()));
        }
        if !(e.speed_limit > 0.0) || !e.speed_limit.is_finite() {
            return Err(NetError::NonPositiveSpeed(e.id.clone()));
        }
        if e.priority < 0 {
            return Err(NetError::NegativePriority(e.id.clone()));
        }
        outgoing.entry(e.from.clone()).or_default().push(i);
    }

    for p in &programs {
        for c in &p.controlled {
            let e = edges
                .get(*edge_index.get(c).ok_or_else(|| NetError::UnknownControlledEdge {
                    program: p.id.clone(),
                    edge: c.clone(),
                })?)
                .expect("indexed");
            let end = &nodes[node_index[&e.to]];
            if end.tls.as_deref() != Some(p.id.as_str()) {
                return Err(NetError::UncontrolledJunction {
                    program: p.id.clone(),
                    edge: c.clone(),
                });
            }
        }
    }

    Ok(Network {
        nodes,
        edges,
        programs,
        node_index,
        edge_index,
        program_index,
        outgoing,
    })
}

pub fn route_length(network: &Network, route: &Route) -> Result<f64, NetError> {
    route.edges.iter().try_fold(0.0, |acc, id| {
        network
            .edge(id)
            .map(|e| acc + e.length)
            .ok_or_else(|| NetError::UnknownEdge(id.clone()))
    })
}

/// The speed a vehicle may drive on `edge`: the lower of the posted limit and
/// the vehicle's own top speed.
pub fn effective_speed_limit(edge: &Edge, max_speed: f64) -> f64 {
    edge.speed_limit.min(max_speed)
}

pub fn set_edge_priority(
    network: &Network,
    edge_id: &str,
    priority: i64,
) -> Result<Network, NetError> {
    let idx = *network
        .edge_index
        .get(edge_id)
        .ok_or_else(|| NetError::UnknownEdge(edge_id.to_string()))?;
    if priority < 0 {
        return Err(NetError::NegativePriority(edge_id.to_string()));
    }
    let mut out = network.clone();
    out.edges[idx].priority = priority;
    Ok(out)
}
