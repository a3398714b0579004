//! Directed network graph and the multiplier/queue index layout derived
//! from it.

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type LinkId = usize;

/// A directed communication link `[from, to]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
}

/// Directed graph with per-commodity destinations.
///
/// Commodities are identified by their destination node, so `commodities`
/// lists the destination node of each commodity.
#[derive(Debug, Clone)]
pub struct Topology {
    pub node_count: usize,
    pub links: Vec<Link>,
    pub commodities: Vec<NodeId>,
    out_neighbors: Vec<Vec<(LinkId, NodeId)>>,
    in_neighbors: Vec<Vec<(LinkId, NodeId)>>,
    d_max: usize,
}

impl Topology {
    pub fn new(node_count: usize, links: Vec<Link>, commodities: Vec<NodeId>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidScenario("node_count must be positive".into()));
        }
        for (i, l) in links.iter().enumerate() {
            if l.from >= node_count || l.to >= node_count {
                return Err(Error::InvalidScenario(format!(
                    "link {i} [{},{}] has an endpoint outside 0..{node_count}",
                    l.from, l.to
                )));
            }
            if l.from == l.to {
                return Err(Error::InvalidScenario(format!(
                    "link {i} [{},{}] is a self-loop",
                    l.from, l.to
                )));
            }
        }
        for &c in &commodities {
            if c >= node_count {
                return Err(Error::InvalidScenario(format!(
                    "commodity destination {c} outside 0..{node_count}"
                )));
            }
        }
        let mut out_neighbors = vec![Vec::new(); node_count];
        let mut in_neighbors = vec![Vec::new(); node_count];
        for (id, l) in links.iter().enumerate() {
            out_neighbors[l.from].push((id, l.to));
            in_neighbors[l.to].push((id, l.from));
        }
        let d_max = (0..node_count)
            .map(|n| out_neighbors[n].len().max(in_neighbors[n].len()))
            .max()
            .unwrap_or(0);
        Ok(Self {
            node_count,
            links,
            commodities,
            out_neighbors,
            in_neighbors,
            d_max,
        })
    }

    /// Out-neighbors of `n` as `(link id, head node)` pairs, in link order.
    pub fn out_links(&self, n: NodeId) -> &[(LinkId, NodeId)] {
        &self.out_neighbors[n]
    }

    /// In-neighbors of `n` as `(link id, tail node)` pairs, in link order.
    pub fn in_links(&self, n: NodeId) -> &[(LinkId, NodeId)] {
        &self.in_neighbors[n]
    }

    /// Maximum in-degree/out-degree over all nodes.
    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }
}

/// Index layout for the per-(node, commodity) and per-node quantities.
///
/// A `pair` is a (node, commodity) combination with the node distinct from
/// the commodity's destination; destinations never queue data. A node bears
/// an energy queue iff it has at least one outgoing link (a pure sink never
/// transmits and stores no energy).
#[derive(Debug, Clone)]
pub struct Layout {
    /// `(node, commodity index)` per pair, commodity-major within node order.
    pub pairs: Vec<(NodeId, usize)>,
    /// `pair_index[node][commodity index]`, `None` at the destination.
    pair_index: Vec<Vec<Option<usize>>>,
    /// Nodes with an energy queue, ascending.
    pub energy_nodes: Vec<NodeId>,
    energy_index: Vec<Option<usize>>,
}

impl Layout {
    pub fn new(topo: &Topology) -> Self {
        let mut pairs = Vec::new();
        let mut pair_index = vec![vec![None; topo.commodities.len()]; topo.node_count];
        for n in 0..topo.node_count {
            for (ci, &dest) in topo.commodities.iter().enumerate() {
                if n != dest {
                    pair_index[n][ci] = Some(pairs.len());
                    pairs.push((n, ci));
                }
            }
        }
        let mut energy_nodes = Vec::new();
        let mut energy_index = vec![None; topo.node_count];
        for n in 0..topo.node_count {
            if !topo.out_links(n).is_empty() {
                energy_index[n] = Some(energy_nodes.len());
                energy_nodes.push(n);
            }
        }
        Self {
            pairs,
            pair_index,
            energy_nodes,
            energy_index,
        }
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn energy_count(&self) -> usize {
        self.energy_nodes.len()
    }

    /// Pair index of `(node, commodity)`; `None` when the node is the
    /// commodity's destination.
    pub fn pair(&self, node: NodeId, commodity: usize) -> Option<usize> {
        self.pair_index[node][commodity]
    }

    pub fn energy(&self, node: NodeId) -> Option<usize> {
        self.energy_index[node]
    }
}
