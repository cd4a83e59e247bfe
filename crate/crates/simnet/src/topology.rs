//! Nodes, links and routing for the simulated deployment.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::SimError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeKind {
    Lea,
    Rsm,
    Rsu,
    Vn,
    /// Forwards frames between vehicles and RSUs. Holds no keys.
    Fog,
}

impl NodeKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "lea" => Self::Lea,
            "rsm" => Self::Rsm,
            "rsu" => Self::Rsu,
            "vn" => Self::Vn,
            "fog" => Self::Fog,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    pub kind: NodeKind,
    /// The managing RSM of an RSU, or the home RSM of a vehicle.
    pub domain: Option<String>,
    /// Ledger sync delay of an RSM view.
    pub sync_ms: u64,
    /// Extra forwarding delay of a fog node.
    pub forward_ms: u64,
    /// Points precomputed by a vehicle after registration.
    pub pool: usize,
}

impl NodeSpec {
    pub fn new(name: impl Into<String>, kind: NodeKind) -> Self {
        Self { name: name.into(), kind, domain: None, sync_ms: 0, forward_ms: 0, pool: 4 }
    }

    pub fn in_domain(mut self, rsm: impl Into<String>) -> Self {
        self.domain = Some(rsm.into());
        self
    }
}

/// An undirected link. Latency is drawn uniformly from `[latency_ms, latency_ms + jitter_ms]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSpec {
    pub a: String,
    pub b: String,
    pub secure: bool,
    pub latency_ms: u64,
    pub jitter_ms: u64,
    pub drop: f64,
}

impl LinkSpec {
    pub fn new(a: impl Into<String>, b: impl Into<String>, secure: bool, latency_ms: u64) -> Self {
        Self { a: a.into(), b: b.into(), secure, latency_ms, jitter_ms: 0, drop: 0.0 }
    }

    pub fn joins(&self, x: &str, y: &str) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

/// A directed hop `from>to`, as named by adversary actions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hop {
    pub from: String,
    pub to: String,
}

impl Hop {
    pub fn parse(s: &str) -> Option<Self> {
        let (from, to) = s.split_once('>')?;
        if from.is_empty() || to.is_empty() {
            return None;
        }
        Some(Self { from: from.to_string(), to: to.to_string() })
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.from, self.to)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Topology {
    pub nodes: BTreeMap<String, NodeSpec>,
    pub links: Vec<LinkSpec>,
}

impl Topology {
    pub fn add_node(&mut self, node: NodeSpec) -> &mut Self {
        self.nodes.insert(node.name.clone(), node);
        self
    }

    pub fn add_link(&mut self, link: LinkSpec) -> &mut Self {
        self.links.push(link);
        self
    }

    pub fn node(&self, name: &str) -> Option<&NodeSpec> {
        self.nodes.get(name)
    }

    pub fn kind(&self, name: &str) -> Option<NodeKind> {
        self.nodes.get(name).map(|n| n.kind)
    }

    pub fn link(&self, x: &str, y: &str) -> Option<&LinkSpec> {
        self.links.iter().find(|l| l.joins(x, y))
    }

    pub fn names_of(&self, kind: NodeKind) -> impl Iterator<Item = &str> {
        self.nodes.values().filter(move |n| n.kind == kind).map(|n| n.name.as_str())
    }

    /// A direct link, or two hops through a fog node.
    pub fn route(&self, from: &str, to: &str) -> Option<Vec<String>> {
        if self.link(from, to).is_some() {
            return Some(vec![from.to_string(), to.to_string()]);
        }
        self.names_of(NodeKind::Fog)
            .find(|fog| self.link(from, fog).is_some() && self.link(fog, to).is_some())
            .map(|fog| vec![from.to_string(), fog.to_string(), to.to_string()])
    }

    /// `true` when the hop exists and the adversary may act on it.
    pub fn is_open_hop(&self, hop: &Hop) -> bool {
        self.link(&hop.from, &hop.to).is_some_and(|l| !l.secure)
    }

    /// Structural checks: one LEA, every RSU and vehicle attached to an RSM,
    /// backbone links secure, vehicle radio links open.
    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: String| Err(SimError::Topology(m));
        let leas: Vec<_> = self.names_of(NodeKind::Lea).collect();
        if leas.len() != 1 {
            return err(format!("expected exactly one LEA, found {}", leas.len()));
        }
        let lea = leas[0];
        for l in &self.links {
            if l.a == l.b {
                return err(format!("self-link at {}", l.a));
            }
            let (Some(ka), Some(kb)) = (self.kind(&l.a), self.kind(&l.b)) else {
                return err(format!("link {}-{} names an unknown node", l.a, l.b));
            };
            if !(0.0..=1.0).contains(&l.drop) {
                return err(format!("link {}-{} has drop probability {}", l.a, l.b, l.drop));
            }
            let pair = if ka <= kb { (ka, kb) } else { (kb, ka) };
            let backbone = matches!(pair, (NodeKind::Lea, NodeKind::Rsm) | (NodeKind::Rsm, NodeKind::Rsu));
            let radio = matches!(pair, (NodeKind::Rsu, NodeKind::Vn) | (NodeKind::Rsu, NodeKind::Fog) | (NodeKind::Vn, NodeKind::Fog));
            if backbone && !l.secure {
                return err(format!("backbone link {}-{} must be secure", l.a, l.b));
            }
            if radio && l.secure {
                return err(format!("vehicle link {}-{} must be open", l.a, l.b));
            }
        }
        for n in self.nodes.values() {
            match n.kind {
                NodeKind::Rsm if self.link(lea, &n.name).is_none() => {
                    return err(format!("{} has no link to the LEA", n.name));
                }
                NodeKind::Rsu | NodeKind::Vn => {
                    let Some(rsm) = n.domain.as_deref() else {
                        return err(format!("{} is not assigned to an RSM", n.name));
                    };
                    if self.kind(rsm) != Some(NodeKind::Rsm) {
                        return err(format!("{} names {rsm}, which is not an RSM", n.name));
                    }
                    if n.kind == NodeKind::Rsu && self.link(rsm, &n.name).is_none() {
                        return err(format!("{} has no link to its RSM", n.name));
                    }
                    if n.kind == NodeKind::Vn && self.route(&n.name, rsm).is_none() {
                        return err(format!("{} cannot reach its home RSM", n.name));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
