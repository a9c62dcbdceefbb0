//! Indexed view of a scenario's nodes and links.

use std::collections::{BTreeMap, HashMap};

use crate::error::RoutingError;
use crate::model::{LinkSpec, NodeId, NodeSpec, Position, Role};

#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<NodeSpec>,
    index: HashMap<NodeId, usize>,
    links: BTreeMap<(usize, usize), LinkSpec>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Topology {
    /// Builds the index. Unknown link endpoints and duplicate ids are
    /// reported by scenario validation before this is called; here they are
    /// skipped (links) or shadowed (ids).
    pub fn new(nodes: &[NodeSpec], links: &[LinkSpec]) -> Self {
        let mut topo = Topology {
            nodes: Vec::new(),
            index: HashMap::new(),
            links: BTreeMap::new(),
        };
        for n in nodes {
            topo.add_node(n.clone());
        }
        for l in links {
            topo.add_link(l.clone());
        }
        topo
    }

    pub fn add_node(&mut self, node: NodeSpec) -> usize {
        let i = self.nodes.len();
        self.index.insert(node.id.clone(), i);
        self.nodes.push(node);
        i
    }

    pub fn add_link(&mut self, link: LinkSpec) -> bool {
        match (self.idx(&link.a), self.idx(&link.b)) {
            (Some(a), Some(b)) if a != b => {
                self.links.insert(key(a, b), link);
                true
            }
            _ => false,
        }
    }

    pub fn idx(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node(&self, i: usize) -> &NodeSpec {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn link(&self, a: usize, b: usize) -> Option<&LinkSpec> {
        self.links.get(&key(a, b))
    }

    pub fn links(&self) -> impl Iterator<Item = ((usize, usize), &LinkSpec)> {
        self.links.iter().map(|(k, v)| (*k, v))
    }

    /// Neighbors of `i` reachable over a link, ascending by index.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.links
            .keys()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn set_position(&mut self, i: usize, pos: Position) {
        self.nodes[i].position = Some(pos);
    }

    pub fn robots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].role == Role::Robot)
    }

    pub fn fog_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].role.is_fog())
    }

    /// Cloud region a fog node forwards misses to: the linked region with
    /// the lowest id.
    pub fn upstream_cloud(&self, fog: usize) -> Option<usize> {
        self.neighbors(fog)
            .into_iter()
            .filter(|&n| self.nodes[n].role == Role::CloudRegion)
            .min_by(|&x, &y| self.nodes[x].id.cmp(&self.nodes[y].id))
    }

    /// Fog nodes whose coverage disc contains `pos`, with distances.
    pub fn covering(&self, pos: &Position) -> Vec<(usize, f64)> {
        self.fog_nodes()
            .filter_map(|f| {
                let n = &self.nodes[f];
                let d = n.position?.distance(pos);
                (d <= n.coverage_radius_m).then_some((f, d))
            })
            .collect()
    }

    /// Nearest covering fog node; equal distances go to the lowest id.
    pub fn nearest_covering(&self, pos: &Position) -> Option<(usize, f64)> {
        self.covering(pos).into_iter().min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| self.nodes[a.0].id.cmp(&self.nodes[b.0].id))
        })
    }
}

/// Attaches `robot` to the nearest FRS or Sub-FRS that covers it.
pub fn assign_frs(robot: &NodeId, topology: &Topology) -> Result<NodeId, RoutingError> {
    let i = topology
        .idx(robot)
        .ok_or_else(|| RoutingError::UnknownNode(robot.clone()))?;
    let pos = topology
        .node(i)
        .position
        .ok_or_else(|| RoutingError::Uncovered(robot.clone()))?;
    topology
        .nearest_covering(&pos)
        .map(|(f, _)| topology.node(f).id.clone())
        .ok_or_else(|| RoutingError::Uncovered(robot.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topo(frs: &[(&str, f64, f64, f64)], robot: (f64, f64)) -> Topology {
        let mut nodes = vec![NodeSpec::robot("r", Position::new(robot.0, robot.1))];
        for &(id, x, y, r) in frs {
            nodes.push(NodeSpec::frs(id, Position::new(x, y), 1.0, 1, 4, r));
        }
        Topology::new(&nodes, &[])
    }

    #[test]
    fn nearest_frs_wins() {
        let t = topo(
            &[("frs1", 0.0, 10.0, 50.0), ("frs2", 0.0, 40.0, 50.0)],
            (0.0, 0.0),
        );
        assert_eq!(assign_frs(&"r".into(), &t).unwrap(), "frs1".into());
    }

    #[test]
    fn equidistant_goes_to_lowest_id() {
        let t = topo(
            &[("b", 0.0, 10.0, 50.0), ("a", 0.0, -10.0, 50.0)],
            (0.0, 0.0),
        );
        assert_eq!(assign_frs(&"r".into(), &t).unwrap(), "a".into());
    }

    #[test]
    fn out_of_range_is_uncovered() {
        let t = topo(&[("frs1", 0.0, 100.0, 50.0)], (0.0, 0.0));
        assert!(matches!(
            assign_frs(&"r".into(), &t),
            Err(RoutingError::Uncovered(_))
        ));
    }
}
