//! Structural checks run before a persisted tree is resumed.

use std::collections::BTreeSet;

use super::tree::{NodeStatus, SearchTree, TreeEdge};

impl SearchTree {
    /// Verifies the tree's invariants, naming the first one violated.
    pub fn check_integrity(&self) -> Result<(), String> {
        let root = self
            .nodes
            .get(&self.root)
            .ok_or_else(|| "root: root key has no node".to_string())?;
        if root.depth != 0 || !root.parent_edges.is_empty() {
            return Err("root: root must have depth 0 and no parents".into());
        }
        if self.params.n_subjects == 0 {
            return Err("params: n_subjects must be at least 1".into());
        }

        for (key, node) in &self.nodes {
            let name = key.id();
            if &node.key != key || node.config.key() != *key {
                return Err(format!("key: node {name} is stored under a key that does not match its config"));
            }
            match (&node.record, node.status) {
                (None, NodeStatus::Pending) => {}
                (None, _) => return Err(format!("record: node {name} has a status but no record")),
                (Some(_), NodeStatus::Pending) => {
                    return Err(format!("record: node {name} has a record but is pending"))
                }
                (Some(record), status) => {
                    if &record.config_key != key {
                        return Err(format!("record: node {name} carries another config's record"));
                    }
                    if record.n_subjects() != self.params.n_subjects {
                        return Err(format!("record: node {name} has {} subjects", record.n_subjects()));
                    }
                    let recognizable = record.is_recognizable();
                    if recognizable == (status == NodeStatus::Unrecognizable) {
                        return Err(format!("status: node {name} contradicts its recorded rate"));
                    }
                    if !self.queried.contains(key) {
                        return Err(format!("queried: answered node {name} missing from the query set"));
                    }
                }
            }
            if !matches!(node.status, NodeStatus::Recognizable | NodeStatus::Minimal)
                && (node.expanded || !node.children.is_empty())
            {
                return Err(format!(
                    "unrecognizable-leaf: node {name} is expanded without being recognizable"
                ));
            }
            if !node.expanded && !node.children.is_empty() {
                return Err(format!("children: unexpanded node {name} lists children"));
            }
            let mut all_unrecognizable = true;
            for (edge, child_key) in &node.children {
                let child = self
                    .nodes
                    .get(child_key)
                    .ok_or_else(|| format!("children: node {name} points at a missing child"))?;
                if child.depth != node.depth + 1 {
                    return Err(format!("dag: child of {name} is not exactly one step deeper"));
                }
                match edge.apply(&node.config, self.params.min_side) {
                    Ok(derived) if derived == child.config => {}
                    _ => return Err(format!("edge: {edge:?} from {name} does not produce its recorded child")),
                }
                if !child.parent_edges.iter().any(|p| &p.parent == key && p.edge == *edge) {
                    return Err(format!("edge: child of {name} does not list it as a parent"));
                }
                all_unrecognizable &= child.status == NodeStatus::Unrecognizable;
            }
            if node.status == NodeStatus::Minimal && !(node.expanded && all_unrecognizable) {
                return Err(format!(
                    "minimal: node {name} is marked minimal without all children unrecognizable"
                ));
            }
            if node.status == NodeStatus::Recognizable && node.expanded && all_unrecognizable {
                return Err(format!("minimal: node {name} qualifies as minimal but is not marked"));
            }
            for parent in &node.parent_edges {
                let ok = self
                    .nodes
                    .get(&parent.parent)
                    .is_some_and(|p| p.children.iter().any(|(e, c)| c == key && *e == parent.edge));
                if !ok {
                    return Err(format!("edge: node {name} lists a parent that does not list it"));
                }
            }
        }

        let from_nodes: BTreeSet<TreeEdge> = self
            .nodes
            .iter()
            .flat_map(|(k, n)| {
                n.children.iter().map(move |(edge, child)| TreeEdge {
                    parent: k.clone(),
                    child: child.clone(),
                    edge: *edge,
                })
            })
            .collect();
        let listed: BTreeSet<TreeEdge> = self.edges.iter().cloned().collect();
        if listed.len() != self.edges.len() || listed != from_nodes {
            return Err("edges: edge list disagrees with node children".into());
        }

        if self.queried.len() > self.params.oracle_budget {
            return Err(format!(
                "budget: {} distinct queries exceed the budget of {}",
                self.queried.len(),
                self.params.oracle_budget
            ));
        }
        let waiting = self
            .batch
            .iter()
            .chain(self.frontier.iter().flatten())
            .chain(self.awaiting.iter());
        for key in waiting {
            match self.nodes.get(key) {
                Some(n) if n.status == NodeStatus::Pending => {}
                _ => return Err(format!("frontier: {} is queued but not a pending node", key.id())),
            }
        }
        Ok(())
    }
}
