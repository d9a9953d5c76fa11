use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::config::{ConfigKey, VideoConfig};
use crate::geometry::Rational;
use crate::oracle::{RecognitionRecord, DEFAULT_SUBJECTS};
use crate::reduction::{ReductionEdge, DEFAULT_MIN_SIDE};

/// Default cap on distinct configurations queried per root.
pub const DEFAULT_BUDGET: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Pending,
    Recognizable,
    Unrecognizable,
    Minimal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Traversal {
    #[default]
    Bfs,
    Dfs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub n_subjects: u32,
    pub min_side: u32,
    /// `None` means unlimited.
    pub max_depth: Option<u32>,
    pub oracle_budget: usize,
    pub traversal: Traversal,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            n_subjects: DEFAULT_SUBJECTS,
            min_side: DEFAULT_MIN_SIDE,
            max_depth: None,
            oracle_budget: DEFAULT_BUDGET,
            traversal: Traversal::Bfs,
        }
    }
}

impl SearchParams {
    /// Recognition threshold: a configuration counts as recognizable when
    /// its rate is strictly greater than this. Not configurable.
    pub fn threshold(&self) -> Rational {
        Rational::new(1, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParentEdge {
    pub parent: ConfigKey,
    pub edge: ReductionEdge,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeEdge {
    pub parent: ConfigKey,
    pub child: ConfigKey,
    pub edge: ReductionEdge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchNode {
    pub key: ConfigKey,
    pub config: VideoConfig,
    pub status: NodeStatus,
    pub record: Option<RecognitionRecord>,
    /// Number of reductions from the root (the same along every path).
    pub depth: u32,
    pub expanded: bool,
    pub parent_edges: Vec<ParentEdge>,
    /// Children in expansion order; empty until expanded.
    pub children: Vec<(ReductionEdge, ConfigKey)>,
    /// Reductions the size floor ruled out.
    pub blocked: Vec<ReductionEdge>,
}

impl SearchNode {
    pub(crate) fn pending(key: ConfigKey, config: VideoConfig, depth: u32, parent: ParentEdge) -> Self {
        SearchNode {
            key,
            config,
            status: NodeStatus::Pending,
            record: None,
            depth,
            expanded: false,
            parent_edges: vec![parent],
            children: Vec::new(),
            blocked: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AuditOutcome {
    Complete { n_correct: u32, n_subjects: u32 },
    Pending,
}

/// One oracle answer, in the order answers were applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub config_id: String,
    pub key: ConfigKey,
    pub outcome: AuditOutcome,
}

/// The explored reduction lattice plus everything needed to resume it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTree {
    pub(crate) root: ConfigKey,
    pub(crate) params: SearchParams,
    #[serde(with = "nodes_as_list")]
    pub(crate) nodes: BTreeMap<ConfigKey, SearchNode>,
    pub(crate) edges: Vec<TreeEdge>,
    pub(crate) audit: Vec<AuditEntry>,
    pub(crate) frontier: VecDeque<Vec<ConfigKey>>,
    pub(crate) batch: Vec<ConfigKey>,
    pub(crate) awaiting: BTreeSet<ConfigKey>,
    pub(crate) queried: BTreeSet<ConfigKey>,
}

impl SearchTree {
    pub(crate) fn new(root: VideoConfig, params: SearchParams) -> Self {
        let key = root.key();
        let node = SearchNode {
            key: key.clone(),
            config: root,
            status: NodeStatus::Pending,
            record: None,
            depth: 0,
            expanded: false,
            parent_edges: Vec::new(),
            children: Vec::new(),
            blocked: Vec::new(),
        };
        SearchTree {
            root: key.clone(),
            params,
            nodes: BTreeMap::from([(key.clone(), node)]),
            edges: Vec::new(),
            audit: Vec::new(),
            frontier: VecDeque::from([vec![key]]),
            batch: Vec::new(),
            awaiting: BTreeSet::new(),
            queried: BTreeSet::new(),
        }
    }

    pub fn root(&self) -> &ConfigKey {
        &self.root
    }

    pub fn root_node(&self) -> &SearchNode {
        &self.nodes[&self.root]
    }

    pub fn params(&self) -> &SearchParams {
        &self.params
    }

    /// Replaces the budget (e.g. to continue an exhausted search).
    pub fn set_budget(&mut self, budget: usize) {
        self.params.oracle_budget = budget;
    }

    pub fn node(&self, key: &ConfigKey) -> Option<&SearchNode> {
        self.nodes.get(key)
    }

    pub(crate) fn node_mut(&mut self, key: &ConfigKey) -> &mut SearchNode {
        self.nodes.get_mut(key).expect("node exists")
    }

    /// All nodes in key order.
    pub fn nodes(&self) -> impl Iterator<Item = &SearchNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    /// Distinct configurations put to the oracle so far.
    pub fn queried_count(&self) -> usize {
        self.queried.len()
    }

    /// Keys whose asynchronous answers are still outstanding.
    pub fn awaiting(&self) -> impl Iterator<Item = &ConfigKey> {
        self.awaiting.iter()
    }

    /// True when nothing is left to query or expand.
    pub fn is_complete(&self) -> bool {
        self.batch.is_empty() && self.frontier.iter().all(Vec::is_empty) && self.awaiting.is_empty()
    }

    pub fn count(&self, status: NodeStatus) -> usize {
        self.nodes.values().filter(|n| n.status == status).count()
    }
}

/// A minimal node and its one-step reductions.
#[derive(Debug)]
pub struct SubMinimalSet<'t> {
    pub minimal: &'t SearchNode,
    pub spatial: Vec<&'t SearchNode>,
    pub temporal: Vec<&'t SearchNode>,
}

mod nodes_as_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(nodes: &BTreeMap<ConfigKey, SearchNode>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(nodes.values())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<ConfigKey, SearchNode>, D::Error> {
        let list = Vec::<SearchNode>::deserialize(d)?;
        let len = list.len();
        let map: BTreeMap<_, _> = list.into_iter().map(|n| (n.key.clone(), n)).collect();
        if map.len() != len {
            return Err(serde::de::Error::custom("duplicate node key"));
        }
        Ok(map)
    }
}
