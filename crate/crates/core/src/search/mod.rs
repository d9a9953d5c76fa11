//! Recursive reduction search for minimal configurations.
//!
//! Starting from a root configuration, every recognizable node is expanded
//! into its one-step reductions and each child is put to the oracle. The
//! search never descends below an unrecognizable node. A recognizable node
//! is certified minimal once every one of its children has been answered
//! unrecognizable.
//!
//! The lattice is deduplicated by [`ConfigKey`]: a configuration reachable
//! from several parents is queried once and shared. All state needed to
//! continue (frontier, in-flight batch, outstanding asynchronous queries)
//! lives in the [`SearchTree`], so a persisted tree can be resumed and will
//! finish exactly as an uninterrupted run would.

mod integrity;
mod tree;

use std::ops::ControlFlow;

use thiserror::Error;

use crate::config::{render, ConfigError, ConfigKey, VideoConfig};
use crate::frame::SourceClip;
use crate::oracle::{Assessment, OracleError, OracleHandle, Stimulus};
use crate::reduction::expand;

pub use tree::{
    AuditEntry, AuditOutcome, NodeStatus, ParentEdge, SearchNode, SearchParams, SearchTree, SubMinimalSet,
    Traversal, TreeEdge, DEFAULT_BUDGET,
};

#[derive(Error)]
pub enum SearchError {
    #[error("oracle budget of {budget} distinct configurations exhausted")]
    BudgetExhausted { budget: usize, tree: Box<SearchTree> },
    #[error("oracle unavailable: {source}")]
    OracleUnavailable {
        source: OracleError,
        tree: Box<SearchTree>,
    },
    #[error("search interrupted by checkpoint")]
    Interrupted { tree: Box<SearchTree> },
    #[error("corrupt search state: {0}")]
    CorruptState(String),
    #[error("root configuration does not render: {0}")]
    Render(#[from] ConfigError),
    #[error("{0} is not a certified minimal configuration")]
    NotMinimal(ConfigKey),
}

impl std::fmt::Debug for SearchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SearchError({self})")
    }
}

impl SearchError {
    /// The partial tree carried by resumable errors.
    pub fn into_tree(self) -> Option<SearchTree> {
        match self {
            SearchError::BudgetExhausted { tree, .. }
            | SearchError::OracleUnavailable { tree, .. }
            | SearchError::Interrupted { tree } => Some(*tree),
            _ => None,
        }
    }
}

/// Checkpoint callback: sees the tree after every status change; returning
/// `Break` stops the search with [`SearchError::Interrupted`].
pub type Checkpoint<'a> = dyn FnMut(&SearchTree) -> ControlFlow<()> + 'a;

pub fn run_search(
    root: VideoConfig,
    clip: &SourceClip,
    oracle: &OracleHandle,
    params: SearchParams,
) -> Result<SearchTree, SearchError> {
    run_search_with(root, clip, oracle, params, &mut |_| ControlFlow::Continue(()))
}

pub fn run_search_with(
    root: VideoConfig,
    clip: &SourceClip,
    oracle: &OracleHandle,
    params: SearchParams,
    checkpoint: &mut Checkpoint<'_>,
) -> Result<SearchTree, SearchError> {
    render(&root, clip)?;
    let tree = SearchTree::new(root, params);
    drive(tree, clip, oracle, checkpoint)
}

/// Continues a persisted search. Completed node statuses never change.
pub fn resume(tree: SearchTree, clip: &SourceClip, oracle: &OracleHandle) -> Result<SearchTree, SearchError> {
    resume_with(tree, clip, oracle, &mut |_| ControlFlow::Continue(()))
}

pub fn resume_with(
    tree: SearchTree,
    clip: &SourceClip,
    oracle: &OracleHandle,
    checkpoint: &mut Checkpoint<'_>,
) -> Result<SearchTree, SearchError> {
    tree.check_integrity().map_err(SearchError::CorruptState)?;
    if tree.root.clip_id != clip.clip_id() {
        return Err(SearchError::CorruptState(format!(
            "tree belongs to clip {} but clip {} was supplied",
            tree.root.clip_id,
            clip.clip_id()
        )));
    }
    drive(tree, clip, oracle, checkpoint)
}

/// Certified minimal configurations in key order.
pub fn minimal_set(tree: &SearchTree) -> Vec<VideoConfig> {
    tree.nodes()
        .filter(|n| n.status == NodeStatus::Minimal)
        .map(|n| n.config.clone())
        .collect()
}

/// Children of a minimal node, split into spatial and temporal reductions.
pub fn sub_minimal_set<'t>(tree: &'t SearchTree, minimal_key: &ConfigKey) -> Result<SubMinimalSet<'t>, SearchError> {
    let node = tree
        .node(minimal_key)
        .filter(|n| n.status == NodeStatus::Minimal)
        .ok_or_else(|| SearchError::NotMinimal(minimal_key.clone()))?;
    let mut set = SubMinimalSet {
        minimal: node,
        spatial: Vec::new(),
        temporal: Vec::new(),
    };
    for (edge, child_key) in &node.children {
        let child = tree.node(child_key).expect("integrity: child exists");
        if edge.is_temporal() {
            set.temporal.push(child);
        } else {
            set.spatial.push(child);
        }
    }
    Ok(set)
}

fn drive(
    mut tree: SearchTree,
    clip: &SourceClip,
    oracle: &OracleHandle,
    checkpoint: &mut Checkpoint<'_>,
) -> Result<SearchTree, SearchError> {
    // Asynchronous answers that were outstanding when the last run ended get
    // asked again, ahead of everything else.
    let outstanding: Vec<ConfigKey> = tree
        .awaiting
        .iter()
        .filter(|k| !tree.batch.contains(k) && !tree.frontier.iter().any(|g| g.contains(k)))
        .cloned()
        .collect();
    if !outstanding.is_empty() {
        tree.frontier.push_front(outstanding);
    }

    loop {
        if tree.batch.is_empty() {
            let next = match tree.params.traversal {
                Traversal::Bfs => tree.frontier.drain(..).flatten().collect::<Vec<_>>(),
                Traversal::Dfs => tree.frontier.pop_back().unwrap_or_default(),
            };
            if next.is_empty() && tree.frontier.is_empty() {
                break;
            }
            let mut batch: Vec<ConfigKey> = next
                .into_iter()
                .filter(|k| tree.node(k).is_some_and(|n| n.record.is_none()))
                .collect();
            batch.sort();
            batch.dedup();
            tree.batch = batch;
            continue;
        }

        let mut allowance = tree.params.oracle_budget.saturating_sub(tree.queried.len());
        let mut stimuli = Vec::new();
        for key in &tree.batch {
            let fresh = !tree.queried.contains(key);
            if fresh && allowance == 0 {
                continue;
            }
            if fresh {
                allowance -= 1;
            }
            let config = tree.node(key).expect("batch keys exist").config.clone();
            let frames = render(&config, clip)?;
            stimuli.push(Stimulus::new(config, frames));
        }

        let results = oracle.query_batch(&stimuli, tree.params.n_subjects);
        let mut failure = None;
        for (stimulus, result) in stimuli.iter().zip(results) {
            match result {
                Ok(assessment) => {
                    tree.apply(&stimulus.key, assessment);
                    if let ControlFlow::Break(()) = checkpoint(&tree) {
                        return Err(SearchError::Interrupted { tree: Box::new(tree) });
                    }
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }

        if let Some(source) = failure {
            return Err(SearchError::OracleUnavailable {
                source,
                tree: Box::new(tree),
            });
        }
        // Whatever is left in the batch was held back by the budget.
        if !tree.batch.is_empty() {
            let budget = tree.params.oracle_budget;
            return Err(SearchError::BudgetExhausted {
                budget,
                tree: Box::new(tree),
            });
        }
    }
    Ok(tree)
}

impl SearchTree {
    /// Records one oracle answer and propagates its consequences.
    fn apply(&mut self, key: &ConfigKey, assessment: Assessment) {
        self.queried.insert(key.clone());
        self.batch.retain(|k| k != key);
        let seq = self.audit.len() as u64;
        match assessment {
            Assessment::Pending => {
                self.audit.push(AuditEntry {
                    seq,
                    config_id: key.id(),
                    key: key.clone(),
                    outcome: AuditOutcome::Pending,
                });
                self.awaiting.insert(key.clone());
                return;
            }
            Assessment::Complete(record) => {
                self.audit.push(AuditEntry {
                    seq,
                    config_id: key.id(),
                    key: key.clone(),
                    outcome: AuditOutcome::Complete {
                        n_correct: record.n_correct(),
                        n_subjects: record.n_subjects(),
                    },
                });
                self.awaiting.remove(key);
                let recognizable = record.is_recognizable();
                let node = self.node_mut(key);
                node.record = Some(record);
                node.status = if recognizable {
                    NodeStatus::Recognizable
                } else {
                    NodeStatus::Unrecognizable
                };
                if recognizable {
                    self.expand_node(key);
                    self.refresh(key);
                } else {
                    let parents: Vec<ConfigKey> =
                        self.node(key).unwrap().parent_edges.iter().map(|p| p.parent.clone()).collect();
                    for parent in parents {
                        self.refresh(&parent);
                    }
                }
            }
        }
    }

    fn expand_node(&mut self, key: &ConfigKey) {
        let (config, depth) = {
            let node = self.node(key).unwrap();
            (node.config.clone(), node.depth)
        };
        if self.params.max_depth.is_some_and(|max| depth >= max) {
            return;
        }
        let expansion = expand(&config, self.params.min_side);
        let mut group = Vec::new();
        let mut children = Vec::with_capacity(expansion.children.len());
        for (edge, child) in expansion.children {
            let child_key = child.key();
            self.edges.push(TreeEdge {
                parent: key.clone(),
                child: child_key.clone(),
                edge,
            });
            let parent_edge = ParentEdge {
                parent: key.clone(),
                edge,
            };
            match self.nodes.get_mut(&child_key) {
                Some(existing) => existing.parent_edges.push(parent_edge),
                None => {
                    self.nodes.insert(
                        child_key.clone(),
                        SearchNode::pending(child_key.clone(), child, depth + 1, parent_edge),
                    );
                    group.push(child_key.clone());
                }
            }
            children.push((edge, child_key));
        }
        let node = self.node_mut(key);
        node.expanded = true;
        node.children = children;
        node.blocked = expansion.blocked;
        if !group.is_empty() {
            self.frontier.push_back(group);
        }
    }

    /// Re-derives recognizable/minimal for an answered, recognizable node.
    fn refresh(&mut self, key: &ConfigKey) {
        let node = self.node(key).unwrap();
        if !matches!(node.status, NodeStatus::Recognizable | NodeStatus::Minimal) || !node.expanded {
            return;
        }
        let all_unrecognizable = node
            .children
            .iter()
            .all(|(_, c)| self.node(c).is_some_and(|c| c.status == NodeStatus::Unrecognizable));
        self.node_mut(key).status = if all_unrecognizable {
            NodeStatus::Minimal
        } else {
            NodeStatus::Recognizable
        };
    }
}
