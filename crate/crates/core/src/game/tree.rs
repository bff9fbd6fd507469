//! Flattened game tree for exact (full-traversal) computations.
//!
//! Nodes are stored in depth-first pre-order, so every child has a larger
//! index than its parent and a reverse scan visits children before parents.

use std::collections::HashMap;

use super::{Action, Game, History, InfoSetId, Phase};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeKind {
    Chance,
    Decision { player: usize, infoset: usize },
    /// Normalized utility of player 0.
    Terminal { utility: f64 },
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub depth: usize,
    first_edge: usize,
    num_edges: usize,
}

/// An outgoing edge. `prob` is the chance probability at chance nodes and
/// zero elsewhere.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub action: Action,
    pub child: usize,
    pub prob: f64,
}

#[derive(Clone, Debug)]
pub struct InfoSetEntry {
    pub id: InfoSetId,
    pub player: usize,
    pub actions: Vec<Action>,
    /// Start of this infoset's slots in flat per-(infoset, action) arrays.
    pub offset: usize,
    /// Tree nodes belonging to this information set.
    pub nodes: Vec<usize>,
}

#[derive(Debug)]
pub struct GameTree {
    nodes: Vec<TreeNode>,
    edges: Vec<Edge>,
    infosets: Vec<InfoSetEntry>,
    index: HashMap<InfoSetId, usize>,
    num_slots: usize,
}

impl GameTree {
    /// Enumerates the whole game. Only sensible for games that fit in memory.
    pub fn build(game: &Game) -> GameTree {
        let mut tree = GameTree {
            nodes: Vec::new(),
            edges: Vec::new(),
            infosets: Vec::new(),
            index: HashMap::new(),
            num_slots: 0,
        };
        tree.expand(game, &game.root(), None, 0);
        tree
    }

    fn expand(&mut self, game: &Game, h: &History, parent: Option<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let kind = match h.phase() {
            Phase::Terminal => NodeKind::Terminal {
                utility: game.normalize_utility(game.utility(h, 0).expect("terminal")),
            },
            Phase::Chance => NodeKind::Chance,
            Phase::Decision(p) => {
                let key = game.infoset_key(h, p).expect("decision node");
                let next = self.infosets.len();
                let slot = *self.index.entry(key.clone()).or_insert(next);
                if slot == next {
                    let actions = game.legal_actions(h).expect("decision node");
                    let offset = self.num_slots;
                    self.num_slots += actions.len();
                    self.infosets.push(InfoSetEntry {
                        id: key,
                        player: p,
                        actions,
                        offset,
                        nodes: Vec::new(),
                    });
                }
                self.infosets[slot].nodes.push(id);
                NodeKind::Decision {
                    player: p,
                    infoset: slot,
                }
            }
        };
        self.nodes.push(TreeNode {
            kind,
            parent,
            depth,
            first_edge: 0,
            num_edges: 0,
        });
        let outgoing: Vec<(Action, f64)> = match h.phase() {
            Phase::Terminal => Vec::new(),
            Phase::Chance => game.chance_outcomes(h).expect("chance node"),
            Phase::Decision(_) => game
                .legal_actions(h)
                .expect("decision node")
                .into_iter()
                .map(|a| (a, 0.0))
                .collect(),
        };
        let mut children = Vec::with_capacity(outgoing.len());
        for &(a, _) in &outgoing {
            let child = game.apply_unchecked(h, a);
            children.push(self.expand(game, &child, Some(id), depth + 1));
        }
        let first = self.edges.len();
        for ((action, prob), child) in outgoing.into_iter().zip(children) {
            self.edges.push(Edge {
                action,
                child,
                prob,
            });
        }
        self.nodes[id].first_edge = first;
        self.nodes[id].num_edges = self.edges.len() - first;
        id
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn edges(&self, id: usize) -> &[Edge] {
        let n = &self.nodes[id];
        &self.edges[n.first_edge..n.first_edge + n.num_edges]
    }

    pub fn infosets(&self) -> &[InfoSetEntry] {
        &self.infosets
    }

    pub fn infoset(&self, index: usize) -> &InfoSetEntry {
        &self.infosets[index]
    }

    /// Total number of (infoset, action) pairs.
    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn infoset_index(&self, id: &InfoSetId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Action sequence leading to a node.
    pub fn path(&self, mut id: usize) -> Vec<Action> {
        let mut path = Vec::with_capacity(self.nodes[id].depth);
        while let Some(parent) = self.nodes[id].parent {
            let action = self
                .edges(parent)
                .iter()
                .find(|e| e.child == id)
                .map(|e| e.action)
                .expect("child edge");
            path.push(action);
            id = parent;
        }
        path.reverse();
        path
    }

    /// Rebuilds the [`History`] for a node.
    pub fn history(&self, game: &Game, id: usize) -> History {
        let mut h = game.root();
        for a in self.path(id) {
            h = game.apply_unchecked(&h, a);
        }
        h
    }
}
