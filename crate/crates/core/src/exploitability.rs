//! Exact best responses and exploitability over enumerated game trees.
//!
//! All values are in normalized utility units.

use crate::game::{Action, Game, GameTree, InfoSetId, NodeKind};
use crate::tabular::TabularPolicy;
use crate::{Error, Result};

/// Anything that can be queried for a distribution at an information set.
pub trait StrategySource {
    /// Probabilities over `legal` (same order) at `id`.
    fn action_probs(&self, id: &InfoSetId, legal: &[Action]) -> Result<Vec<f64>>;
}

impl<T: StrategySource + ?Sized> StrategySource for &T {
    fn action_probs(&self, id: &InfoSetId, legal: &[Action]) -> Result<Vec<f64>> {
        (**self).action_probs(id, legal)
    }
}

impl StrategySource for TabularPolicy {
    fn action_probs(&self, id: &InfoSetId, legal: &[Action]) -> Result<Vec<f64>> {
        Ok(self.probs(id, legal.len()))
    }
}

/// Uniform random play everywhere.
pub struct Uniform;

impl StrategySource for Uniform {
    fn action_probs(&self, _id: &InfoSetId, legal: &[Action]) -> Result<Vec<f64>> {
        Ok(vec![1.0 / legal.len() as f64; legal.len()])
    }
}

/// Queries `source` at every infoset of the tree. Negative entries are
/// clipped and rows renormalized; non-finite output is an error.
pub fn extract_policy(tree: &GameTree, source: &dyn StrategySource) -> Result<TabularPolicy> {
    let mut policy = TabularPolicy::new();
    for info in tree.infosets() {
        let mut probs = source.action_probs(&info.id, &info.actions)?;
        if probs.len() != info.actions.len() {
            return Err(Error::DimensionMismatch {
                expected: info.actions.len(),
                got: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinitePolicy(info.id.to_string()));
        }
        probs.iter_mut().for_each(|p| *p = p.max(0.0));
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        } else {
            let n = probs.len() as f64;
            probs.fill(1.0 / n);
        }
        policy.insert(info.id.clone(), probs)?;
    }
    Ok(policy)
}

/// Reach of chance and every player other than `p`, per node.
fn opponent_reach(tree: &GameTree, strategy: &[f64], p: usize) -> Vec<f64> {
    let mut reach = vec![1.0; tree.len()];
    for (id, node) in tree.nodes().iter().enumerate() {
        for (k, e) in tree.edges(id).iter().enumerate() {
            let factor = match node.kind {
                NodeKind::Chance => e.prob,
                NodeKind::Decision { player, infoset } if player != p => {
                    strategy[tree.infoset(infoset).offset + k]
                }
                _ => 1.0,
            };
            reach[e.child] = reach[id] * factor;
        }
    }
    reach
}

struct BestResponse<'a> {
    tree: &'a GameTree,
    strategy: &'a [f64],
    player: usize,
    sign: f64,
    reach: Vec<f64>,
    value: Vec<Option<f64>>,
    choice: Vec<Option<usize>>,
}

impl BestResponse<'_> {
    fn value(&mut self, id: usize) -> f64 {
        if let Some(v) = self.value[id] {
            return v;
        }
        let tree = self.tree;
        let v = match tree.node(id).kind {
            NodeKind::Terminal { utility } => self.sign * utility,
            NodeKind::Chance => tree
                .edges(id)
                .iter()
                .map(|e| e.prob * self.value(e.child))
                .sum(),
            NodeKind::Decision { player, infoset } if player == self.player => {
                let k = self.choose(infoset);
                self.value(tree.edges(id)[k].child)
            }
            NodeKind::Decision { infoset, .. } => {
                let off = tree.infoset(infoset).offset;
                let mut total = 0.0;
                for (k, e) in tree.edges(id).iter().enumerate() {
                    let p = self.strategy[off + k];
                    if p > 0.0 {
                        total += p * self.value(e.child);
                    }
                }
                total
            }
        };
        self.value[id] = Some(v);
        v
    }

    /// Best action index of an infoset; ties go to the lowest index.
    fn choose(&mut self, infoset: usize) -> usize {
        if let Some(k) = self.choice[infoset] {
            return k;
        }
        let tree = self.tree;
        let info = tree.infoset(infoset);
        let mut totals = vec![0.0; info.actions.len()];
        for &h in &info.nodes {
            let w = self.reach[h];
            for (k, e) in tree.edges(h).iter().enumerate() {
                totals[k] += w * self.value(e.child);
            }
        }
        let mut best = 0;
        for k in 1..totals.len() {
            if totals[k] > totals[best] {
                best = k;
            }
        }
        self.choice[infoset] = Some(best);
        best
    }
}

/// Value to `player` of a best response against `strategy` (flat slots;
/// only the opponent's entries are read).
pub fn best_response_value_flat(tree: &GameTree, strategy: &[f64], player: usize) -> f64 {
    best_response_flat(tree, strategy, player).0
}

/// Best-response value and the chosen action index per infoset of `player`.
pub fn best_response_flat(tree: &GameTree, strategy: &[f64], player: usize) -> (f64, Vec<Option<usize>>) {
    let mut br = BestResponse {
        tree,
        strategy,
        player,
        sign: if player == 0 { 1.0 } else { -1.0 },
        reach: opponent_reach(tree, strategy, player),
        value: vec![None; tree.len()],
        choice: vec![None; tree.infosets().len()],
    };
    let v = br.value(tree.root());
    // Infosets only reached with zero probability still get a choice.
    for i in 0..tree.infosets().len() {
        if tree.infoset(i).player == player {
            br.choose(i);
        }
    }
    (v, br.choice)
}

/// Expected normalized utility of `player` at every node when both follow
/// `strategy`.
pub fn node_values_flat(tree: &GameTree, strategy: &[f64], player: usize) -> Vec<f64> {
    let sign = if player == 0 { 1.0 } else { -1.0 };
    let mut value = vec![0.0; tree.len()];
    for id in (0..tree.len()).rev() {
        value[id] = match tree.node(id).kind {
            NodeKind::Terminal { utility } => sign * utility,
            NodeKind::Chance => tree.edges(id).iter().map(|e| e.prob * value[e.child]).sum(),
            NodeKind::Decision { infoset, .. } => {
                let off = tree.infoset(infoset).offset;
                tree.edges(id)
                    .iter()
                    .enumerate()
                    .map(|(k, e)| strategy[off + k] * value[e.child])
                    .sum()
            }
        };
    }
    value
}

/// Expected normalized utility of `player` when both follow `strategy`.
pub fn expected_value_flat(tree: &GameTree, strategy: &[f64], player: usize) -> f64 {
    node_values_flat(tree, strategy, player)[tree.root()]
}

/// Counterfactual values of `player`: per slot `v(I, a)` and per infoset
/// `v(I)`, plus the opponent-and-chance reach `π_{-i}(I)` per infoset.
pub fn counterfactual_values_flat(tree: &GameTree, strategy: &[f64], player: usize) -> CounterfactualValues {
    let reach = opponent_reach(tree, strategy, player);
    let value = node_values_flat(tree, strategy, player);
    let mut out = CounterfactualValues {
        action: vec![0.0; tree.num_slots()],
        infoset: vec![0.0; tree.infosets().len()],
        reach: vec![0.0; tree.infosets().len()],
    };
    for (i, info) in tree.infosets().iter().enumerate() {
        if info.player != player {
            continue;
        }
        for &h in &info.nodes {
            out.reach[i] += reach[h];
            out.infoset[i] += reach[h] * value[h];
            for (k, e) in tree.edges(h).iter().enumerate() {
                out.action[info.offset + k] += reach[h] * value[e.child];
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct CounterfactualValues {
    pub action: Vec<f64>,
    pub infoset: Vec<f64>,
    pub reach: Vec<f64>,
}

/// `(BR_0(σ_1) + BR_1(σ_0)) / 2`.
pub fn exploitability_flat(tree: &GameTree, strategy: &[f64]) -> f64 {
    let total: f64 = (0..2).map(|p| best_response_value_flat(tree, strategy, p)).sum();
    total / 2.0
}

/// Holds an enumerated tree for repeated evaluations of one game.
pub struct Evaluator {
    tree: GameTree,
}

impl Evaluator {
    pub fn new(game: &Game) -> Self {
        Evaluator {
            tree: GameTree::build(game),
        }
    }

    pub fn tree(&self) -> &GameTree {
        &self.tree
    }

    pub fn exploitability(&self, policy: &TabularPolicy) -> Result<f64> {
        Ok(exploitability_flat(&self.tree, &policy.to_flat(&self.tree)?))
    }

    pub fn best_response_value(&self, policy: &TabularPolicy, player: usize) -> Result<f64> {
        Ok(best_response_value_flat(&self.tree, &policy.to_flat(&self.tree)?, player))
    }

    pub fn expected_value(&self, policy: &TabularPolicy, player: usize) -> Result<f64> {
        Ok(expected_value_flat(&self.tree, &policy.to_flat(&self.tree)?, player))
    }

    /// Materializes `source` and evaluates it.
    pub fn exploitability_of(&self, source: &dyn StrategySource) -> Result<f64> {
        self.exploitability(&extract_policy(&self.tree, source)?)
    }
}

pub fn best_response_value(game: &Game, policy: &TabularPolicy, player: usize) -> Result<f64> {
    Evaluator::new(game).best_response_value(policy, player)
}

pub fn exploitability(game: &Game, policy: &TabularPolicy) -> Result<f64> {
    Evaluator::new(game).exploitability(policy)
}
