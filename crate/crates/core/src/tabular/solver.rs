use crate::exploitability::{counterfactual_values_flat, exploitability_flat, node_values_flat};
use crate::game::{Game, GameTree, NodeKind};
use crate::Result;

use super::rules::{regret_matching_into, RegretUpdateRule, Variant};
use super::TabularPolicy;

/// Full-traversal CFR over an enumerated game tree.
///
/// Regrets, cumulative strategies and the previous instantaneous regrets are
/// stored in flat arrays indexed by the tree's (infoset, action) slots.
pub struct TabularSolver {
    tree: GameTree,
    rule: RegretUpdateRule,
    regrets: Vec<f64>,
    cumulative: Vec<f64>,
    last_instant: Vec<f64>,
    strategy: Vec<f64>,
    /// Number of completed regret updates per player.
    updates: [u64; 2],
    t: u64,
    predict: bool,
}

/// Reach probabilities of one node: player 0, player 1, chance.
#[derive(Clone, Copy)]
struct Reach([f64; 3]);

impl Reach {
    fn own(&self, p: usize) -> f64 {
        self.0[p]
    }

    fn others(&self, p: usize) -> f64 {
        self.0[1 - p] * self.0[2]
    }
}

impl TabularSolver {
    pub fn new(game: &Game, rule: RegretUpdateRule) -> Result<Self> {
        let rule = rule.validate()?;
        Ok(Self::with_tree(GameTree::build(game), rule))
    }

    pub fn with_tree(tree: GameTree, rule: RegretUpdateRule) -> Self {
        let n = tree.num_slots();
        let mut solver = TabularSolver {
            tree,
            rule,
            regrets: vec![0.0; n],
            cumulative: vec![0.0; n],
            last_instant: vec![0.0; n],
            strategy: vec![0.0; n],
            updates: [0; 2],
            t: 0,
            predict: rule.variant.uses_prediction(),
        };
        solver.refresh_strategy();
        solver
    }

    /// Makes a predictive variant use a zero prediction, so its iterates
    /// coincide with the non-predictive counterpart.
    pub fn disable_prediction(&mut self) {
        self.predict = false;
        self.refresh_strategy();
    }

    pub fn tree(&self) -> &GameTree {
        &self.tree
    }

    pub fn rule(&self) -> RegretUpdateRule {
        self.rule
    }

    /// Completed iterations.
    pub fn iteration(&self) -> u64 {
        self.t
    }

    pub fn regrets(&self) -> &[f64] {
        &self.regrets
    }

    pub fn cumulative_strategy(&self) -> &[f64] {
        &self.cumulative
    }

    /// Strategy that the next iteration will play, in flat slot layout.
    pub fn current_strategy(&self) -> &[f64] {
        &self.strategy
    }

    pub fn current_policy(&self) -> Result<TabularPolicy> {
        TabularPolicy::from_flat(&self.tree, &self.strategy)
    }

    /// Average strategy in flat slot layout; rows never reached are uniform.
    pub fn average_strategy(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.tree.num_slots()];
        for info in self.tree.infosets() {
            let range = info.offset..info.offset + info.actions.len();
            normalize_row(&self.cumulative[range.clone()], &mut avg[range]);
        }
        avg
    }

    pub fn average_policy(&self) -> Result<TabularPolicy> {
        TabularPolicy::from_flat(&self.tree, &self.average_strategy())
    }

    /// Runs one iteration: both players in turn when alternating, both
    /// against the same profile otherwise.
    pub fn iterate(&mut self) -> Result<()> {
        self.t += 1;
        if self.rule.alternating {
            for p in 0..2 {
                self.refresh_strategy();
                let (instant, weight) = self.accumulate(p);
                self.apply(p, &instant, &weight)?;
            }
        } else {
            self.refresh_strategy();
            let updates: Vec<_> = (0..2).map(|p| self.accumulate(p)).collect();
            for (p, (instant, weight)) in updates.iter().enumerate() {
                self.apply(p, instant, weight)?;
            }
        }
        self.refresh_strategy();
        Ok(())
    }

    /// Recomputes the playing strategy from the stored regrets.
    fn refresh_strategy(&mut self) {
        let mut row = Vec::new();
        for info in self.tree.infosets() {
            let range = info.offset..info.offset + info.actions.len();
            row.clear();
            if self.predict {
                let k = self.updates[info.player];
                for s in range.clone() {
                    let r = self
                        .rule
                        .predicted_cumulative_regret(self.regrets[s], self.last_instant[s], k)
                        .expect("predictive variant");
                    row.push(r);
                }
            } else {
                row.extend_from_slice(&self.regrets[range.clone()]);
            }
            regret_matching_into(&row, &mut self.strategy[range]);
        }
    }

    fn reaches(&self) -> Vec<Reach> {
        let mut reach = vec![Reach([1.0; 3]); self.tree.len()];
        for (id, node) in self.tree.nodes().iter().enumerate() {
            let here = reach[id];
            for (k, e) in self.tree.edges(id).iter().enumerate() {
                let mut r = here;
                match node.kind {
                    NodeKind::Chance => r.0[2] *= e.prob,
                    NodeKind::Decision { player, infoset } => {
                        r.0[player] *= self.strategy[self.tree.infoset(infoset).offset + k];
                    }
                    NodeKind::Terminal { .. } => unreachable!(),
                }
                reach[e.child] = r;
            }
        }
        reach
    }

    /// Counterfactual values of player `p` under the current strategy:
    /// per slot `v(I, a)` and per infoset `v(I)`.
    pub fn counterfactual_values(&self, p: usize) -> (Vec<f64>, Vec<f64>) {
        let cf = counterfactual_values_flat(&self.tree, &self.strategy, p);
        (cf.action, cf.infoset)
    }

    /// Instantaneous regrets and reach-weighted strategy of player `p`.
    fn accumulate(&self, p: usize) -> (Vec<f64>, Vec<f64>) {
        let reach = self.reaches();
        let value = node_values_flat(&self.tree, &self.strategy, p);
        let n = self.tree.num_slots();
        let mut instant = vec![0.0; n];
        let mut weight = vec![0.0; n];
        for info in self.tree.infosets() {
            if info.player != p {
                continue;
            }
            for &h in &info.nodes {
                let w = reach[h].others(p);
                for (k, e) in self.tree.edges(h).iter().enumerate() {
                    instant[info.offset + k] += w * (value[e.child] - value[h]);
                }
            }
            // Own reach is the same at every node of an infoset.
            let own = reach[info.nodes[0]].own(p);
            for k in 0..info.actions.len() {
                weight[info.offset + k] = own * self.strategy[info.offset + k];
            }
        }
        (instant, weight)
    }

    fn apply(&mut self, p: usize, instant: &[f64], weight: &[f64]) -> Result<()> {
        let t = self.t;
        for info in self.tree.infosets() {
            if info.player != p {
                continue;
            }
            for s in info.offset..info.offset + info.actions.len() {
                self.regrets[s] = self.rule.update_cumulative_regret(self.regrets[s], instant[s], t)?;
                self.cumulative[s] = self.rule.update_cumulative_strategy(self.cumulative[s], weight[s], t)?;
                self.last_instant[s] = instant[s];
            }
        }
        self.updates[p] += 1;
        Ok(())
    }
}

/// Normalizes a nonnegative row; an all-zero row becomes uniform.
pub fn normalize_row(c: &[f64], out: &mut [f64]) {
    let total: f64 = c.iter().sum();
    if total > 0.0 {
        for (o, x) in out.iter_mut().zip(c) {
            *o = x / total;
        }
    } else {
        out.fill(1.0 / c.len() as f64);
    }
}

/// Average strategy and exploitability log of a tabular run.
#[derive(Clone, Debug)]
pub struct CfrRun {
    pub policy: TabularPolicy,
    /// `(iteration, exploitability of the average strategy)`.
    pub log: Vec<(u64, f64)>,
}

/// Runs `iterations` iterations, logging exploitability of the average
/// strategy every `log_every` iterations and at the last one.
pub fn run_cfr(game: &Game, rule: RegretUpdateRule, iterations: u64, log_every: u64) -> Result<CfrRun> {
    let mut solver = TabularSolver::new(game, rule)?;
    let mut log = Vec::new();
    for t in 1..=iterations {
        solver.iterate()?;
        if t == iterations || (log_every > 0 && t % log_every == 0) {
            log.push((t, exploitability_flat(solver.tree(), &solver.average_strategy())));
        }
    }
    Ok(CfrRun {
        policy: solver.average_policy()?,
        log,
    })
}

impl Variant {
    /// Default rule for this variant.
    pub fn rule(self) -> RegretUpdateRule {
        RegretUpdateRule::new(self)
    }
}
