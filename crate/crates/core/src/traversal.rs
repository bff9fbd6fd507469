//! Outcome-sampling traversal with a history baseline.
//!
//! One episode samples a single terminal. At the traverser's decisions the
//! action is drawn from an epsilon-uniform mix of the current strategy, at the
//! opponent's from the strategy itself, and chance from its distribution. On
//! the way back every decision node gets a baseline-corrected value row;
//! traverser nodes emit advantage samples, opponent nodes emit strategy
//! samples and every decision node emits a transition.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::buffers::{AdvantageSample, HistoryData, InfoSetData, StrategySample, Successor, TransitionSample};
use crate::exploitability::StrategySource;
use crate::game::{Action, Game, History, InfoSetId};
use crate::{Error, Result};

/// Hands out shared, encoded infoset and history records.
#[derive(Default)]
pub struct Interner {
    infosets: HashMap<InfoSetId, Arc<InfoSetData>>,
    histories: HashMap<Vec<u8>, Arc<HistoryData>>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record of the infoset of the player acting at `h`.
    pub fn infoset(&mut self, game: &Game, h: &History) -> Result<Arc<InfoSetData>> {
        let id = game.current_infoset(h)?;
        if let Some(d) = self.infosets.get(&id) {
            return Ok(d.clone());
        }
        let data = Arc::new(InfoSetData {
            index: self.infosets.len(),
            features: game.encode_infoset(&id)?.0,
            legal: game.legal_actions(h)?,
            id: id.clone(),
        });
        self.infosets.insert(id, data.clone());
        Ok(data)
    }

    pub fn history(&mut self, game: &Game, h: &History) -> Result<Arc<HistoryData>> {
        if let Some(d) = self.histories.get(h.action_bytes()) {
            return Ok(d.clone());
        }
        let player = h.current_player().ok_or(if h.is_terminal() {
            Error::TerminalHistory
        } else {
            Error::ChanceNode
        })?;
        let data = Arc::new(HistoryData {
            index: self.histories.len(),
            actions: h.action_bytes().to_vec(),
            player,
            features: game.encode_history(h)?.0,
            legal: game.legal_actions(h)?,
        });
        self.histories.insert(h.action_bytes().to_vec(), data.clone());
        Ok(data)
    }

    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    pub fn num_histories(&self) -> usize {
        self.histories.len()
    }

    pub fn infosets(&self) -> impl Iterator<Item = &Arc<InfoSetData>> {
        self.infosets.values()
    }
}

/// Current strategy and baseline, frozen for one iteration.
pub trait TraversalModel {
    /// Strategy over `info.legal`.
    fn strategy(&mut self, info: &Arc<InfoSetData>) -> Result<Arc<[f64]>>;
    /// Baseline `Q(h, a)` from player 0's point of view over `history.legal`,
    /// or `None` for a zero baseline.
    fn baseline(&mut self, history: &Arc<HistoryData>) -> Result<Option<Arc<[f64]>>>;
}

/// Picks the index of the next action given its sampling probabilities.
pub trait Chooser {
    fn choose(&mut self, h: &History, actions: &[Action], probs: &[f64]) -> Result<usize>;
}

/// Samples from the given probabilities.
pub struct RngChooser<'a, R: Rng>(pub &'a mut R);

impl<R: Rng> Chooser for RngChooser<'_, R> {
    fn choose(&mut self, _h: &History, _actions: &[Action], probs: &[f64]) -> Result<usize> {
        Ok(sample_index(probs, self.0.random::<f64>()))
    }
}

/// Index drawn by inverting the cumulative distribution at `u` in `[0, 1)`.
/// Zero-probability entries are never returned.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Follows a fixed terminal history.
pub struct PathChooser<'a>(pub &'a [u8]);

impl Chooser for PathChooser<'_> {
    fn choose(&mut self, h: &History, actions: &[Action], _probs: &[f64]) -> Result<usize> {
        let a = *self
            .0
            .get(h.len())
            .ok_or_else(|| Error::InvalidParameter("path ends before a terminal".into()))? as Action;
        actions.iter().position(|&x| x == a).ok_or(Error::IllegalAction { action: a })
    }
}

/// Receives what an episode produces.
pub trait SampleSink {
    fn advantage(&mut self, sample: AdvantageSample) -> Result<()>;
    fn strategy(&mut self, sample: StrategySample) -> Result<()>;
    fn transition(&mut self, sample: TransitionSample) -> Result<()>;
}

/// Keeps everything in vectors.
#[derive(Default)]
pub struct CollectSink {
    pub advantages: Vec<AdvantageSample>,
    pub strategies: Vec<StrategySample>,
    pub transitions: Vec<TransitionSample>,
}

impl SampleSink for CollectSink {
    fn advantage(&mut self, sample: AdvantageSample) -> Result<()> {
        self.advantages.push(sample);
        Ok(())
    }

    fn strategy(&mut self, sample: StrategySample) -> Result<()> {
        self.strategies.push(sample);
        Ok(())
    }

    fn transition(&mut self, sample: TransitionSample) -> Result<()> {
        self.transitions.push(sample);
        Ok(())
    }
}

/// `(1 - epsilon) * sigma + epsilon / |A|`.
pub fn sampling_policy(sigma: &[f64], epsilon: f64) -> Vec<f64> {
    let u = epsilon / sigma.len() as f64;
    sigma.iter().map(|&p| (1.0 - epsilon) * p + u).collect()
}

/// Value row at a decision node: the sampled entry is the baseline plus the
/// importance-weighted correction, the others are the baseline itself.
pub fn baseline_adjusted_values(baseline: &[f64], sampled: usize, child_value: f64, xi: f64) -> Result<Vec<f64>> {
    if xi <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sampling probability of the taken action must be positive, got {xi}"
        )));
    }
    let mut v = baseline.to_vec();
    v[sampled] += (child_value - baseline[sampled]) / xi;
    Ok(v)
}

/// `v(a) - sum_b sigma(b) v(b)`.
pub fn sampled_advantages(values: &[f64], sigma: &[f64]) -> Vec<f64> {
    let mean = expected_row(values, sigma);
    values.iter().map(|v| v - mean).collect()
}

fn expected_row(values: &[f64], sigma: &[f64]) -> f64 {
    values.iter().zip(sigma).map(|(v, p)| v * p).sum()
}

/// Parameters of one traversal.
pub struct Traversal<'a> {
    pub game: &'a Game,
    pub interner: &'a mut Interner,
    pub model: &'a mut dyn TraversalModel,
    pub sink: &'a mut dyn SampleSink,
    pub chooser: &'a mut dyn Chooser,
    pub epsilon: f64,
    pub t: u64,
}

impl Traversal<'_> {
    /// Samples one episode for `traverser` and returns its baseline-corrected
    /// value estimate at the root.
    pub fn episode(&mut self, traverser: usize) -> Result<f64> {
        let root = self.game.root();
        let h = self.resolve_chance(root)?;
        self.visit(&h, traverser)
    }

    fn resolve_chance(&mut self, mut h: History) -> Result<History> {
        while h.is_chance() {
            let outcomes = self.game.chance_outcomes(&h)?;
            let actions: Vec<Action> = outcomes.iter().map(|o| o.0).collect();
            let probs: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
            let k = self.chooser.choose(&h, &actions, &probs)?;
            h = self.game.apply_unchecked(&h, actions[k]);
        }
        Ok(h)
    }

    fn visit(&mut self, h: &History, traverser: usize) -> Result<f64> {
        if h.is_terminal() {
            return self.game.normalized_utility(h, traverser);
        }
        let info = self.interner.infoset(self.game, h)?;
        let hist = self.interner.history(self.game, h)?;
        let sigma = self.model.strategy(&info)?;
        let own = hist.player == traverser;
        let xi = if own {
            sampling_policy(&sigma, self.epsilon)
        } else {
            sigma.to_vec()
        };
        let k = self.chooser.choose(h, &info.legal, &xi)?;
        let action = info.legal[k];
        let next = self.resolve_chance(self.game.apply_unchecked(h, action))?;
        let child = self.visit(&next, traverser)?;

        let sign = if traverser == 0 { 1.0 } else { -1.0 };
        let q: Vec<f64> = match self.model.baseline(&hist)? {
            Some(q) => q.iter().map(|v| sign * v).collect(),
            None => vec![0.0; info.legal.len()],
        };
        let values = baseline_adjusted_values(&q, k, child, xi[k])?;
        let value = expected_row(&values, &sigma);

        if own {
            self.sink.advantage(AdvantageSample {
                info: info.clone(),
                advantages: values.iter().map(|v| v - value).collect(),
            })?;
        } else {
            self.sink.strategy(StrategySample {
                info: info.clone(),
                t: self.t,
                strategy: sigma.clone(),
            })?;
        }
        let (reward, successor) = if next.is_terminal() {
            (self.game.normalized_utility(&next, 0)?, Successor::Terminal)
        } else {
            let player = next.current_player().expect("decision node");
            let successor = Successor::Decision {
                history: self.interner.history(self.game, &next)?,
                info: self.interner.infoset(self.game, &next)?,
                player,
            };
            (0.0, successor)
        };
        self.sink
            .transition(TransitionSample::new(self.t, hist, action, reward, successor)?)?;
        Ok(value)
    }
}

/// One step of a terminal path as seen by the estimators.
struct Step {
    /// Probability of the taken action under the played profile and under
    /// the sampling profile.
    sigma: f64,
    xi: f64,
    /// Acting player, `None` at chance.
    player: Option<usize>,
    infoset: Option<InfoSetId>,
    action: Action,
}

fn path_steps(game: &Game, sigma: &dyn StrategySource, epsilon: f64, traverser: usize, z: &History) -> Result<Vec<Step>> {
    if !z.is_terminal() {
        return Err(Error::NonTerminalHistory);
    }
    let mut h = game.root();
    let mut steps = Vec::with_capacity(z.len());
    for a in z.actions() {
        if h.is_chance() {
            let p = game
                .chance_outcomes(&h)?
                .into_iter()
                .find(|o| o.0 == a)
                .ok_or(Error::IllegalAction { action: a })?
                .1;
            steps.push(Step {
                sigma: p,
                xi: p,
                player: None,
                infoset: None,
                action: a,
            });
        } else {
            let legal = game.legal_actions(&h)?;
            let k = legal.iter().position(|&x| x == a).ok_or(Error::IllegalAction { action: a })?;
            let id = game.current_infoset(&h)?;
            let probs = sigma.action_probs(&id, &legal)?;
            let player = h.current_player().expect("decision node");
            let xi = if player == traverser {
                sampling_policy(&probs, epsilon)[k]
            } else {
                probs[k]
            };
            steps.push(Step {
                sigma: probs[k],
                xi,
                player: Some(player),
                infoset: Some(id),
                action: a,
            });
        }
        h = game.apply_unchecked(&h, a);
    }
    Ok(steps)
}

/// Sampled values `(v(I, a))_a` along `z` for the traverser's infoset `I`
/// using the estimator `which`.
fn path_estimator(
    game: &Game,
    sigma: &dyn StrategySource,
    epsilon: f64,
    z: &History,
    infoset: &InfoSetId,
    which: Estimator,
) -> Result<Vec<f64>> {
    let traverser = infoset.owner;
    let steps = path_steps(game, sigma, epsilon, traverser, z)?;
    let j = steps
        .iter()
        .position(|s| s.infoset.as_ref() == Some(infoset))
        .ok_or_else(|| Error::InvalidInfoSet(format!("{infoset} is not on the path")))?;
    let u = game.normalized_utility(z, traverser)?;
    let others_before: f64 = steps[..j]
        .iter()
        .filter(|s| s.player != Some(traverser))
        .map(|s| s.sigma)
        .product();
    let tail_sigma: f64 = steps[j + 1..].iter().map(|s| s.sigma).product();
    let xi_all: f64 = steps.iter().map(|s| s.xi).product();
    let xi_tail: f64 = steps[j..].iter().map(|s| s.xi).product();
    let mut h = game.root();
    for s in &steps[..j] {
        h = game.apply_unchecked(&h, s.action);
    }
    let legal = game.legal_actions(&h)?;
    Ok(legal
        .iter()
        .map(|&a| {
            if a != steps[j].action {
                return 0.0;
            }
            match which {
                Estimator::Hat => others_before * tail_sigma * u / xi_all,
                Estimator::Check => tail_sigma * u / xi_tail,
            }
        })
        .collect())
}

#[derive(Clone, Copy)]
enum Estimator {
    Hat,
    Check,
}

/// `pi_{-i}(z[I]) pi(z[I]a, z) u_i(z) / pi^xi(z)` for every legal `a`.
pub fn estimator_hat(
    game: &Game,
    sigma: &dyn StrategySource,
    epsilon: f64,
    z: &History,
    infoset: &InfoSetId,
) -> Result<Vec<f64>> {
    path_estimator(game, sigma, epsilon, z, infoset, Estimator::Hat)
}

/// `pi(z[I]a, z) u_i(z) / pi^xi(z[I], z)` for every legal `a`.
pub fn estimator_check(
    game: &Game,
    sigma: &dyn StrategySource,
    epsilon: f64,
    z: &History,
    infoset: &InfoSetId,
) -> Result<Vec<f64>> {
    path_estimator(game, sigma, epsilon, z, infoset, Estimator::Check)
}

/// Fixed strategy table with an optional baseline keyed by action bytes.
pub struct TableModel<'a> {
    pub sigma: &'a dyn StrategySource,
    pub baseline: Option<&'a HashMap<Vec<u8>, Vec<f64>>>,
    cache: HashMap<usize, Arc<[f64]>>,
}

impl<'a> TableModel<'a> {
    pub fn new(sigma: &'a dyn StrategySource, baseline: Option<&'a HashMap<Vec<u8>, Vec<f64>>>) -> Self {
        TableModel {
            sigma,
            baseline,
            cache: HashMap::new(),
        }
    }
}

impl TraversalModel for TableModel<'_> {
    fn strategy(&mut self, info: &Arc<InfoSetData>) -> Result<Arc<[f64]>> {
        if let Some(s) = self.cache.get(&info.index) {
            return Ok(s.clone());
        }
        let s: Arc<[f64]> = self.sigma.action_probs(&info.id, &info.legal)?.into();
        self.cache.insert(info.index, s.clone());
        Ok(s)
    }

    fn baseline(&mut self, history: &Arc<HistoryData>) -> Result<Option<Arc<[f64]>>> {
        let Some(table) = self.baseline else {
            return Ok(None);
        };
        let q = table
            .get(&history.actions)
            .ok_or_else(|| Error::InvalidParameter("history missing from baseline table".into()))?;
        Ok(Some(q.as_slice().into()))
    }
}
