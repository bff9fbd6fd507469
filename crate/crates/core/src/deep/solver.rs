use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use crate::buffers::{
    AdvantageSample, CircularBuffer, HistoryData, InfoSetData, PerIterationBuffer, ReservoirBuffer, StrategySample,
    Successor, TransitionSample,
};
use crate::exploitability::{Evaluator, StrategySource};
use crate::game::{Action, Game, InfoSetId};
use crate::nn::{
    loss_and_gradients, make_target_bootstrap_cumulative, make_target_q, masked_softmax, strategy_loss_weight, Adam,
    Architecture, Batch, LossKind, Mlp,
};
use crate::tabular::{discount, regret_matching, regret_matching_argmax};
use crate::traversal::{Interner, RngChooser, SampleSink, Traversal, TraversalModel};
use crate::Result;

/// Strategy from cumulative (and, when predicting, instantaneous) advantage
/// outputs over the legal actions. `updates` counts completed updates of the
/// owner's networks; before the first one the strategy is uniform.
pub fn strategy_from_outputs(
    cumulative: &[f64],
    instantaneous: Option<&[f64]>,
    updates: u64,
    alpha: f64,
    argmax: bool,
) -> Vec<f64> {
    if updates == 0 {
        return vec![1.0 / cumulative.len() as f64; cumulative.len()];
    }
    let row: Vec<f64> = match instantaneous {
        Some(r) => {
            let d = discount(updates as f64, alpha);
            cumulative.iter().zip(r).map(|(c, r)| c.max(0.0) * d + r).collect()
        }
        None => cumulative.to_vec(),
    };
    if argmax {
        regret_matching_argmax(&row)
    } else {
        regret_matching(&row)
    }
}

/// `sum_a sigma(a) Q(a)`.
pub fn successor_value(sigma: &[f64], q: &[f64]) -> f64 {
    sigma.iter().zip(q).map(|(s, q)| s * q).sum()
}

fn to_f64(x: &[f32]) -> Vec<f64> {
    x.iter().map(|&v| f64::from(v)).collect()
}

fn legal_outputs(net: &Mlp, features: &[f32], legal: &[Action]) -> Result<Vec<f64>> {
    let out = net.forward(&to_f64(features))?;
    Ok(legal.iter().map(|&a| out[a]).collect())
}

/// Average-strategy network queried through a masked softmax.
pub struct NetworkPolicy<'a> {
    pub game: &'a Game,
    pub net: &'a Mlp,
}

impl StrategySource for NetworkPolicy<'_> {
    fn action_probs(&self, id: &InfoSetId, legal: &[Action]) -> Result<Vec<f64>> {
        let features = self.game.encode_infoset(id)?;
        let out = self.net.forward(&to_f64(features.as_slice()))?;
        let mut mask = vec![0.0; out.len()];
        legal.iter().for_each(|&a| mask[a] = 1.0);
        let probs = masked_softmax(&out, &mask);
        Ok(legal.iter().map(|&a| probs[a]).collect())
    }
}

/// One exploitability measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRow {
    pub iteration: u64,
    pub episodes: u64,
    pub exploitability: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunLog {
    pub rows: Vec<LogRow>,
}

/// Final average-strategy network and the measurements along the way.
pub struct DeepRun {
    pub average: Mlp,
    pub log: RunLog,
}

/// Example `k` written into one batch row: features, then targets and mask
/// over the outputs; returns the example weight.
trait Examples {
    fn len(&self) -> usize;
    fn fill(&self, k: usize, input: &mut [f64], target: &mut [f64], mask: &mut [f64]) -> f64;
}

fn copy_features(features: &[f32], input: &mut [f64]) {
    for (x, &f) in input.iter_mut().zip(features) {
        *x = f64::from(f);
    }
}

/// Uniform with-replacement minibatches of `min(batch_size, len)` examples.
fn train<R: Rng>(
    net: &mut Mlp,
    adam: &mut Adam,
    examples: &dyn Examples,
    steps: usize,
    batch_size: usize,
    kind: LossKind,
    rng: &mut R,
) -> Result<f64> {
    let len = examples.len();
    let n = batch_size.min(len);
    let (input, output) = (net.arch().input, net.arch().output);
    let mut loss = 0.0;
    for _ in 0..steps {
        let mut batch = Batch {
            inputs: Array2::zeros((n, input)),
            targets: Array2::zeros((n, output)),
            mask: Array2::zeros((n, output)),
            weights: Array1::zeros(n),
        };
        for b in 0..n {
            let k = rng.random_range(0..len);
            batch.weights[b] = examples.fill(
                k,
                batch.inputs.row_mut(b).into_slice().expect("row"),
                batch.targets.row_mut(b).into_slice().expect("row"),
                batch.mask.row_mut(b).into_slice().expect("row"),
            );
        }
        let (l, grads) = loss_and_gradients(net, &batch, kind)?;
        adam.step(net, &grads)?;
        loss = l;
    }
    Ok(loss)
}

/// Per-infoset rows over the legal actions.
struct InfoRows<'a> {
    info: Vec<&'a InfoSetData>,
    values: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Examples for InfoRows<'_> {
    fn len(&self) -> usize {
        self.info.len()
    }

    fn fill(&self, k: usize, input: &mut [f64], target: &mut [f64], mask: &mut [f64]) -> f64 {
        let info = self.info[k];
        copy_features(&info.features, input);
        for (&a, &y) in info.legal.iter().zip(&self.values[k]) {
            target[a] = y;
            mask[a] = 1.0;
        }
        self.weights[k]
    }
}

/// Transitions with one target on the taken action.
struct ValueRows<'a> {
    transitions: &'a CircularBuffer<TransitionSample>,
    targets: &'a [f64],
}

impl Examples for ValueRows<'_> {
    fn len(&self) -> usize {
        self.targets.len()
    }

    fn fill(&self, k: usize, input: &mut [f64], target: &mut [f64], mask: &mut [f64]) -> f64 {
        let tr = self.transitions.get(k).expect("index within buffer");
        copy_features(&tr.history.features, input);
        target[tr.action] = self.targets[k];
        mask[tr.action] = 1.0;
        1.0
    }
}

/// Networks, buffers and counters of one neural run.
pub struct DeepSolver {
    cfg: RunConfig,
    game: Arc<Game>,
    info_arch: Architecture,
    history_arch: Architecture,
    theta: [Mlp; 2],
    theta_adam: [Adam; 2],
    phi: [Option<(Mlp, Adam)>; 2],
    omega: Mlp,
    omega_adam: Adam,
    /// Completed advantage-network updates per player.
    updates: [u64; 2],
    t: u64,
    interner: Interner,
    advantages: [PerIterationBuffer<AdvantageSample>; 2],
    strategies: ReservoirBuffer<StrategySample>,
    transitions: CircularBuffer<TransitionSample>,
    sigma_cache: [HashMap<usize, Arc<[f64]>>; 2],
    /// Networks as they stood when the current iteration began.
    frozen: Option<Frozen>,
    frozen_cache: HashMap<usize, Arc<[f64]>>,
    q_cache: HashMap<usize, Arc<[f64]>>,
    traverse_rng: ChaCha8Rng,
    buffer_rng: ChaCha8Rng,
    train_rng: ChaCha8Rng,
    init_rng: ChaCha8Rng,
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

impl DeepSolver {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let game = Arc::new(Game::new(cfg.game)?);
        let hp = &cfg.hp;
        let hidden = vec![hp.num_hiddens; hp.num_layers];
        let actions = game.num_distinct_actions();
        let info_arch = Architecture::new(game.infoset_feature_len(), hidden.clone(), actions);
        let history_arch = Architecture::new(game.history_feature_len(), hidden, actions);
        let mut init_rng = stream(cfg.seed, 3);
        let theta = [
            Mlp::new(info_arch.clone(), &mut init_rng),
            Mlp::new(info_arch.clone(), &mut init_rng),
        ];
        let theta_adam = [
            Adam::new(&theta[0], hp.learning_rate),
            Adam::new(&theta[1], hp.learning_rate),
        ];
        let omega = Mlp::new(history_arch.clone(), &mut init_rng);
        let omega_adam = Adam::new(&omega, hp.learning_rate);
        Ok(DeepSolver {
            game,
            info_arch,
            history_arch,
            theta,
            theta_adam,
            phi: [None, None],
            omega,
            omega_adam,
            updates: [0; 2],
            t: 0,
            interner: Interner::new(),
            advantages: [
                PerIterationBuffer::new(hp.advantage_buffer_size),
                PerIterationBuffer::new(hp.advantage_buffer_size),
            ],
            strategies: ReservoirBuffer::new(hp.ave_policy_buffer_size),
            transitions: CircularBuffer::new(hp.history_value_buffer_size),
            sigma_cache: [HashMap::new(), HashMap::new()],
            frozen: None,
            frozen_cache: HashMap::new(),
            q_cache: HashMap::new(),
            traverse_rng: stream(cfg.seed, 0),
            buffer_rng: stream(cfg.seed, 1),
            train_rng: stream(cfg.seed, 2),
            init_rng,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    /// Completed iterations.
    pub fn iteration(&self) -> u64 {
        self.t
    }

    pub fn episodes(&self) -> u64 {
        self.t * self.cfg.episodes_per_iteration()
    }

    pub fn strategy_buffer(&self) -> &ReservoirBuffer<StrategySample> {
        &self.strategies
    }

    pub fn transition_buffer(&self) -> &CircularBuffer<TransitionSample> {
        &self.transitions
    }

    pub fn advantage_buffer(&self, player: usize) -> &PerIterationBuffer<AdvantageSample> {
        &self.advantages[player]
    }

    pub fn value_network(&self) -> &Mlp {
        &self.omega
    }

    pub fn cumulative_network(&self, player: usize) -> &Mlp {
        &self.theta[player]
    }

    /// Strategy the owner of `info` would play now.
    pub fn current_strategy(&self, info: &InfoSetData) -> Result<Vec<f64>> {
        let p = info.id.owner;
        let phi = self.phi[p].as_ref().map(|(net, _)| net);
        self.strategy_of(&self.theta[p], phi, self.updates[p], info)
    }

    fn strategy_of(&self, theta: &Mlp, phi: Option<&Mlp>, updates: u64, info: &InfoSetData) -> Result<Vec<f64>> {
        let r = legal_outputs(theta, &info.features, &info.legal)?;
        let imm = match phi {
            Some(net) if self.cfg.variant.uses_prediction() => Some(legal_outputs(net, &info.features, &info.legal)?),
            _ => None,
        };
        Ok(strategy_from_outputs(
            &r,
            imm.as_deref(),
            updates,
            self.cfg.alpha,
            self.cfg.hp.use_regret_matching_argmax,
        ))
    }

    fn cached_strategy(&mut self, info: &Arc<InfoSetData>) -> Result<Arc<[f64]>> {
        let p = info.id.owner;
        if let Some(s) = self.sigma_cache[p].get(&info.index) {
            return Ok(s.clone());
        }
        let s: Arc<[f64]> = self.current_strategy(info)?.into();
        self.sigma_cache[p].insert(info.index, s.clone());
        Ok(s)
    }

    /// Strategy of the iteration in progress, fixed by the networks that
    /// existed before it started.
    fn iteration_strategy(&mut self, info: &Arc<InfoSetData>) -> Result<Arc<[f64]>> {
        if let Some(s) = self.frozen_cache.get(&info.index) {
            return Ok(s.clone());
        }
        let s: Arc<[f64]> = match &self.frozen {
            Some(f) => {
                let p = info.id.owner;
                self.strategy_of(&f.theta[p], f.phi[p].as_ref(), f.updates[p], info)?.into()
            }
            None => self.current_strategy(info)?.into(),
        };
        self.frozen_cache.insert(info.index, s.clone());
        Ok(s)
    }

    /// Runs one full iteration: for each player collect, then train the
    /// cumulative, instantaneous and value networks.
    pub fn iterate(&mut self) -> Result<()> {
        self.t += 1;
        self.frozen = Some(Frozen {
            theta: self.theta.clone(),
            phi: [0, 1].map(|p| self.phi[p].as_ref().map(|(net, _)| net.clone())),
            updates: self.updates,
        });
        self.frozen_cache.clear();
        for i in 0..2 {
            self.collect(i)?;
            self.train_cumulative(i)?;
            if self.cfg.variant.uses_prediction() {
                self.train_instantaneous(i)?;
            }
            self.updates[i] += 1;
            self.sigma_cache[i].clear();
            if self.cfg.variant.uses_baseline() {
                self.train_value()?;
            }
        }
        Ok(())
    }

    fn collect(&mut self, traverser: usize) -> Result<()> {
        self.advantages[traverser].clear();
        let game = self.game.clone();
        let k = self.cfg.hp.num_traversals;
        let epsilon = self.cfg.hp.epsilon;
        let t = self.t;
        let mut rng = std::mem::replace(&mut self.traverse_rng, stream(0, 0));
        let mut buffer_rng = std::mem::replace(&mut self.buffer_rng, stream(0, 0));
        let mut interner = std::mem::take(&mut self.interner);
        let keep_transitions = self.cfg.variant.uses_baseline();
        let mut advantages = std::mem::replace(&mut self.advantages[traverser], PerIterationBuffer::new(0));
        let mut strategies = std::mem::replace(&mut self.strategies, ReservoirBuffer::new(0));
        let mut transitions = std::mem::replace(&mut self.transitions, CircularBuffer::new(0));
        let result = (|| {
            let mut sink = BufferSink {
                advantages: &mut advantages,
                strategies: &mut strategies,
                transitions: keep_transitions.then_some(&mut transitions),
                rng: &mut buffer_rng,
            };
            let mut model = SolverModel { solver: self };
            for _ in 0..k {
                let mut chooser = RngChooser(&mut rng);
                Traversal {
                    game: &game,
                    interner: &mut interner,
                    model: &mut model,
                    sink: &mut sink,
                    chooser: &mut chooser,
                    epsilon,
                    t,
                }
                .episode(traverser)?;
            }
            Ok(())
        })();
        self.traverse_rng = rng;
        self.buffer_rng = buffer_rng;
        self.interner = interner;
        self.advantages[traverser] = advantages;
        self.strategies = strategies;
        self.transitions = transitions;
        result
    }

    fn train_cumulative(&mut self, i: usize) -> Result<()> {
        let hp = &self.cfg.hp;
        let target_t = self.updates[i] + 1;
        let bootstrap = self.cfg.variant.bootstrap(self.cfg.alpha);
        let frozen = &self.theta[i];
        let mut prev: HashMap<usize, Vec<f64>> = HashMap::new();
        let items = self.advantages[i].items();
        let mut rows = InfoRows {
            info: Vec::with_capacity(items.len()),
            values: Vec::with_capacity(items.len()),
            weights: vec![1.0; items.len()],
        };
        for s in items {
            let carried = match prev.entry(s.info.index) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(legal_outputs(frozen, &s.info.features, &s.info.legal)?),
            };
            let target = make_target_bootstrap_cumulative(carried, &s.advantages, target_t, bootstrap)?;
            rows.info.push(&s.info);
            rows.values.push(target);
        }
        if hp.reinitialize_advantage_networks {
            self.theta[i] = Mlp::new(self.info_arch.clone(), &mut self.init_rng);
            self.theta_adam[i] = Adam::new(&self.theta[i], hp.learning_rate);
        }
        train(
            &mut self.theta[i],
            &mut self.theta_adam[i],
            &rows,
            hp.advantage_network_train_steps,
            hp.advantage_network_batch_size,
            LossKind::BootstrapCumulative,
            &mut self.train_rng,
        )?;
        Ok(())
    }

    fn train_instantaneous(&mut self, i: usize) -> Result<()> {
        let hp = &self.cfg.hp;
        let items = self.advantages[i].items();
        let rows = InfoRows {
            info: items.iter().map(|s| &*s.info).collect(),
            values: items.iter().map(|s| s.advantages.clone()).collect(),
            weights: vec![1.0; items.len()],
        };
        let (mut net, mut adam) = match self.phi[i].take() {
            Some(pair) if !hp.reinitialize_imm_regret_networks => pair,
            _ => {
                let net = Mlp::new(self.info_arch.clone(), &mut self.init_rng);
                let adam = Adam::new(&net, hp.learning_rate);
                (net, adam)
            }
        };
        train(
            &mut net,
            &mut adam,
            &rows,
            hp.advantage_network_train_steps,
            hp.advantage_network_batch_size,
            LossKind::Instantaneous,
            &mut self.train_rng,
        )?;
        self.phi[i] = Some((net, adam));
        Ok(())
    }

    /// One-step targets `u + sum_a' sigma(I', a') Q'(h', a')` for every stored
    /// transition, using a frozen copy of the value network and the latest
    /// strategies.
    pub fn value_targets(&mut self) -> Result<Vec<f64>> {
        let target_net = self.omega.clone();
        let mut successor: HashMap<usize, f64> = HashMap::new();
        let mut targets = Vec::with_capacity(self.transitions.len());
        let items = std::mem::replace(&mut self.transitions, CircularBuffer::new(0));
        let result = (|| {
        for tr in items.iter() {
            let next = match &tr.next {
                Successor::Terminal => None,
                Successor::Decision { history, info, .. } => {
                    let v = match successor.get(&history.index) {
                        Some(&v) => v,
                        None => {
                            let sigma = self.cached_strategy(info)?;
                            let q = legal_outputs(&target_net, &history.features, &history.legal)?;
                            let v = successor_value(&sigma, &q);
                            successor.insert(history.index, v);
                            v
                        }
                    };
                    Some(v)
                }
            };
            targets.push(make_target_q(tr.reward, next));
        }
        Ok(())
        })();
        self.transitions = items;
        result.map(|()| targets)
    }

    fn train_value(&mut self) -> Result<()> {
        let targets = self.value_targets()?;
        let hp = &self.cfg.hp;
        let rows = ValueRows {
            transitions: &self.transitions,
            targets: &targets,
        };
        train(
            &mut self.omega,
            &mut self.omega_adam,
            &rows,
            hp.history_value_network_train_steps,
            hp.history_value_batch_size,
            LossKind::QTd,
            &mut self.train_rng,
        )?;
        self.q_cache.clear();
        Ok(())
    }

    /// Fits a fresh average-strategy network to the strategy buffer with
    /// weights `(t / total)^gamma`.
    pub fn train_average(&self, total: u64) -> Result<Mlp> {
        let hp = &self.cfg.hp;
        let mut rng = stream(self.cfg.seed, 1000 + total);
        let mut net = Mlp::new(self.info_arch.clone(), &mut rng);
        let mut adam = Adam::new(&net, hp.learning_rate);
        let items = self.strategies.items();
        let rows = InfoRows {
            info: items.iter().map(|s| &*s.info).collect(),
            values: items.iter().map(|s| s.strategy.to_vec()).collect(),
            weights: items
                .iter()
                .map(|s| strategy_loss_weight(s.t, total, self.cfg.gamma))
                .collect::<Result<_>>()?,
        };
        train(
            &mut net,
            &mut adam,
            &rows,
            hp.ave_policy_network_train_steps,
            hp.ave_policy_batch_size,
            LossKind::WeightedStrategy,
            &mut rng,
        )?;
        Ok(net)
    }

    pub fn history_architecture(&self) -> &Architecture {
        &self.history_arch
    }
}

struct Frozen {
    theta: [Mlp; 2],
    phi: [Option<Mlp>; 2],
    updates: [u64; 2],
}

/// Read-only view of the solver's networks for one collection phase.
struct SolverModel<'a> {
    solver: &'a mut DeepSolver,
}

impl TraversalModel for SolverModel<'_> {
    fn strategy(&mut self, info: &Arc<InfoSetData>) -> Result<Arc<[f64]>> {
        self.solver.iteration_strategy(info)
    }

    fn baseline(&mut self, history: &Arc<HistoryData>) -> Result<Option<Arc<[f64]>>> {
        if !self.solver.cfg.variant.uses_baseline() {
            return Ok(None);
        }
        if let Some(q) = self.solver.q_cache.get(&history.index) {
            return Ok(Some(q.clone()));
        }
        let q: Arc<[f64]> = legal_outputs(&self.solver.omega, &history.features, &history.legal)?.into();
        self.solver.q_cache.insert(history.index, q.clone());
        Ok(Some(q))
    }
}

struct BufferSink<'a> {
    advantages: &'a mut PerIterationBuffer<AdvantageSample>,
    strategies: &'a mut ReservoirBuffer<StrategySample>,
    transitions: Option<&'a mut CircularBuffer<TransitionSample>>,
    rng: &'a mut ChaCha8Rng,
}

impl SampleSink for BufferSink<'_> {
    fn advantage(&mut self, sample: AdvantageSample) -> Result<()> {
        self.advantages.insert(sample)
    }

    fn strategy(&mut self, sample: StrategySample) -> Result<()> {
        self.strategies.insert(sample, self.rng);
        Ok(())
    }

    fn transition(&mut self, sample: TransitionSample) -> Result<()> {
        if let Some(buf) = self.transitions.as_deref_mut() {
            buf.insert(sample);
        }
        Ok(())
    }
}

/// Runs the configured number of iterations, evaluating a freshly fitted
/// average-strategy network at every scheduled iteration. `on_row` sees each
/// measurement as it is made.
pub fn run(cfg: &RunConfig, mut on_row: impl FnMut(&LogRow)) -> Result<DeepRun> {
    let start = Instant::now();
    let mut solver = DeepSolver::new(cfg)?;
    let evaluator = Evaluator::new(solver.game());
    let schedule = cfg.eval_iterations();
    let mut log = RunLog::default();
    let mut average = None;
    for t in 1..=cfg.hp.num_iterations {
        solver.iterate()?;
        if !schedule.contains(&t) {
            continue;
        }
        let net = solver.train_average(t)?;
        let exploitability = evaluator.exploitability_of(&NetworkPolicy {
            game: solver.game(),
            net: &net,
        })?;
        let row = LogRow {
            iteration: t,
            episodes: solver.episodes(),
            exploitability,
            wall_time_s: if cfg.hp.log_wall_time {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
        };
        on_row(&row);
        log.rows.push(row);
        average = Some(net);
    }
    Ok(DeepRun {
        average: average.expect("final iteration is always evaluated"),
        log,
    })
}
