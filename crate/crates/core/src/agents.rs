//! Threshold-based Leduc opponents and a seat-alternating match runner.
//!
//! Every style looks only at its showdown win rate against a uniformly random
//! opponent hand and board, then raises, calls or folds by fixed thresholds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exploitability::{expected_value_flat, extract_policy, StrategySource};
use crate::game::leduc::{decode_key, showdown, NUM_CARDS};
use crate::game::{Action, Game, GameId, GameTree, InfoSetId};
use crate::traversal::sample_index;
use crate::{Error, Result};

const FOLD: Action = 0;
const CALL: Action = 1;
const RAISE: Action = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentStyle {
    CandidStatistician,
    LooseAggressive,
    LoosePassive,
    TightPassive,
    TightAggressive,
}

/// Decision constants of one style.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub raise_above: f64,
    pub fold_below: f64,
    pub bluff_prob: f64,
}

impl AgentStyle {
    pub const ALL: [AgentStyle; 5] = [
        AgentStyle::CandidStatistician,
        AgentStyle::LooseAggressive,
        AgentStyle::LoosePassive,
        AgentStyle::TightPassive,
        AgentStyle::TightAggressive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentStyle::CandidStatistician => "candid_statistician",
            AgentStyle::LooseAggressive => "loose_aggressive",
            AgentStyle::LoosePassive => "loose_passive",
            AgentStyle::TightPassive => "tight_passive",
            AgentStyle::TightAggressive => "tight_aggressive",
        }
    }

    pub fn thresholds(self) -> Thresholds {
        let (raise_above, fold_below, bluff_prob) = match self {
            AgentStyle::CandidStatistician => (0.6, 0.3, 0.0),
            AgentStyle::LooseAggressive => (0.1, 0.0, 0.0),
            // Above any win rate, so these never raise.
            AgentStyle::LoosePassive => (1.01, 0.2, 0.0),
            AgentStyle::TightPassive => (1.01, 0.5, 0.0),
            AgentStyle::TightAggressive => (0.65, 0.45, 0.1),
        };
        Thresholds {
            raise_above,
            fold_below,
            bluff_prob,
        }
    }

    /// Action distribution over `legal` for a hand with the given win rate.
    pub fn decide(self, win_rate: f64, legal: &[Action]) -> Vec<f64> {
        let th = self.thresholds();
        let mut probs = vec![0.0; legal.len()];
        let idx = |a: Action| legal.iter().position(|&x| x == a);
        let passive = idx(FOLD).or(idx(CALL)).expect("call is always legal");
        let call = idx(CALL).expect("call is always legal");
        let aggressive = idx(RAISE).unwrap_or(call);
        if win_rate >= th.raise_above {
            probs[aggressive] = 1.0;
        } else if win_rate <= th.fold_below {
            probs[passive] += 1.0 - th.bluff_prob;
            probs[aggressive] += th.bluff_prob;
        } else {
            probs[call] = 1.0;
        }
        probs
    }
}

impl fmt::Display for AgentStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgentStyle::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown agent style {s}")))
    }
}

/// Probability of winning a showdown from `id`, with the opponent's card and
/// any undealt board card drawn uniformly from the remaining deck. Ties count
/// one half.
pub fn win_rate(game: &Game, id: &InfoSetId) -> Result<f64> {
    if game.id() != GameId::Leduc {
        return Err(Error::InvalidParameter("win rates are defined for Leduc only".into()));
    }
    let (own, board, _, _) = decode_key(&id.key).ok_or_else(|| Error::InvalidInfoSet(id.to_string()))?;
    if own >= NUM_CARDS || board.is_some_and(|b| b >= NUM_CARDS || b == own) {
        return Err(Error::InvalidInfoSet(id.to_string()));
    }
    let (mut total, mut count) = (0.0, 0u32);
    for opp in (0..NUM_CARDS).filter(|&c| c != own && Some(c) != board) {
        let boards: Vec<u8> = match board {
            Some(b) => vec![b],
            None => (0..NUM_CARDS).filter(|&c| c != own && c != opp).collect(),
        };
        for b in boards {
            total += match showdown([own, opp], b) {
                1 => 1.0,
                0 => 0.5,
                _ => 0.0,
            };
            count += 1;
        }
    }
    Ok(total / f64::from(count))
}

/// A rule agent bound to a game, usable wherever a strategy is expected.
pub struct RuleAgent<'a> {
    pub game: &'a Game,
    pub style: AgentStyle,
}

impl StrategySource for RuleAgent<'_> {
    fn action_probs(&self, id: &InfoSetId, legal: &[Action]) -> Result<Vec<f64>> {
        Ok(self.style.decide(win_rate(self.game, id)?, legal))
    }
}

/// Samples the agent's action at `id`.
pub fn act<R: Rng>(game: &Game, style: AgentStyle, id: &InfoSetId, legal: &[Action], rng: &mut R) -> Result<Action> {
    let probs = style.decide(win_rate(game, id)?, legal);
    Ok(legal[sample_index(&probs, rng.random::<f64>())])
}

/// Mean normalized reward per hand with a 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchResult {
    pub mean: f64,
    pub half_width: f64,
    pub matches: u64,
}

/// Plays `n` hands, `a` in seat 0 on even hands and seat 1 on odd ones.
pub fn head2head(
    game: &Game,
    a: &dyn StrategySource,
    b: &dyn StrategySource,
    n: u64,
    seed: u64,
) -> Result<MatchResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("at least one match is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    for k in 0..n {
        let seat = (k % 2) as usize;
        let mut h = game.root();
        while !h.is_terminal() {
            let next = if h.is_chance() {
                let outcomes = game.chance_outcomes(&h)?;
                let probs: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
                outcomes[sample_index(&probs, rng.random::<f64>())].0
            } else {
                let legal = game.legal_actions(&h)?;
                let id = game.current_infoset(&h)?;
                let who = if id.owner == seat { a } else { b };
                let probs = who.action_probs(&id, &legal)?;
                legal[sample_index(&probs, rng.random::<f64>())]
            };
            h = game.apply_unchecked(&h, next);
        }
        let r = game.normalized_utility(&h, seat)?;
        sum += r;
        sq += r * r;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MatchResult {
        mean,
        half_width: 1.96 * var.sqrt() / nf.sqrt(),
        matches: n,
    })
}

/// Exact seat-averaged value of `a` against `b`, the limit of [`head2head`].
pub fn match_value(game: &Game, a: &dyn StrategySource, b: &dyn StrategySource) -> Result<f64> {
    let tree = GameTree::build(game);
    let fa = extract_policy(&tree, a)?.to_flat(&tree)?;
    let fb = extract_policy(&tree, b)?.to_flat(&tree)?;
    let mut total = 0.0;
    for seat in 0..2 {
        let mut mixed = fb.clone();
        for info in tree.infosets().iter().filter(|i| i.id.owner == seat) {
            let r = info.offset..info.offset + info.actions.len();
            mixed[r.clone()].copy_from_slice(&fa[r]);
        }
        total += expected_value_flat(&tree, &mixed, seat);
    }
    Ok(total / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exploitability::Uniform;
    use crate::tabular::{Variant, TabularSolver};

    fn leduc() -> Game {
        Game::new(GameId::Leduc).unwrap()
    }

    /// Key of player 0's first decision holding `card` with no actions yet.
    fn preflop(card: u8) -> InfoSetId {
        let game = leduc();
        let other = if card == 0 { 1 } else { 0 };
        game.current_infoset(&game.replay([card as Action, other]).unwrap()).unwrap()
    }

    #[test]
    fn win_rate_examples() {
        let game = leduc();
        // King pre-flop: opponent J J Q Q K, then a board from the four left.
        let mut expected = 0.0;
        for opp in [0u8, 1, 2, 3, 5] {
            for b in (0..6).filter(|&c| c != 4 && c != opp) {
                expected += match showdown([4, opp], b) {
                    1 => 1.0,
                    0 => 0.5,
                    _ => 0.0,
                };
            }
        }
        assert_eq!(win_rate(&game, &preflop(4)).unwrap(), expected / 20.0);
        // Jack with a king on board.
        let h = game.replay([0, 2, 1, 1, 5]).unwrap();
        let w = win_rate(&game, &game.current_infoset(&h).unwrap()).unwrap();
        assert!(w < 0.5, "{w}");
        assert!(win_rate(&Game::new(GameId::Kuhn).unwrap(), &preflop(0)).is_err());
    }

    #[test]
    fn pairs_always_win_and_rates_are_probabilities() {
        let game = leduc();
        let tree = GameTree::build(&game);
        for info in tree.infosets() {
            let w = win_rate(&game, &info.id).unwrap();
            assert!((0.0..=1.0).contains(&w));
            let (own, board, _, _) = decode_key(&info.id.key).unwrap();
            if board.is_some_and(|b| b / 2 == own / 2) {
                assert_eq!(w, 1.0, "{}", info.id);
            }
        }
    }

    #[test]
    fn style_rules() {
        let legal = [FOLD, CALL, RAISE];
        for w in [0.0, 0.3, 0.7, 1.0] {
            assert_eq!(AgentStyle::LoosePassive.decide(w, &legal)[2], 0.0);
        }
        assert_eq!(AgentStyle::TightAggressive.decide(0.9, &legal), vec![0.0, 0.0, 1.0]);
        assert_eq!(AgentStyle::TightAggressive.decide(0.2, &legal), vec![0.9, 0.0, 0.1]);
        assert_eq!(AgentStyle::LooseAggressive.decide(0.1, &legal), vec![0.0, 0.0, 1.0]);
        assert_eq!(AgentStyle::CandidStatistician.decide(0.5, &legal), vec![0.0, 1.0, 0.0]);
        // Checking is free, so weak hands check instead of folding.
        assert_eq!(AgentStyle::TightPassive.decide(0.1, &[CALL, RAISE]), vec![1.0, 0.0]);
        // No raise left: strong hands call.
        assert_eq!(AgentStyle::CandidStatistician.decide(0.9, &[FOLD, CALL]), vec![0.0, 1.0]);
        for s in AgentStyle::ALL {
            let th = s.thresholds();
            assert!(th.fold_below <= th.raise_above);
            assert_eq!(s.name().parse::<AgentStyle>().unwrap(), s);
        }
        let game = leduc();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = act(&game, AgentStyle::LooseAggressive, &preflop(4), &[CALL, RAISE], &mut rng).unwrap();
        assert_eq!(a, RAISE);
    }

    struct Always(Action);

    impl StrategySource for Always {
        fn action_probs(&self, _id: &InfoSetId, legal: &[Action]) -> Result<Vec<f64>> {
            let k = legal.iter().position(|&a| a == self.0).unwrap_or(0);
            Ok((0..legal.len()).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        }
    }

    #[test]
    fn match_sanity() {
        let game = leduc();
        assert!(head2head(&game, &Uniform, &Uniform, 0, 0).is_err());
        let r = head2head(&game, &Uniform, &Uniform, 20_000, 1).unwrap();
        assert!(r.mean.abs() < 3.0 * r.half_width, "{r:?}");
        // Folding is only legal facing a bet, so the folder checks when it can.
        let r = head2head(&game, &Always(FOLD), &Always(RAISE), 2_000, 2).unwrap();
        assert!(r.mean < 0.0);
        assert!((r.mean - match_value(&game, &Always(FOLD), &Always(RAISE)).unwrap()).abs() < 1e-12);
        assert_eq!(match_value(&game, &Always(FOLD), &Always(CALL)).unwrap(), 0.0);
        let ab = head2head(&game, &Always(RAISE), &Uniform, 20_000, 3).unwrap();
        let ba = head2head(&game, &Uniform, &Always(RAISE), 20_000, 4).unwrap();
        assert!((ab.mean + ba.mean).abs() < 3.0 * (ab.half_width + ba.half_width));
    }

    #[test]
    fn cfr_plus_beats_every_style() {
        let game = leduc();
        let mut solver = TabularSolver::new(&game, Variant::CfrPlus.rule()).unwrap();
        for _ in 0..1000 {
            solver.iterate().unwrap();
        }
        let policy = solver.average_policy().unwrap();
        assert!(match_value(&game, &policy, &policy).unwrap().abs() < 1e-12);
        for style in AgentStyle::ALL {
            let agent = RuleAgent { game: &game, style };
            let v = match_value(&game, &policy, &agent).unwrap();
            assert!(v > 0.0, "{style}: {v}");
            let r = head2head(&game, &policy, &agent, 20_000, 11).unwrap();
            assert!((r.mean - v).abs() < 3.0 * r.half_width, "{style}: {r:?} vs {v}");
        }
    }
}
