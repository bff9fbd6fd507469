//! Extensive-form game abstraction and the eight benchmark games.
//!
//! A [`Game`] is an immutable rules object. A [`History`] is a position in the
//! game tree reached by a sequence of actions (chance outcomes included);
//! navigating produces new histories and never mutates the parent.
//!
//! Players are indexed `0` and `1`. Utilities returned by [`Game::utility`] are
//! raw chip/point units; [`Game::normalize_utility`] maps them into `[-1, 1]`.

mod battleship;
mod goofspiel;
mod kuhn;
pub(crate) mod leduc;
mod liars_dice;
mod tree;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

pub use tree::{Edge, GameTree, InfoSetEntry, NodeKind, TreeNode};

use crate::error::{Error, Result};

/// Index of an action. Chance outcomes and player actions share this type; the
/// meaning depends on the node it is applied at.
pub type Action = usize;

/// Bumped whenever a feature layout changes; stored in network checkpoints.
pub const ENCODING_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameId {
    Kuhn,
    Leduc,
    LiarsDice(u8),
    GoofspielImp(u8),
    Battleship(u8),
}

impl GameId {
    /// All eight benchmark games.
    pub const ALL: [GameId; 8] = [
        GameId::Kuhn,
        GameId::Leduc,
        GameId::LiarsDice(5),
        GameId::LiarsDice(6),
        GameId::GoofspielImp(5),
        GameId::GoofspielImp(6),
        GameId::Battleship(2),
        GameId::Battleship(3),
    ];

    fn validate(self) -> Result<Self> {
        let (game, size, ok) = match self {
            GameId::Kuhn | GameId::Leduc => return Ok(self),
            GameId::LiarsDice(x) => ("liars_dice", x, (5..=6).contains(&x)),
            GameId::GoofspielImp(x) => ("goofspiel_imp", x, (5..=6).contains(&x)),
            GameId::Battleship(x) => ("battleship", x, (2..=3).contains(&x)),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::UnsupportedSize {
                game,
                size: size as u32,
            })
        }
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameId::Kuhn => write!(f, "kuhn"),
            GameId::Leduc => write!(f, "leduc"),
            GameId::LiarsDice(x) => write!(f, "liars_dice:{x}"),
            GameId::GoofspielImp(x) => write!(f, "goofspiel_imp:{x}"),
            GameId::Battleship(x) => write!(f, "battleship:{x}"),
        }
    }
}

impl FromStr for GameId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let size = |p: Option<&str>| -> Result<u8> {
            let p = p.ok_or_else(|| Error::UnknownGame(s.to_string()))?;
            let v: u32 = p.parse().map_err(|_| Error::UnknownGame(s.to_string()))?;
            u8::try_from(v).map_err(|_| Error::UnsupportedSize {
                game: "game",
                size: v,
            })
        };
        let id = match (name, param) {
            ("kuhn", None) => GameId::Kuhn,
            ("leduc", None) => GameId::Leduc,
            ("liars_dice", p) => GameId::LiarsDice(size(p)?),
            ("goofspiel_imp", p) => GameId::GoofspielImp(size(p)?),
            ("battleship", p) => GameId::Battleship(size(p)?),
            _ => return Err(Error::UnknownGame(s.to_string())),
        };
        id.validate()
    }
}

/// Who moves at a history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Chance,
    Decision(usize),
    Terminal,
}

/// Canonical information-set identity: the owner plus a byte string of
/// everything the owner has observed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoSetId {
    pub owner: usize,
    pub key: Box<[u8]>,
}

impl InfoSetId {
    pub fn new(owner: usize, key: impl Into<Box<[u8]>>) -> Self {
        InfoSetId {
            owner,
            key: key.into(),
        }
    }
}

impl fmt::Display for InfoSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.owner, hex::encode(&self.key))
    }
}

impl FromStr for InfoSetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInfoSet(s.to_string());
        let (owner, key) = s.split_once(':').ok_or_else(bad)?;
        let owner: usize = owner.parse().map_err(|_| bad())?;
        if owner > 1 {
            return Err(bad());
        }
        let key = hex::decode(key).map_err(|_| bad())?;
        Ok(InfoSetId::new(owner, key))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameStats {
    pub num_histories: u64,
    pub num_infosets: u64,
    pub num_terminals: u64,
    pub depth: u64,
    pub max_infoset_size: u64,
}

/// Dense network input. Every entry lies in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(pub Vec<f32>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-game rules. Implementors may assume that actions passed to `apply`
/// have been validated and that phase-specific methods are only called in
/// the matching phase.
pub(crate) trait Rules {
    type State: Clone + fmt::Debug;

    fn initial_state(&self) -> Self::State;
    fn phase(&self, s: &Self::State) -> Phase;
    fn legal_actions(&self, s: &Self::State) -> Vec<Action>;
    fn chance_outcomes(&self, s: &Self::State) -> Vec<(Action, f64)>;
    fn apply(&self, s: &mut Self::State, a: Action);
    fn returns(&self, s: &Self::State) -> [f64; 2];
    fn infoset_key(&self, s: &Self::State, player: usize) -> Vec<u8>;
    fn num_distinct_actions(&self) -> usize;
    fn infoset_dim(&self) -> usize;
    fn history_dim(&self) -> usize;
    /// Writes the encoding of a decoded key into a zeroed buffer. Returns
    /// `false` when the key is malformed.
    fn encode_infoset(&self, owner: usize, key: &[u8], out: &mut [f32]) -> bool;
    fn encode_history(&self, s: &Self::State, out: &mut [f32]);
    fn action_label(&self, s: &Self::State, a: Action) -> String;
}

#[derive(Debug)]
enum AnyRules {
    Kuhn(kuhn::Kuhn),
    Leduc(leduc::Leduc),
    LiarsDice(liars_dice::LiarsDice),
    Goofspiel(goofspiel::Goofspiel),
    Battleship(battleship::Battleship),
}

#[derive(Clone, Debug)]
enum AnyState {
    Kuhn(kuhn::State),
    Leduc(leduc::State),
    LiarsDice(liars_dice::State),
    Goofspiel(goofspiel::State),
    Battleship(battleship::State),
}

macro_rules! with_rules {
    ($game:expr, |$r:ident| $body:expr) => {
        match &$game.rules {
            AnyRules::Kuhn($r) => $body,
            AnyRules::Leduc($r) => $body,
            AnyRules::LiarsDice($r) => $body,
            AnyRules::Goofspiel($r) => $body,
            AnyRules::Battleship($r) => $body,
        }
    };
}

macro_rules! with_state {
    ($game:expr, $hist:expr, |$r:ident, $s:ident| $body:expr) => {
        match (&$game.rules, &$hist.state) {
            (AnyRules::Kuhn($r), AnyState::Kuhn($s)) => $body,
            (AnyRules::Leduc($r), AnyState::Leduc($s)) => $body,
            (AnyRules::LiarsDice($r), AnyState::LiarsDice($s)) => $body,
            (AnyRules::Goofspiel($r), AnyState::Goofspiel($s)) => $body,
            (AnyRules::Battleship($r), AnyState::Battleship($s)) => $body,
            _ => panic!("{}", Error::ForeignHistory($game.id)),
        }
    };
}

/// A position in the game tree.
#[derive(Clone, Debug)]
pub struct History {
    actions: Vec<u8>,
    phase: Phase,
    state: AnyState,
}

impl History {
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_terminal(&self) -> bool {
        self.phase == Phase::Terminal
    }

    pub fn is_chance(&self) -> bool {
        self.phase == Phase::Chance
    }

    /// The acting player at a decision node.
    pub fn current_player(&self) -> Option<usize> {
        match self.phase {
            Phase::Decision(p) => Some(p),
            _ => None,
        }
    }

    /// Actions from the root, chance outcomes included.
    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.actions.iter().map(|&a| a as Action)
    }

    /// Compact byte form of the action sequence; unique within a game.
    pub fn action_bytes(&self) -> &[u8] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

impl PartialEq for History {
    fn eq(&self, other: &Self) -> bool {
        self.actions == other.actions
    }
}

impl Eq for History {}

impl std::hash::Hash for History {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.actions.hash(state);
    }
}

/// Immutable rules object for one benchmark game.
#[derive(Debug)]
pub struct Game {
    id: GameId,
    rules: AnyRules,
    max_abs_utility: OnceLock<f64>,
}

impl Game {
    pub fn new(id: GameId) -> Result<Game> {
        let id = id.validate()?;
        let rules = match id {
            GameId::Kuhn => AnyRules::Kuhn(kuhn::Kuhn),
            GameId::Leduc => AnyRules::Leduc(leduc::Leduc),
            GameId::LiarsDice(x) => AnyRules::LiarsDice(liars_dice::LiarsDice::new(x)),
            GameId::GoofspielImp(x) => AnyRules::Goofspiel(goofspiel::Goofspiel::new(x)),
            GameId::Battleship(x) => AnyRules::Battleship(battleship::Battleship::new(x)),
        };
        Ok(Game {
            id,
            rules,
            max_abs_utility: OnceLock::new(),
        })
    }

    /// Parses the selection grammar `kuhn | leduc | liars_dice:<x> |
    /// goofspiel_imp:<x> | battleship:<x>` and builds the game.
    pub fn from_name(name: &str) -> Result<Game> {
        Game::new(name.parse()?)
    }

    pub fn id(&self) -> GameId {
        self.id
    }

    pub fn root(&self) -> History {
        let state = match &self.rules {
            AnyRules::Kuhn(r) => AnyState::Kuhn(r.initial_state()),
            AnyRules::Leduc(r) => AnyState::Leduc(r.initial_state()),
            AnyRules::LiarsDice(r) => AnyState::LiarsDice(r.initial_state()),
            AnyRules::Goofspiel(r) => AnyState::Goofspiel(r.initial_state()),
            AnyRules::Battleship(r) => AnyState::Battleship(r.initial_state()),
        };
        let mut h = History {
            actions: Vec::new(),
            phase: Phase::Terminal,
            state,
        };
        h.phase = with_state!(self, h, |r, s| r.phase(s));
        h
    }

    /// Legal actions at a decision node, or the outcome actions at a chance
    /// node, in canonical order.
    pub fn legal_actions(&self, h: &History) -> Result<Vec<Action>> {
        match h.phase {
            Phase::Terminal => Err(Error::TerminalHistory),
            Phase::Chance => Ok(with_state!(self, h, |r, s| r
                .chance_outcomes(s)
                .into_iter()
                .map(|(a, _)| a)
                .collect())),
            Phase::Decision(_) => Ok(with_state!(self, h, |r, s| r.legal_actions(s))),
        }
    }

    pub fn chance_outcomes(&self, h: &History) -> Result<Vec<(Action, f64)>> {
        match h.phase {
            Phase::Chance => Ok(with_state!(self, h, |r, s| r.chance_outcomes(s))),
            _ => Err(Error::NotChanceNode),
        }
    }

    pub fn apply_action(&self, h: &History, a: Action) -> Result<History> {
        if !self.legal_actions(h)?.contains(&a) {
            return Err(Error::IllegalAction { action: a });
        }
        Ok(self.apply_unchecked(h, a))
    }

    /// Applies an action already known to be legal.
    pub fn apply_unchecked(&self, h: &History, a: Action) -> History {
        let mut child = h.clone();
        match (&self.rules, &mut child.state) {
            (AnyRules::Kuhn(r), AnyState::Kuhn(s)) => r.apply(s, a),
            (AnyRules::Leduc(r), AnyState::Leduc(s)) => r.apply(s, a),
            (AnyRules::LiarsDice(r), AnyState::LiarsDice(s)) => r.apply(s, a),
            (AnyRules::Goofspiel(r), AnyState::Goofspiel(s)) => r.apply(s, a),
            (AnyRules::Battleship(r), AnyState::Battleship(s)) => r.apply(s, a),
            _ => panic!("{}", Error::ForeignHistory(self.id)),
        }
        child.actions.push(a as u8);
        child.phase = with_state!(self, child, |r, s| r.phase(s));
        child
    }

    /// Raw utility of player `i` at a terminal history.
    pub fn utility(&self, z: &History, i: usize) -> Result<f64> {
        if !z.is_terminal() {
            return Err(Error::NonTerminalHistory);
        }
        Ok(with_state!(self, z, |r, s| r.returns(s))[i])
    }

    /// Largest absolute terminal utility, found by enumeration and cached.
    pub fn max_abs_utility(&self) -> f64 {
        *self.max_abs_utility.get_or_init(|| {
            let mut max = 0.0f64;
            self.walk(&self.root(), &mut |g, h| {
                if h.is_terminal() {
                    let u = with_state!(g, h, |r, s| r.returns(s));
                    max = max.max(u[0].abs()).max(u[1].abs());
                }
            });
            max
        })
    }

    /// Maps a raw utility into `[-1, 1]`.
    pub fn normalize_utility(&self, u: f64) -> f64 {
        let m = self.max_abs_utility();
        if m == 0.0 {
            0.0
        } else {
            u / m
        }
    }

    /// Normalized utility of player `i` at a terminal history.
    pub fn normalized_utility(&self, z: &History, i: usize) -> Result<f64> {
        Ok(self.normalize_utility(self.utility(z, i)?))
    }

    pub fn infoset_key(&self, h: &History, i: usize) -> Result<InfoSetId> {
        match h.phase {
            Phase::Decision(p) if p == i => Ok(InfoSetId::new(
                i,
                with_state!(self, h, |r, s| r.infoset_key(s, i)),
            )),
            Phase::Chance => Err(Error::ChanceNode),
            Phase::Terminal => Err(Error::TerminalHistory),
            Phase::Decision(_) => Err(Error::NotPlayerNode(i)),
        }
    }

    /// Information set of the acting player.
    pub fn current_infoset(&self, h: &History) -> Result<InfoSetId> {
        match h.phase {
            Phase::Decision(p) => self.infoset_key(h, p),
            Phase::Chance => Err(Error::ChanceNode),
            Phase::Terminal => Err(Error::TerminalHistory),
        }
    }

    /// Size of the shared action space; network heads have this many outputs.
    pub fn num_distinct_actions(&self) -> usize {
        with_rules!(self, |r| r.num_distinct_actions())
    }

    pub fn infoset_feature_len(&self) -> usize {
        with_rules!(self, |r| r.infoset_dim())
    }

    pub fn history_feature_len(&self) -> usize {
        with_rules!(self, |r| r.history_dim())
    }

    pub fn encode_infoset(&self, id: &InfoSetId) -> Result<FeatureVector> {
        let mut out = vec![0.0f32; self.infoset_feature_len()];
        let ok = id.owner <= 1 && with_rules!(self, |r| r.encode_infoset(id.owner, &id.key, &mut out));
        if ok {
            Ok(FeatureVector(out))
        } else {
            Err(Error::InvalidInfoSet(id.to_string()))
        }
    }

    /// Full-state encoding used as input to the history value network.
    pub fn encode_history(&self, h: &History) -> Result<FeatureVector> {
        if h.is_chance() {
            return Err(Error::ChanceNode);
        }
        let mut out = vec![0.0f32; self.history_feature_len()];
        with_state!(self, h, |r, s| r.encode_history(s, &mut out));
        Ok(FeatureVector(out))
    }

    pub fn action_label(&self, h: &History, a: Action) -> String {
        with_state!(self, h, |r, s| r.action_label(s, a))
    }

    /// Replays an action sequence from the root, validating each step.
    pub fn replay(&self, actions: impl IntoIterator<Item = Action>) -> Result<History> {
        let mut h = self.root();
        for a in actions {
            h = self.apply_action(&h, a)?;
        }
        Ok(h)
    }

    /// Depth-first pre-order visit of every history below `h`.
    pub fn walk(&self, h: &History, visit: &mut dyn FnMut(&Game, &History)) {
        visit(self, h);
        if h.is_terminal() {
            return;
        }
        let actions = match h.phase {
            Phase::Chance => with_state!(self, h, |r, s| r
                .chance_outcomes(s)
                .into_iter()
                .map(|(a, _)| a)
                .collect::<Vec<_>>()),
            _ => with_state!(self, h, |r, s| r.legal_actions(s)),
        };
        for a in actions {
            let child = self.apply_unchecked(h, a);
            self.walk(&child, visit);
        }
    }

    /// Exact size counts by full depth-first enumeration. Depth counts the
    /// nodes on the longest root-to-leaf path.
    pub fn enumerate_stats(&self) -> GameStats {
        let mut histories = 0u64;
        let mut terminals = 0u64;
        let mut depth = 0u64;
        let mut infosets: HashMap<InfoSetId, u64> = HashMap::new();
        self.walk(&self.root(), &mut |g, h| {
            histories += 1;
            depth = depth.max(h.len() as u64 + 1);
            match h.phase {
                Phase::Terminal => terminals += 1,
                Phase::Decision(p) => {
                    let key = InfoSetId::new(p, with_state!(g, h, |r, s| r.infoset_key(s, p)));
                    *infosets.entry(key).or_default() += 1;
                }
                Phase::Chance => {}
            }
        });
        GameStats {
            num_histories: histories,
            num_infosets: infosets.len() as u64,
            num_terminals: terminals,
            depth,
            max_infoset_size: infosets.values().copied().max().unwrap_or(0),
        }
    }
}

fn one_hot(out: &mut [f32], offset: usize, index: usize) {
    out[offset + index] = 1.0;
}
