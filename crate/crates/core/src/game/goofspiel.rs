//! Imperfect-information Goofspiel with a fixed descending point deck.
//!
//! Simultaneous bids are serialized: player 0 bids, then player 1 bids
//! without seeing it. After each round both players learn only whether they
//! won, lost or tied the bid. The final round is forced (one card left each)
//! and is resolved without a decision node. Action `c` bids card value `c + 1`.

use super::{one_hot, Action, Phase, Rules};

const WIN: u8 = 0;
const LOSE: u8 = 1;
const TIE: u8 = 2;

#[derive(Debug)]
pub(crate) struct Goofspiel {
    cards: u8,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct State {
    bids: [Vec<u8>; 2],
}

fn outcome(own: u8, other: u8) -> u8 {
    match own.cmp(&other) {
        std::cmp::Ordering::Greater => WIN,
        std::cmp::Ordering::Less => LOSE,
        std::cmp::Ordering::Equal => TIE,
    }
}

impl Goofspiel {
    pub(crate) fn new(cards: u8) -> Self {
        Goofspiel { cards }
    }

    fn rounds(&self) -> usize {
        self.cards as usize - 1
    }

    fn hand(&self, used: &[u8]) -> Vec<u8> {
        (0..self.cards).filter(|c| !used.contains(c)).collect()
    }

    fn slot_width(&self) -> usize {
        self.cards as usize + 3
    }
}

impl Rules for Goofspiel {
    type State = State;

    fn initial_state(&self) -> State {
        State::default()
    }

    fn phase(&self, s: &State) -> Phase {
        if s.bids[1].len() == self.rounds() {
            Phase::Terminal
        } else if s.bids[0].len() == s.bids[1].len() {
            Phase::Decision(0)
        } else {
            Phase::Decision(1)
        }
    }

    fn legal_actions(&self, s: &State) -> Vec<Action> {
        let p = usize::from(s.bids[0].len() != s.bids[1].len());
        self.hand(&s.bids[p]).into_iter().map(Action::from).collect()
    }

    fn chance_outcomes(&self, _s: &State) -> Vec<(Action, f64)> {
        Vec::new()
    }

    fn apply(&self, s: &mut State, a: Action) {
        let p = usize::from(s.bids[0].len() != s.bids[1].len());
        s.bids[p].push(a as u8);
    }

    fn returns(&self, s: &State) -> [f64; 2] {
        if s.bids[1].len() < self.rounds() {
            return [0.0, 0.0];
        }
        let mut plays = [s.bids[0].clone(), s.bids[1].clone()];
        for p in plays.iter_mut() {
            let last = self.hand(p);
            p.extend(last);
        }
        let mut points = [0i32; 2];
        for (round, (&a, &b)) in plays[0].iter().zip(&plays[1]).enumerate() {
            let value = self.cards as i32 - round as i32;
            match outcome(a, b) {
                WIN => points[0] += value,
                LOSE => points[1] += value,
                _ => {}
            }
        }
        let w = (points[0] - points[1]).signum() as f64;
        [w, -w]
    }

    fn infoset_key(&self, s: &State, player: usize) -> Vec<u8> {
        let completed = s.bids[1].len();
        let mut key = Vec::with_capacity(2 * completed);
        for r in 0..completed {
            let own = s.bids[player][r];
            let other = s.bids[1 - player][r];
            key.push(own);
            key.push(outcome(own, other));
        }
        key
    }

    fn num_distinct_actions(&self) -> usize {
        self.cards as usize
    }

    fn infoset_dim(&self) -> usize {
        2 + self.rounds() * self.slot_width()
    }

    fn history_dim(&self) -> usize {
        2 * self.rounds() * self.cards as usize
    }

    fn encode_infoset(&self, owner: usize, key: &[u8], out: &mut [f32]) -> bool {
        if !key.len().is_multiple_of(2) || key.len() / 2 >= self.rounds() {
            return false;
        }
        let mut seen = Vec::new();
        for pair in key.chunks(2) {
            let (card, result) = (pair[0], pair[1]);
            if card >= self.cards || result > TIE || seen.contains(&card) {
                return false;
            }
            seen.push(card);
        }
        one_hot(out, 0, owner);
        for (r, pair) in key.chunks(2).enumerate() {
            let offset = 2 + r * self.slot_width();
            one_hot(out, offset, pair[0] as usize);
            one_hot(out, offset + self.cards as usize, pair[1] as usize);
        }
        true
    }

    fn encode_history(&self, s: &State, out: &mut [f32]) {
        let x = self.cards as usize;
        for p in 0..2 {
            for (r, &c) in s.bids[p].iter().enumerate().take(self.rounds()) {
                one_hot(out, (2 * r + p) * x, c as usize);
            }
        }
    }

    fn action_label(&self, _s: &State, a: Action) -> String {
        format!("bid {}", a + 1)
    }
}
