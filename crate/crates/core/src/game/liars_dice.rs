//! One `x`-sided die per player; bids `p-q` claim at least `p` dice show `q`.
//! The highest face is wild. Bid `b` means quantity `b / x + 1`, face
//! `b % x + 1`; action `2x` calls "liar".

use super::{one_hot, Action, Phase, Rules};

#[derive(Debug)]
pub(crate) struct LiarsDice {
    sides: u8,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct State {
    dice: [u8; 2],
    dealt: u8,
    bids: Vec<u8>,
    called: bool,
}

impl LiarsDice {
    pub(crate) fn new(sides: u8) -> Self {
        LiarsDice { sides }
    }

    fn num_bids(&self) -> usize {
        2 * self.sides as usize
    }

    fn liar(&self) -> Action {
        self.num_bids()
    }

    fn bid_is_true(&self, dice: [u8; 2], bid: u8) -> bool {
        let x = self.sides;
        let quantity = bid / x + 1;
        let face = bid % x;
        let count = dice.iter().filter(|&&d| d == face || d == x - 1).count() as u8;
        count >= quantity
    }
}

impl Rules for LiarsDice {
    type State = State;

    fn initial_state(&self) -> State {
        State::default()
    }

    fn phase(&self, s: &State) -> Phase {
        if s.dealt < 2 {
            Phase::Chance
        } else if s.called {
            Phase::Terminal
        } else {
            Phase::Decision(s.bids.len() % 2)
        }
    }

    fn legal_actions(&self, s: &State) -> Vec<Action> {
        let first = s.bids.last().map_or(0, |&b| b as usize + 1);
        let mut v: Vec<Action> = (first..self.num_bids()).collect();
        if !s.bids.is_empty() {
            v.push(self.liar());
        }
        v
    }

    fn chance_outcomes(&self, _s: &State) -> Vec<(Action, f64)> {
        let p = 1.0 / self.sides as f64;
        (0..self.sides as Action).map(|d| (d, p)).collect()
    }

    fn apply(&self, s: &mut State, a: Action) {
        if s.dealt < 2 {
            s.dice[s.dealt as usize] = a as u8;
            s.dealt += 1;
        } else if a == self.liar() {
            s.called = true;
        } else {
            s.bids.push(a as u8);
        }
    }

    fn returns(&self, s: &State) -> [f64; 2] {
        let Some(&last) = s.bids.last() else {
            return [0.0, 0.0];
        };
        if !s.called {
            return [0.0, 0.0];
        }
        let caller = s.bids.len() % 2;
        let caller_wins = !self.bid_is_true(s.dice, last);
        let caller_u = if caller_wins { 1.0 } else { -1.0 };
        if caller == 0 {
            [caller_u, -caller_u]
        } else {
            [-caller_u, caller_u]
        }
    }

    fn infoset_key(&self, s: &State, player: usize) -> Vec<u8> {
        let mut key = vec![s.dice[player]];
        key.extend_from_slice(&s.bids);
        key
    }

    fn num_distinct_actions(&self) -> usize {
        self.num_bids() + 1
    }

    fn infoset_dim(&self) -> usize {
        let n = self.num_bids();
        self.sides as usize + n * n
    }

    fn history_dim(&self) -> usize {
        let n = self.num_bids();
        2 * self.sides as usize + n * n
    }

    fn encode_infoset(&self, owner: usize, key: &[u8], out: &mut [f32]) -> bool {
        let Some((&die, bids)) = key.split_first() else {
            return false;
        };
        let n = self.num_bids();
        let increasing = bids.windows(2).all(|w| w[0] < w[1]);
        if die >= self.sides || bids.len() > n || bids.len() % 2 != owner || !increasing {
            return false;
        }
        if bids.iter().any(|&b| b as usize >= n) {
            return false;
        }
        one_hot(out, 0, die as usize);
        for (k, &b) in bids.iter().enumerate() {
            one_hot(out, self.sides as usize + k * n, b as usize);
        }
        true
    }

    fn encode_history(&self, s: &State, out: &mut [f32]) {
        let x = self.sides as usize;
        let n = self.num_bids();
        for p in 0..s.dealt as usize {
            one_hot(out, p * x, s.dice[p] as usize);
        }
        for (k, &b) in s.bids.iter().enumerate() {
            one_hot(out, 2 * x + k * n, b as usize);
        }
    }

    fn action_label(&self, s: &State, a: Action) -> String {
        if s.dealt < 2 {
            format!("roll {}", a + 1)
        } else if a == self.liar() {
            "liar".into()
        } else {
            let x = self.sides as usize;
            format!("{}-{}", a / x + 1, a % x + 1)
        }
    }
}
