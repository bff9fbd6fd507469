//! Three-card poker with one-chip antes and a single one-chip bet.

use super::{one_hot, Action, Phase, Rules};

pub(crate) const PASS: Action = 0;
pub(crate) const BET: Action = 1;
const CARD_NAMES: [&str; 3] = ["J", "Q", "K"];
const MAX_BETS: usize = 3;

#[derive(Debug)]
pub(crate) struct Kuhn;

#[derive(Clone, Debug, Default)]
pub(crate) struct State {
    cards: [u8; 2],
    dealt: u8,
    bets: Vec<u8>,
}

fn is_over(bets: &[u8]) -> bool {
    matches!(bets, [0, 0] | [1, _] | [0, 1, _])
}

impl Rules for Kuhn {
    type State = State;

    fn initial_state(&self) -> State {
        State::default()
    }

    fn phase(&self, s: &State) -> Phase {
        if s.dealt < 2 {
            Phase::Chance
        } else if is_over(&s.bets) {
            Phase::Terminal
        } else {
            Phase::Decision(s.bets.len() % 2)
        }
    }

    fn legal_actions(&self, _s: &State) -> Vec<Action> {
        vec![PASS, BET]
    }

    fn chance_outcomes(&self, s: &State) -> Vec<(Action, f64)> {
        let remaining: Vec<Action> = (0..3u8)
            .filter(|c| !s.cards[..s.dealt as usize].contains(c))
            .map(Action::from)
            .collect();
        let p = 1.0 / remaining.len() as f64;
        remaining.into_iter().map(|c| (c, p)).collect()
    }

    fn apply(&self, s: &mut State, a: Action) {
        if s.dealt < 2 {
            s.cards[s.dealt as usize] = a as u8;
            s.dealt += 1;
        } else {
            s.bets.push(a as u8);
        }
    }

    fn returns(&self, s: &State) -> [f64; 2] {
        let showdown = |stake: f64| {
            if s.cards[0] > s.cards[1] {
                [stake, -stake]
            } else {
                [-stake, stake]
            }
        };
        match s.bets.as_slice() {
            [0, 0] => showdown(1.0),
            [1, 1] | [0, 1, 1] => showdown(2.0),
            [1, 0] => [1.0, -1.0],
            [0, 1, 0] => [-1.0, 1.0],
            _ => [0.0, 0.0],
        }
    }

    fn infoset_key(&self, s: &State, player: usize) -> Vec<u8> {
        let mut key = vec![s.cards[player]];
        key.extend_from_slice(&s.bets);
        key
    }

    fn num_distinct_actions(&self) -> usize {
        2
    }

    fn infoset_dim(&self) -> usize {
        3 + 2 * MAX_BETS
    }

    fn history_dim(&self) -> usize {
        6 + 2 * MAX_BETS
    }

    fn encode_infoset(&self, owner: usize, key: &[u8], out: &mut [f32]) -> bool {
        let Some((&card, bets)) = key.split_first() else {
            return false;
        };
        if card > 2 || bets.len() >= MAX_BETS || bets.iter().any(|&b| b > 1) {
            return false;
        }
        if bets.len() % 2 != owner || is_over(bets) {
            return false;
        }
        one_hot(out, 0, card as usize);
        for (k, &b) in bets.iter().enumerate() {
            one_hot(out, 3 + 2 * k, b as usize);
        }
        true
    }

    fn encode_history(&self, s: &State, out: &mut [f32]) {
        one_hot(out, 0, s.cards[0] as usize);
        one_hot(out, 3, s.cards[1] as usize);
        for (k, &b) in s.bets.iter().enumerate().take(MAX_BETS) {
            one_hot(out, 6 + 2 * k, b as usize);
        }
    }

    fn action_label(&self, s: &State, a: Action) -> String {
        if s.dealt < 2 {
            CARD_NAMES.get(a).unwrap_or(&"?").to_string()
        } else if a == PASS {
            "pass".into()
        } else {
            "bet".into()
        }
    }
}
