//! Two-round limit poker over a six-card deck (J, Q, K in two suits).
//!
//! Cards are indexed `0..6` with rank `card / 2`. Each round allows at most two
//! raises; the raise size is 2 chips in the first round and 4 in the second.
//! Folding is only legal when facing a bet.

use super::{one_hot, Action, Phase, Rules};

pub(crate) const FOLD: Action = 0;
pub(crate) const CALL: Action = 1;
pub(crate) const RAISE: Action = 2;

pub(crate) const NUM_CARDS: u8 = 6;
const MAX_RAISES: u8 = 2;
const MAX_ROUND_ACTIONS: usize = 4;
const NO_CARD: u8 = u8::MAX;
const RAISE_SIZE: [u32; 2] = [2, 4];

#[derive(Debug)]
pub(crate) struct Leduc;

#[derive(Clone, Debug)]
pub(crate) struct State {
    private: [u8; 2],
    dealt: u8,
    public: Option<u8>,
    round: usize,
    round_actions: [Vec<u8>; 2],
    contrib: [u32; 2],
    raises: u8,
    round_over: bool,
    folded: Option<usize>,
}

pub(crate) fn rank(card: u8) -> u8 {
    card / 2
}

/// Showdown result for player 0: `1` win, `-1` loss, `0` tie.
pub(crate) fn showdown(private: [u8; 2], public: u8) -> i32 {
    let strength = |c: u8| {
        if rank(c) == rank(public) {
            10 + rank(c) as i32
        } else {
            rank(c) as i32
        }
    };
    (strength(private[0]) - strength(private[1])).signum()
}

impl State {
    fn to_act(&self) -> usize {
        self.round_actions[self.round].len() % 2
    }

    fn dealt_cards(&self) -> Vec<u8> {
        let mut v = self.private[..self.dealt as usize].to_vec();
        v.extend(self.public);
        v
    }
}

/// Splits an infoset key into `(private, public, round0, round1)`.
pub(crate) fn decode_key(key: &[u8]) -> Option<(u8, Option<u8>, &[u8], &[u8])> {
    let (&private, rest) = key.split_first()?;
    let (&public, rest) = rest.split_first()?;
    let (&n0, rest) = rest.split_first()?;
    if rest.len() < n0 as usize {
        return None;
    }
    let (r0, r1) = rest.split_at(n0 as usize);
    let public = (public != NO_CARD).then_some(public);
    Some((private, public, r0, r1))
}

impl Rules for Leduc {
    type State = State;

    fn initial_state(&self) -> State {
        State {
            private: [0; 2],
            dealt: 0,
            public: None,
            round: 0,
            round_actions: [Vec::new(), Vec::new()],
            contrib: [1, 1],
            raises: 0,
            round_over: false,
            folded: None,
        }
    }

    fn phase(&self, s: &State) -> Phase {
        if s.dealt < 2 {
            Phase::Chance
        } else if s.folded.is_some() || (s.round_over && s.round == 1) {
            Phase::Terminal
        } else if s.round_over {
            Phase::Chance
        } else {
            Phase::Decision(s.to_act())
        }
    }

    fn legal_actions(&self, s: &State) -> Vec<Action> {
        let p = s.to_act();
        let mut v = Vec::with_capacity(3);
        if s.contrib[p] < s.contrib[1 - p] {
            v.push(FOLD);
        }
        v.push(CALL);
        if s.raises < MAX_RAISES {
            v.push(RAISE);
        }
        v
    }

    fn chance_outcomes(&self, s: &State) -> Vec<(Action, f64)> {
        let used = s.dealt_cards();
        let remaining: Vec<Action> = (0..NUM_CARDS)
            .filter(|c| !used.contains(c))
            .map(Action::from)
            .collect();
        let p = 1.0 / remaining.len() as f64;
        remaining.into_iter().map(|c| (c, p)).collect()
    }

    fn apply(&self, s: &mut State, a: Action) {
        if s.dealt < 2 {
            s.private[s.dealt as usize] = a as u8;
            s.dealt += 1;
            return;
        }
        if s.round_over {
            s.public = Some(a as u8);
            s.round = 1;
            s.round_over = false;
            s.raises = 0;
            return;
        }
        let p = s.to_act();
        match a {
            FOLD => s.folded = Some(p),
            CALL => {
                s.contrib[p] = s.contrib[1 - p];
                if s.round_actions[s.round].len() + 1 >= 2 {
                    s.round_over = true;
                }
            }
            _ => {
                s.contrib[p] = s.contrib[1 - p] + RAISE_SIZE[s.round];
                s.raises += 1;
            }
        }
        s.round_actions[s.round].push(a as u8);
    }

    fn returns(&self, s: &State) -> [f64; 2] {
        if let Some(loser) = s.folded {
            let x = s.contrib[loser] as f64;
            return if loser == 0 { [-x, x] } else { [x, -x] };
        }
        let Some(public) = s.public else {
            return [0.0, 0.0];
        };
        let stake = s.contrib[0] as f64;
        let w = showdown(s.private, public) as f64;
        [w * stake, -w * stake]
    }

    fn infoset_key(&self, s: &State, player: usize) -> Vec<u8> {
        let mut key = vec![
            s.private[player],
            s.public.unwrap_or(NO_CARD),
            s.round_actions[0].len() as u8,
        ];
        key.extend_from_slice(&s.round_actions[0]);
        key.extend_from_slice(&s.round_actions[1]);
        key
    }

    fn num_distinct_actions(&self) -> usize {
        3
    }

    fn infoset_dim(&self) -> usize {
        12 + 2 * MAX_ROUND_ACTIONS * 3
    }

    fn history_dim(&self) -> usize {
        18 + 2 * MAX_ROUND_ACTIONS * 3
    }

    fn encode_infoset(&self, owner: usize, key: &[u8], out: &mut [f32]) -> bool {
        let Some((private, public, r0, r1)) = decode_key(key) else {
            return false;
        };
        let valid_round = |r: &[u8], max: usize| r.len() <= max && r.iter().all(|&a| a <= 2);
        let r0_max = if public.is_some() { MAX_ROUND_ACTIONS } else { MAX_ROUND_ACTIONS - 1 };
        if private >= NUM_CARDS || !valid_round(r0, r0_max) || !valid_round(r1, MAX_ROUND_ACTIONS - 1) {
            return false;
        }
        let to_act = if public.is_some() { r1.len() % 2 } else { r0.len() % 2 };
        if to_act != owner || public.is_some_and(|c| c >= NUM_CARDS || c == private) {
            return false;
        }
        if public.is_none() && !r1.is_empty() {
            return false;
        }
        one_hot(out, 0, private as usize);
        if let Some(c) = public {
            one_hot(out, 6, c as usize);
        }
        encode_rounds(out, 12, r0, r1);
        true
    }

    fn encode_history(&self, s: &State, out: &mut [f32]) {
        if s.dealt > 0 {
            one_hot(out, 0, s.private[0] as usize);
        }
        if s.dealt > 1 {
            one_hot(out, 6, s.private[1] as usize);
        }
        if let Some(c) = s.public {
            one_hot(out, 12, c as usize);
        }
        encode_rounds(out, 18, &s.round_actions[0], &s.round_actions[1]);
    }

    fn action_label(&self, s: &State, a: Action) -> String {
        if s.dealt < 2 || s.round_over {
            let ranks = ["J", "Q", "K"];
            let suits = ["s", "h"];
            format!("{}{}", ranks[(a / 2).min(2)], suits[a % 2])
        } else {
            match a {
                FOLD => "fold",
                CALL => "call",
                _ => "raise",
            }
            .into()
        }
    }
}

fn encode_rounds(out: &mut [f32], offset: usize, r0: &[u8], r1: &[u8]) {
    for (k, &a) in r0.iter().take(MAX_ROUND_ACTIONS).enumerate() {
        one_hot(out, offset + 3 * k, a as usize);
    }
    let offset = offset + 3 * MAX_ROUND_ACTIONS;
    for (k, &a) in r1.iter().take(MAX_ROUND_ACTIONS).enumerate() {
        one_hot(out, offset + 3 * k, a as usize);
    }
}
