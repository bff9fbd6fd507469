//! Battleship on two `2 x w` grids with one `1 x 2` ship of value 2 per player.
//!
//! Placement is serialized (player 0 then player 1, each hidden from the
//! other). Players then alternate shots, player 0 first, three shots each,
//! never repeating a cell. The game stops as soon as a ship is sunk.
//! Actions `0..P` are placements; action `P + c` shoots cell `c = row * w + col`.

use super::{one_hot, Action, Phase, Rules};

const SHIP_VALUE: f64 = 2.0;
const SHOTS_PER_PLAYER: usize = 3;
const NOT_PLACED: u8 = u8::MAX;
const OPPONENT_SHOT: u8 = 2;

#[derive(Debug)]
pub(crate) struct Battleship {
    width: u8,
    placements: Vec<[u8; 2]>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct State {
    ships: [Option<u8>; 2],
    shots: Vec<u8>,
}

impl Battleship {
    pub(crate) fn new(width: u8) -> Self {
        let mut placements = Vec::new();
        for r in 0..2 {
            for c in 0..width - 1 {
                placements.push([r * width + c, r * width + c + 1]);
            }
        }
        for c in 0..width {
            placements.push([c, width + c]);
        }
        Battleship { width, placements }
    }

    fn cells(&self) -> usize {
        2 * self.width as usize
    }

    fn total_shots(&self) -> usize {
        2 * SHOTS_PER_PLAYER
    }

    fn shooter(shot_index: usize) -> usize {
        shot_index % 2
    }

    /// Whether the ship owned by `owner` has been sunk.
    fn sunk(&self, s: &State, owner: usize) -> bool {
        let Some(ship) = s.ships[owner] else {
            return false;
        };
        self.placements[ship as usize].iter().all(|cell| {
            s.shots
                .iter()
                .enumerate()
                .any(|(k, c)| Self::shooter(k) != owner && c == cell)
        })
    }

    fn hit(&self, s: &State, shot_index: usize) -> bool {
        let target = 1 - Self::shooter(shot_index);
        s.ships[target]
            .is_some_and(|ship| self.placements[ship as usize].contains(&s.shots[shot_index]))
    }

    fn slot_width(&self) -> usize {
        self.cells() + 1
    }
}

impl Rules for Battleship {
    type State = State;

    fn initial_state(&self) -> State {
        State::default()
    }

    fn phase(&self, s: &State) -> Phase {
        if s.ships[0].is_none() {
            Phase::Decision(0)
        } else if s.ships[1].is_none() {
            Phase::Decision(1)
        } else if self.sunk(s, 0) || self.sunk(s, 1) || s.shots.len() == self.total_shots() {
            Phase::Terminal
        } else {
            Phase::Decision(Self::shooter(s.shots.len()))
        }
    }

    fn legal_actions(&self, s: &State) -> Vec<Action> {
        if s.ships.iter().any(Option::is_none) {
            return (0..self.placements.len()).collect();
        }
        let p = Self::shooter(s.shots.len());
        let fired: Vec<u8> = s.shots.iter().skip(p).step_by(2).copied().collect();
        (0..self.cells() as u8)
            .filter(|c| !fired.contains(c))
            .map(|c| self.placements.len() + c as usize)
            .collect()
    }

    fn chance_outcomes(&self, _s: &State) -> Vec<(Action, f64)> {
        Vec::new()
    }

    fn apply(&self, s: &mut State, a: Action) {
        if s.ships[0].is_none() {
            s.ships[0] = Some(a as u8);
        } else if s.ships[1].is_none() {
            s.ships[1] = Some(a as u8);
        } else {
            s.shots.push((a - self.placements.len()) as u8);
        }
    }

    fn returns(&self, s: &State) -> [f64; 2] {
        let lost = |p| if self.sunk(s, p) { SHIP_VALUE } else { 0.0 };
        let u0 = lost(1) - lost(0);
        [u0, -u0]
    }

    fn infoset_key(&self, s: &State, player: usize) -> Vec<u8> {
        let mut key = vec![s.ships[player].unwrap_or(NOT_PLACED)];
        for (k, &cell) in s.shots.iter().enumerate() {
            key.push(cell);
            key.push(if Self::shooter(k) == player {
                u8::from(self.hit(s, k))
            } else {
                OPPONENT_SHOT
            });
        }
        key
    }

    fn num_distinct_actions(&self) -> usize {
        self.placements.len() + self.cells()
    }

    fn infoset_dim(&self) -> usize {
        2 + self.placements.len() + self.total_shots() * self.slot_width()
    }

    fn history_dim(&self) -> usize {
        2 * self.placements.len() + self.total_shots() * self.cells()
    }

    fn encode_infoset(&self, owner: usize, key: &[u8], out: &mut [f32]) -> bool {
        let Some((&ship, shots)) = key.split_first() else {
            return false;
        };
        let num_placements = self.placements.len();
        if shots.len() % 2 != 0 || shots.len() / 2 >= self.total_shots() {
            return false;
        }
        if ship == NOT_PLACED {
            if !shots.is_empty() {
                return false;
            }
        } else if ship as usize >= num_placements || (shots.len() / 2) % 2 != owner {
            return false;
        }
        for (k, pair) in shots.chunks(2).enumerate() {
            let own = Self::shooter(k) == owner;
            let flag_ok = if own { pair[1] <= 1 } else { pair[1] == OPPONENT_SHOT };
            if pair[0] as usize >= self.cells() || !flag_ok {
                return false;
            }
        }
        one_hot(out, 0, owner);
        if ship != NOT_PLACED {
            one_hot(out, 2, ship as usize);
        }
        let base = 2 + num_placements;
        for (k, pair) in shots.chunks(2).enumerate() {
            let offset = base + k * self.slot_width();
            one_hot(out, offset, pair[0] as usize);
            if pair[1] == 1 {
                out[offset + self.cells()] = 1.0;
            }
        }
        true
    }

    fn encode_history(&self, s: &State, out: &mut [f32]) {
        let n = self.placements.len();
        for (p, ship) in s.ships.iter().enumerate() {
            if let Some(ship) = ship {
                one_hot(out, p * n, *ship as usize);
            }
        }
        for (k, &cell) in s.shots.iter().enumerate() {
            one_hot(out, 2 * n + k * self.cells(), cell as usize);
        }
    }

    fn action_label(&self, _s: &State, a: Action) -> String {
        let n = self.placements.len();
        if a < n {
            let [x, y] = self.placements[a];
            format!("place {x}-{y}")
        } else {
            format!("shoot {}", a - n)
        }
    }
}
