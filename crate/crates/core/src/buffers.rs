//! Replay storage: per-iteration, reservoir-sampled and circular buffers.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;

use crate::game::{Action, InfoSetId};
use crate::{Error, Result};

/// Everything the learner needs about one information set. Shared between
/// samples so features are encoded once.
#[derive(Debug)]
pub struct InfoSetData {
    /// Dense index, unique within one run.
    pub index: usize,
    pub id: InfoSetId,
    pub features: Vec<f32>,
    pub legal: Vec<Action>,
}

/// A decision history with its encoding.
#[derive(Debug)]
pub struct HistoryData {
    pub index: usize,
    pub actions: Vec<u8>,
    pub player: usize,
    pub features: Vec<f32>,
    pub legal: Vec<Action>,
}

/// Baseline-adjusted sampled advantages over the legal actions of `info`.
#[derive(Clone, Debug)]
pub struct AdvantageSample {
    pub info: Arc<InfoSetData>,
    pub advantages: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct StrategySample {
    pub info: Arc<InfoSetData>,
    pub t: u64,
    /// Probabilities over the legal actions.
    pub strategy: Arc<[f64]>,
}

/// What follows a transition: a terminal, or the next decision history and
/// the infoset of the player acting there.
#[derive(Clone, Debug)]
pub enum Successor {
    Terminal,
    Decision {
        history: Arc<HistoryData>,
        info: Arc<InfoSetData>,
        player: usize,
    },
}

/// One step `(t, h, a, u, h')`; `reward` is player 0's normalized utility
/// at a terminal successor and zero otherwise.
#[derive(Clone, Debug)]
pub struct TransitionSample {
    pub t: u64,
    pub history: Arc<HistoryData>,
    pub action: Action,
    pub reward: f64,
    pub next: Successor,
}

impl TransitionSample {
    pub fn new(t: u64, history: Arc<HistoryData>, action: Action, reward: f64, next: Successor) -> Result<Self> {
        if !matches!(next, Successor::Terminal) && reward != 0.0 {
            return Err(Error::InvalidParameter(
                "non-terminal transitions carry zero reward".into(),
            ));
        }
        Ok(TransitionSample {
            t,
            history,
            action,
            reward,
            next,
        })
    }
}

fn sample_from<'a, T, R: Rng>(items: impl Fn(usize) -> &'a T, len: usize, n: usize, rng: &mut R) -> Result<Vec<&'a T>>
where
    T: 'a,
{
    if len == 0 {
        return Err(Error::EmptyBuffer);
    }
    Ok((0..n).map(|_| items(rng.random_range(0..len))).collect())
}

/// Holds one iteration's samples; errors instead of dropping past capacity.
#[derive(Debug)]
pub struct PerIterationBuffer<T> {
    items: Vec<T>,
    capacity: usize,
}

impl<T> PerIterationBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        PerIterationBuffer {
            items: Vec::new(),
            capacity,
        }
    }

    pub fn insert(&mut self, item: T) -> Result<()> {
        if self.items.len() >= self.capacity {
            return Err(Error::BufferOverflow(self.capacity));
        }
        self.items.push(item);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    /// `n` items drawn uniformly with replacement.
    pub fn sample_batch<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<&T>> {
        sample_from(|k| &self.items[k], self.items.len(), n, rng)
    }
}

/// Fixed-capacity store where each of the `seen` insertions is retained
/// with probability `capacity / seen`.
#[derive(Debug)]
pub struct ReservoirBuffer<T> {
    items: Vec<T>,
    capacity: usize,
    seen: u64,
}

impl<T> ReservoirBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        ReservoirBuffer {
            items: Vec::new(),
            capacity,
            seen: 0,
        }
    }

    pub fn insert<R: Rng>(&mut self, item: T, rng: &mut R) {
        let seen = self.seen;
        self.insert_with(item, |n| rng.random_range(0..n), seen + 1);
    }

    /// Reservoir step where `draw(n)` supplies the uniform index in `0..n`.
    pub fn insert_with(&mut self, item: T, mut draw: impl FnMut(u64) -> u64, count: u64) {
        self.seen = count;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return;
        }
        let k = draw(self.seen);
        if (k as usize) < self.capacity {
            self.items[k as usize] = item;
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn sample_batch<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<&T>> {
        sample_from(|k| &self.items[k], self.items.len(), n, rng)
    }
}

/// Keeps the most recent `capacity` items, oldest first.
#[derive(Debug)]
pub struct CircularBuffer<T> {
    items: VecDeque<T>,
    capacity: usize,
}

impl<T> CircularBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        CircularBuffer {
            items: VecDeque::new(),
            capacity,
        }
    }

    pub fn insert(&mut self, item: T) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    pub fn get(&self, k: usize) -> Option<&T> {
        self.items.get(k)
    }

    pub fn sample_batch<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<&T>> {
        sample_from(|k| &self.items[k], self.items.len(), n, rng)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn reservoir_forced_replacement() {
        let mut buf = ReservoirBuffer::new(2);
        for (n, item) in ["a", "b", "c"].into_iter().enumerate() {
            buf.insert_with(item, |_| 0, n as u64 + 1);
        }
        assert_eq!(buf.items(), &["c", "b"]);
        assert_eq!(buf.seen(), 3);
    }

    #[test]
    fn circular_overwrites_oldest() {
        let mut buf = CircularBuffer::new(2);
        for item in ["a", "b", "c"] {
            buf.insert(item);
        }
        assert_eq!(buf.iter().copied().collect::<Vec<_>>(), vec!["b", "c"]);
        let mut buf = CircularBuffer::new(5);
        for k in 0..23 {
            buf.insert(k);
        }
        assert_eq!(buf.iter().copied().collect::<Vec<_>>(), (18..23).collect::<Vec<_>>());
    }

    #[test]
    fn per_iteration_clear_and_overflow() {
        let mut buf = PerIterationBuffer::new(2);
        buf.insert(1).unwrap();
        buf.insert(2).unwrap();
        assert!(matches!(buf.insert(3), Err(Error::BufferOverflow(2))));
        buf.clear();
        assert_eq!(buf.len(), 0);
    }

    #[test]
    fn batches() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut buf = PerIterationBuffer::new(10);
        assert!(matches!(buf.sample_batch(3, &mut rng), Err(Error::EmptyBuffer)));
        buf.insert('x').unwrap();
        assert_eq!(buf.sample_batch(3, &mut rng).unwrap(), vec![&'x'; 3]);
        let mut buf = CircularBuffer::new(100);
        for k in 0..100 {
            buf.insert(k);
        }
        let a = buf.sample_batch(20, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = buf.sample_batch(20, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(CircularBuffer::<u8>::new(3).sample_batch(1, &mut rng).is_err());
        assert!(ReservoirBuffer::<u8>::new(3).sample_batch(1, &mut rng).is_err());
    }

    #[test]
    fn reservoir_is_uniform() {
        let trials = 200;
        let mut kept = vec![0u32; 10_000];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..trials {
            let mut buf = ReservoirBuffer::new(1000);
            for k in 0..10_000usize {
                buf.insert(k, &mut rng);
            }
            assert_eq!(buf.len(), 1000);
            for &k in buf.items() {
                kept[k] += 1;
            }
        }
        for (k, &c) in kept.iter().enumerate() {
            let rate = c as f64 / trials as f64;
            assert!((rate - 0.1).abs() <= 0.1, "item {k}: {rate}");
        }
        // Averaged over blocks of 100 items the rate is tight around 0.1.
        for block in kept.chunks(100) {
            let rate = block.iter().sum::<u32>() as f64 / (100 * trials) as f64;
            assert!((rate - 0.1).abs() < 0.02, "{rate}");
        }
    }
}
