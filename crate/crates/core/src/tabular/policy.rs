use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::game::{GameTree, InfoSetId};
use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Behavior strategy for both players: a distribution over the legal
/// actions (canonical order) of each information set. Missing entries are
/// read as uniform.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TabularPolicy {
    rows: HashMap<InfoSetId, Vec<f64>>,
}

impl TabularPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: InfoSetId, probs: Vec<f64>) -> Result<()> {
        let ok = !probs.is_empty()
            && probs.iter().all(|p| p.is_finite() && *p >= 0.0)
            && (probs.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE;
        if !ok {
            return Err(Error::NonFinitePolicy(format!("{id}: {probs:?}")));
        }
        self.rows.insert(id, probs);
        Ok(())
    }

    pub fn get(&self, id: &InfoSetId) -> Option<&[f64]> {
        self.rows.get(id).map(Vec::as_slice)
    }

    /// Distribution at `id`, uniform over `num_actions` when absent.
    pub fn probs(&self, id: &InfoSetId, num_actions: usize) -> Vec<f64> {
        match self.rows.get(id) {
            Some(p) => p.clone(),
            None => vec![1.0 / num_actions as f64; num_actions],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&InfoSetId, &[f64])> {
        self.rows.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Lays the policy out over the tree's flat (infoset, action) slots.
    pub fn to_flat(&self, tree: &GameTree) -> Result<Vec<f64>> {
        let mut flat = vec![0.0; tree.num_slots()];
        for info in tree.infosets() {
            let n = info.actions.len();
            let probs = self.probs(&info.id, n);
            if probs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: probs.len(),
                });
            }
            flat[info.offset..info.offset + n].copy_from_slice(&probs);
        }
        Ok(flat)
    }

    /// Builds a policy from flat slots, one row per infoset of the tree.
    pub fn from_flat(tree: &GameTree, flat: &[f64]) -> Result<Self> {
        let mut policy = TabularPolicy::new();
        for info in tree.infosets() {
            let row = flat[info.offset..info.offset + info.actions.len()].to_vec();
            policy.insert(info.id.clone(), row)?;
        }
        Ok(policy)
    }

    /// One line per infoset, `owner:hexkey<TAB>p1 p2 ...`, sorted by key.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<(String, &Vec<f64>)> =
            self.rows.iter().map(|(k, v)| (k.to_string(), v)).collect();
        lines.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (key, probs) in lines {
            out.push_str(&key);
            out.push('\t');
            for (k, p) in probs.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                write!(out, "{p}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut policy = TabularPolicy::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::InvalidInfoSet(format!("line {}: `{line}`", n + 1));
            let (key, probs) = line.split_once('\t').ok_or_else(bad)?;
            let id: InfoSetId = key.parse()?;
            let probs = probs
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| bad())?;
            policy.insert(id, probs)?;
        }
        Ok(policy)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
