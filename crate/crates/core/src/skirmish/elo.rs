//! ELO rating bookkeeping for policies. Standard expected-score update;
//! zero-sum when both sides share the K-factor.

use std::collections::BTreeMap;

use thiserror::Error;

pub const INITIAL_RATING: f64 = 1200.0;
pub const DEFAULT_K: f64 = 16.0;

#[derive(Debug, Error)]
pub enum EloError {
    #[error("policy `{0}` is not registered")]
    UnknownPolicy(String),
    #[error("score must be 1, 0.5 or 0, got {0}")]
    BadScore(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EloEntry {
    pub rating: f64,
    pub matches: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EloTable {
    pub k_factor: f64,
    entries: BTreeMap<String, EloEntry>,
}

impl EloTable {
    pub fn new(k_factor: f64) -> Self {
        EloTable {
            k_factor,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, policy: &str) {
        self.entries.entry(policy.to_string()).or_insert(EloEntry {
            rating: INITIAL_RATING,
            matches: 0,
        });
    }

    pub fn rating(&self, policy: &str) -> Option<f64> {
        self.entries.get(policy).map(|e| e.rating)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &EloEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Apply one match result: `score_a` is 1 for an A win, 0.5 for a draw,
    /// 0 for a loss.
    pub fn update(&mut self, policy_a: &str, policy_b: &str, score_a: f64) -> Result<(), EloError> {
        if ![1.0, 0.5, 0.0].contains(&score_a) {
            return Err(EloError::BadScore(score_a));
        }
        let ra = self
            .rating(policy_a)
            .ok_or_else(|| EloError::UnknownPolicy(policy_a.to_string()))?;
        let rb = self
            .rating(policy_b)
            .ok_or_else(|| EloError::UnknownPolicy(policy_b.to_string()))?;
        let expected_a = 1.0 / (1.0 + 10f64.powf((rb - ra) / 400.0));
        let delta = self.k_factor * (score_a - expected_a);
        {
            let a = self.entries.get_mut(policy_a).unwrap();
            a.rating = ra + delta;
            a.matches += 1;
        }
        {
            let b = self.entries.get_mut(policy_b).unwrap();
            b.rating = rb - delta;
            b.matches += 1;
        }
        Ok(())
    }
}
