use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    /// True only for terminal states; time-limit truncation is not terminal.
    pub done: bool,
}

impl Transition {
    pub fn validate(&self) -> Result<()> {
        let finite = self
            .obs
            .iter()
            .chain(&self.action)
            .chain(&self.next_obs)
            .all(|v| v.is_finite());
        if !finite || !self.reward.is_finite() {
            return Err(Error::NonFinite("transition"));
        }
        if self.action.iter().any(|a| a.abs() > 1.0) {
            return Err(Error::Config("transition action outside [-1, 1]".into()));
        }
        Ok(())
    }
}

/// Column-per-sample batch.
#[derive(Debug, Clone)]
pub struct Batch {
    pub obs: DMatrix<f64>,
    pub actions: DMatrix<f64>,
    pub rewards: DVector<f64>,
    pub next_obs: DMatrix<f64>,
    pub dones: DVector<f64>,
}

impl Batch {
    pub fn from_transitions(items: &[&Transition]) -> Self {
        let n = items.len();
        let (od, ad) = items
            .first()
            .map(|t| (t.obs.len(), t.action.len()))
            .unwrap_or((0, 0));
        Self {
            obs: DMatrix::from_fn(od, n, |i, j| items[j].obs[i]),
            actions: DMatrix::from_fn(ad, n, |i, j| items[j].action[i]),
            rewards: DVector::from_fn(n, |j, _| items[j].reward),
            next_obs: DMatrix::from_fn(od, n, |i, j| items[j].next_obs[i]),
            dones: DVector::from_fn(n, |j, _| if items[j].done { 1.0 } else { 0.0 }),
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Stores `t`, evicting the oldest entry when full.
    pub fn store(&mut self, t: Transition) -> Result<()> {
        t.validate()?;
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        Ok(())
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity {
            0
        } else {
            self.next
        };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices(&self, rng: &mut impl Rng, n: usize) -> Result<Vec<usize>> {
        if self.items.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok((0..n)
            .map(|_| rng.random_range(0..self.items.len()))
            .collect())
    }

    pub fn sample_batch(&self, rng: &mut impl Rng, n: usize) -> Result<Batch> {
        let idx = self.sample_indices(rng, n)?;
        let items: Vec<&Transition> = idx.iter().map(|&i| &self.items[i]).collect();
        Ok(Batch::from_transitions(&items))
    }
}
