use rand::Rng;

use super::AgentError;
use crate::worldmodel::Transition;

/// Fixed-capacity ring of transitions with proportional prioritized
/// sampling: `P(i) = p_i^α / Σ_j p_j^α`.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    alpha: f64,
    items: Vec<Transition>,
    /// Slot the next push overwrites once the buffer is full.
    head: usize,
    max_priority: f64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, alpha: f64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            alpha,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            head: 0,
            max_priority: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, slot: usize) -> Option<&Transition> {
        self.items.get(slot)
    }

    /// Transitions from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.items.split_at(self.head);
        older.iter().chain(newer.iter())
    }

    fn recompute_max(&mut self) {
        self.max_priority = self.items.iter().map(|t| t.priority).fold(0.0, f64::max);
    }

    /// Appends with the current maximum priority (1.0 when empty), evicting
    /// the oldest entry at capacity. The incoming priority field is ignored.
    pub fn push(&mut self, mut transition: Transition) {
        transition.priority = if self.items.is_empty() { 1.0 } else { self.max_priority };
        if self.items.len() < self.capacity {
            self.items.push(transition);
            self.max_priority = self.max_priority.max(self.items.last().unwrap().priority);
        } else {
            let evicted = std::mem::replace(&mut self.items[self.head], transition);
            self.head = (self.head + 1) % self.capacity;
            if evicted.priority >= self.max_priority {
                self.recompute_max();
            }
        }
    }

    pub fn set_priority(&mut self, slot: usize, priority: f64) {
        assert!(priority.is_finite() && priority >= 0.0, "priority must be finite and non-negative");
        self.items[slot].priority = priority;
        self.recompute_max();
    }

    /// Batch form of [`set_priority`](Self::set_priority).
    pub fn set_priorities(&mut self, slots: &[usize], priorities: &[f64]) {
        for (&s, &p) in slots.iter().zip(priorities) {
            assert!(p.is_finite() && p >= 0.0, "priority must be finite and non-negative");
            self.items[s].priority = p;
        }
        self.recompute_max();
    }

    /// Normalized sampling probabilities. Falls back to uniform when every
    /// weight is zero.
    pub fn probabilities(&self) -> Vec<f64> {
        let weights: Vec<f64> = self.items.iter().map(|t| t.priority.powf(self.alpha)).collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            weights.iter().map(|w| w / total).collect()
        } else {
            vec![1.0 / self.items.len() as f64; self.items.len()]
        }
    }

    /// `k` independent draws with replacement; returns buffer slots.
    /// The buffer must hold at least `k` transitions.
    pub fn sample<R: Rng>(&self, k: usize, rng: &mut R) -> Result<Vec<usize>, AgentError> {
        if self.items.len() < k || self.items.is_empty() {
            return Err(AgentError::InsufficientReplay {
                available: self.items.len(),
                requested: k,
            });
        }
        let mut cumulative = Vec::with_capacity(self.items.len());
        let mut total = 0.0;
        for t in &self.items {
            total += t.priority.powf(self.alpha);
            cumulative.push(total);
        }
        let uniform = total <= 0.0;
        let last = self.items.len() - 1;
        Ok((0..k)
            .map(|_| {
                if uniform {
                    rng.gen_range(0..self.items.len())
                } else {
                    let x = rng.gen::<f64>() * total;
                    cumulative.partition_point(|&c| c <= x).min(last)
                }
            })
            .collect())
    }
}
