//! Fixed-capacity per-class instance buffers with the two stream-oblivious
//! update policies: reservoir sampling and first-in-first-out.

use crate::data::Instance;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BufferPolicy {
    Reservoir,
    Fifo,
}

/// One class's buffer. `seen` counts every `update` call, so at decision
/// time it already includes the incoming instance; the reservoir acceptance
/// probability capacity/seen is the textbook rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBuffer {
    capacity: usize,
    items: Vec<Instance>,
    seen: u64,
    policy: BufferPolicy,
}

impl PairBuffer {
    pub fn new(capacity: usize, policy: BufferPolicy) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidInput(
                "buffer capacity must be positive".into(),
            ));
        }
        Ok(PairBuffer {
            capacity,
            items: Vec::with_capacity(capacity),
            seen: 0,
            policy,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn policy(&self) -> BufferPolicy {
        self.policy
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Buffered instances in storage order (FIFO: arrival order; reservoir:
    /// slot order). This is the order the ranker consumes.
    pub fn items(&self) -> &[Instance] {
        &self.items
    }

    /// Offer one instance. Below capacity both policies append. At capacity
    /// the reservoir accepts with probability capacity/seen (one integer
    /// draw) and only then draws the replacement slot; FIFO evicts the
    /// oldest unconditionally.
    pub fn update(&mut self, x: Instance, rng: &mut SplitMix64) {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(x);
            return;
        }
        match self.policy {
            BufferPolicy::Reservoir => {
                if rng.below(self.seen) < self.capacity as u64 {
                    let slot = rng.below(self.capacity as u64) as usize;
                    self.items[slot] = x;
                }
            }
            BufferPolicy::Fifo => {
                self.items.remove(0);
                self.items.push(x);
            }
        }
    }
}
