use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::graph::AgentId;

/// A scheduled surfacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pending {
    pub time: f64,
    pub agent: AgentId,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.agent.cmp(&other.agent))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue of surfacings, earliest first, ties broken by agent id.
/// Holds at most one pending event per agent.
#[derive(Debug, Clone)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Pending>>,
    queued: Vec<bool>,
}

impl EventQueue {
    pub fn new(n: usize) -> Self {
        EventQueue {
            heap: BinaryHeap::with_capacity(n),
            queued: vec![false; n],
        }
    }

    /// Schedules `agent` at `time`.
    ///
    /// # Panics
    /// If `agent` already has a pending event.
    pub fn push(&mut self, time: f64, agent: AgentId) {
        let slot = &mut self.queued[agent.index()];
        assert!(!*slot, "agent {agent} already has a pending surfacing");
        *slot = true;
        self.heap.push(Reverse(Pending { time, agent }));
    }

    pub fn pop(&mut self) -> Option<Pending> {
        let Reverse(p) = self.heap.pop()?;
        self.queued[p.agent.index()] = false;
        Some(p)
    }

    pub fn peek(&self) -> Option<&Pending> {
        self.heap.peek().map(|Reverse(p)| p)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_order_then_agent_id() {
        let mut q = EventQueue::new(4);
        q.push(0.5, AgentId::new(3));
        q.push(0.2, AgentId::new(4));
        q.push(0.5, AgentId::new(1));
        q.push(0.5, AgentId::new(2));
        let order: Vec<_> = std::iter::from_fn(|| q.pop())
            .map(|p| p.agent.get())
            .collect();
        assert_eq!(order, vec![4, 1, 2, 3]);
    }

    #[test]
    #[should_panic(expected = "already has a pending")]
    fn one_event_per_agent() {
        let mut q = EventQueue::new(2);
        q.push(1.0, AgentId::new(1));
        q.push(2.0, AgentId::new(1));
    }
}
