use std::collections::VecDeque;

use super::QubitSlot;

/// A released qubit waiting to be recycled, with the depth at which it was
/// freed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolEntry {
    pub slot: QubitSlot,
    pub post_dep: u64,
}

/// Released qubits in release order.
#[derive(Debug, Clone, Default)]
pub struct ReusePool {
    entries: VecDeque<PoolEntry>,
}

impl ReusePool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: PoolEntry) {
        self.entries.push_back(entry);
    }

    pub fn iter(&self) -> impl Iterator<Item = &PoolEntry> + '_ {
        self.entries.iter()
    }

    /// Removes the oldest entry.
    pub fn pop_front(&mut self) -> Option<PoolEntry> {
        self.entries.pop_front()
    }

    /// Removes the entry at `pos`, counted from the oldest.
    pub fn take(&mut self, pos: usize) -> Option<PoolEntry> {
        self.entries.remove(pos)
    }

    /// Position of the oldest entry matching `pred`.
    pub fn position(&self, pred: impl FnMut(&PoolEntry) -> bool) -> Option<usize> {
        self.entries.iter().position(pred)
    }
}
