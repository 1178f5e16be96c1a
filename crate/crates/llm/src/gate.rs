use std::sync::{Condvar, Mutex};

/// Counting semaphore bounding concurrent provider requests.
#[derive(Debug)]
pub struct InFlightGate {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

pub struct GatePermit<'a> {
    gate: &'a InFlightGate,
}

impl InFlightGate {
    pub fn new(limit: usize) -> Self {
        InFlightGate {
            limit: limit.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn acquire(&self) -> GatePermit<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.limit {
            active = self.freed.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        GatePermit { gate: self }
    }

    pub fn active(&self) -> usize {
        *self.active.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        let mut active = self.gate.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.gate.freed.notify_one();
    }
}
