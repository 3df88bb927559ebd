use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, Utc};

/// Source of record timestamps.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Deterministic clock: 2024-01-01T00:00:00Z, then one second later on
/// every call.
#[derive(Debug)]
pub struct StepClock {
    next: AtomicI64,
}

pub const STEP_CLOCK_EPOCH: i64 = 1_704_067_200;

impl Default for StepClock {
    fn default() -> Self {
        Self { next: AtomicI64::new(STEP_CLOCK_EPOCH) }
    }
}

impl Clock for StepClock {
    fn now(&self) -> DateTime<Utc> {
        let secs = self.next.fetch_add(1, Ordering::SeqCst);
        DateTime::from_timestamp(secs, 0).expect("in range")
    }
}
