use serde::{Deserialize, Serialize};

/// Logical time shared by every actor in one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clock {
    now: u64,
    delta_t: u64,
}

pub const DEFAULT_DELTA_T: u64 = 5;

impl Default for Clock {
    fn default() -> Self {
        Clock::new(DEFAULT_DELTA_T)
    }
}

impl Clock {
    pub fn new(delta_t: u64) -> Self {
        assert!(delta_t > 0, "freshness window must be positive");
        Clock { now: 0, delta_t }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn delta_t(&self) -> u64 {
        self.delta_t
    }

    pub fn advance(&mut self, units: u64) -> u64 {
        self.now += units;
        self.now
    }

    /// `now - stamp <= delta_t`, read literally: a stamp from the future passes.
    pub fn is_fresh(&self, stamp: u64) -> bool {
        self.now.saturating_sub(stamp) <= self.delta_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advance() {
        let mut c = Clock::default();
        assert_eq!(c.now(), 0);
        assert_eq!(c.advance(3), 3);
        assert_eq!(c.now(), 3);
    }

    #[test]
    fn freshness_boundary() {
        let mut c = Clock::new(5);
        assert!(c.is_fresh(0));
        c.advance(5);
        assert!(c.is_fresh(0));
        c.advance(1);
        assert!(!c.is_fresh(0));
    }
}
