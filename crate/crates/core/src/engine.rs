//! Deterministic discrete-event scheduling and named random streams.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const MICROS_PER_SECOND: u64 = 1_000_000;

/// Simulation time as a count of microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_secs(s: u64) -> Self {
        SimTime(s * MICROS_PER_SECOND)
    }

    pub fn from_secs_f64(s: f64) -> Self {
        SimTime((s * MICROS_PER_SECOND as f64).round() as u64)
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_SECOND as f64
    }

    /// Index of the half-open one-second bucket `[k, k+1)` containing this instant.
    pub fn second_bucket(self) -> usize {
        (self.0 / MICROS_PER_SECOND) as usize
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("cannot schedule at {at:?}: clock is already at {now:?}")]
    InThePast { at: SimTime, now: SimTime },
}

#[derive(Debug, Clone)]
struct Entry<E> {
    at: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // BinaryHeap is a max-heap; reverse so the earliest (at, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

/// Time-ordered event queue with FIFO tie-breaking at equal timestamps.
#[derive(Debug, Clone)]
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Entry<E>>,
    processed: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Self { now: SimTime::ZERO, next_seq: 0, queue: BinaryHeap::new(), processed: 0 }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Number of events popped so far.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn schedule(&mut self, at: SimTime, event: E) -> Result<(), EngineError> {
        if at < self.now {
            return Err(EngineError::InThePast { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Entry { at, seq, event });
        Ok(())
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.queue.peek().map(|e| e.at)
    }

    /// Pops the next event and advances the clock to its timestamp.
    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        let entry = self.queue.pop()?;
        debug_assert!(entry.at >= self.now);
        self.now = entry.at;
        self.processed += 1;
        Some((entry.at, entry.event))
    }

    /// Pops the next event only if it fires at or before `limit`.
    pub fn pop_until(&mut self, limit: SimTime) -> Option<(SimTime, E)> {
        match self.peek_time() {
            Some(t) if t <= limit => self.pop(),
            _ => None,
        }
    }

    pub fn clear(&mut self) {
        self.queue.clear();
    }
}

/// Independent random streams, one family per concern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    BsPlacement,
    NodePlacement,
    Election,
    /// Per-node waypoint draws.
    Mobility(u32),
    /// Per-node on/off phase and sensor readings.
    Traffic(u32),
}

impl StreamId {
    fn stream_number(self) -> u64 {
        match self {
            StreamId::BsPlacement => 1,
            StreamId::NodePlacement => 2,
            StreamId::Election => 3,
            StreamId::Mobility(n) => (1 << 32) | n as u64,
            StreamId::Traffic(n) => (2 << 32) | n as u64,
        }
    }
}

/// Derives ChaCha streams from one 64-bit seed. Streams never overlap, so
/// drawing more from one cannot perturb another.
#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn stream(&self, id: StreamId) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id.stream_number());
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn drain(s: &mut Scheduler<&'static str>) -> Vec<&'static str> {
        std::iter::from_fn(|| s.pop().map(|(_, e)| e)).collect()
    }

    #[test]
    fn fifo_at_equal_time() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(5), "A").unwrap();
        s.schedule(SimTime::from_secs(5), "B").unwrap();
        assert_eq!(drain(&mut s), ["A", "B"]);
    }

    #[test]
    fn earlier_time_first() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(3), "t3").unwrap();
        s.schedule(SimTime::from_secs(2), "t2").unwrap();
        assert_eq!(drain(&mut s), ["t2", "t3"]);
    }

    #[test]
    fn schedule_at_now_fires_after_existing_same_time_events() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(1), "first").unwrap();
        s.schedule(SimTime::from_secs(1), "second").unwrap();
        let (t, e) = s.pop().unwrap();
        assert_eq!(e, "first");
        s.schedule(t, "now").unwrap();
        assert_eq!(drain(&mut s), ["second", "now"]);
    }

    #[test]
    fn past_is_rejected() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(4), "x").unwrap();
        s.pop();
        let err = s.schedule(SimTime::from_secs(3), "y").unwrap_err();
        assert_eq!(err, EngineError::InThePast { at: SimTime::from_secs(3), now: SimTime::from_secs(4) });
    }

    #[test]
    fn pop_until_respects_limit() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(1), "a").unwrap();
        s.schedule(SimTime::from_secs(3), "b").unwrap();
        assert!(s.pop_until(SimTime::from_secs(2)).is_some());
        assert!(s.pop_until(SimTime::from_secs(2)).is_none());
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn buckets_are_half_open() {
        assert_eq!(SimTime::from_secs_f64(4.2).second_bucket(), 4);
        assert_eq!(SimTime::from_secs_f64(4.999999).second_bucket(), 4);
        assert_eq!(SimTime::from_secs_f64(5.0).second_bucket(), 5);
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let streams = RngStreams::new(42);
        let a: Vec<u64> = (0..4).map(|_| 0).scan(streams.stream(StreamId::Election), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(streams.stream(StreamId::Election), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(streams.stream(StreamId::Mobility(0)), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(
            streams.stream(StreamId::Traffic(1)).random::<u64>(),
            streams.stream(StreamId::Traffic(2)).random::<u64>()
        );
    }
}
