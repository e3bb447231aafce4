//! On-off traffic generation and synthetic sensor readings.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnOffState {
    pub phase: Phase,
    pub phase_remaining_s: f64,
    pub rate_pps: f64,
    pub on_s: f64,
    pub off_s: f64,
}

impl OnOffState {
    /// State at `offset_s` seconds into an on-then-off cycle.
    pub fn at_offset(on_s: f64, off_s: f64, rate_pps: f64, offset_s: f64) -> Self {
        let cycle = on_s + off_s;
        let c = if cycle > 0.0 { offset_s.rem_euclid(cycle) } else { 0.0 };
        let (phase, phase_remaining_s) = if on_s == 0.0 {
            (Phase::Off, f64::INFINITY)
        } else if off_s == 0.0 {
            (Phase::On, f64::INFINITY)
        } else if c < on_s {
            (Phase::On, on_s - c)
        } else {
            (Phase::Off, cycle - c)
        };
        Self { phase, phase_remaining_s, rate_pps, on_s, off_s }
    }

    /// Seconds spent in the On phase during the next `dt`, advancing the state.
    fn advance(&mut self, mut dt: f64) -> f64 {
        let mut on_time = 0.0;
        while dt > 0.0 {
            let seg = dt.min(self.phase_remaining_s);
            if self.phase == Phase::On {
                on_time += seg;
            }
            dt -= seg;
            self.phase_remaining_s -= seg;
            if self.phase_remaining_s <= 0.0 {
                (self.phase, self.phase_remaining_s) = match self.phase {
                    Phase::On => (Phase::Off, self.off_s),
                    Phase::Off => (Phase::On, self.on_s),
                };
            }
        }
        on_time
    }
}

/// One node's on-off application plus its random-walk sensor.
#[derive(Debug, Clone)]
pub struct TrafficSource {
    pub state: OnOffState,
    /// Fractional packets carried over between calls.
    pub accumulator: f64,
    pub reading: f64,
    rng: ChaCha8Rng,
}

impl TrafficSource {
    /// Draws a whole-second phase offset and an initial reading from the node's stream.
    pub fn new(cfg: &SimConfig, mut rng: ChaCha8Rng) -> Self {
        let cycle = cfg.on_s + cfg.off_s;
        let offset = (rng.random::<f64>() * cycle).floor();
        let reading = rng.random_range(0.0..100.0);
        Self { state: OnOffState::at_offset(cfg.on_s, cfg.off_s, cfg.rate_pps, offset), accumulator: 0.0, reading, rng }
    }

    pub fn with_state(state: OnOffState, reading: f64, rng: ChaCha8Rng) -> Self {
        Self { state, accumulator: 0.0, reading, rng }
    }

    /// Readings produced over the next `dt` seconds. Each reading is the
    /// previous one plus a uniform step in `[-1, 1]`.
    pub fn generate(&mut self, dt: f64) -> Vec<f64> {
        let on_time = self.state.advance(dt);
        self.accumulator += self.state.rate_pps * on_time;
        let n = self.accumulator.floor();
        self.accumulator -= n;
        (0..n as usize)
            .map(|_| {
                self.reading += self.rng.random_range(-1.0..=1.0);
                self.reading
            })
            .collect()
    }
}
