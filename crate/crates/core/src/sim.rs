//! Wires the engine, mobility, traffic and one routing protocol into a run.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;

use crate::audit::Audit;
use crate::config::SimConfig;
use crate::dsdv::DsdvState;
use crate::energy::RadioModel;
use crate::engine::{RngStreams, Scheduler, SimTime, StreamId, MICROS_PER_SECOND};
use crate::metrics::{EnergySample, MetricsLog};
use crate::mleach::MleachState;
use crate::mobility::{place_nodes, step_waypoint, Field, MobilityParams, WaypointState};
use crate::model::NodeId;
use crate::network::Network;
use crate::traffic::TrafficSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Mleach,
    Dsdv,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Mleach => "mleach",
            ProtocolKind::Dsdv => "dsdv",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mleach" => Ok(ProtocolKind::Mleach),
            "dsdv" => Ok(ProtocolKind::Dsdv),
            other => Err(format!("unknown protocol '{other}' (expected mleach or dsdv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    RoundStart,
    SlotStart { cm: NodeId },
    MobilityStep,
    TrafficGenerate,
    MetricSample,
    DsdvPeriodicUpdate,
    SimEnd,
}

/// State shared by both protocols: the network, its measurements and the
/// readings each node has produced but not yet sent.
#[derive(Debug, Clone)]
pub struct World {
    pub cfg: SimConfig,
    pub net: Network,
    pub metrics: MetricsLog,
    pub audit: Audit,
    pub pending: Vec<Vec<f64>>,
}

impl World {
    pub fn new(cfg: SimConfig, net: Network) -> Self {
        let n = net.nodes.len();
        Self { metrics: MetricsLog::new(n), audit: Audit::new(n), pending: vec![Vec::new(); n], cfg, net }
    }

    pub fn now_s(&self) -> f64 {
        self.net.now.as_secs_f64()
    }

    /// Records fresh deaths and discards what the dead were holding.
    pub fn settle_deaths(&mut self) {
        for (at, id) in self.net.take_deaths() {
            self.metrics.record_death(at);
            self.pending[id.index()].clear();
        }
    }

    fn sample_energy(&mut self) {
        self.metrics.energy_series.push(EnergySample {
            t_s: self.now_s(),
            total_j: self.net.ledger.total_consumed_j(),
            max_node_j: self.net.ledger.max_consumed_j(),
        });
        self.audit.check_energies(&self.net);
    }
}

// One live value per simulation; boxing the larger arm buys nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
enum Protocol {
    Mleach(MleachState),
    Dsdv(DsdvState),
}

/// One protocol run over one scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub world: World,
    kind: ProtocolKind,
    protocol: Protocol,
    sched: Scheduler<EventKind>,
    field: Field,
    mobility_params: MobilityParams,
    waypoints: Vec<(WaypointState, ChaCha8Rng)>,
    traffic: Vec<TrafficSource>,
    last_event: SimTime,
}

impl Simulation {
    /// Builds the scenario from a validated config. Placement, mobility and
    /// traffic draw from streams that do not depend on the protocol, so both
    /// protocols see the same nodes, movements and readings.
    pub fn new(cfg: SimConfig, kind: ProtocolKind) -> Self {
        let streams = RngStreams::new(cfg.rng_seed);
        let field = Field { width: cfg.field_width_m, height: cfg.field_height_m };
        let mobility_params = MobilityParams::from_config(&cfg);
        let positions = place_nodes(cfg.node_count, &field, cfg.placement, &mut streams.stream(StreamId::NodePlacement));
        let waypoints = (0..cfg.node_count as u32)
            .map(|i| {
                let mut rng = streams.stream(StreamId::Mobility(i));
                (WaypointState::initial(&field, &mobility_params, &mut rng), rng)
            })
            .collect();
        let traffic =
            (0..cfg.node_count as u32).map(|i| TrafficSource::new(&cfg, streams.stream(StreamId::Traffic(i)))).collect();
        let net = Network::new(&positions, cfg.initial_energy_j, RadioModel::from_config(&cfg), cfg.bs());
        let protocol = match kind {
            ProtocolKind::Mleach => Protocol::Mleach(MleachState::new(streams.stream(StreamId::Election))),
            ProtocolKind::Dsdv => Protocol::Dsdv(DsdvState::new(cfg.node_count)),
        };

        let mut sim = Self {
            world: World::new(cfg, net),
            kind,
            protocol,
            sched: Scheduler::new(),
            field,
            mobility_params,
            waypoints,
            traffic,
            last_event: SimTime::ZERO,
        };
        sim.schedule_timeline();
        sim
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    /// Insertion order fixes the order of same-time events: sampling sees the
    /// state at the instant, then nodes move, then the protocol acts, then
    /// fresh readings appear.
    fn schedule_timeline(&mut self) {
        let cfg = &self.world.cfg;
        let end_us = cfg.duration_us();
        let whole_seconds = end_us / MICROS_PER_SECOND;
        let mut at = |t: u64, e: EventKind| self.sched.schedule(SimTime(t), e).expect("timeline starts at zero");

        for s in 1..=whole_seconds {
            at(s * MICROS_PER_SECOND, EventKind::MetricSample);
        }
        for s in 1..whole_seconds {
            at(s * MICROS_PER_SECOND, EventKind::MobilityStep);
        }
        let (period, event) = match self.kind {
            ProtocolKind::Mleach => (cfg.round_us(), EventKind::RoundStart),
            ProtocolKind::Dsdv => {
                (crate::config::seconds_to_micros(cfg.dsdv_update_interval_s), EventKind::DsdvPeriodicUpdate)
            }
        };
        let mut t = 0;
        while t < end_us {
            at(t, event);
            t += period.max(1);
        }
        for s in 0..whole_seconds {
            at(s * MICROS_PER_SECOND, EventKind::TrafficGenerate);
        }
        at(end_us, EventKind::SimEnd);
    }

    /// Drops every queued event. Running afterwards yields an empty log.
    pub fn clear_events(&mut self) {
        self.sched.clear();
    }

    pub fn pending_events(&self) -> usize {
        self.sched.len()
    }

    pub fn events_processed(&self) -> u64 {
        self.sched.processed()
    }

    /// Processes events up to and including `t_end_s` and returns the log so far.
    pub fn run_until(&mut self, t_end_s: f64) -> MetricsLog {
        let limit = SimTime::from_secs_f64(t_end_s);
        while let Some((t, ev)) = self.sched.pop_until(limit) {
            if t < self.last_event {
                self.world.audit.clock_regressions += 1;
            }
            self.last_event = t;
            self.world.net.now = t;
            self.handle(t, ev);
            self.world.settle_deaths();
        }
        self.world.metrics.clone()
    }

    /// Runs the whole configured duration.
    pub fn run(&mut self) -> MetricsLog {
        let end = self.world.cfg.sim_duration_s;
        self.run_until(end)
    }

    fn handle(&mut self, t: SimTime, ev: EventKind) {
        match ev {
            EventKind::MetricSample => self.world.sample_energy(),
            EventKind::MobilityStep => self.move_nodes(),
            EventKind::TrafficGenerate => {
                self.generate_traffic();
                match &mut self.protocol {
                    Protocol::Mleach(m) => m.on_readings(&mut self.world),
                    Protocol::Dsdv(d) => d.on_readings(&mut self.world),
                }
            }
            EventKind::RoundStart => {
                if let Protocol::Mleach(m) = &mut self.protocol {
                    for (cm, at) in m.start_round(&mut self.world) {
                        self.sched.schedule(at, EventKind::SlotStart { cm }).expect("slots lie in the current round");
                    }
                }
            }
            EventKind::SlotStart { cm } => {
                if let Protocol::Mleach(m) = &mut self.protocol {
                    m.on_slot(&mut self.world, cm);
                }
            }
            EventKind::DsdvPeriodicUpdate => {
                if let Protocol::Dsdv(d) = &mut self.protocol {
                    d.periodic_update(&mut self.world);
                }
            }
            EventKind::SimEnd => {
                let secs = (t.0 / MICROS_PER_SECOND) as usize;
                self.world.metrics.extend_buckets(secs);
                self.world.settle_deaths();
                self.world.audit.finish(&self.world.net, self.sched.len());
            }
        }
    }

    fn move_nodes(&mut self) {
        for (node, (wp, rng)) in self.world.net.nodes.iter_mut().zip(self.waypoints.iter_mut()) {
            if !node.is_alive() {
                continue;
            }
            let (pos, next) = step_waypoint(node.position, *wp, 1.0, &self.field, &self.mobility_params, rng);
            node.position = pos;
            *wp = next;
        }
    }

    /// Readings for the coming second `[t, t+1)`.
    fn generate_traffic(&mut self) {
        for (i, src) in self.traffic.iter_mut().enumerate() {
            if !self.world.net.nodes[i].is_alive() {
                continue;
            }
            let readings = src.generate(1.0);
            self.world.metrics.readings_generated += readings.len() as u64;
            if let Some(last) = readings.last() {
                self.world.net.nodes[i].reading = *last;
            }
            self.world.pending[i].extend(readings);
        }
    }
}

/// Full run of one protocol over a validated config.
pub fn simulate(cfg: &SimConfig, kind: ProtocolKind) -> (MetricsLog, Audit) {
    let mut sim = Simulation::new(cfg.clone(), kind);
    let log = sim.run();
    (log, sim.world.audit)
}
