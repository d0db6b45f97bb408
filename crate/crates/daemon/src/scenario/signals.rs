//! Synthetic cluster topology and sensor signal models.

use odaframe_core::{SensorReading, Topic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::sources::Source;

/// Desk-scale machine: racks × chassis × nodes, each node with `cpus` cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub racks: usize,
    pub chassis: usize,
    pub nodes: usize,
    pub cpus: usize,
}

impl Topology {
    pub fn node_count(&self) -> usize {
        self.racks * self.chassis * self.nodes
    }

    /// Node paths such as `/r00/c01/s02/`, rack-major.
    pub fn node_paths(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.node_count());
        for r in 0..self.racks {
            for c in 0..self.chassis {
                for n in 0..self.nodes {
                    out.push(node_path(r, c, n));
                }
            }
        }
        out
    }
}

pub fn node_path(rack: usize, chassis: usize, node: usize) -> String {
    format!("/r{rack:02}/c{chassis:02}/s{node:02}/")
}

pub fn topic(path: &str) -> Topic {
    Topic::new(path).expect("generated topics are valid")
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// A source driven by a closure; used for the scenario signal models.
pub struct FnSource {
    name: String,
    interval_ns: u64,
    topics: Vec<Topic>,
    f: Box<dyn FnMut(u64) -> Vec<(Topic, SensorReading)> + Send>,
}

impl FnSource {
    pub fn new(
        name: impl Into<String>,
        interval_ns: u64,
        topics: Vec<Topic>,
        f: impl FnMut(u64) -> Vec<(Topic, SensorReading)> + Send + 'static,
    ) -> Self {
        FnSource {
            name: name.into(),
            interval_ns,
            topics,
            f: Box::new(f),
        }
    }
}

impl Source for FnSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn interval_ns(&self) -> u64 {
        self.interval_ns
    }

    fn topics(&self) -> Vec<Topic> {
        self.topics.clone()
    }

    fn sample(&mut self, now: u64) -> Vec<(Topic, SensorReading)> {
        (self.f)(now)
    }
}

/// Node power in watts: base + load·coupling + AR(1) noise + a periodic
/// component. Load is persistent and occasionally jumps to a new level;
/// temperature relaxes towards a power-dependent equilibrium.
pub struct PowerModel {
    pub base: f64,
    pub coupling: f64,
    pub amplitude: f64,
    pub period_ticks: f64,
    pub phase: f64,
    pub ar_coef: f64,
    ar: f64,
    load: f64,
    temp: f64,
    tick: u64,
    switch_prob: f64,
    ar_noise: Normal<f64>,
    load_noise: Normal<f64>,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub power: f64,
    /// Utilisation in [0, 1].
    pub load: f64,
    pub temp: f64,
}

impl PowerModel {
    pub fn new(mut rng: ChaCha8Rng) -> Self {
        let base = rng.random_range(120.0..160.0);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let load = rng.random_range(0.1..1.0);
        PowerModel {
            base,
            coupling: 200.0,
            amplitude: 15.0,
            period_ticks: 240.0,
            phase,
            ar_coef: 0.8,
            ar: 0.0,
            load,
            temp: 45.0,
            tick: 0,
            switch_prob: 0.01,
            ar_noise: Normal::new(0.0, 3.0).expect("valid sigma"),
            load_noise: Normal::new(0.0, 0.01).expect("valid sigma"),
            rng,
        }
    }

    pub fn step(&mut self) -> PowerSample {
        if self.rng.random_bool(self.switch_prob) {
            self.load = self.rng.random_range(0.1..1.0);
        } else {
            self.load = (self.load + self.load_noise.sample(&mut self.rng)).clamp(0.0, 1.0);
        }
        self.ar = self.ar_coef * self.ar + self.ar_noise.sample(&mut self.rng);
        let angle = std::f64::consts::TAU * self.tick as f64 / self.period_ticks + self.phase;
        let power = self.base + self.coupling * self.load + self.amplitude * angle.sin() + self.ar;
        self.temp += 0.05 * (30.0 + 0.12 * power - self.temp);
        self.tick += 1;
        PowerSample {
            power,
            load: self.load,
            temp: self.temp,
        }
    }
}

/// Hardware counters of one core: cycles, instructions and floating-point
/// operations, advanced once per sampling interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoreCounters {
    pub cycles: i64,
    pub instructions: i64,
    pub flops: i64,
}

impl CoreCounters {
    pub fn advance(&mut self, instructions: i64, cpi: f64, flops_per_instruction: f64) {
        self.instructions += instructions;
        self.cycles += (instructions as f64 * cpi).round() as i64;
        self.flops += (instructions as f64 * flops_per_instruction).round() as i64;
    }
}
