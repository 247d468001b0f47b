//! Slow-timescale optimizer over configurations.
//!
//! At every step one client or one AP is selected. A client picks an AP to
//! associate with and an AP picks a channel, either by sampling from the
//! Gibbs distribution `exp(U / T(t))` over its options (DP) or by taking the
//! best option (Greedy). Scheduling shares and access probabilities follow
//! the closed forms of [`crate::fairness`] after every move.

mod schedule;
mod state;
mod step;

use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::fairness::{optimal_allocation, throughput, Allocation, Scheme};
use crate::model::{feasible_aps, Configuration, Network};

pub use schedule::AnnealingSchedule;
pub use state::State;
pub use step::{
    argmax, gibbs_step, greedy_step, move_probabilities, random_mover, round_robin_mover, Candidate, MoveProposal,
    Mover,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// Gibbs sampler over exact candidate energies.
    DpExact,
    /// Gibbs sampler with approximate association scores.
    DpApprox,
    /// Steepest ascent on the same moves.
    Greedy,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::DpExact => "dp-exact",
            PolicyKind::DpApprox => "dp-approx",
            PolicyKind::Greedy => "greedy",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dp-exact" | "dp" => Ok(PolicyKind::DpExact),
            "dp-approx" => Ok(PolicyKind::DpApprox),
            "greedy" => Ok(PolicyKind::Greedy),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionOrder {
    /// Clients in index order, then APs, repeating.
    #[default]
    RoundRobin,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerPolicy {
    pub kind: PolicyKind,
    pub scheme: Scheme,
    pub order: SelectionOrder,
    /// Ignored by Greedy.
    pub schedule: AnnealingSchedule,
    pub iterations: u64,
    pub seed: u64,
    /// Independent stream of `seed`, one per run in a sweep.
    pub stream: u64,
    /// Record a trajectory point every this many steps (0 disables
    /// intermediate points; the first and last are always kept).
    pub record_every: u64,
}

impl OptimizerPolicy {
    pub fn new(kind: PolicyKind, iterations: u64, seed: u64) -> Self {
        OptimizerPolicy {
            kind,
            scheme: Scheme::ServerCentric,
            order: SelectionOrder::RoundRobin,
            schedule: AnnealingSchedule::default(),
            iterations,
            seed,
            stream: 0,
            record_every: 1000,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_schedule(mut self, schedule: AnnealingSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_order(mut self, order: SelectionOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_record_every(mut self, every: u64) -> Self {
        self.record_every = every;
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    pub fn select_mover<R: Rng + ?Sized>(&self, state: &State<'_>, t: u64, rng: &mut R) -> Mover {
        match self.order {
            SelectionOrder::RoundRobin => round_robin_mover(state, t),
            SelectionOrder::UniformRandom => random_mover(state, rng),
        }
    }

    /// Temperature reported for step `t`; NaN for Greedy.
    pub fn temperature(&self, t: u64) -> f64 {
        match self.kind {
            PolicyKind::Greedy => f64::NAN,
            _ => self.schedule.temperature(t.max(1)),
        }
    }

    /// Runs one step of this policy.
    pub fn step<R: Rng + ?Sized>(&self, state: &mut State<'_>, t: u64, rng: &mut R) -> Option<MoveProposal> {
        match self.kind {
            PolicyKind::Greedy => greedy_step(state, t, self, rng),
            PolicyKind::DpExact | PolicyKind::DpApprox => gibbs_step(state, t, self, rng),
        }
    }
}

/// Number of channel maps tried before initialization gives up.
const INIT_ATTEMPTS: usize = 1000;

/// Random channel per virtual AP, then each client on the closest radio that
/// can serve it on its channel (ties uniformly at random). Channel maps that
/// strand a client are redrawn.
pub fn initial_configuration<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> Result<Configuration, ModelError> {
    if let Some(i) = (0..net.n_clients()).find(|&i| !net.is_reachable(i)) {
        return Err(ModelError::UnreachableClient(net.clients[i].id.clone()));
    }
    for attempt in 0..INIT_ATTEMPTS {
        let channel: Vec<usize> = (0..net.n_vaps())
            .map(|n| {
                let drawn = rng.gen_range(0..net.n_channels());
                net.initial_channel[n].unwrap_or(drawn)
            })
            .collect();
        let mut association = Vec::with_capacity(net.n_clients());
        for i in 0..net.n_clients() {
            let options = feasible_aps(net, i, &channel);
            if options.is_empty() {
                break;
            }
            let pos = net.clients[i].position;
            let dist = |n: usize| pos.distance(net.vaps[n].position);
            let best = options.iter().map(|&n| dist(n)).fold(f64::INFINITY, f64::min);
            let ties: Vec<usize> = options.into_iter().filter(|&n| dist(n) == best).collect();
            association.push(*ties.choose(rng).unwrap());
        }
        if association.len() == net.n_clients() {
            if attempt > 0 {
                debug!("initial channel map accepted after {} redraws", attempt);
            }
            return Ok(Configuration::new(association, channel));
        }
    }
    Err(ModelError::NoFeasibleInitialization)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: u64,
    pub temperature: f64,
    pub energy: f64,
    pub weighted_throughput: f64,
    pub config_digest: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub policy: String,
    pub scheme: Scheme,
    pub seed: u64,
    pub stream: u64,
    pub iterations: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub final_config: Configuration,
    pub allocation: Allocation,
    pub rates: Vec<f64>,
    /// `sum_i w_i ln r_i` of the final allocation.
    pub energy: f64,
    /// `sum_i w_i r_i` of the final allocation.
    pub weighted_throughput: f64,
    /// Highest energy seen along the trajectory and where.
    pub best_energy: f64,
    pub best_config: Configuration,
}

fn record(state: &State<'_>, policy: &OptimizerPolicy, t: u64) -> TrajectoryPoint {
    let report = throughput(
        state.net(),
        state.config(),
        &optimal_allocation(state.net(), state.config(), state.scheme()),
    );
    TrajectoryPoint {
        t,
        temperature: policy.temperature(t),
        energy: state.energy(),
        weighted_throughput: report.weighted_throughput,
        config_digest: state.config().digest(),
    }
}

/// Initializes from the policy's seed and runs `policy.iterations` steps.
pub fn run(net: &Network, policy: &OptimizerPolicy) -> Result<RunResult, ModelError> {
    let mut rng = policy.rng();
    let init = initial_configuration(net, &mut rng)?;
    run_from(net, policy, init, &mut rng)
}

/// Runs `policy` starting from `init`, drawing from `rng`.
pub fn run_from<R: Rng + ?Sized>(
    net: &Network,
    policy: &OptimizerPolicy,
    init: Configuration,
    rng: &mut R,
) -> Result<RunResult, ModelError> {
    let mut state = State::new(net, init, policy.scheme)?;
    let mut trajectory = vec![record(&state, policy, 0)];
    let mut best_energy = state.energy();
    let mut best_config = state.config().clone();
    for t in 1..=policy.iterations {
        if policy.step(&mut state, t, rng).is_some() && state.energy() > best_energy {
            best_energy = state.energy();
            best_config = state.config().clone();
        }
        let due = policy.record_every > 0 && t % policy.record_every == 0;
        if due || t == policy.iterations {
            trajectory.push(record(&state, policy, t));
        }
    }
    let config = state.config().clone();
    let allocation = optimal_allocation(net, &config, policy.scheme);
    let report = throughput(net, &config, &allocation);
    info!(
        "{} seed={} stream={}: U={:.6} sum w r={:.6}",
        policy.kind,
        policy.seed,
        policy.stream,
        state.energy(),
        report.weighted_throughput
    );
    Ok(RunResult {
        policy: policy.kind.label().to_string(),
        scheme: policy.scheme,
        seed: policy.seed,
        stream: policy.stream,
        iterations: policy.iterations,
        trajectory,
        final_config: config,
        allocation,
        energy: report.energy.to_f64(),
        weighted_throughput: report.weighted_throughput,
        rates: report.rates,
        best_energy,
        best_config,
    })
}
