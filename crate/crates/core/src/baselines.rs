//! MinInt-Wifi comparison policy.
//!
//! Channels are chosen to minimize the number of interfering same-channel
//! virtual-AP pairs (greedy single-AP moves to a local minimum, restarted
//! from random maps). Clients join the nearest AP that can serve them, and
//! each AP splits its airtime so all its clients see the same throughput.
//! Access probabilities then follow `p_n = w^n / z^n`.

use log::info;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::annealing::{OptimizerPolicy, PolicyKind, RunResult, TrajectoryPoint};
use crate::error::ModelError;
use crate::fairness::{optimal_access, throughput, Allocation, Scheme};
use crate::model::{feasible_aps, Configuration, Network, WeightAggregates};

pub const MININT_WIFI: &str = "minint-wifi";

/// Unordered same-channel pairs `{m, n}` with `m` in `M^{n, c(n)}`.
pub fn interfering_pairs(net: &Network, channels: &[usize]) -> usize {
    (0..net.n_vaps())
        .map(|n| {
            let c = channels[n];
            net.graph
                .neighbors(n, c)
                .iter()
                .filter(|&&m| m > n && channels[m] == c)
                .count()
        })
        .sum()
}

/// Pairs involving AP `n` if it used channel `c`.
fn pairs_of(net: &Network, channels: &[usize], n: usize, c: usize) -> usize {
    net.graph
        .neighbors(n, c)
        .iter()
        .filter(|&&m| m != n && channels[m] == c)
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinIntOutcome {
    pub channels: Vec<usize>,
    pub pairs: usize,
    /// Objective after each accepted move of the winning descent, starting
    /// with its initial value.
    pub history: Vec<usize>,
}

/// Greedy descent from `start`: sweep the APs in order, moving each to the
/// channel with the fewest conflicts when that strictly helps, until a full
/// sweep changes nothing.
pub fn minint_descent(net: &Network, start: &[usize]) -> MinIntOutcome {
    let mut channels = start.to_vec();
    let mut pairs = interfering_pairs(net, &channels);
    let mut history = vec![pairs];
    loop {
        let mut changed = false;
        for n in 0..net.n_vaps() {
            let cur = channels[n];
            let here = pairs_of(net, &channels, n, cur);
            let (best_c, best) = (0..net.n_channels())
                .map(|c| (c, pairs_of(net, &channels, n, c)))
                .min_by_key(|&(c, p)| (p, c))
                .unwrap();
            if best < here {
                channels[n] = best_c;
                pairs = pairs - here + best;
                history.push(pairs);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    MinIntOutcome {
        channels,
        pairs,
        history,
    }
}

/// Minimum-interference channel selection: descent from `start`, then from
/// `restarts` random maps; the first map with the fewest pairs wins.
pub fn minint_channel_selection<R: Rng + ?Sized>(
    net: &Network,
    start: &[usize],
    restarts: usize,
    rng: &mut R,
) -> MinIntOutcome {
    let mut best = minint_descent(net, start);
    for _ in 0..restarts {
        if best.pairs == 0 {
            break;
        }
        let init: Vec<usize> = (0..net.n_vaps()).map(|_| rng.gen_range(0..net.n_channels())).collect();
        let cand = minint_descent(net, &init);
        if cand.pairs < best.pairs {
            best = cand;
        }
    }
    best
}

/// Nearest-AP association (ties by index) with equal-throughput scheduling
/// `phi_i proportional to 1 / B_i` and `p_n = w^n / z^n`.
pub fn wifi_association_and_schedule(
    net: &Network,
    channels: &[usize],
) -> Result<(Configuration, Allocation), ModelError> {
    let mut association = Vec::with_capacity(net.n_clients());
    for i in 0..net.n_clients() {
        let pos = net.clients[i].position;
        let nearest = feasible_aps(net, i, channels)
            .into_iter()
            .map(|n| (n, pos.distance(net.vaps[n].position)))
            .fold(None, |best: Option<(usize, f64)>, (n, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((n, d)),
            })
            .ok_or_else(|| ModelError::UnreachableClient(net.clients[i].id.clone()))?;
        association.push(nearest.0);
    }
    let config = Configuration::new(association, channels.to_vec());
    let agg = WeightAggregates::compute(net, &config);
    let mut schedule = vec![0.0; net.n_clients()];
    for n in 0..net.n_vaps() {
        let c = channels[n];
        let members = agg.members(n);
        let inv_total: f64 = members.iter().map(|&i| 1.0 / net.rate(i, n, c)).sum();
        for &i in members {
            schedule[i] = (1.0 / net.rate(i, n, c)) / inv_total;
        }
    }
    let access = optimal_access(net, &config, &agg, Scheme::ServerCentric);
    Ok((
        config,
        Allocation {
            scheme: Scheme::ServerCentric,
            schedule,
            access,
        },
    ))
}

/// Default number of random restarts for the channel-selection stand-in.
pub const DEFAULT_RESTARTS: usize = 20;

/// Full MinInt-Wifi run. Draws the same random initial channel map as the
/// annealing policies for `seed`/`stream`, then applies the baseline.
pub fn run_minint_wifi(net: &Network, seed: u64, stream: u64, restarts: usize) -> Result<RunResult, ModelError> {
    let policy = OptimizerPolicy::new(PolicyKind::Greedy, 0, seed).with_stream(stream);
    let mut rng = policy.rng();
    let init = crate::annealing::initial_configuration(net, &mut rng)?;
    let minint = minint_channel_selection(net, &init.channel, restarts, &mut rng);
    let (config, allocation) = wifi_association_and_schedule(net, &minint.channels)?;
    let report = throughput(net, &config, &allocation);
    let energy = report.energy.to_f64();
    info!(
        "{MININT_WIFI} seed={seed} stream={stream}: pairs={} U={energy:.6} sum w r={:.6}",
        minint.pairs, report.weighted_throughput
    );
    Ok(RunResult {
        policy: MININT_WIFI.to_string(),
        scheme: Scheme::ServerCentric,
        seed,
        stream,
        iterations: 0,
        trajectory: vec![TrajectoryPoint {
            t: 0,
            temperature: f64::NAN,
            energy,
            weighted_throughput: report.weighted_throughput,
            config_digest: config.digest(),
        }],
        best_config: config.clone(),
        final_config: config,
        allocation,
        rates: report.rates,
        energy,
        weighted_throughput: report.weighted_throughput,
        best_energy: energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AccessPoint, Channel, Client, Point};
    use crate::radio::RadioModel;
    use crate::scenarios::{builtin_line3, Line3Variant};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn line3_two_channels_zero_interference() {
        let net = builtin_line3(Line3Variant::TwoChannel).network().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for start in [[0, 1, 0], [0, 0, 0], [1, 1, 1], [1, 0, 1]] {
            let out = minint_channel_selection(&net, &start, DEFAULT_RESTARTS, &mut rng);
            assert_eq!(out.channels, vec![1, 0, 1]);
            assert_eq!(out.pairs, 0);
        }
    }

    #[test]
    fn single_channel_unchanged() {
        let net = builtin_line3(Line3Variant::OneChannel).network().unwrap();
        let out = minint_descent(&net, &[0, 0, 0]);
        assert_eq!(out.channels, vec![0, 0, 0]);
        assert_eq!(out.pairs, 3);
    }

    #[test]
    fn equal_throughput_schedule() {
        let net = Network::new(
            vec![Channel::new("b", 2400.0, 22.0)],
            vec![AccessPoint::new("a", Point::new(0.0, 0.0), 1)],
            vec![
                Client::new("near", Point::new(10.0, 0.0), 1.0),
                Client::new("far", Point::new(70.0, 0.0), 1.0),
            ],
            RadioModel::default(),
        )
        .unwrap();
        let (_, alloc) = wifi_association_and_schedule(&net, &[0]).unwrap();
        assert_relative_eq!(alloc.schedule[0], 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(alloc.schedule[1], 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn nearest_ap_association() {
        let net = builtin_line3(Line3Variant::OneChannel).network().unwrap();
        let (config, _) = wifi_association_and_schedule(&net, &[0, 0, 0]).unwrap();
        // x = 40..110 are closest to the middle AP, x = 115 to the right one.
        let mut want = vec![1; 16];
        want[15] = 2;
        assert_eq!(config.association, want);
    }
}
