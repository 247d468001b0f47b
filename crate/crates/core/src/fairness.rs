//! Fast-timescale closed forms.
//!
//! Given a configuration, the scheduling shares and access probabilities
//! that maximize `sum_i w_i log r_i` are
//!
//! * server-centric: `phi_i = w_i / w^{n(i)}` and `p_n = w^n / z^n`,
//! * client-contention: `p_i = w_i / z^{n(i)}`,
//!
//! and the resulting objective is the configuration's energy `U`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Configuration, Network, WeightAggregates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// APs contend for the channel and schedule their own clients.
    #[default]
    ServerCentric,
    /// Clients contend for the channel directly.
    ClientContention,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ServerCentric => "server",
            Scheme::ClientContention => "client",
        })
    }
}

/// Objective value, with infeasibility (some `r_i = 0`) kept distinct from
/// any finite number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Energy {
    Finite(f64),
    Infeasible,
}

impl Energy {
    pub fn value(self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(v),
            Energy::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, Energy::Finite(_))
    }

    /// Finite value or `-inf`, for reporting only.
    pub fn to_f64(self) -> f64 {
        self.value().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn expect_finite(self) -> f64 {
        self.value().expect("configuration is infeasible")
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Finite(v) => write!(f, "{v}"),
            Energy::Infeasible => f.write_str("infeasible"),
        }
    }
}

/// Scheduling shares and access probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub scheme: Scheme,
    /// `phi_{i,n(i)}` per client; empty under client contention.
    pub schedule: Vec<f64>,
    /// `p_n` per virtual AP (server-centric) or `p_i` per client.
    pub access: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub rates: Vec<f64>,
    pub energy: Energy,
    pub weighted_throughput: f64,
}

/// `phi_i = w_i / w^{n(i)}`.
pub fn optimal_schedule(net: &Network, config: &Configuration, agg: &WeightAggregates) -> Vec<f64> {
    (0..net.n_clients())
        .map(|i| net.weight(i) / agg.w(config.association[i]))
        .collect()
}

/// `p_n = w^n / z^n` (0 for clientless APs), or `p_i = w_i / z^{n(i)}`.
pub fn optimal_access(net: &Network, config: &Configuration, agg: &WeightAggregates, scheme: Scheme) -> Vec<f64> {
    match scheme {
        Scheme::ServerCentric => (0..net.n_vaps())
            .map(|n| {
                let w = agg.w(n);
                if w > 0.0 {
                    w / agg.z(n)
                } else {
                    0.0
                }
            })
            .collect(),
        Scheme::ClientContention => (0..net.n_clients())
            .map(|i| net.weight(i) / agg.z(config.association[i]))
            .collect(),
    }
}

pub fn optimal_allocation(net: &Network, config: &Configuration, scheme: Scheme) -> Allocation {
    let agg = WeightAggregates::compute(net, config);
    let schedule = match scheme {
        Scheme::ServerCentric => optimal_schedule(net, config, &agg),
        Scheme::ClientContention => Vec::new(),
    };
    Allocation {
        scheme,
        schedule,
        access: optimal_access(net, config, &agg, scheme),
    }
}

/// Per-client throughput under an arbitrary allocation.
///
/// Server-centric: `r_i = B phi_i p_n prod_{m in M^{n,c}, m != n, c(m) = c} (1 - p_m)`.
/// Client-contention: `r_i = B p_i prod_{j != i interfering} (1 - p_j)`, where
/// clients interfere when their APs share a channel and interfere on it.
pub fn throughput(net: &Network, config: &Configuration, alloc: &Allocation) -> ThroughputReport {
    let rates: Vec<f64> = match alloc.scheme {
        Scheme::ServerCentric => (0..net.n_clients())
            .map(|i| {
                let n = config.association[i];
                let c = config.channel[n];
                let others: f64 = net
                    .graph
                    .neighbors(n, c)
                    .iter()
                    .filter(|&&m| m != n && config.channel[m] == c)
                    .map(|&m| 1.0 - alloc.access[m])
                    .product();
                net.rate(i, n, c) * alloc.schedule[i] * alloc.access[n] * others
            })
            .collect(),
        Scheme::ClientContention => {
            let agg = WeightAggregates::compute(net, config);
            (0..net.n_clients())
                .map(|i| {
                    let n = config.association[i];
                    let c = config.channel[n];
                    let others: f64 = net
                        .graph
                        .neighbors(n, c)
                        .iter()
                        .filter(|&&m| config.channel[m] == c)
                        .flat_map(|&m| agg.members(m).iter().copied())
                        .filter(|&j| j != i)
                        .map(|j| 1.0 - alloc.access[j])
                        .product();
                    net.rate(i, n, c) * alloc.access[i] * others
                })
                .collect()
        }
    };
    let weighted_throughput = rates.iter().zip(net.weights()).map(|(r, w)| w * r).sum();
    let energy = if rates.iter().all(|&r| r > 0.0) {
        Energy::Finite(rates.iter().zip(net.weights()).map(|(r, w)| w * r.ln()).sum())
    } else {
        Energy::Infeasible
    };
    ThroughputReport {
        rates,
        energy,
        weighted_throughput,
    }
}

/// Throughput report for the closed-form optimal allocation.
pub fn optimal_throughput(net: &Network, config: &Configuration, scheme: Scheme) -> ThroughputReport {
    throughput(net, config, &optimal_allocation(net, config, scheme))
}

/// `a log(a / b)` with `0 log 0 = 0`.
#[inline]
pub(crate) fn xlog_ratio(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        a * (a / b).ln()
    } else {
        0.0
    }
}

/// Energy contributed by virtual AP `n` and its clients, given its load `w`
/// and neighborhood load `z`. `rate_of(i)` returns the client's rate at `n`.
/// `None` when some member has zero rate.
pub(crate) fn block_energy(
    scheme: Scheme,
    members: &[usize],
    weights: &[f64],
    w: f64,
    z: f64,
    mut rate_of: impl FnMut(usize) -> f64,
) -> Option<f64> {
    let mut total = 0.0;
    match scheme {
        Scheme::ServerCentric => {
            for &i in members {
                let b = rate_of(i);
                if b <= 0.0 {
                    return None;
                }
                let wi = weights[i];
                total += wi * (b.ln() + (wi / w).ln());
            }
            if w > 0.0 {
                total += xlog_ratio(w, z) + xlog_ratio((z - w).max(0.0), z);
            }
        }
        Scheme::ClientContention => {
            for &i in members {
                let b = rate_of(i);
                if b <= 0.0 {
                    return None;
                }
                let wi = weights[i];
                total += wi * (b * wi / z).ln() + xlog_ratio((z - wi).max(0.0), z);
            }
        }
    }
    Some(total)
}

/// Closed-form energy `U(psi)` with the optimal fast-timescale variables
/// plugged in.
pub fn energy(net: &Network, config: &Configuration, scheme: Scheme) -> Energy {
    energy_with(net, config, &WeightAggregates::compute(net, config), scheme)
}

pub fn energy_with(net: &Network, config: &Configuration, agg: &WeightAggregates, scheme: Scheme) -> Energy {
    let mut total = 0.0;
    for n in 0..net.n_vaps() {
        let c = config.channel[n];
        match block_energy(scheme, agg.members(n), net.weights(), agg.w(n), agg.z(n), |i| {
            net.rate(i, n, c)
        }) {
            Some(v) => total += v,
            None => return Energy::Infeasible,
        }
    }
    Energy::Finite(total)
}

/// Slot-level simulation of the random-access model.
///
/// Each slot every AP (or client) transmits independently with its access
/// probability. A transmission succeeds iff no other same-channel
/// interferer transmits. On an AP's success one of its clients is drawn by
/// `phi` and credited with its rate. Returns mean rate per slot per client.
pub fn slot_monte_carlo(net: &Network, config: &Configuration, alloc: &Allocation, slots: u64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_clients = net.n_clients();
    let mut delivered = vec![0.0; n_clients];
    let agg = WeightAggregates::compute(net, config);
    let slots = slots.max(1);
    match alloc.scheme {
        Scheme::ServerCentric => {
            let n_vaps = net.n_vaps();
            let mut on = vec![false; n_vaps];
            for _ in 0..slots {
                for (n, flag) in on.iter_mut().enumerate() {
                    *flag = rng.gen::<f64>() < alloc.access[n];
                }
                for n in 0..n_vaps {
                    if !on[n] || agg.members(n).is_empty() {
                        continue;
                    }
                    let c = config.channel[n];
                    let collided = net
                        .graph
                        .neighbors(n, c)
                        .iter()
                        .any(|&m| m != n && config.channel[m] == c && on[m]);
                    if collided {
                        continue;
                    }
                    let members = agg.members(n);
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut chosen = *members.last().unwrap();
                    for &i in members {
                        acc += alloc.schedule[i];
                        if u < acc {
                            chosen = i;
                            break;
                        }
                    }
                    delivered[chosen] += net.rate(chosen, n, c);
                }
            }
        }
        Scheme::ClientContention => {
            let mut on = vec![false; n_clients];
            for _ in 0..slots {
                for (i, flag) in on.iter_mut().enumerate() {
                    *flag = rng.gen::<f64>() < alloc.access[i];
                }
                for i in 0..n_clients {
                    if !on[i] {
                        continue;
                    }
                    let n = config.association[i];
                    let c = config.channel[n];
                    let collided = net
                        .graph
                        .neighbors(n, c)
                        .iter()
                        .filter(|&&m| config.channel[m] == c)
                        .flat_map(|&m| agg.members(m).iter())
                        .any(|&j| j != i && on[j]);
                    if !collided {
                        delivered[i] += net.rate(i, n, c);
                    }
                }
            }
        }
    }
    delivered.into_iter().map(|d| d / slots as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AccessPoint, Channel, Client, Point};
    use crate::radio::RadioModel;
    use approx::assert_relative_eq;

    fn b() -> Channel {
        Channel::new("b", 2400.0, 22.0)
    }

    fn net(aps: &[(f64, f64)], clients: &[(f64, f64, f64)]) -> Network {
        Network::new(
            vec![b()],
            aps.iter()
                .enumerate()
                .map(|(k, &(x, y))| AccessPoint::new(format!("a{k}"), Point::new(x, y), 1))
                .collect(),
            clients
                .iter()
                .enumerate()
                .map(|(k, &(x, y, w))| Client::new(format!("c{k}"), Point::new(x, y), w))
                .collect(),
            RadioModel::default(),
        )
        .unwrap()
    }

    #[test]
    fn equal_weights_split_schedule_evenly() {
        let net = net(&[(0.0, 0.0)], &[(1.0, 0.0, 1.0); 4]);
        let config = Configuration::new(vec![0; 4], vec![0]);
        let agg = WeightAggregates::compute(&net, &config);
        assert_eq!(optimal_schedule(&net, &config, &agg), vec![0.25; 4]);
    }

    #[test]
    fn weighted_schedule() {
        let net = net(&[(0.0, 0.0)], &[(1.0, 0.0, 1.5), (2.0, 0.0, 0.5)]);
        let config = Configuration::new(vec![0, 0], vec![0]);
        let agg = WeightAggregates::compute(&net, &config);
        assert_eq!(optimal_schedule(&net, &config, &agg), vec![0.75, 0.25]);
    }

    #[test]
    fn single_client_gets_full_schedule_and_access() {
        let net = net(&[(0.0, 0.0)], &[(1.0, 0.0, 1.0)]);
        let config = Configuration::new(vec![0], vec![0]);
        let alloc = optimal_allocation(&net, &config, Scheme::ServerCentric);
        assert_eq!(alloc.schedule, vec![1.0]);
        assert_eq!(alloc.access, vec![1.0]);
        let rep = throughput(&net, &config, &alloc);
        assert_eq!(rep.rates, vec![11.0]);
        assert_relative_eq!(energy(&net, &config, Scheme::ServerCentric).expect_finite(), 11f64.ln());
    }

    #[test]
    fn two_interfering_aps_split_access() {
        let net = net(&[(0.0, 0.0), (150.0, 0.0)], &[(10.0, 0.0, 8.0), (140.0, 0.0, 8.0)]);
        let config = Configuration::new(vec![0, 1], vec![0, 0]);
        let alloc = optimal_allocation(&net, &config, Scheme::ServerCentric);
        assert_eq!(alloc.access, vec![0.5, 0.5]);
        let rep = throughput(&net, &config, &alloc);
        assert_eq!(rep.rates, vec![2.75, 2.75]);
    }

    #[test]
    fn clientless_ap_stays_silent() {
        let net = net(&[(0.0, 0.0), (150.0, 0.0)], &[(10.0, 0.0, 1.0)]);
        let config = Configuration::new(vec![0], vec![0, 0]);
        let alloc = optimal_allocation(&net, &config, Scheme::ServerCentric);
        assert_eq!(alloc.access, vec![1.0, 0.0]);
        assert_eq!(throughput(&net, &config, &alloc).rates, vec![11.0]);
    }

    #[test]
    fn deterministic_collision_is_infeasible() {
        let net = net(&[(0.0, 0.0), (150.0, 0.0)], &[(10.0, 0.0, 1.0), (140.0, 0.0, 1.0)]);
        let config = Configuration::new(vec![0, 1], vec![0, 0]);
        let alloc = Allocation {
            scheme: Scheme::ServerCentric,
            schedule: vec![1.0, 1.0],
            access: vec![1.0, 0.3],
        };
        let rep = throughput(&net, &config, &alloc);
        assert_eq!(rep.rates, vec![11.0 * 0.7, 0.0]);
        assert_eq!(rep.energy, Energy::Infeasible);
        let alloc = Allocation {
            access: vec![1.0, 1.0],
            ..alloc
        };
        assert_eq!(throughput(&net, &config, &alloc).rates, vec![0.0, 0.0]);
    }

    #[test]
    fn two_clients_one_ap_energy() {
        let net = net(&[(0.0, 0.0)], &[(1.0, 0.0, 1.0), (2.0, 0.0, 1.0)]);
        let config = Configuration::new(vec![0, 0], vec![0]);
        let u = energy(&net, &config, Scheme::ServerCentric).expect_finite();
        assert_relative_eq!(u, 2.0 * (11.0f64 / 2.0).ln(), max_relative = 1e-14);
        let rep = optimal_throughput(&net, &config, Scheme::ServerCentric);
        assert_relative_eq!(rep.energy.expect_finite(), u, max_relative = 1e-12);
    }

    #[test]
    fn unreachable_association_is_infeasible() {
        let net = net(&[(0.0, 0.0)], &[(400.0, 0.0, 1.0)]);
        let config = Configuration::new(vec![0], vec![0]);
        assert_eq!(energy(&net, &config, Scheme::ServerCentric), Energy::Infeasible);
        assert_eq!(energy(&net, &config, Scheme::ClientContention), Energy::Infeasible);
        assert_eq!(
            optimal_throughput(&net, &config, Scheme::ServerCentric).energy,
            Energy::Infeasible
        );
    }

    #[test]
    fn client_contention_two_clients_one_ap() {
        // p = 1/2 each; r = B * 1/2 * 1/2.
        let net = net(&[(0.0, 0.0)], &[(1.0, 0.0, 1.0), (2.0, 0.0, 1.0)]);
        let config = Configuration::new(vec![0, 0], vec![0]);
        let rep = optimal_throughput(&net, &config, Scheme::ClientContention);
        assert_eq!(rep.rates, vec![2.75, 2.75]);
        let u = energy(&net, &config, Scheme::ClientContention).expect_finite();
        assert_relative_eq!(u, 2.0 * 2.75f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn monte_carlo_trivial_cases() {
        let net1 = net(&[(0.0, 0.0)], &[(1.0, 0.0, 1.0)]);
        let config = Configuration::new(vec![0], vec![0]);
        let alloc = optimal_allocation(&net1, &config, Scheme::ServerCentric);
        assert_eq!(slot_monte_carlo(&net1, &config, &alloc, 1000, 3), vec![11.0]);
        let silent = Allocation {
            access: vec![0.0],
            ..alloc
        };
        assert_eq!(slot_monte_carlo(&net1, &config, &silent, 1000, 3), vec![0.0]);
    }

    #[test]
    fn both_forms_of_success_probability_agree() {
        // p_n prod_{m != n}(1 - p_m) == p_n/(1 - p_n) prod_{m}(1 - p_m) for p_n < 1.
        let ps = [0.3, 0.45, 0.1];
        let direct = ps[0] * (1.0 - ps[1]) * (1.0 - ps[2]);
        let ratio = ps[0] / (1.0 - ps[0]) * ps.iter().map(|p| 1.0 - p).product::<f64>();
        assert_relative_eq!(direct, ratio, max_relative = 1e-14);
    }
}
