//! Mutable optimizer state and energy differences for single-entity moves.
//!
//! Exact differences only touch the blocks whose load or neighborhood load
//! changes: the source and target APs plus their same-channel interferers for
//! an association move, and the AP plus its interferers on the old and new
//! channel for a channel move.

use crate::error::ModelError;
use crate::fairness::{block_energy, energy_with, Energy, Scheme};
use crate::model::{Configuration, Network, WeightAggregates};

#[derive(Debug, Clone)]
pub struct State<'a> {
    net: &'a Network,
    scheme: Scheme,
    config: Configuration,
    agg: WeightAggregates,
    energy: f64,
}

impl<'a> State<'a> {
    /// Fails if the configuration leaves some client with zero rate.
    pub fn new(net: &'a Network, config: Configuration, scheme: Scheme) -> Result<Self, ModelError> {
        let agg = WeightAggregates::compute(net, &config);
        match energy_with(net, &config, &agg, scheme) {
            Energy::Finite(energy) => Ok(State {
                net,
                scheme,
                config,
                agg,
                energy,
            }),
            Energy::Infeasible => {
                let i = config.infeasible_clients(net)[0];
                Err(ModelError::UnreachableClient(net.clients[i].id.clone()))
            }
        }
    }

    pub fn net(&self) -> &'a Network {
        self.net
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn aggregates(&self) -> &WeightAggregates {
        &self.agg
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Candidate APs for `client`: every AP with nonzero rate on its channel.
    pub fn association_candidates(&self, client: usize) -> Vec<usize> {
        crate::model::feasible_aps(self.net, client, &self.config.channel)
    }

    /// `U(psi(n(i) = target)) - U(psi)`, `None` if the move is infeasible.
    pub fn delta_association(&self, client: usize, target: usize) -> Option<f64> {
        let net = self.net;
        let from = self.config.association[client];
        let to_ch = self.config.channel[target];
        if net.rate(client, target, to_ch) <= 0.0 {
            return None;
        }
        if target == from {
            return Some(0.0);
        }
        let from_ch = self.config.channel[from];
        let wi = net.weight(client);
        let near_from = self.same_channel_neighbors(from, from_ch);
        let near_to = self.same_channel_neighbors(target, to_ch);
        let mut affected: Vec<usize> = near_from.iter().chain(near_to.iter()).copied().collect();
        affected.sort_unstable();
        affected.dedup();

        let mut delta = 0.0;
        let mut members = Vec::new();
        for m in affected {
            let ch = self.config.channel[m];
            let old = self.block(m, ch, self.agg.members(m), self.agg.w(m), self.agg.z(m))?;
            let mut z = self.agg.z(m);
            if near_from.binary_search(&m).is_ok() {
                z -= wi;
            }
            if near_to.binary_search(&m).is_ok() {
                z += wi;
            }
            members.clear();
            members.extend(self.agg.members(m).iter().copied().filter(|&j| j != client));
            let mut w = self.agg.w(m);
            if m == from {
                w -= wi;
            }
            if m == target {
                w += wi;
                let pos = members.binary_search(&client).unwrap_err();
                members.insert(pos, client);
            }
            let new = self.block(m, ch, &members, w, z)?;
            delta += new - old;
        }
        Some(delta)
    }

    /// Approximate association score, equal to `U(psi(n(i) = target))` up to
    /// a client-specific constant when neighborhood loads dominate `w_i`.
    ///
    /// Server-centric: `w_i ln(B w_i / z^n prod_m (z^m - w^m) / z^m)` over the
    /// target's same-channel interferers, with post-move aggregates.
    /// Client-contention: the client's own post-move log-rate plus the
    /// `-z^n_{-i} ln((z^n_{-i} + w_i) / z^n_{-i})` correction.
    pub fn approx_association_score(&self, client: usize, target: usize) -> Option<f64> {
        let net = self.net;
        let ch = self.config.channel[target];
        let b = net.rate(client, target, ch);
        if b <= 0.0 {
            return None;
        }
        let wi = net.weight(client);
        let from = self.config.association[client];
        let from_ch = self.config.channel[from];
        // Post-move load of m and neighborhood load of m.
        let moved_w = |m: usize| {
            let mut w = self.agg.w(m);
            if m == from {
                w -= wi;
            }
            if m == target {
                w += wi;
            }
            w
        };
        let moved_z = |m: usize| {
            let mc = self.config.channel[m];
            let mut z = self.agg.z(m);
            if mc == from_ch && net.graph.interferes(from, m, mc) {
                z -= wi;
            }
            if mc == ch && net.graph.interferes(target, m, mc) {
                z += wi;
            }
            z
        };
        let neighbors = self.same_channel_neighbors(target, ch);
        match self.scheme {
            Scheme::ServerCentric => {
                let mut log_sum = (b * wi / moved_z(target)).ln();
                for &m in &neighbors {
                    if m == target {
                        continue;
                    }
                    let z = moved_z(m);
                    log_sum += ((z - moved_w(m)).max(0.0) / z).ln();
                }
                Some(wi * log_sum)
            }
            Scheme::ClientContention => {
                let z_minus = self.agg.z_without_client(net, &self.config, target, client);
                let mut log_sum = (b * wi / (z_minus + wi)).ln();
                for &m in &neighbors {
                    // Every other client j at m contributes (z_{-i} - w_j + w_i) / (z_{-i} + w_i).
                    let zm = self.agg.z_without_client(net, &self.config, m, client);
                    for &j in self.agg.members(m) {
                        if j == client {
                            continue;
                        }
                        let wj = net.weight(j);
                        log_sum += ((zm - wj + wi) / (zm + wi)).ln();
                    }
                }
                let tail = if z_minus > 0.0 {
                    z_minus * ((z_minus + wi) / z_minus).ln()
                } else {
                    0.0
                };
                Some(wi * log_sum - tail)
            }
        }
    }

    /// `U(psi(c(n) = target)) - U(psi)`, `None` if some client of `n` has zero
    /// rate on the target channel.
    pub fn delta_channel(&self, ap: usize, target: usize) -> Option<f64> {
        let net = self.net;
        if self.agg.members(ap).iter().any(|&i| net.rate(i, ap, target) <= 0.0) {
            return None;
        }
        let from = self.config.channel[ap];
        if target == from {
            return Some(0.0);
        }
        let wn = self.agg.w(ap);
        if wn == 0.0 {
            return Some(0.0);
        }
        let near_old = self.same_channel_neighbors(ap, from);
        let mut near_new: Vec<usize> = net
            .graph
            .neighbors(ap, target)
            .iter()
            .copied()
            .filter(|&m| m != ap && self.config.channel[m] == target)
            .collect();
        near_new.sort_unstable();

        let mut delta = 0.0;
        for &m in near_old.iter().filter(|&&m| m != ap) {
            let (w, z) = (self.agg.w(m), self.agg.z(m));
            let old = self.block(m, from, self.agg.members(m), w, z)?;
            let new = self.block(m, from, self.agg.members(m), w, z - wn)?;
            delta += new - old;
        }
        for &m in &near_new {
            let (w, z) = (self.agg.w(m), self.agg.z(m));
            let old = self.block(m, target, self.agg.members(m), w, z)?;
            let new = self.block(m, target, self.agg.members(m), w, z + wn)?;
            delta += new - old;
        }
        let z_new = wn + near_new.iter().map(|&m| self.agg.w(m)).sum::<f64>();
        let old = self.block(ap, from, self.agg.members(ap), wn, self.agg.z(ap))?;
        let new = self.block(ap, target, self.agg.members(ap), wn, z_new)?;
        Some(delta + new - old)
    }

    pub fn apply_association(&mut self, client: usize, target: usize) {
        let from = self.config.association[client];
        if from == target {
            return;
        }
        self.config.association[client] = target;
        self.agg.apply_association(self.net, &self.config, client, from);
        self.refresh_energy();
    }

    pub fn apply_channel(&mut self, ap: usize, target: usize) {
        let from = self.config.channel[ap];
        if from == target {
            return;
        }
        self.config.channel[ap] = target;
        self.agg.apply_channel(self.net, &self.config, ap, from);
        self.refresh_energy();
    }

    fn refresh_energy(&mut self) {
        self.energy = energy_with(self.net, &self.config, &self.agg, self.scheme)
            .value()
            .expect("applied move left a client with zero rate");
    }

    /// Same-channel interferers of `n` on `channel`, `n` included, ascending.
    fn same_channel_neighbors(&self, n: usize, channel: usize) -> Vec<usize> {
        self.net
            .graph
            .neighbors(n, channel)
            .iter()
            .copied()
            .filter(|&m| m == n || self.config.channel[m] == channel)
            .collect()
    }

    fn block(&self, n: usize, channel: usize, members: &[usize], w: f64, z: f64) -> Option<f64> {
        block_energy(self.scheme, members, self.net.weights(), w, z, |i| {
            self.net.rate(i, n, channel)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::energy;
    use crate::model::{AccessPoint, Channel, Client, Point};
    use crate::radio::RadioModel;
    use approx::assert_relative_eq;

    fn two_isolated_aps() -> Network {
        // 16 GHz channel: APs 300 m apart do not interfere.
        Network::new(
            vec![Channel::new("hi", 16000.0, 50.0)],
            vec![
                AccessPoint::new("a", Point::new(0.0, 0.0), 1),
                AccessPoint::new("b", Point::new(300.0, 0.0), 1),
            ],
            vec![Client::new("c", Point::new(0.0, 0.0), 1.0)],
            RadioModel::default(),
        )
        .unwrap()
    }

    #[test]
    fn stay_is_zero() {
        let net = two_isolated_aps();
        let s = State::new(&net, Configuration::new(vec![0], vec![0, 0]), Scheme::ServerCentric).unwrap();
        assert_eq!(s.delta_association(0, 0), Some(0.0));
        assert_eq!(s.delta_association(0, 1), None);
        assert_eq!(s.delta_channel(0, 0), Some(0.0));
    }

    #[test]
    fn move_to_faster_isolated_ap() {
        // Client between an 11 Mbps AP and a 22 Mbps AP, neither interfering.
        let net = Network::new(
            vec![Channel::new("b", 2400.0, 22.0), Channel::new("w", 2400.0, 44.0)],
            vec![
                AccessPoint::new("a", Point::new(0.0, 0.0), 1),
                AccessPoint::new("b", Point::new(40.0, 0.0), 1),
            ],
            vec![Client::new("c", Point::new(20.0, 0.0), 1.0)],
            RadioModel::default(),
        )
        .unwrap();
        // Different channels, so the two APs do not share a collision domain.
        let s = State::new(&net, Configuration::new(vec![0], vec![0, 1]), Scheme::ServerCentric).unwrap();
        assert_relative_eq!(s.delta_association(0, 1).unwrap(), 2f64.ln(), max_relative = 1e-12);
        for scheme in [Scheme::ServerCentric, Scheme::ClientContention] {
            let s = State::new(&net, Configuration::new(vec![0], vec![0, 1]), scheme).unwrap();
            assert_relative_eq!(s.delta_association(0, 1).unwrap(), 2f64.ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn channel_upgrade_isolated() {
        let net = Network::new(
            vec![Channel::new("b", 2400.0, 22.0), Channel::new("w", 2400.0, 50.0)],
            vec![AccessPoint::new("a", Point::new(0.0, 0.0), 1)],
            vec![Client::new("c", Point::new(10.0, 0.0), 1.0)],
            RadioModel::default(),
        )
        .unwrap();
        let s = State::new(&net, Configuration::new(vec![0], vec![0]), Scheme::ServerCentric).unwrap();
        assert_relative_eq!(
            s.delta_channel(0, 1).unwrap(),
            (25.0f64 / 11.0).ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn isolated_sole_client_approx_score() {
        let net = two_isolated_aps();
        let s = State::new(&net, Configuration::new(vec![0], vec![0, 0]), Scheme::ServerCentric).unwrap();
        assert_relative_eq!(
            s.approx_association_score(0, 0).unwrap(),
            25f64.ln(),
            max_relative = 1e-12
        );
        let s = State::new(&net, Configuration::new(vec![0], vec![0, 0]), Scheme::ClientContention).unwrap();
        assert_relative_eq!(
            s.approx_association_score(0, 0).unwrap(),
            25f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn applied_moves_match_recompute() {
        let net = Network::new(
            vec![Channel::new("b", 2400.0, 22.0), Channel::new("hi", 16000.0, 50.0)],
            vec![
                AccessPoint::new("a", Point::new(0.0, 0.0), 1),
                AccessPoint::new("b", Point::new(75.0, 0.0), 1),
                AccessPoint::new("c", Point::new(150.0, 0.0), 1),
            ],
            (0..6)
                .map(|k| {
                    Client::new(
                        format!("c{k}"),
                        Point::new(20.0 + 22.0 * k as f64, 0.0),
                        1.0 + k as f64 * 0.25,
                    )
                })
                .collect(),
            RadioModel::default(),
        )
        .unwrap();
        for scheme in [Scheme::ServerCentric, Scheme::ClientContention] {
            let mut s = State::new(&net, Configuration::new(vec![0, 0, 1, 1, 2, 2], vec![0, 0, 0]), scheme).unwrap();
            let before = s.energy();
            let d = s.delta_association(2, 0).unwrap();
            s.apply_association(2, 0);
            assert_relative_eq!(s.energy() - before, d, max_relative = 1e-9);
            assert_eq!(*s.aggregates(), WeightAggregates::compute(&net, s.config()));
            let before = s.energy();
            let d = s.delta_channel(1, 1).unwrap_or(f64::NAN);
            if d.is_finite() {
                s.apply_channel(1, 1);
                assert_relative_eq!(s.energy() - before, d, max_relative = 1e-9, epsilon = 1e-12);
                assert_relative_eq!(
                    s.energy(),
                    energy(&net, s.config(), scheme).expect_finite(),
                    max_relative = 1e-12
                );
            }
        }
    }
}
