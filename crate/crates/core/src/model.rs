//! Domain types: channels, access points, clients, the virtual single-radio
//! AP reduction, interference sets, configurations and weight aggregates.
//!
//! Everything is index based once a [`Network`] is built. Client `i`,
//! virtual AP `n` and channel `c` are positions in the network's vectors,
//! and every iteration over a set follows ascending index order so results
//! are bit-reproducible.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::radio::{channel_profile, ChannelProfile, RadioModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub id: String,
    pub center_frequency_mhz: f64,
    pub bandwidth_mhz: f64,
}

impl Channel {
    pub fn new(id: impl Into<String>, center_frequency_mhz: f64, bandwidth_mhz: f64) -> Self {
        Channel {
            id: id.into(),
            center_frequency_mhz,
            bandwidth_mhz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    pub id: String,
    pub position: Point,
    pub radio_count: u32,
}

impl AccessPoint {
    pub fn new(id: impl Into<String>, position: Point, radio_count: u32) -> Self {
        AccessPoint {
            id: id.into(),
            position,
            radio_count,
        }
    }
}

/// One radio of a physical AP, treated as an independent co-located AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualAp {
    pub id: String,
    /// Index of the parent in the AP list.
    pub parent: usize,
    pub radio: u32,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Client {
    pub id: String,
    pub position: Point,
    pub weight: f64,
}

impl Client {
    pub fn new(id: impl Into<String>, position: Point, weight: f64) -> Self {
        Client {
            id: id.into(),
            position,
            weight,
        }
    }
}

/// Splits every AP into `radio_count` virtual APs, parent order then radio
/// index.
pub fn expand_virtual_aps(aps: &[AccessPoint]) -> Vec<VirtualAp> {
    aps.iter()
        .enumerate()
        .flat_map(|(parent, ap)| {
            (0..ap.radio_count).map(move |radio| VirtualAp {
                id: if ap.radio_count == 1 {
                    ap.id.clone()
                } else {
                    format!("{}/r{}", ap.id, radio)
                },
                parent,
                radio,
                position: ap.position,
            })
        })
        .collect()
}

/// Per channel, per virtual AP: the sorted set of virtual APs within the
/// channel's interference range (self included).
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceGraph {
    sets: Vec<Vec<Vec<usize>>>,
}

impl InterferenceGraph {
    pub fn build(vaps: &[VirtualAp], profiles: &[ChannelProfile]) -> Self {
        let sets = profiles
            .iter()
            .map(|profile| {
                let range = profile.interference_range_m;
                (0..vaps.len())
                    .map(|n| {
                        (0..vaps.len())
                            .filter(|&m| m == n || vaps[n].position.distance(vaps[m].position) <= range)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        InterferenceGraph { sets }
    }

    /// `M^{n,c}`, ascending.
    pub fn neighbors(&self, n: usize, c: usize) -> &[usize] {
        &self.sets[c][n]
    }

    pub fn interferes(&self, n: usize, m: usize, c: usize) -> bool {
        self.sets[c][n].binary_search(&m).is_ok()
    }

    pub fn channel_count(&self) -> usize {
        self.sets.len()
    }

    pub fn vap_count(&self) -> usize {
        self.sets.first().map_or(0, Vec::len)
    }
}

/// Builds the interference graph directly from channels and a radio model.
pub fn build_interference_graph(vaps: &[VirtualAp], channels: &[Channel], radio: &RadioModel) -> InterferenceGraph {
    let profiles: Vec<_> = channels.iter().map(|c| channel_profile(c, radio)).collect();
    InterferenceGraph::build(vaps, &profiles)
}

/// Dense `B_{i,n,c}` table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    rates: Vec<f64>,
    n_vaps: usize,
    n_channels: usize,
}

impl RateTable {
    pub fn build(clients: &[Client], vaps: &[VirtualAp], profiles: &[ChannelProfile]) -> Self {
        let mut rates = Vec::with_capacity(clients.len() * vaps.len() * profiles.len());
        for client in clients {
            for vap in vaps {
                let d = client.position.distance(vap.position);
                rates.extend(profiles.iter().map(|p| p.rate_at(d)));
            }
        }
        RateTable {
            rates,
            n_vaps: vaps.len(),
            n_channels: profiles.len(),
        }
    }

    #[inline]
    pub fn get(&self, client: usize, vap: usize, channel: usize) -> f64 {
        self.rates[(client * self.n_vaps + vap) * self.n_channels + channel]
    }
}

/// An immutable, fully derived problem instance.
#[derive(Debug, Clone)]
pub struct Network {
    pub channels: Vec<Channel>,
    pub aps: Vec<AccessPoint>,
    pub vaps: Vec<VirtualAp>,
    pub clients: Vec<Client>,
    pub radio: RadioModel,
    pub profiles: Vec<ChannelProfile>,
    pub graph: InterferenceGraph,
    pub rates: RateTable,
    /// Channel a virtual AP starts on, when pinned by the scenario.
    pub initial_channel: Vec<Option<usize>>,
    weights: Vec<f64>,
}

impl Network {
    pub fn new(
        channels: Vec<Channel>,
        aps: Vec<AccessPoint>,
        clients: Vec<Client>,
        radio: RadioModel,
    ) -> Result<Self, ModelError> {
        validate_parts(&channels, &aps, &clients, &radio)?;
        let vaps = expand_virtual_aps(&aps);
        let profiles: Vec<_> = channels.iter().map(|c| channel_profile(c, &radio)).collect();
        let graph = InterferenceGraph::build(&vaps, &profiles);
        let rates = RateTable::build(&clients, &vaps, &profiles);
        let weights = clients.iter().map(|c| c.weight).collect();
        let initial_channel = vec![None; vaps.len()];
        Ok(Network {
            channels,
            aps,
            vaps,
            clients,
            radio,
            profiles,
            graph,
            rates,
            initial_channel,
            weights,
        })
    }

    pub fn n_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn n_vaps(&self) -> usize {
        self.vaps.len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, client: usize) -> f64 {
        self.weights[client]
    }

    #[inline]
    pub fn rate(&self, client: usize, vap: usize, channel: usize) -> f64 {
        self.rates.get(client, vap, channel)
    }

    /// Rate client `i` gets from its associated AP under `config`.
    pub fn served_rate(&self, config: &Configuration, client: usize) -> f64 {
        let n = config.association[client];
        self.rate(client, n, config.channel[n])
    }

    /// Whether client `i` can be served by some virtual AP on some channel.
    pub fn is_reachable(&self, client: usize) -> bool {
        (0..self.n_vaps()).any(|n| (0..self.n_channels()).any(|c| self.rate(client, n, c) > 0.0))
    }
}

fn validate_parts(
    channels: &[Channel],
    aps: &[AccessPoint],
    clients: &[Client],
    radio: &RadioModel,
) -> Result<(), ModelError> {
    radio.validate()?;
    if channels.is_empty() {
        return Err(ModelError::Empty("channels"));
    }
    if aps.is_empty() {
        return Err(ModelError::Empty("access points"));
    }
    let field = |kind, id: &str, field, reason: &str| ModelError::InvalidField {
        kind,
        id: id.to_string(),
        field,
        reason: reason.to_string(),
    };
    check_unique("channel", channels.iter().map(|c| c.id.as_str()))?;
    check_unique("ap", aps.iter().map(|a| a.id.as_str()))?;
    check_unique("client", clients.iter().map(|c| c.id.as_str()))?;
    for c in channels {
        if !(c.center_frequency_mhz > 0.0 && c.center_frequency_mhz.is_finite()) {
            return Err(field("channel", &c.id, "center_frequency_mhz", "must be positive"));
        }
        if !(c.bandwidth_mhz > 0.0 && c.bandwidth_mhz.is_finite()) {
            return Err(field("channel", &c.id, "bandwidth_mhz", "must be positive"));
        }
    }
    for a in aps {
        if a.radio_count == 0 {
            return Err(field("ap", &a.id, "radio_count", "must be at least 1"));
        }
        if !(a.position.x.is_finite() && a.position.y.is_finite()) {
            return Err(field("ap", &a.id, "position", "must be finite"));
        }
    }
    for c in clients {
        if !(c.weight > 0.0 && c.weight.is_finite()) {
            return Err(field("client", &c.id, "weight", "must be positive"));
        }
        if !(c.position.x.is_finite() && c.position.y.is_finite()) {
            return Err(field("client", &c.id, "position", "must be finite"));
        }
    }
    Ok(())
}

fn check_unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(ModelError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

/// Client association `n(i)` and channel selection `c(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub association: Vec<usize>,
    pub channel: Vec<usize>,
}

impl Configuration {
    pub fn new(association: Vec<usize>, channel: Vec<usize>) -> Self {
        Configuration { association, channel }
    }

    /// Clients whose associated AP gives them zero rate on its current channel.
    pub fn infeasible_clients(&self, net: &Network) -> Vec<usize> {
        (0..net.n_clients())
            .filter(|&i| net.served_rate(self, i) <= 0.0)
            .collect()
    }

    pub fn is_feasible(&self, net: &Network) -> bool {
        (0..net.n_clients()).all(|i| net.served_rate(self, i) > 0.0)
    }

    /// Stable 64-bit digest used to tag trajectory records.
    pub fn digest(&self) -> u64 {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for &a in &self.association {
            h.update((a as u64).to_le_bytes());
        }
        h.update(u64::MAX.to_le_bytes());
        for &c in &self.channel {
            h.update((c as u64).to_le_bytes());
        }
        let out = h.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&out[..8]);
        u64::from_le_bytes(bytes)
    }
}

/// `N_i`: virtual APs with nonzero rate to `client` on their current channel.
pub fn feasible_aps(net: &Network, client: usize, channel_map: &[usize]) -> Vec<usize> {
    (0..net.n_vaps())
        .filter(|&n| net.rate(client, n, channel_map[n]) > 0.0)
        .collect()
}

/// `M_i`: every virtual AP that interferes, on some channel, with an AP in `N_i`.
pub fn client_neighborhood(net: &Network, client: usize, channel_map: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = feasible_aps(net, client, channel_map)
        .into_iter()
        .flat_map(|n| (0..net.n_channels()).flat_map(move |c| net.graph.neighbors(n, c).iter().copied()))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Per virtual AP load `w^n` and same-channel neighborhood load `z^n`.
///
/// Every entry is a sum taken in ascending index order, so incrementally
/// refreshed values are bit-identical to a full recomputation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAggregates {
    members: Vec<Vec<usize>>,
    w: Vec<f64>,
    z: Vec<f64>,
}

impl WeightAggregates {
    pub fn compute(net: &Network, config: &Configuration) -> Self {
        let mut members = vec![Vec::new(); net.n_vaps()];
        for (i, &n) in config.association.iter().enumerate() {
            members[n].push(i);
        }
        let w: Vec<f64> = members.iter().map(|m| m.iter().map(|&i| net.weight(i)).sum()).collect();
        let z = (0..net.n_vaps())
            .map(|n| neighborhood_sum(net, config, n, &w))
            .collect();
        WeightAggregates { members, w, z }
    }

    #[inline]
    pub fn w(&self, n: usize) -> f64 {
        self.w[n]
    }

    #[inline]
    pub fn z(&self, n: usize) -> f64 {
        self.z[n]
    }

    pub fn w_all(&self) -> &[f64] {
        &self.w
    }

    pub fn z_all(&self) -> &[f64] {
        &self.z
    }

    /// Clients associated with `n`, ascending.
    pub fn members(&self, n: usize) -> &[usize] {
        &self.members[n]
    }

    /// `w^n_{-i}`.
    pub fn w_without_client(&self, net: &Network, n: usize, client: usize) -> f64 {
        self.members[n]
            .iter()
            .filter(|&&j| j != client)
            .map(|&j| net.weight(j))
            .sum()
    }

    /// `z^n_{-i}`: neighborhood load of `n` with client `i`'s weight removed.
    pub fn z_without_client(&self, net: &Network, config: &Configuration, n: usize, client: usize) -> f64 {
        let c = config.channel[n];
        net.graph
            .neighbors(n, c)
            .iter()
            .filter(|&&m| config.channel[m] == c)
            .map(|&m| self.w_without_client(net, m, client))
            .sum()
    }

    /// `z^m_{-n}`: neighborhood load of `m` with all of AP `n`'s load removed.
    pub fn z_without_ap(&self, net: &Network, config: &Configuration, m: usize, n: usize) -> f64 {
        let c = config.channel[m];
        net.graph
            .neighbors(m, c)
            .iter()
            .filter(|&&o| o != n && config.channel[o] == c)
            .map(|&o| self.w[o])
            .sum()
    }

    /// Refreshes after `client` moved from `from` to its current AP in `config`.
    pub fn apply_association(&mut self, net: &Network, config: &Configuration, client: usize, from: usize) {
        let to = config.association[client];
        if to == from {
            return;
        }
        if let Ok(pos) = self.members[from].binary_search(&client) {
            self.members[from].remove(pos);
        }
        if let Err(pos) = self.members[to].binary_search(&client) {
            self.members[to].insert(pos, client);
        }
        for n in [from, to] {
            self.w[n] = self.members[n].iter().map(|&i| net.weight(i)).sum();
        }
        let mut touched: Vec<usize> = Vec::new();
        for n in [from, to] {
            let c = config.channel[n];
            touched.extend(net.graph.neighbors(n, c).iter().filter(|&&m| config.channel[m] == c));
        }
        self.refresh_z(net, config, touched);
    }

    /// Refreshes after AP `n` moved from channel `from` to its current channel.
    pub fn apply_channel(&mut self, net: &Network, config: &Configuration, n: usize, from: usize) {
        let to = config.channel[n];
        if to == from {
            return;
        }
        let mut touched = vec![n];
        for c in [from, to] {
            touched.extend(net.graph.neighbors(n, c).iter().filter(|&&m| config.channel[m] == c));
        }
        self.refresh_z(net, config, touched);
    }

    fn refresh_z(&mut self, net: &Network, config: &Configuration, mut touched: Vec<usize>) {
        touched.sort_unstable();
        touched.dedup();
        for m in touched {
            self.z[m] = neighborhood_sum(net, config, m, &self.w);
        }
    }
}

fn neighborhood_sum(net: &Network, config: &Configuration, n: usize, w: &[f64]) -> f64 {
    let c = config.channel[n];
    net.graph
        .neighbors(n, c)
        .iter()
        .filter(|&&m| config.channel[m] == c)
        .map(|&m| w[m])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Channel {
        Channel::new("b", 2400.0, 22.0)
    }

    #[test]
    fn expansion_orders_by_parent_then_radio() {
        let aps = vec![
            AccessPoint::new("a", Point::new(0.0, 0.0), 2),
            AccessPoint::new("b", Point::new(5.0, 0.0), 1),
        ];
        let v = expand_virtual_aps(&aps);
        assert_eq!(v.len(), 3);
        assert_eq!((v[0].parent, v[0].radio), (0, 0));
        assert_eq!((v[1].parent, v[1].radio), (0, 1));
        assert_eq!(v[0].position, v[1].position);
        assert_eq!(v[2].id, "b");
    }

    #[test]
    fn expansion_grid_of_two_radio_aps() {
        let aps: Vec<_> = (0..16)
            .map(|k| {
                AccessPoint::new(
                    format!("ap{k}"),
                    Point::new((k % 4) as f64 * 300.0, (k / 4) as f64 * 300.0),
                    2,
                )
            })
            .collect();
        assert_eq!(expand_virtual_aps(&aps).len(), 32);
    }

    #[test]
    fn interference_on_80211b() {
        let aps = vec![
            AccessPoint::new("a", Point::new(0.0, 0.0), 1),
            AccessPoint::new("b", Point::new(150.0, 0.0), 1),
        ];
        let g = build_interference_graph(&expand_virtual_aps(&aps), &[b()], &RadioModel::default());
        assert_eq!(g.neighbors(0, 0), &[0, 1]);
        assert_eq!(g.neighbors(1, 0), &[0, 1]);
    }

    #[test]
    fn single_ap_interferes_only_with_itself() {
        let aps = vec![AccessPoint::new("a", Point::new(0.0, 0.0), 1)];
        let g = build_interference_graph(&expand_virtual_aps(&aps), &[b()], &RadioModel::default());
        assert_eq!(g.neighbors(0, 0), &[0]);
    }

    #[test]
    fn sixteen_ghz_range_separates_300m() {
        let aps = vec![
            AccessPoint::new("a", Point::new(0.0, 0.0), 1),
            AccessPoint::new("b", Point::new(300.0, 0.0), 1),
        ];
        let hi = Channel::new("hi", 16000.0, 50.0);
        let g = build_interference_graph(&expand_virtual_aps(&aps), &[hi], &RadioModel::default());
        assert_eq!(g.neighbors(0, 0), &[0]);
        assert!(!g.interferes(1, 0, 0));
    }

    #[test]
    fn co_located_radios_always_interfere() {
        let aps = vec![AccessPoint::new("a", Point::new(0.0, 0.0), 2)];
        let hi = Channel::new("hi", 16000.0, 50.0);
        let g = build_interference_graph(&expand_virtual_aps(&aps), &[b(), hi], &RadioModel::default());
        for c in 0..2 {
            assert_eq!(g.neighbors(0, c), &[0, 1]);
        }
    }

    fn line3() -> Network {
        let aps = vec![
            AccessPoint::new("a0", Point::new(0.0, 0.0), 1),
            AccessPoint::new("a1", Point::new(75.0, 0.0), 1),
            AccessPoint::new("a2", Point::new(150.0, 0.0), 1),
        ];
        let clients = vec![
            Client::new("c0", Point::new(75.0, 0.0), 1.0),
            Client::new("c1", Point::new(35.0, 0.0), 1.0),
            Client::new("c2", Point::new(-200.0, 0.0), 1.0),
        ];
        Network::new(vec![b()], aps, clients, RadioModel::default()).unwrap()
    }

    #[test]
    fn feasible_sets() {
        let net = line3();
        let channels = vec![0, 0, 0];
        assert_eq!(feasible_aps(&net, 0, &channels), vec![0, 1, 2]);
        assert_eq!(feasible_aps(&net, 2, &channels), Vec::<usize>::new());
        assert_eq!(client_neighborhood(&net, 0, &channels), vec![0, 1, 2]);
    }

    #[test]
    fn single_ap_client_at_35m() {
        let net = Network::new(
            vec![b()],
            vec![AccessPoint::new("a", Point::new(0.0, 0.0), 1)],
            vec![Client::new("c", Point::new(35.0, 0.0), 1.0)],
            RadioModel::default(),
        )
        .unwrap();
        assert_eq!(feasible_aps(&net, 0, &[0]), vec![0]);
        assert_eq!(net.rate(0, 0, 0), 11.0);
    }

    #[test]
    fn invalid_parts_rejected() {
        let aps = vec![AccessPoint::new("a", Point::new(0.0, 0.0), 1)];
        let err = Network::new(
            vec![b()],
            aps.clone(),
            vec![Client::new("c", Point::new(0.0, 0.0), 0.0)],
            RadioModel::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidField { field: "weight", .. }));
        let err = Network::new(vec![b(), b()], aps.clone(), vec![], RadioModel::default()).unwrap_err();
        assert!(matches!(err, ModelError::DuplicateId { kind: "channel", .. }));
        let zero = vec![AccessPoint::new("a", Point::new(0.0, 0.0), 0)];
        assert!(Network::new(vec![b()], zero, vec![], RadioModel::default()).is_err());
    }

    #[test]
    fn aggregates_and_leave_one_out() {
        let net = line3();
        let config = Configuration::new(vec![1, 1, 0], vec![0, 0, 0]);
        let agg = WeightAggregates::compute(&net, &config);
        assert_eq!(agg.w_all(), &[1.0, 2.0, 0.0]);
        assert_eq!(agg.z_all(), &[3.0, 3.0, 3.0]);
        assert_eq!(agg.w_without_client(&net, 1, 0), 1.0);
        assert_eq!(agg.w_without_client(&net, 0, 0), 1.0);
        assert_eq!(agg.z_without_client(&net, &config, 2, 0), 2.0);
        assert_eq!(agg.z_without_ap(&net, &config, 0, 1), 1.0);
        for n in 0..3 {
            assert!(agg.w(n) <= agg.z(n));
        }
    }
}
