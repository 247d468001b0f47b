//! Random instances shared by the integration tests.

#![allow(dead_code)]

use mbpf::model::{feasible_aps, AccessPoint, Channel, Client, Configuration, Network, Point};
use mbpf::radio::RadioModel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 802.11b, a 16 GHz channel and two white-space channels.
pub fn channel_pool() -> Vec<Channel> {
    vec![
        Channel::new("b", 2400.0, 22.0),
        Channel::new("hi", 16000.0, 50.0),
        Channel::new("ws1", 503.0, 6.0),
        Channel::new("ws2", 683.0, 6.0),
    ]
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub aps: usize,
    pub max_radios: u32,
    pub clients: usize,
    pub channels: usize,
    /// Side of the square the APs are dropped in.
    pub side: f64,
    /// Clients are placed within this distance of a random AP.
    pub spread: f64,
}

impl Shape {
    pub const fn new(aps: usize, clients: usize, channels: usize) -> Self {
        Shape {
            aps,
            max_radios: 1,
            clients,
            channels,
            side: 300.0,
            spread: 100.0,
        }
    }
}

/// Random network in which every client can reach some radio on 802.11b.
pub fn random_network<R: Rng>(rng: &mut R, shape: Shape) -> Network {
    let pool = channel_pool();
    let channels = pool[..shape.channels.min(pool.len())].to_vec();
    let aps: Vec<AccessPoint> = (0..shape.aps)
        .map(|k| {
            let p = Point::new(rng.gen_range(0.0..shape.side), rng.gen_range(0.0..shape.side));
            AccessPoint::new(format!("a{k}"), p, rng.gen_range(1..=shape.max_radios))
        })
        .collect();
    let clients = (0..shape.clients)
        .map(|k| {
            let home = aps.choose(rng).unwrap().position;
            let r = rng.gen_range(0.0..shape.spread);
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let p = Point::new(home.x + r * a.cos(), home.y + r * a.sin());
            let w = [0.5, 1.0, 1.5, 2.0][rng.gen_range(0..4)];
            Client::new(format!("c{k}"), p, w)
        })
        .collect();
    Network::new(channels, aps, clients, RadioModel::default()).unwrap()
}

/// Uniformly random channel map and feasible association; `None` if the
/// drawn channel map strands a client.
pub fn random_configuration<R: Rng>(rng: &mut R, net: &Network) -> Option<Configuration> {
    let channel: Vec<usize> = (0..net.n_vaps()).map(|_| rng.gen_range(0..net.n_channels())).collect();
    let mut association = Vec::with_capacity(net.n_clients());
    for i in 0..net.n_clients() {
        association.push(*feasible_aps(net, i, &channel).choose(rng)?);
    }
    Some(Configuration::new(association, channel))
}

/// Keeps drawing until a feasible configuration comes up.
pub fn feasible_configuration<R: Rng>(rng: &mut R, net: &Network) -> Configuration {
    loop {
        if let Some(c) = random_configuration(rng, net) {
            return c;
        }
    }
}

/// Random network plus a feasible configuration of it.
pub fn random_instance<R: Rng>(rng: &mut R, shape: Shape) -> (Network, Configuration) {
    let net = random_network(rng, shape);
    let config = feasible_configuration(rng, &net);
    (net, config)
}
