//! Scenario definitions: built-in experiments, a TOML scenario format and
//! result writers (per-iteration CSV, JSON summary).
//!
//! # Scenario file
//!
//! ```toml
//! format = "mbpf-scenario/1"
//! name = "example"
//! default_weight = 1.0          # weight of generated clients no rule matches
//!
//! [radio]                       # optional; every field optional
//! path_loss_alpha = 3.5
//! base_frequency_mhz = 2400.0
//! base_bandwidth_mhz = 22.0
//! carrier_sense_factor = 23.42
//! base_interference_range_m = 369.0
//! base_tiers = [{ rate_mbps = 11.0, range_m = 50.0 }, ...]
//!
//! [[channel]]
//! id = "A"
//! center_frequency_mhz = 524.0
//! bandwidth_mhz = 12.0
//!
//! [[ap]]
//! id = "ap0"
//! x = 0.0
//! y = 0.0
//! radios = 2
//! initial_channels = ["A", "A"] # optional, one per radio
//!
//! [[client]]                    # explicit clients
//! id = "c0"
//! x = 10.0
//! y = 0.0
//! weight = 1.0
//!
//! [generator]                   # optional random clients
//! seed = 7
//! [[generator.region]]
//! x_min = 0.0
//! x_max = 300.0
//! y_min = 0.0
//! y_max = 300.0
//! count = 16
//!
//! [[weight_rule]]               # first matching rule sets a generated client's weight
//! x_min = 0.0
//! x_max = 300.0
//! y_min = 0.0
//! y_max = 900.0
//! weight = 1.5
//! ```
//!
//! Generated clients are drawn after the explicit ones, region by region in
//! file order, `x` then `y` for each client, uniformly over the closed
//! rectangle from a ChaCha8 stream seeded with `generator.seed`. They are
//! named `g<region>_<k>`.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annealing::RunResult;
use crate::error::{ModelError, ScenarioError};
use crate::model::{AccessPoint, Channel, Client, Network, Point};
use crate::radio::RadioModel;

pub const FORMAT_VERSION: &str = "mbpf-scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorRegion {
    #[serde(flatten)]
    pub rect: Rect,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientGenerator {
    pub seed: u64,
    #[serde(default, rename = "region")]
    pub regions: Vec<GeneratorRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightRule {
    #[serde(flatten)]
    pub rect: Rect,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
    #[serde(default = "one")]
    pub radios: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_channels: Option<Vec<String>>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// A scenario as written on disk; [`Scenario::network`] materializes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    pub name: String,
    #[serde(default = "default_weight")]
    pub default_weight: f64,
    #[serde(default)]
    pub radio: RadioModel,
    #[serde(rename = "channel")]
    pub channels: Vec<Channel>,
    #[serde(rename = "ap")]
    pub aps: Vec<ApSpec>,
    #[serde(default, rename = "client")]
    pub clients: Vec<ClientSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<ClientGenerator>,
    #[serde(default, rename = "weight_rule")]
    pub weight_rules: Vec<WeightRule>,
}

fn default_weight() -> f64 {
    1.0
}

impl Scenario {
    pub fn new(name: impl Into<String>, channels: Vec<Channel>, aps: Vec<ApSpec>) -> Self {
        Scenario {
            format: FORMAT_VERSION.to_string(),
            name: name.into(),
            default_weight: 1.0,
            radio: RadioModel::default(),
            channels,
            aps,
            clients: Vec::new(),
            generator: None,
            weight_rules: Vec::new(),
        }
    }

    /// Explicit clients followed by generated ones.
    pub fn materialize_clients(&self) -> Vec<Client> {
        let mut out: Vec<Client> = self
            .clients
            .iter()
            .map(|c| Client::new(c.id.clone(), Point::new(c.x, c.y), c.weight))
            .collect();
        if let Some(gen) = &self.generator {
            let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);
            for (r, region) in gen.regions.iter().enumerate() {
                let rect = region.rect;
                for k in 0..region.count {
                    let x = rng.gen_range(rect.x_min..=rect.x_max);
                    let y = rng.gen_range(rect.y_min..=rect.y_max);
                    let p = Point::new(x, y);
                    let weight = self
                        .weight_rules
                        .iter()
                        .find(|rule| rule.rect.contains(p))
                        .map_or(self.default_weight, |rule| rule.weight);
                    out.push(Client::new(format!("g{r}_{k}"), p, weight));
                }
            }
        }
        out
    }

    pub fn access_points(&self) -> Vec<AccessPoint> {
        self.aps
            .iter()
            .map(|a| AccessPoint::new(a.id.clone(), Point::new(a.x, a.y), a.radios))
            .collect()
    }

    /// Validates and builds the derived network.
    pub fn network(&self) -> Result<Network, ModelError> {
        self.validate()?;
        let mut net = Network::new(
            self.channels.clone(),
            self.access_points(),
            self.materialize_clients(),
            self.radio.clone(),
        )?;
        let mut pinned = Vec::with_capacity(net.n_vaps());
        for ap in &self.aps {
            match &ap.initial_channels {
                Some(ids) => {
                    for id in ids {
                        let c = self
                            .channels
                            .iter()
                            .position(|ch| &ch.id == id)
                            .ok_or_else(|| ModelError::UnknownChannel(id.clone()))?;
                        pinned.push(Some(c));
                    }
                }
                None => pinned.extend((0..ap.radios).map(|_| None)),
            }
        }
        net.initial_channel = pinned;
        Ok(net)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let field = |kind, id: &str, field, reason: String| ModelError::InvalidField {
            kind,
            id: id.to_string(),
            field,
            reason,
        };
        if !(self.default_weight > 0.0) {
            return Err(field(
                "scenario",
                &self.name,
                "default_weight",
                "must be positive".into(),
            ));
        }
        for ap in &self.aps {
            if let Some(ids) = &ap.initial_channels {
                if ids.len() != ap.radios as usize {
                    return Err(field(
                        "ap",
                        &ap.id,
                        "initial_channels",
                        format!("has {} entries for {} radios", ids.len(), ap.radios),
                    ));
                }
                if let Some(bad) = ids.iter().find(|id| !self.channels.iter().any(|c| &c.id == *id)) {
                    return Err(ModelError::UnknownChannel(bad.clone()));
                }
            }
        }
        if let Some(gen) = &self.generator {
            for region in &gen.regions {
                let r = region.rect;
                if !(r.x_min <= r.x_max && r.y_min <= r.y_max) {
                    return Err(field("generator", "region", "bounds", "min exceeds max".into()));
                }
            }
        }
        for rule in &self.weight_rules {
            if !(rule.weight > 0.0) {
                return Err(field("weight_rule", "rule", "weight", "must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// Parses a scenario from TOML text; `origin` labels diagnostics.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        #[derive(Deserialize)]
        struct Header {
            format: Option<String>,
        }
        let header: Header = toml::from_str(text).map_err(|e| parse_error(origin, text, &e))?;
        match header.format.as_deref() {
            Some(FORMAT_VERSION) => {}
            found => {
                return Err(ScenarioError::Version {
                    path: origin.to_string(),
                    found: found.unwrap_or("<missing>").to_string(),
                    expected: FORMAT_VERSION,
                })
            }
        }
        let scenario: Scenario = toml::from_str(text).map_err(|e| parse_error(origin, text, &e))?;
        scenario.network()?;
        Ok(scenario)
    }

    /// Content hash of the canonical serialized form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes to JSON");
        let out = Sha256::digest(json.as_bytes());
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_error(origin: &str, text: &str, err: &toml::de::Error) -> ScenarioError {
    let location = err
        .span()
        .map(|span| {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().map_or(0, str::len) + 1;
            format!("line {line}, column {col}: ")
        })
        .unwrap_or_default();
    ScenarioError::Parse {
        path: origin.to_string(),
        message: format!("{location}{}", err.message()),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_toml(&text, &path.display().to_string())
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> Result<(), ScenarioError> {
    std::fs::write(path, scenario.to_toml())?;
    Ok(())
}

pub fn channel_80211b() -> Channel {
    Channel::new("80211b", 2400.0, 22.0)
}

pub fn channel_16ghz() -> Channel {
    Channel::new("16ghz", 16000.0, 50.0)
}

/// TV white spaces available in New York City, channels A to G.
pub fn white_space_channels() -> Vec<Channel> {
    [
        ("A", 524.0, 12.0),
        ("B", 593.0, 6.0),
        ("C", 608.0, 12.0),
        ("D", 641.0, 6.0),
        ("E", 659.0, 6.0),
        ("F", 671.0, 6.0),
        ("G", 683.0, 6.0),
    ]
    .into_iter()
    .map(|(id, f, bw)| Channel::new(id, f, bw))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line3Variant {
    OneChannel,
    TwoChannel,
}

fn ap(id: &str, x: f64, y: f64, radios: u32) -> ApSpec {
    ApSpec {
        id: id.to_string(),
        x,
        y,
        radios,
        initial_channels: None,
    }
}

/// Three single-radio APs at x = 0, 75, 150 and 16 unit-weight clients at
/// `x = 35 + 5i` for `i = 1..=16` (x = 40..115).
pub fn builtin_line3(variant: Line3Variant) -> Scenario {
    let channels = match variant {
        Line3Variant::OneChannel => vec![channel_80211b()],
        Line3Variant::TwoChannel => vec![channel_80211b(), channel_16ghz()],
    };
    let name = match variant {
        Line3Variant::OneChannel => "line3-1ch",
        Line3Variant::TwoChannel => "line3-2ch",
    };
    let mut s = Scenario::new(
        name,
        channels,
        vec![
            ap("ap0", 0.0, 0.0, 1),
            ap("ap1", 75.0, 0.0, 1),
            ap("ap2", 150.0, 0.0, 1),
        ],
    );
    s.clients = (1..=16)
        .map(|i| ClientSpec {
            id: format!("c{i}"),
            x: 35.0 + 5.0 * i as f64,
            y: 0.0,
            weight: 1.0,
        })
        .collect();
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Unweighted,
    Weighted,
}

/// 4x4 grid of two-radio APs 300 m apart over the white-space channels,
/// with 16 + 16 + 9 + 9 uniformly placed clients.
pub fn builtin_grid16(weighting: Weighting, seed: u64) -> Scenario {
    let mut aps = Vec::with_capacity(16);
    for j in 0..4 {
        for i in 0..4 {
            aps.push(ap(&format!("ap{i}{j}"), 300.0 * i as f64, 300.0 * j as f64, 2));
        }
    }
    let name = match weighting {
        Weighting::Unweighted => "grid16-unweighted",
        Weighting::Weighted => "grid16-weighted",
    };
    let mut s = Scenario::new(name, white_space_channels(), aps);
    let region = |x0: f64, y0: f64, count| GeneratorRegion {
        rect: Rect::new(x0, x0 + 300.0, y0, y0 + 300.0),
        count,
    };
    s.generator = Some(ClientGenerator {
        seed,
        regions: vec![
            region(0.0, 0.0, 16),
            region(600.0, 600.0, 16),
            region(0.0, 600.0, 9),
            region(600.0, 0.0, 9),
        ],
    });
    if weighting == Weighting::Weighted {
        s.default_weight = 0.5;
        s.weight_rules = vec![WeightRule {
            rect: Rect::new(0.0, 300.0, 0.0, 900.0),
            weight: 1.5,
        }];
    }
    s
}

/// Two single-radio APs 150 m apart, three clients and two channels
/// (802.11b and 16 GHz / 50 MHz); small enough to enumerate.
pub fn builtin_micro() -> Scenario {
    let mut s = Scenario::new(
        "micro",
        vec![channel_80211b(), channel_16ghz()],
        vec![ap("ap0", 0.0, 0.0, 1), ap("ap1", 150.0, 0.0, 1)],
    );
    s.clients = [(20.0, 1.0), (45.0, 1.0), (130.0, 1.0)]
        .iter()
        .enumerate()
        .map(|(k, &(x, w))| ClientSpec {
            id: format!("c{k}"),
            x,
            y: 0.0,
            weight: w,
        })
        .collect();
    s
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "line3-1ch",
    "line3-2ch",
    "grid16-unweighted",
    "grid16-weighted",
    "micro",
];

/// Looks up a built-in by name. `seed` only affects generated layouts.
pub fn builtin(name: &str, seed: u64) -> Result<Scenario, ScenarioError> {
    Ok(match name {
        "line3-1ch" => builtin_line3(Line3Variant::OneChannel),
        "line3-2ch" => builtin_line3(Line3Variant::TwoChannel),
        "grid16-unweighted" => builtin_grid16(Weighting::Unweighted, seed),
        "grid16-weighted" => builtin_grid16(Weighting::Weighted, seed),
        "micro" => builtin_micro(),
        other => return Err(ScenarioError::UnknownBuiltin(other.to_string())),
    })
}

// ----- results -----

pub const CSV_HEADER: [&str; 7] = ["run_id", "policy", "scheme", "t", "T", "U", "weighted_throughput"];

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// One row per recorded trajectory point of every run, in the given order.
pub fn write_trajectory_csv<W: Write>(out: W, runs: &[(String, &RunResult)]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(CSV_HEADER)?;
    for (run_id, run) in runs {
        for p in &run.trajectory {
            wtr.write_record([
                run_id.clone(),
                run.policy.clone(),
                run.scheme.to_string(),
                p.t.to_string(),
                fmt_f64(p.temperature),
                fmt_f64(p.energy),
                fmt_f64(p.weighted_throughput),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Final state of one run keyed by entity ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub policy: String,
    pub scheme: String,
    pub seed: u64,
    pub stream: u64,
    pub iterations: u64,
    pub energy: f64,
    pub weighted_throughput: f64,
    pub best_energy: f64,
    pub association: Vec<(String, String)>,
    pub channels: Vec<(String, String)>,
    pub clients: Vec<ClientOutcome>,
    pub access: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientOutcome {
    pub id: String,
    pub ap: String,
    pub rate: f64,
    pub schedule: Option<f64>,
}

impl RunSummary {
    pub fn new(run_id: impl Into<String>, net: &Network, run: &RunResult) -> Self {
        let cfg = &run.final_config;
        let alloc = &run.allocation;
        let clients = net
            .clients
            .iter()
            .enumerate()
            .map(|(i, c)| ClientOutcome {
                id: c.id.clone(),
                ap: net.vaps[cfg.association[i]].id.clone(),
                rate: run.rates[i],
                schedule: alloc.schedule.get(i).copied(),
            })
            .collect();
        let access = match alloc.scheme {
            crate::Scheme::ServerCentric => net
                .vaps
                .iter()
                .zip(&alloc.access)
                .map(|(v, &p)| (v.id.clone(), p))
                .collect(),
            crate::Scheme::ClientContention => net
                .clients
                .iter()
                .zip(&alloc.access)
                .map(|(c, &p)| (c.id.clone(), p))
                .collect(),
        };
        RunSummary {
            run_id: run_id.into(),
            policy: run.policy.clone(),
            scheme: run.scheme.to_string(),
            seed: run.seed,
            stream: run.stream,
            iterations: run.iterations,
            energy: run.energy,
            weighted_throughput: run.weighted_throughput,
            best_energy: run.best_energy,
            association: net
                .clients
                .iter()
                .zip(&cfg.association)
                .map(|(c, &n)| (c.id.clone(), net.vaps[n].id.clone()))
                .collect(),
            channels: net
                .vaps
                .iter()
                .zip(&cfg.channel)
                .map(|(v, &c)| (v.id.clone(), net.channels[c].id.clone()))
                .collect(),
            clients,
            access,
        }
    }
}

/// Writes the run's final state as pretty JSON.
pub fn save_result(path: &Path, net: &Network, run: &RunResult) -> Result<(), ScenarioError> {
    let summary = RunSummary::new(format!("{}-{}", run.policy, run.stream), net, run);
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    std::fs::write(path, json)?;
    Ok(())
}
