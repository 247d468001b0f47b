//! Path-loss driven link model.
//!
//! Received power between two devices on carrier `f` at distance `d` is
//! proportional to `1 / (f^2 d^alpha)`. Every channel supports the same four
//! rate tiers as the 802.11b base case, with rates scaled by bandwidth and
//! ranges scaled so that the received power at each tier boundary matches the
//! base channel. The interference (carrier-sense) range is the distance at
//! which received power drops `carrier_sense_factor` times below the power at
//! the maximum transmission range.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{Channel, Point};

/// One rate tier: `rate_mbps` is available up to and including `range_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    pub rate_mbps: f64,
    pub range_m: f64,
}

impl Tier {
    pub const fn new(rate_mbps: f64, range_m: f64) -> Self {
        Tier { rate_mbps, range_m }
    }
}

/// 802.11b rate/range table used as the base case.
pub const BASE_TIERS_80211B: [Tier; 4] = [
    Tier::new(11.0, 50.0),
    Tier::new(5.5, 80.0),
    Tier::new(2.0, 120.0),
    Tier::new(1.0, 150.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioModel {
    #[serde(default = "default_alpha")]
    pub path_loss_alpha: f64,
    #[serde(default = "default_base_frequency")]
    pub base_frequency_mhz: f64,
    #[serde(default = "default_base_bandwidth")]
    pub base_bandwidth_mhz: f64,
    #[serde(default = "default_tiers")]
    pub base_tiers: Vec<Tier>,
    #[serde(default = "default_carrier_sense")]
    pub carrier_sense_factor: f64,
    /// Base-channel interference range. When absent it is derived from the
    /// carrier-sense factor as `max_range * factor^(1/alpha)` (369.32 m for
    /// the defaults); the default pins the published rounded value of 369 m.
    #[serde(default = "default_interference_range")]
    pub base_interference_range_m: Option<f64>,
}

fn default_alpha() -> f64 {
    3.5
}
fn default_base_frequency() -> f64 {
    2400.0
}
fn default_base_bandwidth() -> f64 {
    22.0
}
fn default_tiers() -> Vec<Tier> {
    BASE_TIERS_80211B.to_vec()
}
fn default_carrier_sense() -> f64 {
    23.42
}
fn default_interference_range() -> Option<f64> {
    Some(369.0)
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel {
            path_loss_alpha: default_alpha(),
            base_frequency_mhz: default_base_frequency(),
            base_bandwidth_mhz: default_base_bandwidth(),
            base_tiers: default_tiers(),
            carrier_sense_factor: default_carrier_sense(),
            base_interference_range_m: default_interference_range(),
        }
    }
}

impl RadioModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidRadioModel(msg));
        if !(self.path_loss_alpha > 2.0) {
            return bad(format!("path_loss_alpha must exceed 2, got {}", self.path_loss_alpha));
        }
        if !(self.base_frequency_mhz > 0.0) || !(self.base_bandwidth_mhz > 0.0) {
            return bad("base frequency and bandwidth must be positive".into());
        }
        if !(self.carrier_sense_factor > 1.0) {
            return bad(format!(
                "carrier_sense_factor must exceed 1, got {}",
                self.carrier_sense_factor
            ));
        }
        if let Some(r) = self.base_interference_range_m {
            if !(r > self.base_max_range()) {
                return bad(format!(
                    "base_interference_range_m ({r}) must exceed the largest tier range"
                ));
            }
        }
        if self.base_tiers.is_empty() {
            return bad("at least one rate tier is required".into());
        }
        for t in &self.base_tiers {
            if !(t.rate_mbps > 0.0) || !(t.range_m > 0.0) {
                return bad(format!("tier ({}, {}) must be positive", t.rate_mbps, t.range_m));
            }
        }
        for pair in self.base_tiers.windows(2) {
            if !(pair[0].rate_mbps > pair[1].rate_mbps) || !(pair[0].range_m < pair[1].range_m) {
                return bad("tiers must be strictly decreasing in rate and increasing in range".into());
            }
        }
        Ok(())
    }

    /// Largest base-channel transmission range.
    pub fn base_max_range(&self) -> f64 {
        self.base_tiers.last().map_or(0.0, |t| t.range_m)
    }

    /// Range at which received power is `carrier_sense_factor` times below
    /// the power at the maximum transmission range.
    pub fn carrier_sense_range(&self) -> f64 {
        self.base_max_range() * self.carrier_sense_factor.powf(1.0 / self.path_loss_alpha)
    }

    /// Base-channel interference range.
    pub fn base_interference_range(&self) -> f64 {
        self.base_interference_range_m
            .unwrap_or_else(|| self.carrier_sense_range())
    }
}

/// Distance multiplier that keeps `1 / (f^2 d^alpha)` equal to the base
/// channel's value at every boundary: `(f_base / f)^(2 / alpha)`.
pub fn range_scale(channel: &Channel, model: &RadioModel) -> f64 {
    (model.base_frequency_mhz / channel.center_frequency_mhz).powf(2.0 / model.path_loss_alpha)
}

/// Rate tiers and interference range of one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub channel_id: String,
    pub tiers: Vec<Tier>,
    pub interference_range_m: f64,
}

impl ChannelProfile {
    pub fn max_range(&self) -> f64 {
        self.tiers.last().map_or(0.0, |t| t.range_m)
    }

    pub fn top_rate(&self) -> f64 {
        self.tiers.first().map_or(0.0, |t| t.rate_mbps)
    }

    /// Rate of the innermost tier covering `distance`, 0 beyond the last tier.
    /// Boundaries are inclusive.
    pub fn rate_at(&self, distance: f64) -> f64 {
        self.tiers
            .iter()
            .find(|t| distance <= t.range_m)
            .map_or(0.0, |t| t.rate_mbps)
    }
}

pub fn channel_profile(channel: &Channel, model: &RadioModel) -> ChannelProfile {
    let scale = range_scale(channel, model);
    let rate_factor = channel.bandwidth_mhz / model.base_bandwidth_mhz;
    let tiers = model
        .base_tiers
        .iter()
        .map(|t| Tier::new(t.rate_mbps * rate_factor, t.range_m * scale))
        .collect();
    ChannelProfile {
        channel_id: channel.id.clone(),
        tiers,
        interference_range_m: model.base_interference_range() * scale,
    }
}

/// Bit rate `B` between a client and an AP on the profiled channel.
pub fn link_rate(client_pos: Point, ap_pos: Point, profile: &ChannelProfile) -> f64 {
    profile.rate_at(client_pos.distance(ap_pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ch(f: f64, bw: f64) -> Channel {
        Channel::new("x", f, bw)
    }

    #[test]
    fn base_channel_is_identity() {
        let m = RadioModel::default();
        assert_eq!(range_scale(&ch(2400.0, 22.0), &m), 1.0);
        let p = channel_profile(&ch(2400.0, 22.0), &m);
        assert_eq!(p.tiers, BASE_TIERS_80211B.to_vec());
        assert_abs_diff_eq!(p.interference_range_m, 369.0, epsilon = 0.5);
    }

    #[test]
    fn four_ghz_profile_matches_published_numbers() {
        let m = RadioModel::default();
        let c = ch(4000.0, 44.0);
        assert_abs_diff_eq!(range_scale(&c, &m), 0.7469, epsilon = 1e-4);
        let p = channel_profile(&c, &m);
        let rates: Vec<f64> = p.tiers.iter().map(|t| t.rate_mbps).collect();
        assert_eq!(rates, vec![22.0, 11.0, 4.0, 2.0]);
        for (t, want) in p.tiers.iter().zip([37.34, 59.75, 89.62, 112.03]) {
            assert_abs_diff_eq!(t.range_m, want, epsilon = 0.01);
        }
        assert_abs_diff_eq!(p.interference_range_m, 275.59, epsilon = 0.01);
    }

    #[test]
    fn white_space_channel_a() {
        let m = RadioModel::default();
        let p = channel_profile(&ch(524.0, 12.0), &m);
        let rates: Vec<f64> = p.tiers.iter().map(|t| t.rate_mbps).collect();
        let want = [6.0, 3.0, 12.0 / 11.0, 6.0 / 11.0];
        for (r, w) in rates.iter().zip(want) {
            assert_abs_diff_eq!(*r, w, epsilon = 1e-12);
        }
        // (2400/524)^(2/3.5) = exp(ln(4.580153) * 0.571429) = 2.38586
        assert_abs_diff_eq!(range_scale(&ch(524.0, 12.0), &m), 2.38586, epsilon = 1e-5);
        assert_abs_diff_eq!(p.tiers[0].range_m, 119.293, epsilon = 1e-3);
    }

    #[test]
    fn link_rate_boundaries() {
        let p = channel_profile(&ch(2400.0, 22.0), &RadioModel::default());
        let o = Point::new(0.0, 0.0);
        assert_eq!(link_rate(o, Point::new(50.0, 0.0), &p), 11.0);
        assert_eq!(link_rate(o, o, &p), 11.0);
        assert_eq!(link_rate(o, Point::new(50.01, 0.0), &p), 5.5);
        assert_eq!(link_rate(o, Point::new(150.0, 0.0), &p), 1.0);
        assert_eq!(link_rate(o, Point::new(150.01, 0.0), &p), 0.0);
    }

    #[test]
    fn carrier_sense_derivation() {
        let mut m = RadioModel::default();
        // 150 * 23.42^(1/3.5) = 369.319
        assert_abs_diff_eq!(m.carrier_sense_range(), 369.319, epsilon = 1e-3);
        assert_eq!(m.base_interference_range(), 369.0);
        m.base_interference_range_m = None;
        assert_eq!(m.base_interference_range(), m.carrier_sense_range());
    }

    #[test]
    fn invalid_models_rejected() {
        let m = RadioModel {
            path_loss_alpha: 2.0,
            ..RadioModel::default()
        };
        assert!(m.validate().is_err());
        let mut m = RadioModel::default();
        m.base_tiers.swap(0, 1);
        assert!(m.validate().is_err());
        assert!(RadioModel::default().validate().is_ok());
    }
}
