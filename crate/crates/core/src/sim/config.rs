use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::fap::DetectionParams;
use crate::routing::DEFAULT_TTL_SCHEDULE;
use crate::topology::FieldConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// FAP with every packet on the single shortest path.
    FapOnly,
    /// FAP plus fuzzy-controlled multi-path distribution.
    Proposed,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::FapOnly => "fap-only",
            Scheme::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fap-only" => Ok(Scheme::FapOnly),
            "proposed" => Ok(Scheme::Proposed),
            other => Err(Error::config("scheme", format!("expected `fap-only` or `proposed`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    /// Number of flooding bursts.
    pub count: u32,
    pub packets_per_attack: u32,
    /// Burst `i` (1-based) starts at `i * interval_s`.
    pub interval_s: f64,
    /// Gap between consecutive false packets within a burst.
    pub packet_spacing_s: f64,
    /// Size of the compromised-node pool; bursts cycle through it.
    pub compromised_nodes: u32,
    /// Compromised nodes are drawn among sensors at least this many hops from the base station.
    pub min_hops_from_bs: u32,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            count: 15,
            packets_per_attack: 100,
            interval_s: 10.0,
            packet_spacing_s: 0.001,
            compromised_nodes: 1,
            min_hops_from_bs: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Legitimate event packets per second, each from a random live sensor.
    pub event_rate_hz: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig { event_rate_hz: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutingConfig {
    /// Upper bound on paths per source; also the NPP scale.
    pub max_paths: u32,
    /// HC scale. Defaults to the base station's hop eccentricity.
    pub max_hops: Option<u32>,
    pub ttl_schedule: Vec<u32>,
    /// Per-hop latency of data and control packets.
    pub hop_delay_s: f64,
    /// The proposed scheme makes a multi-path decision for a source once it
    /// has sent more than this many packets within one detection window.
    pub multipath_trigger: u32,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        RoutingConfig {
            max_paths: 5,
            max_hops: None,
            ttl_schedule: DEFAULT_TTL_SCHEDULE.to_vec(),
            hop_delay_s: 0.02,
            multipath_trigger: 2,
        }
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub scheme: Scheme,
    pub field: FieldConfig,
    pub energy: EnergyParams,
    pub detection: DetectionParams,
    pub attack: AttackConfig,
    pub traffic: TrafficConfig,
    pub routing: RoutingConfig,
    /// Placement is redrawn until this share of sensors reaches the base station.
    pub min_connected_fraction: f64,
    /// Simulated horizon; defaults to one attack interval past the last burst.
    pub duration_s: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            scheme: Scheme::Proposed,
            field: FieldConfig::default(),
            energy: EnergyParams::default(),
            detection: DetectionParams::default(),
            attack: AttackConfig::default(),
            traffic: TrafficConfig::default(),
            routing: RoutingConfig::default(),
            min_connected_fraction: 0.9,
            duration_s: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            field: json_error_field(&e),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        self.energy.validate()?;
        self.detection.validate()?;
        let a = &self.attack;
        for (name, v) in [("attack.interval_s", a.interval_s), ("attack.packet_spacing_s", a.packet_spacing_s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, "must be positive"));
            }
        }
        if a.count > 0 && a.compromised_nodes == 0 {
            return Err(Error::config("attack.compromised_nodes", "attacks need at least one compromised node"));
        }
        if !(self.traffic.event_rate_hz.is_finite() && self.traffic.event_rate_hz >= 0.0) {
            return Err(Error::config("traffic.event_rate_hz", "must be non-negative"));
        }
        let r = &self.routing;
        if r.max_paths == 0 {
            return Err(Error::config("routing.max_paths", "must be at least 1"));
        }
        if r.max_hops == Some(0) {
            return Err(Error::config("routing.max_hops", "must be at least 1"));
        }
        if r.ttl_schedule.contains(&0) {
            return Err(Error::config("routing.ttl_schedule", "TTLs must be at least 1"));
        }
        if !(r.hop_delay_s.is_finite() && r.hop_delay_s > 0.0) {
            return Err(Error::config("routing.hop_delay_s", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.min_connected_fraction) {
            return Err(Error::config("min_connected_fraction", "must lie in [0, 1]"));
        }
        if let Some(d) = self.duration_s {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::config("duration_s", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn horizon_s(&self) -> f64 {
        let default = f64::from(self.attack.count + 1) * self.attack.interval_s;
        self.duration_s.unwrap_or(default)
    }

    /// FNV-1a over the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// Best-effort name of the offending field from a serde_json message.
fn json_error_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for marker in ["unknown field `", "missing field `", "duplicate field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    if let Some(rest) = msg.split("unknown variant `").nth(1) {
        return rest.split('`').next().unwrap_or("config").to_string();
    }
    "config".to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = ScenarioConfig::default();
        assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(ScenarioConfig::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = ScenarioConfig::from_json(r#"{"attack": {"cuont": 3}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "cuont"), "{err:?}");
    }

    #[test]
    fn invalid_value_is_named() {
        let err = ScenarioConfig::from_json(r#"{"routing": {"max_paths": 0}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "routing.max_paths"));
        let err = ScenarioConfig::from_json(r#"{"field": {"node_count": 0}}"#).unwrap_err();
        assert_eq!(err, Error::NoNodes);
    }

    #[test]
    fn scheme_names() {
        assert_eq!("fap-only".parse::<Scheme>().unwrap(), Scheme::FapOnly);
        assert!("fap".parse::<Scheme>().is_err());
        let cfg = ScenarioConfig::from_json(r#"{"scheme": "fap-only"}"#).unwrap();
        assert_eq!(cfg.scheme, Scheme::FapOnly);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.seed = 2;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.horizon_s(), 160.0);
    }
}
