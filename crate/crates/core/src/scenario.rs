//! Deployment description: RRH layout, transmitters, physics and search settings.
//!
//! Files are JSON with snake_case keys; angles are given in degrees and stored
//! in radians (or as unit vectors) internally.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationModel {
    Identity,
    Exponential { rho: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrhConfig {
    pub id: String,
    pub position: Point,
    pub num_antennas: usize,
    /// Unit vector along which the array elements are laid out.
    pub array_axis: Point,
}

impl RrhConfig {
    pub fn new(id: impl Into<String>, position: Point, num_antennas: usize, axis_deg: f64) -> Self {
        let a = axis_deg.to_radians();
        Self {
            id: id.into(),
            position,
            num_antennas,
            array_axis: [a.cos(), a.sin()],
        }
    }

    pub fn axis_deg(&self) -> f64 {
        self.array_axis[1].atan2(self.array_axis[0]).to_degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitterConfig {
    pub position: Point,
    #[serde(default = "one")]
    pub tx_power: f64,
}

impl TransmitterConfig {
    pub fn at(position: Point) -> Self {
        Self {
            position,
            tx_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    #[serde(default = "default_alice_radius")]
    pub alice_radius_m: f64,
    #[serde(default = "default_rrh_radius")]
    pub rrh_radius_m: f64,
}

impl Default for Exclusion {
    fn default() -> Self {
        Self {
            alice_radius_m: default_alice_radius(),
            rrh_radius_m: default_rrh_radius(),
        }
    }
}

/// Position-search settings. Distances are meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub grid_resolution_m: f64,
    pub g0: f64,
    pub small_scale_radius_m: f64,
    pub include_first_sidelobes: bool,
    pub max_candidates: usize,
    /// Grid spacing for region-wide pmd maps (coverage, heatmap).
    pub coverage_resolution_m: f64,
    /// Largest grid the exhaustive oracle will evaluate.
    pub exhaustive_budget: usize,
}

impl SearchConfig {
    pub fn defaults_for_wavelength(lambda: f64) -> Self {
        Self {
            grid_resolution_m: lambda / 10.0,
            g0: std::f64::consts::SQRT_2,
            small_scale_radius_m: lambda / 2.0,
            include_first_sidelobes: true,
            max_candidates: 4096,
            coverage_resolution_m: 1.0,
            exhaustive_budget: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    grid_resolution_m: Option<f64>,
    g0: Option<f64>,
    small_scale_radius_m: Option<f64>,
    include_first_sidelobes: Option<bool>,
    max_candidates: Option<usize>,
    coverage_resolution_m: Option<f64>,
    exhaustive_budget: Option<usize>,
}

/// Link-layer parameters for the outage and delay analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(default = "one")]
    pub rate_bits: f64,
    #[serde(default = "default_resources")]
    pub resources: u32,
    #[serde(default = "one")]
    pub noise_n0: f64,
    #[serde(default = "default_bits_per_frame")]
    pub bits_per_frame: f64,
    #[serde(default = "default_max_deadline")]
    pub max_deadline_frames: u32,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            rate_bits: 1.0,
            resources: default_resources(),
            noise_n0: 1.0,
            bits_per_frame: default_bits_per_frame(),
            max_deadline_frames: default_max_deadline(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_alice_radius() -> f64 {
    6.0
}
fn default_rrh_radius() -> f64 {
    3.0
}
fn default_resources() -> u32 {
    10
}
fn default_bits_per_frame() -> f64 {
    5.0
}
fn default_max_deadline() -> u32 {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRrh {
    id: Option<String>,
    position: Point,
    num_antennas: usize,
    #[serde(default)]
    array_axis_deg: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: Option<String>,
    carrier_frequency_hz: Option<f64>,
    antenna_spacing: Option<f64>,
    path_loss_exponent: Option<f64>,
    rice_factor_db: Option<f64>,
    rice_factor: Option<f64>,
    correlation: Option<CorrelationModel>,
    #[serde(default)]
    rrhs: Vec<RawRrh>,
    alice: Option<TransmitterConfig>,
    eve: Option<TransmitterConfig>,
    false_alarm_target: Option<f64>,
    region: Option<Region>,
    exclusion: Option<Exclusion>,
    search: Option<RawSearch>,
    link: Option<LinkConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub carrier_frequency_hz: f64,
    /// Element spacing in wavelengths.
    pub antenna_spacing: f64,
    pub path_loss_exponent: f64,
    /// Linear Rice factor.
    pub rice_factor: f64,
    pub correlation: CorrelationModel,
    pub rrhs: Vec<RrhConfig>,
    pub alice: TransmitterConfig,
    pub eve: Option<TransmitterConfig>,
    pub false_alarm_target: f64,
    pub region: Region,
    pub exclusion: Exclusion,
    pub search: SearchConfig,
    pub link: LinkConfig,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl Scenario {
    /// A scenario with 2.4 GHz carrier, half-wavelength spacing, free-space
    /// path loss, 6 dB Rice factor and `p_FA = 0.01`.
    pub fn with_defaults(rrhs: Vec<RrhConfig>, alice: TransmitterConfig, region: Region) -> Self {
        let f = 2.4e9;
        Self {
            name: "scenario".into(),
            carrier_frequency_hz: f,
            antenna_spacing: 0.5,
            path_loss_exponent: 2.0,
            rice_factor: db_to_linear(6.0),
            correlation: CorrelationModel::Identity,
            rrhs,
            alice,
            eve: None,
            false_alarm_target: 0.01,
            region,
            exclusion: Exclusion::default(),
            search: SearchConfig::defaults_for_wavelength(SPEED_OF_LIGHT / f),
            link: LinkConfig::default(),
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    pub fn total_antennas(&self) -> usize {
        self.rrhs.iter().map(|r| r.num_antennas).sum()
    }

    pub fn eve(&self) -> Result<TransmitterConfig> {
        self.eve
            .ok_or_else(|| Error::InvalidScenario(vec!["eve: required for this command".into()]))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let raw: RawScenario = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        let mut errs = Vec::new();
        let need = |v: Option<f64>, field: &str, errs: &mut Vec<String>| {
            if v.is_none() {
                errs.push(format!("{field}: missing"));
            }
            v.unwrap_or(f64::NAN)
        };
        let carrier = need(raw.carrier_frequency_hz, "carrier_frequency_hz", &mut errs);
        let spacing = raw.antenna_spacing.unwrap_or(0.5);
        let beta = raw.path_loss_exponent.unwrap_or(2.0);
        let rice = match (raw.rice_factor_db, raw.rice_factor) {
            (Some(db), None) => db_to_linear(db),
            (None, Some(k)) => k,
            (Some(_), Some(_)) => {
                errs.push("rice_factor: give either rice_factor_db or rice_factor, not both".into());
                f64::NAN
            }
            (None, None) => {
                errs.push("rice_factor_db: missing".into());
                f64::NAN
            }
        };
        let pfa = raw.false_alarm_target.unwrap_or(0.01);
        if raw.alice.is_none() {
            errs.push("alice: missing".into());
        }
        if raw.region.is_none() {
            errs.push("region: missing".into());
        }
        let lambda = SPEED_OF_LIGHT / carrier;
        let mut search = SearchConfig::defaults_for_wavelength(lambda);
        if let Some(s) = raw.search {
            search.grid_resolution_m = s.grid_resolution_m.unwrap_or(search.grid_resolution_m);
            search.g0 = s.g0.unwrap_or(search.g0);
            search.small_scale_radius_m = s.small_scale_radius_m.unwrap_or(search.small_scale_radius_m);
            search.include_first_sidelobes = s.include_first_sidelobes.unwrap_or(true);
            search.max_candidates = s.max_candidates.unwrap_or(search.max_candidates);
            search.coverage_resolution_m = s.coverage_resolution_m.unwrap_or(search.coverage_resolution_m);
            search.exhaustive_budget = s.exhaustive_budget.unwrap_or(search.exhaustive_budget);
        }
        let rrhs = raw
            .rrhs
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                RrhConfig::new(
                    r.id.unwrap_or_else(|| format!("rrh{}", i + 1)),
                    r.position,
                    r.num_antennas,
                    r.array_axis_deg,
                )
            })
            .collect();
        let scenario = Scenario {
            name: raw.name.unwrap_or_else(|| "scenario".into()),
            carrier_frequency_hz: carrier,
            antenna_spacing: spacing,
            path_loss_exponent: beta,
            rice_factor: rice,
            correlation: raw.correlation.unwrap_or(CorrelationModel::Identity),
            rrhs,
            alice: raw.alice.unwrap_or(TransmitterConfig::at([f64::NAN, f64::NAN])),
            eve: raw.eve,
            false_alarm_target: pfa,
            region: raw.region.unwrap_or(Region {
                min: [0.0, 0.0],
                max: [0.0, 0.0],
            }),
            exclusion: raw.exclusion.unwrap_or_default(),
            search,
            link: raw.link.unwrap_or_default(),
        };
        if !errs.is_empty() {
            // Still report invariant violations of the fields that were present.
            errs.extend(scenario.violations().into_iter().filter(|v| !v.contains("NaN")));
            errs.sort();
            errs.dedup();
            return Err(Error::InvalidScenario(errs));
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_value(&self) -> Value {
        let rrhs: Vec<Value> = self
            .rrhs
            .iter()
            .map(|r| {
                serde_json::json!({
                    "id": r.id,
                    "position": r.position,
                    "num_antennas": r.num_antennas,
                    "array_axis_deg": r.axis_deg(),
                })
            })
            .collect();
        let mut v = serde_json::json!({
            "name": self.name,
            "carrier_frequency_hz": self.carrier_frequency_hz,
            "antenna_spacing": self.antenna_spacing,
            "path_loss_exponent": self.path_loss_exponent,
            "rice_factor": self.rice_factor,
            "correlation": self.correlation,
            "rrhs": rrhs,
            "alice": self.alice,
            "false_alarm_target": self.false_alarm_target,
            "region": self.region,
            "exclusion": self.exclusion,
            "search": self.search,
            "link": self.link,
        });
        if let Some(eve) = self.eve {
            v["eve"] = serde_json::to_value(eve).expect("plain struct serializes");
        }
        v
    }

    /// Every violated invariant, as `field: reason` strings.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let pos = |p: &Point| p.iter().all(|c| c.is_finite());
        if !(self.carrier_frequency_hz > 0.0) || !self.carrier_frequency_hz.is_finite() {
            v.push(format!("carrier_frequency_hz: must be > 0, got {}", self.carrier_frequency_hz));
        }
        if !(self.antenna_spacing > 0.0) {
            v.push(format!("antenna_spacing: must be > 0, got {}", self.antenna_spacing));
        }
        if !(self.path_loss_exponent > 0.0) {
            v.push(format!("path_loss_exponent: must be > 0, got {}", self.path_loss_exponent));
        }
        if !(self.rice_factor > 0.0) || !self.rice_factor.is_finite() {
            v.push(format!("rice_factor: must be > 0, got {}", self.rice_factor));
        }
        if let CorrelationModel::Exponential { rho } = self.correlation {
            if !(rho.abs() < 1.0) {
                v.push(format!("correlation.rho: |rho| must be < 1, got {rho}"));
            }
        }
        if !(self.false_alarm_target > 0.0 && self.false_alarm_target < 1.0) {
            v.push(format!(
                "false_alarm_target: must lie in (0,1), got {}",
                self.false_alarm_target
            ));
        }
        if self.rrhs.is_empty() {
            v.push("rrhs: at least one RRH is required".into());
        }
        for (i, r) in self.rrhs.iter().enumerate() {
            if r.num_antennas == 0 {
                v.push(format!("rrhs[{i}].num_antennas: must be >= 1"));
            }
            if !pos(&r.position) {
                v.push(format!("rrhs[{i}].position: must be finite"));
            }
            let n = (r.array_axis[0].powi(2) + r.array_axis[1].powi(2)).sqrt();
            if (n - 1.0).abs() > 1e-12 {
                v.push(format!("rrhs[{i}].array_axis: must have unit norm"));
            }
            if r.position == self.alice.position {
                v.push(format!("alice.position: coincides with rrhs[{i}]"));
            }
            if let Some(eve) = self.eve {
                if r.position == eve.position {
                    v.push(format!("eve.position: coincides with rrhs[{i}]"));
                }
            }
        }
        let mut ids: Vec<&str> = self.rrhs.iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            v.push("rrhs: ids must be unique".into());
        }
        if !pos(&self.alice.position) {
            v.push("alice.position: must be finite".into());
        }
        if !(self.alice.tx_power > 0.0) {
            v.push(format!("alice.tx_power: must be > 0, got {}", self.alice.tx_power));
        }
        if let Some(eve) = self.eve {
            if !pos(&eve.position) {
                v.push("eve.position: must be finite".into());
            }
            if !(eve.tx_power > 0.0) {
                v.push(format!("eve.tx_power: must be > 0, got {}", eve.tx_power));
            }
        }
        let r = &self.region;
        if !(pos(&r.min) && pos(&r.max) && r.min[0] <= r.max[0] && r.min[1] <= r.max[1]) {
            v.push("region: min must be <= max componentwise".into());
        }
        if !(self.exclusion.alice_radius_m >= 0.0) || !(self.exclusion.rrh_radius_m >= 0.0) {
            v.push("exclusion: radii must be >= 0".into());
        }
        let s = &self.search;
        if !(s.grid_resolution_m > 0.0) {
            v.push(format!("search.grid_resolution_m: must be > 0, got {}", s.grid_resolution_m));
        }
        if !(s.g0 > 1.0) {
            v.push(format!("search.g0: must be > 1, got {}", s.g0));
        }
        if !(s.small_scale_radius_m >= s.grid_resolution_m) {
            v.push("search.small_scale_radius_m: must be >= grid_resolution_m".into());
        }
        if s.max_candidates == 0 {
            v.push("search.max_candidates: must be >= 1".into());
        }
        if !(s.coverage_resolution_m > 0.0) {
            v.push("search.coverage_resolution_m: must be > 0".into());
        }
        let l = &self.link;
        if !(l.rate_bits >= 0.0) {
            v.push("link.rate_bits: must be >= 0".into());
        }
        if l.resources == 0 {
            v.push("link.resources: must be >= 1".into());
        }
        if !(l.noise_n0 > 0.0) {
            v.push("link.noise_n0: must be > 0".into());
        }
        if !(l.bits_per_frame >= 0.0) {
            v.push("link.bits_per_frame: must be >= 0".into());
        }
        if l.max_deadline_frames == 0 {
            v.push("link.max_deadline_frames: must be >= 1".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(v))
        }
    }
}

/// Apply a `key.path=value` override to a JSON document. The value is parsed
/// as JSON when possible and used as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override '{assignment}' is not key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value);
                    return Ok(());
                }
                map.entry((*part).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Parse(format!("override path '{path}': '{part}' is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Parse(format!("override path '{path}': index {idx} out of {len}")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::Parse(format!("override path '{path}' crosses a scalar"))),
        };
    }
    Err(Error::Parse(format!("override path '{path}' is empty")))
}
