//! Scenario and catalog configuration: a TOML schema covering the network
//! constants, edge topology, service catalog, demand mix, and the training
//! hyper-parameters of the two learned components.
//!
//! A scenario file can embed its service catalog (`[[service]]` tables) or
//! reference a separate catalog file; when both are given, the separate
//! catalog wins. Instance layer sizes are specified as uniform byte ranges
//! and sampled once per (scenario, seed) at resolution time; a resolved
//! catalog can be re-serialized with the sampled sizes pinned so it reloads
//! bit-for-bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{
    dbm_to_watts, positive_finite, validate_catalog, validate_edges, CatalogError, EdgeNode,
    NetworkConfig, ServiceSpec,
};
use crate::seeds;
use rand::Rng;

pub const SCHEMA_VERSION: u32 = 1;

// ── Resolved scenario ───────────────────────────────────────────────────

/// A service catalog entry before layer-size resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceTemplate {
    pub name: String,
    pub delay_threshold_s: f64,
    pub input_bits: f64,
    pub compute_intensity: f64,
    pub layer_bytes_min: u64,
    pub layer_bytes_max: u64,
    /// Pinned layer size; set on resolved catalogs, overrides the range.
    pub layer_bytes: Option<u64>,
    pub capacity: u32,
}

/// GRU forecaster hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GruOptions {
    pub gru_units: Vec<usize>,
    pub fc_units: Vec<usize>,
    /// Input window length in slots (also the training batch size).
    pub seq_len: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Offset between consecutive training windows.
    pub stride: usize,
}

impl Default for GruOptions {
    fn default() -> Self {
        Self {
            gru_units: vec![400, 200],
            fc_units: vec![100, 100],
            seq_len: 150,
            learning_rate: 1e-3,
            epochs: 150,
            stride: 1,
        }
    }
}

impl GruOptions {
    /// Forecast horizon: 10% of the window, rounded up.
    pub fn horizon(&self) -> usize {
        (self.seq_len as f64 * 0.10).ceil() as usize
    }
}

/// Value-network hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticOptions {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub episodes: usize,
    pub iterations: usize,
}

impl Default for CriticOptions {
    fn default() -> Self {
        Self {
            hidden: vec![512, 256, 64],
            learning_rate: 1e-3,
            buffer_capacity: 5000,
            batch_size: 100,
            episodes: 1500,
            iterations: 20,
        }
    }
}

/// A fully validated scenario: topology, constants, catalog templates and
/// run/training options.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub network: NetworkConfig,
    pub edges: Vec<EdgeNode>,
    pub templates: Vec<ServiceTemplate>,
    /// Relative popularity per service for vehicle binding (uniform if None).
    pub service_mix: Option<Vec<f64>>,
    /// Instances per service at t = 0.
    pub initial_instances: u32,
    /// Slots during which learning policies only observe.
    pub warmup_slots: usize,
    pub gru: GruOptions,
    pub critic: CriticOptions,
    /// Anchor for lat/lon trace ingest (degrees), if configured.
    pub trace_origin: Option<(f64, f64)>,
}

impl Scenario {
    /// Parse a scenario, optionally overriding its services with a separate
    /// catalog file.
    pub fn from_toml_str(scenario: &str, catalog: Option<&str>) -> Result<Self, ConfigError> {
        let file: ScenarioFile = toml::from_str(scenario)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::UnsupportedSchema {
                found: file.schema_version,
            });
        }
        let services = match catalog {
            Some(text) => {
                let cat: CatalogFile = toml::from_str(text)?;
                if cat.schema_version != SCHEMA_VERSION {
                    return Err(ConfigError::UnsupportedSchema {
                        found: cat.schema_version,
                    });
                }
                cat.service
            }
            None => file.service.clone(),
        };
        if services.is_empty() {
            return Err(ConfigError::NoServices);
        }
        file.into_scenario(services)
    }

    /// Sample each service's instance layer size from its range (label
    /// "phi", fixed per scenario seed) and return the validated catalog.
    pub fn resolve_services(&self, seed: u64) -> Result<Vec<ServiceSpec>, ConfigError> {
        let mut rng = seeds::rng_for("phi", seed);
        let mut services = Vec::with_capacity(self.templates.len());
        for (id, t) in self.templates.iter().enumerate() {
            let instance_layer_bytes = match t.layer_bytes {
                Some(b) => {
                    // A pin must still respect the declared range.
                    if b < t.layer_bytes_min || b > t.layer_bytes_max {
                        return Err(ConfigError::PinOutsideRange {
                            service: t.name.clone(),
                        });
                    }
                    b
                }
                None => rng.random_range(t.layer_bytes_min..=t.layer_bytes_max),
            };
            services.push(ServiceSpec {
                id,
                name: t.name.clone(),
                delay_threshold_s: t.delay_threshold_s,
                input_bits: t.input_bits,
                compute_intensity: t.compute_intensity,
                instance_layer_bytes,
                capacity: t.capacity,
            });
        }
        validate_catalog(&services)?;
        Ok(services)
    }

    /// Serialize back to TOML. When `resolved` is given, layer sizes are
    /// pinned so a reload reproduces them bit-for-bit regardless of seed.
    pub fn to_toml_string(&self, resolved: Option<&[ServiceSpec]>) -> String {
        let file = ScenarioFile::from_scenario(self, resolved);
        toml::to_string(&file).expect("scenario serializes")
    }
}

impl Default for Scenario {
    /// The bundled default: a 15x15 km region, 9 identical 10 GHz / 2 GB
    /// edges on a 3x3 grid, the 8-service vehicular catalog, 750 s horizon
    /// in 5 s slots with 15-slot frames.
    fn default() -> Self {
        let text = default_scenario_toml();
        Scenario::from_toml_str(text, None).expect("bundled default scenario is valid")
    }
}

/// The bundled default scenario TOML (also available via the CLI when no
/// `--scenario` is given).
pub fn default_scenario_toml() -> &'static str {
    include_str!("../assets/default_scenario.toml")
}

/// Parse + resolve in one step: returns the catalog, topology and network
/// constants ready for simulation.
pub fn load_catalog(
    scenario_toml: &str,
    catalog_toml: Option<&str>,
    seed: u64,
) -> Result<(Vec<ServiceSpec>, Vec<EdgeNode>, NetworkConfig), ConfigError> {
    let scenario = Scenario::from_toml_str(scenario_toml, catalog_toml)?;
    let services = scenario.resolve_services(seed)?;
    Ok((services, scenario.edges, scenario.network))
}

// ── TOML schema ─────────────────────────────────────────────────────────

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_name() -> String {
    "scenario".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default = "default_schema_version")]
    schema_version: u32,
    #[serde(default = "default_name")]
    name: String,
    network: NetworkSection,
    edges: EdgeSection,
    #[serde(default)]
    demand: DemandSection,
    #[serde(default)]
    placement: PlacementSection,
    #[serde(default)]
    sim: SimSection,
    #[serde(default)]
    gru: GruOptions,
    #[serde(default)]
    critic: CriticOptions,
    #[serde(default)]
    trace: TraceSection,
    #[serde(default)]
    service: Vec<ServiceEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default = "default_schema_version")]
    schema_version: u32,
    service: Vec<ServiceEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkSection {
    bandwidth_hz: f64,
    tx_power_dbm: f64,
    noise_power_dbm: f64,
    backhaul_bps: f64,
    user_context_bytes: f64,
    propagation_speed_mps: f64,
    slot_seconds: f64,
    horizon_seconds: f64,
    frame_slots: usize,
    q_threshold: f64,
    util_high_pct: f64,
    util_low_pct: f64,
    region_side_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSection {
    #[serde(default)]
    layout: EdgeLayout,
    #[serde(default)]
    count: Option<usize>,
    cpu_hz: f64,
    storage_capacity_bytes: u64,
    #[serde(default)]
    storage_used_bytes: u64,
    #[serde(default)]
    node: Vec<ExplicitNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
enum EdgeLayout {
    #[default]
    Grid,
    Explicit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitNode {
    id: usize,
    x: f64,
    y: f64,
    #[serde(default)]
    cpu_hz: Option<f64>,
    #[serde(default)]
    storage_capacity_bytes: Option<u64>,
    #[serde(default)]
    storage_used_bytes: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct DemandSection {
    #[serde(default)]
    service_mix: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PlacementSection {
    initial_instances: u32,
}

impl Default for PlacementSection {
    fn default() -> Self {
        Self {
            initial_instances: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimSection {
    warmup_slots: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { warmup_slots: 30 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct TraceSection {
    origin_lat_deg: Option<f64>,
    origin_lon_deg: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServiceEntry {
    name: String,
    delay_threshold_s: f64,
    input_bits: f64,
    compute_intensity: f64,
    layer_bytes_min: u64,
    layer_bytes_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layer_bytes: Option<u64>,
    capacity: u32,
}

impl ScenarioFile {
    fn into_scenario(self, services: Vec<ServiceEntry>) -> Result<Scenario, ConfigError> {
        let templates: Vec<ServiceTemplate> = services
            .into_iter()
            .map(|e| {
                if e.layer_bytes_min == 0 || e.layer_bytes_min > e.layer_bytes_max {
                    return Err(ConfigError::BadLayerRange { service: e.name });
                }
                Ok(ServiceTemplate {
                    name: e.name,
                    delay_threshold_s: e.delay_threshold_s,
                    input_bits: e.input_bits,
                    compute_intensity: e.compute_intensity,
                    layer_bytes_min: e.layer_bytes_min,
                    layer_bytes_max: e.layer_bytes_max,
                    layer_bytes: e.layer_bytes,
                    capacity: e.capacity,
                })
            })
            .collect::<Result<_, _>>()?;

        let edges = build_edges(&self.edges, self.network.region_side_m)?;
        let network = NetworkConfig {
            bandwidth_hz: self.network.bandwidth_hz,
            tx_power_w: dbm_to_watts(self.network.tx_power_dbm),
            noise_power_w: dbm_to_watts(self.network.noise_power_dbm),
            backhaul_bps: self.network.backhaul_bps,
            user_context_bytes: self.network.user_context_bytes,
            propagation_speed_mps: self.network.propagation_speed_mps,
            slot_seconds: self.network.slot_seconds,
            horizon_seconds: self.network.horizon_seconds,
            frame_slots: self.network.frame_slots,
            q_threshold: self.network.q_threshold,
            util_high_pct: self.network.util_high_pct,
            util_low_pct: self.network.util_low_pct,
            num_edges: edges.len(),
            region_side_m: self.network.region_side_m,
        };
        network.validate()?;
        validate_edges(&edges, &network)?;
        for edge in &edges {
            let (x, y) = edge.position;
            if !(0.0..=network.region_side_m).contains(&x)
                || !(0.0..=network.region_side_m).contains(&y)
            {
                return Err(ConfigError::EdgeOutsideRegion { edge: edge.id });
            }
        }
        if let Some(mix) = &self.demand.service_mix {
            if mix.len() != templates.len()
                || mix.iter().any(|w| *w < 0.0 || !w.is_finite())
                || mix.iter().sum::<f64>() <= 0.0
            {
                return Err(ConfigError::BadServiceMix);
            }
        }
        if self.placement.initial_instances == 0 {
            return Err(ConfigError::Catalog(CatalogError::NonPositive {
                field: "initial_instances",
            }));
        }
        let trace_origin = match (self.trace.origin_lat_deg, self.trace.origin_lon_deg) {
            (Some(lat), Some(lon)) => Some((lat, lon)),
            (None, None) => None,
            _ => return Err(ConfigError::PartialTraceOrigin),
        };
        validate_training_options(&self.gru, &self.critic)?;

        // Validate the templates with placeholder sizes; the per-seed
        // resolution re-validates with the sampled values.
        let placeholder: Vec<ServiceSpec> = templates
            .iter()
            .enumerate()
            .map(|(id, t)| ServiceSpec {
                id,
                name: t.name.clone(),
                delay_threshold_s: t.delay_threshold_s,
                input_bits: t.input_bits,
                compute_intensity: t.compute_intensity,
                instance_layer_bytes: t.layer_bytes.unwrap_or(t.layer_bytes_min),
                capacity: t.capacity,
            })
            .collect();
        validate_catalog(&placeholder)?;

        Ok(Scenario {
            name: self.name,
            network,
            edges,
            templates,
            service_mix: self.demand.service_mix,
            initial_instances: self.placement.initial_instances,
            warmup_slots: self.sim.warmup_slots,
            gru: self.gru,
            critic: self.critic,
            trace_origin,
        })
    }

    fn from_scenario(s: &Scenario, resolved: Option<&[ServiceSpec]>) -> Self {
        let service = match resolved {
            Some(specs) => specs
                .iter()
                .map(|spec| {
                    let t = &s.templates[spec.id];
                    ServiceEntry {
                        name: spec.name.clone(),
                        delay_threshold_s: spec.delay_threshold_s,
                        input_bits: spec.input_bits,
                        compute_intensity: spec.compute_intensity,
                        layer_bytes_min: t.layer_bytes_min,
                        layer_bytes_max: t.layer_bytes_max,
                        layer_bytes: Some(spec.instance_layer_bytes),
                        capacity: spec.capacity,
                    }
                })
                .collect(),
            None => s
                .templates
                .iter()
                .map(|t| ServiceEntry {
                    name: t.name.clone(),
                    delay_threshold_s: t.delay_threshold_s,
                    input_bits: t.input_bits,
                    compute_intensity: t.compute_intensity,
                    layer_bytes_min: t.layer_bytes_min,
                    layer_bytes_max: t.layer_bytes_max,
                    layer_bytes: t.layer_bytes,
                    capacity: t.capacity,
                })
                .collect(),
        };
        // Recover dBm from watts exactly enough for a stable round-trip:
        // the default path stores the dBm the file declared.
        let tx_power_dbm = watts_to_dbm(s.network.tx_power_w);
        let noise_power_dbm = watts_to_dbm(s.network.noise_power_w);
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            name: s.name.clone(),
            network: NetworkSection {
                bandwidth_hz: s.network.bandwidth_hz,
                tx_power_dbm,
                noise_power_dbm,
                backhaul_bps: s.network.backhaul_bps,
                user_context_bytes: s.network.user_context_bytes,
                propagation_speed_mps: s.network.propagation_speed_mps,
                slot_seconds: s.network.slot_seconds,
                horizon_seconds: s.network.horizon_seconds,
                frame_slots: s.network.frame_slots,
                q_threshold: s.network.q_threshold,
                util_high_pct: s.network.util_high_pct,
                util_low_pct: s.network.util_low_pct,
                region_side_m: s.network.region_side_m,
            },
            edges: EdgeSection {
                layout: EdgeLayout::Explicit,
                count: None,
                cpu_hz: s.edges.first().map(|e| e.cpu_hz).unwrap_or(0.0),
                storage_capacity_bytes: s
                    .edges
                    .first()
                    .map(|e| e.storage_capacity_bytes)
                    .unwrap_or(0),
                storage_used_bytes: 0,
                node: s
                    .edges
                    .iter()
                    .map(|e| ExplicitNode {
                        id: e.id,
                        x: e.position.0,
                        y: e.position.1,
                        cpu_hz: Some(e.cpu_hz),
                        storage_capacity_bytes: Some(e.storage_capacity_bytes),
                        storage_used_bytes: Some(e.storage_used_bytes),
                    })
                    .collect(),
            },
            demand: DemandSection {
                service_mix: s.service_mix.clone(),
            },
            placement: PlacementSection {
                initial_instances: s.initial_instances,
            },
            sim: SimSection {
                warmup_slots: s.warmup_slots,
            },
            gru: s.gru.clone(),
            critic: s.critic.clone(),
            trace: TraceSection {
                origin_lat_deg: s.trace_origin.map(|o| o.0),
                origin_lon_deg: s.trace_origin.map(|o| o.1),
            },
            service,
        }
    }
}

fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

fn build_edges(section: &EdgeSection, region_side_m: f64) -> Result<Vec<EdgeNode>, ConfigError> {
    match section.layout {
        EdgeLayout::Grid => {
            let count = section.count.ok_or(ConfigError::MissingEdgeCount)?;
            if count == 0 {
                return Err(ConfigError::Catalog(CatalogError::NonPositive {
                    field: "edges.count",
                }));
            }
            let g = (count as f64).sqrt().ceil() as usize;
            let cell = region_side_m / g as f64;
            Ok((0..count)
                .map(|k| EdgeNode {
                    id: k,
                    position: (((k % g) as f64 + 0.5) * cell, ((k / g) as f64 + 0.5) * cell),
                    cpu_hz: section.cpu_hz,
                    storage_capacity_bytes: section.storage_capacity_bytes,
                    storage_used_bytes: section.storage_used_bytes,
                })
                .collect())
        }
        EdgeLayout::Explicit => {
            if section.node.is_empty() {
                return Err(ConfigError::MissingEdgeNodes);
            }
            Ok(section
                .node
                .iter()
                .map(|n| EdgeNode {
                    id: n.id,
                    position: (n.x, n.y),
                    cpu_hz: n.cpu_hz.unwrap_or(section.cpu_hz),
                    storage_capacity_bytes: n
                        .storage_capacity_bytes
                        .unwrap_or(section.storage_capacity_bytes),
                    storage_used_bytes: n.storage_used_bytes.unwrap_or(section.storage_used_bytes),
                })
                .collect())
        }
    }
}

fn validate_training_options(gru: &GruOptions, critic: &CriticOptions) -> Result<(), ConfigError> {
    if gru.gru_units.is_empty() || gru.gru_units.contains(&0) {
        return Err(ConfigError::BadTrainingOption {
            field: "gru.gru_units",
        });
    }
    if gru.fc_units.contains(&0) {
        return Err(ConfigError::BadTrainingOption {
            field: "gru.fc_units",
        });
    }
    if gru.seq_len < 2 || gru.stride == 0 || gru.epochs == 0 || !positive_finite(gru.learning_rate)
    {
        return Err(ConfigError::BadTrainingOption { field: "gru" });
    }
    if critic.hidden.is_empty() || critic.hidden.contains(&0) {
        return Err(ConfigError::BadTrainingOption {
            field: "critic.hidden",
        });
    }
    if critic.buffer_capacity == 0
        || critic.batch_size == 0
        || critic.episodes == 0
        || critic.iterations == 0
        || !positive_finite(critic.learning_rate)
    {
        return Err(ConfigError::BadTrainingOption { field: "critic" });
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("unsupported schema_version {found} (this build reads {SCHEMA_VERSION})")]
    UnsupportedSchema { found: u32 },
    #[error("no services: provide [[service]] tables or a catalog file")]
    NoServices,
    #[error("service '{service}': layer_bytes_min must be positive and ≤ layer_bytes_max")]
    BadLayerRange { service: String },
    #[error("service '{service}': pinned layer_bytes is outside its declared range")]
    PinOutsideRange { service: String },
    #[error("grid layout requires edges.count")]
    MissingEdgeCount,
    #[error("explicit layout requires at least one [[edges.node]]")]
    MissingEdgeNodes,
    #[error("edge {edge} lies outside the region")]
    EdgeOutsideRegion { edge: usize },
    #[error(
        "demand.service_mix must list one non-negative weight per service with a positive sum"
    )]
    BadServiceMix,
    #[error("trace origin needs both origin_lat_deg and origin_lon_deg")]
    PartialTraceOrigin,
    #[error("invalid training option: {field}")]
    BadTrainingOption { field: &'static str },
}
