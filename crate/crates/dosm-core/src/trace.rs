//! Vehicle mobility traces: ingest (two formats), synthetic generation,
//! position interpolation, service binding and per-slot demand extraction.
//!
//! Supported input formats:
//!
//! - `xy_csv`: header `vehicle_id,t,x,y`, one record per line, local meters,
//!   seconds since scenario start. Timestamps must be strictly increasing
//!   per vehicle.
//! - `latlon_cab`: whitespace-separated `lat lon occupancy epoch` lines, one
//!   file per vehicle (file stem = vehicle id), newest-first or oldest-first.
//!   Converted to local meters by an equirectangular projection anchored at
//!   the region origin; points outside the region window are dropped and the
//!   occupancy flag is discarded.
//!
//! A vehicle requests exactly one service for its whole lifetime; the
//! service is drawn at load time from a configurable categorical
//! distribution (uniform by default) using the scenario seed, because traces
//! themselves carry no service information.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{positive_finite, EdgeId, EdgeNode, NetworkConfig, ServiceId, VehicleId};
use crate::seeds;

/// One trace row: a vehicle's position at an instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub vehicle: VehicleId,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// A vehicle with its bound service and time-ordered trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub requested_service: ServiceId,
    /// `(t, x, y)` waypoints, strictly increasing in `t`.
    pub trajectory: Vec<(f64, f64, f64)>,
}

impl Vehicle {
    pub fn span(&self) -> (f64, f64) {
        let first = self.trajectory.first().map(|w| w.0).unwrap_or(0.0);
        let last = self.trajectory.last().map(|w| w.0).unwrap_or(-1.0);
        (first, last)
    }

    /// Whether the vehicle is on the road at `t`.
    pub fn active_at(&self, t: f64) -> bool {
        let (first, last) = self.span();
        first <= t && t <= last
    }

    /// Linearly interpolated position at `t`.
    pub fn position_at(&self, t: f64) -> Result<(f64, f64), TraceError> {
        if !self.active_at(t) {
            return Err(TraceError::OutOfSpan {
                vehicle: self.id,
                t,
            });
        }
        // First waypoint with time > t; t is within the span, so idx ≥ 1
        // unless t equals the first timestamp exactly.
        let idx = self.trajectory.partition_point(|w| w.0 <= t);
        if idx == 0 {
            let w = self.trajectory[0];
            return Ok((w.1, w.2));
        }
        if idx == self.trajectory.len() {
            let w = self.trajectory[idx - 1];
            return Ok((w.1, w.2));
        }
        let (t0, x0, y0) = self.trajectory[idx - 1];
        let (t1, x1, y1) = self.trajectory[idx];
        let a = (t - t0) / (t1 - t0);
        Ok((x0 + a * (x1 - x0), y0 + a * (y1 - y0)))
    }
}

// ── Ingest: xy_csv ──────────────────────────────────────────────────────

pub const XY_CSV_HEADER: &str = "vehicle_id,t,x,y";

/// Parse the `xy_csv` format. Records may arrive grouped by vehicle in any
/// vehicle order, but each vehicle's timestamps must be strictly
/// increasing; output is sorted by `(vehicle, t)`.
pub fn parse_trace_xy(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut saw_header = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = n + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != XY_CSV_HEADER {
                return Err(TraceError::BadHeader {
                    found: line.to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |field: &'static str| {
            fields
                .next()
                .map(str::trim)
                .ok_or(TraceError::MissingField {
                    line: lineno,
                    field,
                })
        };
        let vehicle: VehicleId = parse_num(next("vehicle_id")?, lineno, "vehicle_id")?;
        let t: f64 = parse_num(next("t")?, lineno, "t")?;
        let x: f64 = parse_num(next("x")?, lineno, "x")?;
        let y: f64 = parse_num(next("y")?, lineno, "y")?;
        if fields.next().is_some() {
            return Err(TraceError::TrailingFields { line: lineno });
        }
        if !t.is_finite() || t < 0.0 || !x.is_finite() || !y.is_finite() {
            return Err(TraceError::BadValue {
                line: lineno,
                field: "t/x/y",
            });
        }
        records.push(TraceRecord { vehicle, t, x, y });
    }
    if records.is_empty() {
        return Err(TraceError::Empty);
    }
    check_time_order(&records)?;
    records.sort_by(|a, b| a.vehicle.cmp(&b.vehicle).then(a.t.total_cmp(&b.t)));
    Ok(records)
}

/// Per-vehicle strict time ordering in encounter order.
fn check_time_order(records: &[TraceRecord]) -> Result<(), TraceError> {
    use std::collections::HashMap;
    let mut last_t: HashMap<VehicleId, f64> = HashMap::new();
    for r in records {
        if let Some(prev) = last_t.get(&r.vehicle) {
            if r.t <= *prev {
                return Err(TraceError::NonMonotonic {
                    vehicle: r.vehicle,
                    t: r.t,
                });
            }
        }
        last_t.insert(r.vehicle, r.t);
    }
    Ok(())
}

/// Render records to canonical `xy_csv` (floats round-trip bit-exactly).
pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 32 + 16);
    out.push_str(XY_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{},{},{}\n", r.vehicle, r.t, r.x, r.y));
    }
    out
}

// ── Ingest: latlon_cab ──────────────────────────────────────────────────

/// Equirectangular projection anchored at the region's south-west corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLonProjection {
    pub origin_lat_deg: f64,
    pub origin_lon_deg: f64,
    pub region_side_m: f64,
}

const EARTH_RADIUS_M: f64 = 6_371_000.0;

impl LatLonProjection {
    /// Local meters for a lat/lon pair, or `None` outside the region window.
    pub fn to_xy(&self, lat_deg: f64, lon_deg: f64) -> Option<(f64, f64)> {
        let lat0 = self.origin_lat_deg.to_radians();
        let x = EARTH_RADIUS_M * (lon_deg - self.origin_lon_deg).to_radians() * lat0.cos();
        let y = EARTH_RADIUS_M * (lat_deg - self.origin_lat_deg).to_radians();
        if x < 0.0 || x > self.region_side_m || y < 0.0 || y > self.region_side_m {
            return None;
        }
        Some((x, y))
    }
}

/// Parse one `latlon_cab` file (`lat lon occupancy epoch` per line) for the
/// vehicle named by the file stem. Out-of-region points are dropped; the
/// result is sorted oldest-first (the raw dataset convention is
/// newest-first) with `t` still in epoch seconds — see
/// [`normalize_epochs`]. Duplicate timestamps are rejected.
pub fn parse_latlon_cab(
    vehicle: VehicleId,
    text: &str,
    proj: &LatLonProjection,
) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records: Vec<TraceRecord> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = n + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next = |field: &'static str| {
            fields.next().ok_or(TraceError::MissingField {
                line: lineno,
                field,
            })
        };
        let lat: f64 = parse_num(next("lat")?, lineno, "lat")?;
        let lon: f64 = parse_num(next("lon")?, lineno, "lon")?;
        let _occupancy = next("occupancy")?;
        let epoch: f64 = parse_num(next("epoch")?, lineno, "epoch")?;
        if !lat.is_finite() || !lon.is_finite() || !epoch.is_finite() {
            return Err(TraceError::BadValue {
                line: lineno,
                field: "lat/lon/epoch",
            });
        }
        if let Some((x, y)) = proj.to_xy(lat, lon) {
            records.push(TraceRecord {
                vehicle,
                t: epoch,
                x,
                y,
            });
        }
    }
    records.sort_by(|a, b| a.t.total_cmp(&b.t));
    for pair in records.windows(2) {
        if pair[1].t <= pair[0].t {
            return Err(TraceError::NonMonotonic {
                vehicle,
                t: pair[1].t,
            });
        }
    }
    Ok(records)
}

/// Shift epoch-based timestamps so the earliest record across the whole
/// fleet becomes t = 0.
pub fn normalize_epochs(records: &mut [TraceRecord]) {
    let t0 = records.iter().map(|r| r.t).fold(f64::INFINITY, f64::min);
    if t0.is_finite() {
        for r in records.iter_mut() {
            r.t -= t0;
        }
    }
}

// ── Synthetic generation ────────────────────────────────────────────────

/// Mobility model for synthetic traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MobilityModel {
    /// Pick a random destination and speed (5-20 m/s), drive straight to
    /// it, repeat.
    #[default]
    RandomWaypoint,
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub num_vehicles: usize,
    pub horizon_s: f64,
    pub region_side_m: f64,
    /// Interval between recorded waypoints, seconds.
    pub step_s: f64,
    pub model: MobilityModel,
}

/// Generate a synthetic trace spanning `[0, horizon_s]` for every vehicle.
/// Deterministic for a given seed; positions stay inside the region and
/// per-step displacement never exceeds 20 m/s times the step.
pub fn generate_trace(seed: u64, opts: &GenerateOptions) -> Result<Vec<TraceRecord>, TraceError> {
    if opts.num_vehicles == 0 {
        return Err(TraceError::BadGenerateOptions);
    }
    if ![opts.horizon_s, opts.step_s, opts.region_side_m]
        .iter()
        .all(|&v| positive_finite(v))
    {
        return Err(TraceError::BadGenerateOptions);
    }
    let MobilityModel::RandomWaypoint = opts.model;
    let mut rng = seeds::rng_for("trace", seed);
    let side = opts.region_side_m;
    let steps = (opts.horizon_s / opts.step_s).ceil() as usize;
    let mut records = Vec::with_capacity(opts.num_vehicles * (steps + 1));
    for vid in 0..opts.num_vehicles as VehicleId {
        let mut x = rng.random_range(0.0..side);
        let mut y = rng.random_range(0.0..side);
        let mut target = (rng.random_range(0.0..side), rng.random_range(0.0..side));
        let mut speed = rng.random_range(5.0..20.0);
        for k in 0..=steps {
            let t = (k as f64 * opts.step_s).min(opts.horizon_s);
            records.push(TraceRecord {
                vehicle: vid,
                t,
                x,
                y,
            });
            if k == steps {
                break;
            }
            let mut dt = (opts.horizon_s - t).min(opts.step_s);
            // Drive toward the target, re-rolling it on arrival.
            while dt > 0.0 {
                let dx = target.0 - x;
                let dy = target.1 - y;
                let dist = (dx * dx + dy * dy).sqrt();
                let reach = speed * dt;
                if reach < dist {
                    x += dx / dist * reach;
                    y += dy / dist * reach;
                    break;
                }
                x = target.0;
                y = target.1;
                dt -= if speed > 0.0 { dist / speed } else { dt };
                target = (rng.random_range(0.0..side), rng.random_range(0.0..side));
                speed = rng.random_range(5.0..20.0);
            }
        }
    }
    Ok(records)
}

// ── Service binding ─────────────────────────────────────────────────────

/// Group records into vehicles and bind each to one service drawn from
/// `service_mix` (uniform when `None`) with the scenario seed.
///
/// Records must already be sorted by `(vehicle, t)` (the parse functions
/// guarantee this); vehicles come out in ascending id order.
pub fn bind_services(
    records: &[TraceRecord],
    num_services: usize,
    service_mix: Option<&[f64]>,
    seed: u64,
) -> Result<Vec<Vehicle>, TraceError> {
    if records.is_empty() {
        return Err(TraceError::Empty);
    }
    if num_services == 0 {
        return Err(TraceError::BadGenerateOptions);
    }
    if let Some(mix) = service_mix {
        if mix.len() != num_services
            || mix.iter().any(|w| *w < 0.0 || !w.is_finite())
            || mix.iter().sum::<f64>() <= 0.0
        {
            return Err(TraceError::BadServiceMix);
        }
    }
    let mut vehicles: Vec<Vehicle> = Vec::new();
    for r in records {
        match vehicles.last_mut() {
            Some(v) if v.id == r.vehicle => {
                let last_t = v
                    .trajectory
                    .last()
                    .map(|w| w.0)
                    .unwrap_or(f64::NEG_INFINITY);
                if r.t <= last_t {
                    return Err(TraceError::NonMonotonic {
                        vehicle: r.vehicle,
                        t: r.t,
                    });
                }
                v.trajectory.push((r.t, r.x, r.y));
            }
            Some(v) if v.id > r.vehicle => {
                return Err(TraceError::UnsortedRecords { vehicle: r.vehicle });
            }
            _ => vehicles.push(Vehicle {
                id: r.vehicle,
                requested_service: 0,
                trajectory: vec![(r.t, r.x, r.y)],
            }),
        }
    }
    let mut rng = seeds::rng_for("services", seed);
    for v in vehicles.iter_mut() {
        v.requested_service = pick_service(&mut rng, num_services, service_mix);
    }
    Ok(vehicles)
}

fn pick_service(rng: &mut impl Rng, num_services: usize, mix: Option<&[f64]>) -> ServiceId {
    match mix {
        None => rng.random_range(0..num_services),
        Some(w) => {
            let total: f64 = w.iter().sum();
            let mut x = rng.random_range(0.0..total);
            for (s, weight) in w.iter().enumerate() {
                if x < *weight {
                    return s;
                }
                x -= weight;
            }
            num_services - 1
        }
    }
}

// ── Demand extraction ───────────────────────────────────────────────────

/// A vehicle active in a slot, with its interpolated position.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveVehicle {
    pub id: VehicleId,
    pub service: ServiceId,
    pub pos: (f64, f64),
}

/// Vehicles-per-(edge, service) counts for one slot (V_e^s).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandMatrix {
    pub slot: usize,
    num_edges: usize,
    num_services: usize,
    /// Edge-major: `counts[e * num_services + s]`.
    counts: Vec<u32>,
}

impl DemandMatrix {
    pub fn zero(slot: usize, num_edges: usize, num_services: usize) -> Self {
        Self {
            slot,
            num_edges,
            num_services,
            counts: vec![0; num_edges * num_services],
        }
    }

    pub fn count(&self, edge: EdgeId, service: ServiceId) -> u32 {
        self.counts[edge * self.num_services + service]
    }

    pub fn add(&mut self, edge: EdgeId, service: ServiceId) {
        self.counts[edge * self.num_services + service] += 1;
    }

    /// Vehicles requesting `service` across all edges.
    pub fn service_total(&self, service: ServiceId) -> u32 {
        (0..self.num_edges).map(|e| self.count(e, service)).sum()
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_services(&self) -> usize {
        self.num_services
    }
}

/// The edge closest to `pos`, ties broken by lower id.
pub fn nearest_edge(pos: (f64, f64), edges: &[EdgeNode]) -> EdgeId {
    let mut best = 0;
    let mut best_d2 = f64::INFINITY;
    for edge in edges {
        let dx = pos.0 - edge.position.0;
        let dy = pos.1 - edge.position.1;
        let d2 = dx * dx + dy * dy;
        if d2 < best_d2 {
            best_d2 = d2;
            best = edge.id;
        }
    }
    best
}

/// Demand plus the active-vehicle snapshot for one slot.
#[derive(Debug, Clone)]
pub struct SlotSnapshot {
    pub demand: DemandMatrix,
    /// Ascending vehicle id.
    pub active: Vec<ActiveVehicle>,
}

/// Sample every vehicle at the slot midpoint and attribute its demand to the
/// nearest edge.
pub fn slot_snapshot(
    vehicles: &[Vehicle],
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
    slot: usize,
    num_services: usize,
) -> SlotSnapshot {
    let t = (slot as f64 + 0.5) * cfg.slot_seconds;
    let mut demand = DemandMatrix::zero(slot, edges.len(), num_services);
    let mut active = Vec::new();
    for v in vehicles {
        if v.active_at(t) {
            let pos = v.position_at(t).expect("active vehicle has a position");
            demand.add(nearest_edge(pos, edges), v.requested_service);
            active.push(ActiveVehicle {
                id: v.id,
                service: v.requested_service,
                pos,
            });
        }
    }
    SlotSnapshot { demand, active }
}

/// Per-slot demand counts only.
pub fn demand_at_slot(
    vehicles: &[Vehicle],
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
    slot: usize,
    num_services: usize,
) -> DemandMatrix {
    slot_snapshot(vehicles, edges, cfg, slot, num_services).demand
}

/// Per-service demand history over the whole horizon:
/// `[service][slot][edge]` counts, ready for forecaster training.
pub fn demand_history(
    vehicles: &[Vehicle],
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
    num_services: usize,
) -> Vec<Vec<Vec<f64>>> {
    let slots = cfg.num_slots();
    let mut hist = vec![Vec::with_capacity(slots); num_services];
    for slot in 0..slots {
        let demand = demand_at_slot(vehicles, edges, cfg, slot, num_services);
        for (s, h) in hist.iter_mut().enumerate() {
            h.push(
                (0..edges.len())
                    .map(|e| f64::from(demand.count(e, s)))
                    .collect(),
            );
        }
    }
    hist
}

fn parse_num<T: std::str::FromStr>(
    raw: &str,
    line: usize,
    field: &'static str,
) -> Result<T, TraceError> {
    raw.trim()
        .parse()
        .map_err(|_| TraceError::BadValue { line, field })
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("bad trace header: expected '{XY_CSV_HEADER}', found '{found}'")]
    BadHeader { found: String },
    #[error("line {line}: missing field {field}")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: unexpected trailing fields")]
    TrailingFields { line: usize },
    #[error("line {line}: cannot parse {field}")]
    BadValue { line: usize, field: &'static str },
    #[error("vehicle {vehicle}: timestamps not strictly increasing (t = {t})")]
    NonMonotonic { vehicle: VehicleId, t: f64 },
    #[error("records for vehicle {vehicle} are not grouped/sorted by vehicle id")]
    UnsortedRecords { vehicle: VehicleId },
    #[error("vehicle {vehicle}: t = {t} is outside the trajectory span")]
    OutOfSpan { vehicle: VehicleId, t: f64 },
    #[error("invalid trace generation options")]
    BadGenerateOptions,
    #[error("service mix must have one non-negative weight per service with a positive sum")]
    BadServiceMix,
}
