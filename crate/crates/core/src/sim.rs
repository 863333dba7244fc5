//! Scenario replay.
//!
//! A scenario is an ordered list of zone names. [`plan_path`] turns it into
//! evenly spaced poses: inside each zone the path follows the shortest route
//! over the zone's own signature graph between its anchors (entry portal,
//! centroid, exit portal), and consecutive zones are joined at their shared
//! portal. Frame 0 is policy initialization; pose `i` is replayed at frame
//! `i + 1`.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{BaselineParams, BaselineState};
use crate::map::{MapError, Pose, SignatureId, WorldMap, ZoneId};
use crate::memory::{EventLedger, Frame, PolicyTag, WorkingMemory};
use crate::policy::{FrameReport, PolicyError};
use crate::store::SignatureSource;
use crate::zone::{ActiveZoneSet, ZonePolicy, ZonePolicyParams};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub waypoints: Vec<String>,
    #[serde(default = "one")]
    pub speed_m_per_s: f64,
    #[serde(default = "one")]
    pub frame_hz: f64,
}

pub const SCENARIO_PRESETS: [&str; 2] = ["loop", "round-trip"];

impl Scenario {
    pub fn new(name: &str, waypoints: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            waypoints: waypoints.iter().map(|w| w.to_string()).collect(),
            speed_m_per_s: 1.0,
            frame_hz: 1.0,
        }
    }

    /// Lobby, around the corridor loop, and back to the lobby.
    pub fn loop_scenario() -> Self {
        Self::new("loop", &["L1", "H1", "C2", "H2", "C3", "L1"])
    }

    /// From room R21 along C2 into room R13 and back.
    pub fn round_trip() -> Self {
        Self::new("round-trip", &["R21", "C2", "R13", "C2", "R21"])
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "loop" => Some(Self::loop_scenario()),
            "round-trip" => Some(Self::round_trip()),
            _ => None,
        }
    }

    /// Distance covered per frame.
    pub fn step_m(&self) -> f64 {
        self.speed_m_per_s / self.frame_hz
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("scenario has no waypoints")]
    EmptyScenario,
    #[error("speed_m_per_s and frame_hz must be positive")]
    BadRate,
    #[error("unknown waypoint zone {0}")]
    UnknownWaypoint(String),
    #[error("waypoints {0} and {1} are not connected by a portal")]
    DisconnectedWaypoints(String, String),
    #[error("mismatched scenarios: {0}")]
    MismatchedScenarios(String),
    #[error("no poses to replay")]
    EmptyPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum PolicyConfig {
    Baseline(BaselineParams),
    Zone(ZonePolicyParams),
}

impl PolicyConfig {
    pub fn tag(&self) -> PolicyTag {
        match self {
            PolicyConfig::Baseline(_) => PolicyTag::Baseline,
            PolicyConfig::Zone(_) => PolicyTag::Zone,
        }
    }

    pub fn memory_thr(&self) -> usize {
        match self {
            PolicyConfig::Baseline(p) => p.memory_thr,
            PolicyConfig::Zone(p) => p.memory_thr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub frame: Frame,
    pub pose: Pose,
    pub curr_zone: Option<String>,
    pub localized: Option<SignatureId>,
    pub wm_size_end: usize,
    pub wm_size_peak: usize,
    pub loads: u64,
    pub unloads: u64,
    pub backlog: usize,
    /// Zone policy: the active zone set. Baseline: every zone with at least
    /// one loaded signature.
    pub active_zones: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceTotals {
    pub cumulative_loads: u64,
    pub cumulative_unloads: u64,
    /// Loads at frame 0.
    pub init_loads: u64,
    /// Baseline frame-0 batch load; 0 for the zone policy.
    pub batch_loads: u64,
    pub peak_wm: usize,
    pub frames: usize,
    pub transient_creates: u64,
    pub transient_drops: u64,
    pub max_backlog: usize,
}

impl TraceTotals {
    pub fn loads_excluding_batch(&self) -> u64 {
        self.cumulative_loads - self.batch_loads
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTrace {
    pub scenario: String,
    pub policy: PolicyTag,
    pub memory_thr: usize,
    pub records: Vec<TraceRecord>,
    pub totals: TraceTotals,
    pub failed: bool,
    pub error: Option<String>,
}

impl ScenarioTrace {
    /// Recomputes the totals that are a fold over the records.
    pub fn folded_totals(&self) -> (u64, u64, usize) {
        let loads = self.records.iter().map(|r| r.loads).sum();
        let unloads = self.records.iter().map(|r| r.unloads).sum();
        let peak = self.records.iter().map(|r| r.wm_size_peak).max().unwrap_or(0);
        (loads, unloads, peak)
    }
}

pub struct RunArtifacts {
    pub trace: ScenarioTrace,
    pub ledger: EventLedger,
    pub final_wm: WorkingMemory,
}

// ---------------------------------------------------------------------------
// path planning

type Point = (f64, f64);

fn pt(p: &Pose) -> Point {
    (p.x, p.y)
}

fn dist(a: Point, b: Point) -> f64 {
    libm::hypot(a.0 - b.0, a.1 - b.1)
}

/// Shortest path over the links between members of `zone`, from the member
/// nearest `from` to the member nearest `to`. Empty when the two are not
/// connected inside the zone.
fn route_in_zone(map: &WorldMap, zone: ZoneId, from: Point, to: Point) -> Result<Vec<Point>, MapError> {
    let members = map.signatures_of(zone)?;
    let nearest = |p: Point| map.nearest_among(&Pose::at(p.0, p.1), members.iter().copied());
    let (Some(src), Some(dst)) = (nearest(from), nearest(to)) else {
        return Ok(Vec::new());
    };
    let index: alloc::collections::BTreeMap<SignatureId, usize> =
        members.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let pos: Vec<Point> = members
        .iter()
        .map(|id| map.signature(*id).map(|s| pt(&s.pose)))
        .collect::<Result<_, _>>()?;
    let n = members.len();
    let mut best = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    best[index[&src]] = 0.0;
    loop {
        // Smallest tentative distance, ties by member order.
        let mut u = usize::MAX;
        for i in 0..n {
            if !done[i] && best[i].is_finite() && (u == usize::MAX || best[i] < best[u]) {
                u = i;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        if members[u] == dst {
            break;
        }
        for l in &map.signature(members[u])?.links {
            if let Some(&v) = index.get(l) {
                let d = best[u] + dist(pos[u], pos[v]);
                if d < best[v] {
                    best[v] = d;
                    prev[v] = u;
                }
            }
        }
    }
    let target = index[&dst];
    if !best[target].is_finite() {
        return Ok(Vec::new());
    }
    let mut out = vec![pos[target]];
    let mut cur = target;
    while prev[cur] != usize::MAX {
        cur = prev[cur];
        out.push(pos[cur]);
    }
    out.reverse();
    Ok(out)
}

fn resolve(map: &WorldMap, scenario: &Scenario) -> Result<Vec<ZoneId>, SimError> {
    scenario
        .waypoints
        .iter()
        .map(|w| {
            map.zone_by_name(w)
                .map(|z| z.id)
                .map_err(|_| SimError::UnknownWaypoint(w.clone()))
        })
        .collect()
}

fn shared_portal(map: &WorldMap, a: ZoneId, b: ZoneId) -> Option<Point> {
    map.zone(a)
        .ok()?
        .portals
        .iter()
        .find(|p| p.to_zone == b)
        .map(|p| pt(&p.position))
}

/// The polyline the robot follows, before sampling.
pub fn plan_polyline(map: &WorldMap, scenario: &Scenario) -> Result<Vec<Point>, SimError> {
    if scenario.waypoints.is_empty() {
        return Err(SimError::EmptyScenario);
    }
    let zones = resolve(map, scenario)?;
    let mut doors = Vec::with_capacity(zones.len().saturating_sub(1));
    for (k, w) in zones.windows(2).enumerate() {
        let p = shared_portal(map, w[0], w[1]).ok_or_else(|| {
            SimError::DisconnectedWaypoints(scenario.waypoints[k].clone(), scenario.waypoints[k + 1].clone())
        })?;
        doors.push(p);
    }
    let last = zones.len() - 1;
    let mut line: Vec<Point> = Vec::new();
    let push = |p: Point, line: &mut Vec<Point>| {
        if line.last().is_none_or(|q| dist(*q, p) > 1e-9) {
            line.push(p);
        }
    };
    for (k, &z) in zones.iter().enumerate() {
        let centroid = pt(&map
            .zone_centroid(z)
            .map_err(|_| SimError::UnknownWaypoint(scenario.waypoints[k].clone()))?);
        let entry = if k == 0 { centroid } else { doors[k - 1] };
        let exit = if k == last { centroid } else { doors[k] };
        let mut anchors = vec![entry];
        if dist(entry, exit) < 1e-9 && k != 0 && k != last {
            anchors.push(centroid);
        }
        anchors.push(exit);
        for pair in anchors.windows(2) {
            push(pair[0], &mut line);
            let hops = route_in_zone(map, z, pair[0], pair[1])
                .map_err(|_| SimError::UnknownWaypoint(scenario.waypoints[k].clone()))?;
            for p in hops {
                push(p, &mut line);
            }
            push(pair[1], &mut line);
        }
        if anchors.len() == 1 {
            push(anchors[0], &mut line);
        }
    }
    Ok(line)
}

/// Samples `line` every `step` meters of arc length, always keeping the end.
pub fn sample_polyline(line: &[Point], step: f64) -> Vec<Pose> {
    let Some(&first) = line.first() else {
        return Vec::new();
    };
    if line.len() == 1 {
        return vec![Pose::at(first.0, first.1)];
    }
    let heading = |a: Point, b: Point| libm::atan2(b.1 - a.1, b.0 - a.0);
    let mut out = Vec::new();
    let mut next_s = 0.0;
    let mut seg_start_s = 0.0;
    for w in line.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = dist(a, b);
        let th = heading(a, b);
        while next_s <= seg_start_s + len + 1e-9 {
            let t = ((next_s - seg_start_s) / len).clamp(0.0, 1.0);
            out.push(Pose::new(a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t, th));
            next_s = out.len() as f64 * step;
        }
        seg_start_s += len;
    }
    let end = line[line.len() - 1];
    if out.last().is_none_or(|p| dist(pt(p), end) > 1e-9) {
        let th = heading(line[line.len() - 2], end);
        out.push(Pose::new(end.0, end.1, th));
    }
    out
}

/// Poses for `scenario`, spaced `speed / frame_hz` meters apart.
pub fn plan_path(map: &WorldMap, scenario: &Scenario) -> Result<Vec<Pose>, SimError> {
    if !(scenario.speed_m_per_s > 0.0 && scenario.frame_hz > 0.0) || !scenario.step_m().is_finite() {
        return Err(SimError::BadRate);
    }
    let line = plan_polyline(map, scenario)?;
    Ok(sample_polyline(&line, scenario.step_m()))
}

// ---------------------------------------------------------------------------
// replay

enum Driver {
    Baseline(BaselineState),
    Zone(ZonePolicy),
}

fn zone_names(map: &WorldMap, ids: impl IntoIterator<Item = ZoneId>) -> Vec<String> {
    ids.into_iter()
        .filter_map(|z| map.zone(z).ok().map(|z| z.name.clone()))
        .collect()
}

fn loaded_zones(map: &WorldMap, wm: &WorkingMemory) -> BTreeSet<ZoneId> {
    wm.loaded_ids().filter_map(|id| map.zone_of(id).ok()).collect()
}

impl Driver {
    fn active(&self) -> Option<&ActiveZoneSet> {
        match self {
            Driver::Baseline(_) => None,
            Driver::Zone(z) => z.active(),
        }
    }

    fn active_names(&self, map: &WorldMap, wm: &WorkingMemory) -> Vec<String> {
        match self {
            Driver::Baseline(_) => zone_names(map, loaded_zones(map, wm)),
            Driver::Zone(z) => zone_names(map, z.active().map(|a| a.zone_ids()).unwrap_or_default()),
        }
    }
}

/// Replays `poses` and reports the full WM state after every frame to
/// `observe`. `start_zone` is where the zone policy starts; when `None` it
/// is the zone of the signature nearest the first pose.
#[allow(clippy::too_many_arguments)]
pub fn run_observed<S, F>(
    map: &WorldMap,
    store: &S,
    config: &PolicyConfig,
    scenario_name: &str,
    start_zone: Option<ZoneId>,
    poses: &[Pose],
    mut observe: F,
) -> Result<RunArtifacts, SimError>
where
    S: SignatureSource + ?Sized,
    F: FnMut(Frame, &WorkingMemory, Option<&ActiveZoneSet>),
{
    let first = *poses.first().ok_or(SimError::EmptyPath)?;
    let transient_base = map.max_signature_id().map_or(1, |id| id.0 + 1);
    let mut wm = WorkingMemory::new(config.memory_thr(), transient_base);
    let mut ledger = EventLedger::new();
    let mut trace = ScenarioTrace {
        scenario: scenario_name.to_string(),
        policy: config.tag(),
        memory_thr: config.memory_thr(),
        records: Vec::with_capacity(poses.len() + 1),
        totals: TraceTotals::default(),
        failed: false,
        error: None,
    };

    let mut driver = match config {
        PolicyConfig::Baseline(p) => Driver::Baseline(BaselineState::new(*p, map)),
        PolicyConfig::Zone(p) => Driver::Zone(ZonePolicy::new(*p)),
    };
    let init: Result<FrameReport, PolicyError> = match &mut driver {
        Driver::Baseline(b) => b.initial_localization(map, store, &mut wm, &mut ledger),
        Driver::Zone(z) => {
            let start = start_zone.or_else(|| map.nearest_signature(&first).and_then(|s| map.zone_of(s).ok()));
            match start {
                Some(zone) => z.start_in(map, store, &mut wm, &mut ledger, zone),
                None => Err(PolicyError::Map(MapError::UnknownZoneName("<empty map>".to_string()))),
            }
        }
    };

    let mut outcome = init.map(|r| (first, r));
    let mut i = 0usize;
    loop {
        match outcome {
            Ok((pose, report)) => {
                observe(report.frame, &wm, driver.active());
                let curr_zone = report.curr_zone.or_else(|| driver.active().map(|a| a.curr_zone()));
                trace.records.push(TraceRecord {
                    frame: report.frame,
                    pose,
                    curr_zone: curr_zone.and_then(|z| map.zone(z).ok().map(|z| z.name.clone())),
                    localized: report.localized,
                    wm_size_end: report.wm_size_end,
                    wm_size_peak: report.wm_size_peak,
                    loads: report.loads,
                    unloads: report.unloads,
                    backlog: report.backlog,
                    active_zones: driver.active_names(map, &wm),
                });
            }
            Err(e) => {
                trace.failed = true;
                trace.error = Some(e.to_string());
                break;
            }
        }
        let Some(pose) = poses.get(i) else {
            break;
        };
        let frame = i as Frame + 1;
        outcome = match &mut driver {
            Driver::Baseline(b) => b.step(map, store, &mut wm, &mut ledger, pose, frame),
            Driver::Zone(z) => z.step(map, store, &mut wm, &mut ledger, pose, frame),
        }
        .map(|r| (*pose, r));
        i += 1;
    }

    let (loads, unloads, peak) = trace.folded_totals();
    let init_loads = trace.records.first().map_or(0, |r| r.loads);
    trace.totals = TraceTotals {
        cumulative_loads: loads,
        cumulative_unloads: unloads,
        init_loads,
        batch_loads: if config.tag() == PolicyTag::Baseline {
            init_loads
        } else {
            0
        },
        peak_wm: peak,
        frames: trace.records.len(),
        transient_creates: ledger.transient_creates,
        transient_drops: ledger.transient_drops,
        max_backlog: trace.records.iter().map(|r| r.backlog).max().unwrap_or(0),
    };
    Ok(RunArtifacts {
        trace,
        ledger,
        final_wm: wm,
    })
}

/// Replays arbitrary poses; the zone policy starts in the zone of the
/// signature nearest the first pose.
pub fn run_poses<S>(
    map: &WorldMap,
    store: &S,
    config: &PolicyConfig,
    scenario_name: &str,
    poses: &[Pose],
) -> Result<ScenarioTrace, SimError>
where
    S: SignatureSource + ?Sized,
{
    run_observed(map, store, config, scenario_name, None, poses, |_, _, _| {}).map(|a| a.trace)
}

pub fn run_detailed<S>(
    map: &WorldMap,
    store: &S,
    config: &PolicyConfig,
    scenario: &Scenario,
) -> Result<RunArtifacts, SimError>
where
    S: SignatureSource + ?Sized,
{
    let poses = plan_path(map, scenario)?;
    let start = resolve(map, scenario)?[0];
    run_observed(map, store, config, &scenario.name, Some(start), &poses, |_, _, _| {})
}

/// Plans `scenario` on `map` and replays it. Policy failures end the run
/// early and come back as a trace with `failed` set.
pub fn run<S>(map: &WorldMap, store: &S, config: &PolicyConfig, scenario: &Scenario) -> Result<ScenarioTrace, SimError>
where
    S: SignatureSource + ?Sized,
{
    run_detailed(map, store, config, scenario).map(|a| a.trace)
}

// ---------------------------------------------------------------------------
// comparison

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameDelta {
    pub frame: Frame,
    /// `b - a` for each quantity.
    pub loads: i64,
    pub unloads: i64,
    pub wm_size_end: i64,
}

/// `b` measured against `a`. Loads exclude each side's frame-0 batch load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub policy_a: PolicyTag,
    pub policy_b: PolicyTag,
    pub frames: usize,
    pub loads_a: u64,
    pub loads_b: u64,
    pub unloads_a: u64,
    pub unloads_b: u64,
    pub batch_loads_a: u64,
    pub batch_loads_b: u64,
    /// `loads_b / loads_a`; 1 when both are 0, absent when only `a` is 0.
    pub load_ratio: Option<f64>,
    pub unload_ratio: Option<f64>,
    pub peak_wm_a: usize,
    pub peak_wm_b: usize,
    pub load_delta: i64,
    pub unload_delta: i64,
    pub peak_wm_delta: i64,
    pub per_frame: Vec<FrameDelta>,
}

fn ratio(b: u64, a: u64) -> Option<f64> {
    match (a, b) {
        (0, 0) => Some(1.0),
        (0, _) => None,
        _ => Some(b as f64 / a as f64),
    }
}

pub fn compare(a: &ScenarioTrace, b: &ScenarioTrace) -> Result<ComparisonReport, SimError> {
    if a.scenario != b.scenario {
        return Err(SimError::MismatchedScenarios(alloc::format!(
            "scenario {} vs {}",
            a.scenario,
            b.scenario
        )));
    }
    if a.records.len() != b.records.len() {
        return Err(SimError::MismatchedScenarios(alloc::format!(
            "{} frames vs {}",
            a.records.len(),
            b.records.len()
        )));
    }
    let (ta, tb) = (&a.totals, &b.totals);
    let (la, lb) = (ta.loads_excluding_batch(), tb.loads_excluding_batch());
    Ok(ComparisonReport {
        scenario: a.scenario.clone(),
        policy_a: a.policy,
        policy_b: b.policy,
        frames: a.records.len(),
        loads_a: la,
        loads_b: lb,
        unloads_a: ta.cumulative_unloads,
        unloads_b: tb.cumulative_unloads,
        batch_loads_a: ta.batch_loads,
        batch_loads_b: tb.batch_loads,
        load_ratio: ratio(lb, la),
        unload_ratio: ratio(tb.cumulative_unloads, ta.cumulative_unloads),
        peak_wm_a: ta.peak_wm,
        peak_wm_b: tb.peak_wm,
        load_delta: lb as i64 - la as i64,
        unload_delta: tb.cumulative_unloads as i64 - ta.cumulative_unloads as i64,
        peak_wm_delta: tb.peak_wm as i64 - ta.peak_wm as i64,
        per_frame: a
            .records
            .iter()
            .zip(&b.records)
            .map(|(ra, rb)| FrameDelta {
                frame: ra.frame,
                loads: rb.loads as i64 - ra.loads as i64,
                unloads: rb.unloads as i64 - ra.unloads as i64,
                wm_size_end: rb.wm_size_end as i64 - ra.wm_size_end as i64,
            })
            .collect(),
    })
}
