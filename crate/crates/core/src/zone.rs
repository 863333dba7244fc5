//! Zone-granular memory policy.
//!
//! The WM always holds exactly the keyframe sets of the active zones. When
//! the robot comes within a portal's radius, the zone on the other side is
//! activated; if the active zones plus the newcomer would exceed
//! `memory_thr`, least-recently-used zones are evicted whole until it fits.
//! The zone being activated and the zone the robot stands in are never
//! evicted.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::map::{MapError, Pose, WorldMap, ZoneId};
use crate::memory::{EventLedger, Frame, PolicyTag, WorkingMemory};
use crate::policy::{FrameReport, PolicyError};
use crate::store::{fetch_zone, SignatureSource};

const TAG: PolicyTag = PolicyTag::Zone;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OversizedZoneMode {
    /// Refuse zones that cannot fit under the threshold.
    #[default]
    Error,
    /// Evict what can be evicted and load anyway.
    ForceLoad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZonePolicyParams {
    pub memory_thr: usize,
    pub portal_radius_override: Option<f64>,
    pub oversized_zone_mode: OversizedZoneMode,
}

impl Default for ZonePolicyParams {
    fn default() -> Self {
        Self {
            memory_thr: 100,
            portal_radius_override: None,
            oversized_zone_mode: OversizedZoneMode::Error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneActivity {
    pub activated_frame: Frame,
    /// Last frame the robot localized inside the zone.
    pub last_active_frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveZoneSet {
    zones: BTreeMap<ZoneId, ZoneActivity>,
    curr_zone: ZoneId,
}

impl ActiveZoneSet {
    pub fn curr_zone(&self) -> ZoneId {
        self.curr_zone
    }

    pub fn contains(&self, zone: ZoneId) -> bool {
        self.zones.contains_key(&zone)
    }

    pub fn activity(&self, zone: ZoneId) -> Option<&ZoneActivity> {
        self.zones.get(&zone)
    }

    pub fn zones(&self) -> impl Iterator<Item = (ZoneId, &ZoneActivity)> + '_ {
        self.zones.iter().map(|(k, v)| (*k, v))
    }

    pub fn zone_ids(&self) -> Vec<ZoneId> {
        self.zones.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    /// Total keyframe count of the active zones.
    pub fn member_count(&self, map: &WorldMap) -> Result<usize, MapError> {
        self.zones.keys().map(|z| map.zone_size(*z)).sum()
    }
}

/// Outcome of a portal scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchProbe {
    pub zone: Option<ZoneId>,
    /// Distinct inactive zones whose portal was within radius.
    pub qualifying: usize,
}

/// Zone behind the nearest in-radius portal of `curr_zone` that is not yet
/// active. Distance ties go to the smaller zone id.
pub fn get_switching_zone(
    map: &WorldMap,
    pose: &Pose,
    curr_zone: ZoneId,
    active: &ActiveZoneSet,
    radius_override: Option<f64>,
) -> Result<SwitchProbe, MapError> {
    let mut hits: Vec<(f64, ZoneId)> = Vec::new();
    for p in &map.zone(curr_zone)?.portals {
        if active.contains(p.to_zone) {
            continue;
        }
        let d = pose.distance(&p.position);
        if d <= radius_override.unwrap_or(p.radius) {
            hits.push((d, p.to_zone));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut distinct: Vec<ZoneId> = hits.iter().map(|h| h.1).collect();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(SwitchProbe {
        zone: hits.first().map(|h| h.1),
        qualifying: distinct.len(),
    })
}

/// Least recently used active zone outside `exclude`: smallest
/// last_active_frame, then activated_frame, then zone id.
pub fn select_oldest_zone(active: &ActiveZoneSet, exclude: &[ZoneId]) -> Option<ZoneId> {
    active
        .zones
        .iter()
        .filter(|(z, _)| !exclude.contains(z))
        .min_by_key(|(z, a)| (a.last_active_frame, a.activated_frame, **z))
        .map(|(z, _)| *z)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivationReport {
    pub evicted: Vec<ZoneId>,
    pub loads: u64,
    pub unloads: u64,
    /// Only possible under `ForceLoad`.
    pub over_threshold: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonePolicy {
    pub params: ZonePolicyParams,
    active: Option<ActiveZoneSet>,
}

impl ZonePolicy {
    pub fn new(params: ZonePolicyParams) -> Self {
        Self { params, active: None }
    }

    pub fn active(&self) -> Option<&ActiveZoneSet> {
        self.active.as_ref()
    }

    /// Initializes with `zone` as the only active zone.
    pub fn start_in<S>(
        &mut self,
        map: &WorldMap,
        store: &S,
        wm: &mut WorkingMemory,
        ledger: &mut EventLedger,
        zone: ZoneId,
    ) -> Result<FrameReport, PolicyError>
    where
        S: SignatureSource + ?Sized,
    {
        if wm.wm_size() != 0 {
            return Err(PolicyError::WmNotEmpty);
        }
        let size = map.zone_size(zone)?;
        if size > self.params.memory_thr && self.params.oversized_zone_mode == OversizedZoneMode::Error {
            return Err(PolicyError::OversizedZone {
                zone,
                size,
                thr: self.params.memory_thr,
            });
        }
        let records = fetch_zone(store, map, zone)?;
        let loads = wm.load_into_wm(ledger, records.iter().map(|r| r.signature.id), 0, TAG);
        let mut zones = BTreeMap::new();
        zones.insert(
            zone,
            ZoneActivity {
                activated_frame: 0,
                last_active_frame: 0,
            },
        );
        self.active = Some(ActiveZoneSet { zones, curr_zone: zone });
        Ok(FrameReport {
            frame: 0,
            curr_zone: Some(zone),
            loads: loads as u64,
            wm_size_peak: wm.wm_size(),
            wm_size_end: wm.wm_size(),
            activated: Some(zone),
            ..FrameReport::default()
        })
    }

    /// Marks `zone` as the current zone, localized at `frame`.
    pub fn enter_zone(&mut self, zone: ZoneId, frame: Frame) -> Result<(), PolicyError> {
        let active = self.active.as_mut().ok_or(PolicyError::NotInitialized)?;
        let activity = active
            .zones
            .get_mut(&zone)
            .ok_or(PolicyError::Map(MapError::UnknownZone(zone)))?;
        activity.last_active_frame = frame;
        active.curr_zone = zone;
        Ok(())
    }

    /// Adds `z_new` to the active set, evicting LRU zones until the
    /// predicted WM size fits, then loads `z_new`.
    pub fn activate<S>(
        &mut self,
        map: &WorldMap,
        store: &S,
        wm: &mut WorkingMemory,
        ledger: &mut EventLedger,
        z_new: ZoneId,
        frame: Frame,
    ) -> Result<ActivationReport, PolicyError>
    where
        S: SignatureSource + ?Sized,
    {
        let thr = self.params.memory_thr;
        let strict = self.params.oversized_zone_mode == OversizedZoneMode::Error;
        let active = self.active.as_mut().ok_or(PolicyError::NotInitialized)?;
        if active.contains(z_new) {
            return Err(PolicyError::ZoneAlreadyActive(z_new));
        }
        let new_size = map.zone_size(z_new)?;
        if new_size > thr && strict {
            return Err(PolicyError::OversizedZone {
                zone: z_new,
                size: new_size,
                thr,
            });
        }
        let curr = active.curr_zone;
        let mut predicted = active.member_count(map)? + new_size;
        if strict {
            let evictable: usize = active
                .zones
                .keys()
                .filter(|z| **z != curr)
                .map(|z| map.zone_size(*z))
                .sum::<Result<usize, _>>()?;
            if predicted - evictable > thr {
                return Err(PolicyError::EvictionExhausted {
                    zone: z_new,
                    needed: predicted - evictable,
                    thr,
                });
            }
        }

        active.zones.insert(
            z_new,
            ZoneActivity {
                activated_frame: frame,
                last_active_frame: frame,
            },
        );
        let mut report = ActivationReport::default();
        while predicted > thr {
            let Some(z_old) = select_oldest_zone(active, &[z_new, curr]) else {
                break;
            };
            active.zones.remove(&z_old);
            let members = map.signatures_of(z_old)?;
            predicted -= members.len();
            report.unloads += wm.unload_from_wm(ledger, members.iter().copied(), frame, TAG).removed as u64;
            report.evicted.push(z_old);
        }
        report.over_threshold = predicted > thr;

        let records = fetch_zone(store, map, z_new)?;
        report.loads = wm.load_into_wm(ledger, records.iter().map(|r| r.signature.id), frame, TAG) as u64;
        Ok(report)
    }

    pub fn step<S>(
        &mut self,
        map: &WorldMap,
        store: &S,
        wm: &mut WorkingMemory,
        ledger: &mut EventLedger,
        pose: &Pose,
        frame: Frame,
    ) -> Result<FrameReport, PolicyError>
    where
        S: SignatureSource + ?Sized,
    {
        if self.active.is_none() {
            return Err(PolicyError::NotInitialized);
        }
        let mut report = FrameReport {
            frame,
            ..FrameReport::default()
        };
        let size_before = wm.wm_size();

        wm.create_transient(ledger, frame, TAG);
        let node = map.nearest_among(pose, wm.loaded_ids());
        report.localized = node;
        if let Some(node) = node {
            let z = map.zone_of(node)?;
            wm.touch(node, frame);
            self.enter_zone(z, frame)?;
        }

        let probe = {
            let active = self.active.as_ref().ok_or(PolicyError::NotInitialized)?;
            get_switching_zone(map, pose, active.curr_zone, active, self.params.portal_radius_override)?
        };
        report.multi_portal = probe.qualifying > 1;
        if let Some(z_new) = probe.zone {
            match self.activate(map, store, wm, ledger, z_new, frame) {
                Ok(a) => {
                    report.loads = a.loads;
                    report.unloads = a.unloads;
                    report.evicted = a.evicted;
                    report.activated = Some(z_new);
                }
                Err(e) => {
                    wm.drop_transient(ledger, frame, TAG);
                    return Err(e);
                }
            }
        }

        wm.drop_transient(ledger, frame, TAG);
        report.curr_zone = self.active.as_ref().map(|a| a.curr_zone);
        report.wm_size_end = wm.wm_size();
        report.wm_size_peak = size_before.max(report.wm_size_end);
        Ok(report)
    }
}
