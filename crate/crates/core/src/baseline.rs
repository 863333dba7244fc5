//! Behavioral model of a retrieve-first / forget-later SLAM memory manager.
//!
//! One frame runs, in order: localize, retrieve (capped by `max_retrieved`),
//! immunize, forget down to `memory_thr`, drop the transient. Because
//! retrieval happens before forgetting, the WM peaks above the threshold
//! inside each frame, and when the immune set alone exceeds the threshold
//! the WM stays above it at the end of the frame too.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::map::{Pose, SignatureId, WorldMap};
use crate::memory::{EventLedger, Frame, PolicyTag, WorkingMemory};
use crate::policy::{FrameReport, PolicyError};
use crate::store::SignatureSource;

const TAG: PolicyTag = PolicyTag::Baseline;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub memory_thr: usize,
    /// Per-frame retrieval cap. `usize::MAX` means unlimited.
    pub max_retrieved: usize,
    pub local_immunization_ratio: f64,
    /// Graph hops around the localized node considered for retrieval.
    pub neighborhood_depth: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            memory_thr: 100,
            max_retrieved: 10,
            local_immunization_ratio: 0.25,
            neighborhood_depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    pub params: BaselineParams,
    pub localized_node: Option<SignatureId>,
    backlog: VecDeque<SignatureId>,
    in_backlog: BTreeSet<SignatureId>,
    weights: BTreeMap<SignatureId, u64>,
}

/// Signatures within `depth` hops of `start`, sorted by (hop, id).
pub fn neighborhood(map: &WorldMap, start: SignatureId, depth: usize) -> Vec<(usize, SignatureId)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if !map.signatures.contains_key(&start) {
        return out;
    }
    seen.insert(start);
    let mut frontier = alloc::vec![start];
    out.push((0, start));
    for hop in 1..=depth {
        let mut next = BTreeSet::new();
        for id in &frontier {
            for n in &map.signatures[id].links {
                if map.signatures.contains_key(n) && !seen.contains(n) {
                    next.insert(*n);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for n in &next {
            seen.insert(*n);
            out.push((hop, *n));
        }
        frontier = next.into_iter().collect();
    }
    out
}

impl BaselineState {
    pub fn new(params: BaselineParams, map: &WorldMap) -> Self {
        Self {
            params,
            localized_node: None,
            backlog: VecDeque::new(),
            in_backlog: BTreeSet::new(),
            weights: map.signatures.values().map(|s| (s.id, s.weight)).collect(),
        }
    }

    pub fn backlog(&self) -> impl Iterator<Item = SignatureId> + '_ {
        self.backlog.iter().copied()
    }

    pub fn backlog_len(&self) -> usize {
        self.backlog.len()
    }

    pub fn weight(&self, id: SignatureId) -> u64 {
        self.weights.get(&id).copied().unwrap_or(0)
    }

    /// Frame-0 behavior: the whole map is batch-loaded into WM.
    pub fn initial_localization<S>(
        &mut self,
        map: &WorldMap,
        store: &S,
        wm: &mut WorkingMemory,
        ledger: &mut EventLedger,
    ) -> Result<FrameReport, PolicyError>
    where
        S: SignatureSource + ?Sized,
    {
        if wm.wm_size() != 0 {
            return Err(PolicyError::WmNotEmpty);
        }
        let ids: Vec<SignatureId> = map.signatures.keys().copied().collect();
        let records = store.fetch(&ids)?;
        let loads = wm.load_into_wm(ledger, records.iter().map(|r| r.signature.id), 0, TAG);
        Ok(FrameReport {
            frame: 0,
            loads: loads as u64,
            wm_size_peak: wm.wm_size(),
            wm_size_end: wm.wm_size(),
            ..FrameReport::default()
        })
    }

    #[allow(clippy::too_many_arguments)]
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
        let mut report = FrameReport {
            frame,
            ..FrameReport::default()
        };

        // 1. localize
        wm.create_transient(ledger, frame, TAG);
        self.localized_node = map.nearest_signature(pose);
        report.localized = self.localized_node;
        if let Some(node) = self.localized_node {
            wm.touch(node, frame);
            *self.weights.entry(node).or_insert(0) += 1;
            report.curr_zone = map.zone_of(node).ok();
        }

        // 2. retrieve
        if let Some(node) = self.localized_node {
            for (_, id) in neighborhood(map, node, self.params.neighborhood_depth) {
                if !wm.contains(id) && self.in_backlog.insert(id) {
                    self.backlog.push_back(id);
                }
            }
        }
        let take = self.params.max_retrieved.min(self.backlog.len());
        let batch: Vec<SignatureId> = self.backlog.drain(..take).collect();
        for id in &batch {
            self.in_backlog.remove(id);
        }
        if !batch.is_empty() {
            let records = match store.fetch(&batch) {
                Ok(r) => r,
                Err(e) => {
                    wm.drop_transient(ledger, frame, TAG);
                    return Err(e.into());
                }
            };
            report.loads = wm.load_into_wm(ledger, records.iter().map(|r| r.signature.id), frame, TAG) as u64;
        }
        report.wm_size_peak = wm.wm_size();

        // 3. immunize
        wm.clear_immunity();
        let immune_n = immune_quota(self.params.local_immunization_ratio, wm.wm_size());
        let mut by_distance: Vec<(f64, SignatureId)> = wm
            .loaded_ids()
            .map(|id| {
                (
                    map.signatures
                        .get(&id)
                        .map_or(f64::INFINITY, |s| pose.distance(&s.pose)),
                    id,
                )
            })
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        wm.set_immune(by_distance.iter().take(immune_n).map(|(_, id)| *id), true);

        // 4. forget
        let excess = wm.wm_size().saturating_sub(self.params.memory_thr);
        if excess > 0 {
            let mut pool: Vec<(u64, Frame, SignatureId)> = wm
                .loaded()
                .filter(|(_, m)| !m.immune)
                .map(|(id, m)| (self.weight(id), m.last_used_frame, id))
                .collect();
            pool.sort_unstable();
            for (_, _, id) in pool.into_iter().take(excess) {
                report.unloads += wm.unload_from_wm(ledger, [id], frame, TAG).removed as u64;
            }
        }

        // 5. drop transient
        wm.drop_transient(ledger, frame, TAG);
        report.wm_size_end = wm.wm_size();
        report.backlog = self.backlog.len();
        Ok(report)
    }
}

/// `ceil(ratio * wm_size)`, clamped to `[0, wm_size]`.
pub fn immune_quota(ratio: f64, wm_size: usize) -> usize {
    let raw = libm::ceil(ratio.clamp(0.0, 1.0) * wm_size as f64);
    (raw as usize).min(wm_size)
}
