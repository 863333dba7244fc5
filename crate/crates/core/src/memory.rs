//! Working Memory tier and the load/unload event ledger.
//!
//! [`WorkingMemory`] only records what is loaded; deciding what to load or
//! forget is the policies' job. Every transfer is appended to an
//! [`EventLedger`], whose counters are the headline metrics.
//!
//! The per-frame localization signature is tracked as a transient: it gets
//! its own event kinds and is never part of `wm_size()`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::map::SignatureId;

pub type Frame = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotMeta {
    pub loaded_frame: Frame,
    pub last_used_frame: Frame,
    pub immune: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    Load,
    Unload,
    TransientCreate,
    TransientDrop,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Load => "Load",
            EventKind::Unload => "Unload",
            EventKind::TransientCreate => "TransientCreate",
            EventKind::TransientDrop => "TransientDrop",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which policy issued an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyTag {
    Baseline,
    Zone,
}

impl PolicyTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyTag::Baseline => "baseline",
            PolicyTag::Zone => "zone",
        }
    }
}

impl fmt::Display for PolicyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEvent {
    pub frame: Frame,
    pub kind: EventKind,
    pub sig: SignatureId,
    pub policy_tag: PolicyTag,
}

/// Append-only event log with running counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLedger {
    events: Vec<MemoryEvent>,
    pub cumulative_loads: u64,
    pub cumulative_unloads: u64,
    pub transient_creates: u64,
    pub transient_drops: u64,
}

impl EventLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[MemoryEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    fn push(&mut self, event: MemoryEvent) {
        debug_assert!(
            self.events.last().is_none_or(|e| e.frame <= event.frame),
            "ledger frames must be non-decreasing"
        );
        match event.kind {
            EventKind::Load => self.cumulative_loads += 1,
            EventKind::Unload => self.cumulative_unloads += 1,
            EventKind::TransientCreate => self.transient_creates += 1,
            EventKind::TransientDrop => self.transient_drops += 1,
        }
        self.events.push(event);
    }

    /// Folds Load/Unload events over an empty WM.
    pub fn replay(&self) -> BTreeSet<SignatureId> {
        let mut loaded = BTreeSet::new();
        for e in &self.events {
            match e.kind {
                EventKind::Load => {
                    loaded.insert(e.sig);
                }
                EventKind::Unload => {
                    loaded.remove(&e.sig);
                }
                EventKind::TransientCreate | EventKind::TransientDrop => {}
            }
        }
        loaded
    }

    pub fn count_in_frame(&self, frame: Frame, kind: EventKind) -> u64 {
        self.events
            .iter()
            .filter(|e| e.frame == frame && e.kind == kind)
            .count() as u64
    }
}

/// Result of [`WorkingMemory::unload_from_wm`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnloadOutcome {
    pub removed: usize,
    /// Loaded ids that were kept because they are immune.
    pub skipped_immune: Vec<SignatureId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkingMemory {
    loaded: BTreeMap<SignatureId, SlotMeta>,
    memory_thr: usize,
    transient: Option<SignatureId>,
    transient_base: u64,
}

impl WorkingMemory {
    /// `transient_base` must exceed every map signature id; transient ids
    /// are `transient_base + frame`.
    pub fn new(memory_thr: usize, transient_base: u64) -> Self {
        Self {
            loaded: BTreeMap::new(),
            memory_thr,
            transient: None,
            transient_base,
        }
    }

    pub fn memory_thr(&self) -> usize {
        self.memory_thr
    }

    /// Number of loaded map signatures, transient excluded.
    pub fn wm_size(&self) -> usize {
        self.loaded.len()
    }

    pub fn contains(&self, id: SignatureId) -> bool {
        self.loaded.contains_key(&id)
    }

    pub fn meta(&self, id: SignatureId) -> Option<&SlotMeta> {
        self.loaded.get(&id)
    }

    pub fn loaded_ids(&self) -> impl Iterator<Item = SignatureId> + '_ {
        self.loaded.keys().copied()
    }

    pub fn loaded(&self) -> impl Iterator<Item = (SignatureId, &SlotMeta)> + '_ {
        self.loaded.iter().map(|(k, v)| (*k, v))
    }

    pub fn loaded_set(&self) -> BTreeSet<SignatureId> {
        self.loaded.keys().copied().collect()
    }

    pub fn immune_count(&self) -> usize {
        self.loaded.values().filter(|m| m.immune).count()
    }

    pub fn transient(&self) -> Option<SignatureId> {
        self.transient
    }

    /// Adds the ids not already loaded; returns how many were added.
    pub fn load_into_wm<I>(&mut self, ledger: &mut EventLedger, ids: I, frame: Frame, tag: PolicyTag) -> usize
    where
        I: IntoIterator<Item = SignatureId>,
    {
        let mut added = 0;
        for id in ids {
            if self.loaded.contains_key(&id) {
                continue;
            }
            self.loaded.insert(
                id,
                SlotMeta {
                    loaded_frame: frame,
                    last_used_frame: frame,
                    immune: false,
                },
            );
            ledger.push(MemoryEvent {
                frame,
                kind: EventKind::Load,
                sig: id,
                policy_tag: tag,
            });
            added += 1;
        }
        added
    }

    /// Removes the loaded, non-immune ids among `ids`.
    pub fn unload_from_wm<I>(&mut self, ledger: &mut EventLedger, ids: I, frame: Frame, tag: PolicyTag) -> UnloadOutcome
    where
        I: IntoIterator<Item = SignatureId>,
    {
        let mut out = UnloadOutcome::default();
        for id in ids {
            match self.loaded.get(&id) {
                None => {}
                Some(meta) if meta.immune => out.skipped_immune.push(id),
                Some(_) => {
                    self.loaded.remove(&id);
                    ledger.push(MemoryEvent {
                        frame,
                        kind: EventKind::Unload,
                        sig: id,
                        policy_tag: tag,
                    });
                    out.removed += 1;
                }
            }
        }
        out
    }

    pub fn touch(&mut self, id: SignatureId, frame: Frame) {
        if let Some(meta) = self.loaded.get_mut(&id) {
            meta.last_used_frame = frame;
        }
    }

    pub fn set_immune<I>(&mut self, ids: I, flag: bool)
    where
        I: IntoIterator<Item = SignatureId>,
    {
        for id in ids {
            if let Some(meta) = self.loaded.get_mut(&id) {
                meta.immune = flag;
            }
        }
    }

    pub fn clear_immunity(&mut self) {
        for meta in self.loaded.values_mut() {
            meta.immune = false;
        }
    }

    pub fn create_transient(&mut self, ledger: &mut EventLedger, frame: Frame, tag: PolicyTag) -> SignatureId {
        if self.transient.is_some() {
            self.drop_transient(ledger, frame, tag);
        }
        let id = SignatureId(self.transient_base + frame);
        self.transient = Some(id);
        ledger.push(MemoryEvent {
            frame,
            kind: EventKind::TransientCreate,
            sig: id,
            policy_tag: tag,
        });
        id
    }

    pub fn drop_transient(&mut self, ledger: &mut EventLedger, frame: Frame, tag: PolicyTag) {
        if let Some(id) = self.transient.take() {
            ledger.push(MemoryEvent {
                frame,
                kind: EventKind::TransientDrop,
                sig: id,
                policy_tag: tag,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ids(r: core::ops::RangeInclusive<u64>) -> Vec<SignatureId> {
        r.map(SignatureId).collect()
    }

    const TAG: PolicyTag = PolicyTag::Zone;

    #[test]
    fn load_is_idempotent() {
        let mut wm = WorkingMemory::new(100, 1000);
        let mut ledger = EventLedger::new();
        assert_eq!(wm.wm_size(), 0);
        assert_eq!(wm.load_into_wm(&mut ledger, ids(1..=3), 0, TAG), 3);
        assert_eq!(ledger.cumulative_loads, 3);
        assert_eq!(ledger.len(), 3);
        assert_eq!(wm.load_into_wm(&mut ledger, ids(1..=3), 1, TAG), 0);
        assert_eq!(ledger.len(), 3);
    }

    #[test]
    fn load_superset_adds_only_the_difference() {
        let mut wm = WorkingMemory::new(100, 1000);
        let mut ledger = EventLedger::new();
        let zone: Vec<_> = ids(10..=59);
        wm.load_into_wm(&mut ledger, zone.iter().copied(), 0, TAG);
        let mut bigger = zone.clone();
        bigger.push(SignatureId(77));
        let expected = bigger.iter().filter(|s| !zone.contains(s)).count();
        assert_eq!(wm.load_into_wm(&mut ledger, bigger, 1, TAG), expected);
        assert_eq!(expected, 1);
    }

    #[test]
    fn unload_skips_absent_and_immune() {
        let mut wm = WorkingMemory::new(100, 1000);
        let mut ledger = EventLedger::new();
        wm.load_into_wm(&mut ledger, ids(1..=10), 0, TAG);
        assert_eq!(wm.wm_size(), 10);

        let out = wm.unload_from_wm(&mut ledger, [SignatureId(50)], 1, TAG);
        assert_eq!(out, UnloadOutcome::default());
        assert_eq!(ledger.cumulative_unloads, 0);

        let out = wm.unload_from_wm(&mut ledger, ids(1..=5), 1, TAG);
        assert_eq!(out.removed, 5);

        wm.set_immune([SignatureId(6), SignatureId(7)], true);
        let request = ids(6..=12);
        let loaded_in_request = request.iter().filter(|s| wm.contains(**s)).count();
        let out = wm.unload_from_wm(&mut ledger, request, 2, TAG);
        assert_eq!(out.removed, loaded_in_request - 2);
        assert_eq!(out.skipped_immune, vec![SignatureId(6), SignatureId(7)]);
        assert_eq!(wm.wm_size(), 2);
        assert_eq!(ledger.cumulative_unloads, 8);
    }

    #[test]
    fn touch_updates_only_loaded() {
        let mut wm = WorkingMemory::new(100, 1000);
        let mut ledger = EventLedger::new();
        wm.load_into_wm(&mut ledger, [SignatureId(1)], 3, TAG);
        wm.touch(SignatureId(1), 9);
        wm.touch(SignatureId(2), 9);
        assert_eq!(wm.meta(SignatureId(1)).unwrap().last_used_frame, 9);
        assert_eq!(wm.meta(SignatureId(1)).unwrap().loaded_frame, 3);
        assert!(wm.meta(SignatureId(2)).is_none());
    }

    #[test]
    fn transients_are_counted_apart() {
        let mut wm = WorkingMemory::new(100, 1000);
        let mut ledger = EventLedger::new();
        wm.load_into_wm(&mut ledger, ids(1..=4), 0, TAG);
        let t = wm.create_transient(&mut ledger, 5, TAG);
        assert_eq!(t, SignatureId(1005));
        assert_eq!(wm.wm_size(), 4);
        wm.drop_transient(&mut ledger, 5, TAG);
        assert_eq!(ledger.cumulative_loads, 4);
        assert_eq!(ledger.transient_creates, 1);
        assert_eq!(ledger.transient_drops, 1);
        assert_eq!(wm.transient(), None);
    }

    #[test]
    fn replay_reproduces_loaded_set() {
        let mut wm = WorkingMemory::new(100, 1000);
        let mut ledger = EventLedger::new();
        wm.load_into_wm(&mut ledger, ids(1..=20), 0, TAG);
        wm.unload_from_wm(&mut ledger, ids(5..=9), 1, TAG);
        wm.create_transient(&mut ledger, 2, TAG);
        wm.load_into_wm(&mut ledger, ids(7..=25), 2, TAG);
        wm.drop_transient(&mut ledger, 2, TAG);
        assert_eq!(ledger.replay(), wm.loaded_set());
        assert_eq!(ledger.cumulative_loads - ledger.cumulative_unloads, wm.wm_size() as u64);
    }
}
