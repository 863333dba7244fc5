//! Zone-based working-memory management for large SLAM maps.
//!
//! The crate models a two-tier signature hierarchy (Working Memory over a
//! Long-Term Memory store) and two policies that decide what stays in WM:
//!
//! - [`baseline`]: a behavioral model of a retrieve-first / forget-later SLAM
//!   memory manager with immunization and a per-frame retrieval cap.
//! - [`zone`]: zone-granular loading with least-recently-used zone eviction
//!   under a strict signature-count threshold.
//!
//! [`worldgen`] builds deterministic synthetic hospital worlds and
//! [`sim`] replays scripted trajectories through either policy.
//!
//! The crate is `no_std` and only needs `alloc`. Persistent storage, file
//! formats and the CLI live in the `zonemem` companion crate.

#![no_std]

extern crate alloc;

pub mod baseline;
pub mod map;
pub mod memory;
pub mod policy;
pub mod sim;
pub mod store;
pub mod worldgen;
pub mod zone;

pub use baseline::{BaselineParams, BaselineState};
pub use map::{
    LayerTag, MapError, MapMeta, Portal, Pose, Signature, SignatureId, Violation, WorldMap, Zone, ZoneId, ZoneKind,
};
pub use memory::{EventKind, EventLedger, Frame, MemoryEvent, PolicyTag, SlotMeta, WorkingMemory};
pub use policy::{FrameReport, PolicyError};
pub use sim::{
    compare, plan_path, run, run_detailed, run_poses, ComparisonReport, PolicyConfig, RunArtifacts, Scenario,
    ScenarioTrace, SimError, TraceRecord, TraceTotals,
};
pub use store::{fetch_zone, MemStore, Record, SignatureSource, StoreError, StoreStats};
pub use worldgen::{generate, scenario_world, WorldSpec, Zoning};
pub use zone::{ActiveZoneSet, OversizedZoneMode, ZonePolicy, ZonePolicyParams};
