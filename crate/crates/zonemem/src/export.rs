//! Tabular and summary outputs of a run.

use serde::{Deserialize, Serialize};
use zonemem_core::{EventLedger, PolicyTag, ScenarioTrace, StoreStats};

use crate::error::Result;

/// Column order of `trace.csv`. Stable across versions.
pub const TRACE_CSV_HEADER: [&str; 14] = [
    "frame",
    "x",
    "y",
    "theta",
    "curr_zone",
    "localized",
    "wm_size_end",
    "wm_size_peak",
    "loads",
    "unloads",
    "cumulative_loads",
    "cumulative_unloads",
    "backlog",
    "active_zones",
];

/// Column order of `ledger.csv`. Stable across versions.
pub const LEDGER_CSV_HEADER: [&str; 4] = ["frame", "kind", "sig", "policy_tag"];

pub fn trace_csv(trace: &ScenarioTrace) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_CSV_HEADER)?;
    let (mut cl, mut cu) = (0u64, 0u64);
    for r in &trace.records {
        cl += r.loads;
        cu += r.unloads;
        w.write_record([
            r.frame.to_string(),
            format!("{:.6}", r.pose.x),
            format!("{:.6}", r.pose.y),
            format!("{:.6}", r.pose.theta),
            r.curr_zone.clone().unwrap_or_default(),
            r.localized.map(|s| s.to_string()).unwrap_or_default(),
            r.wm_size_end.to_string(),
            r.wm_size_peak.to_string(),
            r.loads.to_string(),
            r.unloads.to_string(),
            cl.to_string(),
            cu.to_string(),
            r.backlog.to_string(),
            r.active_zones.join(";"),
        ])?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()).into())
}

pub fn ledger_csv(ledger: &EventLedger) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LEDGER_CSV_HEADER)?;
    for e in ledger.events() {
        w.write_record([
            e.frame.to_string(),
            e.kind.as_str().to_string(),
            e.sig.to_string(),
            e.policy_tag.as_str().to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()).into())
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub policy: PolicyTag,
    pub memory_thr: usize,
    pub cumulative_loads: u64,
    pub cumulative_unloads: u64,
    pub init_loads: u64,
    pub batch_loads: u64,
    pub loads_excluding_batch: u64,
    pub peak_wm: usize,
    pub frames: usize,
    pub transient_creates: u64,
    pub transient_drops: u64,
    pub max_backlog: usize,
    pub failed: bool,
    pub error: Option<String>,
    /// Absent when re-rendered from a saved trace.
    pub store: Option<StoreStats>,
}

impl Summary {
    pub fn new(trace: &ScenarioTrace, store: Option<StoreStats>) -> Self {
        let t = &trace.totals;
        Self {
            scenario: trace.scenario.clone(),
            policy: trace.policy,
            memory_thr: trace.memory_thr,
            cumulative_loads: t.cumulative_loads,
            cumulative_unloads: t.cumulative_unloads,
            init_loads: t.init_loads,
            batch_loads: t.batch_loads,
            loads_excluding_batch: t.loads_excluding_batch(),
            peak_wm: t.peak_wm,
            frames: t.frames,
            transient_creates: t.transient_creates,
            transient_drops: t.transient_drops,
            max_backlog: t.max_backlog,
            failed: trace.failed,
            error: trace.error.clone(),
            store,
        }
    }
}
