//! Types shared by the two memory policies.

use alloc::vec::Vec;

use thiserror::Error;

use crate::map::{MapError, SignatureId, ZoneId};
use crate::memory::Frame;
use crate::store::StoreError;

/// What one policy frame did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameReport {
    pub frame: Frame,
    pub localized: Option<SignatureId>,
    pub curr_zone: Option<ZoneId>,
    pub loads: u64,
    pub unloads: u64,
    /// Non-transient WM size right after retrieval/loading.
    pub wm_size_peak: usize,
    /// Non-transient WM size at the end of the frame.
    pub wm_size_end: usize,
    /// Baseline only: signatures wanted but not yet retrieved.
    pub backlog: usize,
    /// Zone only: zone activated this frame.
    pub activated: Option<ZoneId>,
    /// Zone only: zones evicted this frame, in eviction order.
    pub evicted: Vec<ZoneId>,
    /// Zone only: more than one portal qualified this frame.
    pub multi_portal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("zone {zone} has {size} signatures, more than memory_thr {thr}")]
    OversizedZone { zone: ZoneId, size: usize, thr: usize },
    #[error("cannot fit zone {zone}: {needed} signatures still needed after evicting every evictable zone, memory_thr {thr}")]
    EvictionExhausted { zone: ZoneId, needed: usize, thr: usize },
    #[error("zone {0} is already active")]
    ZoneAlreadyActive(ZoneId),
    #[error("working memory must be empty before initialization")]
    WmNotEmpty,
    #[error("policy used before initialization")]
    NotInitialized,
}
