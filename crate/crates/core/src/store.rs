//! Long-Term Memory access.
//!
//! Policies read signatures through [`SignatureSource`]; the core ships an
//! in-memory implementation and the `zonemem` crate adds the on-disk store.
//! Signatures are immutable after mapping, so there is no write-back path:
//! unloading is pure WM bookkeeping.

use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::{MapError, Signature, SignatureId, WorldMap, ZoneId};

/// A signature together with its payload bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub signature: Signature,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreStats {
    /// Signatures fetched since open; the ground truth for load counting.
    pub reads: u64,
    pub writes: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
    /// Accumulated simulated fetch latency. Never slept on.
    pub simulated_latency_ms: u64,
}

/// Thread-safe counters behind [`StoreStats`].
#[derive(Debug, Default)]
pub struct StatCounters {
    reads: AtomicU64,
    writes: AtomicU64,
    bytes_read: AtomicU64,
    bytes_written: AtomicU64,
    latency_ms: AtomicU64,
}

impl StatCounters {
    pub fn record_reads(&self, signatures: u64, bytes: u64, latency_ms: u64) {
        self.reads.fetch_add(signatures, Ordering::Relaxed);
        self.bytes_read.fetch_add(bytes, Ordering::Relaxed);
        self.latency_ms.fetch_add(latency_ms, Ordering::Relaxed);
    }

    pub fn record_writes(&self, signatures: u64, bytes: u64) {
        self.writes.fetch_add(signatures, Ordering::Relaxed);
        self.bytes_written.fetch_add(bytes, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> StoreStats {
        StoreStats {
            reads: self.reads.load(Ordering::Relaxed),
            writes: self.writes.load(Ordering::Relaxed),
            bytes_read: self.bytes_read.load(Ordering::Relaxed),
            bytes_written: self.bytes_written.load(Ordering::Relaxed),
            simulated_latency_ms: self.latency_ms.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("unknown signature {0}")]
    UnknownSignature(SignatureId),
    #[error("unknown zone {0}")]
    UnknownZone(ZoneId),
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error("store backend: {0}")]
    Backend(String),
}

impl From<MapError> for StoreError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::UnknownSignature(s) => StoreError::UnknownSignature(s),
            MapError::UnknownZone(z) => StoreError::UnknownZone(z),
            MapError::UnknownZoneName(n) => StoreError::Backend(n),
        }
    }
}

pub trait SignatureSource {
    /// Returns the requested signatures in request order. Fails on the first
    /// missing id without touching the stats.
    fn fetch(&self, ids: &[SignatureId]) -> Result<Vec<Record>, StoreError>;

    fn stats(&self) -> StoreStats;
}

/// Fetches the full keyframe set of `zone`.
pub fn fetch_zone<S>(store: &S, map: &WorldMap, zone: ZoneId) -> Result<Vec<Record>, StoreError>
where
    S: SignatureSource + ?Sized,
{
    let ids = map.signatures_of(zone)?;
    store.fetch(ids)
}

/// Deterministic payload bytes for a signature of a world generated with `seed`.
pub fn synth_payload(seed: u64, sig: &Signature) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sig.id.0);
    let mut buf = alloc::vec![0u8; sig.payload_bytes as usize];
    rng.fill_bytes(&mut buf);
    buf
}

pub fn payload_checksum(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

/// LTM held in memory. Payloads are synthesized on every fetch from the map
/// seed, so the store costs no more than the map itself.
#[derive(Debug)]
pub struct MemStore {
    map: WorldMap,
    latency_ms_per_signature: u64,
    counters: StatCounters,
}

impl MemStore {
    pub fn new(map: &WorldMap) -> Self {
        Self {
            map: map.clone(),
            latency_ms_per_signature: 0,
            counters: StatCounters::default(),
        }
    }

    pub fn with_latency(mut self, ms_per_signature: u64) -> Self {
        self.latency_ms_per_signature = ms_per_signature;
        self
    }

    pub fn len(&self) -> usize {
        self.map.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.signatures.is_empty()
    }
}

impl SignatureSource for MemStore {
    fn fetch(&self, ids: &[SignatureId]) -> Result<Vec<Record>, StoreError> {
        let mut sigs = Vec::with_capacity(ids.len());
        for id in ids {
            let sig = self.map.signatures.get(id).ok_or(StoreError::UnknownSignature(*id))?;
            sigs.push(sig);
        }
        let mut bytes = 0u64;
        let out: Vec<Record> = sigs
            .into_iter()
            .map(|sig| {
                let payload = synth_payload(self.map.meta.seed, sig);
                bytes += payload.len() as u64;
                Record {
                    signature: sig.clone(),
                    payload,
                }
            })
            .collect();
        self.counters.record_reads(
            out.len() as u64,
            bytes,
            self.latency_ms_per_signature * out.len() as u64,
        );
        Ok(out)
    }

    fn stats(&self) -> StoreStats {
        self.counters.snapshot()
    }
}
