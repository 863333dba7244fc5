//! Single-file LTM store.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "ZMLT" | u16 version
//! record*   : u32 meta_len | signature JSON | u32 payload_len | payload
//! index     : JSON object  id -> {offset, length, crc32}
//! footer    : u64 index offset
//! ```
//!
//! Records are written in ascending id order. `length` covers the whole
//! record and `crc32` covers the payload only. The index is read once at
//! open; every fetch seeks to the indexed records and verifies checksums.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use zonemem_core::store::{payload_checksum, synth_payload, StatCounters};
use zonemem_core::{Record, Signature, SignatureId, SignatureSource, StoreError, StoreStats, WorldMap};

pub const MAGIC: &[u8; 4] = b"ZMLT";
pub const VERSION: u16 = 1;
const HEADER_LEN: u64 = 6;
const FOOTER_LEN: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub offset: u64,
    pub length: u64,
    pub crc32: u32,
}

#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    file: Mutex<File>,
    index: BTreeMap<SignatureId, IndexEntry>,
    latency_ms_per_signature: u64,
    counters: StatCounters,
}

fn backend(path: &Path, e: impl std::fmt::Display) -> StoreError {
    StoreError::Backend(format!("{}: {e}", path.display()))
}

fn corrupt(msg: impl Into<String>) -> StoreError {
    StoreError::Corrupt(msg.into())
}

impl FileStore {
    /// Writes every signature of `map` with its synthesized payload to
    /// `path`, replacing any existing file, and opens the result.
    pub fn build(path: &Path, map: &WorldMap) -> Result<Self, StoreError> {
        let file = File::create(path).map_err(|e| backend(path, e))?;
        let mut w = BufWriter::new(file);
        let mut index = BTreeMap::new();
        let mut offset = HEADER_LEN;
        let mut payload_total = 0u64;
        let io = |e: std::io::Error| backend(path, e);

        w.write_all(MAGIC).map_err(io)?;
        w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
        for sig in map.signatures.values() {
            let meta = serde_json::to_vec(sig).map_err(|e| backend(path, e))?;
            let payload = synth_payload(map.meta.seed, sig);
            let meta_len = u32::try_from(meta.len()).map_err(|e| backend(path, e))?;
            let payload_len = u32::try_from(payload.len()).map_err(|e| backend(path, e))?;
            w.write_all(&meta_len.to_le_bytes()).map_err(io)?;
            w.write_all(&meta).map_err(io)?;
            w.write_all(&payload_len.to_le_bytes()).map_err(io)?;
            w.write_all(&payload).map_err(io)?;
            let length = 8 + meta.len() as u64 + payload.len() as u64;
            index.insert(
                sig.id,
                IndexEntry {
                    offset,
                    length,
                    crc32: payload_checksum(&payload),
                },
            );
            offset += length;
            payload_total += payload.len() as u64;
        }
        let index_json = serde_json::to_vec(&index).map_err(|e| backend(path, e))?;
        w.write_all(&index_json).map_err(io)?;
        w.write_all(&offset.to_le_bytes()).map_err(io)?;
        w.flush().map_err(io)?;
        drop(w);

        let store = Self::open(path)?;
        store.counters.record_writes(index.len() as u64, payload_total);
        Ok(store)
    }

    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let mut file = File::open(path).map_err(|e| backend(path, e))?;
        let len = file.metadata().map_err(|e| backend(path, e))?.len();
        if len < HEADER_LEN + FOOTER_LEN {
            return Err(corrupt("file too short"));
        }
        let mut header = [0u8; HEADER_LEN as usize];
        file.read_exact(&mut header).map_err(|e| backend(path, e))?;
        if &header[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != VERSION {
            return Err(corrupt(format!("unsupported version {version}")));
        }
        file.seek(SeekFrom::End(-(FOOTER_LEN as i64)))
            .map_err(|e| backend(path, e))?;
        let mut footer = [0u8; 8];
        file.read_exact(&mut footer).map_err(|e| backend(path, e))?;
        let index_offset = u64::from_le_bytes(footer);
        if index_offset < HEADER_LEN || index_offset > len - FOOTER_LEN {
            return Err(corrupt("index offset out of range"));
        }
        file.seek(SeekFrom::Start(index_offset)).map_err(|e| backend(path, e))?;
        let mut index_json = vec![0u8; (len - FOOTER_LEN - index_offset) as usize];
        file.read_exact(&mut index_json).map_err(|e| backend(path, e))?;
        let index: BTreeMap<SignatureId, IndexEntry> =
            serde_json::from_slice(&index_json).map_err(|e| corrupt(format!("index: {e}")))?;
        for (id, entry) in &index {
            if entry.offset < HEADER_LEN || entry.offset + entry.length > index_offset {
                return Err(corrupt(format!("record {id} out of range")));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            file: Mutex::new(file),
            index,
            latency_ms_per_signature: 0,
            counters: StatCounters::default(),
        })
    }

    /// Simulated per-signature fetch latency, accumulated in the stats.
    pub fn with_latency(mut self, ms_per_signature: u64) -> Self {
        self.latency_ms_per_signature = ms_per_signature;
        self
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn index(&self) -> &BTreeMap<SignatureId, IndexEntry> {
        &self.index
    }

    fn read_record(&self, file: &mut File, id: SignatureId, entry: &IndexEntry) -> Result<Record, StoreError> {
        let io = |e: std::io::Error| backend(&self.path, e);
        file.seek(SeekFrom::Start(entry.offset)).map_err(io)?;
        let mut buf = vec![0u8; entry.length as usize];
        file.read_exact(&mut buf).map_err(io)?;
        let take_u32 = |at: usize| -> Result<usize, StoreError> {
            buf.get(at..at + 4)
                .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
                .ok_or_else(|| corrupt(format!("record {id} truncated")))
        };
        let meta_len = take_u32(0)?;
        let meta = buf
            .get(4..4 + meta_len)
            .ok_or_else(|| corrupt(format!("record {id} truncated")))?;
        let signature: Signature = serde_json::from_slice(meta).map_err(|e| corrupt(format!("record {id}: {e}")))?;
        let payload_len = take_u32(4 + meta_len)?;
        let start = 8 + meta_len;
        if start + payload_len != buf.len() {
            return Err(corrupt(format!("record {id} length mismatch")));
        }
        let payload = buf[start..].to_vec();
        if signature.id != id {
            return Err(corrupt(format!("record {id} holds signature {}", signature.id)));
        }
        if payload_checksum(&payload) != entry.crc32 {
            return Err(corrupt(format!("record {id} checksum mismatch")));
        }
        Ok(Record { signature, payload })
    }
}

impl SignatureSource for FileStore {
    fn fetch(&self, ids: &[SignatureId]) -> Result<Vec<Record>, StoreError> {
        let entries = ids
            .iter()
            .map(|id| {
                self.index
                    .get(id)
                    .map(|e| (*id, *e))
                    .ok_or(StoreError::UnknownSignature(*id))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if entries.is_empty() {
            return Ok(Vec::new());
        }
        let mut file = self
            .file
            .lock()
            .map_err(|_| backend(&self.path, "file lock poisoned"))?;
        let out = entries
            .iter()
            .map(|(id, e)| self.read_record(&mut file, *id, e))
            .collect::<Result<Vec<_>, _>>()?;
        drop(file);
        let bytes = out.iter().map(|r| r.payload.len() as u64).sum();
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
