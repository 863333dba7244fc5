//! Map data model: signatures, zones, portals and the zone-keyframe mapping.
//!
//! A [`WorldMap`] is immutable once built. Every signature belongs to exactly
//! one zone and the zones' member lists partition the signature set, so the
//! keyframe set of a zone is just `zone.members`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of one signature (keyframe / map node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignatureId(pub u64);

impl fmt::Display for SignatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(pub u32);

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let wrapped = theta + PI - two_pi * libm::floor((theta + PI) / two_pi);
    let out = wrapped - PI;
    if out >= PI {
        -PI
    } else {
        out
    }
}

/// Planar pose. Serialized as `[x, y, theta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0)
    }

    /// Euclidean distance between the two positions; heading is ignored.
    pub fn distance(&self, other: &Pose) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

impl From<[f64; 3]> for Pose {
    fn from(v: [f64; 3]) -> Self {
        // Kept verbatim so validate() can flag un-normalized input.
        Self {
            x: v[0],
            y: v[1],
            theta: v[2],
        }
    }
}

impl From<Pose> for [f64; 3] {
    fn from(p: Pose) -> Self {
        [p.x, p.y, p.theta]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerTag {
    Skeleton,
    Room,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoneKind {
    Lobby,
    Corridor,
    Room,
}

impl ZoneKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZoneKind::Lobby => "lobby",
            ZoneKind::Corridor => "corridor",
            ZoneKind::Room => "room",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub id: SignatureId,
    pub zone: ZoneId,
    pub pose: Pose,
    /// Simulated sensor-data size. Reporting only; thresholds count signatures.
    pub payload_bytes: u64,
    /// Visitation count.
    pub weight: u64,
    pub layer: LayerTag,
    pub links: BTreeSet<SignatureId>,
}

/// A located boundary between two zones. Proximity to `position` (within
/// `radius`) marks the switching point from `from_zone` into `to_zone`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portal {
    pub from_zone: ZoneId,
    pub to_zone: ZoneId,
    pub position: Pose,
    pub radius: f64,
}

impl Portal {
    pub const DEFAULT_RADIUS: f64 = 1.0;

    pub fn reversed(&self) -> Portal {
        Portal {
            from_zone: self.to_zone,
            to_zone: self.from_zone,
            position: self.position,
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: ZoneId,
    pub name: String,
    pub kind: ZoneKind,
    /// The zone's keyframe set, in generator insertion order.
    pub members: Vec<SignatureId>,
    /// Portals leaving this zone (`from_zone == id`).
    pub portals: Vec<Portal>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MapMeta {
    pub name: String,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldMap {
    pub meta: MapMeta,
    pub zones: BTreeMap<ZoneId, Zone>,
    pub signatures: BTreeMap<SignatureId, Signature>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("unknown signature {0}")]
    UnknownSignature(SignatureId),
    #[error("unknown zone {0}")]
    UnknownZone(ZoneId),
    #[error("unknown zone name {0:?}")]
    UnknownZoneName(String),
}

/// A broken map invariant, naming the rule and the offending ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    SignatureKeyMismatch {
        key: SignatureId,
        id: SignatureId,
    },
    ZoneKeyMismatch {
        key: ZoneId,
        id: ZoneId,
    },
    EmptyZone(ZoneId),
    DuplicateZoneName(String),
    DuplicateMember {
        zone: ZoneId,
        sig: SignatureId,
    },
    UnknownMember {
        zone: ZoneId,
        sig: SignatureId,
    },
    /// Signature listed by more than one zone.
    PartitionViolation(SignatureId),
    /// Signature listed by no zone.
    Unassigned(SignatureId),
    UnknownZoneRef {
        sig: SignatureId,
        zone: ZoneId,
    },
    /// The signature's own `zone` field names a zone that does not list it.
    ZoneMismatch {
        sig: SignatureId,
        declared: ZoneId,
    },
    DanglingLink {
        from: SignatureId,
        to: SignatureId,
    },
    AsymmetricLink(SignatureId, SignatureId),
    PoseNotNormalized(SignatureId),
    PortalSelfLoop(ZoneId),
    PortalUnknownZone {
        zone: ZoneId,
        to: ZoneId,
    },
    PortalWrongOwner {
        zone: ZoneId,
        from: ZoneId,
    },
    PortalNotSymmetric {
        from: ZoneId,
        to: ZoneId,
    },
    PortalBadRadius {
        from: ZoneId,
        to: ZoneId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SignatureKeyMismatch { key, id } => {
                write!(f, "signature stored under key {key} has id {id}")
            }
            Violation::ZoneKeyMismatch { key, id } => {
                write!(f, "zone stored under key {key} has id {id}")
            }
            Violation::EmptyZone(z) => write!(f, "zone {z} has no members"),
            Violation::DuplicateZoneName(n) => write!(f, "zone name {n:?} used twice"),
            Violation::DuplicateMember { zone, sig } => {
                write!(f, "zone {zone} lists signature {sig} twice")
            }
            Violation::UnknownMember { zone, sig } => {
                write!(f, "zone {zone} lists unknown signature {sig}")
            }
            Violation::PartitionViolation(s) => {
                write!(f, "signature {s} belongs to more than one zone")
            }
            Violation::Unassigned(s) => write!(f, "signature {s} belongs to no zone"),
            Violation::UnknownZoneRef { sig, zone } => {
                write!(f, "signature {sig} refers to unknown zone {zone}")
            }
            Violation::ZoneMismatch { sig, declared } => {
                write!(f, "signature {sig} declares zone {declared} which does not list it")
            }
            Violation::DanglingLink { from, to } => {
                write!(f, "signature {from} links to unknown signature {to}")
            }
            Violation::AsymmetricLink(a, b) => write!(f, "link {a}->{b} has no reverse"),
            Violation::PoseNotNormalized(s) => {
                write!(f, "signature {s} has theta outside [-pi, pi)")
            }
            Violation::PortalSelfLoop(z) => write!(f, "zone {z} has a portal to itself"),
            Violation::PortalUnknownZone { zone, to } => {
                write!(f, "zone {zone} has a portal to unknown zone {to}")
            }
            Violation::PortalWrongOwner { zone, from } => {
                write!(f, "zone {zone} stores a portal leaving zone {from}")
            }
            Violation::PortalNotSymmetric { from, to } => {
                write!(f, "portal {from}->{to} has no matching reverse portal")
            }
            Violation::PortalBadRadius { from, to } => {
                write!(f, "portal {from}->{to} radius must be positive")
            }
        }
    }
}

const PORTAL_POSITION_EPS: f64 = 1e-9;

impl WorldMap {
    pub fn signature(&self, id: SignatureId) -> Result<&Signature, MapError> {
        self.signatures.get(&id).ok_or(MapError::UnknownSignature(id))
    }

    pub fn zone(&self, id: ZoneId) -> Result<&Zone, MapError> {
        self.zones.get(&id).ok_or(MapError::UnknownZone(id))
    }

    pub fn zone_by_name(&self, name: &str) -> Result<&Zone, MapError> {
        self.zones
            .values()
            .find(|z| z.name == name)
            .ok_or_else(|| MapError::UnknownZoneName(name.into()))
    }

    /// The zone owning `sig`.
    pub fn zone_of(&self, sig: SignatureId) -> Result<ZoneId, MapError> {
        Ok(self.signature(sig)?.zone)
    }

    /// The keyframe set of `zone`, in insertion order.
    pub fn signatures_of(&self, zone: ZoneId) -> Result<&[SignatureId], MapError> {
        Ok(&self.zone(zone)?.members)
    }

    pub fn zone_size(&self, zone: ZoneId) -> Result<usize, MapError> {
        Ok(self.zone(zone)?.members.len())
    }

    pub fn signature_count(&self) -> usize {
        self.signatures.len()
    }

    pub fn max_signature_id(&self) -> Option<SignatureId> {
        self.signatures.keys().next_back().copied()
    }

    pub fn portals(&self) -> impl Iterator<Item = &Portal> {
        self.zones.values().flat_map(|z| z.portals.iter())
    }

    /// Mean member position of a zone.
    pub fn zone_centroid(&self, zone: ZoneId) -> Result<Pose, MapError> {
        let z = self.zone(zone)?;
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for id in &z.members {
            if let Some(s) = self.signatures.get(id) {
                sx += s.pose.x;
                sy += s.pose.y;
                n += 1;
            }
        }
        if n == 0 {
            return Ok(Pose::at(0.0, 0.0));
        }
        Ok(Pose::at(sx / n as f64, sy / n as f64))
    }

    /// Nearest signature to `pose` among `candidates`; ties go to the lowest id.
    pub fn nearest_among<I>(&self, pose: &Pose, candidates: I) -> Option<SignatureId>
    where
        I: IntoIterator<Item = SignatureId>,
    {
        let mut best: Option<(f64, SignatureId)> = None;
        for id in candidates {
            let Some(sig) = self.signatures.get(&id) else {
                continue;
            };
            let d = pose.distance(&sig.pose);
            best = match best {
                Some((bd, bid)) if bd < d || (bd == d && bid < id) => Some((bd, bid)),
                _ => Some((d, id)),
            };
        }
        best.map(|(_, id)| id)
    }

    pub fn nearest_signature(&self, pose: &Pose) -> Option<SignatureId> {
        self.nearest_among(pose, self.signatures.keys().copied())
    }

    /// Checks every structural invariant. Empty iff the map is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        for (key, sig) in &self.signatures {
            if *key != sig.id {
                out.push(Violation::SignatureKeyMismatch { key: *key, id: sig.id });
            }
        }

        let mut names = BTreeSet::new();
        let mut owners: BTreeMap<SignatureId, Vec<ZoneId>> = BTreeMap::new();
        for (key, zone) in &self.zones {
            if *key != zone.id {
                out.push(Violation::ZoneKeyMismatch { key: *key, id: zone.id });
            }
            if !names.insert(zone.name.as_str()) {
                out.push(Violation::DuplicateZoneName(zone.name.clone()));
            }
            if zone.members.is_empty() {
                out.push(Violation::EmptyZone(zone.id));
            }
            let mut seen = BTreeSet::new();
            for sig in &zone.members {
                if !seen.insert(*sig) {
                    out.push(Violation::DuplicateMember {
                        zone: zone.id,
                        sig: *sig,
                    });
                    continue;
                }
                if !self.signatures.contains_key(sig) {
                    out.push(Violation::UnknownMember {
                        zone: zone.id,
                        sig: *sig,
                    });
                    continue;
                }
                owners.entry(*sig).or_default().push(zone.id);
            }
        }

        for sig in self.signatures.values() {
            let owned_by = owners.get(&sig.id).map(Vec::as_slice).unwrap_or(&[]);
            match owned_by.len() {
                0 => out.push(Violation::Unassigned(sig.id)),
                1 => {}
                _ => out.push(Violation::PartitionViolation(sig.id)),
            }
            if !self.zones.contains_key(&sig.zone) {
                out.push(Violation::UnknownZoneRef {
                    sig: sig.id,
                    zone: sig.zone,
                });
            } else if !owned_by.is_empty() && !owned_by.contains(&sig.zone) {
                out.push(Violation::ZoneMismatch {
                    sig: sig.id,
                    declared: sig.zone,
                });
            }
            let t = sig.pose.theta;
            if !(t.is_finite() && (-PI..PI).contains(&t)) {
                out.push(Violation::PoseNotNormalized(sig.id));
            }
            for to in &sig.links {
                match self.signatures.get(to) {
                    None => out.push(Violation::DanglingLink { from: sig.id, to: *to }),
                    Some(other) if !other.links.contains(&sig.id) => out.push(Violation::AsymmetricLink(sig.id, *to)),
                    Some(_) => {}
                }
            }
        }

        for zone in self.zones.values() {
            for p in &zone.portals {
                if p.from_zone != zone.id {
                    out.push(Violation::PortalWrongOwner {
                        zone: zone.id,
                        from: p.from_zone,
                    });
                    continue;
                }
                if p.to_zone == p.from_zone {
                    out.push(Violation::PortalSelfLoop(zone.id));
                    continue;
                }
                if !(p.radius.is_finite() && p.radius > 0.0) {
                    out.push(Violation::PortalBadRadius {
                        from: p.from_zone,
                        to: p.to_zone,
                    });
                }
                let Some(target) = self.zones.get(&p.to_zone) else {
                    out.push(Violation::PortalUnknownZone {
                        zone: zone.id,
                        to: p.to_zone,
                    });
                    continue;
                };
                let mirrored = target.portals.iter().any(|q| {
                    q.from_zone == p.to_zone
                        && q.to_zone == p.from_zone
                        && q.position.distance(&p.position) <= PORTAL_POSITION_EPS
                        && q.radius == p.radius
                });
                if !mirrored {
                    out.push(Violation::PortalNotSymmetric {
                        from: p.from_zone,
                        to: p.to_zone,
                    });
                }
            }
        }

        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}
