//! Deterministic synthetic hospital worlds.
//!
//! Construction happens in two stages: the skeleton layer (lobby and
//! corridors) is laid out and numbered first, then each room is attached to
//! its corridor through a single door link. Under semantic zoning every
//! lobby, corridor and room becomes one zone; under grid zoning the same
//! signatures are cut into square cells regardless of what they belong to.
//!
//! Layout conventions: the lobby is a square-ish grid centred on the origin
//! with 1 m spacing. Corridors are chained end to end, the first one starting
//! 1 m past the lobby edge along its heading. Room signatures form a grid
//! 3 m to 5+ m off the corridor centreline and are fully linked internally.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::{LayerTag, MapMeta, Portal, Pose, Signature, SignatureId, WorldMap, Zone, ZoneId, ZoneKind};
use crate::store::{payload_checksum, synth_payload};

pub const PAYLOAD_MIN_BYTES: u64 = 20 * 1024;
pub const PAYLOAD_MAX_BYTES: u64 = 60 * 1024;
/// Distance of a room's door portal from the corridor centreline.
pub const DOOR_OFFSET_M: f64 = 2.0;
/// Lateral distance of a room's first signature row from the centreline.
pub const ROOM_NEAR_ROW_M: f64 = 3.0;
/// How close the last corridor must end to a lobby signature for `loop_back`.
pub const LOOP_BACK_TOLERANCE_M: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobbySpec {
    pub name: String,
    pub signature_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorSpec {
    pub name: String,
    pub length_m: f64,
    pub signatures_per_meter: f64,
    /// Direction of travel, counter-clockwise from +x.
    #[serde(default)]
    pub heading_deg: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub name: String,
    pub attached_corridor: String,
    pub door_position_m: f64,
    pub signature_count: usize,
    /// Side of the corridor relative to its heading.
    #[serde(default)]
    pub side: Side,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zoning {
    #[default]
    Semantic,
    Grid {
        cell_m: f64,
    },
}

fn default_portal_radius() -> f64 {
    Portal::DEFAULT_RADIUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub seed: u64,
    #[serde(default)]
    pub name: Option<String>,
    pub lobby: LobbySpec,
    pub corridors: Vec<CorridorSpec>,
    /// Link the end of the last corridor back to the lobby.
    #[serde(default)]
    pub loop_back: bool,
    #[serde(default)]
    pub rooms: Vec<RoomSpec>,
    #[serde(default = "default_portal_radius")]
    pub portal_radius: f64,
    #[serde(default)]
    pub zoning: Zoning,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid world spec: {0}")]
    SpecInvalid(String),
}

fn invalid<T>(msg: String) -> Result<T, GenError> {
    Err(GenError::SpecInvalid(msg))
}

/// Where one generated signature came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub sig: SignatureId,
    /// Lobby, corridor or room the signature was generated for.
    pub element: String,
    pub zone: ZoneId,
    pub layer: LayerTag,
    pub payload_bytes: u64,
    pub checksum: u32,
}

impl WorldSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        let mut names = BTreeSet::new();
        let all = core::iter::once(&self.lobby.name)
            .chain(self.corridors.iter().map(|c| &c.name))
            .chain(self.rooms.iter().map(|r| &r.name));
        for n in all {
            if n.is_empty() {
                return invalid("empty element name".to_string());
            }
            if !names.insert(n.as_str()) {
                return invalid(format!("duplicate name {n}"));
            }
        }
        if self.lobby.signature_count == 0 {
            return invalid(format!("{}: signature_count must be >= 1", self.lobby.name));
        }
        for c in &self.corridors {
            if !(c.length_m.is_finite() && c.length_m > 0.0) {
                return invalid(format!("{}: length_m must be positive", c.name));
            }
            if !(c.signatures_per_meter.is_finite() && c.signatures_per_meter > 0.0) {
                return invalid(format!("{}: signatures_per_meter must be positive", c.name));
            }
            if !c.heading_deg.is_finite() {
                return invalid(format!("{}: heading_deg must be finite", c.name));
            }
        }
        for r in &self.rooms {
            let Some(c) = self.corridors.iter().find(|c| c.name == r.attached_corridor) else {
                return invalid(format!("{}: unknown corridor {}", r.name, r.attached_corridor));
            };
            if !(r.door_position_m >= 0.0 && r.door_position_m <= c.length_m) {
                return invalid(format!(
                    "{}: door_position_m {} outside corridor {} of length {}",
                    r.name, r.door_position_m, c.name, c.length_m
                ));
            }
            if r.signature_count == 0 {
                return invalid(format!("{}: signature_count must be >= 1", r.name));
            }
        }
        if !(self.portal_radius.is_finite() && self.portal_radius > 0.0) {
            return invalid("portal_radius must be positive".to_string());
        }
        if let Zoning::Grid { cell_m } = self.zoning {
            if !(cell_m.is_finite() && cell_m > 0.0) {
                return invalid("grid cell_m must be positive".to_string());
            }
        }
        if self.loop_back && self.corridors.is_empty() {
            return invalid("loop_back needs at least one corridor".to_string());
        }
        Ok(())
    }
}

type Point = (f64, f64);

fn dist(a: Point, b: Point) -> f64 {
    libm::hypot(a.0 - b.0, a.1 - b.1)
}

fn add(a: Point, b: Point, k: f64) -> Point {
    (a.0 + b.0 * k, a.1 + b.1 * k)
}

/// Smallest `c` with `c * c >= n`.
fn grid_cols(n: usize) -> usize {
    let mut c = 1;
    while c * c < n {
        c += 1;
    }
    c
}

struct Element {
    name: String,
    kind: ZoneKind,
    members: Vec<usize>,
}

struct CorridorGeom {
    start: Point,
    dir: Point,
    members: Vec<usize>,
}

#[derive(Default)]
struct Builder {
    points: Vec<Point>,
    layers: Vec<LayerTag>,
    element_of: Vec<usize>,
    links: Vec<BTreeSet<usize>>,
    elements: Vec<Element>,
    /// (element a, element b, position), one entry per adjacency.
    portals: Vec<(usize, usize, Point)>,
}

impl Builder {
    fn element(&mut self, name: &str, kind: ZoneKind) -> usize {
        self.elements.push(Element {
            name: name.to_string(),
            kind,
            members: Vec::new(),
        });
        self.elements.len() - 1
    }

    fn add_sig(&mut self, element: usize, p: Point, layer: LayerTag) -> usize {
        let i = self.points.len();
        self.points.push(p);
        self.layers.push(layer);
        self.element_of.push(element);
        self.links.push(BTreeSet::new());
        self.elements[element].members.push(i);
        i
    }

    fn link(&mut self, a: usize, b: usize) {
        if a != b {
            self.links[a].insert(b);
            self.links[b].insert(a);
        }
    }

    /// Member of `element` nearest to `p`; ties go to the lower index.
    fn nearest_in(&self, element: usize, p: Point) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for &i in &self.elements[element].members {
            let d = dist(self.points[i], p);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }
}

pub fn generate(spec: &WorldSpec) -> Result<WorldMap, GenError> {
    generate_with_manifest(spec).map(|(m, _)| m)
}

/// Generates the world and reports where every signature came from.
pub fn generate_with_manifest(spec: &WorldSpec) -> Result<(WorldMap, Vec<Placement>), GenError> {
    spec.validate()?;
    let mut b = Builder::default();

    // skeleton: lobby
    let lobby = b.element(&spec.lobby.name, ZoneKind::Lobby);
    let n = spec.lobby.signature_count;
    let cols = grid_cols(n);
    let rows = n.div_ceil(cols);
    for k in 0..n {
        let (r, c) = (k / cols, k % cols);
        let p = (
            c as f64 - (cols as f64 - 1.0) / 2.0,
            r as f64 - (rows as f64 - 1.0) / 2.0,
        );
        let i = b.add_sig(lobby, p, LayerTag::Skeleton);
        if c > 0 {
            b.link(i, i - 1);
        }
        if r > 0 {
            b.link(i, i - cols);
        }
    }

    // skeleton: corridors
    let mut geoms: Vec<CorridorGeom> = Vec::new();
    let mut corridor_elems: Vec<usize> = Vec::new();
    let mut cursor: Point = (0.0, 0.0);
    for (k, c) in spec.corridors.iter().enumerate() {
        let h = c.heading_deg.to_radians();
        let dir = (libm::cos(h), libm::sin(h));
        let start = if k == 0 {
            let extent = b.elements[lobby]
                .members
                .iter()
                .map(|&i| b.points[i].0 * dir.0 + b.points[i].1 * dir.1)
                .fold(f64::NEG_INFINITY, f64::max);
            (dir.0 * (extent + 1.0), dir.1 * (extent + 1.0))
        } else {
            cursor
        };
        let e = b.element(&c.name, ZoneKind::Corridor);
        let count = (libm::round(c.length_m * c.signatures_per_meter) as usize).max(1);
        let spacing = c.length_m / count as f64;
        let mut members = Vec::with_capacity(count);
        for j in 0..count {
            let i = b.add_sig(e, add(start, dir, (j as f64 + 0.5) * spacing), LayerTag::Skeleton);
            if let Some(&prev) = members.last() {
                b.link(i, prev);
            }
            members.push(i);
        }
        if k == 0 {
            let anchor = b.nearest_in(lobby, b.points[members[0]]);
            b.link(members[0], anchor);
            b.portals.push((lobby, e, start));
        } else {
            let prev_elem = corridor_elems[k - 1];
            let prev_last = *geoms[k - 1].members.last().expect("corridor has members");
            b.link(members[0], prev_last);
            b.portals.push((prev_elem, e, start));
        }
        cursor = add(start, dir, c.length_m);
        corridor_elems.push(e);
        geoms.push(CorridorGeom { start, dir, members });
    }
    if spec.loop_back {
        let end = cursor;
        let anchor = b.nearest_in(lobby, end);
        let gap = dist(b.points[anchor], end);
        if gap > LOOP_BACK_TOLERANCE_M {
            return invalid(format!(
                "loop_back: last corridor ends {gap:.2} m from the lobby (max {LOOP_BACK_TOLERANCE_M})"
            ));
        }
        let last_elem = *corridor_elems.last().expect("validated");
        let last_sig = *geoms.last().and_then(|g| g.members.last()).expect("validated");
        b.link(last_sig, anchor);
        b.portals.push((last_elem, lobby, end));
    }

    // room layer
    for r in &spec.rooms {
        let k = spec
            .corridors
            .iter()
            .position(|c| c.name == r.attached_corridor)
            .expect("validated");
        let g = &geoms[k];
        let normal = match r.side {
            Side::Left => (-g.dir.1, g.dir.0),
            Side::Right => (g.dir.1, -g.dir.0),
        };
        let (start, dir) = (g.start, g.dir);
        let foot = add(start, dir, r.door_position_m);
        let door = add(foot, normal, DOOR_OFFSET_M);
        let e = b.element(&r.name, ZoneKind::Room);
        let cols = grid_cols(r.signature_count);
        for j in 0..r.signature_count {
            let (row, col) = (j / cols, j % cols);
            let along = r.door_position_m + col as f64 - (cols as f64 - 1.0) / 2.0;
            let lateral = ROOM_NEAR_ROW_M + row as f64;
            let p = add(add(start, dir, along), normal, lateral);
            b.add_sig(e, p, LayerTag::Room);
        }
        let members = b.elements[e].members.clone();
        for (x, &a) in members.iter().enumerate() {
            for &c in &members[x + 1..] {
                b.link(a, c);
            }
        }
        let room_side = b.nearest_in(e, door);
        let corridor_side = b.nearest_in(corridor_elems[k], door);
        b.link(room_side, corridor_side);
        b.portals.push((corridor_elems[k], e, door));
    }

    // zoning
    let zone_of: Vec<ZoneId>;
    let mut zones: BTreeMap<ZoneId, Zone> = BTreeMap::new();
    match spec.zoning {
        Zoning::Semantic => {
            zone_of = b.element_of.iter().map(|&e| ZoneId(e as u32 + 1)).collect();
            for (e, el) in b.elements.iter().enumerate() {
                let id = ZoneId(e as u32 + 1);
                zones.insert(
                    id,
                    Zone {
                        id,
                        name: el.name.clone(),
                        kind: el.kind,
                        members: el.members.iter().map(|&i| SignatureId(i as u64 + 1)).collect(),
                        portals: Vec::new(),
                    },
                );
            }
            for &(a, c, p) in &b.portals {
                let portal = Portal {
                    from_zone: ZoneId(a as u32 + 1),
                    to_zone: ZoneId(c as u32 + 1),
                    position: Pose::at(p.0, p.1),
                    radius: spec.portal_radius,
                };
                zones
                    .get_mut(&portal.to_zone)
                    .expect("zone")
                    .portals
                    .push(portal.reversed());
                zones.get_mut(&portal.from_zone).expect("zone").portals.push(portal);
            }
        }
        Zoning::Grid { cell_m } => {
            zone_of = grid_zoning(&b, cell_m, spec.portal_radius, &mut zones);
        }
    }

    // signatures
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut signatures = BTreeMap::new();
    let mut manifest = Vec::with_capacity(b.points.len());
    for (i, &p) in b.points.iter().enumerate() {
        let id = SignatureId(i as u64 + 1);
        let payload_bytes = rng.random_range(PAYLOAD_MIN_BYTES..=PAYLOAD_MAX_BYTES);
        let sig = Signature {
            id,
            zone: zone_of[i],
            pose: Pose::at(p.0, p.1),
            payload_bytes,
            weight: 0,
            layer: b.layers[i],
            links: b.links[i].iter().map(|&j| SignatureId(j as u64 + 1)).collect(),
        };
        manifest.push(Placement {
            sig: id,
            element: b.elements[b.element_of[i]].name.clone(),
            zone: zone_of[i],
            layer: sig.layer,
            payload_bytes,
            checksum: payload_checksum(&synth_payload(spec.seed, &sig)),
        });
        signatures.insert(id, sig);
    }

    let mut params = BTreeMap::new();
    params.insert("portal_radius".to_string(), format!("{}", spec.portal_radius));
    params.insert(
        "zoning".to_string(),
        match spec.zoning {
            Zoning::Semantic => "semantic".to_string(),
            Zoning::Grid { cell_m } => format!("grid:{cell_m}"),
        },
    );
    let map = WorldMap {
        meta: MapMeta {
            name: spec.name.clone().unwrap_or_else(|| "world".to_string()),
            seed: spec.seed,
            params,
        },
        zones,
        signatures,
    };
    Ok((map, manifest))
}

fn cell_of(p: Point, cell: f64) -> (i64, i64) {
    (libm::floor(p.0 / cell) as i64, libm::floor(p.1 / cell) as i64)
}

/// Point where the segment `a -> b` leaves the cell containing `a`.
fn cell_exit(a: Point, b: Point, cell: f64) -> Point {
    let (ix, iy) = cell_of(a, cell);
    let (lo_x, hi_x) = (ix as f64 * cell, (ix + 1) as f64 * cell);
    let (lo_y, hi_y) = (iy as f64 * cell, (iy + 1) as f64 * cell);
    let mut t = 1.0f64;
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    if dx > 0.0 {
        t = t.min((hi_x - a.0) / dx);
    } else if dx < 0.0 {
        t = t.min((lo_x - a.0) / dx);
    }
    if dy > 0.0 {
        t = t.min((hi_y - a.1) / dy);
    } else if dy < 0.0 {
        t = t.min((lo_y - a.1) / dy);
    }
    add(a, (dx, dy), t.clamp(0.0, 1.0))
}

fn grid_zoning(b: &Builder, cell: f64, radius: f64, zones: &mut BTreeMap<ZoneId, Zone>) -> Vec<ZoneId> {
    let mut ids: BTreeMap<(i64, i64), ZoneId> = BTreeMap::new();
    let mut zone_of = Vec::with_capacity(b.points.len());
    for (i, &p) in b.points.iter().enumerate() {
        let key = cell_of(p, cell);
        let next = ZoneId(ids.len() as u32 + 1);
        let id = *ids.entry(key).or_insert(next);
        zones
            .entry(id)
            .or_insert_with(|| Zone {
                id,
                name: format!("G{}_{}", key.0, key.1),
                kind: ZoneKind::Corridor,
                members: Vec::new(),
                portals: Vec::new(),
            })
            .members
            .push(SignatureId(i as u64 + 1));
        zone_of.push(id);
    }
    for zone in zones.values_mut() {
        let mut counts = [0usize; 3];
        for m in &zone.members {
            let kind = b.elements[b.element_of[m.0 as usize - 1]].kind;
            counts[kind as usize] += 1;
        }
        let kinds = [ZoneKind::Lobby, ZoneKind::Corridor, ZoneKind::Room];
        let mut best = 0;
        for k in 1..3 {
            if counts[k] > counts[best] {
                best = k;
            }
        }
        zone.kind = kinds[best];
    }
    let mut placed: BTreeMap<(ZoneId, ZoneId), Vec<Point>> = BTreeMap::new();
    for (a, nbrs) in b.links.iter().enumerate() {
        for &c in nbrs {
            if c <= a || zone_of[a] == zone_of[c] {
                continue;
            }
            let p = cell_exit(b.points[a], b.points[c], cell);
            let (za, zc) = (zone_of[a], zone_of[c]);
            let key = (za.min(zc), za.max(zc));
            let existing = placed.entry(key).or_default();
            if existing.iter().any(|q| dist(*q, p) <= radius) {
                continue;
            }
            existing.push(p);
            let portal = Portal {
                from_zone: za,
                to_zone: zc,
                position: Pose::at(p.0, p.1),
                radius,
            };
            zones.get_mut(&zc).expect("zone").portals.push(portal.reversed());
            zones.get_mut(&za).expect("zone").portals.push(portal);
        }
    }
    zone_of
}

/// The evaluation hospital: lobby L1, the corridor loop H1 -> C2 -> H2 -> C3
/// back to L1, and ten rooms off C2 of which R13 and R21 are visited by the
/// round-trip scenario.
pub fn hospital_spec(seed: u64) -> WorldSpec {
    hospital_like(seed, "hospital", [40, 30, 50, 30, 30, 12])
}

/// Same layout with every zone at most 50 signatures, for `memory_thr = 50`.
pub fn hospital_small_spec(seed: u64) -> WorldSpec {
    hospital_like(seed, "hospital-small", [20, 15, 25, 15, 15, 6])
}

/// The hospital cut into square cells instead of semantic zones.
pub fn hospital_grid_spec(seed: u64, cell_m: f64) -> WorldSpec {
    let mut spec = hospital_spec(seed);
    spec.name = Some("hospital-grid".to_string());
    spec.zoning = Zoning::Grid { cell_m };
    spec
}

pub const GRID_PRESET_CELL_M: f64 = 10.0;

/// Named built-in specs.
pub fn preset(name: &str, seed: u64) -> Option<WorldSpec> {
    match name {
        "hospital" => Some(hospital_spec(seed)),
        "hospital-small" => Some(hospital_small_spec(seed)),
        "hospital-grid" => Some(hospital_grid_spec(seed, GRID_PRESET_CELL_M)),
        _ => None,
    }
}

pub const PRESETS: [&str; 3] = ["hospital", "hospital-small", "hospital-grid"];

fn hospital_like(seed: u64, name: &str, counts: [usize; 6]) -> WorldSpec {
    let [lobby, h1, c2, h2, c3, room] = counts;
    // H2 must span H1 plus the lobby on both sides so that C3 ends next to it.
    let lobby_half = (grid_cols(lobby) as f64 - 1.0) / 2.0;
    let h1_len = 30.0;
    let h2_len = h1_len + 2.0 * (lobby_half + 1.0);
    let corridor = |n: &str, len: f64, count: usize, heading: f64| CorridorSpec {
        name: n.to_string(),
        length_m: len,
        signatures_per_meter: count as f64 / len,
        heading_deg: heading,
    };
    let mut rooms = Vec::new();
    for (k, door) in [5.0, 14.0, 23.0, 32.0, 41.0].into_iter().enumerate() {
        rooms.push(RoomSpec {
            name: format!("R1{}", k + 1),
            attached_corridor: "C2".to_string(),
            door_position_m: door,
            signature_count: room,
            side: Side::Left,
        });
    }
    for (k, door) in [9.0, 18.0, 27.0, 36.0, 45.0].into_iter().enumerate() {
        rooms.push(RoomSpec {
            name: format!("R2{}", k + 1),
            attached_corridor: "C2".to_string(),
            door_position_m: door,
            signature_count: room,
            side: Side::Right,
        });
    }
    WorldSpec {
        seed,
        name: Some(name.to_string()),
        lobby: LobbySpec {
            name: "L1".to_string(),
            signature_count: lobby,
        },
        corridors: vec![
            corridor("H1", h1_len, h1, 0.0),
            corridor("C2", 50.0, c2, 90.0),
            corridor("H2", h2_len, h2, 180.0),
            corridor("C3", 50.0, c3, 270.0),
        ],
        loop_back: true,
        rooms,
        portal_radius: Portal::DEFAULT_RADIUS,
        zoning: Zoning::Semantic,
    }
}

/// The canonical evaluation world (hospital preset, seed 42).
pub fn scenario_world() -> WorldMap {
    generate(&hospital_spec(42)).expect("hospital preset is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_corridor() -> WorldSpec {
        WorldSpec {
            seed: 1,
            name: None,
            lobby: LobbySpec {
                name: "L".to_string(),
                signature_count: 4,
            },
            corridors: vec![CorridorSpec {
                name: "C".to_string(),
                length_m: 10.0,
                signatures_per_meter: 1.0,
                heading_deg: 0.0,
            }],
            loop_back: false,
            rooms: vec![],
            portal_radius: 1.0,
            zoning: Zoning::Semantic,
        }
    }

    fn undirected_portals(map: &WorldMap) -> usize {
        map.portals().count() / 2
    }

    #[test]
    fn scenario_world_shape() {
        let map = scenario_world();
        assert_eq!(map.validate(), vec![]);
        assert_eq!(map.zones.len(), 15);
        assert_eq!(map.signature_count(), 40 + 30 + 50 + 30 + 30 + 10 * 12);
        for (name, n) in [
            ("L1", 40),
            ("H1", 30),
            ("C2", 50),
            ("H2", 30),
            ("C3", 30),
            ("R13", 12),
            ("R21", 12),
        ] {
            let z = map.zone_by_name(name).unwrap();
            assert_eq!(map.signatures_of(z.id).unwrap().len(), n, "{name}");
        }
    }

    #[test]
    fn rooms_have_one_portal_and_one_door_link() {
        let map = scenario_world();
        for z in map.zones.values().filter(|z| z.kind == ZoneKind::Room) {
            assert_eq!(z.portals.len(), 1, "{}", z.name);
            assert_eq!(map.zone(z.portals[0].to_zone).unwrap().name, "C2");
            let outside: usize = z
                .members
                .iter()
                .map(|m| {
                    map.signature(*m)
                        .unwrap()
                        .links
                        .iter()
                        .filter(|l| map.zone_of(**l).unwrap() != z.id)
                        .count()
                })
                .sum();
            assert_eq!(outside, 1, "{}", z.name);
        }
    }

    #[test]
    fn skeleton_ids_precede_room_ids() {
        let map = scenario_world();
        let max_skel = map
            .signatures
            .values()
            .filter(|s| s.layer == LayerTag::Skeleton)
            .map(|s| s.id)
            .max();
        let min_room = map
            .signatures
            .values()
            .filter(|s| s.layer == LayerTag::Room)
            .map(|s| s.id)
            .min();
        assert!(max_skel < min_room);
    }

    #[test]
    fn payload_sizes_in_range() {
        let map = scenario_world();
        assert!(map
            .signatures
            .values()
            .all(|s| (PAYLOAD_MIN_BYTES..=PAYLOAD_MAX_BYTES).contains(&s.payload_bytes)));
    }

    #[test]
    fn one_corridor_no_rooms_has_one_portal() {
        let map = generate(&one_corridor()).unwrap();
        assert_eq!(map.zones.len(), 2);
        assert_eq!(undirected_portals(&map), 1);
        assert_eq!(map.validate(), vec![]);
    }

    #[test]
    fn manifest_matches_map() {
        let (map, manifest) = generate_with_manifest(&hospital_spec(42)).unwrap();
        assert_eq!(manifest.len(), map.signature_count());
        let r13 = map.zone_by_name("R13").unwrap();
        let from_manifest: Vec<SignatureId> = manifest.iter().filter(|p| p.element == "R13").map(|p| p.sig).collect();
        assert_eq!(from_manifest, r13.members);
    }

    #[test]
    fn small_preset_fits_fifty() {
        let map = generate(&hospital_small_spec(42)).unwrap();
        assert_eq!(map.validate(), vec![]);
        assert!(map.zones.values().all(|z| z.members.len() <= 50));
    }

    #[test]
    fn grid_zoning_mixes_rooms_into_corridor_cells() {
        let (map, manifest) = generate_with_manifest(&hospital_grid_spec(42, 10.0)).unwrap();
        assert_eq!(map.validate(), vec![]);
        let mixed = map.zones.values().any(|z| {
            let elems: BTreeSet<&str> = z
                .members
                .iter()
                .map(|m| manifest[m.0 as usize - 1].element.as_str())
                .collect();
            elems.contains("C2") && elems.iter().any(|e| e.starts_with('R'))
        });
        assert!(mixed);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = one_corridor();
        s.corridors[0].name = "L".to_string();
        assert!(matches!(generate(&s), Err(GenError::SpecInvalid(m)) if m.contains("duplicate")));

        let mut s = one_corridor();
        s.rooms.push(RoomSpec {
            name: "R".to_string(),
            attached_corridor: "C".to_string(),
            door_position_m: 11.0,
            signature_count: 3,
            side: Side::Left,
        });
        assert!(generate(&s).is_err());

        let mut s = one_corridor();
        s.lobby.signature_count = 0;
        assert!(generate(&s).is_err());

        let mut s = one_corridor();
        s.loop_back = true;
        assert!(matches!(generate(&s), Err(GenError::SpecInvalid(m)) if m.contains("loop_back")));
    }

    #[test]
    fn same_seed_same_world() {
        assert_eq!(
            generate(&hospital_spec(7)).unwrap(),
            generate(&hospital_spec(7)).unwrap()
        );
        assert_ne!(
            generate(&hospital_spec(7)).unwrap(),
            generate(&hospital_spec(8)).unwrap()
        );
    }
}
