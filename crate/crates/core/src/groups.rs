//! The 21 settings of the 17 plane symmetry groups: generators,
//! multiplicities, crystal families, Laue classes, and the type-I
//! (translationengleiche) maximal-subgroup / minimal-supergroup hierarchy.
//!
//! Point operations and their fractional translations are stored as
//! generators in the standard setting; full operation sets, orbits, and
//! glide phase shifts are derived from them rather than hand-tabulated.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// One plane-group setting, named by its Hermann-Mauguin full symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[allow(non_camel_case_types)]
pub enum PlaneGroup {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
    #[serde(rename = "p1m1")]
    P1m1,
    #[serde(rename = "p11m")]
    P11m,
    #[serde(rename = "p1g1")]
    P1g1,
    #[serde(rename = "p11g")]
    P11g,
    #[serde(rename = "c1m1")]
    C1m1,
    #[serde(rename = "c11m")]
    C11m,
    #[serde(rename = "p2mm")]
    P2mm,
    #[serde(rename = "p2mg")]
    P2mg,
    #[serde(rename = "p2gm")]
    P2gm,
    #[serde(rename = "p2gg")]
    P2gg,
    #[serde(rename = "c2mm")]
    C2mm,
    #[serde(rename = "p4")]
    P4,
    #[serde(rename = "p4mm")]
    P4mm,
    #[serde(rename = "p4gm")]
    P4gm,
    #[serde(rename = "p3")]
    P3,
    #[serde(rename = "p3m1")]
    P3m1,
    #[serde(rename = "p31m")]
    P31m,
    #[serde(rename = "p6")]
    P6,
    #[serde(rename = "p6mm")]
    P6mm,
}

/// Crystal family of a plane-group setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Oblique,
    Rectangular,
    Square,
    Hexagonal,
}

/// 2D Laue class: the point symmetry of a DFT amplitude map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LaueClass {
    #[serde(rename = "2")]
    L2,
    #[serde(rename = "2mm")]
    L2mm,
    #[serde(rename = "4")]
    L4,
    #[serde(rename = "4mm")]
    L4mm,
    #[serde(rename = "6")]
    L6,
    #[serde(rename = "6mm")]
    L6mm,
}

impl LaueClass {
    pub fn name(self) -> &'static str {
        match self {
            LaueClass::L2 => "2",
            LaueClass::L2mm => "2mm",
            LaueClass::L4 => "4",
            LaueClass::L4mm => "4mm",
            LaueClass::L6 => "6",
            LaueClass::L6mm => "6mm",
        }
    }

    /// Order of the point group, i.e. the multiplicity used for Laue-class
    /// bias corrections.
    pub fn order(self) -> u32 {
        match self {
            LaueClass::L2 => 2,
            LaueClass::L2mm => 4,
            LaueClass::L4 => 4,
            LaueClass::L4mm => 8,
            LaueClass::L6 => 6,
            LaueClass::L6mm => 12,
        }
    }

    /// Friedel's law makes every amplitude map at least twofold symmetric,
    /// so class 2 sits below every other class.
    pub fn is_subclass_of(self, other: LaueClass) -> bool {
        if self == other {
            return true;
        }
        match self {
            LaueClass::L2 => true,
            LaueClass::L2mm => matches!(other, LaueClass::L4mm | LaueClass::L6mm),
            LaueClass::L4 => matches!(other, LaueClass::L4mm),
            LaueClass::L6 => matches!(other, LaueClass::L6mm),
            _ => false,
        }
    }
}

/// A plane-group operation: point matrix plus fractional translation.
///
/// The matrix acts on fractional column coordinates, `r' = m r + t`.
/// Translations are stored in units of half cells (all plane-group
/// translations are 0 or 1/2 along each axis), which keeps composition and
/// phase-shift arithmetic exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Op {
    pub m: [[i32; 2]; 2],
    /// Translation components in units of 1/2, each 0 or 1.
    pub t_half: [i32; 2],
}

impl Op {
    pub const IDENTITY: Op = Op {
        m: [[1, 0], [0, 1]],
        t_half: [0, 0],
    };

    pub fn new(m: [[i32; 2]; 2], t_half: [i32; 2]) -> Op {
        Op {
            m,
            t_half: [t_half[0].rem_euclid(2), t_half[1].rem_euclid(2)],
        }
    }

    /// Composition `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(self, other: Op) -> Op {
        let a = self.m;
        let b = other.m;
        let m = [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ];
        let t = [
            a[0][0] * other.t_half[0] + a[0][1] * other.t_half[1] + self.t_half[0],
            a[1][0] * other.t_half[0] + a[1][1] * other.t_half[1] + self.t_half[1],
        ];
        Op::new(m, t)
    }

    /// Fractional translation as floats.
    pub fn translation(&self) -> [f64; 2] {
        [self.t_half[0] as f64 / 2.0, self.t_half[1] as f64 / 2.0]
    }

    /// Image of a reciprocal index under this operation: row vector times
    /// matrix, `(h', k') = (h, k) · m`.
    pub fn map_index(&self, h: i32, k: i32) -> (i32, i32) {
        (
            h * self.m[0][0] + k * self.m[1][0],
            h * self.m[0][1] + k * self.m[1][1],
        )
    }

    /// Phase shift, in degrees mod 360, that relates the source coefficient
    /// to its image: `phase(g·m) = phase(g) - 360 (h t1 + k t2)`.
    pub fn phase_shift_deg(&self, h: i32, k: i32) -> i32 {
        (-180 * (h * self.t_half[0] + k * self.t_half[1])).rem_euclid(360)
    }

    /// Apply to fractional direct-space coordinates.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let t = self.translation();
        (
            self.m[0][0] as f64 * x + self.m[0][1] as f64 * y + t[0],
            self.m[1][0] as f64 * x + self.m[1][1] as f64 * y + t[1],
        )
    }

    /// Inverse operation (point matrices are unimodular).
    pub fn inverse(&self) -> Op {
        let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        debug_assert!(det == 1 || det == -1);
        let inv = [
            [self.m[1][1] * det, -self.m[0][1] * det],
            [-self.m[1][0] * det, self.m[0][0] * det],
        ];
        let t = [
            -(inv[0][0] * self.t_half[0] + inv[0][1] * self.t_half[1]),
            -(inv[1][0] * self.t_half[0] + inv[1][1] * self.t_half[1]),
        ];
        Op::new(inv, t)
    }
}

const ROT2: [[i32; 2]; 2] = [[-1, 0], [0, -1]];
const ROT4: [[i32; 2]; 2] = [[0, -1], [1, 0]];
const ROT3: [[i32; 2]; 2] = [[0, -1], [1, -1]];
const ROT6: [[i32; 2]; 2] = [[1, -1], [1, 0]];
const MIR_X: [[i32; 2]; 2] = [[-1, 0], [0, 1]]; // normal along [1 0]
const MIR_Y: [[i32; 2]; 2] = [[1, 0], [0, -1]]; // normal along [0 1]
const MIR_D1: [[i32; 2]; 2] = [[0, -1], [-1, 0]]; // (x,y) -> (-y,-x)
const MIR_D2: [[i32; 2]; 2] = [[0, 1], [1, 0]]; // (x,y) -> (y,x)
const IDENT: [[i32; 2]; 2] = [[1, 0], [0, 1]];

/// All 21 settings ordered as in the report tables.
pub const ALL_SETTINGS: [PlaneGroup; 21] = [
    PlaneGroup::P1,
    PlaneGroup::P2,
    PlaneGroup::P1m1,
    PlaneGroup::P11m,
    PlaneGroup::P1g1,
    PlaneGroup::P11g,
    PlaneGroup::C1m1,
    PlaneGroup::C11m,
    PlaneGroup::P2mm,
    PlaneGroup::P2mg,
    PlaneGroup::P2gm,
    PlaneGroup::P2gg,
    PlaneGroup::C2mm,
    PlaneGroup::P4,
    PlaneGroup::P4mm,
    PlaneGroup::P4gm,
    PlaneGroup::P3,
    PlaneGroup::P3m1,
    PlaneGroup::P31m,
    PlaneGroup::P6,
    PlaneGroup::P6mm,
];

/// The 17 primitive settings above p1 that the selection pipeline scores,
/// in table order.
pub const SCORED_SETTINGS: [PlaneGroup; 17] = [
    PlaneGroup::P2,
    PlaneGroup::P1m1,
    PlaneGroup::P11m,
    PlaneGroup::P1g1,
    PlaneGroup::P11g,
    PlaneGroup::P2mm,
    PlaneGroup::P2mg,
    PlaneGroup::P2gm,
    PlaneGroup::P2gg,
    PlaneGroup::P4,
    PlaneGroup::P4mm,
    PlaneGroup::P4gm,
    PlaneGroup::P3,
    PlaneGroup::P3m1,
    PlaneGroup::P31m,
    PlaneGroup::P6,
    PlaneGroup::P6mm,
];

impl PlaneGroup {
    pub fn name(self) -> &'static str {
        use PlaneGroup::*;
        match self {
            P1 => "p1",
            P2 => "p2",
            P1m1 => "p1m1",
            P11m => "p11m",
            P1g1 => "p1g1",
            P11g => "p11g",
            C1m1 => "c1m1",
            C11m => "c11m",
            P2mm => "p2mm",
            P2mg => "p2mg",
            P2gm => "p2gm",
            P2gg => "p2gg",
            C2mm => "c2mm",
            P4 => "p4",
            P4mm => "p4mm",
            P4gm => "p4gm",
            P3 => "p3",
            P3m1 => "p3m1",
            P31m => "p31m",
            P6 => "p6",
            P6mm => "p6mm",
        }
    }

    pub fn from_name(name: &str) -> Option<PlaneGroup> {
        ALL_SETTINGS.iter().copied().find(|g| g.name() == name)
    }

    pub fn family(self) -> Family {
        use PlaneGroup::*;
        match self {
            P1 | P2 => Family::Oblique,
            P1m1 | P11m | P1g1 | P11g | C1m1 | C11m | P2mm | P2mg | P2gm | P2gg | C2mm => {
                Family::Rectangular
            }
            P4 | P4mm | P4gm => Family::Square,
            P3 | P3m1 | P31m | P6 | P6mm => Family::Hexagonal,
        }
    }

    pub fn is_centered(self) -> bool {
        matches!(self, PlaneGroup::C1m1 | PlaneGroup::C11m | PlaneGroup::C2mm)
    }

    /// Laue class of the amplitude map of an image with this plane symmetry.
    pub fn laue_class(self) -> LaueClass {
        use PlaneGroup::*;
        match self {
            P1 | P2 => LaueClass::L2,
            P1m1 | P11m | P1g1 | P11g | C1m1 | C11m | P2mm | P2mg | P2gm | P2gg | C2mm => {
                LaueClass::L2mm
            }
            P4 => LaueClass::L4,
            P4mm | P4gm => LaueClass::L4mm,
            P3 | P6 => LaueClass::L6,
            P3m1 | P31m | P6mm => LaueClass::L6mm,
        }
    }

    /// Generators in the standard setting (point matrix, fractional
    /// translation). Centered settings carry their centering vector as an
    /// explicit generator.
    pub fn generators(self) -> Vec<Op> {
        use PlaneGroup::*;
        let op = |m, t| Op::new(m, t);
        match self {
            P1 => vec![],
            P2 => vec![op(ROT2, [0, 0])],
            P1m1 => vec![op(MIR_X, [0, 0])],
            P11m => vec![op(MIR_Y, [0, 0])],
            P1g1 => vec![op(MIR_X, [0, 1])],
            P11g => vec![op(MIR_Y, [1, 0])],
            C1m1 => vec![op(MIR_X, [0, 0]), op(IDENT, [1, 1])],
            C11m => vec![op(MIR_Y, [0, 0]), op(IDENT, [1, 1])],
            P2mm => vec![op(ROT2, [0, 0]), op(MIR_X, [0, 0])],
            P2mg => vec![op(ROT2, [0, 0]), op(MIR_X, [1, 0])],
            P2gm => vec![op(ROT2, [0, 0]), op(MIR_Y, [0, 1])],
            P2gg => vec![op(ROT2, [0, 0]), op(MIR_X, [1, 1])],
            C2mm => vec![op(ROT2, [0, 0]), op(MIR_X, [0, 0]), op(IDENT, [1, 1])],
            P4 => vec![op(ROT4, [0, 0])],
            P4mm => vec![op(ROT4, [0, 0]), op(MIR_X, [0, 0])],
            P4gm => vec![op(ROT4, [0, 0]), op(MIR_X, [1, 1])],
            P3 => vec![op(ROT3, [0, 0])],
            P3m1 => vec![op(ROT3, [0, 0]), op(MIR_D1, [0, 0])],
            P31m => vec![op(ROT3, [0, 0]), op(MIR_D2, [0, 0])],
            P6 => vec![op(ROT6, [0, 0])],
            P6mm => vec![op(ROT6, [0, 0]), op(MIR_D1, [0, 0])],
        }
    }

    /// Full operation set (closure of the generators), identity first.
    pub fn ops(self) -> &'static [Op] {
        static TABLE: OnceLock<BTreeMap<PlaneGroup, Vec<Op>>> = OnceLock::new();
        let table = TABLE.get_or_init(|| {
            ALL_SETTINGS
                .iter()
                .map(|&g| (g, close_generators(&g.generators())))
                .collect()
        });
        &table[&self]
    }

    /// Multiplicity of the general position: the number of distinct point
    /// operations generated.
    pub fn multiplicity(self) -> u32 {
        let mut mats: Vec<[[i32; 2]; 2]> = self.ops().iter().map(|o| o.m).collect();
        mats.sort();
        mats.dedup();
        mats.len() as u32
    }
}

impl fmt::Display for PlaneGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn close_generators(generators: &[Op]) -> Vec<Op> {
    let mut ops = vec![Op::IDENTITY];
    let mut frontier = vec![Op::IDENTITY];
    while let Some(op) = frontier.pop() {
        for &g in generators {
            let next = g.compose(op);
            if !ops.contains(&next) {
                ops.push(next);
                frontier.push(next);
            }
        }
    }
    // Deterministic order: identity first, then sorted by matrix/translation.
    ops.sort_by_key(|o| (o != &Op::IDENTITY, o.m, o.t_half));
    ops
}

/// Multiplicity `k` of the general position (Fig.-1 ladder values).
pub fn multiplicity(group: PlaneGroup) -> u32 {
    group.multiplicity()
}

/// Directed type-I (translationengleiche) maximal-subgroup -> minimal-
/// supergroup edges among the primitive settings.
///
/// Climbs that would require re-indexing onto a centered cell (p1m1 -> p3m1,
/// p11m -> p31m, p2mm -> p6mm) are deliberately absent.
pub const HIERARCHY_EDGES: [(PlaneGroup, PlaneGroup); 24] = [
    (PlaneGroup::P2, PlaneGroup::P2mm),
    (PlaneGroup::P2, PlaneGroup::P2mg),
    (PlaneGroup::P2, PlaneGroup::P2gm),
    (PlaneGroup::P2, PlaneGroup::P2gg),
    (PlaneGroup::P2, PlaneGroup::P4),
    (PlaneGroup::P2, PlaneGroup::P6),
    (PlaneGroup::P1m1, PlaneGroup::P2mm),
    (PlaneGroup::P1m1, PlaneGroup::P2mg),
    (PlaneGroup::P11m, PlaneGroup::P2mm),
    (PlaneGroup::P11m, PlaneGroup::P2gm),
    (PlaneGroup::P1g1, PlaneGroup::P2gm),
    (PlaneGroup::P1g1, PlaneGroup::P2gg),
    (PlaneGroup::P11g, PlaneGroup::P2mg),
    (PlaneGroup::P11g, PlaneGroup::P2gg),
    (PlaneGroup::P2mm, PlaneGroup::P4mm),
    (PlaneGroup::P2gg, PlaneGroup::P4gm),
    (PlaneGroup::P4, PlaneGroup::P4mm),
    (PlaneGroup::P4, PlaneGroup::P4gm),
    (PlaneGroup::P3, PlaneGroup::P3m1),
    (PlaneGroup::P3, PlaneGroup::P31m),
    (PlaneGroup::P3, PlaneGroup::P6),
    (PlaneGroup::P3m1, PlaneGroup::P6mm),
    (PlaneGroup::P31m, PlaneGroup::P6mm),
    (PlaneGroup::P6, PlaneGroup::P6mm),
];

/// The type-I subgroup hierarchy of the primitive settings.
#[derive(Debug, Clone)]
pub struct HierarchyGraph {
    edges: Vec<(PlaneGroup, PlaneGroup)>,
}

impl Default for HierarchyGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl HierarchyGraph {
    pub fn new() -> HierarchyGraph {
        HierarchyGraph {
            edges: HIERARCHY_EDGES.to_vec(),
        }
    }

    pub fn edges(&self) -> &[(PlaneGroup, PlaneGroup)] {
        &self.edges
    }

    /// Minimal type-I supergroups of `group` within the graph.
    pub fn minimal_supergroups(&self, group: PlaneGroup) -> Result<Vec<PlaneGroup>> {
        if group.is_centered() {
            return Err(Error::UnsupportedGroup(group));
        }
        Ok(self
            .edges
            .iter()
            .filter(|(l, _)| *l == group)
            .map(|(_, m)| *m)
            .collect())
    }

    /// Maximal type-I subgroups of `group` within the graph.
    pub fn maximal_subgroups(&self, group: PlaneGroup) -> Result<Vec<PlaneGroup>> {
        if group.is_centered() {
            return Err(Error::UnsupportedGroup(group));
        }
        Ok(self
            .edges
            .iter()
            .filter(|(_, m)| *m == group)
            .map(|(l, _)| *l)
            .collect())
    }
}
