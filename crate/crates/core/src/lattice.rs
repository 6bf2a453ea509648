//! Centered-hexagonal lattice patches in axial coordinates.
//!
//! A cell with `k` rings holds `3k(k+1) + 1` nodes ordered as a center-out
//! spiral. Every node carries its coordination number, a Z3 chirality label
//! derived from its coordinates, and a boundary flag.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

pub const MAX_RINGS: usize = 32;

/// Axial neighbor offsets, in the order used for the spiral walk.
pub const AXIAL_DIRECTIONS: [AxialCoord; 6] = [
    AxialCoord { q: 1, r: 0 },
    AxialCoord { q: 1, r: -1 },
    AxialCoord { q: 0, r: -1 },
    AxialCoord { q: -1, r: 0 },
    AxialCoord { q: -1, r: 1 },
    AxialCoord { q: 0, r: 1 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AxialCoord {
    pub q: i32,
    pub r: i32,
}

impl AxialCoord {
    pub const ORIGIN: AxialCoord = AxialCoord { q: 0, r: 0 };

    pub fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    /// Hex distance to the origin.
    pub fn ring(self) -> u32 {
        ((self.q.abs() + self.r.abs() + (self.q + self.r).abs()) / 2) as u32
    }

    pub fn offset(self, d: AxialCoord, times: i32) -> Self {
        Self::new(self.q + d.q * times, self.r + d.r * times)
    }

    /// Z3 class from `(q - r) mod 3`, remapped 0 -> 0, 1 -> +1, 2 -> -1.
    pub fn chirality(self) -> Chirality {
        match (self.q - self.r).rem_euclid(3) {
            0 => Chirality::Zero,
            1 => Chirality::Plus,
            _ => Chirality::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chirality {
    Minus,
    Zero,
    Plus,
}

impl Chirality {
    pub fn value(self) -> i8 {
        match self {
            Chirality::Minus => -1,
            Chirality::Zero => 0,
            Chirality::Plus => 1,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Chirality::Zero
    }
}

impl Serialize for Chirality {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Chirality {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            -1 => Ok(Chirality::Minus),
            0 => Ok(Chirality::Zero),
            1 => Ok(Chirality::Plus),
            v => Err(serde::de::Error::custom(format!("chirality {v} not in {{-1,0,1}}"))),
        }
    }
}

/// An immutable centered-hexagonal patch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexCell {
    pub rings: usize,
    pub nodes: Vec<AxialCoord>,
    pub adjacency: Vec<Vec<usize>>,
    pub coordination: Vec<usize>,
    pub chirality: Vec<Chirality>,
    pub boundary: Vec<bool>,
}

/// Number of nodes in a centered hexagonal cell with `rings` rings.
pub fn centered_hex_number(rings: usize) -> usize {
    3 * rings * (rings + 1) + 1
}

pub fn build_cell(rings: usize) -> Result<HexCell> {
    if rings > MAX_RINGS {
        return arg(format!("rings must be in 0..={MAX_RINGS}, got {rings}"));
    }

    let mut nodes = Vec::with_capacity(centered_hex_number(rings));
    nodes.push(AxialCoord::ORIGIN);
    for k in 1..=rings as i32 {
        // start at the corner reached by walking k steps along direction 4
        let mut cur = AxialCoord::ORIGIN.offset(AXIAL_DIRECTIONS[4], k);
        for dir in AXIAL_DIRECTIONS {
            for _ in 0..k {
                nodes.push(cur);
                cur = cur.offset(dir, 1);
            }
        }
    }

    let index: HashMap<AxialCoord, usize> = nodes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let adjacency: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&c| {
            let mut nb: Vec<usize> = AXIAL_DIRECTIONS
                .iter()
                .filter_map(|&d| index.get(&c.offset(d, 1)).copied())
                .collect();
            nb.sort_unstable();
            nb
        })
        .collect();
    let coordination: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let boundary = coordination.iter().map(|&c| c < 6).collect();
    let chirality = nodes.iter().map(|c| c.chirality()).collect();

    Ok(HexCell {
        rings,
        nodes,
        adjacency,
        coordination,
        chirality,
        boundary,
    })
}

impl HexCell {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        match self.adjacency.get(i) {
            Some(nb) => Ok(nb),
            None => arg(format!("node index {i} out of range for {} nodes", self.len())),
        }
    }

    /// Undirected edges `(i, j)` with `i < j`, in node order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }
}
