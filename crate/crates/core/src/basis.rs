//! Fixed basis ordering for the three-dot, two-electron `S_z = 0` problem.
//!
//! Singlet block (ordinals 0-5):
//! `|S>_{3,3}, |S>_{2,3}, |S>_{1,3}, |S>_{2,2}, |S>_{1,2}, |S>_{1,1}`.
//! Triplet block (ordinals 0-2): `|T0>_{1,2}, |T0>_{1,3}, |T0>_{2,3}`.
//! A full 9-amplitude vector is the singlet block followed by the triplet
//! block.

use serde::{Deserialize, Serialize};

pub const SINGLET_DIM: usize = 6;
pub const TRIPLET_DIM: usize = 3;
pub const TOTAL_DIM: usize = SINGLET_DIM + TRIPLET_DIM;

/// Singlet ordinal of `|S>_{1,2}` (the logical singlet on the first pair).
pub const S_12: usize = 4;
/// Singlet ordinal of `|S>_{2,3}` (the logical singlet on the last pair).
pub const S_23: usize = 1;
/// Triplet ordinal of `|T0>_{1,2}`.
pub const T0_12: usize = 0;
/// Triplet ordinal of `|T0>_{2,3}`.
pub const T0_23: usize = 2;

/// Full-vector index of `|T0>_{1,2}`.
pub const FULL_T0_12: usize = SINGLET_DIM + T0_12;
/// Full-vector index of `|T0>_{2,3}`.
pub const FULL_T0_23: usize = SINGLET_DIM + T0_23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    Singlet,
    Triplet,
}

/// Position of a basis state: spin sector plus ordinal within its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    pub sector: Sector,
    pub ordinal: usize,
}

impl BasisIndex {
    pub fn new(sector: Sector, ordinal: usize) -> Option<Self> {
        let dim = match sector {
            Sector::Singlet => SINGLET_DIM,
            Sector::Triplet => TRIPLET_DIM,
        };
        (ordinal < dim).then_some(Self { sector, ordinal })
    }

    /// Index into the full 9-amplitude vector.
    pub fn full_index(&self) -> usize {
        match self.sector {
            Sector::Singlet => self.ordinal,
            Sector::Triplet => SINGLET_DIM + self.ordinal,
        }
    }

    pub fn from_full_index(i: usize) -> Option<Self> {
        match i {
            0..=5 => Some(Self { sector: Sector::Singlet, ordinal: i }),
            6..=8 => Some(Self { sector: Sector::Triplet, ordinal: i - SINGLET_DIM }),
            _ => None,
        }
    }

    /// Human-readable label, e.g. `"S_12"` or `"T0_23"`.
    pub fn label(&self) -> &'static str {
        match (self.sector, self.ordinal) {
            (Sector::Singlet, 0) => "S_33",
            (Sector::Singlet, 1) => "S_23",
            (Sector::Singlet, 2) => "S_13",
            (Sector::Singlet, 3) => "S_22",
            (Sector::Singlet, 4) => "S_12",
            (Sector::Singlet, 5) => "S_11",
            (Sector::Triplet, 0) => "T0_12",
            (Sector::Triplet, 1) => "T0_13",
            (Sector::Triplet, 2) => "T0_23",
            _ => unreachable!("ordinal out of range"),
        }
    }

    /// All nine basis states in full-vector order.
    pub fn all() -> impl Iterator<Item = BasisIndex> {
        (0..TOTAL_DIM).map(|i| Self::from_full_index(i).unwrap())
    }
}
