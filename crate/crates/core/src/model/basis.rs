//! Fixed-excitation-number bases.
//!
//! Ordering is part of the contract so trajectories compare bit-for-bit:
//! photon sites ascending, photon pairs lexicographic `(l, m)` with `l <= m`,
//! then atom-excited states (`PhotonExcited` by photon site, then
//! `DoubleExcited` for the Hubbard model).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    One,
    Two,
}

impl Sector {
    pub fn excitations(self) -> usize {
        match self {
            Sector::One => 1,
            Sector::Two => 2,
        }
    }
}

/// `Spin`: two-level atom with states g/e. `Hubbard`: the atom replaced by a
/// bosonic site `e` that may hold two photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Spin,
    Hubbard,
}

/// One basis configuration; sites are the physical labels `-N..=N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Config {
    /// One photon at `l`, atom in g.
    Photon(i32),
    /// No photon, atom excited (one boson on `e`).
    Excited,
    /// Two photons at `l <= m`, atom in g.
    Pair(i32, i32),
    /// One photon at `l`, atom excited.
    PhotonExcited(i32),
    /// Two bosons on `e` (Hubbard only).
    DoubleExcited,
}

impl Config {
    /// Occupied modes as a sorted multiset; chain site `l` maps to mode
    /// `l + N`, the atom/auxiliary site to mode `2N + 1`.
    pub fn modes(&self, half_length: usize) -> ModeList {
        let n = half_length as i32;
        let e = 2 * half_length + 1;
        let s = |l: i32| (l + n) as usize;
        match *self {
            Config::Photon(l) => ModeList::one(s(l)),
            Config::Excited => ModeList::one(e),
            Config::Pair(l, m) => ModeList::two(s(l), s(m)),
            Config::PhotonExcited(l) => ModeList::two(s(l), e),
            Config::DoubleExcited => ModeList::two(e, e),
        }
    }

    pub fn from_modes(modes: &ModeList, half_length: usize) -> Config {
        let n = half_length as i32;
        let e = 2 * half_length + 1;
        let l = |m: usize| m as i32 - n;
        match modes.as_slice() {
            [a] if *a == e => Config::Excited,
            [a] => Config::Photon(l(*a)),
            [a, b] if *a == e && *b == e => Config::DoubleExcited,
            [a, b] if *b == e => Config::PhotonExcited(l(*a)),
            [a, b] => Config::Pair(l(*a), l(*b)),
            _ => unreachable!("at most two excitations"),
        }
    }

    /// Mirror image `l -> -l`; `e` is fixed.
    pub fn mirrored(&self) -> Config {
        match *self {
            Config::Photon(l) => Config::Photon(-l),
            Config::Pair(l, m) => Config::Pair((-m).min(-l), (-m).max(-l)),
            Config::PhotonExcited(l) => Config::PhotonExcited(-l),
            c => c,
        }
    }
}

/// Sorted occupied modes, at most two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeList {
    len: usize,
    modes: [usize; 2],
}

impl ModeList {
    pub fn one(a: usize) -> Self {
        ModeList { len: 1, modes: [a, 0] }
    }

    pub fn two(a: usize, b: usize) -> Self {
        ModeList { len: 2, modes: [a.min(b), a.max(b)] }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.modes[..self.len]
    }

    pub fn count(&self, mode: usize) -> usize {
        self.as_slice().iter().filter(|&&m| m == mode).count()
    }

    /// Moves one boson from `from` to `to`; `None` if `from` is empty.
    pub fn hop(&self, from: usize, to: usize) -> Option<ModeList> {
        let pos = self.as_slice().iter().position(|&m| m == from)?;
        let mut modes = self.modes;
        modes[pos] = to;
        Some(match self.len {
            1 => ModeList::one(modes[0]),
            _ => ModeList::two(modes[0], modes[1]),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisTag {
    pub half_length: usize,
    pub sector: Sector,
    pub kind: ModelKind,
}

#[derive(Clone, Debug)]
pub struct Basis {
    tag: BasisTag,
    states: Vec<Config>,
    index: HashMap<Config, usize>,
}

impl Basis {
    pub fn enumerate(half_length: usize, sector: Sector, kind: ModelKind) -> Basis {
        let n = half_length as i32;
        let mut states = Vec::new();
        match sector {
            Sector::One => {
                states.extend((-n..=n).map(Config::Photon));
                states.push(Config::Excited);
            }
            Sector::Two => {
                for l in -n..=n {
                    states.extend((l..=n).map(|m| Config::Pair(l, m)));
                }
                states.extend((-n..=n).map(Config::PhotonExcited));
                if kind == ModelKind::Hubbard {
                    states.push(Config::DoubleExcited);
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        Basis { tag: BasisTag { half_length, sector, kind }, states, index }
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn half_length(&self) -> usize {
        self.tag.half_length
    }

    pub fn sector(&self) -> Sector {
        self.tag.sector
    }

    pub fn kind(&self) -> ModelKind {
        self.tag.kind
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn sites(&self) -> usize {
        2 * self.tag.half_length + 1
    }

    /// Index of the atom / auxiliary mode in mode lists and density vectors.
    pub fn e_mode(&self) -> usize {
        self.sites()
    }

    pub fn states(&self) -> &[Config] {
        &self.states
    }

    pub fn config(&self, i: usize) -> Config {
        self.states[i]
    }

    pub fn index_of(&self, c: &Config) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Largest occupation allowed on `e`.
    pub fn e_capacity(&self) -> usize {
        match self.tag.kind {
            ModelKind::Spin => 1,
            ModelKind::Hubbard => 2,
        }
    }

    pub fn require(&self, sector: Option<Sector>, kind: Option<ModelKind>) -> Result<()> {
        if let Some(s) = sector {
            if s != self.tag.sector {
                return Err(Error::BasisMismatch(format!("expected {s:?} sector, basis is {:?}", self.tag.sector)));
            }
        }
        if let Some(k) = kind {
            if k != self.tag.kind {
                return Err(Error::BasisMismatch(format!("expected {k:?} basis, got {:?}", self.tag.kind)));
            }
        }
        Ok(())
    }
}
