//! Value-table containers and the model/game correspondence.
//!
//! A [`SimplifiedModel`] is a tabulated set function `f: P({1..d}) -> R`
//! together with the set of *active* indices of the point being explained;
//! everything the attribution methods need is in this table. A
//! [`CooperativeGame`] is a tabulated `v: P({1..n}) -> R` with `v(empty) = 0`.
//!
//! Both types are immutable after construction and all operations here are
//! pure, so values can be shared freely across threads.
//!
//! # JSON format
//!
//! Models serialize as `{"d": int, "active": [int, ...], "values": [float; 2^d]}`
//! where `active` lists 1-based indices and `values[k]` is the value of the
//! subset with bitmask `k` (bit `i - 1` <-> index `i`). Games use the same
//! shape without the `active` field (implicitly all players) and require
//! `values[0] == 0.0` exactly.

use crate::error::{Error, Result};
use crate::subset::{SubsetMask, MAX_DIMENSION};
use serde::{Deserialize, Serialize};

/// A tabulated simplified model: player count `d`, active index set and a
/// dense table of `2^d` values.
///
/// The table stores a value for every subset, but attribution methods only
/// ever read entries for subsets of the active set; the rest is carried
/// verbatim (an induced model stores 0 there). The construction assumes the
/// underlying simplification map is injective so that distinct subsets
/// really are distinct inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelWire", into = "ModelWire")]
pub struct SimplifiedModel {
    d: usize,
    active: SubsetMask,
    values: Vec<f64>,
}

impl SimplifiedModel {
    pub fn new(d: usize, active: SubsetMask, values: Vec<f64>) -> Result<Self> {
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "dimension must be in 1..={MAX_DIMENSION}, got {d}"
            )));
        }
        if !active.fits(d) {
            return Err(Error::InvalidArgument(format!(
                "active set {active:?} does not fit in width {d}"
            )));
        }
        if values.len() != 1 << d {
            return Err(Error::Schema(format!(
                "value table must have exactly 2^{d} = {} entries, got {}",
                1usize << d,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("non-finite table value {bad}")));
        }
        Ok(SimplifiedModel { d, active, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The active index set `A(x')`.
    pub fn active(&self) -> SubsetMask {
        self.active
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `f_x(S)`.
    pub fn value(&self, s: SubsetMask) -> f64 {
        debug_assert!(s.fits(self.d));
        self.values[s.index()]
    }

    /// `f_x(empty)`, the attribution baseline.
    pub fn baseline(&self) -> f64 {
        self.values[0]
    }

    /// `f_x(A(x'))`, the model output at the explained point.
    pub fn output(&self) -> f64 {
        self.value(self.active)
    }

    /// The cooperative game induced by this model: players are the active
    /// indices renumbered `1..=|A|` in ascending order of original index,
    /// and `v(S) = f_x(S) - f_x(empty)`. The empty coalition is 0 exactly.
    pub fn induced_game(&self) -> CooperativeGame {
        let k = self.active.len();
        let base = self.baseline();
        let mut values = vec![0.0; 1usize << k];
        for t in 1..(1u32 << k) {
            let t = SubsetMask::from_bits(t);
            values[t.index()] = self.value(t.expand(self.active)) - base;
        }
        CooperativeGame { n: k, values }
    }

    /// Re-tabulates the model over its active indices only, so that the
    /// result has every index active. Attributions of the result equal the
    /// active coordinates of this model's attributions.
    pub fn restrict_to_active(&self) -> Result<SimplifiedModel> {
        if self.active.is_empty() {
            return Err(Error::DegenerateInput(
                "cannot restrict a model with no active indices".into(),
            ));
        }
        let k = self.active.len();
        let values = (0..(1u32 << k))
            .map(|t| self.value(SubsetMask::from_bits(t).expand(self.active)))
            .collect();
        SimplifiedModel::new(k, SubsetMask::full(k), values)
    }
}

/// The model induced by a game over the active set `active` inside width
/// `d`: subsets of `active` take the game's values, every other subset is 0.
/// Inducing a game back from the result returns `game` unchanged.
pub fn induced_model(
    game: &CooperativeGame,
    d: usize,
    active: SubsetMask,
) -> Result<SimplifiedModel> {
    if !active.fits(d) {
        return Err(Error::InvalidArgument(format!(
            "active set {active:?} does not fit in width {d}"
        )));
    }
    if game.n() != active.len() {
        return Err(Error::InvalidArgument(format!(
            "game has {} players but the active set has {}",
            game.n(),
            active.len()
        )));
    }
    let mut values = vec![0.0; 1usize << d];
    for s in 0..(1u32 << d) {
        let s = SubsetMask::from_bits(s);
        if s.is_subset_of(active) {
            values[s.index()] = game.value(s.compress(active));
        }
    }
    SimplifiedModel::new(d, active, values)
}

/// A tabulated cooperative game: `n` players and a dense table of `2^n`
/// coalition values with `v(empty) = 0` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameWire", into = "GameWire")]
pub struct CooperativeGame {
    n: usize,
    values: Vec<f64>,
}

impl CooperativeGame {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "player count must be at most {MAX_DIMENSION}, got {n}"
            )));
        }
        if values.len() != 1 << n {
            return Err(Error::Schema(format!(
                "value table must have exactly 2^{n} = {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("non-finite table value {bad}")));
        }
        if values[0] != 0.0 {
            return Err(Error::Schema(format!(
                "the empty coalition must have value exactly 0.0, got {}",
                values[0]
            )));
        }
        Ok(CooperativeGame { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `v(S)`.
    pub fn value(&self, s: SubsetMask) -> f64 {
        debug_assert!(s.fits(self.n));
        self.values[s.index()]
    }

    /// `v({1..n})`.
    pub fn grand_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// An attribution: the baseline `phi0 = f_x(empty)` plus one real per index
/// (`phi[i - 1]` belongs to index `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub phi0: f64,
    pub phi: Vec<f64>,
}

impl Attribution {
    /// `phi0 + sum_i phi_i`; equals the model output whenever the producing
    /// explanation satisfies local accuracy.
    pub fn total(&self) -> f64 {
        self.phi0 + self.phi.iter().sum::<f64>()
    }
}

#[derive(Serialize, Deserialize)]
struct ModelWire {
    d: usize,
    active: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<ModelWire> for SimplifiedModel {
    type Error = Error;

    fn try_from(w: ModelWire) -> Result<Self> {
        let active = SubsetMask::from_players(&w.active)?;
        if active.len() != w.active.len() {
            return Err(Error::Schema("duplicate active index".into()));
        }
        SimplifiedModel::new(w.d, active, w.values)
    }
}

impl From<SimplifiedModel> for ModelWire {
    fn from(m: SimplifiedModel) -> ModelWire {
        ModelWire {
            d: m.d,
            active: m.active.players().collect(),
            values: m.values,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GameWire {
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    active: Option<Vec<usize>>,
    values: Vec<f64>,
}

impl TryFrom<GameWire> for CooperativeGame {
    type Error = Error;

    fn try_from(w: GameWire) -> Result<Self> {
        if let Some(active) = &w.active {
            let mask = SubsetMask::from_players(active)?;
            if mask != SubsetMask::full(w.d) {
                return Err(Error::Schema(
                    "a game file must have all players active".into(),
                ));
            }
        }
        CooperativeGame::new(w.d, w.values)
    }
}

impl From<CooperativeGame> for GameWire {
    fn from(g: CooperativeGame) -> GameWire {
        GameWire {
            d: g.n,
            active: None,
            values: g.values,
        }
    }
}
