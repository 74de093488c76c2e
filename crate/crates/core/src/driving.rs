//! Invertible ergodic base systems `(Ω, σ)` that drive every cocycle.
//!
//! Two bases are provided:
//!
//! * an irrational rotation of the circle, stored in 64-bit fixed point so
//!   that `σ^n` is an exact group action (wrapping integer addition);
//! * a two-sided Bernoulli shift whose points are `(seed, offset)` pairs.
//!   The symbol sequence is produced by a stateless hash of the pair, so the
//!   shift is just `offset += n` and needs no storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible `|n|` for a single [`DrivingSystem::step`] call and for
/// shift offsets.
pub const MAX_STEP: i64 = 1 << 40;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// A point on the circle `[0, 1)`, stored as `angle * 2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Turn(u64);

impl Turn {
    /// Reduces `angle` mod 1 into `[0, 1)`.
    pub fn from_angle(angle: f64) -> Self {
        let reduced = angle - angle.floor();
        // `reduced` may round up to exactly 1.0 for tiny negative inputs.
        let scaled = reduced * TWO_POW_64;
        if scaled >= TWO_POW_64 {
            Turn(0)
        } else {
            Turn(scaled as u64)
        }
    }

    pub fn from_raw(raw: u64) -> Self {
        Turn(raw)
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn angle(self) -> f64 {
        self.0 as f64 / TWO_POW_64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasePoint {
    Rotation(Turn),
    Shift { seed: u64, offset: i64 },
}

impl BasePoint {
    pub fn rotation(angle: f64) -> Self {
        BasePoint::Rotation(Turn::from_angle(angle))
    }

    pub fn shift(seed: u64, offset: i64) -> Self {
        BasePoint::Shift { seed, offset }
    }

    /// Angle of a rotation point, `None` for shift points.
    pub fn angle(&self) -> Option<f64> {
        match self {
            BasePoint::Rotation(t) => Some(t.angle()),
            BasePoint::Shift { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DrivingSystem {
    IrrationalRotation { alpha: Turn },
    BernoulliShift { alphabet_size: usize, weights: Vec<f64> },
}

impl DrivingSystem {
    /// Rotation by `alpha` (reduced mod 1).
    pub fn rotation(alpha: f64) -> Result<Self> {
        let alpha = Turn::from_angle(alpha);
        if alpha.raw() == 0 {
            return Err(Error::InvalidBase("rotation angle is 0 mod 1".into()));
        }
        Ok(DrivingSystem::IrrationalRotation { alpha })
    }

    /// Rotation by `√2 − 1`.
    pub fn default_rotation() -> Self {
        DrivingSystem::IrrationalRotation {
            alpha: Turn::from_angle(std::f64::consts::SQRT_2 - 1.0),
        }
    }

    pub fn bernoulli(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidBase("empty alphabet".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidBase("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidBase(format!("weights sum to {total}, not 1")));
        }
        Ok(DrivingSystem::BernoulliShift {
            alphabet_size: weights.len(),
            weights,
        })
    }

    pub fn uniform_bernoulli(alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidBase("empty alphabet".into()));
        }
        Self::bernoulli(vec![1.0 / alphabet_size as f64; alphabet_size])
    }

    /// `σ^n(ω)`.
    pub fn step(&self, omega: &BasePoint, n: i64) -> Result<BasePoint> {
        if n.unsigned_abs() > MAX_STEP as u64 {
            return Err(Error::StepOutOfRange { requested: n, limit: MAX_STEP });
        }
        match (self, omega) {
            (DrivingSystem::IrrationalRotation { alpha }, BasePoint::Rotation(t)) => {
                let shift = (n as u64).wrapping_mul(alpha.raw());
                Ok(BasePoint::Rotation(Turn(t.raw().wrapping_add(shift))))
            }
            (DrivingSystem::BernoulliShift { .. }, BasePoint::Shift { seed, offset }) => {
                let next = offset
                    .checked_add(n)
                    .filter(|o| o.unsigned_abs() <= MAX_STEP as u64)
                    .ok_or(Error::OffsetOverflow { offset: *offset, step: n })?;
                Ok(BasePoint::Shift { seed: *seed, offset: next })
            }
            (DrivingSystem::IrrationalRotation { .. }, _) => {
                Err(Error::WrongBaseKind { expected: "rotation" })
            }
            (DrivingSystem::BernoulliShift { .. }, _) => {
                Err(Error::WrongBaseKind { expected: "shift" })
            }
        }
    }

    /// Symbol of a shift point at its current position.
    pub fn symbol_at(&self, omega: &BasePoint) -> Result<usize> {
        let DrivingSystem::BernoulliShift { weights, .. } = self else {
            return Err(Error::WrongBaseKind { expected: "shift" });
        };
        let BasePoint::Shift { seed, offset } = omega else {
            return Err(Error::WrongBaseKind { expected: "shift" });
        };
        if weights.len() == 1 {
            return Ok(0);
        }
        let u = unit_from_hash(hash_pair(*seed, *offset, 0));
        let mut cumulative = 0.0;
        for (i, w) in weights.iter().enumerate() {
            cumulative += w;
            if u < cumulative {
                return Ok(i);
            }
        }
        // u landed in the rounding gap above the last cumulative weight
        Ok(weights.iter().rposition(|w| *w > 0.0).unwrap_or(0))
    }

    /// A deterministic uniform sample in `[0, 1)` attached to `ω`. For a
    /// rotation this is the angle itself; for a shift it is an independent
    /// hash stream selected by `stream`.
    pub fn unit_at(&self, omega: &BasePoint, stream: u64) -> f64 {
        match omega {
            BasePoint::Rotation(t) => t.angle(),
            BasePoint::Shift { seed, offset } => unit_from_hash(hash_pair(*seed, *offset, stream + 1)),
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, DrivingSystem::IrrationalRotation { .. })
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn hash_pair(seed: u64, offset: i64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ offset as u64) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
