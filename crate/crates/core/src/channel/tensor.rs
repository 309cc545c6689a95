use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::complex_gaussian;

/// Support of the fading magnitudes, bounded away from zero and infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for MagnitudeBounds {
    fn default() -> Self {
        MagnitudeBounds { min: 1e-3, max: 1e3 }
    }
}

impl MagnitudeBounds {
    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        m >= self.min && m <= self.max
    }
}

/// Rejection cap per coefficient.
pub const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid channel dimensions {num_rx}x{num_tx}x{num_slots}")]
    Dimensions {
        num_rx: usize,
        num_tx: usize,
        num_slots: usize,
    },
    #[error("invalid magnitude bounds [{min}, {max}]")]
    Bounds { min: f64, max: f64 },
    #[error("coefficient ({rx}, {tx}, {slot}) rejected {MAX_REJECTIONS} times against bounds [{min}, {max}]")]
    RejectionCap {
        rx: usize,
        tx: usize,
        slot: usize,
        min: f64,
        max: f64,
    },
}

/// Channel coefficients `h(k, j, n)` from transmitter `j` to receiver `k` in
/// slot `n`. All indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    num_rx: usize,
    num_tx: usize,
    num_slots: usize,
    h: Vec<Complex64>,
}

impl ChannelTensor {
    pub fn from_fn(
        num_rx: usize,
        num_tx: usize,
        num_slots: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        let mut h = Vec::with_capacity(num_rx * num_tx * num_slots);
        for k in 0..num_rx {
            for j in 0..num_tx {
                for n in 0..num_slots {
                    h.push(f(k, j, n));
                }
            }
        }
        ChannelTensor {
            num_rx,
            num_tx,
            num_slots,
            h,
        }
    }

    pub fn num_rx(&self) -> usize {
        self.num_rx
    }

    pub fn num_tx(&self) -> usize {
        self.num_tx
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    fn index(&self, rx: usize, tx: usize, slot: usize) -> usize {
        assert!(
            rx < self.num_rx && tx < self.num_tx && slot < self.num_slots,
            "channel index ({rx}, {tx}, {slot}) out of range"
        );
        (rx * self.num_tx + tx) * self.num_slots + slot
    }

    pub fn get(&self, rx: usize, tx: usize, slot: usize) -> Complex64 {
        self.h[self.index(rx, tx, slot)]
    }

    pub fn set(&mut self, rx: usize, tx: usize, slot: usize, value: Complex64) {
        let i = self.index(rx, tx, slot);
        self.h[i] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.h.iter().copied()
    }

    /// Copy with every coefficient at slot `>= from_slot` replaced by `f`.
    pub fn with_future_replaced(
        &self,
        from_slot: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        ChannelTensor::from_fn(self.num_rx, self.num_tx, self.num_slots, |k, j, n| {
            if n >= from_slot {
                f(k, j, n)
            } else {
                self.get(k, j, n)
            }
        })
    }
}

/// Draws an i.i.d. CN(0,1) tensor, resampling any coefficient whose magnitude
/// falls outside `bounds`.
pub fn generate_channel<R: Rng + ?Sized>(
    num_rx: usize,
    num_tx: usize,
    num_slots: usize,
    rng: &mut R,
    bounds: MagnitudeBounds,
) -> Result<ChannelTensor, ChannelError> {
    if num_rx == 0 || num_tx == 0 || num_slots == 0 {
        return Err(ChannelError::Dimensions {
            num_rx,
            num_tx,
            num_slots,
        });
    }
    if !(bounds.min > 0.0 && bounds.min < bounds.max && bounds.max.is_finite()) {
        return Err(ChannelError::Bounds {
            min: bounds.min,
            max: bounds.max,
        });
    }
    let mut h = Vec::with_capacity(num_rx * num_tx * num_slots);
    for k in 0..num_rx {
        for j in 0..num_tx {
            for n in 0..num_slots {
                h.push(draw_bounded(rng, bounds).ok_or(ChannelError::RejectionCap {
                    rx: k,
                    tx: j,
                    slot: n,
                    min: bounds.min,
                    max: bounds.max,
                })?);
            }
        }
    }
    Ok(ChannelTensor {
        num_rx,
        num_tx,
        num_slots,
        h,
    })
}

pub(crate) fn draw_bounded<R: Rng + ?Sized>(
    rng: &mut R,
    bounds: MagnitudeBounds,
) -> Option<Complex64> {
    (0..=MAX_REJECTIONS)
        .map(|_| complex_gaussian(rng))
        .find(|z| bounds.contains(*z))
}
