//! Signals as linear forms and the slot-by-slot physical channel.
//!
//! Every scheme in this crate is linear in the information symbols and the
//! noise samples. A [`Signal`] is therefore a row of coefficients over a
//! [`SignalBasis`]: in transfer mode there is one lane per symbol and one per
//! noise sample, so a decoded row is the exact end-to-end transfer function;
//! in sampled mode there is a single lane holding a concrete complex value.

use nalgebra::RowDVector;
use num_complex::Complex64;

use super::feedback::{AccessLog, CausalityViolation, FeedbackModel, TxView};
use super::tensor::ChannelTensor;
use crate::numerics::{CMatrix, CVector};

/// A transmitted or received quantity, as coefficients over a [`SignalBasis`].
pub type Signal = RowDVector<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalBasis {
    /// Lanes `0..num_symbols` are the information symbols; lane
    /// `num_symbols + k * num_slots + n` is the noise at receiver `k`, slot `n`.
    Transfer {
        num_symbols: usize,
        num_rx: usize,
        num_slots: usize,
    },
    /// One lane carrying values; `noise[(k, n)]` is added at receiver `k`, slot `n`.
    Sampled { noise: CMatrix },
}

impl SignalBasis {
    pub fn transfer(num_symbols: usize, num_rx: usize, num_slots: usize) -> Self {
        SignalBasis::Transfer {
            num_symbols,
            num_rx,
            num_slots,
        }
    }

    pub fn sampled(noise: CMatrix) -> Self {
        SignalBasis::Sampled { noise }
    }

    pub fn noiseless(num_rx: usize, num_slots: usize) -> Self {
        SignalBasis::Sampled {
            noise: CMatrix::zeros(num_rx, num_slots),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            SignalBasis::Transfer {
                num_symbols,
                num_rx,
                num_slots,
            } => num_symbols + num_rx * num_slots,
            SignalBasis::Sampled { .. } => 1,
        }
    }

    pub fn zero(&self) -> Signal {
        Signal::zeros(self.width())
    }

    /// Unit signal for symbol `i`. Only meaningful in transfer mode; sampled
    /// symbols are built with [`scalar`].
    pub fn symbol(&self, i: usize) -> Signal {
        match self {
            SignalBasis::Transfer { num_symbols, .. } => {
                assert!(i < *num_symbols, "symbol {i} out of range");
                let mut s = self.zero();
                s[i] = Complex64::new(1.0, 0.0);
                s
            }
            SignalBasis::Sampled { .. } => panic!("sampled basis has no symbol lanes"),
        }
    }

    /// Unit signals for every symbol, in symbol-id order.
    pub fn symbols(&self) -> Vec<Signal> {
        match self {
            SignalBasis::Transfer { num_symbols, .. } => {
                (0..*num_symbols).map(|i| self.symbol(i)).collect()
            }
            SignalBasis::Sampled { .. } => Vec::new(),
        }
    }

    pub fn noise(&self, rx: usize, slot: usize) -> Signal {
        match self {
            SignalBasis::Transfer {
                num_symbols,
                num_slots,
                ..
            } => {
                let mut s = self.zero();
                s[num_symbols + rx * num_slots + slot] = Complex64::new(1.0, 0.0);
                s
            }
            SignalBasis::Sampled { noise } => scalar(noise[(rx, slot)]),
        }
    }

    pub fn num_symbols(&self) -> usize {
        match self {
            SignalBasis::Transfer { num_symbols, .. } => *num_symbols,
            SignalBasis::Sampled { .. } => 0,
        }
    }
}

/// Single-lane signal holding `value`.
pub fn scalar(value: Complex64) -> Signal {
    Signal::from_element(1, value)
}

/// Concrete symbol and noise values used to evaluate transfer-mode signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub symbols: Vec<Complex64>,
    /// `num_rx x num_slots`.
    pub noise: CMatrix,
}

impl Realization {
    /// Lane values in transfer-basis order.
    pub fn lane_values(&self) -> CVector {
        let (k, t) = self.noise.shape();
        let mut v = CVector::zeros(self.symbols.len() + k * t);
        for (i, u) in self.symbols.iter().enumerate() {
            v[i] = *u;
        }
        for rx in 0..k {
            for n in 0..t {
                v[self.symbols.len() + rx * t + n] = self.noise[(rx, n)];
            }
        }
        v
    }

    pub fn evaluate(&self, signal: &Signal) -> Complex64 {
        evaluate(signal, &self.lane_values())
    }
}

pub fn evaluate(signal: &Signal, lanes: &CVector) -> Complex64 {
    assert_eq!(signal.len(), lanes.len(), "signal width does not match basis");
    signal.iter().zip(lanes.iter()).map(|(a, b)| a * b).sum()
}

/// Received signals of one slot, before and after the additive noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub clean: Vec<Signal>,
    pub noisy: Vec<Signal>,
}

/// `y(k) = sum_j h(k, j, slot) x(j) (+ noise(k, slot))` for every receiver.
pub fn apply_channel(x: &[Signal], h: &ChannelTensor, slot: usize, basis: &SignalBasis) -> Received {
    assert_eq!(x.len(), h.num_tx(), "one transmit signal per transmitter");
    let clean: Vec<Signal> = (0..h.num_rx())
        .map(|k| {
            x.iter()
                .enumerate()
                .fold(basis.zero(), |acc, (j, xj)| acc + xj * h.get(k, j, slot))
        })
        .collect();
    let noisy = clean
        .iter()
        .enumerate()
        .map(|(k, y)| y + basis.noise(k, slot))
        .collect();
    Received { clean, noisy }
}

/// Per-slot transmit logic of a scheme; one call per transmitter per slot.
pub trait BlockEncoder {
    type Error: From<CausalityViolation>;

    fn transmit(&mut self, view: &mut TxView<'_>) -> Result<Signal, Self::Error>;
}

/// Everything that crossed the channel during one codeblock.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrace {
    /// `x[j][n]`: transmitter `j`, slot `n`.
    pub x: Vec<Vec<Signal>>,
    /// `y[k][n]`: what receiver `k` observed in slot `n` (with noise).
    pub y: Vec<Vec<Signal>>,
    pub log: AccessLog,
}

impl BlockTrace {
    /// Receiver `rx`'s observations stacked as a `num_slots x width` matrix.
    pub fn observations(&self, rx: usize) -> CMatrix {
        let rows = &self.y[rx];
        let width = rows.first().map_or(0, |r| r.len());
        CMatrix::from_fn(rows.len(), width, |n, c| rows[n][c])
    }
}

/// Drives `encoder` through every slot of `h`, feeding each transmitter a
/// fresh [`TxView`] so it can only see what `model` allows.
pub fn run_block<E: BlockEncoder>(
    encoder: &mut E,
    h: &ChannelTensor,
    model: &FeedbackModel,
    basis: &SignalBasis,
) -> Result<BlockTrace, E::Error> {
    let (num_rx, num_tx, num_slots) = (h.num_rx(), h.num_tx(), h.num_slots());
    let mut log = AccessLog::new();
    let mut x: Vec<Vec<Signal>> = vec![Vec::with_capacity(num_slots); num_tx];
    let mut y: Vec<Vec<Signal>> = vec![Vec::with_capacity(num_slots); num_rx];
    for n in 0..num_slots {
        let mut slot_x = Vec::with_capacity(num_tx);
        for j in 0..num_tx {
            let mut view = TxView::new(j, n, model, h, &y, &mut log);
            let s = encoder.transmit(&mut view)?;
            assert_eq!(s.len(), basis.width(), "encoder produced a signal of the wrong width");
            slot_x.push(s);
        }
        let received = apply_channel(&slot_x, h, n, basis);
        for (j, s) in slot_x.into_iter().enumerate() {
            x[j].push(s);
        }
        for (k, s) in received.noisy.into_iter().enumerate() {
            y[k].push(s);
        }
    }
    Ok(BlockTrace { x, y, log })
}

/// Concrete transmitted and received scalars of one codeblock.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    /// `num_tx x num_slots`.
    pub x: CMatrix,
    /// `num_rx x num_slots`, equal to `sum_j h(k, j, n) x(j, n)` computed directly.
    pub y_clean: CMatrix,
    pub y_noisy: CMatrix,
    pub noise_variance: f64,
    /// Amplitude applied to unit-power payloads, i.e. `sqrt(SNR)`.
    pub amplitude: f64,
}

impl SignalRecord {
    /// Evaluates a transfer-mode trace at concrete symbol and noise values.
    pub fn realize(
        trace: &BlockTrace,
        h: &ChannelTensor,
        realization: &Realization,
        noise_variance: f64,
        amplitude: f64,
    ) -> Self {
        let lanes = realization.lane_values();
        let (num_rx, num_tx, num_slots) = (h.num_rx(), h.num_tx(), h.num_slots());
        let x = CMatrix::from_fn(num_tx, num_slots, |j, n| evaluate(&trace.x[j][n], &lanes));
        let y_clean = CMatrix::from_fn(num_rx, num_slots, |k, n| {
            (0..num_tx).map(|j| h.get(k, j, n) * x[(j, n)]).sum()
        });
        let y_noisy = CMatrix::from_fn(num_rx, num_slots, |k, n| {
            y_clean[(k, n)] + realization.noise[(k, n)]
        });
        SignalRecord {
            x,
            y_clean,
            y_noisy,
            noise_variance,
            amplitude,
        }
    }
}
