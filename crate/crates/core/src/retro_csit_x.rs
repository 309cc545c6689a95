//! Retrospective interference alignment on the two-user X channel with
//! delayed CSIT: eight symbols over seven slots.
//!
//! Slots 0..3 carry random, channel-independent combinations of each
//! transmitter's four symbols. Once those slots' channel states are known,
//! each transmitter folds its two symbols per receiver into one layer-2
//! variable `s = u_a - gamma * u_b`, and slots 3..7 carry random combinations
//! of the layer-2 variables. The `gamma` constants are chosen so that, after
//! every receiver resolves all four layer-2 variables, the two symbols meant
//! for the other receiver land on a single direction over slots 0..3.
//!
//! Indexing is zero-based: `u(rx, tx, i)` is symbol `i` of the message from
//! transmitter `tx` to receiver `rx`.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{run_block, BlockEncoder, BlockTrace, ChannelTensor, FeedbackModel, Signal, SignalBasis, TxView};
use crate::numerics::{null_vector, numerical_rank, sample_complex_gaussian, solve_square, CMatrix, Tolerance};
use crate::scheme::{resolvability, unit_power, Certificate, Decoded, ReceiverOutput, RunParams, Scheme, SchemeError};

pub const BLOCK_LEN: usize = 7;
pub const PHASE1_SLOTS: usize = 3;
pub const PHASE2_SLOTS: usize = BLOCK_LEN - PHASE1_SLOTS;
pub const NUM_SYMBOLS: usize = 8;

pub fn symbol_id(rx: usize, tx: usize, i: usize) -> usize {
    (rx * 2 + tx) * 2 + i
}

/// The eight information symbols, `u[rx][tx][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct XMessageSet {
    pub u: [[[Signal; 2]; 2]; 2],
}

impl XMessageSet {
    /// Builds the set from signals listed in [`symbol_id`] order.
    pub fn from_signals(symbols: &[Signal]) -> Self {
        assert_eq!(symbols.len(), NUM_SYMBOLS);
        let s = |rx, tx, i| symbols[symbol_id(rx, tx, i)].clone();
        XMessageSet {
            u: [
                [[s(0, 0, 0), s(0, 0, 1)], [s(0, 1, 0), s(0, 1, 1)]],
                [[s(1, 0, 0), s(1, 0, 1)], [s(1, 1, 0), s(1, 1, 1)]],
            ],
        }
    }

    pub fn from_values(values: &[Complex64; NUM_SYMBOLS]) -> Self {
        let signals: Vec<Signal> = values.iter().map(|&v| crate::channel::scalar(v)).collect();
        Self::from_signals(&signals)
    }

    fn width(&self) -> usize {
        self.u[0][0][0].len()
    }
}

/// Phase-1 combining coefficients `v[rx][tx][i][slot]`, drawn offline.
#[derive(Debug, Clone, PartialEq)]
pub struct XPhase1Precoders {
    pub v: [[[[Complex64; PHASE1_SLOTS]; 2]; 2]; 2],
}

impl XPhase1Precoders {
    /// i.i.d. CN(0,1) coefficients, scaled so each transmitter sends unit
    /// power in every slot.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let raw = sample_complex_gaussian(rng, 2 * 2 * 2 * PHASE1_SLOTS);
        let mut v = [[[[Complex64::new(0.0, 0.0); PHASE1_SLOTS]; 2]; 2]; 2];
        let mut it = raw.into_iter();
        for rx in 0..2 {
            for tx in 0..2 {
                for i in 0..2 {
                    for n in 0..PHASE1_SLOTS {
                        v[rx][tx][i][n] = it.next().unwrap();
                    }
                }
            }
        }
        for tx in 0..2 {
            for n in 0..PHASE1_SLOTS {
                let scaled = unit_power([v[0][tx][0][n], v[0][tx][1][n], v[1][tx][0][n], v[1][tx][1][n]]);
                v[0][tx][0][n] = scaled[0];
                v[0][tx][1][n] = scaled[1];
                v[1][tx][0][n] = scaled[2];
                v[1][tx][1][n] = scaled[3];
            }
        }
        XPhase1Precoders { v }
    }
}

/// Phase-2 combining coefficients `c[tx][slot - 3][m]` for layer-2 variable
/// `s(tx, m)`, drawn offline.
#[derive(Debug, Clone, PartialEq)]
pub struct XPhase2Coeffs {
    pub c: [[[Complex64; 2]; PHASE2_SLOTS]; 2],
}

impl XPhase2Coeffs {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let raw = sample_complex_gaussian(rng, 2 * PHASE2_SLOTS * 2);
        let mut c = [[[Complex64::new(0.0, 0.0); 2]; PHASE2_SLOTS]; 2];
        for (k, z) in raw.into_iter().enumerate() {
            c[k / (2 * PHASE2_SLOTS)][(k / 2) % PHASE2_SLOTS][k % 2] = z;
        }
        XPhase2Coeffs { c }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XOffline {
    pub precoders: XPhase1Precoders,
    pub phase2: XPhase2Coeffs,
}

/// Alignment constants. `gamma[tx][m]` defines `s(tx, m) = u(m, tx, 0) -
/// gamma[tx][m] * u(m, tx, 1)`; `beta` and `delta` are the alignment ratios
/// at receivers 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XAlignmentConstants {
    pub gamma: [[Complex64; 2]; 2],
    pub beta: Complex64,
    pub delta: Complex64,
}

impl XAlignmentConstants {
    /// The vector `(gamma[0][m], 1, -r * gamma[1][m], -r)` that the
    /// interference matrix of receiver `1 - m` must annihilate, where `r` is
    /// `beta` for `m = 1` and `delta` for `m = 0`.
    pub fn alignment_vector(&self, m: usize) -> [Complex64; 4] {
        let r = if m == 1 { self.beta } else { self.delta };
        let one = Complex64::new(1.0, 0.0);
        [self.gamma[0][m], one, -r * self.gamma[1][m], -r]
    }
}

/// Receiver `rx`'s 3x4 matrix of the effective Phase-1 directions of the
/// first-index and second-index symbols it does not want:
/// `[h(rx,0) v(m,0,0), h(rx,0) v(m,0,1), h(rx,1) v(m,1,0), h(rx,1) v(m,1,1)]`
/// with `m = 1 - rx`.
pub fn interference_matrix(rx: usize, h: &ChannelTensor, pre: &XPhase1Precoders) -> CMatrix {
    assert!(h.num_slots() >= PHASE1_SLOTS);
    let m = 1 - rx;
    CMatrix::from_fn(PHASE1_SLOTS, 4, |n, col| {
        let (tx, i) = (col / 2, col % 2);
        h.get(rx, tx, n) * pre.v[m][tx][i][n]
    })
}

/// Solves for the alignment constants from slots 0..3 of `h`.
pub fn compute_alignment_constants(
    h: &ChannelTensor,
    pre: &XPhase1Precoders,
    tol: &Tolerance,
) -> Result<XAlignmentConstants, SchemeError> {
    let mut gamma = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut ratio = [Complex64::new(0.0, 0.0); 2];
    for rx in 0..2 {
        let a = interference_matrix(rx, h, pre);
        let v = null_vector(&a, tol).map_err(SchemeError::at("alignment null vector"))?;
        let cutoff = tol.rank_rel_tol * v.norm();
        if v[1].norm() < cutoff || v[3].norm() < cutoff {
            return Err(SchemeError::DegenerateNormalization {
                stage: "alignment constants",
            });
        }
        let m = 1 - rx;
        gamma[0][m] = v[0] / v[1];
        ratio[rx] = -v[3] / v[1];
        gamma[1][m] = v[2] / v[3];
    }
    Ok(XAlignmentConstants {
        gamma,
        beta: ratio[0],
        delta: ratio[1],
    })
}

/// Layer-2 variables `s[tx][m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct XLayer2Symbols {
    pub s: [[Signal; 2]; 2],
}

impl XLayer2Symbols {
    /// Transmitter `tx`'s two layer-2 variables; uses only its own symbols.
    pub fn for_transmitter(tx: usize, msgs: &XMessageSet, c: &XAlignmentConstants) -> [Signal; 2] {
        [0, 1].map(|m| &msgs.u[m][tx][0] - &msgs.u[m][tx][1] * c.gamma[tx][m])
    }

    pub fn form(msgs: &XMessageSet, c: &XAlignmentConstants) -> Self {
        XLayer2Symbols {
            s: [
                Self::for_transmitter(0, msgs, c),
                Self::for_transmitter(1, msgs, c),
            ],
        }
    }
}

/// Phase-1 transmission of `tx` in slot `slot < 3`.
pub fn x_phase1_transmit(
    tx: usize,
    slot: usize,
    msgs: &XMessageSet,
    pre: &XPhase1Precoders,
    amplitude: f64,
) -> Signal {
    let mut x = Signal::zeros(msgs.width());
    for rx in 0..2 {
        for i in 0..2 {
            x += &msgs.u[rx][tx][i] * pre.v[rx][tx][i][slot];
        }
    }
    x * Complex64::new(amplitude, 0.0)
}

/// Scale that gives transmitter `tx` unit power in Phase-2 slot `slot`.
pub fn phase2_gain(tx: usize, slot: usize, coeffs: &XPhase2Coeffs, c: &XAlignmentConstants) -> f64 {
    let p: f64 = (0..2)
        .map(|m| coeffs.c[tx][slot - PHASE1_SLOTS][m].norm_sqr() * (1.0 + c.gamma[tx][m].norm_sqr()))
        .sum();
    1.0 / p.sqrt()
}

/// Phase-2 transmission of `tx` in slot `3 <= slot < 7`.
pub fn x_phase2_transmit(
    tx: usize,
    slot: usize,
    s: &[Signal; 2],
    coeffs: &XPhase2Coeffs,
    gain: f64,
    amplitude: f64,
) -> Signal {
    let c = coeffs.c[tx][slot - PHASE1_SLOTS];
    (&s[0] * c[0] + &s[1] * c[1]) * Complex64::new(gain * amplitude, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct XDecoded {
    /// Rows: `u(rx,0,0), u(rx,0,1), u(rx,1,0), u(rx,1,1)`.
    pub estimates: CMatrix,
    pub layer2: CMatrix,
    /// Rank of the two unwanted directions over slots 0..3 (1 when aligned).
    pub interference_rank: usize,
    pub resolvability: f64,
    pub det_m: Complex64,
}

/// Effective direction of `u(m, tx, 1)` at receiver `rx` over slots 0..3
/// once the layer-2 variables have been substituted.
fn substituted_direction(
    rx: usize,
    m: usize,
    tx: usize,
    h: &ChannelTensor,
    pre: &XPhase1Precoders,
    c: &XAlignmentConstants,
    amplitude: f64,
) -> Vec<Complex64> {
    (0..PHASE1_SLOTS)
        .map(|n| {
            h.get(rx, tx, n)
                * (pre.v[m][tx][0][n] * c.gamma[tx][m] + pre.v[m][tx][1][n])
                * amplitude
        })
        .collect()
}

/// Decodes receiver `rx`'s four symbols from its seven observations.
///
/// `obs` is `7 x W`; every column is decoded independently, so transfer rows
/// and sampled values go through the same arithmetic.
#[allow(clippy::too_many_arguments)]
pub fn x_decode(
    rx: usize,
    obs: &CMatrix,
    h: &ChannelTensor,
    offline: &XOffline,
    c: &XAlignmentConstants,
    amplitude: f64,
    tol: &Tolerance,
) -> Result<XDecoded, SchemeError> {
    assert_eq!(obs.nrows(), BLOCK_LEN);
    let pre = &offline.precoders;

    // Phase 2: four generic equations in s(0,0), s(0,1), s(1,0), s(1,1).
    let a = CMatrix::from_fn(PHASE2_SLOTS, 4, |r, col| {
        let n = PHASE1_SLOTS + r;
        let (tx, m) = (col / 2, col % 2);
        let g = phase2_gain(tx, n, &offline.phase2, c);
        h.get(rx, tx, n) * offline.phase2.c[tx][r][m] * (g * amplitude)
    });
    let y2 = obs.rows(PHASE1_SLOTS, PHASE2_SLOTS).into_owned();
    let s_hat = solve_square(&a, &y2, tol).map_err(SchemeError::at("layer-2 solve"))?;

    // Strip the layer-2 contributions from the Phase-1 observations.
    let mut residual = obs.rows(0, PHASE1_SLOTS).into_owned();
    for n in 0..PHASE1_SLOTS {
        for tx in 0..2 {
            for m in 0..2 {
                let coef = h.get(rx, tx, n) * pre.v[m][tx][0][n] * amplitude;
                let s_row = s_hat.row(tx * 2 + m);
                let mut row = residual.row_mut(n);
                row -= s_row * coef;
            }
        }
    }

    let other = 1 - rx;
    let d = |m, tx| substituted_direction(rx, m, tx, h, pre, c, amplitude);
    let (want0, want1) = (d(rx, 0), d(rx, 1));
    let (int0, int1) = (d(other, 0), d(other, 1));
    let interference = CMatrix::from_fn(PHASE1_SLOTS, 2, |n, col| if col == 0 { int0[n] } else { int1[n] });
    let interference_rank = numerical_rank(&interference, tol);
    if interference_rank != 1 {
        return Err(SchemeError::InterferenceRank {
            rx,
            rank: interference_rank,
            expected: 1,
        });
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let aligned = if norm(&int0) >= norm(&int1) { &int0 } else { &int1 };
    let m_mat = CMatrix::from_fn(PHASE1_SLOTS, 3, |n, col| match col {
        0 => want0[n],
        1 => want1[n],
        _ => aligned[n],
    });
    let z = solve_square(&m_mat, &residual, tol).map_err(SchemeError::at("desired-vs-aligned solve"))?;
    let (res, det_m) = resolvability(&m_mat);

    let width = obs.ncols();
    let mut estimates = CMatrix::zeros(4, width);
    for tx in 0..2 {
        let second = z.row(tx).into_owned();
        let first = s_hat.row(tx * 2 + rx) + &second * c.gamma[tx][rx];
        estimates.row_mut(tx * 2).copy_from(&first);
        estimates.row_mut(tx * 2 + 1).copy_from(&second);
    }
    Ok(XDecoded {
        estimates,
        layer2: s_hat,
        interference_rank,
        resolvability: res,
        det_m,
    })
}

struct XEncoder<'a> {
    msgs: XMessageSet,
    offline: &'a XOffline,
    amplitude: f64,
    tol: Tolerance,
    /// Each transmitter derives its own copy once slots 0..3 are past.
    constants: [Option<XAlignmentConstants>; 2],
}

impl BlockEncoder for XEncoder<'_> {
    type Error = SchemeError;

    fn transmit(&mut self, view: &mut TxView<'_>) -> Result<Signal, SchemeError> {
        let (tx, n) = (view.tx(), view.slot());
        if n < PHASE1_SLOTS {
            return Ok(x_phase1_transmit(tx, n, &self.msgs, &self.offline.precoders, self.amplitude));
        }
        let c = match self.constants[tx] {
            Some(c) => c,
            None => {
                let past = view.channel_prefix(PHASE1_SLOTS)?;
                let c = compute_alignment_constants(&past, &self.offline.precoders, &self.tol)?;
                self.constants[tx] = Some(c);
                c
            }
        };
        let s = XLayer2Symbols::for_transmitter(tx, &self.msgs, &c);
        let gain = phase2_gain(tx, n, &self.offline.phase2, &c);
        Ok(x_phase2_transmit(tx, n, &s, &self.offline.phase2, gain, self.amplitude))
    }
}

/// Two-user X channel, delayed CSIT, 8 symbols in 7 slots.
pub struct XRetroCsit;

impl Scheme for XRetroCsit {
    const NAME: &'static str = "x_retro_csit";
    const NUM_RX: usize = 2;
    const NUM_TX: usize = 2;
    const BLOCK_LEN: usize = BLOCK_LEN;
    const NUM_SYMBOLS: usize = NUM_SYMBOLS;
    const CSI_SLOTS: usize = PHASE1_SLOTS;

    type Offline = XOffline;

    fn feedback_model() -> FeedbackModel {
        FeedbackModel::delayed_csit()
    }

    fn draw_offline<R: Rng + ?Sized>(rng: &mut R) -> XOffline {
        let precoders = XPhase1Precoders::draw(rng);
        let phase2 = XPhase2Coeffs::draw(rng);
        XOffline { precoders, phase2 }
    }

    fn encode(
        h: &ChannelTensor,
        offline: &XOffline,
        symbols: &[Signal],
        params: &RunParams,
        basis: &SignalBasis,
    ) -> Result<BlockTrace, SchemeError> {
        let mut enc = XEncoder {
            msgs: XMessageSet::from_signals(symbols),
            offline,
            amplitude: params.amplitude,
            tol: params.tol,
            constants: [None, None],
        };
        run_block(&mut enc, h, &Self::feedback_model(), basis)
    }

    fn decode(
        h: &ChannelTensor,
        offline: &XOffline,
        trace: &BlockTrace,
        params: &RunParams,
    ) -> Result<Decoded, SchemeError> {
        let c = compute_alignment_constants(h, &offline.precoders, &params.tol)?;
        let mut receivers = Vec::with_capacity(2);
        let mut certificate = Certificate::default();
        for rx in 0..2 {
            let d = x_decode(rx, &trace.observations(rx), h, offline, &c, params.amplitude, &params.tol)?;
            receivers.push(ReceiverOutput {
                rx,
                symbols: vec![
                    symbol_id(rx, 0, 0),
                    symbol_id(rx, 0, 1),
                    symbol_id(rx, 1, 0),
                    symbol_id(rx, 1, 1),
                ],
                estimates: d.estimates,
            });
            certificate.interference_ranks.push(d.interference_rank);
            certificate.resolvability.push(d.resolvability);
            certificate.determinants.push(d.det_m);
        }
        Ok(Decoded {
            receivers,
            certificate,
        })
    }

    fn owns_symbol(tx: usize, symbol: usize) -> bool {
        (symbol / 2) % 2 == tx
    }
}
