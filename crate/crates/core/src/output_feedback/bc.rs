//! Two-antenna broadcast channel with delayed CSIT: four symbols in three
//! slots. The antennas belong to a single transmitter and are modelled as
//! transmitters 0 and 1 sharing one encoder.
//!
//! Slots 0 and 1 send user 0's and user 1's pair. Each user overheard a
//! combination of the other's symbols; slot 2 sends the sum of those two
//! overheard combinations from antenna 0, which each user can clean with its
//! own earlier observation.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{run_block, BlockEncoder, BlockTrace, ChannelTensor, FeedbackModel, Signal, SignalBasis, TxView};
use crate::numerics::{solve_square, CMatrix, Tolerance};
use crate::scheme::{resolvability, Certificate, Decoded, ReceiverOutput, RunParams, Scheme, SchemeError};

pub const BC_BLOCK_LEN: usize = 3;

/// Per-antenna amplitude in slots 0 and 1, splitting the power evenly.
fn split_amplitude(params: &RunParams) -> f64 {
    params.amplitude / 2f64.sqrt()
}

/// Antenna-0 gain in slot 2, from the channel states of slots 0 and 1.
pub fn bc_slot2_gain(h: &ChannelTensor, params: &RunParams) -> f64 {
    let a1 = split_amplitude(params);
    let energy: f64 = (0..2).map(|a| h.get(1, a, 0).norm_sqr() + h.get(0, a, 1).norm_sqr()).sum();
    params.amplitude / (a1 * energy.sqrt())
}

/// Receiver `rx` cleans slot 2 with its own observation of the other user's
/// slot and solves for its two symbols. Returns the `2 x W` estimates and
/// the 2x2 system.
pub fn bc_decode(
    rx: usize,
    obs: &CMatrix,
    h: &ChannelTensor,
    params: &RunParams,
    tol: &Tolerance,
) -> Result<(CMatrix, CMatrix), SchemeError> {
    let a1 = split_amplitude(params);
    let g = bc_slot2_gain(h, params);
    let other = 1 - rx;
    // Slot `rx` carries this user's pair; slot `other` carries the other's.
    let direct = obs.rows(rx, 1).into_owned();
    let cleaned = obs.rows(2, 1) - obs.rows(other, 1) * (h.get(rx, 0, 2) * g);
    let a = CMatrix::from_fn(2, 2, |r, ant| {
        if r == 0 {
            h.get(rx, ant, rx) * a1
        } else {
            h.get(rx, 0, 2) * g * h.get(other, ant, rx) * a1
        }
    });
    let mut b = CMatrix::zeros(2, obs.ncols());
    b.row_mut(0).copy_from(&direct);
    b.row_mut(1).copy_from(&cleaned);
    let z = solve_square(&a, &b, tol).map_err(SchemeError::at("broadcast pair solve"))?;
    Ok((z, a))
}

struct BcEncoder<'a> {
    symbols: &'a [Signal],
    params: &'a RunParams,
    slot2: Option<Signal>,
}

impl BlockEncoder for BcEncoder<'_> {
    type Error = SchemeError;

    fn transmit(&mut self, view: &mut TxView<'_>) -> Result<Signal, SchemeError> {
        let (ant, n) = (view.tx(), view.slot());
        let a1 = Complex64::new(split_amplitude(self.params), 0.0);
        if n < 2 {
            return Ok(&self.symbols[n * 2 + ant] * a1);
        }
        let width = self.symbols[0].len();
        if ant == 1 {
            return Ok(Signal::zeros(width));
        }
        if self.slot2.is_none() {
            let past = view.channel_prefix(2)?;
            let g = bc_slot2_gain(&past, self.params);
            let mut overheard = Signal::zeros(width);
            for a in 0..2 {
                overheard += &self.symbols[a] * (past.get(1, a, 0) * a1);
                overheard += &self.symbols[2 + a] * (past.get(0, a, 1) * a1);
            }
            self.slot2 = Some(overheard * Complex64::new(g, 0.0));
        }
        Ok(self.slot2.clone().unwrap())
    }
}

/// Two-antenna broadcast channel, delayed CSIT. Symbol `k * 2 + a` is user
/// `k`'s symbol first sent from antenna `a`.
pub struct BcMat;

impl Scheme for BcMat {
    const NAME: &'static str = "bc_mat";
    const NUM_RX: usize = 2;
    const NUM_TX: usize = 2;
    const BLOCK_LEN: usize = BC_BLOCK_LEN;
    const NUM_SYMBOLS: usize = 4;
    const CSI_SLOTS: usize = 2;

    type Offline = ();

    fn feedback_model() -> FeedbackModel {
        FeedbackModel::delayed_csit()
    }

    fn draw_offline<R: Rng + ?Sized>(_: &mut R) {}

    fn encode(
        h: &ChannelTensor,
        _: &(),
        symbols: &[Signal],
        params: &RunParams,
        basis: &SignalBasis,
    ) -> Result<BlockTrace, SchemeError> {
        assert_eq!(symbols.len(), 4);
        let mut enc = BcEncoder {
            symbols,
            params,
            slot2: None,
        };
        run_block(&mut enc, h, &Self::feedback_model(), basis)
    }

    fn decode(h: &ChannelTensor, _: &(), trace: &BlockTrace, params: &RunParams) -> Result<Decoded, SchemeError> {
        let mut receivers = Vec::new();
        let mut certificate = Certificate::default();
        for rx in 0..2 {
            let (z, a) = bc_decode(rx, &trace.observations(rx), h, params, &params.tol)?;
            let (res, det) = resolvability(&a);
            certificate.resolvability.push(res);
            certificate.determinants.push(det);
            receivers.push(ReceiverOutput {
                rx,
                symbols: vec![rx * 2, rx * 2 + 1],
                estimates: z,
            });
        }
        Ok(Decoded {
            receivers,
            certificate,
        })
    }

    /// Both antennas belong to the same transmitter.
    fn owns_symbol(_: usize, _: usize) -> bool {
        true
    }
}
