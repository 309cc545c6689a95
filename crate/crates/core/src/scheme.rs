//! Common interface implemented by every transmission scheme.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{BlockTrace, CausalityViolation, ChannelTensor, FeedbackModel, Signal, SignalBasis};
use crate::numerics::{CMatrix, NumericsError, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("{stage}: {source}")]
    Numerics {
        stage: &'static str,
        #[source]
        source: NumericsError,
    },
    #[error("{stage}: null vector cannot be normalized")]
    DegenerateNormalization { stage: &'static str },
    #[error("phase-2 coefficients of transmitter {tx} vanish")]
    DegenerateCoefficients { tx: usize },
    #[error(transparent)]
    Causality(#[from] CausalityViolation),
    #[error("receiver {rx}: interference rank {rank}, expected {expected}")]
    InterferenceRank { rx: usize, rank: usize, expected: usize },
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
}

impl SchemeError {
    /// Measure-zero channel or coefficient draws. The trial is discarded and
    /// redrawn; everything else indicates a construction bug.
    pub fn is_degenerate(&self) -> bool {
        match self {
            SchemeError::Numerics { source, .. } => matches!(
                source,
                NumericsError::RankDeficient { .. }
                    | NumericsError::Singular { .. }
                    | NumericsError::Residual { .. }
            ),
            SchemeError::DegenerateNormalization { .. } | SchemeError::DegenerateCoefficients { .. } => true,
            _ => false,
        }
    }

    pub(crate) fn at(stage: &'static str) -> impl FnOnce(NumericsError) -> SchemeError {
        move |source| SchemeError::Numerics { stage, source }
    }
}

/// Link parameters shared by encoder and decoders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    /// Amplitude applied to unit-power payloads, `sqrt(SNR)`.
    pub amplitude: f64,
    pub noise_variance: f64,
    pub tol: Tolerance,
}

impl RunParams {
    pub fn from_snr_db(snr_db: f64, tol: Tolerance) -> Self {
        RunParams {
            amplitude: 10f64.powf(snr_db / 20.0),
            noise_variance: 1.0,
            tol,
        }
    }

    pub fn power(&self) -> f64 {
        self.amplitude * self.amplitude
    }
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams::from_snr_db(0.0, Tolerance::default())
    }
}

/// Linear estimates produced by one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverOutput {
    pub rx: usize,
    /// Symbol ids, one per row of `estimates`.
    pub symbols: Vec<usize>,
    /// One row per decoded symbol, over the same basis as the observations.
    pub estimates: CMatrix,
}

/// Numerical evidence that interference was aligned and desired signals
/// remain resolvable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Certificate {
    /// Per receiver: rank of the interference subspace (aligned schemes only).
    pub interference_ranks: Vec<usize>,
    /// Per receiver: `sigma_min / sigma_max` of the column-normalized
    /// [desired | interference] matrix.
    pub resolvability: Vec<f64>,
    /// Per receiver: determinant of that column-normalized matrix.
    pub determinants: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub receivers: Vec<ReceiverOutput>,
    pub certificate: Certificate,
}

/// A codeblock construction with its dimensions, feedback requirement,
/// offline randomness, encoder and decoders.
pub trait Scheme {
    const NAME: &'static str;
    const NUM_RX: usize;
    const NUM_TX: usize;
    const BLOCK_LEN: usize;
    /// Information symbols delivered per block.
    const NUM_SYMBOLS: usize;
    /// Number of leading slots whose channel states the encoder may read.
    const CSI_SLOTS: usize;

    /// Coefficients generated before communication and shared by all nodes.
    type Offline: Send + Sync;

    fn feedback_model() -> FeedbackModel;

    fn draw_offline<R: Rng + ?Sized>(rng: &mut R) -> Self::Offline;

    /// Runs the transmitters over `h`. `symbols` holds one signal per symbol id.
    fn encode(
        h: &ChannelTensor,
        offline: &Self::Offline,
        symbols: &[Signal],
        params: &RunParams,
        basis: &SignalBasis,
    ) -> Result<BlockTrace, SchemeError>;

    fn decode(
        h: &ChannelTensor,
        offline: &Self::Offline,
        trace: &BlockTrace,
        params: &RunParams,
    ) -> Result<Decoded, SchemeError>;

    /// Whether transmitter `tx` is allowed to hold symbol `symbol`.
    fn owns_symbol(tx: usize, symbol: usize) -> bool;

    /// Whether transmit signals may legitimately mix other transmitters'
    /// symbols (true when outputs are fed back and retransmitted).
    fn relays_outputs() -> bool {
        false
    }
}

/// Scales each column to unit norm (zero columns are left untouched).
pub(crate) fn normalize_columns(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= Complex64::new(n, 0.0);
        }
    }
    out
}

/// Resolvability and determinant of the column-normalized square matrix `m`.
pub(crate) fn resolvability(m: &CMatrix) -> (f64, Complex64) {
    let normalized = normalize_columns(m);
    (
        crate::numerics::inverse_condition(&normalized),
        normalized.determinant(),
    )
}

/// Scales `coeffs` to unit total power.
pub(crate) fn unit_power<const N: usize>(mut coeffs: [Complex64; N]) -> [Complex64; N] {
    let p: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if p > 0.0 {
        coeffs.iter_mut().for_each(|c| *c /= p);
    }
    coeffs
}
