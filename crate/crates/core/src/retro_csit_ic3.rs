//! Retrospective interference alignment on the three-user interference
//! channel with delayed CSIT: nine symbols over eight slots.
//!
//! Slots 0..5 carry random combinations of each user's three symbols. For
//! every receiver, the six interfering symbols then occupy a 5-dimensional
//! space and admit a null combination `alpha`. In slots 5..8 each transmitter
//! repeats a single effective symbol whose coefficients are orthogonal to the
//! two `alpha` sub-triples that involve it, which extends both null
//! combinations to all eight slots: one interference dimension collapses at
//! every receiver, leaving three clean dimensions for the desired symbols.
//!
//! Indexing is zero-based: `u(k, i)` is symbol `i` of user `k`.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{run_block, BlockEncoder, BlockTrace, ChannelTensor, FeedbackModel, Signal, SignalBasis, TxView};
use crate::numerics::{
    column_space_basis, cross3, left_null_basis, null_vector, numerical_rank, sample_complex_gaussian, solve_square,
    CMatrix, Tolerance,
};
use crate::scheme::{
    normalize_columns, resolvability, unit_power, Certificate, Decoded, ReceiverOutput, RunParams, Scheme,
    SchemeError,
};

pub const NUM_USERS: usize = 3;
pub const SYMBOLS_PER_USER: usize = 3;
pub const BLOCK_LEN: usize = 8;
pub const PHASE1_SLOTS: usize = 5;
pub const NUM_SYMBOLS: usize = NUM_USERS * SYMBOLS_PER_USER;
/// Dimension occupied by the six interfering symbols once aligned.
pub const INTERFERENCE_DIM: usize = 5;

pub fn symbol_id(user: usize, i: usize) -> usize {
    user * SYMBOLS_PER_USER + i
}

/// The two users interfering at receiver `rx`, in increasing order.
pub fn interferers(rx: usize) -> [usize; 2] {
    match rx {
        0 => [1, 2],
        1 => [0, 2],
        2 => [0, 1],
        _ => panic!("receiver {rx} out of range"),
    }
}

/// `u[k][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ICMessageSet {
    pub u: [[Signal; SYMBOLS_PER_USER]; NUM_USERS],
}

impl ICMessageSet {
    pub fn from_signals(symbols: &[Signal]) -> Self {
        assert_eq!(symbols.len(), NUM_SYMBOLS);
        ICMessageSet {
            u: std::array::from_fn(|k| std::array::from_fn(|i| symbols[symbol_id(k, i)].clone())),
        }
    }

    pub fn from_values(values: &[Complex64; NUM_SYMBOLS]) -> Self {
        let signals: Vec<Signal> = values.iter().map(|&v| crate::channel::scalar(v)).collect();
        Self::from_signals(&signals)
    }

    fn width(&self) -> usize {
        self.u[0][0].len()
    }
}

/// Phase-1 coefficients `v[k][i][slot]`, drawn offline.
#[derive(Debug, Clone, PartialEq)]
pub struct ICPhase1Precoders {
    pub v: [[[Complex64; PHASE1_SLOTS]; SYMBOLS_PER_USER]; NUM_USERS],
}

impl ICPhase1Precoders {
    /// i.i.d. CN(0,1) coefficients scaled to unit transmit power per slot.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let raw = sample_complex_gaussian(rng, NUM_SYMBOLS * PHASE1_SLOTS);
        let mut v = [[[Complex64::new(0.0, 0.0); PHASE1_SLOTS]; SYMBOLS_PER_USER]; NUM_USERS];
        for k in 0..NUM_USERS {
            for n in 0..PHASE1_SLOTS {
                let col = unit_power(std::array::from_fn::<_, SYMBOLS_PER_USER, _>(|i| {
                    raw[(k * SYMBOLS_PER_USER + i) * PHASE1_SLOTS + n]
                }));
                for i in 0..SYMBOLS_PER_USER {
                    v[k][i][n] = col[i];
                }
            }
        }
        ICPhase1Precoders { v }
    }
}

/// Null combinations `alpha[k]` of the six interfering symbols at receiver
/// `k`, ordered as in [`interferers`]. Unit norm with canonical phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVectors {
    pub alpha: [[Complex64; 6]; NUM_USERS],
}

impl AlphaVectors {
    /// The sub-triple of `alpha[rx]` that multiplies user `user`'s symbols.
    pub fn sub_triple(&self, rx: usize, user: usize) -> [Complex64; 3] {
        let pos = interferers(rx)
            .iter()
            .position(|&j| j == user)
            .expect("user does not interfere at this receiver");
        std::array::from_fn(|i| self.alpha[rx][pos * 3 + i])
    }

    /// The two sub-triples that constrain user `user`'s Phase-2 coefficients,
    /// taken from the other receivers in increasing order.
    pub fn constraints(&self, user: usize) -> [[Complex64; 3]; 2] {
        let [a, b] = interferers(user);
        [self.sub_triple(a, user), self.sub_triple(b, user)]
    }
}

/// Receiver `rx`'s 5x6 Phase-1 interference matrix.
pub fn interference_matrix(rx: usize, h: &ChannelTensor, pre: &ICPhase1Precoders) -> CMatrix {
    assert!(h.num_slots() >= PHASE1_SLOTS);
    let others = interferers(rx);
    CMatrix::from_fn(PHASE1_SLOTS, 6, |n, col| {
        let j = others[col / 3];
        h.get(rx, j, n) * pre.v[j][col % 3][n]
    })
}

/// Solves for the three null combinations from slots 0..5 of `h`.
pub fn compute_alpha_vectors(
    h: &ChannelTensor,
    pre: &ICPhase1Precoders,
    tol: &Tolerance,
) -> Result<AlphaVectors, SchemeError> {
    let mut alpha = [[Complex64::new(0.0, 0.0); 6]; NUM_USERS];
    for (rx, a) in alpha.iter_mut().enumerate() {
        let v = null_vector(&interference_matrix(rx, h, pre), tol).map_err(SchemeError::at("alpha null vector"))?;
        a.copy_from_slice(v.as_slice());
    }
    Ok(AlphaVectors { alpha })
}

/// Phase-2 coefficients of every user and the effective symbols they define.
#[derive(Debug, Clone, PartialEq)]
pub struct ICPhase2Symbols {
    /// `coeffs[k]`: weights of `u(k, 0..3)` in user `k`'s effective symbol.
    pub coeffs: [[Complex64; 3]; NUM_USERS],
    pub s: [Signal; NUM_USERS],
}

/// User `user`'s Phase-2 coefficient triple: the bilinear cross product of
/// its two constraint sub-triples.
pub fn phase2_coefficients(user: usize, alpha: &AlphaVectors, tol: &Tolerance) -> Result<[Complex64; 3], SchemeError> {
    let [a, b] = alpha.constraints(user);
    let c = cross3(&a, &b);
    let norm = |v: &[Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm(&c) <= tol.rank_rel_tol * norm(&a) * norm(&b) {
        return Err(SchemeError::DegenerateCoefficients { tx: user });
    }
    Ok(c)
}

/// Effective symbol of `user` from its own symbols and the shared `alpha`.
pub fn effective_symbol(
    user: usize,
    msgs: &ICMessageSet,
    alpha: &AlphaVectors,
    tol: &Tolerance,
) -> Result<([Complex64; 3], Signal), SchemeError> {
    let c = phase2_coefficients(user, alpha, tol)?;
    let mut s = Signal::zeros(msgs.width());
    for i in 0..3 {
        s += &msgs.u[user][i] * c[i];
    }
    Ok((c, s))
}

pub fn form_phase2_symbols(
    msgs: &ICMessageSet,
    alpha: &AlphaVectors,
    tol: &Tolerance,
) -> Result<ICPhase2Symbols, SchemeError> {
    let mut coeffs = [[Complex64::new(0.0, 0.0); 3]; NUM_USERS];
    let mut s: [Signal; NUM_USERS] = std::array::from_fn(|_| Signal::zeros(msgs.width()));
    for k in 0..NUM_USERS {
        let (c, sk) = effective_symbol(k, msgs, alpha, tol)?;
        coeffs[k] = c;
        s[k] = sk;
    }
    Ok(ICPhase2Symbols { coeffs, s })
}

pub fn ic_phase1_transmit(
    user: usize,
    slot: usize,
    msgs: &ICMessageSet,
    pre: &ICPhase1Precoders,
    amplitude: f64,
) -> Signal {
    let mut x = Signal::zeros(msgs.width());
    for i in 0..SYMBOLS_PER_USER {
        x += &msgs.u[user][i] * pre.v[user][i][slot];
    }
    x * Complex64::new(amplitude, 0.0)
}

/// Unit-power scale of an effective symbol with coefficients `c`.
pub fn phase2_gain(c: &[Complex64; 3]) -> f64 {
    1.0 / c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Phase-2 transmission: the same scaled effective symbol in every slot.
pub fn ic_phase2_transmit(s: &Signal, gain: f64, amplitude: f64) -> Signal {
    s * Complex64::new(gain * amplitude, 0.0)
}

/// Effective 8-slot column of symbol `u(user, i)` at receiver `rx`.
fn symbol_column(
    rx: usize,
    user: usize,
    i: usize,
    h: &ChannelTensor,
    pre: &ICPhase1Precoders,
    coeffs: &[[Complex64; 3]; NUM_USERS],
    amplitude: f64,
) -> Vec<Complex64> {
    let gain = phase2_gain(&coeffs[user]);
    let c = coeffs[user][i];
    (0..BLOCK_LEN).map(move |n| {
        let w = if n < PHASE1_SLOTS { pre.v[user][i][n] } else { c * gain };
        h.get(rx, user, n) * w * amplitude
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ICDecoded {
    /// Rows: `u(rx, 0), u(rx, 1), u(rx, 2)`.
    pub estimates: CMatrix,
    pub interference_rank: usize,
    pub resolvability: f64,
    pub det: Complex64,
}

/// Receiver `rx` nulls the five interference dimensions and solves for its
/// three symbols. `obs` is `8 x W`.
#[allow(clippy::too_many_arguments)]
pub fn ic_decode(
    rx: usize,
    obs: &CMatrix,
    h: &ChannelTensor,
    pre: &ICPhase1Precoders,
    coeffs: &[[Complex64; 3]; NUM_USERS],
    amplitude: f64,
    tol: &Tolerance,
) -> Result<ICDecoded, SchemeError> {
    assert_eq!(obs.nrows(), BLOCK_LEN);
    let others = interferers(rx);
    let interference = CMatrix::from_iterator(
        BLOCK_LEN,
        6,
        (0..6).flat_map(|col| symbol_column(rx, others[col / 3], col % 3, h, pre, coeffs, amplitude)),
    );
    let desired = CMatrix::from_iterator(
        BLOCK_LEN,
        3,
        (0..3).flat_map(|i| symbol_column(rx, rx, i, h, pre, coeffs, amplitude)),
    );

    let interference_rank = numerical_rank(&interference, tol);
    if interference_rank != INTERFERENCE_DIM {
        return Err(SchemeError::InterferenceRank {
            rx,
            rank: interference_rank,
            expected: INTERFERENCE_DIM,
        });
    }
    let null = left_null_basis(&interference, tol).map_err(SchemeError::at("interference null space"))?;
    let projected = null.adjoint() * &desired;
    let estimates =
        solve_square(&projected, &(null.adjoint() * obs), tol).map_err(SchemeError::at("projected desired solve"))?;

    let span = column_space_basis(&interference, tol).map_err(SchemeError::at("interference span"))?;
    let mut full = CMatrix::zeros(BLOCK_LEN, BLOCK_LEN);
    full.columns_mut(0, 3).copy_from(&normalize_columns(&desired));
    full.columns_mut(3, INTERFERENCE_DIM).copy_from(&span);
    let (res, det) = resolvability(&full);
    Ok(ICDecoded {
        estimates,
        interference_rank,
        resolvability: res,
        det,
    })
}

struct ICEncoder<'a> {
    msgs: ICMessageSet,
    pre: &'a ICPhase1Precoders,
    amplitude: f64,
    tol: Tolerance,
    /// Each transmitter forms its own effective symbol once slots 0..5 are past.
    phase2: [Option<Signal>; NUM_USERS],
}

impl BlockEncoder for ICEncoder<'_> {
    type Error = SchemeError;

    fn transmit(&mut self, view: &mut TxView<'_>) -> Result<Signal, SchemeError> {
        let (k, n) = (view.tx(), view.slot());
        if n < PHASE1_SLOTS {
            return Ok(ic_phase1_transmit(k, n, &self.msgs, self.pre, self.amplitude));
        }
        if self.phase2[k].is_none() {
            let past = view.channel_prefix(PHASE1_SLOTS)?;
            let alpha = compute_alpha_vectors(&past, self.pre, &self.tol)?;
            let (c, s) = effective_symbol(k, &self.msgs, &alpha, &self.tol)?;
            self.phase2[k] = Some(ic_phase2_transmit(&s, phase2_gain(&c), self.amplitude));
        }
        Ok(self.phase2[k].clone().unwrap())
    }
}

/// Three-user interference channel, delayed CSIT, 9 symbols in 8 slots.
pub struct Ic3RetroCsit;

impl Scheme for Ic3RetroCsit {
    const NAME: &'static str = "ic3_retro_csit";
    const NUM_RX: usize = NUM_USERS;
    const NUM_TX: usize = NUM_USERS;
    const BLOCK_LEN: usize = BLOCK_LEN;
    const NUM_SYMBOLS: usize = NUM_SYMBOLS;
    const CSI_SLOTS: usize = PHASE1_SLOTS;

    type Offline = ICPhase1Precoders;

    fn feedback_model() -> FeedbackModel {
        FeedbackModel::delayed_csit()
    }

    fn draw_offline<R: Rng + ?Sized>(rng: &mut R) -> ICPhase1Precoders {
        ICPhase1Precoders::draw(rng)
    }

    fn encode(
        h: &ChannelTensor,
        pre: &ICPhase1Precoders,
        symbols: &[Signal],
        params: &RunParams,
        basis: &SignalBasis,
    ) -> Result<BlockTrace, SchemeError> {
        let mut enc = ICEncoder {
            msgs: ICMessageSet::from_signals(symbols),
            pre,
            amplitude: params.amplitude,
            tol: params.tol,
            phase2: [None, None, None],
        };
        run_block(&mut enc, h, &Self::feedback_model(), basis)
    }

    fn decode(
        h: &ChannelTensor,
        pre: &ICPhase1Precoders,
        trace: &BlockTrace,
        params: &RunParams,
    ) -> Result<Decoded, SchemeError> {
        let alpha = compute_alpha_vectors(h, pre, &params.tol)?;
        let mut coeffs = [[Complex64::new(0.0, 0.0); 3]; NUM_USERS];
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = phase2_coefficients(k, &alpha, &params.tol)?;
        }
        let mut receivers = Vec::with_capacity(NUM_USERS);
        let mut certificate = Certificate::default();
        for rx in 0..NUM_USERS {
            let d = ic_decode(rx, &trace.observations(rx), h, pre, &coeffs, params.amplitude, &params.tol)?;
            receivers.push(ReceiverOutput {
                rx,
                symbols: (0..3).map(|i| symbol_id(rx, i)).collect(),
                estimates: d.estimates,
            });
            certificate.interference_ranks.push(d.interference_rank);
            certificate.resolvability.push(d.resolvability);
            certificate.determinants.push(d.det);
        }
        Ok(Decoded {
            receivers,
            certificate,
        })
    }

    fn owns_symbol(tx: usize, symbol: usize) -> bool {
        symbol / SYMBOLS_PER_USER == tx
    }
}
