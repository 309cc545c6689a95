//! Schemes driven by delayed output feedback: transmitters retransmit
//! previously received signals, and receivers peel them off with
//! cancellation chains.
//!
//! A scheme is described declaratively by a [`SlotSchedule`] (who sends what
//! in each slot) and one [`CancellationPlan`] per receiver. Both are checked
//! for legality before use.

mod bc;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{run_block, BlockEncoder, BlockTrace, ChannelTensor, FeedbackModel, Signal, SignalBasis, TxView};
use crate::numerics::{solve_square, CMatrix};
use crate::scheme::{resolvability, Certificate, Decoded, ReceiverOutput, RunParams, Scheme, SchemeError};

pub use bc::{bc_decode, bc_slot2_gain, BcMat, BC_BLOCK_LEN};

/// Receiver `rx`'s observation in slot `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutputRef {
    pub rx: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Symbol(usize),
    Output(OutputRef),
}

/// `slots[n]` lists `(transmitter, payload)`; absent transmitters are silent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSchedule {
    pub num_tx: usize,
    pub num_rx: usize,
    pub slots: Vec<Vec<(usize, Payload)>>,
}

impl SlotSchedule {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn payload(&self, tx: usize, slot: usize) -> Option<Payload> {
        self.slots[slot].iter().find(|(j, _)| *j == tx).map(|(_, p)| *p)
    }

    pub fn active(&self, slot: usize) -> usize {
        self.slots[slot].len()
    }

    /// Transmitter and slot that carry symbol `id`, if it is sent directly.
    fn symbol_origin(&self, id: usize) -> Option<(usize, usize)> {
        self.slots.iter().enumerate().find_map(|(n, row)| {
            row.iter()
                .find(|(_, p)| *p == Payload::Symbol(id))
                .map(|(j, _)| (*j, n))
        })
    }

    fn carries_symbols_only(&self, slot: usize) -> bool {
        self.slots[slot].iter().all(|(_, p)| matches!(p, Payload::Symbol(_)))
    }

    /// Every retransmitted output must be past and fed back to its sender.
    pub fn validate(&self, model: &FeedbackModel) -> Result<(), SchemeError> {
        for (n, row) in self.slots.iter().enumerate() {
            let mut seen = vec![false; self.num_tx];
            for &(j, p) in row {
                if j >= self.num_tx || std::mem::replace(&mut seen[j], true) {
                    return Err(SchemeError::Schedule(format!("slot {n}: bad or repeated transmitter {j}")));
                }
                if let Payload::Output(o) = p {
                    if o.rx >= self.num_rx || !model.is_past(o.slot, n) || !model.exposes_output(o.rx, j) {
                        return Err(SchemeError::Schedule(format!(
                            "slot {n}: transmitter {j} cannot relay output of receiver {} at slot {}",
                            o.rx, o.slot
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanStep {
    /// Slot `slot` carries exactly the two outputs `known` and `recovers`;
    /// subtracting the stored `known` isolates `recovers`.
    Cancel {
        slot: usize,
        known: OutputRef,
        recovers: OutputRef,
    },
    /// Two stored outputs, each a combination of the same two symbols, are
    /// solved jointly for them.
    Resolve {
        outputs: [OutputRef; 2],
        symbols: [usize; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationPlan {
    pub rx: usize,
    pub steps: Vec<PlanStep>,
}

impl CancellationPlan {
    /// Checks that every step only uses outputs the receiver observed itself
    /// or recovered earlier in the plan.
    pub fn validate(&self, schedule: &SlotSchedule) -> Result<(), SchemeError> {
        let fail = |msg: String| Err(SchemeError::Schedule(format!("receiver {}: {msg}", self.rx)));
        let mut known: Vec<OutputRef> = (0..schedule.len()).map(|slot| OutputRef { rx: self.rx, slot }).collect();
        for step in &self.steps {
            match step {
                PlanStep::Cancel {
                    slot,
                    known: k,
                    recovers,
                } => {
                    if !known.contains(k) {
                        return fail(format!("cancels {k:?} before knowing it"));
                    }
                    let mut relayed: Vec<OutputRef> = schedule.slots[*slot]
                        .iter()
                        .filter_map(|(_, p)| match p {
                            Payload::Output(o) => Some(*o),
                            Payload::Symbol(_) => None,
                        })
                        .collect();
                    relayed.sort();
                    let mut expected = vec![*k, *recovers];
                    expected.sort();
                    if relayed != expected || schedule.active(*slot) != 2 {
                        return fail(format!("slot {slot} does not carry exactly {k:?} and {recovers:?}"));
                    }
                    known.push(*recovers);
                }
                PlanStep::Resolve { outputs, symbols } => {
                    for o in outputs {
                        if !known.contains(o) {
                            return fail(format!("resolves with unknown {o:?}"));
                        }
                        if !schedule.carries_symbols_only(o.slot) {
                            return fail(format!("{o:?} is not a combination of symbols"));
                        }
                    }
                    for o in outputs {
                        let mut carried: Vec<usize> = schedule.slots[o.slot]
                            .iter()
                            .filter_map(|(_, p)| match p {
                                Payload::Symbol(s) => Some(*s),
                                Payload::Output(_) => None,
                            })
                            .collect();
                        carried.sort();
                        let mut wanted = symbols.to_vec();
                        wanted.sort();
                        if carried != wanted {
                            return fail(format!("{o:?} carries {carried:?}, not {wanted:?}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A complete output-feedback scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayScheme {
    pub schedule: SlotSchedule,
    pub plans: Vec<CancellationPlan>,
    pub feedback: FeedbackModel,
    /// `intended[id]`: receiver that wants symbol `id`.
    pub intended: Vec<usize>,
}

/// Scale applied to a relayed output so it carries power `P` when `active`
/// unit-gain transmitters of power `P` produced it.
pub fn relay_gain(params: &RunParams, active: usize) -> f64 {
    params.amplitude / (active as f64 * params.power() + params.noise_variance).sqrt()
}

/// Result of one receiver's cancellation chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutcome {
    pub output: ReceiverOutput,
    /// Every output the receiver held at the end, observed or recovered.
    pub store: BTreeMap<OutputRef, CMatrix>,
    pub resolvability: f64,
    pub determinant: Complex64,
}

impl RelayScheme {
    pub fn num_symbols(&self) -> usize {
        self.intended.len()
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        self.schedule.validate(&self.feedback)?;
        for (rx, plan) in self.plans.iter().enumerate() {
            if plan.rx != rx {
                return Err(SchemeError::Schedule(format!("plan {rx} is for receiver {}", plan.rx)));
            }
            plan.validate(&self.schedule)?;
        }
        Ok(())
    }

    pub fn encode(
        &self,
        h: &ChannelTensor,
        symbols: &[Signal],
        params: &RunParams,
        basis: &SignalBasis,
    ) -> Result<BlockTrace, SchemeError> {
        self.validate()?;
        assert_eq!(symbols.len(), self.num_symbols());
        let mut enc = RelayEncoder {
            schedule: &self.schedule,
            symbols,
            params,
            width: basis.width(),
        };
        run_block(&mut enc, h, &self.feedback, basis)
    }

    /// Coefficient of each symbol in a symbols-only output.
    fn symbol_gain(&self, h: &ChannelTensor, o: OutputRef, id: usize, amplitude: f64) -> Complex64 {
        self.schedule.slots[o.slot]
            .iter()
            .find(|(_, p)| *p == Payload::Symbol(id))
            .map_or(Complex64::new(0.0, 0.0), |(j, _)| h.get(o.rx, *j, o.slot) * amplitude)
    }

    /// Runs receiver `rx`'s cancellation chain on its `T x W` observations.
    pub fn decode_receiver(
        &self,
        rx: usize,
        obs: &CMatrix,
        h: &ChannelTensor,
        params: &RunParams,
    ) -> Result<ChainOutcome, SchemeError> {
        let mut store: BTreeMap<OutputRef, CMatrix> = (0..self.schedule.len())
            .map(|slot| (OutputRef { rx, slot }, obs.rows(slot, 1).into_owned()))
            .collect();
        let mut decoded: BTreeMap<usize, CMatrix> = BTreeMap::new();
        let mut worst = (f64::INFINITY, Complex64::new(1.0, 0.0));
        for step in &self.plans[rx].steps {
            match *step {
                PlanStep::Cancel { slot, known, recovers } => {
                    let gain = relay_gain(params, self.schedule.active(known.slot));
                    let target_gain = relay_gain(params, self.schedule.active(recovers.slot));
                    let sender = |o: OutputRef| {
                        self.schedule.slots[slot]
                            .iter()
                            .find(|(_, p)| *p == Payload::Output(o))
                            .map(|(j, _)| *j)
                            .expect("validated plan")
                    };
                    let known_coef = h.get(rx, sender(known), slot) * gain;
                    let target_coef = h.get(rx, sender(recovers), slot) * target_gain;
                    let residual = &store[&OutputRef { rx, slot }] - &store[&known] * known_coef;
                    store.insert(recovers, residual / target_coef);
                }
                PlanStep::Resolve { outputs, symbols } => {
                    let a = CMatrix::from_fn(2, 2, |r, c| self.symbol_gain(h, outputs[r], symbols[c], params.amplitude));
                    let mut b = CMatrix::zeros(2, obs.ncols());
                    for (r, o) in outputs.iter().enumerate() {
                        b.row_mut(r).copy_from(&store[o]);
                    }
                    let z = solve_square(&a, &b, &params.tol).map_err(SchemeError::at("output-pair solve"))?;
                    let (res, det) = resolvability(&a);
                    if res < worst.0 {
                        worst = (res, det);
                    }
                    for (c, &id) in symbols.iter().enumerate() {
                        decoded.insert(id, z.rows(c, 1).into_owned());
                    }
                }
            }
        }
        let wanted: Vec<usize> = (0..self.num_symbols()).filter(|&id| self.intended[id] == rx).collect();
        let mut estimates = CMatrix::zeros(wanted.len(), obs.ncols());
        for (r, id) in wanted.iter().enumerate() {
            let row = decoded
                .get(id)
                .ok_or_else(|| SchemeError::Schedule(format!("receiver {rx} never resolves symbol {id}")))?;
            estimates.row_mut(r).copy_from(row);
        }
        Ok(ChainOutcome {
            output: ReceiverOutput {
                rx,
                symbols: wanted,
                estimates,
            },
            store,
            resolvability: worst.0,
            determinant: worst.1,
        })
    }

    pub fn decode(&self, h: &ChannelTensor, trace: &BlockTrace, params: &RunParams) -> Result<Decoded, SchemeError> {
        let mut receivers = Vec::new();
        let mut certificate = Certificate::default();
        for rx in 0..self.schedule.num_rx {
            let out = self.decode_receiver(rx, &trace.observations(rx), h, params)?;
            certificate.resolvability.push(out.resolvability);
            certificate.determinants.push(out.determinant);
            receivers.push(out.output);
        }
        Ok(Decoded {
            receivers,
            certificate,
        })
    }

    /// Two-user X channel: four symbols in three slots. Symbol `rx * 2 + tx`
    /// goes from transmitter `tx` to receiver `rx`.
    pub fn x_channel() -> Self {
        let id = |rx: usize, tx: usize| rx * 2 + tx;
        let out = |rx, slot| OutputRef { rx, slot };
        let sym = |rx, tx| Payload::Symbol(id(rx, tx));
        RelayScheme {
            schedule: SlotSchedule {
                num_tx: 2,
                num_rx: 2,
                slots: vec![
                    vec![(0, sym(0, 0)), (1, sym(0, 1))],
                    vec![(0, sym(1, 0)), (1, sym(1, 1))],
                    vec![(0, Payload::Output(out(1, 0))), (1, Payload::Output(out(0, 1)))],
                ],
            },
            plans: vec![
                CancellationPlan {
                    rx: 0,
                    steps: vec![
                        PlanStep::Cancel {
                            slot: 2,
                            known: out(0, 1),
                            recovers: out(1, 0),
                        },
                        PlanStep::Resolve {
                            outputs: [out(0, 0), out(1, 0)],
                            symbols: [id(0, 0), id(0, 1)],
                        },
                    ],
                },
                CancellationPlan {
                    rx: 1,
                    steps: vec![
                        PlanStep::Cancel {
                            slot: 2,
                            known: out(1, 0),
                            recovers: out(0, 1),
                        },
                        PlanStep::Resolve {
                            outputs: [out(1, 1), out(0, 1)],
                            symbols: [id(1, 0), id(1, 1)],
                        },
                    ],
                },
            ],
            feedback: FeedbackModel::delayed_output_full(2, 2),
            intended: (0..4).map(|i| i / 2).collect(),
        }
    }

    /// Three-user interference channel: six symbols in five slots with each
    /// transmitter hearing only its own receiver. Symbol `k * 2 + i` is
    /// user `k`'s symbol `i`.
    pub fn ic3() -> Self {
        let id = |k: usize, i: usize| k * 2 + i;
        let out = |rx, slot| OutputRef { rx, slot };
        let sym = |k, i| Payload::Symbol(id(k, i));
        let relay = |rx, slot| Payload::Output(out(rx, slot));
        let cancel = |slot, known, recovers| PlanStep::Cancel { slot, known, recovers };
        let resolve = |a, b, s: [usize; 2]| PlanStep::Resolve {
            outputs: [a, b],
            symbols: s,
        };
        RelayScheme {
            schedule: SlotSchedule {
                num_tx: 3,
                num_rx: 3,
                slots: vec![
                    vec![(0, sym(0, 0)), (1, sym(1, 0))],
                    vec![(0, sym(0, 1)), (2, sym(2, 0))],
                    vec![(1, sym(1, 1)), (2, sym(2, 1))],
                    vec![(2, relay(2, 0)), (1, relay(1, 1))],
                    vec![(2, relay(2, 0)), (0, relay(0, 2))],
                ],
            },
            plans: vec![
                CancellationPlan {
                    rx: 0,
                    steps: vec![
                        cancel(4, out(0, 2), out(2, 0)),
                        resolve(out(0, 0), out(2, 0), [id(0, 0), id(1, 0)]),
                        cancel(3, out(2, 0), out(1, 1)),
                        resolve(out(0, 1), out(1, 1), [id(0, 1), id(2, 0)]),
                    ],
                },
                CancellationPlan {
                    rx: 1,
                    steps: vec![
                        cancel(3, out(1, 1), out(2, 0)),
                        resolve(out(1, 0), out(2, 0), [id(1, 0), id(0, 0)]),
                        cancel(4, out(2, 0), out(0, 2)),
                        resolve(out(1, 2), out(0, 2), [id(1, 1), id(2, 1)]),
                    ],
                },
                CancellationPlan {
                    rx: 2,
                    steps: vec![
                        cancel(3, out(2, 0), out(1, 1)),
                        resolve(out(2, 1), out(1, 1), [id(2, 0), id(0, 1)]),
                        cancel(4, out(2, 0), out(0, 2)),
                        resolve(out(2, 2), out(0, 2), [id(2, 1), id(1, 1)]),
                    ],
                },
            ],
            feedback: FeedbackModel::delayed_output_own(3),
            intended: (0..6).map(|i| i / 2).collect(),
        }
    }

    /// Transmitter that originally sends symbol `id`.
    pub fn symbol_owner(&self, id: usize) -> Option<usize> {
        self.schedule.symbol_origin(id).map(|(j, _)| j)
    }
}

struct RelayEncoder<'a> {
    schedule: &'a SlotSchedule,
    symbols: &'a [Signal],
    params: &'a RunParams,
    width: usize,
}

impl BlockEncoder for RelayEncoder<'_> {
    type Error = SchemeError;

    fn transmit(&mut self, view: &mut TxView<'_>) -> Result<Signal, SchemeError> {
        let (j, n) = (view.tx(), view.slot());
        Ok(match self.schedule.payload(j, n) {
            None => Signal::zeros(self.width),
            Some(Payload::Symbol(id)) => &self.symbols[id] * Complex64::new(self.params.amplitude, 0.0),
            Some(Payload::Output(o)) => {
                let y = view.output(o.rx, o.slot)?;
                y * Complex64::new(relay_gain(self.params, self.schedule.active(o.slot)), 0.0)
            }
        })
    }
}

macro_rules! relay_scheme {
    ($ty:ident, $name:literal, $ctor:ident, $rx:literal, $tx:literal, $len:literal, $syms:literal, $doc:literal) => {
        #[doc = $doc]
        pub struct $ty;

        impl Scheme for $ty {
            const NAME: &'static str = $name;
            const NUM_RX: usize = $rx;
            const NUM_TX: usize = $tx;
            const BLOCK_LEN: usize = $len;
            const NUM_SYMBOLS: usize = $syms;
            const CSI_SLOTS: usize = 0;

            type Offline = ();

            fn feedback_model() -> FeedbackModel {
                RelayScheme::$ctor().feedback
            }

            fn draw_offline<R: Rng + ?Sized>(_: &mut R) {}

            fn encode(
                h: &ChannelTensor,
                _: &(),
                symbols: &[Signal],
                params: &RunParams,
                basis: &SignalBasis,
            ) -> Result<BlockTrace, SchemeError> {
                RelayScheme::$ctor().encode(h, symbols, params, basis)
            }

            fn decode(h: &ChannelTensor, _: &(), trace: &BlockTrace, params: &RunParams) -> Result<Decoded, SchemeError> {
                RelayScheme::$ctor().decode(h, trace, params)
            }

            fn owns_symbol(tx: usize, symbol: usize) -> bool {
                RelayScheme::$ctor().symbol_owner(symbol) == Some(tx)
            }

            fn relays_outputs() -> bool {
                true
            }
        }
    };
}

relay_scheme!(
    XOutputFb,
    "x_output_fb",
    x_channel,
    2,
    2,
    3,
    4,
    "Two-user X channel with delayed output feedback, 4 symbols in 3 slots."
);
relay_scheme!(
    Ic3OutputFb,
    "ic3_output_fb",
    ic3,
    3,
    3,
    5,
    6,
    "Three-user interference channel with own-receiver delayed output feedback, 6 symbols in 5 slots."
);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{audit_feedback_usage, generate_channel, scalar, MagnitudeBounds};
    use crate::numerics::sample_complex_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn channel(k: usize, t: usize, seed: u64) -> ChannelTensor {
        generate_channel(k, k, t, &mut ChaCha8Rng::seed_from_u64(seed), MagnitudeBounds::default()).unwrap()
    }

    fn roundtrip(scheme: &RelayScheme, k: usize, seed: u64) -> (Vec<Complex64>, Decoded) {
        let t = scheme.schedule.len();
        let h = channel(k, t, seed);
        let vals = sample_complex_gaussian(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xabc), scheme.num_symbols());
        let syms: Vec<Signal> = vals.iter().map(|&v| scalar(v)).collect();
        let params = RunParams::default();
        let trace = scheme.encode(&h, &syms, &params, &SignalBasis::noiseless(k, t)).unwrap();
        (vals, scheme.decode(&h, &trace, &params).unwrap())
    }

    #[test]
    fn builtin_schemes_are_legal() {
        RelayScheme::x_channel().validate().unwrap();
        RelayScheme::ic3().validate().unwrap();
    }

    #[test]
    fn relaying_a_foreign_output_is_rejected() {
        let mut s = RelayScheme::ic3();
        s.schedule.slots[3][0] = (2, Payload::Output(OutputRef { rx: 0, slot: 0 }));
        assert!(matches!(s.validate(), Err(SchemeError::Schedule(_))));
    }

    #[test]
    fn relaying_a_current_output_is_rejected() {
        let mut s = RelayScheme::x_channel();
        s.schedule.slots[2][0] = (0, Payload::Output(OutputRef { rx: 1, slot: 2 }));
        assert!(s.validate().is_err());
    }

    #[test]
    fn cancelling_an_unknown_output_is_rejected() {
        let mut s = RelayScheme::ic3();
        s.plans[0].steps.swap(0, 2);
        assert!(s.validate().is_err());
    }

    #[test]
    fn zero_messages_stay_zero() {
        let s = RelayScheme::x_channel();
        let h = channel(2, 3, 1);
        let params = RunParams::default();
        let syms = vec![scalar(Complex64::new(0.0, 0.0)); 4];
        let trace = s.encode(&h, &syms, &params, &SignalBasis::noiseless(2, 3)).unwrap();
        assert!(trace.y.iter().flatten().all(|y| y[0] == Complex64::new(0.0, 0.0)));
        let d = s.decode(&h, &trace, &params).unwrap();
        assert!(d.receivers.iter().all(|r| r.estimates.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        for (scheme, k) in [(RelayScheme::x_channel(), 2), (RelayScheme::ic3(), 3)] {
            for seed in 0..200 {
                let (vals, d) = roundtrip(&scheme, k, seed);
                for r in &d.receivers {
                    assert_eq!(r.symbols.len(), scheme.num_symbols() / k);
                    for (row, &id) in r.symbols.iter().enumerate() {
                        assert_eq!(scheme.intended[id], r.rx);
                        assert!((r.estimates[(row, 0)] - vals[id]).norm() < 1e-6, "seed {seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn recovered_outputs_match_what_was_received() {
        let scheme = RelayScheme::ic3();
        let h = channel(3, 5, 9);
        let params = RunParams::from_snr_db(20.0, Default::default());
        let vals = sample_complex_gaussian(&mut ChaCha8Rng::seed_from_u64(1), 6);
        let syms: Vec<Signal> = vals.iter().map(|&v| scalar(v)).collect();
        let trace = scheme.encode(&h, &syms, &params, &SignalBasis::noiseless(3, 5)).unwrap();
        for rx in 0..3 {
            let out = scheme.decode_receiver(rx, &trace.observations(rx), &h, &params).unwrap();
            for (o, row) in &out.store {
                let truth = trace.y[o.rx][o.slot][0];
                if o.rx == rx {
                    assert_eq!(row[(0, 0)], truth);
                } else {
                    assert!((row[(0, 0)] - truth).norm() <= 1e-9 * truth.norm(), "{o:?}");
                }
            }
        }
    }

    #[test]
    fn transmitters_read_no_channel_states() {
        for (scheme, k) in [(RelayScheme::x_channel(), 2), (RelayScheme::ic3(), 3)] {
            let t = scheme.schedule.len();
            let basis = SignalBasis::transfer(scheme.num_symbols(), k, t);
            let trace = scheme
                .encode(&channel(k, t, 3), &basis.symbols(), &RunParams::default(), &basis)
                .unwrap();
            assert!(audit_feedback_usage(&trace.log, t).csi_slots.is_empty());
            trace.log.verify(&scheme.feedback).unwrap();
        }
    }

    #[test]
    fn ic3_uses_only_own_receiver_outputs() {
        let scheme = RelayScheme::ic3();
        let basis = SignalBasis::transfer(6, 3, 5);
        let trace = scheme
            .encode(&channel(3, 5, 4), &basis.symbols(), &RunParams::default(), &basis)
            .unwrap();
        let pairs = trace.log.output_pairs();
        assert!(pairs.iter().all(|(tx, rx)| tx == rx));
        assert_eq!(pairs, BTreeSet::from([(0, 0), (1, 1), (2, 2)]));
    }

    #[test]
    fn relayed_power_is_normalized_on_average() {
        // E|y|^2 = active * P + noise for unit-variance channels and symbols.
        let params = RunParams::from_snr_db(10.0, Default::default());
        let g = relay_gain(&params, 2);
        assert!((g * g * (2.0 * params.power() + 1.0) - params.power()).abs() < 1e-9);
    }

    #[test]
    fn scheme_trait_matches_dimensions() {
        assert_eq!(XOutputFb::feedback_model(), FeedbackModel::delayed_output_full(2, 2));
        assert!(XOutputFb::owns_symbol(1, 3));
        assert!(!XOutputFb::owns_symbol(0, 3));
        assert!(Ic3OutputFb::owns_symbol(2, 5));
        assert_eq!(RelayScheme::ic3().schedule.len(), Ic3OutputFb::BLOCK_LEN);
    }
}
