//! Delayed-feedback information policies and the access audit trail.
//!
//! Transmitters never touch the channel tensor or the receivers' outputs
//! directly. Each slot they are handed a [`TxView`] that exposes exactly the
//! items the active [`FeedbackModel`] permits and appends every read to an
//! [`AccessLog`].

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::signal::Signal;
use super::tensor::ChannelTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    /// Past channel states only.
    DelayedCsit,
    /// Past received signals only.
    DelayedOutput,
    /// Both past received signals and past channel states.
    DelayedShannon,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackModel {
    pub kind: FeedbackKind,
    /// Information about slot `m` becomes visible at slot `m + delay`.
    pub delay: usize,
    /// `output_association[k]` lists the transmitters that receive receiver
    /// `k`'s fed-back outputs.
    pub output_association: Vec<Vec<usize>>,
}

impl FeedbackModel {
    pub fn delayed_csit() -> Self {
        FeedbackModel {
            kind: FeedbackKind::DelayedCsit,
            delay: 1,
            output_association: Vec::new(),
        }
    }

    /// Output feedback from every receiver to every transmitter.
    pub fn delayed_output_full(num_rx: usize, num_tx: usize) -> Self {
        FeedbackModel {
            kind: FeedbackKind::DelayedOutput,
            delay: 1,
            output_association: vec![(0..num_tx).collect(); num_rx],
        }
    }

    /// Output feedback from receiver `k` to transmitter `k` only.
    pub fn delayed_output_own(num_users: usize) -> Self {
        FeedbackModel {
            kind: FeedbackKind::DelayedOutput,
            delay: 1,
            output_association: (0..num_users).map(|k| vec![k]).collect(),
        }
    }

    pub fn delayed_shannon_full(num_rx: usize, num_tx: usize) -> Self {
        FeedbackModel {
            kind: FeedbackKind::DelayedShannon,
            ..Self::delayed_output_full(num_rx, num_tx)
        }
    }

    pub fn none() -> Self {
        FeedbackModel {
            kind: FeedbackKind::None,
            delay: 1,
            output_association: Vec::new(),
        }
    }

    pub fn with_delay(mut self, delay: usize) -> Self {
        assert!(delay >= 1, "feedback delay must be at least one slot");
        self.delay = delay;
        self
    }

    pub fn exposes_channel(&self) -> bool {
        matches!(
            self.kind,
            FeedbackKind::DelayedCsit | FeedbackKind::DelayedShannon
        )
    }

    pub fn exposes_output(&self, rx: usize, tx: usize) -> bool {
        matches!(
            self.kind,
            FeedbackKind::DelayedOutput | FeedbackKind::DelayedShannon
        ) && self
            .output_association
            .get(rx)
            .is_some_and(|txs| txs.contains(&tx))
    }

    /// Whether an item indexed by `item_slot` is visible at `now`.
    pub fn is_past(&self, item_slot: usize, now: usize) -> bool {
        item_slot + self.delay <= now
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AccessItem {
    Channel { rx: usize, tx: usize, slot: usize },
    Output { rx: usize, slot: usize },
}

impl AccessItem {
    pub fn slot(&self) -> usize {
        match *self {
            AccessItem::Channel { slot, .. } | AccessItem::Output { slot, .. } => slot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessEntry {
    pub tx: usize,
    /// Slot during which the read happened.
    pub slot: usize,
    pub item: AccessItem,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("transmitter {tx} at slot {slot} requested {item:?}: {reason}")]
pub struct CausalityViolation {
    pub tx: usize,
    pub slot: usize,
    pub item: AccessItem,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessLog {
    entries: Vec<AccessEntry>,
}

impl AccessLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[AccessEntry] {
        &self.entries
    }

    pub fn push(&mut self, entry: AccessEntry) {
        self.entries.push(entry);
    }

    /// Re-checks every entry against `model`.
    pub fn verify(&self, model: &FeedbackModel) -> Result<(), CausalityViolation> {
        for e in &self.entries {
            check_access(model, e.tx, e.slot, e.item)?;
        }
        Ok(())
    }

    /// Distinct `(tx, rx)` pairs for which a transmitter read receiver `rx`'s outputs.
    pub fn output_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.entries
            .iter()
            .filter_map(|e| match e.item {
                AccessItem::Output { rx, .. } => Some((e.tx, rx)),
                AccessItem::Channel { .. } => None,
            })
            .collect()
    }
}

fn check_access(
    model: &FeedbackModel,
    tx: usize,
    now: usize,
    item: AccessItem,
) -> Result<(), CausalityViolation> {
    let violation = |reason: &str| CausalityViolation {
        tx,
        slot: now,
        item,
        reason: reason.to_string(),
    };
    match item {
        AccessItem::Channel { .. } if !model.exposes_channel() => {
            return Err(violation("feedback model carries no channel states"))
        }
        AccessItem::Output { rx, .. } if !model.exposes_output(rx, tx) => {
            return Err(violation("output not fed back to this transmitter"))
        }
        _ => {}
    }
    if !model.is_past(item.slot(), now) {
        return Err(violation("item is not yet available under the feedback delay"));
    }
    Ok(())
}

/// Everything transmitter `tx` may learn from feedback at slot `slot`.
pub struct TxView<'a> {
    tx: usize,
    slot: usize,
    model: &'a FeedbackModel,
    channel: &'a ChannelTensor,
    /// `outputs[k][m]` is receiver `k`'s observation in slot `m`, for `m < slot`.
    outputs: &'a [Vec<Signal>],
    log: &'a mut AccessLog,
}

impl<'a> TxView<'a> {
    pub fn new(
        tx: usize,
        slot: usize,
        model: &'a FeedbackModel,
        channel: &'a ChannelTensor,
        outputs: &'a [Vec<Signal>],
        log: &'a mut AccessLog,
    ) -> Self {
        TxView {
            tx,
            slot,
            model,
            channel,
            outputs,
            log,
        }
    }

    pub fn tx(&self) -> usize {
        self.tx
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn model(&self) -> &FeedbackModel {
        self.model
    }

    pub fn num_rx(&self) -> usize {
        self.channel.num_rx()
    }

    pub fn num_tx(&self) -> usize {
        self.channel.num_tx()
    }

    /// Number of leading slots whose channel states are visible.
    pub fn visible_channel_slots(&self) -> usize {
        if self.model.exposes_channel() {
            (self.slot + 1).saturating_sub(self.model.delay)
        } else {
            0
        }
    }

    fn access(&mut self, item: AccessItem) -> Result<(), CausalityViolation> {
        check_access(self.model, self.tx, self.slot, item)?;
        self.log.push(AccessEntry {
            tx: self.tx,
            slot: self.slot,
            item,
        });
        Ok(())
    }

    pub fn channel(&mut self, rx: usize, tx: usize, slot: usize) -> Result<Complex64, CausalityViolation> {
        self.access(AccessItem::Channel { rx, tx, slot })?;
        Ok(self.channel.get(rx, tx, slot))
    }

    /// All channel states of slots `0..len`, read through the log.
    pub fn channel_prefix(&mut self, len: usize) -> Result<ChannelTensor, CausalityViolation> {
        let (nr, nt) = (self.channel.num_rx(), self.channel.num_tx());
        let mut out = ChannelTensor::from_fn(nr, nt, len, |_, _, _| Complex64::new(0.0, 0.0));
        for k in 0..nr {
            for j in 0..nt {
                for n in 0..len {
                    out.set(k, j, n, self.channel(k, j, n)?);
                }
            }
        }
        Ok(out)
    }

    pub fn output(&mut self, rx: usize, slot: usize) -> Result<Signal, CausalityViolation> {
        self.access(AccessItem::Output { rx, slot })?;
        Ok(self.outputs[rx][slot].clone())
    }
}

/// Which slots' channel states were read during a codeblock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackUsage {
    pub csi_slots: BTreeSet<usize>,
    pub block_len: usize,
}

impl FeedbackUsage {
    /// Fraction of the block's channel states that had to be fed back.
    pub fn fraction(&self) -> Ratio<usize> {
        Ratio::new(self.csi_slots.len(), self.block_len)
    }
}

pub fn audit_feedback_usage(log: &AccessLog, block_len: usize) -> FeedbackUsage {
    let csi_slots = log
        .entries()
        .iter()
        .filter_map(|e| match e.item {
            AccessItem::Channel { slot, .. } => Some(slot),
            AccessItem::Output { .. } => None,
        })
        .collect();
    FeedbackUsage {
        csi_slots,
        block_len,
    }
}
