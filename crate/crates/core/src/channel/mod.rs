//! Fading channel, delayed-feedback policies, and the physical signal path.

mod feedback;
mod signal;
mod tensor;

pub use feedback::{
    audit_feedback_usage, AccessEntry, AccessItem, AccessLog, CausalityViolation, FeedbackKind,
    FeedbackModel, FeedbackUsage, TxView,
};
pub use signal::{
    apply_channel, evaluate, run_block, scalar, BlockEncoder, BlockTrace, Realization, Received,
    Signal, SignalBasis, SignalRecord,
};
pub(crate) use tensor::draw_bounded;
pub use tensor::{generate_channel, ChannelError, ChannelTensor, MagnitudeBounds, MAX_REJECTIONS};

