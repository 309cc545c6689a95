//! Retrospective interference alignment for wireless channels with delayed
//! channel-state or output feedback.

pub mod channel;
pub mod eval;
pub mod numerics;
pub mod output_feedback;
pub mod retro_csit_ic3;
pub mod retro_csit_x;
pub mod scheme;
