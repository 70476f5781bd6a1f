//! Receptacle distance fields and distance-driven attention over model points.

mod heatmap;
mod sdf;

pub use heatmap::{anchor_frame, attention_at, attention_heatmap, transfer_attention, AttentionMap};
pub use sdf::{sdf_eval, tilted, SdfPrimitive, SdfScene};
