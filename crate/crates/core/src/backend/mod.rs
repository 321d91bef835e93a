//! Planner-specific emitters.

pub mod mar;
pub mod pdkb;

pub use mar::{emit_mar, MarArtifact, MarManifest, MarOptions};
pub use pdkb::{emit_pdkb, PdkbActionRecord, PdkbArtifact, PdkbManifest, PdkbOptions, Strategy};
