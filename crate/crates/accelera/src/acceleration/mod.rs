//! Top-level analysis: guard geometry, certified under/over-estimation of
//! the crossing iteration counts, and assembly of the accelerated reach
//! tube from the abstract-matrix and input-decomposition machinery.

mod engine;
mod model;

pub use engine::{accelerate, one_step_image, AccelOptions, Mode, Provenance, ReachTube};
pub use model::{guard_faces, template_directions, GuardFace, LinearLoop, TemplateSpec};
