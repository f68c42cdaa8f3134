//! Exact differentiation: jets for spatial derivatives, a reverse-mode tape
//! for parameter gradients of scalars built from jet components.

pub mod grad;
pub mod jet;
pub mod tape;

pub use grad::MlpGrad;
pub use jet::{Jet2, Point2};
pub use tape::{Tape, TapeJet, TapeNet, Var};
