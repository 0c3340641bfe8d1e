//! Wave measures, Glimm functionals, generalized characteristics and the
//! decay report, all computed from a finished trajectory log.

mod characteristic;
mod functionals;
mod funnel;
mod glimm;
mod lsc;
mod measure;
mod oleinik;

pub use characteristic::{min_characteristic, CharPath};
pub use functionals::{
    fit_interaction_constant, functionals, FunctionalSample, FunctionalSeries, Stage, DEFAULT_C0, DEFAULT_GAMMA,
    V_RESOLUTION,
};
pub use funnel::{proof_functionals, PhiJump, ProofSample, ProofSeries, Span};
pub use glimm::{approaching, glimm, Glimm};
pub use lsc::{lsc_probe, profile_fronts, LscEntry, LscReport, MuQuery};
pub use measure::{IntervalSet, WaveMeasureSlice};
pub use oleinik::{oleinik_report, OleinikReport};

use crate::source::SourceSpec;

/// `∫_0^h ω(jh + s) ds`, the strength of the zero wave at lattice point `j`.
pub fn zero_strength(src: &SourceSpec, j: i64, h: f64) -> f64 {
    src.zero_strength(j, h)
}
