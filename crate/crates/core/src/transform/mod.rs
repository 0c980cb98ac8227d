//! Rules and their application, both on graphs and on shapes.
//!
//! The abstract pipeline for one rule on a shape `S` is
//! `prematch → materialise → apply → resolve → normalise`.

pub mod apply;
pub mod concrete;
mod matching;
pub mod materialise;
pub mod normalise;
pub mod prematch;
pub mod rule;

pub use apply::{apply, resolve};
pub use concrete::{concrete_apply, concrete_matches};
pub use materialise::{materialise, Materialisation};
pub use normalise::normalise;
pub use prematch::prematch;
pub use rule::{Role, Rule};

use crate::error::Result;
use crate::graph::Morphism;
use crate::shape::Shape;

/// One abstract rule application: the prematch it came from and the
/// normalised target shape.
#[derive(Clone, Debug)]
pub struct AbstractStep {
    pub prematch: Morphism,
    pub target: Shape,
}

/// All abstract successors of `s` under `rule`, in canonical order.
pub fn abstract_successors(rule: &Rule, s: &Shape) -> Result<Vec<AbstractStep>> {
    let mut steps = Vec::new();
    for m in prematch(rule, s) {
        for mat in materialise(rule, &m, s)? {
            for t in resolve(&apply(rule, &mat)?) {
                steps.push(AbstractStep { prematch: m.clone(), target: normalise(&t) });
            }
        }
    }
    Ok(steps)
}
