//! Graph transformation systems explored over concrete graphs or over
//! neighbourhood shapes.

pub mod dot;
pub mod error;
pub mod explore;
pub mod grammar;
pub mod graph;
pub mod iso;
pub mod multiplicity;
pub mod shape;
pub mod transform;

pub use error::{Error, Result};
pub use graph::{Alphabet, Arity, Dir, Edge, Graph, Label, LabelSet, Morphism, NodeId};
pub use iso::Certificate;
pub use multiplicity::Multiplicity;
pub use shape::{abstract_graph, neighbourhood_partition, Partition, Shape};
