//! renormlab: a numerical laboratory for the renormalization of critical
//! circle maps.
//!
//! The crate builds circle maps as composition trees of jet-evaluable
//! pieces, measures rotation numbers combinatorially by closest returns,
//! constructs dynamical partitions and commuting pairs, and on top of those
//! runs the classical machinery: real a-priori bounds, cross-ratio/Koebe
//! distortion estimates, almost parabolic (saddle-node) geometry, fine
//! grids with the Carleson-style smoothness criterion, and saddle-node
//! surgery for building maps that share combinatorics but not geometry.

pub mod error;
pub mod fit;
pub mod jet;
pub mod map;
pub mod map_io;
pub mod real;
pub mod rotation;

pub use error::{Error, Result};
pub use jet::Jet3;
pub use map::{Backend, CircleMap, MapNode, PrecisionPolicy};
