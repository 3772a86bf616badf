//! Uniform probability and Lebesgue measures on spaces of Lipschitz paths.
//!
//! Paths are built on dyadic grids by recursive midpoint selection: every new
//! grid value is drawn from the interval of values that keep the path
//! `c`-Lipschitz given its two neighbours. Feeding i.i.d. uniform noise
//! through affine selectors yields the uniform measure on pinned paths; the
//! [`measure`] module estimates cylinder probabilities under it.

pub mod bridge;
pub mod error;
pub mod extensions;
pub mod geometry;
pub mod grid;
pub mod measure;
pub mod selectors;
pub mod validate;

pub use bridge::{build_bridge, enclosure_at, invert_bridge, refine, Enclosure, GridPath, NoiseVector};
pub use error::{Error, Result};
pub use extensions::{
    build_free_halfline, build_free_segment, build_halfline, build_pinned_left, build_pinned_right,
    invert_free_halfline, invert_free_segment, invert_halfline, invert_pinned_left, invert_pinned_right,
    FreeNoise, HalfLineNoise, HalfLinePath, PinnedNoise, Selectors,
};
pub use geometry::{feasible, free_interval, midpoint_feasible, midpoint_interval, BridgeSpec, Interval};
pub use grid::{interior_node_count, parent_endpoints, DyadicGrid, NodeId};
