//! Finite dendrites whose endpoint sets are isometric to a given finite
//! metric space, extension of endpoint maps to the whole dendrite, and the
//! timer/controller/fiber skew product used to exhibit DC3 chaos without
//! Li-Yorke chaos.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! anything touching the filesystem live in `dendrite-cli`.
//!
//! Pipeline overview:
//!
//! * [`spaces`]: validated finite metric spaces, set geometry, generators.
//! * [`cells`]: θ-chains, θ-cells and the full cell hierarchy.
//! * [`dendrite`]: the skeleton tree over cells and the metric ρ.
//! * [`extension`]: filtrations and the eventually-fixed extension of an
//!   endpoint map.
//! * [`odometer`]: the adding machine, the fiber space and the skew product.
//! * [`chaos`]: distribution functions, pair verdicts, control families.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cells;
pub mod chaos;
pub mod dendrite;
pub mod extension;
pub mod odometer;
pub mod spaces;

pub use cells::{build_cell_hierarchy, Cell, CellHierarchy, CellId};
pub use chaos::{classify_pair, classify_pair_profiled, distribution_profile, scrambled_family, DistributionProfile, PairVerdict};
pub use dendrite::{build_dendrite, verify_dendrite, DPoint, Dendrite, VerifyReport};
pub use extension::{build_filtration, embed_system, extend_map, DendriteMap, Embedding, Filtration};
pub use odometer::{FiberPoint, OmegaWord, SequenceParams, SkewState};
pub use spaces::{MetricSpace, SpaceError, Subset};
