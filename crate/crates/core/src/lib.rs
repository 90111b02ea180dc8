//! Seeded region growing for 2-D grayscale images, with genetic-algorithm
//! selection of one seed per tissue class.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command line live in the `segseed` companion crate.
//!
//! The pipeline:
//!
//! 1. [`seeding::pool_from_thresholds`] collects candidate seed pixels per
//!    class from intensity bands.
//! 2. [`ga::evolve`] searches seed triples drawn from that pool, scoring each
//!    with [`ga::fitness`]: grow the three regions with [`grow::segment`] and
//!    count per-class mask disagreements against a reference.
//! 3. [`metrics::rms_error`] reports the RMS and Dice figures of the final
//!    segmentation.
//!
//! [`phantom::generate`] produces synthetic image/label pairs for testing.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod ga;
pub mod grow;
pub mod image;
pub mod metrics;
pub mod neighborhood;
pub mod phantom;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
pub use ga::{evolve, evolve_with, fitness, FitnessValue, GaConfig, SeedChromosome};
pub use grow::{grow_region, segment, ClaimMask, GrowthCriterion, GrowthSettings, Region, Seed};
pub use image::{mask_of_class, Class, Image2D, LabelMap, Point};
pub use metrics::{rms_error, EvalReport};
pub use neighborhood::Neighborhood;
pub use phantom::{generate, Geometry, PhantomSpec};
pub use seeding::{CandidatePool, ThresholdBands};
pub use stats::{stats_update, RegionStats, StatsMode};

pub(crate) fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
