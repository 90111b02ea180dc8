use rayon::prelude::*;
use segseed_core::ga::FitnessExecutor;
use segseed_core::{FitnessValue, SeedChromosome};

/// Scores a generation on the rayon thread pool. Results keep input order,
/// so runs stay identical to [`segseed_core::ga::Sequential`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl FitnessExecutor for Parallel {
    fn evaluate(
        &self,
        batch: &[SeedChromosome],
        cost: &(dyn Fn(&SeedChromosome) -> FitnessValue + Sync),
    ) -> Vec<FitnessValue> {
        batch.par_iter().map(cost).collect()
    }
}
