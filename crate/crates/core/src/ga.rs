//! Genetic search over seed triples.
//!
//! A chromosome holds one index per tissue class into a [`CandidatePool`], so
//! crossover and mutation can never leave the feasible set. Its cost is the
//! number of per-class mask disagreements between the segmentation grown from
//! its seeds and a reference label map; lower is better.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grow::{check_reference, order_seeds, segment, GrowthSettings, Seed};
use crate::image::{ensure_same_dims, Class, Image2D, LabelMap, Point};
use crate::seeding::{draw_index, CandidatePool};

/// Summed squared difference of the binary class masks of a grown
/// segmentation and its reference. Zero iff the two label the same pixels
/// with every tissue class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FitnessValue(pub u64);

impl FitnessValue {
    pub fn cost(self) -> u64 {
        self.0
    }

    /// Cost charged to seed triples that cannot be grown: every pixel wrong
    /// in all three class masks.
    pub fn worst(width: usize, height: usize) -> Self {
        FitnessValue((width * height * 3) as u64)
    }
}

/// Seed triple as pool indices, ordered CSF, GM, WM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeedChromosome {
    genes: [usize; 3],
}

impl SeedChromosome {
    /// Fails when an index falls outside its class list.
    pub fn new(genes: [usize; 3], pool: &CandidatePool) -> Result<Self> {
        for (t, &g) in genes.iter().enumerate() {
            if g >= pool.by_index(t).len() {
                return Err(Error::InvalidConfig(
                    "chromosome gene outside its candidate list",
                ));
            }
        }
        Ok(SeedChromosome { genes })
    }

    pub fn genes(&self) -> [usize; 3] {
        self.genes
    }

    /// Seed positions in CSF, GM, WM order.
    pub fn points(&self, pool: &CandidatePool) -> [Point; 3] {
        [0, 1, 2].map(|t| pool.by_index(t)[self.genes[t]])
    }

    /// Seeds arranged in growth order.
    pub fn seeds(&self, pool: &CandidatePool, class_order: &[Class; 3]) -> [Seed; 3] {
        order_seeds(self.points(pool), class_order)
    }

    fn random<R: Rng>(pool: &CandidatePool, rng: &mut R) -> Self {
        let genes = [0, 1, 2].map(|t| draw_index(rng, pool.by_index(t).len()));
        let mut c = SeedChromosome { genes };
        c.repair(pool, rng);
        c
    }

    // Re-draws genes that collide with an earlier gene's position. Gives up
    // after a bounded number of draws; fitness then charges the worst cost.
    fn repair<R: Rng>(&mut self, pool: &CandidatePool, rng: &mut R) {
        for t in 1..3 {
            let mut tries = 0;
            while tries < 64
                && (0..t)
                    .any(|u| pool.by_index(u)[self.genes[u]] == pool.by_index(t)[self.genes[t]])
            {
                self.genes[t] = draw_index(rng, pool.by_index(t).len());
                tries += 1;
            }
        }
    }
}

/// Genetic algorithm parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene probability of replacement by a fresh pool draw.
    pub mutation_rate: f64,
    /// Best individuals copied unchanged into the next generation.
    pub elite_count: usize,
    /// Stop once the best cost has not improved for this many generations.
    pub stagnation_patience: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 30,
            max_generations: 50,
            tournament_size: 3,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            elite_count: 2,
            stagnation_patience: 10,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("population_size must be at least 2"));
        }
        if self.max_generations == 0 {
            return Err(Error::InvalidConfig("max_generations must be at least 1"));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidConfig("tournament_size must be at least 1"));
        }
        if !rate_ok(self.crossover_rate) || !rate_ok(self.mutation_rate) {
            return Err(Error::InvalidConfig(
                "crossover and mutation rates must lie in [0, 1]",
            ));
        }
        if self.elite_count == 0 || self.elite_count >= self.population_size {
            return Err(Error::InvalidConfig(
                "elite_count must be at least 1 and below population_size",
            ));
        }
        if self.stagnation_patience == 0 {
            return Err(Error::InvalidConfig(
                "stagnation_patience must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Best and mean cost of one evaluated generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_cost: u64,
    pub mean_cost: f64,
}

/// Outcome of [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub best: SeedChromosome,
    pub best_cost: FitnessValue,
    pub history: Vec<GenerationStats>,
}

/// Mask-disagreement cost of `grown` against `reference`: for each tissue
/// class, the number of pixels where exactly one of the two maps has that
/// class, summed over the three classes.
pub fn segmentation_cost(grown: &LabelMap, reference: &LabelMap) -> Result<FitnessValue> {
    ensure_same_dims(grown, reference)?;
    let cost = grown
        .labels()
        .iter()
        .zip(reference.labels())
        .map(
            |(&g, &r)| match (g == r, g == Class::Background, r == Class::Background) {
                (true, _, _) => 0,
                // one side background: only the other side's class mask differs
                (false, true, _) | (false, _, true) => 1,
                // two different tissues: both masks differ
                (false, false, false) => 2,
            },
        )
        .sum();
    Ok(FitnessValue(cost))
}

/// Cost of the segmentation grown from `seeds` (in growth order). Seeds that
/// cannot be grown, because an earlier region claimed them or two share a
/// position, get [`FitnessValue::worst`].
pub fn fitness(
    image: &Image2D,
    seeds: &[Seed],
    reference: &LabelMap,
    settings: &GrowthSettings,
) -> Result<FitnessValue> {
    check_reference(image, reference)?;
    match segment(image, seeds, &settings.criterion, settings.neighborhood) {
        Ok(grown) => segmentation_cost(&grown, reference),
        Err(Error::SeedRejected { .. } | Error::DuplicateSeed { .. }) => {
            Ok(FitnessValue::worst(image.width(), image.height()))
        }
        Err(e) => Err(e),
    }
}

/// Strategy for scoring a batch of chromosomes. Results must come back in
/// input order.
pub trait FitnessExecutor {
    fn evaluate(
        &self,
        batch: &[SeedChromosome],
        cost: &(dyn Fn(&SeedChromosome) -> FitnessValue + Sync),
    ) -> Vec<FitnessValue>;
}

/// Scores chromosomes one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl FitnessExecutor for Sequential {
    fn evaluate(
        &self,
        batch: &[SeedChromosome],
        cost: &(dyn Fn(&SeedChromosome) -> FitnessValue + Sync),
    ) -> Vec<FitnessValue> {
        batch.iter().map(cost).collect()
    }
}

/// [`evolve_with`] on the calling thread.
pub fn evolve(
    image: &Image2D,
    pool: &CandidatePool,
    reference: &LabelMap,
    settings: &GrowthSettings,
    config: &GaConfig,
) -> Result<Evolution> {
    evolve_with(image, pool, reference, settings, config, &Sequential)
}

/// Runs the genetic search.
///
/// Each generation is scored, its best `elite_count` members are copied over,
/// and the rest of the next generation is bred from tournament winners by
/// uniform gene-swap crossover and per-gene mutation. The search stops after
/// `max_generations` or once `stagnation_patience` generations pass without
/// improvement. All random draws come from one ChaCha stream seeded with
/// `config.rng_seed` and happen outside the executor, so the outcome does
/// not depend on how the executor schedules work.
pub fn evolve_with(
    image: &Image2D,
    pool: &CandidatePool,
    reference: &LabelMap,
    settings: &GrowthSettings,
    config: &GaConfig,
    executor: &dyn FitnessExecutor,
) -> Result<Evolution> {
    config.validate()?;
    settings.validate()?;
    check_reference(image, reference)?;
    for (t, class) in Class::TISSUES.into_iter().enumerate() {
        for p in pool.by_index(t) {
            if !image.contains(*p) {
                return Err(Error::SeedOutOfBounds { class, point: *p });
            }
        }
    }

    let mut rng = crate::seeded_rng(config.rng_seed);
    let cost_of = |c: &SeedChromosome| -> FitnessValue {
        fitness(
            image,
            &c.seeds(pool, &settings.class_order),
            reference,
            settings,
        )
        .expect("dimensions checked before the search")
    };
    let mut cache: BTreeMap<SeedChromosome, FitnessValue> = BTreeMap::new();

    let mut population: Vec<SeedChromosome> = (0..config.population_size)
        .map(|_| SeedChromosome::random(pool, &mut rng))
        .collect();
    let mut history = Vec::new();
    let mut best: Option<(SeedChromosome, FitnessValue)> = None;
    let mut stale = 0;

    for generation in 0..config.max_generations {
        let costs = score(&population, &mut cache, executor, &cost_of);

        let (gen_best, gen_best_cost) = population
            .iter()
            .zip(&costs)
            .min_by_key(|&(_, &c)| c)
            .map(|(&p, &c)| (p, c))
            .expect("non-empty population");
        let mean_cost = costs.iter().map(|c| c.0 as f64).sum::<f64>() / costs.len() as f64;
        if let Some((_, prev)) = best {
            debug_assert!(gen_best_cost <= prev, "elitism violated");
        }
        history.push(GenerationStats {
            generation,
            best_cost: gen_best_cost.0,
            mean_cost,
        });

        match best {
            Some((_, prev)) if gen_best_cost >= prev => stale += 1,
            _ => {
                best = Some((gen_best, gen_best_cost));
                stale = 0;
            }
        }
        if stale >= config.stagnation_patience || generation + 1 == config.max_generations {
            break;
        }

        population = next_generation(&population, &costs, pool, config, &mut rng);
    }

    let (best, best_cost) = best.expect("at least one generation");
    Ok(Evolution {
        best,
        best_cost,
        history,
    })
}

fn score(
    population: &[SeedChromosome],
    cache: &mut BTreeMap<SeedChromosome, FitnessValue>,
    executor: &dyn FitnessExecutor,
    cost_of: &(dyn Fn(&SeedChromosome) -> FitnessValue + Sync),
) -> Vec<FitnessValue> {
    let mut pending: Vec<SeedChromosome> = Vec::new();
    for c in population {
        if !cache.contains_key(c) && !pending.contains(c) {
            pending.push(*c);
        }
    }
    let fresh = executor.evaluate(&pending, cost_of);
    assert_eq!(fresh.len(), pending.len(), "executor dropped results");
    cache.extend(pending.into_iter().zip(fresh));
    population.iter().map(|c| cache[c]).collect()
}

fn next_generation(
    population: &[SeedChromosome],
    costs: &[FitnessValue],
    pool: &CandidatePool,
    config: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<SeedChromosome> {
    let mut ranked: Vec<usize> = (0..population.len()).collect();
    ranked.sort_by_key(|&i| (costs[i], i));

    let mut next: Vec<SeedChromosome> = ranked[..config.elite_count]
        .iter()
        .map(|&i| population[i])
        .collect();
    while next.len() < config.population_size {
        let mut a = population[tournament(costs, config.tournament_size, rng)];
        let mut b = population[tournament(costs, config.tournament_size, rng)];
        if rng.random_bool(config.crossover_rate) {
            for t in 0..3 {
                if rng.random_bool(0.5) {
                    core::mem::swap(&mut a.genes[t], &mut b.genes[t]);
                }
            }
        }
        for child in [&mut a, &mut b] {
            for t in 0..3 {
                if rng.random_bool(config.mutation_rate) {
                    child.genes[t] = draw_index(rng, pool.by_index(t).len());
                }
            }
            child.repair(pool, rng);
        }
        next.push(a);
        if next.len() < config.population_size {
            next.push(b);
        }
    }
    next
}

// Index of the cheapest of `size` uniformly drawn contestants (first drawn
// wins ties).
fn tournament(costs: &[FitnessValue], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = draw_index(rng, costs.len());
    for _ in 1..size {
        let challenger = draw_index(rng, costs.len());
        if costs[challenger] < costs[winner] {
            winner = challenger;
        }
    }
    winner
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grow::GrowthCriterion;
    use crate::neighborhood::Neighborhood;
    use crate::seeding::pool_from_thresholds;
    use crate::seeding::ThresholdBands;
    use alloc::vec;

    fn labels(w: usize, h: usize, codes: &[u8]) -> LabelMap {
        LabelMap::from_codes(w, h, codes).unwrap()
    }

    #[test]
    fn identical_maps_cost_nothing() {
        let m = labels(2, 2, &[0, 1, 2, 3]);
        assert_eq!(segmentation_cost(&m, &m).unwrap(), FitnessValue(0));
    }

    #[test]
    fn background_result_costs_one_per_reference_pixel() {
        let reference = labels(3, 2, &[0, 1, 2, 3, 3, 0]);
        let grown = LabelMap::background(3, 2).unwrap();
        assert_eq!(
            segmentation_cost(&grown, &reference).unwrap(),
            FitnessValue(4)
        );
    }

    #[test]
    fn swapped_class_costs_two_per_pixel() {
        let reference = labels(2, 2, &[2; 4]);
        let grown = labels(2, 2, &[3; 4]);
        assert_eq!(
            segmentation_cost(&grown, &reference).unwrap(),
            FitnessValue(8)
        );
    }

    #[test]
    fn cost_matches_mask_expansion() {
        // sum over classes of sum over pixels of (ref_mask - grown_mask)^2
        let reference = labels(4, 2, &[0, 1, 1, 2, 3, 3, 0, 2]);
        let grown = labels(4, 2, &[1, 1, 0, 3, 3, 2, 0, 2]);
        let mut expected = 0u64;
        for class in Class::TISSUES {
            let r = crate::mask_of_class(&reference, class).unwrap();
            let g = crate::mask_of_class(&grown, class).unwrap();
            expected += r
                .data()
                .iter()
                .zip(g.data())
                .map(|(&a, &b)| (i64::from(a) - i64::from(b)).pow(2) as u64)
                .sum::<u64>();
        }
        assert_eq!(
            segmentation_cost(&grown, &reference).unwrap().cost(),
            expected
        );
    }

    fn three_band_image() -> (Image2D, LabelMap) {
        let img = Image2D::from_fn(9, 3, |x, _| [40, 120, 220][x / 3]).unwrap();
        let lab = LabelMap::from_image(&Image2D::from_fn(9, 3, |x, _| [1, 2, 3][x / 3]).unwrap())
            .unwrap();
        (img, lab)
    }

    #[test]
    fn fitness_zero_for_perfect_seeds() {
        let (img, lab) = three_band_image();
        let seeds = [
            Seed::new(Class::Gm, Point::new(4, 1)),
            Seed::new(Class::Wm, Point::new(7, 0)),
            Seed::new(Class::Csf, Point::new(0, 2)),
        ];
        assert_eq!(
            fitness(&img, &seeds, &lab, &GrowthSettings::default()).unwrap(),
            FitnessValue(0)
        );
    }

    #[test]
    fn fitness_charges_worst_cost_for_rejected_seed() {
        let (img, lab) = three_band_image();
        // the WM seed sits inside the GM region grown first
        let seeds = [
            Seed::new(Class::Gm, Point::new(4, 1)),
            Seed::new(Class::Wm, Point::new(3, 0)),
        ];
        assert_eq!(
            fitness(&img, &seeds, &lab, &GrowthSettings::default()).unwrap(),
            FitnessValue::worst(9, 3)
        );
    }

    #[test]
    fn fitness_rejects_dimension_mismatch() {
        let (img, _) = three_band_image();
        let other = LabelMap::background(3, 3).unwrap();
        assert!(matches!(
            fitness(&img, &[], &other, &GrowthSettings::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = [
            GaConfig {
                population_size: 1,
                elite_count: 0,
                ..GaConfig::default()
            },
            GaConfig {
                elite_count: 30,
                ..GaConfig::default()
            },
            GaConfig {
                elite_count: 0,
                ..GaConfig::default()
            },
            GaConfig {
                mutation_rate: 1.5,
                ..GaConfig::default()
            },
            GaConfig {
                tournament_size: 0,
                ..GaConfig::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn single_choice_pool_returns_it() {
        let (img, lab) = three_band_image();
        let pool = CandidatePool::new([
            vec![Point::new(1, 1)],
            vec![Point::new(4, 1)],
            vec![Point::new(7, 1)],
        ])
        .unwrap();
        let evo = evolve(
            &img,
            &pool,
            &lab,
            &GrowthSettings::default(),
            &GaConfig::default(),
        )
        .unwrap();
        assert_eq!(evo.best.genes(), [0, 0, 0]);
        assert_eq!(evo.best_cost, FitnessValue(0));
        assert!(evo
            .history
            .iter()
            .all(|g| g.best_cost == 0 && g.mean_cost == 0.0));
    }

    fn noisy_case() -> (Image2D, LabelMap, CandidatePool) {
        let spec = crate::PhantomSpec {
            width: 24,
            height: 24,
            noise_std: 14.0,
            rng_seed: 5,
            ..Default::default()
        };
        let (img, lab) = crate::generate(&spec).unwrap();
        let pool = pool_from_thresholds(&img, &ThresholdBands::default()).unwrap();
        (img, lab, pool)
    }

    #[test]
    fn no_variation_keeps_initial_best() {
        let (img, lab, pool) = noisy_case();
        let config = GaConfig {
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            elite_count: 29,
            max_generations: 15,
            stagnation_patience: 100,
            ..GaConfig::default()
        };
        let evo = evolve(&img, &pool, &lab, &GrowthSettings::default(), &config).unwrap();
        let first = evo.history[0].best_cost;
        assert!(evo.history.iter().all(|g| g.best_cost == first));
        assert_eq!(evo.history.len(), 15);
    }

    #[test]
    fn evolution_is_deterministic_and_monotone() {
        let (img, lab, pool) = noisy_case();
        let config = GaConfig {
            rng_seed: 11,
            ..GaConfig::default()
        };
        let a = evolve(&img, &pool, &lab, &GrowthSettings::default(), &config).unwrap();
        let b = evolve(&img, &pool, &lab, &GrowthSettings::default(), &config).unwrap();
        assert_eq!(a, b);
        assert!(a
            .history
            .windows(2)
            .all(|w| w[1].best_cost <= w[0].best_cost));
        assert_eq!(a.history.last().unwrap().best_cost, a.best_cost.0);
        let seeds = a.best.seeds(&pool, &GrowthSettings::default().class_order);
        assert_eq!(
            fitness(&img, &seeds, &lab, &GrowthSettings::default()).unwrap(),
            a.best_cost
        );
    }

    #[test]
    fn stagnation_stops_early() {
        let (img, lab) = three_band_image();
        let pool = pool_from_thresholds(&img, &ThresholdBands::default()).unwrap();
        let config = GaConfig {
            stagnation_patience: 3,
            max_generations: 100,
            ..GaConfig::default()
        };
        let evo = evolve(&img, &pool, &lab, &GrowthSettings::default(), &config).unwrap();
        assert_eq!(evo.best_cost, FitnessValue(0));
        assert!(evo.history.len() <= 4, "{}", evo.history.len());
    }

    #[test]
    fn genes_stay_inside_pool() {
        let (img, lab, pool) = noisy_case();
        let config = GaConfig {
            mutation_rate: 0.9,
            rng_seed: 3,
            ..GaConfig::default()
        };
        let mut rng = crate::seeded_rng(1);
        let mut population: Vec<SeedChromosome> = (0..30)
            .map(|_| SeedChromosome::random(&pool, &mut rng))
            .collect();
        let costs: Vec<FitnessValue> = population
            .iter()
            .map(|c| {
                fitness(
                    &img,
                    &c.seeds(&pool, &GrowthSettings::default().class_order),
                    &lab,
                    &GrowthSettings::default(),
                )
                .unwrap()
            })
            .collect();
        for _ in 0..20 {
            population = next_generation(&population, &costs, &pool, &config, &mut rng);
            for c in &population {
                assert!(SeedChromosome::new(c.genes(), &pool).is_ok());
                let p = c.points(&pool);
                assert!(p[0] != p[1] && p[1] != p[2] && p[0] != p[2]);
            }
        }
    }

    #[test]
    fn pool_outside_image_is_rejected() {
        let (img, lab) = three_band_image();
        let pool = CandidatePool::new([
            vec![Point::new(40, 1)],
            vec![Point::new(4, 1)],
            vec![Point::new(7, 1)],
        ])
        .unwrap();
        let settings = GrowthSettings::new(GrowthCriterion::default(), Neighborhood::Four);
        assert!(matches!(
            evolve(&img, &pool, &lab, &settings, &GaConfig::default()),
            Err(Error::SeedOutOfBounds { .. })
        ));
    }
}
