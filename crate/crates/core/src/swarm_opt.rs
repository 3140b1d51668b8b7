//! Population-based optimizers over box-bounded continuous domains:
//! particle swarm (PSO), wolf pack (WPA) and grey wolf (GWO).
//!
//! All three minimize. Every run is driven by one seeded generator consumed in
//! a fixed order, so a given configuration always produces the same trace.
//! Positions are clamped to the search box after every move.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, UnitDraw};
use crate::{Error, Result};

/// Axis-aligned box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::domain("search space needs at least one dimension"));
        }
        if lower.len() != upper.len() {
            return Err(Error::domain("lower and upper bounds differ in length"));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l < u && l.is_finite() && u.is_finite()))
        {
            return Err(Error::domain("lower must be < upper on every axis"));
        }
        Ok(Self { lower, upper })
    }

    /// Hypercube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn span(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(d, v)| *v >= self.lower[d] && *v <= self.upper[d])
    }

    /// Clamps in place; returns a mask of the axes that were clipped.
    pub fn clamp(&self, x: &mut [f64]) -> Vec<bool> {
        x.iter_mut()
            .enumerate()
            .map(|(d, v)| {
                let c = v.clamp(self.lower[d], self.upper[d]);
                let hit = c != *v;
                *v = c;
                hit
            })
            .collect()
    }

    pub fn sample<R: UnitDraw + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|d| self.lower[d] + rng.unit() * self.span(d))
            .collect()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "dimension mismatch: expected {}, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

/// Result of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerRun {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Best-so-far value after each iteration; non-increasing.
    pub trace: Vec<f64>,
    pub iterations_used: usize,
}

pub mod benchmarks {
    //! Standard test functions, all with minimum 0 at the origin.

    use std::f64::consts::TAU;

    pub fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    pub fn rastrigin(x: &[f64]) -> f64 {
        10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (TAU * v).cos()).sum::<f64>()
    }
}

fn evaluate_all<F>(fitness: &F, positions: &[Vec<f64>], parallel: bool) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    // par_iter().collect() preserves order, so traces do not depend on the pool size.
    if parallel {
        positions.par_iter().map(|x| fitness(x)).collect()
    } else {
        positions.iter().map(|x| fitness(x)).collect()
    }
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v < values[best] { i } else { best })
}

fn check_population(positions: &[Vec<f64>], space: &SearchSpace) -> Result<()> {
    positions.iter().try_for_each(|x| space.check(x))
}

// ---------------------------------------------------------------------------
// Particle swarm

/// PSO settings.
///
/// The velocity update is
/// `v ← w·v + c1·R1∘(p_i − x) + c2·R2∘(p_g − x)`, then `x ← x + v`.
/// With `social_random = false` the social term carries no random factor, and
/// with `inertia = 1` the update is the original undamped form; see
/// [`PsoConfig::original`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub n_particles: usize,
    /// Personal learning factor.
    pub c1: f64,
    /// Social learning factor.
    pub c2: f64,
    pub inertia: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub social_random: bool,
    /// Stop as soon as the best value is at or below this.
    pub target_value: Option<f64>,
    pub parallel: bool,
}

impl Default for PsoConfig {
    /// Constriction-equivalent coefficients (w = 0.7298, c1 = c2 = 1.49618).
    fn default() -> Self {
        Self {
            n_particles: 40,
            c1: 1.496_18,
            c2: 1.496_18,
            inertia: 0.729_8,
            max_iters: 500,
            seed: 0,
            social_random: true,
            target_value: None,
            parallel: false,
        }
    }
}

impl PsoConfig {
    /// Undamped update with no random factor on the social term.
    pub fn original() -> Self {
        Self {
            c1: 2.0,
            c2: 2.0,
            inertia: 1.0,
            social_random: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::domain("n_particles must be >= 2"));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return Err(Error::domain("c1 and c2 must be >= 0"));
        }
        if !(self.inertia >= 0.0 && self.inertia.is_finite()) {
            return Err(Error::domain("inertia must be >= 0"));
        }
        Ok(())
    }
}

/// Advances every particle by one velocity/position update.
///
/// Draw order per particle and axis: `R1`, then `R2` (when
/// `social_random`). Velocities are limited to one box span per axis; an axis
/// that hits the box wall is clamped and its velocity zeroed.
pub fn pso_step<R: UnitDraw + ?Sized>(
    positions: &mut [Vec<f64>],
    velocities: &mut [Vec<f64>],
    personal_bests: &[Vec<f64>],
    global_best: &[f64],
    config: &PsoConfig,
    space: &SearchSpace,
    rng: &mut R,
) -> Result<()> {
    if positions.len() != velocities.len() || positions.len() != personal_bests.len() {
        return Err(Error::domain("population arrays differ in length"));
    }
    check_population(positions, space)?;
    check_population(velocities, space)?;
    check_population(personal_bests, space)?;
    space.check(global_best)?;

    for ((x, v), p) in positions.iter_mut().zip(velocities.iter_mut()).zip(personal_bests) {
        for d in 0..space.dim() {
            let r1 = rng.unit();
            let r2 = if config.social_random { rng.unit() } else { 1.0 };
            let vmax = space.span(d);
            let next =
                config.inertia * v[d] + config.c1 * r1 * (p[d] - x[d]) + config.c2 * r2 * (global_best[d] - x[d]);
            v[d] = next.clamp(-vmax, vmax);
            x[d] += v[d];
        }
        for (d, hit) in space.clamp(x).into_iter().enumerate() {
            if hit {
                v[d] = 0.0;
            }
        }
    }
    Ok(())
}

pub fn pso_optimize<F>(fitness: F, space: &SearchSpace, config: &PsoConfig) -> Result<OptimizerRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let dim = space.dim();

    let mut positions = Vec::with_capacity(config.n_particles);
    let mut velocities = Vec::with_capacity(config.n_particles);
    for _ in 0..config.n_particles {
        positions.push(space.sample(&mut rng));
        // Initial velocities uniform in ±10% of the span.
        velocities.push(
            (0..dim)
                .map(|d| (2.0 * rng.unit() - 1.0) * 0.1 * space.span(d))
                .collect::<Vec<_>>(),
        );
    }

    let values = evaluate_all(&fitness, &positions, config.parallel);
    let mut pbest = positions.clone();
    let mut pbest_value = values;
    let g = argmin(&pbest_value);
    let mut gbest = pbest[g].clone();
    let mut gbest_value = pbest_value[g];

    let mut trace = Vec::with_capacity(config.max_iters);
    for _ in 0..config.max_iters {
        pso_step(&mut positions, &mut velocities, &pbest, &gbest, config, space, &mut rng)?;
        let values = evaluate_all(&fitness, &positions, config.parallel);
        for (i, v) in values.into_iter().enumerate() {
            if v < pbest_value[i] {
                pbest_value[i] = v;
                pbest[i].clone_from(&positions[i]);
            }
        }
        let g = argmin(&pbest_value);
        if pbest_value[g] < gbest_value {
            gbest_value = pbest_value[g];
            gbest.clone_from(&pbest[g]);
        }
        trace.push(gbest_value);
        if config.target_value.is_some_and(|t| gbest_value <= t) {
            break;
        }
    }

    Ok(OptimizerRun {
        best_position: gbest,
        best_value: gbest_value,
        iterations_used: trace.len(),
        trace,
    })
}

// ---------------------------------------------------------------------------
// Grey wolf

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GwoConfig {
    pub n_wolves: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for GwoConfig {
    fn default() -> Self {
        Self {
            n_wolves: 30,
            max_iters: 500,
            seed: 0,
            parallel: false,
        }
    }
}

impl GwoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_wolves < 4 {
            return Err(Error::domain(
                "n_wolves must be >= 4 (alpha, beta, delta and one omega)",
            ));
        }
        Ok(())
    }
}

/// Moves every wolf toward the three leaders.
///
/// For each wolf and axis, and for each leader `L` in the order α, β, δ, two
/// draws `r1, r2` give `A = 2a·r1 − a` and `C = 2·r2`; then
/// `D = |C·L − x|` and `X_L = L − A·D`. The new coordinate is the mean of the
/// three `X_L`.
pub fn gwo_step<R: UnitDraw + ?Sized>(
    positions: &mut [Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    delta: &[f64],
    a: f64,
    space: &SearchSpace,
    rng: &mut R,
) -> Result<()> {
    if !(0.0..=2.0).contains(&a) {
        return Err(Error::domain(format!("a must lie in [0, 2], got {a}")));
    }
    check_population(positions, space)?;
    for leader in [alpha, beta, delta] {
        space.check(leader)?;
    }
    for x in positions.iter_mut() {
        for d in 0..space.dim() {
            let mut sum = 0.0;
            for leader in [alpha, beta, delta] {
                let r1 = rng.unit();
                let r2 = rng.unit();
                let big_a = 2.0 * a * r1 - a;
                let big_c = 2.0 * r2;
                let dist = (big_c * leader[d] - x[d]).abs();
                sum += leader[d] - big_a * dist;
            }
            x[d] = sum / 3.0;
        }
        space.clamp(x);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
struct Ranked {
    position: Vec<f64>,
    value: f64,
}

/// Best three of the previous leaders and the current pack, previous leaders
/// winning ties.
fn rank_leaders(previous: &[Ranked], positions: &[Vec<f64>], values: &[f64]) -> Vec<Ranked> {
    let mut pool: Vec<Ranked> = previous.to_vec();
    pool.extend(positions.iter().zip(values).map(|(p, v)| Ranked {
        position: p.clone(),
        value: *v,
    }));
    pool.sort_by(|a, b| a.value.total_cmp(&b.value));
    pool.truncate(3);
    pool
}

pub fn gwo_optimize<F>(fitness: F, space: &SearchSpace, config: &GwoConfig) -> Result<OptimizerRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let mut positions: Vec<Vec<f64>> = (0..config.n_wolves).map(|_| space.sample(&mut rng)).collect();
    let values = evaluate_all(&fitness, &positions, config.parallel);
    let mut leaders = rank_leaders(&[], &positions, &values);

    let mut trace = Vec::with_capacity(config.max_iters);
    for t in 0..config.max_iters {
        let a = 2.0 * (1.0 - t as f64 / config.max_iters as f64);
        gwo_step(
            &mut positions,
            &leaders[0].position,
            &leaders[1].position,
            &leaders[2].position,
            a,
            space,
            &mut rng,
        )?;
        let values = evaluate_all(&fitness, &positions, config.parallel);
        leaders = rank_leaders(&leaders, &positions, &values);
        trace.push(leaders[0].value);
    }

    let alpha = leaders.swap_remove(0);
    Ok(OptimizerRun {
        best_position: alpha.position,
        best_value: alpha.value,
        iterations_used: trace.len(),
        trace,
    })
}

// ---------------------------------------------------------------------------
// Wolf pack

/// WPA settings.
///
/// Step sizes per axis derive from the step coefficient `S`:
/// scouting `S·span/dim`, calling four times that, besieging half of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WpaConfig {
    /// Pack size `N`.
    pub n_wolves: usize,
    /// `k_max`
    pub max_iters: usize,
    /// `S`
    pub step_coeff: f64,
    /// `L_near`: calling stops once a wolf is this close (Euclidean) to the lead.
    pub distance_threshold: f64,
    /// `T_max`: scouting probes per wolf and iteration.
    pub scout_max_repeats: usize,
    /// `β`: fraction of the pack renewed each iteration.
    pub renew_fraction: f64,
    pub seed: u64,
}

impl Default for WpaConfig {
    fn default() -> Self {
        Self {
            n_wolves: 30,
            max_iters: 500,
            step_coeff: 0.05,
            distance_threshold: 0.5,
            scout_max_repeats: 10,
            renew_fraction: 0.2,
            seed: 0,
        }
    }
}

impl WpaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_wolves < 3 {
            return Err(Error::domain("n_wolves must be >= 3"));
        }
        if !(self.renew_fraction > 0.0 && self.renew_fraction < 1.0) {
            return Err(Error::domain(format!(
                "renew_fraction must lie in (0, 1), got {}",
                self.renew_fraction
            )));
        }
        if !(self.step_coeff > 0.0 && self.step_coeff.is_finite()) {
            return Err(Error::domain("step_coeff must be > 0"));
        }
        if !(self.distance_threshold > 0.0 && self.distance_threshold.is_finite()) {
            return Err(Error::domain("distance_threshold must be > 0"));
        }
        if self.scout_max_repeats == 0 || self.max_iters == 0 {
            return Err(Error::domain("scout_max_repeats and max_iters must be > 0"));
        }
        Ok(())
    }

    /// Number of wolves replaced per renewal, `⌈β·N⌉`, never the whole pack.
    pub fn renew_count(&self) -> usize {
        ((self.renew_fraction * self.n_wolves as f64).ceil() as usize).min(self.n_wolves - 1)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Pack state for the wolf pack algorithm.
///
/// Smell concentration is the negated fitness, so "stronger smell" means a
/// lower objective value. One call to [`WolfPack::iterate`] runs scouting,
/// calling, besieging, the winner-take-all lead update and the renewal of the
/// weakest wolves.
#[derive(Debug, Clone)]
pub struct WolfPack {
    config: WpaConfig,
    space: SearchSpace,
    wolves: Vec<Vec<f64>>,
    values: Vec<f64>,
    lead: usize,
    scout_step: Vec<f64>,
}

impl WolfPack {
    pub fn new<F, R>(fitness: &F, space: &SearchSpace, config: &WpaConfig, rng: &mut R) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
        R: UnitDraw + ?Sized,
    {
        config.validate()?;
        let wolves: Vec<Vec<f64>> = (0..config.n_wolves).map(|_| space.sample(rng)).collect();
        let values: Vec<f64> = wolves.iter().map(|w| fitness(w)).collect();
        let dim = space.dim() as f64;
        let scout_step = (0..space.dim())
            .map(|d| config.step_coeff * space.span(d) / dim)
            .collect();
        Ok(Self {
            lead: argmin(&values),
            config: config.clone(),
            space: space.clone(),
            wolves,
            values,
            scout_step,
        })
    }

    pub fn len(&self) -> usize {
        self.wolves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wolves.is_empty()
    }

    pub fn wolves(&self) -> &[Vec<f64>] {
        &self.wolves
    }

    pub fn lead_position(&self) -> &[f64] {
        &self.wolves[self.lead]
    }

    pub fn lead_value(&self) -> f64 {
        self.values[self.lead]
    }

    fn try_take_lead(&mut self, i: usize) {
        if self.values[i] < self.values[self.lead] {
            self.lead = i;
        }
    }

    fn scout<F, R>(&mut self, fitness: &F, rng: &mut R)
    where
        F: Fn(&[f64]) -> f64,
        R: UnitDraw + ?Sized,
    {
        for i in 0..self.wolves.len() {
            if i == self.lead {
                continue;
            }
            for _ in 0..self.config.scout_max_repeats {
                if self.values[i] < self.values[self.lead] {
                    break;
                }
                let mut probe = self.wolves[i].clone();
                for (d, p) in probe.iter_mut().enumerate() {
                    *p += self.scout_step[d] * (2.0 * rng.unit() - 1.0);
                }
                self.space.clamp(&mut probe);
                let v = fitness(&probe);
                if v < self.values[i] {
                    self.wolves[i] = probe;
                    self.values[i] = v;
                }
            }
            self.try_take_lead(i);
        }
    }

    fn call<F: Fn(&[f64]) -> f64>(&mut self, fitness: &F) {
        let near = self.config.distance_threshold;
        for i in 0..self.wolves.len() {
            if i == self.lead {
                continue;
            }
            // Each move shrinks every axis gap by a fixed step or closes it, so
            // the loop ends within ceil(span / step) moves.
            while euclidean(&self.wolves[i], &self.wolves[self.lead]) > near {
                let lead_pos = self.wolves[self.lead].clone();
                for (d, x) in self.wolves[i].iter_mut().enumerate() {
                    let gap = lead_pos[d] - *x;
                    *x += gap.signum() * gap.abs().min(4.0 * self.scout_step[d]);
                }
                self.values[i] = fitness(&self.wolves[i]);
                if self.values[i] < self.values[self.lead] {
                    self.lead = i;
                    break;
                }
            }
        }
    }

    fn besiege<F, R>(&mut self, fitness: &F, rng: &mut R)
    where
        F: Fn(&[f64]) -> f64,
        R: UnitDraw + ?Sized,
    {
        let lead_pos = self.wolves[self.lead].clone();
        for i in 0..self.wolves.len() {
            if i == self.lead {
                continue;
            }
            let mut probe = self.wolves[i].clone();
            for (d, x) in probe.iter_mut().enumerate() {
                let reach = (lead_pos[d] - *x).abs().min(0.5 * self.scout_step[d]);
                *x += (2.0 * rng.unit() - 1.0) * reach;
            }
            self.space.clamp(&mut probe);
            let v = fitness(&probe);
            if v < self.values[i] {
                self.wolves[i] = probe;
                self.values[i] = v;
            }
        }
    }

    /// Replaces the `⌈β·N⌉` weakest wolves (never the lead) with uniform
    /// samples in a box of half-width `L_near` around the lead.
    fn renew<F, R>(&mut self, fitness: &F, rng: &mut R)
    where
        F: Fn(&[f64]) -> f64,
        R: UnitDraw + ?Sized,
    {
        let mut order: Vec<usize> = (0..self.wolves.len()).filter(|&i| i != self.lead).collect();
        // Worst first; index breaks ties so the choice is deterministic.
        order.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]).then(a.cmp(&b)));
        let lead_pos = self.wolves[self.lead].clone();
        let half = self.config.distance_threshold;
        for &i in order.iter().take(self.config.renew_count()) {
            let mut w: Vec<f64> = lead_pos.iter().map(|c| c + half * (2.0 * rng.unit() - 1.0)).collect();
            self.space.clamp(&mut w);
            self.values[i] = fitness(&w);
            self.wolves[i] = w;
        }
    }

    pub fn iterate<F, R>(&mut self, fitness: &F, rng: &mut R)
    where
        F: Fn(&[f64]) -> f64,
        R: UnitDraw + ?Sized,
    {
        self.scout(fitness, rng);
        self.call(fitness);
        self.besiege(fitness, rng);
        for i in 0..self.wolves.len() {
            self.try_take_lead(i);
        }
        self.renew(fitness, rng);
        for i in 0..self.wolves.len() {
            self.try_take_lead(i);
        }
    }
}

pub fn wpa_optimize<F>(fitness: F, space: &SearchSpace, config: &WpaConfig) -> Result<OptimizerRun>
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = rng_from_seed(config.seed);
    let mut pack = WolfPack::new(&fitness, space, config, &mut rng)?;
    let mut trace = Vec::with_capacity(config.max_iters);
    for _ in 0..config.max_iters {
        pack.iterate(&fitness, &mut rng);
        trace.push(pack.lead_value());
    }
    Ok(OptimizerRun {
        best_position: pack.lead_position().to_vec(),
        best_value: pack.lead_value(),
        iterations_used: trace.len(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::benchmarks::sphere;
    use super::*;

    /// Replays a fixed list of uniform draws.
    struct Scripted(std::vec::IntoIter<f64>);

    impl Scripted {
        fn new(v: &[f64]) -> Self {
            Self(Vec::from(v).into_iter())
        }
    }

    impl UnitDraw for Scripted {
        fn unit(&mut self) -> f64 {
            self.0.next().expect("script exhausted")
        }
    }

    fn is_monotone(trace: &[f64]) -> bool {
        trace.windows(2).all(|w| w[1] <= w[0])
    }

    #[test]
    fn search_space_validation() {
        assert!(SearchSpace::new(vec![], vec![]).is_err());
        assert!(SearchSpace::new(vec![0.0], vec![0.0]).is_err());
        assert!(SearchSpace::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let s = SearchSpace::cube(2, -1.0, 1.0).unwrap();
        let mut x = vec![2.0, -0.5];
        assert_eq!(s.clamp(&mut x), vec![true, false]);
        assert_eq!(x, vec![1.0, -0.5]);
    }

    #[test]
    fn pso_fixed_point_at_global_best() {
        let space = SearchSpace::cube(2, -5.0, 5.0).unwrap();
        let g = vec![1.0, -2.0];
        let mut pos = vec![g.clone(); 3];
        let mut vel = vec![vec![0.0; 2]; 3];
        let pbest = pos.clone();
        let mut rng = rng_from_seed(1);
        pso_step(&mut pos, &mut vel, &pbest, &g, &PsoConfig::default(), &space, &mut rng).unwrap();
        assert!(pos.iter().all(|p| *p == g));
    }

    #[test]
    fn pso_pure_drift() {
        let space = SearchSpace::cube(1, -10.0, 10.0).unwrap();
        let cfg = PsoConfig {
            c1: 0.0,
            c2: 0.0,
            inertia: 1.0,
            ..PsoConfig::default()
        };
        let mut pos = vec![vec![0.0]];
        let mut vel = vec![vec![1.0]];
        let mut rng = rng_from_seed(3);
        for step in 1..=5 {
            let pb = pos.clone();
            pso_step(&mut pos, &mut vel, &pb, &[0.0], &cfg, &space, &mut rng).unwrap();
            assert_eq!(pos[0][0], step as f64);
        }
    }

    #[test]
    fn pso_scalar_replay() {
        let space = SearchSpace::cube(1, -10.0, 10.0).unwrap();
        let cfg = PsoConfig {
            c1: 1.5,
            c2: 2.0,
            inertia: 0.5,
            ..PsoConfig::default()
        };
        let (x0, v0, p, g) = (1.0, 0.4, 2.0, -1.0);
        let (r1, r2) = (0.25, 0.75);
        let mut pos = vec![vec![x0]];
        let mut vel = vec![vec![v0]];
        pso_step(
            &mut pos,
            &mut vel,
            &[vec![p]],
            &[g],
            &cfg,
            &space,
            &mut Scripted::new(&[r1, r2]),
        )
        .unwrap();
        // 0.5*0.4 + 1.5*0.25*(2-1) + 2*0.75*(-1-1) = 0.2 + 0.375 - 3.0
        let v1 = -2.425;
        assert!((vel[0][0] - v1).abs() < 1e-12);
        assert!((pos[0][0] - (x0 + v1)).abs() < 1e-12);

        // Original form: no R2 draw at all, so a single scripted value suffices.
        let orig = PsoConfig {
            inertia: 1.0,
            social_random: false,
            ..cfg
        };
        let mut pos = vec![vec![x0]];
        let mut vel = vec![vec![v0]];
        pso_step(
            &mut pos,
            &mut vel,
            &[vec![p]],
            &[g],
            &orig,
            &space,
            &mut Scripted::new(&[r1]),
        )
        .unwrap();
        assert!((vel[0][0] - (0.4 + 0.375 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn pso_dimension_mismatch() {
        let space = SearchSpace::cube(2, -1.0, 1.0).unwrap();
        let mut pos = vec![vec![0.0]];
        let mut vel = vec![vec![0.0]];
        let r = pso_step(
            &mut pos,
            &mut vel,
            &[vec![0.0]],
            &[0.0],
            &PsoConfig::default(),
            &space,
            &mut rng_from_seed(0),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn pso_constant_fitness() {
        let space = SearchSpace::cube(3, -1.0, 1.0).unwrap();
        let cfg = PsoConfig {
            max_iters: 5,
            ..PsoConfig::default()
        };
        let run = pso_optimize(|_| 7.5, &space, &cfg).unwrap();
        assert_eq!(run.trace[0], 7.5);
        assert_eq!(run.best_value, 7.5);
    }

    #[test]
    fn pso_target_stops_early() {
        let space = SearchSpace::cube(2, -5.0, 5.0).unwrap();
        let cfg = PsoConfig {
            target_value: Some(1e-2),
            ..PsoConfig::default()
        };
        let run = pso_optimize(sphere, &space, &cfg).unwrap();
        assert!(run.iterations_used < cfg.max_iters);
        assert!(run.best_value <= 1e-2);
    }

    #[test]
    fn pso_parallel_matches_serial() {
        let space = SearchSpace::cube(4, -5.0, 5.0).unwrap();
        let cfg = PsoConfig {
            max_iters: 50,
            seed: 11,
            ..PsoConfig::default()
        };
        let a = pso_optimize(sphere, &space, &cfg).unwrap();
        let b = pso_optimize(sphere, &space, &PsoConfig { parallel: true, ..cfg }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gwo_annihilated_distance() {
        let space = SearchSpace::cube(2, -5.0, 5.0).unwrap();
        let l = vec![1.0, 2.0];
        let mut pos = vec![l.clone()];
        // r1 = 0.5 gives A = 0 for every leader; r2 is irrelevant then.
        let draws = [0.5, 0.3].repeat(6);
        gwo_step(&mut pos, &l, &l, &l, 1.7, &space, &mut Scripted::new(&draws)).unwrap();
        assert_eq!(pos[0], l);
    }

    #[test]
    fn gwo_scalar_replay() {
        let space = SearchSpace::cube(1, -10.0, 10.0).unwrap();
        let (xa, xb, xd, x) = (1.0, 2.0, -1.0, 4.0);
        let a = 1.2;
        let draws = [0.1, 0.9, 0.6, 0.2, 0.8, 0.5];
        let mut pos = vec![vec![x]];
        gwo_step(&mut pos, &[xa], &[xb], &[xd], a, &space, &mut Scripted::new(&draws)).unwrap();
        // Hand evaluation of A = 2a r1 - a, C = 2 r2, D = |C L - x|, X = L - A D.
        let x1 = xa - (2.0 * a * 0.1 - a) * (2.0 * 0.9 * xa - x).abs();
        let x2 = xb - (2.0 * a * 0.6 - a) * (2.0 * 0.2 * xb - x).abs();
        let x3 = xd - (2.0 * a * 0.8 - a) * (2.0 * 0.5 * xd - x).abs();
        assert!((pos[0][0] - (x1 + x2 + x3) / 3.0).abs() < 1e-12);
        // X1 = 3.112, X2 = 1.232, X3 = -4.6
        assert!((pos[0][0] - (-0.256 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn gwo_zero_a_averages_leaders() {
        let space = SearchSpace::cube(2, -5.0, 5.0).unwrap();
        let (xa, xb, xd) = (vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]);
        let mut pos = vec![vec![3.0, 3.0], vec![-4.0, 2.0]];
        gwo_step(&mut pos, &xa, &xb, &xd, 0.0, &space, &mut rng_from_seed(5)).unwrap();
        for p in &pos {
            assert!((p[0] - 0.0).abs() < 1e-12 && (p[1] - 0.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gwo_rejects_bad_a() {
        let space = SearchSpace::cube(1, -1.0, 1.0).unwrap();
        let mut pos = vec![vec![0.0]];
        assert!(gwo_step(&mut pos, &[0.0], &[0.0], &[0.0], 2.5, &space, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn gwo_constant_fitness_and_config() {
        let space = SearchSpace::cube(2, -1.0, 1.0).unwrap();
        let cfg = GwoConfig {
            max_iters: 4,
            ..GwoConfig::default()
        };
        let run = gwo_optimize(|_| -3.0, &space, &cfg).unwrap();
        assert_eq!(run.best_value, -3.0);
        assert!(GwoConfig { n_wolves: 3, ..cfg }.validate().is_err());
    }

    #[test]
    fn gwo_trace_monotone() {
        let space = SearchSpace::cube(5, -5.0, 5.0).unwrap();
        let cfg = GwoConfig {
            max_iters: 100,
            seed: 4,
            ..GwoConfig::default()
        };
        let run = gwo_optimize(benchmarks::rastrigin, &space, &cfg).unwrap();
        assert!(is_monotone(&run.trace));
        assert_eq!(run.trace.last().copied(), Some(run.best_value));
    }

    #[test]
    fn wpa_config_validation() {
        let base = WpaConfig::default();
        assert!(base.validate().is_ok());
        assert!(WpaConfig {
            renew_fraction: 1.5,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(WpaConfig {
            renew_fraction: 0.0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(WpaConfig {
            n_wolves: 2,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert_eq!(
            WpaConfig {
                n_wolves: 10,
                renew_fraction: 0.25,
                ..base
            }
            .renew_count(),
            3
        );
    }

    #[test]
    fn wpa_constant_fitness_keeps_lead() {
        let space = SearchSpace::cube(3, -2.0, 2.0).unwrap();
        let cfg = WpaConfig {
            max_iters: 3,
            seed: 8,
            ..WpaConfig::default()
        };
        let mut rng = rng_from_seed(cfg.seed);
        let f = |_: &[f64]| 1.0;
        let mut pack = WolfPack::new(&f, &space, &cfg, &mut rng).unwrap();
        let lead0 = pack.lead_position().to_vec();
        for _ in 0..cfg.max_iters {
            pack.iterate(&f, &mut rng);
            assert_eq!(pack.lead_position(), &lead0[..]);
            assert_eq!(pack.len(), cfg.n_wolves);
        }
    }

    #[test]
    fn wpa_renewal_keeps_size_and_bounds() {
        let space = SearchSpace::cube(4, -3.0, 3.0).unwrap();
        let cfg = WpaConfig {
            n_wolves: 12,
            seed: 2,
            ..WpaConfig::default()
        };
        let mut rng = rng_from_seed(cfg.seed);
        let mut pack = WolfPack::new(&sphere, &space, &cfg, &mut rng).unwrap();
        for _ in 0..20 {
            pack.iterate(&sphere, &mut rng);
            assert_eq!(pack.len(), 12);
            assert!(pack.wolves().iter().all(|w| space.contains(w)));
        }
    }
}
