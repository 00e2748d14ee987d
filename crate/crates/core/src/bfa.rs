//! Bacterial foraging search over a bounded box, maximizing.
//!
//! Loop nesting per outer pass (repeated `n_total` times):
//!
//! ```text
//! for elimination-dispersal in 0..n_elimination
//!     for reproduction in 0..n_reproduction
//!         for chemotaxis in 0..n_chemotactic
//!             for each bacterium: swim_loop
//!         reproduce
//!     eliminate_disperse
//! ```
//!
//! All randomness comes from one `ChaCha8Rng` seeded with [`BfaConfig::seed`],
//! so a run is reproducible bit for bit. The incumbent is tracked on the raw
//! fitness; the swarming signal only shapes the bacteria's moves.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Interval, Scalar};

/// The generator behind every run.
pub type BfaRng = ChaCha8Rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BfaError {
    #[error("invalid BFA configuration: {0}")]
    InvalidConfig(String),
    #[error("reproduction needs an even population, got {0}")]
    OddPopulation(usize),
    #[error("fitness is not finite at {position:?}")]
    NonFiniteFitness { position: Vec<f64> },
    #[error("fitness function declares {declared} dimensions but {bounds} bounds")]
    DimensionMismatch { declared: usize, bounds: usize },
}

/// Objective consumed by the solver. Larger is better.
pub trait FitnessFunction<T: Scalar>: Sync {
    fn dimension(&self) -> usize;
    fn bounds(&self) -> &[Interval<T>];
    /// Must be pure. Non-finite values abort the run.
    fn evaluate(&self, position: &[T]) -> T;
}

impl<T: Scalar, F: FitnessFunction<T> + ?Sized> FitnessFunction<T> for &F {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn bounds(&self) -> &[Interval<T>] {
        (**self).bounds()
    }
    fn evaluate(&self, position: &[T]) -> T {
        (**self).evaluate(position)
    }
}

/// What happens to a coordinate that steps outside its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryRule {
    #[default]
    Clamp,
    Reflect,
}

/// Solver parameters. Defaults follow the published parameter table where it
/// has a value; `n_chemotactic`, `step_fraction` and `p_ed` are not in it.
/// The published population of 25 is odd and cannot be halved by
/// reproduction, so the default population is 26.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfaConfig {
    /// Population size S.
    pub population: usize,
    /// Optional dimension check against the fitness function.
    pub dimension: Option<usize>,
    pub n_chemotactic: usize,
    pub n_swim: usize,
    pub n_reproduction: usize,
    pub n_elimination: usize,
    /// Outer passes over the whole elimination-dispersal nest.
    pub n_total: usize,
    /// Step size per dimension as a fraction of that dimension's width.
    pub step_fraction: f64,
    pub d_att: f64,
    pub w_att: f64,
    pub h_rep: f64,
    pub w_rep: f64,
    pub p_ed: f64,
    pub seed: u64,
    /// Adds the cell-to-cell signal to the fitness the bacteria feel.
    pub swarming: bool,
    pub boundary: BoundaryRule,
}

impl Default for BfaConfig {
    fn default() -> Self {
        Self {
            population: 26,
            dimension: None,
            n_chemotactic: 4,
            n_swim: 5,
            n_reproduction: 5,
            n_elimination: 5,
            n_total: 200,
            step_fraction: 0.05,
            d_att: 0.1,
            w_att: 0.2,
            h_rep: 0.1,
            w_rep: 10.0,
            p_ed: 0.25,
            seed: 0,
            swarming: true,
            boundary: BoundaryRule::Clamp,
        }
    }
}

impl BfaConfig {
    pub fn validate(&self) -> Result<(), BfaError> {
        let bad = |m: &str| Err(BfaError::InvalidConfig(m.to_string()));
        if self.population < 2 {
            return bad("population must be >= 2");
        }
        if self.population % 2 != 0 {
            return Err(BfaError::OddPopulation(self.population));
        }
        if [
            self.n_chemotactic,
            self.n_swim,
            self.n_reproduction,
            self.n_elimination,
            self.n_total,
        ]
        .contains(&0)
        {
            return bad("all loop limits must be >= 1");
        }
        if !(self.step_fraction.is_finite() && self.step_fraction > 0.0) {
            return bad("step_fraction must be > 0");
        }
        if !(0.0..=1.0).contains(&self.p_ed) {
            return bad("p_ed must lie in [0, 1]");
        }
        for (name, v) in [
            ("d_att", self.d_att),
            ("w_att", self.w_att),
            ("h_rep", self.h_rep),
            ("w_rep", self.w_rep),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(BfaError::InvalidConfig(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Raw fitness evaluations one run performs at most.
    pub fn evaluation_budget(&self) -> u64 {
        let generations = (self.n_total * self.n_elimination * self.n_reproduction
            * self.n_chemotactic) as u64;
        let s = self.population as u64;
        s + generations * s * (1 + self.n_swim as u64)
            + (self.n_total * self.n_elimination) as u64 * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bacterium<T> {
    pub position: Vec<T>,
    /// Raw fitness at `position`.
    pub last_fitness: T,
    /// Effective fitness accumulated since the last reproduction.
    pub health: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm<T> {
    pub bacteria: Vec<Bacterium<T>>,
}

impl<T: Scalar> Swarm<T> {
    pub fn len(&self) -> usize {
        self.bacteria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bacteria.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = &[T]> {
        self.bacteria.iter().map(|b| b.position.as_slice())
    }
}

/// One trace row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TracePoint<T> {
    /// Chemotactic generations completed so far.
    pub iteration: u64,
    pub best_fitness: T,
    pub evaluations: u64,
}

/// Incumbent history, sampled once after initialisation, before every
/// reproduction and once at the end of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunTrace<T> {
    pub points: Vec<TracePoint<T>>,
    pub best_position: Vec<T>,
    pub evaluations: u64,
}

impl<T: Scalar> RunTrace<T> {
    pub const CSV_HEADER: &'static str = "iteration,best_fitness,evaluations";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.points.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.iteration, p.best_fitness, p.evaluations);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfaOutcome<T> {
    pub best_position: Vec<T>,
    pub best_fitness: T,
    pub trace: RunTrace<T>,
}

/// Uniform components on `[-1, 1]`, normalised to unit Euclidean length.
/// An all-zero draw is redrawn.
pub fn tumble_direction<T: Scalar, R: Rng + ?Sized>(dimension: usize, rng: &mut R) -> Vec<T> {
    assert!(dimension >= 1, "tumble needs at least one dimension");
    loop {
        let raw: Vec<T> = (0..dimension)
            .map(|_| T::lit(rng.random_range(-1.0..=1.0)))
            .collect();
        let norm = raw.iter().map(|&d| d * d).sum::<T>().sqrt();
        if norm > T::zero() {
            return raw.into_iter().map(|d| d / norm).collect();
        }
    }
}

fn apply_boundary<T: Scalar>(x: T, bound: &Interval<T>, rule: BoundaryRule) -> T {
    match rule {
        BoundaryRule::Clamp => bound.clamp(x),
        BoundaryRule::Reflect => {
            let reflected = if x > bound.hi {
                bound.hi - (x - bound.hi)
            } else if x < bound.lo {
                bound.lo + (bound.lo - x)
            } else {
                x
            };
            bound.clamp(reflected)
        }
    }
}

/// `theta + steps * dir` component-wise, then forced back into the box.
pub fn chemotaxis_move<T: Scalar>(
    position: &[T],
    direction: &[T],
    steps: &[T],
    bounds: &[Interval<T>],
    rule: BoundaryRule,
) -> Vec<T> {
    position
        .iter()
        .zip(direction)
        .zip(steps)
        .zip(bounds)
        .map(|(((&x, &d), &c), b)| apply_boundary(x + c * d, b, rule))
        .collect()
}

/// Per-dimension step sizes `step_fraction * width`.
pub fn step_sizes<T: Scalar>(bounds: &[Interval<T>], step_fraction: f64) -> Vec<T> {
    bounds
        .iter()
        .map(|b| b.width() * T::lit(step_fraction))
        .collect()
}

fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn signal_term<T: Scalar>(d2: T, cfg: &BfaConfig) -> T {
    -T::lit(cfg.d_att) * (-T::lit(cfg.w_att) * d2).exp()
        + T::lit(cfg.h_rep) * (-T::lit(cfg.w_rep) * d2).exp()
}

/// Attractant plus repellent potential at `pos`, summed over every
/// bacterium in the swarm.
pub fn cell_to_cell_signal<T: Scalar>(pos: &[T], swarm: &Swarm<T>, cfg: &BfaConfig) -> T {
    swarm
        .positions()
        .map(|p| signal_term(squared_distance(pos, p), cfg))
        .sum()
}

/// Signal for bacterium `index` standing at `pos`: its own swarm entry is
/// taken to be `pos`.
fn signal_for<T: Scalar>(pos: &[T], index: usize, swarm: &Swarm<T>, cfg: &BfaConfig) -> T {
    swarm
        .positions()
        .enumerate()
        .map(|(j, p)| {
            let d2 = if j == index {
                T::zero()
            } else {
                squared_distance(pos, p)
            };
            signal_term(d2, cfg)
        })
        .sum()
}

/// Raw fitness plus the swarming signal (when enabled).
pub fn effective_fitness<T: Scalar, F: FitnessFunction<T> + ?Sized>(
    pos: &[T],
    swarm: &Swarm<T>,
    f: &F,
    cfg: &BfaConfig,
) -> Result<T, BfaError> {
    let raw = checked_eval(f, pos)?;
    Ok(if cfg.swarming {
        raw + cell_to_cell_signal(pos, swarm, cfg)
    } else {
        raw
    })
}

fn checked_eval<T: Scalar, F: FitnessFunction<T> + ?Sized>(f: &F, pos: &[T]) -> Result<T, BfaError> {
    let v = f.evaluate(pos);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(BfaError::NonFiniteFitness {
            position: pos.iter().map(|x| x.to_f64_lossy()).collect(),
        })
    }
}

/// Counts raw evaluations and remembers the best raw point seen.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent<T> {
    pub position: Vec<T>,
    pub fitness: T,
    pub evaluations: u64,
}

impl<T: Scalar> Incumbent<T> {
    pub fn new() -> Self {
        Self {
            position: Vec::new(),
            fitness: T::neg_infinity(),
            evaluations: 0,
        }
    }

    fn evaluate<F: FitnessFunction<T> + ?Sized>(&mut self, f: &F, pos: &[T]) -> Result<T, BfaError> {
        let v = checked_eval(f, pos)?;
        self.evaluations += 1;
        if v > self.fitness {
            self.fitness = v;
            self.position = pos.to_vec();
        }
        Ok(v)
    }
}

impl<T: Scalar> Default for Incumbent<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Result of one bacterium's chemotactic step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwimReport {
    /// Extra steps taken in the tumble direction after the tumble itself.
    pub swims: usize,
}

/// Tumble once (always kept), then keep swimming the same direction while
/// the effective fitness improves, at most `n_swim` times.
///
/// The bacterium at `index` is updated in place; the others provide the
/// swarming signal.
pub fn swim_loop<T, F, R>(
    swarm: &mut Swarm<T>,
    index: usize,
    f: &F,
    cfg: &BfaConfig,
    steps: &[T],
    rng: &mut R,
    incumbent: &mut Incumbent<T>,
) -> Result<SwimReport, BfaError>
where
    T: Scalar,
    F: FitnessFunction<T> + ?Sized,
    R: Rng + ?Sized,
{
    let bounds = f.bounds();
    let feel = |pos: &[T], raw: T, swarm: &Swarm<T>| {
        if cfg.swarming {
            raw + signal_for(pos, index, swarm, cfg)
        } else {
            raw
        }
    };

    let start = &swarm.bacteria[index];
    let mut j_last = feel(&start.position, start.last_fitness, swarm);

    let dir = tumble_direction::<T, R>(f.dimension(), rng);
    let mut pos = chemotaxis_move(&start.position, &dir, steps, bounds, cfg.boundary);
    let mut raw = incumbent.evaluate(f, &pos)?;
    let mut j_now = feel(&pos, raw, swarm);
    let mut health = start.health + j_now;

    let mut swims = 0;
    while swims < cfg.n_swim && j_now > j_last {
        j_last = j_now;
        pos = chemotaxis_move(&pos, &dir, steps, bounds, cfg.boundary);
        raw = incumbent.evaluate(f, &pos)?;
        j_now = feel(&pos, raw, swarm);
        health = health + j_now;
        swims += 1;
    }

    let b = &mut swarm.bacteria[index];
    b.position = pos;
    b.last_fitness = raw;
    b.health = health;
    Ok(SwimReport { swims })
}

/// Healthiest half splits in two, the rest die. Ties keep the lower index.
/// Health restarts at zero.
pub fn reproduce<T: Scalar>(swarm: &Swarm<T>) -> Result<Swarm<T>, BfaError> {
    let s = swarm.len();
    if s % 2 != 0 {
        return Err(BfaError::OddPopulation(s));
    }
    let mut order: Vec<usize> = (0..s).collect();
    // Stable sort keeps index order among equal healths.
    order.sort_by(|&a, &b| {
        swarm.bacteria[b]
            .health
            .partial_cmp(&swarm.bacteria[a].health)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut next = Vec::with_capacity(s);
    for &i in &order[..s / 2] {
        let parent = Bacterium {
            health: T::zero(),
            ..swarm.bacteria[i].clone()
        };
        next.push(parent.clone());
        next.push(parent);
    }
    Ok(Swarm { bacteria: next })
}

fn random_position<T: Scalar, R: Rng + ?Sized>(bounds: &[Interval<T>], rng: &mut R) -> Vec<T> {
    bounds
        .iter()
        .map(|b| {
            let u: f64 = rng.random();
            b.lo + (b.hi - b.lo) * T::lit(u)
        })
        .collect()
}

/// Relocates each bacterium with probability `p_ed` to a uniform point in
/// the box. One uniform draw is made per bacterium whatever `p_ed` is.
/// Relocated bacteria are evaluated through `incumbent`.
pub fn eliminate_disperse<T, F, R>(
    swarm: &mut Swarm<T>,
    f: &F,
    cfg: &BfaConfig,
    rng: &mut R,
    incumbent: &mut Incumbent<T>,
) -> Result<Vec<bool>, BfaError>
where
    T: Scalar,
    F: FitnessFunction<T> + ?Sized,
    R: Rng + ?Sized,
{
    let mut mask = Vec::with_capacity(swarm.len());
    for b in &mut swarm.bacteria {
        let u: f64 = rng.random();
        let hit = u < cfg.p_ed;
        if hit {
            b.position = random_position(f.bounds(), rng);
            b.last_fitness = incumbent.evaluate(f, &b.position)?;
            b.health = T::zero();
        }
        mask.push(hit);
    }
    Ok(mask)
}

fn check_problem<T: Scalar, F: FitnessFunction<T> + ?Sized>(
    f: &F,
    cfg: &BfaConfig,
) -> Result<(), BfaError> {
    cfg.validate()?;
    let bounds = f.bounds();
    if bounds.len() != f.dimension() || f.dimension() == 0 {
        return Err(BfaError::DimensionMismatch {
            declared: f.dimension(),
            bounds: bounds.len(),
        });
    }
    if let Some(p) = cfg.dimension {
        if p != f.dimension() {
            return Err(BfaError::InvalidConfig(format!(
                "config dimension {p} but fitness function has {}",
                f.dimension()
            )));
        }
    }
    if bounds.iter().any(|b| !(b.lo.is_finite() && b.hi.is_finite() && b.lo <= b.hi)) {
        return Err(BfaError::InvalidConfig("every bound needs finite lo <= hi".into()));
    }
    Ok(())
}

/// Uniform random swarm inside the box, each member evaluated once.
pub fn initial_swarm<T, F, R>(
    f: &F,
    cfg: &BfaConfig,
    rng: &mut R,
    incumbent: &mut Incumbent<T>,
) -> Result<Swarm<T>, BfaError>
where
    T: Scalar,
    F: FitnessFunction<T> + ?Sized,
    R: Rng + ?Sized,
{
    let mut bacteria = Vec::with_capacity(cfg.population);
    for _ in 0..cfg.population {
        let position = random_position(f.bounds(), rng);
        let last_fitness = incumbent.evaluate(f, &position)?;
        bacteria.push(Bacterium {
            position,
            last_fitness,
            health: T::zero(),
        });
    }
    Ok(Swarm { bacteria })
}

/// Phase hooks for instrumentation; every method defaults to a no-op.
pub trait RunObserver<T> {
    fn after_chemotaxis(&mut self, _swarm: &Swarm<T>) {}
    fn after_reproduction(&mut self, _swarm: &Swarm<T>) {}
    fn after_dispersal(&mut self, _swarm: &Swarm<T>) {}
}

impl<T> RunObserver<T> for () {}

/// Runs the full nest and returns the best raw point seen.
pub fn run_bfa<T: Scalar, F: FitnessFunction<T> + ?Sized>(
    f: &F,
    cfg: &BfaConfig,
) -> Result<BfaOutcome<T>, BfaError> {
    run_bfa_observed(f, cfg, &mut ())
}

pub fn run_bfa_observed<T, F, O>(
    f: &F,
    cfg: &BfaConfig,
    observer: &mut O,
) -> Result<BfaOutcome<T>, BfaError>
where
    T: Scalar,
    F: FitnessFunction<T> + ?Sized,
    O: RunObserver<T> + ?Sized,
{
    check_problem(f, cfg)?;
    let mut rng = BfaRng::seed_from_u64(cfg.seed);
    let steps = step_sizes(f.bounds(), cfg.step_fraction);
    let mut incumbent = Incumbent::new();
    let mut swarm = initial_swarm(f, cfg, &mut rng, &mut incumbent)?;

    let mut generation = 0u64;
    let mut points = vec![TracePoint {
        iteration: 0,
        best_fitness: incumbent.fitness,
        evaluations: incumbent.evaluations,
    }];

    for _pass in 0..cfg.n_total {
        for _ed in 0..cfg.n_elimination {
            for _rep in 0..cfg.n_reproduction {
                for _chem in 0..cfg.n_chemotactic {
                    for i in 0..swarm.len() {
                        swim_loop(&mut swarm, i, f, cfg, &steps, &mut rng, &mut incumbent)?;
                    }
                    generation += 1;
                }
                observer.after_chemotaxis(&swarm);
                points.push(TracePoint {
                    iteration: generation,
                    best_fitness: incumbent.fitness,
                    evaluations: incumbent.evaluations,
                });
                swarm = reproduce(&swarm)?;
                observer.after_reproduction(&swarm);
            }
            eliminate_disperse(&mut swarm, f, cfg, &mut rng, &mut incumbent)?;
            observer.after_dispersal(&swarm);
        }
    }
    points.push(TracePoint {
        iteration: generation,
        best_fitness: incumbent.fitness,
        evaluations: incumbent.evaluations,
    });

    Ok(BfaOutcome {
        best_position: incumbent.position.clone(),
        best_fitness: incumbent.fitness,
        trace: RunTrace {
            points,
            best_position: incumbent.position,
            evaluations: incumbent.evaluations,
        },
    })
}

/// `-|x|^2` on `[-half_width, half_width]^dim`; optimum 0 at the origin.
#[derive(Debug, Clone)]
pub struct Sphere<T> {
    bounds: Vec<Interval<T>>,
}

impl<T: Scalar> Sphere<T> {
    pub fn new(dim: usize, half_width: T) -> Self {
        Self {
            bounds: vec![Interval::new(-half_width, half_width); dim],
        }
    }
}

impl<T: Scalar> FitnessFunction<T> for Sphere<T> {
    fn dimension(&self) -> usize {
        self.bounds.len()
    }
    fn bounds(&self) -> &[Interval<T>] {
        &self.bounds
    }
    fn evaluate(&self, position: &[T]) -> T {
        -position.iter().map(|&x| x * x).sum::<T>()
    }
}
