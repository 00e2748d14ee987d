//! Weight sweeps, Pareto filtering, rankings and the sigma diversity metric.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfa::{run_bfa, BfaConfig, BfaError, RunTrace};
use crate::irrigation::{
    aggregate, eval_objectives, feasible, DesignVector, GradeContext, IrrigationProblem,
    NoiseVector, ObjectiveTriple, ProblemError, ProblemSpec, WeightVector,
};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ParetoError {
    #[error("weight grid is empty for step {step} and minimum {minimum}")]
    EmptyGrid { step: f64, minimum: f64 },
    #[error("sigma of an all-zero objective vector is undefined")]
    ZeroVector,
    #[error("{count} is not a simplex-lattice size for {n} objectives")]
    NotALatticeSize { n: usize, count: usize },
    #[error("runs_per_weight must be >= 1")]
    NoRuns,
    #[error("workers must be >= 1")]
    NoWorkers,
    #[error("frontier is empty")]
    EmptyFrontier,
    #[error("weight cell ({w1}, {w2}, {w3}) replicate {replicate} failed: {source}")]
    Cell {
        w1: f64,
        w2: f64,
        w3: f64,
        replicate: u32,
        source: BfaError,
    },
    #[error("weight cell ({w1}, {w2}, {w3}) produced an infeasible point")]
    Infeasible { w1: f64, w2: f64, w3: f64 },
    #[error("frontier CSV schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// All convex weight triples on a `step` lattice with every entry
/// `>= minimum`, in lexicographic order.
pub fn weight_grid<T: Scalar>(step: f64, minimum: f64) -> Result<Vec<WeightVector<T>>, ParetoError> {
    let empty = || ParetoError::EmptyGrid { step, minimum };
    if !(step.is_finite() && step > 0.0 && step <= 1.0 && minimum.is_finite() && minimum >= 0.0) {
        return Err(empty());
    }
    let units = (1.0 / step).round();
    if ((units * step) - 1.0).abs() > 1e-9 {
        return Err(empty());
    }
    let units = units as u64;
    let min_units = (minimum / step - 1e-9).ceil().max(0.0) as u64;
    let mut out = Vec::new();
    for a in min_units..=units {
        for b in min_units..=units.saturating_sub(a) {
            let c = units - a - b;
            if c < min_units {
                continue;
            }
            let to = |k: u64| T::lit(k as f64 / units as f64);
            out.push(WeightVector::new(to(a), to(b), to(c))?);
        }
    }
    if out.is_empty() {
        return Err(empty());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SolutionPoint<T> {
    pub weights: WeightVector<T>,
    pub design: DesignVector<T>,
    pub noise: NoiseVector<T>,
    pub objectives: ObjectiveTriple<T>,
    pub aggregate_f: T,
    pub seed: u64,
}

impl<T: Scalar> SolutionPoint<T> {
    pub fn new(
        weights: WeightVector<T>,
        design: DesignVector<T>,
        noise: NoiseVector<T>,
        spec: &ProblemSpec<T>,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        let objectives = eval_objectives(&design, &noise, spec)?;
        Ok(Self {
            weights,
            design,
            noise,
            objectives,
            aggregate_f: aggregate(&objectives, &weights),
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Frontier<T> {
    pub points: Vec<SolutionPoint<T>>,
    pub grade_context: Option<GradeContext<T>>,
}

impl<T: Scalar> Frontier<T> {
    pub fn new(
        points: Vec<SolutionPoint<T>>,
        grade_context: Option<GradeContext<T>>,
    ) -> Result<Self, ParetoError> {
        if points.is_empty() {
            return Err(ParetoError::EmptyFrontier);
        }
        Ok(Self {
            points,
            grade_context,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Weights quantised to millionths, so that the key only depends on the
/// weight values and never on their position in the grid.
pub fn weight_key<T: Scalar>(w: &WeightVector<T>) -> [u64; 3] {
    w.as_array()
        .map(|x| (x.to_f64_lossy() * 1e6).round().max(0.0) as u64)
}

/// Per-cell run seed: a SplitMix64 chain over master seed, the three
/// quantised weights and the replicate index.
pub fn derive_seed<T: Scalar>(master: u64, weights: &WeightVector<T>, replicate: u32) -> u64 {
    let [a, b, c] = weight_key(weights);
    [a, b, c, u64::from(replicate)]
        .into_iter()
        .fold(splitmix64(master), |h, k| splitmix64(h ^ k))
}

/// One weight cell after its replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult<T> {
    pub point: SolutionPoint<T>,
    /// Trace of every replicate, in replicate order.
    pub traces: Vec<(u64, RunTrace<T>)>,
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub runs_per_weight: u32,
    pub master_seed: u64,
    pub workers: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            runs_per_weight: 5,
            master_seed: 0,
            workers: 1,
        }
    }
}

fn run_cell<T: Scalar>(
    spec: &ProblemSpec<T>,
    cfg: &BfaConfig,
    weights: WeightVector<T>,
    settings: &SweepSettings,
) -> Result<CellResult<T>, ParetoError> {
    let [w1, w2, w3] = weights.as_array().map(|x| x.to_f64_lossy());
    let problem = IrrigationProblem::new(spec.clone(), weights)?;
    let mut best: Option<SolutionPoint<T>> = None;
    let mut traces = Vec::with_capacity(settings.runs_per_weight as usize);
    for replicate in 0..settings.runs_per_weight {
        let seed = derive_seed(settings.master_seed, &weights, replicate);
        let run_cfg = BfaConfig {
            seed,
            ..cfg.clone()
        };
        let outcome = run_bfa(&problem, &run_cfg).map_err(|source| ParetoError::Cell {
            w1,
            w2,
            w3,
            replicate,
            source,
        })?;
        let (d, z) = IrrigationProblem::split(&outcome.best_position);
        if !feasible(&d, &z, spec) {
            return Err(ParetoError::Infeasible { w1, w2, w3 });
        }
        let point = SolutionPoint::new(weights, d, z, spec, seed)?;
        if best.as_ref().is_none_or(|b| point.aggregate_f > b.aggregate_f) {
            best = Some(point);
        }
        traces.push((seed, outcome.trace));
    }
    Ok(CellResult {
        point: best.ok_or(ParetoError::NoRuns)?,
        traces,
    })
}

/// Runs every weight cell `runs_per_weight` times and keeps each cell's best
/// run by aggregate F. Cells run on up to `workers` threads; results are
/// returned in weight order.
pub fn build_frontier_cells<T: Scalar>(
    spec: &ProblemSpec<T>,
    cfg: &BfaConfig,
    weights: &[WeightVector<T>],
    settings: &SweepSettings,
) -> Result<Vec<CellResult<T>>, ParetoError> {
    if settings.runs_per_weight == 0 {
        return Err(ParetoError::NoRuns);
    }
    if settings.workers == 0 {
        return Err(ParetoError::NoWorkers);
    }
    spec.validate()?;
    if weights.is_empty() {
        return Err(ParetoError::EmptyFrontier);
    }
    if settings.workers == 1 {
        return weights
            .iter()
            .map(|&w| run_cell(spec, cfg, w, settings))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| ParetoError::Pool(e.to_string()))?;
    pool.install(|| {
        weights
            .par_iter()
            .map(|&w| run_cell(spec, cfg, w, settings))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .collect()
}

pub fn build_frontier<T: Scalar>(
    spec: &ProblemSpec<T>,
    cfg: &BfaConfig,
    weights: &[WeightVector<T>],
    settings: &SweepSettings,
    grade_context: Option<GradeContext<T>>,
) -> Result<Frontier<T>, ParetoError> {
    let cells = build_frontier_cells(spec, cfg, weights, settings)?;
    Frontier::new(cells.into_iter().map(|c| c.point).collect(), grade_context)
}

/// `a` dominates `b` under maximisation.
pub fn dominates<T: Scalar>(a: &[T], b: &[T]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Indices of the points no other point dominates, in input order.
pub fn nondominated_indices<T: Scalar>(objectives: &[Vec<T>]) -> Vec<usize> {
    (0..objectives.len())
        .filter(|&i| {
            !objectives
                .iter()
                .enumerate()
                .any(|(j, o)| j != i && dominates(o, &objectives[i]))
        })
        .collect()
}

pub fn nondominated_filter<T: Scalar>(points: &[SolutionPoint<T>]) -> Vec<SolutionPoint<T>> {
    let objs: Vec<Vec<T>> = points.iter().map(|p| p.objectives.to_array().to_vec()).collect();
    nondominated_indices(&objs)
        .into_iter()
        .map(|i| points[i].clone())
        .collect()
}

/// How the sigma magnitude is formed from its components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaNorm {
    /// Euclidean norm of the `i < j` components.
    #[default]
    Squared,
    /// Square root of the plain double sum over all `i != j`. The terms are
    /// antisymmetric, so this collapses to zero up to rounding; negative
    /// rounding residue is clamped to zero.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SigmaVector<T> {
    /// `sigma(ij)` for `i < j`, row-major: (1,2), (1,3), ..., (2,3), ...
    pub components: Vec<T>,
    pub magnitude: T,
}

impl<T: Scalar> SigmaVector<T> {
    pub fn zero(n_objectives: usize) -> Self {
        Self {
            components: vec![T::zero(); n_objectives * n_objectives.saturating_sub(1) / 2],
            magnitude: T::zero(),
        }
    }

    pub fn distance(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }
}

pub fn sigma_components<T: Scalar>(f: &[T], norm: SigmaNorm) -> Result<SigmaVector<T>, ParetoError> {
    let denom: T = f.iter().map(|&x| x * x).sum();
    if denom == T::zero() {
        return Err(ParetoError::ZeroVector);
    }
    let n = f.len();
    let mut components = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            components.push((f[i] * f[i] - f[j] * f[j]) / denom);
        }
    }
    let magnitude = match norm {
        SigmaNorm::Squared => components.iter().map(|&s| s * s).sum::<T>().sqrt(),
        SigmaNorm::Printed => {
            let mut total = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        total = total + (f[i] * f[i] - f[j] * f[j]) / denom;
                    }
                }
            }
            total.max(T::zero()).sqrt()
        }
    };
    Ok(SigmaVector {
        components,
        magnitude,
    })
}

/// Number of nodes of the simplex lattice with `h` divisions in `n` objectives.
pub fn lattice_size(n: usize, h: usize) -> usize {
    // C(h + n - 1, n - 1)
    let mut acc: usize = 1;
    for k in 1..n {
        acc = acc * (h + k) / k;
    }
    acc
}

/// Nodes of the `h`-division simplex lattice, lexicographically descending
/// in the first coordinate.
pub fn simplex_lattice(n: usize, h: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(n - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, h, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Sigma vectors of `count` evenly spread directions on the nonnegative unit
/// simplex. `count` must be a lattice size for `n` objectives.
pub fn reference_sigma_lines<T: Scalar>(
    n_objectives: usize,
    count: usize,
    norm: SigmaNorm,
) -> Result<Vec<SigmaVector<T>>, ParetoError> {
    let bad = ParetoError::NotALatticeSize {
        n: n_objectives,
        count,
    };
    if n_objectives < 2 || count < 2 {
        return Err(bad);
    }
    let mut h = 1;
    while lattice_size(n_objectives, h) < count {
        h += 1;
    }
    if lattice_size(n_objectives, h) != count {
        return Err(bad);
    }
    simplex_lattice(n_objectives, h)
        .into_iter()
        .map(|node| {
            let dir: Vec<T> = node.iter().map(|&k| T::lit(k as f64 / h as f64)).collect();
            sigma_components(&dir, norm)
        })
        .collect()
}

/// `1 / (mean nearest-reference distance + 1e-12)`.
pub fn diversity_metric<T: Scalar>(solutions: &[SigmaVector<T>], refs: &[SigmaVector<T>]) -> T {
    assert!(!solutions.is_empty() && !refs.is_empty(), "diversity needs solutions and references");
    let total: T = solutions
        .iter()
        .map(|s| {
            refs.iter()
                .map(|r| s.distance(r))
                .fold(T::infinity(), T::min)
        })
        .sum();
    let n = T::from_usize(solutions.len()).expect("count fits");
    T::one() / (total / n + T::lit(DIVERSITY_GUARD))
}

pub const DIVERSITY_GUARD: f64 = 1e-12;
pub const DEFAULT_REFERENCE_LINES: usize = 15;

/// Objectives rescaled to `[0, 1]` per column over the set. A column with no
/// spread maps to 0.
pub fn normalize_objectives<T: Scalar>(objectives: &[[T; 3]]) -> Vec<[T; 3]> {
    let mut lo = [T::infinity(); 3];
    let mut hi = [T::neg_infinity(); 3];
    for o in objectives {
        for k in 0..3 {
            lo[k] = lo[k].min(o[k]);
            hi[k] = hi[k].max(o[k]);
        }
    }
    objectives
        .iter()
        .map(|o| {
            std::array::from_fn(|k| {
                let span = hi[k] - lo[k];
                if span > T::zero() {
                    (o[k] - lo[k]) / span
                } else {
                    T::zero()
                }
            })
        })
        .collect()
}

/// Diversity of a frontier's normalised objective vectors against the
/// default 15-line reference set. A point that normalises to the origin gets
/// the zero sigma vector.
pub fn frontier_diversity<T: Scalar>(
    points: &[SolutionPoint<T>],
    norm: SigmaNorm,
) -> Result<T, ParetoError> {
    if points.is_empty() {
        return Err(ParetoError::EmptyFrontier);
    }
    let raw: Vec<[T; 3]> = points.iter().map(|p| p.objectives.to_array()).collect();
    let sigmas: Vec<SigmaVector<T>> = normalize_objectives(&raw)
        .iter()
        .map(|o| match sigma_components(o, norm) {
            Ok(s) => s,
            Err(_) => SigmaVector::zero(3),
        })
        .collect();
    let refs = reference_sigma_lines(3, DEFAULT_REFERENCE_LINES, norm)?;
    Ok(diversity_metric(&sigmas, &refs))
}

fn rank_order<T: Scalar>(a: &SolutionPoint<T>, b: &SolutionPoint<T>) -> Ordering {
    b.aggregate_f
        .partial_cmp(&a.aggregate_f)
        .unwrap_or(Ordering::Equal)
        .then_with(|| {
            a.weights
                .as_array()
                .partial_cmp(&b.weights.as_array())
                .unwrap_or(Ordering::Equal)
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking<T> {
    pub best: SolutionPoint<T>,
    pub median: SolutionPoint<T>,
    pub worst: SolutionPoint<T>,
}

/// Sorted by F descending (ties by weights ascending): first, element
/// `(len - 1) / 2`, last.
pub fn rank_solutions<T: Scalar>(points: &[SolutionPoint<T>]) -> Result<Ranking<T>, ParetoError> {
    if points.is_empty() {
        return Err(ParetoError::EmptyFrontier);
    }
    let mut sorted: Vec<&SolutionPoint<T>> = points.iter().collect();
    sorted.sort_by(|a, b| rank_order(a, b));
    Ok(Ranking {
        best: sorted[0].clone(),
        median: sorted[(sorted.len() - 1) / 2].clone(),
        worst: sorted[sorted.len() - 1].clone(),
    })
}

/// Mean aggregate F over the frontier.
pub fn frontier_dominance<T: Scalar>(points: &[SolutionPoint<T>]) -> Result<T, ParetoError> {
    if points.is_empty() {
        return Err(ParetoError::EmptyFrontier);
    }
    let n = T::from_usize(points.len()).expect("count fits");
    Ok(points.iter().map(|p| p.aggregate_f).sum::<T>() / n)
}

pub const FRONTIER_CSV_HEADER: &str = "w1,w2,w3,x_a,x_b,x_c,x_d,Z_a,Z_b,f1,f2,f3,F,seed";

/// Rows in the frontier schema. Floats use shortest round-trip formatting.
pub fn frontier_to_csv<T: Scalar>(points: &[SolutionPoint<T>]) -> String {
    let mut out = String::from(FRONTIER_CSV_HEADER);
    out.push('\n');
    for p in points {
        let w = p.weights.as_array();
        let row = [
            w[0],
            w[1],
            w[2],
            p.design.x_a,
            p.design.x_b,
            p.design.x_c,
            p.design.x_d,
            p.noise.z_a,
            p.noise.z_b,
            p.objectives.f1,
            p.objectives.f2,
            p.objectives.f3,
            p.aggregate_f,
        ]
        .map(|x| x.to_string())
        .join(",");
        out.push_str(&row);
        out.push(',');
        out.push_str(&p.seed.to_string());
        out.push('\n');
    }
    out
}

/// Parses a frontier CSV. Values are taken as written; no solver state is
/// consulted.
pub fn frontier_from_csv<T: Scalar>(text: &str) -> Result<Vec<SolutionPoint<T>>, ParetoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| ParetoError::SchemaMismatch(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != FRONTIER_CSV_HEADER {
        return Err(ParetoError::SchemaMismatch(format!(
            "expected header `{FRONTIER_CSV_HEADER}`, found `{header}`"
        )));
    }
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| ParetoError::SchemaMismatch(format!("line {line}: {e}")))?;
        if rec.len() != 14 {
            return Err(ParetoError::SchemaMismatch(format!(
                "line {line}: expected 14 fields, found {}",
                rec.len()
            )));
        }
        let num = |k: usize| -> Result<T, ParetoError> {
            rec[k].parse::<T>().map_err(|_| {
                ParetoError::SchemaMismatch(format!("line {line}: bad number `{}`", &rec[k]))
            })
        };
        let weights = WeightVector::new(num(0)?, num(1)?, num(2)?)
            .map_err(|e| ParetoError::SchemaMismatch(format!("line {line}: {e}")))?;
        let seed = rec[13]
            .parse::<u64>()
            .map_err(|_| ParetoError::SchemaMismatch(format!("line {line}: bad seed `{}`", &rec[13])))?;
        points.push(SolutionPoint {
            weights,
            design: DesignVector {
                x_a: num(3)?,
                x_b: num(4)?,
                x_c: num(5)?,
                x_d: num(6)?,
            },
            noise: NoiseVector {
                z_a: num(7)?,
                z_b: num(8)?,
            },
            objectives: ObjectiveTriple::new(num(9)?, num(10)?, num(11)?),
            aggregate_f: num(12)?,
            seed,
        });
    }
    if points.is_empty() {
        return Err(ParetoError::SchemaMismatch("no data rows".into()));
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FrontierMetrics<T> {
    #[serde(rename = "dominance_mean_F")]
    pub dominance_mean_f: T,
    pub diversity: T,
    pub n_points: usize,
    pub grade_context: Option<GradeContext<T>>,
}

pub fn frontier_metrics<T: Scalar>(
    points: &[SolutionPoint<T>],
    grade_context: Option<GradeContext<T>>,
    norm: SigmaNorm,
) -> Result<FrontierMetrics<T>, ParetoError> {
    Ok(FrontierMetrics {
        dominance_mean_f: frontier_dominance(points)?,
        diversity: frontier_diversity(points, norm)?,
        n_points: points.len(),
        grade_context,
    })
}
