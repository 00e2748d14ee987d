use std::path::{Path, PathBuf};

use foragefront::bfa::BfaConfig;
use foragefront::climate::{parse_climate_csv, Factor, BUNDLED_CLIMATE_CSV};
use foragefront::fuzzy::{build_type2_model, ScurveShape};
use foragefront::irrigation::apply_grade_context;
use foragefront::pareto::SigmaNorm;
use foragefront::{ClimateTable, GradeContext, ProblemSpec, Type2FuzzyVariable};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, CliError, CliResult};

/// Experiment description. Relative paths resolve against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Monthly climate CSV; the bundled Santa Rosa 2014 table when absent.
    pub climate_csv: Option<PathBuf>,
    pub problem_spec: Option<PathBuf>,
    pub bfa_config: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Published grade context 1, 2 or 3.
    pub frontier: Option<u8>,
    /// Explicit grade context; exclusive with `frontier`.
    pub grade_context: Option<GradeContext>,
    pub weight_step: f64,
    pub weight_minimum: f64,
    pub runs_per_weight: u32,
    pub master_seed: u64,
    pub workers: usize,
    pub noise_pad: f64,
    pub sigma_norm: SigmaNorm,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            climate_csv: None,
            problem_spec: None,
            bfa_config: None,
            out_dir: None,
            frontier: None,
            grade_context: None,
            weight_step: 0.1,
            weight_minimum: 0.1,
            runs_per_weight: 5,
            master_seed: 0,
            workers: 1,
            noise_pad: foragefront::irrigation::DEFAULT_NOISE_PAD,
            sigma_norm: SigmaNorm::Squared,
        }
    }
}

pub const DEFAULT_OUT_DIR: &str = "foragefront-out";

/// Command-line values that win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

pub struct Models {
    pub temperature: Type2FuzzyVariable,
    pub insolation: Type2FuzzyVariable,
}

/// A config with every referenced file loaded and checked.
pub struct Resolved {
    pub config: RunConfig,
    pub climate_source: String,
    pub climate: ClimateTable,
    pub models: Models,
    /// Problem with the grade context's noise intervals applied.
    pub spec: ProblemSpec,
    pub bfa: BfaConfig,
    pub grade_context: Option<GradeContext>,
    pub out_dir: PathBuf,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn require(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::validation("MissingFile", format!("file not found: {}", path.display())).at(path))
    }
}

pub fn load(config_path: Option<&Path>, overrides: &Overrides) -> CliResult<Resolved> {
    let (mut config, base) = match config_path {
        Some(path) => {
            require(path)?;
            let text = read_file(path)?;
            let cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::validation("BadConfig", e).at(path))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        None => (RunConfig::default(), PathBuf::new()),
    };
    for p in [&mut config.climate_csv, &mut config.problem_spec, &mut config.bfa_config, &mut config.out_dir]
        .into_iter()
        .flatten()
    {
        *p = resolve(&base, p);
    }
    if let Some(seed) = overrides.seed {
        config.master_seed = seed;
    }
    if let Some(w) = overrides.workers {
        config.workers = w;
    }
    let bad = |msg: &str| {
        let e = CliError::validation("BadConfig", msg);
        match config_path {
            Some(p) => e.at(p),
            None => e,
        }
    };
    if config.workers == 0 {
        return Err(bad("workers must be >= 1"));
    }
    if config.runs_per_weight == 0 {
        return Err(bad("runs_per_weight must be >= 1"));
    }
    if !(config.noise_pad.is_finite() && config.noise_pad >= 0.0) {
        return Err(bad("noise_pad must be >= 0"));
    }

    let (climate_source, climate_text) = match &config.climate_csv {
        Some(p) => {
            require(p)?;
            (p.display().to_string(), read_file(p)?)
        }
        None => ("bundled:santa_rosa_2014".to_string(), BUNDLED_CLIMATE_CSV.to_string()),
    };
    let climate_err = |code: &'static str, e: &dyn std::fmt::Display| {
        let err = CliError::validation(code, e);
        match &config.climate_csv {
            Some(p) => err.at(p),
            None => err,
        }
    };
    let climate: ClimateTable =
        parse_climate_csv(&climate_text).map_err(|e| climate_err("ClimateParse", &e))?;
    let fit = |f: Factor| {
        build_type2_model(&climate, f, ScurveShape::default()).map_err(|e| climate_err("FuzzyFit", &e))
    };
    let models = Models {
        temperature: fit(Factor::Temperature)?,
        insolation: fit(Factor::Insolation)?,
    };

    let base_spec = match &config.problem_spec {
        Some(p) => {
            require(p)?;
            ProblemSpec::from_json(&read_file(p)?)
                .map_err(|e| CliError::validation("BadProblemSpec", e).at(p))?
        }
        None => ProblemSpec::default(),
    };
    let bfa = match &config.bfa_config {
        Some(p) => {
            require(p)?;
            let cfg: BfaConfig = serde_json::from_str(&read_file(p)?)
                .map_err(|e| CliError::validation("BadBfaConfig", e).at(p))?;
            cfg.validate()
                .map_err(|e| CliError::validation("BadBfaConfig", e).at(p))?;
            cfg
        }
        None => BfaConfig::default(),
    };

    let grade_context = match (config.frontier, &config.grade_context) {
        (Some(_), Some(_)) => return Err(bad("set either `frontier` or `grade_context`, not both")),
        (Some(k), None) => Some(
            GradeContext::published(k).ok_or_else(|| bad("frontier must be 1, 2 or 3"))?,
        ),
        (None, ctx) => ctx.clone(),
    };
    let spec = match &grade_context {
        Some(ctx) => apply_grade_context(
            &base_spec,
            &models.temperature,
            &models.insolation,
            ctx,
            config.noise_pad,
        )
        .map_err(|e| {
            let err = CliError::validation("InfeasibleSpec", format!("grade context `{}`: {e}", ctx.label));
            match config_path {
                Some(p) => err.at(p),
                None => err,
            }
        })?,
        None => base_spec,
    };

    let out_dir = overrides
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    Ok(Resolved {
        config,
        climate_source,
        climate,
        models,
        spec,
        bfa,
        grade_context,
        out_dir,
    })
}
