//! Run configuration: one TOML file drives the whole pipeline. All
//! randomness flows from the single `seed` through named sub-seeds.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use flexgrid_core::clustering::FeatureMode;
use flexgrid_core::ev_data::{Archetype, DayFilter};
use flexgrid_core::rng::{fnv1a64, splitmix64};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; sub-seeds for synthesis and clustering derive from it.
    pub seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub synth: Option<SynthSection>,
    pub clustering: ClusteringSection,
    #[serde(default)]
    pub opf: OpfSection,
    pub scenario: ScenarioSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Sessions CSV; mutually exclusive with the `[synth]` section.
    #[serde(default)]
    pub sessions: Option<PathBuf>,
    pub network: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub n_users: usize,
    pub days: u32,
    pub start_date: chrono::NaiveDate,
    pub archetypes: Vec<ArchetypeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchetypeEntry {
    pub name: String,
    pub weight: f64,
    pub start_minute_mean: f64,
    pub start_minute_std: f64,
    pub duration_mean_min: f64,
    pub duration_std_min: f64,
    pub power_kw: f64,
    pub charge_prob: f64,
}

impl ArchetypeEntry {
    pub fn to_archetype(&self) -> Archetype {
        Archetype {
            name: self.name.clone(),
            start_minute_mean: self.start_minute_mean,
            start_minute_std: self.start_minute_std,
            duration_mean_min: self.duration_mean_min,
            duration_std_min: self.duration_std_min,
            power_kw: self.power_kw,
            charge_prob: self.charge_prob,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringSection {
    pub mode: FeatureMode,
    /// Fixed cluster count; mutually exclusive with `k_range`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub k_range: Option<(usize, usize)>,
    #[serde(default = "default_seeds_per_k")]
    pub seeds_per_k: usize,
    #[serde(default = "default_day_filter")]
    pub day_filter: DayFilter,
}

fn default_seeds_per_k() -> usize {
    5
}

fn default_day_filter() -> DayFilter {
    DayFilter::Weekdays
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpfSection {
    /// Loss-term trade-off coefficient; loss weight is 1/m_t.
    #[serde(default = "default_m_t")]
    pub m_t: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_kw: f64,
    #[serde(default = "default_v_slack")]
    pub v_slack_pu: f64,
    /// Absent means unlimited.
    #[serde(default)]
    pub slack_import_max_mw: Option<f64>,
    #[serde(default)]
    pub slack_export_max_mw: Option<f64>,
    /// Override voltage bounds on every bus when set.
    #[serde(default)]
    pub v_min_pu: Option<f64>,
    #[serde(default)]
    pub v_max_pu: Option<f64>,
    #[serde(default = "default_backend_max_iter")]
    pub backend_max_iter: u32,
    #[serde(default = "default_backend_tol")]
    pub backend_tol: f64,
}

impl Default for OpfSection {
    fn default() -> Self {
        OpfSection {
            m_t: default_m_t(),
            epsilon_kw: default_epsilon(),
            v_slack_pu: default_v_slack(),
            slack_import_max_mw: None,
            slack_export_max_mw: None,
            v_min_pu: None,
            v_max_pu: None,
            backend_max_iter: default_backend_max_iter(),
            backend_tol: default_backend_tol(),
        }
    }
}

fn default_m_t() -> f64 {
    1000.0
}
fn default_epsilon() -> f64 {
    0.01
}
fn default_v_slack() -> f64 {
    1.0
}
fn default_backend_max_iter() -> u32 {
    200
}
fn default_backend_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// Absolute fleet size; mutually exclusive with adoption_rate.
    #[serde(default)]
    pub adoption_count: Option<u64>,
    /// Fraction of `fleet_total` vehicles that are EVs.
    #[serde(default)]
    pub adoption_rate: Option<f64>,
    #[serde(default)]
    pub fleet_total: Option<u64>,
    pub timestep_minutes: u32,
    /// Start of the simulated window; defaults to the series start.
    #[serde(default)]
    pub horizon_start: Option<chrono::DateTime<chrono::Utc>>,
    /// Number of steps; defaults to the rest of the series.
    #[serde(default)]
    pub horizon_steps: Option<usize>,
    #[serde(default = "default_true")]
    pub include_baseline_ev_demand: bool,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    /// Parses and validates; relative paths are resolved against the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if let Some(s) = &config.paths.sessions {
            config.paths.sessions = Some(resolve(base, s));
        }
        config.paths.network = resolve(base, &config.paths.network);
        config.paths.out_dir = resolve(base, &config.paths.out_dir);
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        match (&self.paths.sessions, &self.synth) {
            (Some(_), Some(_)) => {
                return Err("exactly one of paths.sessions and [synth] must be given; both are".into())
            }
            (None, None) => {
                return Err("exactly one of paths.sessions and [synth] must be given; neither is".into())
            }
            _ => {}
        }
        match (self.clustering.k, self.clustering.k_range) {
            (Some(_), Some(_)) => {
                return Err("exactly one of clustering.k and clustering.k_range must be given; both are".into())
            }
            (None, None) => {
                return Err("exactly one of clustering.k and clustering.k_range must be given; neither is".into())
            }
            (Some(0), _) => return Err("clustering.k must be >= 1".into()),
            _ => {}
        }
        match (
            self.scenario.adoption_count,
            self.scenario.adoption_rate,
            self.scenario.fleet_total,
        ) {
            (Some(_), None, None) => {}
            (None, Some(rate), Some(_)) => {
                if !(0.0 < rate && rate <= 1.0) {
                    return Err(format!("scenario.adoption_rate must be in (0,1], got {rate}"));
                }
            }
            _ => {
                return Err(
                    "scenario needs either adoption_count, or adoption_rate with fleet_total"
                        .into(),
                )
            }
        }
        if !(self.opf.m_t > 0.0) {
            return Err(format!("opf.m_t must be positive, got {}", self.opf.m_t));
        }
        if !(self.opf.epsilon_kw > 0.0) {
            return Err(format!(
                "opf.epsilon_kw must be positive, got {}",
                self.opf.epsilon_kw
            ));
        }
        if !(self.opf.backend_tol > 0.0) {
            return Err("opf.backend_tol must be positive".into());
        }
        if self.scenario.timestep_minutes == 0 {
            return Err("scenario.timestep_minutes must be positive".into());
        }
        if let (Some(lo), Some(hi)) = (self.opf.v_min_pu, self.opf.v_max_pu) {
            if !(0.0 < lo && lo < hi) {
                return Err(format!("voltage bound override ({lo}, {hi}) is not ordered"));
            }
        }
        Ok(())
    }

    /// Total EV count implied by the scenario section.
    pub fn total_evs(&self) -> u64 {
        match (
            self.scenario.adoption_count,
            self.scenario.adoption_rate,
            self.scenario.fleet_total,
        ) {
            (Some(count), _, _) => count,
            (None, Some(rate), Some(total)) => (rate * total as f64).round() as u64,
            _ => unreachable!("validated"),
        }
    }

    pub fn synth_seed(&self) -> u64 {
        splitmix64(self.seed ^ fnv1a64(b"synth"))
    }

    pub fn clustering_seed(&self) -> u64 {
        splitmix64(self.seed ^ fnv1a64(b"clustering"))
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
