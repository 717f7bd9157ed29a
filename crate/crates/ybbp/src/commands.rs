use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ybbp_core::abc::{AbcConfig, AcceptedDraw, Observed, PosteriorSample, PriorSpec, Scheme};
use ybbp_core::model::{Census, Model, PathRecord};
use ybbp_core::observation::SchemeVariant;
use ybbp_core::predictive::{expected_next_females, PredictiveConfig};
use ybbp_core::rng::{domain, RandomStream};
use ybbp_core::stats::{self, Accuracy, BayesFactor, DensityReport, SpikeParam};
use ybbp_core::{LawFamily, ParamVector};

use crate::config::{ExperimentConfig, RetryUntil};
use crate::error::{AppError, AppResult};
use crate::io::{self, Meta, ObservedFile, PosteriorSidecar};
use crate::{parallel, plot};

fn meta(cfg: &ExperimentConfig) -> AppResult<Meta> {
    Ok(Meta::new(cfg.seed()?, cfg.hash()))
}

// ---- simulate ----

#[derive(Debug, Serialize, Deserialize)]
pub struct SimulateReport {
    pub generations: usize,
    /// Index of the accepted attempt; earlier attempts failed `retry_until`.
    pub attempt: u64,
    pub coexistence: bool,
    pub extended_variant: Option<SchemeVariant>,
    pub files: Vec<String>,
}

fn satisfies(path: &PathRecord, until: RetryUntil) -> bool {
    let Some(obs) = ObservedFile::from_path(path) else { return false };
    let coexist = obs.last.females > 0 && obs.last.males_R > 0 && obs.last.males_r > 0;
    let wanted = match until {
        RetryUntil::Coexistence => return coexist,
        RetryUntil::BothPositive => SchemeVariant::BothPositive,
        RetryUntil::RrZero => SchemeVariant::RrZero,
        RetryUntil::RmutZero => SchemeVariant::RmutZero,
    };
    ybbp_core::observation::extract_extended(path, wanted).is_some()
}

pub fn simulate(cfg: &ExperimentConfig) -> AppResult<SimulateReport> {
    let meta = meta(cfg)?;
    let model_cfg = cfg.model()?;
    let out = cfg.output_dir()?;
    let (law_big, law_small) = model_cfg.laws()?;
    let model = Model::new(model_cfg.theta, law_big, law_small)?;
    let seed = cfg.seed()?;

    let mut attempt = 0;
    let path = loop {
        let mut rng = RandomStream::derive(seed, domain::SIMULATE, attempt);
        let path = model.simulate_path(model_cfg.initial, model_cfg.generations, &mut rng)?;
        match model_cfg.retry_until {
            Some(until) if !satisfies(&path, until) => {
                attempt += 1;
                if attempt >= model_cfg.max_attempts {
                    return Err(AppError::config(format!(
                        "no path met `model.retry_until` in {} attempts",
                        model_cfg.max_attempts
                    )));
                }
            }
            _ => break path,
        }
    };

    io::ensure_dir(out)?;
    let mut files = vec!["path.csv".to_string()];
    io::write_path(&out.join("path.csv"), &meta, &path)?;
    let mut coexistence = false;
    let mut extended_variant = None;
    if let Some(obs) = ObservedFile::from_path(&path) {
        coexistence = obs.last.females > 0 && obs.last.males_R > 0 && obs.last.males_r > 0;
        extended_variant = obs.implied_variant();
        obs.basic_only().write(&out.join("observed_basic.csv"), &meta)?;
        obs.write(&out.join("observed_extended.csv"), &meta)?;
        files.push("observed_basic.csv".into());
        files.push("observed_extended.csv".into());
    }
    let report = SimulateReport { generations: model_cfg.generations, attempt, coexistence, extended_variant, files };
    io::write_json(&out.join("simulate.json"), &meta, &report)?;
    Ok(report)
}

// ---- infer ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorValue {
    Finite(f64),
    /// "zero" or "infinite".
    Flag(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSummary {
    pub value: f64,
    pub mean_square: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub hpd: Vec<[f64; 2]>,
    /// "all" draws, or the "positive_part" when the parameter has a spike at 0.
    pub hpd_support: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse_zero_surrogate: Option<SurrogateSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spike_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bayes_factor: Option<FactorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bayes_factor_display: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Parameters {
    pub alpha: ParamSummary,
    pub beta: ParamSummary,
    pub m_R: ParamSummary,
    pub m_r: ParamSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Rates {
    pub tau_R: ParamSummary,
    pub tau_r: ParamSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSplit {
    pub parameter: String,
    /// Draws with the parameter at 0.
    pub a1: usize,
    pub a2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub scheme: String,
    pub law_family: String,
    pub pool_size: u64,
    pub tolerance_quantile: f64,
    pub force_positive_beta: bool,
    pub force_positive_m_r: bool,
    pub m_max: f64,
    pub hpd_level: f64,
    pub bandwidth_rule: String,
    pub observed_sha256: String,
    pub epsilon: f64,
    pub n_compatible: u64,
    pub n_accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferSummary {
    pub run: RunInfo,
    pub parameters: Parameters,
    pub rates: Rates,
    pub groups: Vec<GroupSplit>,
}

pub fn scheme_label(scheme: Scheme) -> String {
    match scheme {
        Scheme::Basic => "basic".into(),
        Scheme::Extended(v) => format!("extended_{}", v.label()),
    }
}

/// Two-decimal rendering used in reports.
pub fn format_bayes_factor(k: BayesFactor) -> String {
    match k {
        BayesFactor::Finite(v) => format!("{v:.2}"),
        BayesFactor::Zero => "0 (no draw at zero)".into(),
        BayesFactor::Infinite => "inf (every draw at zero)".into(),
    }
}

pub fn abc_config(cfg: &ExperimentConfig, scheme: Scheme) -> AppResult<AbcConfig> {
    let section = cfg.abc()?;
    let mut abc = AbcConfig::new(section.pool_size, section.tolerance_quantile, cfg.seed()?).with_forcing_for(scheme);
    abc.law_family = section.law_family;
    abc.prior = PriorSpec { m_max: section.m_max };
    if let Some(b) = section.force_positive_beta {
        abc.force_positive_beta = b;
    }
    if let Some(m) = section.force_positive_m_r {
        abc.force_positive_m_r = m;
    }
    abc.validate().map_err(|e| AppError::config(format!("`abc`: {e}")))?;
    Ok(abc)
}

fn insufficient(e: ybbp_core::Error, abc: &AbcConfig) -> AppError {
    match e {
        ybbp_core::Error::InsufficientCompatible { compatible, required, pool_size } => {
            let share = compatible as f64 / pool_size.max(1) as f64;
            let suggestion = if share > 0.0 {
                format!("abc.pool_size to at least {}", ((required as f64 / share) * 1.2).ceil() as u64)
            } else {
                "abc.pool_size substantially".into()
            };
            AppError::InsufficientCompatible(format!(
                "only {compatible} of {pool_size} simulated paths are compatible with the observed sample; \
                 quantile {} needs at least {required}. Increase {suggestion}, or raise abc.tolerance_quantile \
                 to at least {:.3e}",
                abc.tolerance_quantile,
                if compatible > 0 { 1.0 / compatible as f64 } else { f64::NAN }
            ))
        }
        other => other.into(),
    }
}

/// HPD intervals intersected with the parameter support `[0, upper]`.
fn clip(set: stats::HpdSet, upper: f64) -> stats::HpdSet {
    let intervals = set
        .intervals
        .iter()
        .map(|&(a, b)| (a.max(0.0), b.min(upper)))
        .filter(|(a, b)| a <= b)
        .collect();
    stats::HpdSet { level: set.level, intervals }
}

fn summarise(
    values: &[f64],
    level: f64,
    spike: bool,
    upper: f64,
    truth: Option<f64>,
) -> AppResult<(ParamSummary, Option<stats::DensityEstimate>, Option<stats::HpdSet>)> {
    let mean = stats::point_estimate(values)?;
    let (support, hpd_values): (&str, Vec<f64>) = if spike {
        ("positive_part", values.iter().copied().filter(|&v| v > 0.0).collect())
    } else {
        ("all", values.to_vec())
    };
    let mut summary = ParamSummary {
        mean,
        hpd: Vec::new(),
        hpd_support: support.into(),
        point_mass: None,
        rmse: None,
        rmse_zero_surrogate: None,
        spike_probability: None,
        bayes_factor: None,
        bayes_factor_display: None,
    };
    let mut density = None;
    let mut set = None;
    if hpd_values.is_empty() {
        summary.point_mass = Some(0.0);
    } else {
        match stats::kde(&hpd_values)? {
            DensityReport::PointMass(c) => {
                summary.point_mass = Some(c);
                summary.hpd = vec![[c, c]];
            }
            DensityReport::Smooth(est) => {
                let h = clip(stats::hpd(&hpd_values, level)?, upper);
                summary.hpd = h.intervals.iter().map(|&(a, b)| [a, b]).collect();
                density = Some(est);
                set = Some(h);
            }
        }
    }
    if spike {
        let p = stats::spike_probability(values)?;
        let k = stats::bayes_factor_zero(p);
        summary.spike_probability = Some(p);
        summary.bayes_factor = Some(match k {
            BayesFactor::Finite(v) => FactorValue::Finite(v),
            BayesFactor::Zero => FactorValue::Flag("zero".into()),
            BayesFactor::Infinite => FactorValue::Flag("infinite".into()),
        });
        summary.bayes_factor_display = Some(format_bayes_factor(k));
    }
    if let Some(t) = truth {
        match stats::accuracy(values, t)? {
            Accuracy::Relative(r) => summary.rmse = Some(r),
            Accuracy::ZeroTruth(z) => {
                summary.rmse_zero_surrogate =
                    Some(SurrogateSummary { value: z.surrogate, mean_square: z.mean_square, label: z.label.into() })
            }
        }
    }
    Ok((summary, density, set))
}

pub struct InferOutcome {
    pub posterior: PosteriorSample,
    pub summary: InferSummary,
}

pub fn infer(cfg: &ExperimentConfig) -> AppResult<InferOutcome> {
    let meta = meta(cfg)?;
    let out = cfg.output_dir()?.to_path_buf();
    let level = cfg.hpd_level()?;
    let section = cfg.abc()?;
    let obs_path = cfg.input("io.observed", cfg.io.observed.as_ref())?;
    let obs_file = ObservedFile::read(&obs_path)?;
    let observed = obs_file.to_observed(section.scheme, &obs_path)?;
    let scheme = observed.scheme();
    let abc = abc_config(cfg, scheme)?;
    let pool = parallel::thread_pool(cfg.workers)?;
    let posterior = parallel::run_rejection(&observed, &abc, &pool).map_err(|e| insufficient(e, &abc))?;

    io::ensure_dir(&out)?;
    let posterior_csv = out.join("posterior.csv");
    io::write_posterior(&posterior_csv, &meta, &posterior.draws)?;
    let sidecar = PosteriorSidecar {
        abc: abc.clone(),
        scheme: scheme_label(scheme),
        observed_sha256: obs_file.sha256(),
        epsilon: posterior.epsilon,
        pool_size: posterior.pool_size,
        n_compatible: posterior.n_compatible,
        n_accepted: posterior.draws.len(),
        seed: abc.master_seed,
    };
    io::write_json(&io::sidecar_path(&posterior_csv), &meta, &sidecar)?;

    let truth = cfg.truth;
    let spikes = [!abc.force_positive_beta, !abc.force_positive_m_r];
    let inf = f64::INFINITY;
    let columns: [(&str, Vec<f64>, bool, f64, Option<f64>); 4] = [
        ("alpha", posterior.alphas(), false, 1.0, truth.map(|t| t.alpha)),
        ("beta", posterior.betas(), spikes[0], 1.0, truth.map(|t| t.beta)),
        ("m_R", posterior.m_Rs(), false, inf, truth.map(|t| t.m_R)),
        ("m_r", posterior.m_rs(), spikes[1], inf, truth.map(|t| t.m_r)),
    ];
    let (tau_big, tau_small) = stats::rate_posteriors(&posterior);
    let truth_rates = truth.map(|t| ybbp_core::model::theoretical_rates(&t));
    let rate_columns: [(&str, Vec<f64>, bool, f64, Option<f64>); 2] = [
        ("tau_R", tau_big, false, inf, truth_rates.map(|r| r.tau_R)),
        ("tau_r", tau_small, false, inf, truth_rates.map(|r| r.tau_r)),
    ];

    let mut summaries = Vec::new();
    if cfg.summary.plots {
        io::ensure_dir(&out.join("plots"))?;
    }
    for (name, values, spike, upper, t) in columns.iter().chain(rate_columns.iter()) {
        let (summary, density, set) = summarise(values, level, *spike, *upper, *t)?;
        if let Some(est) = &density {
            io::write_density(&out.join(format!("density_{name}.csv")), &meta, est)?;
            if cfg.summary.plots {
                let svg = plot::density_svg(name, est, set.as_ref(), *t);
                plot::write_svg(&out.join("plots").join(format!("{name}.svg")), &svg)?;
            }
        }
        summaries.push(summary);
    }

    let mut groups = Vec::new();
    for (which, spike) in [(SpikeParam::Beta, spikes[0]), (SpikeParam::MR, spikes[1])] {
        if !spike {
            continue;
        }
        let (a1, a2): (Vec<AcceptedDraw>, Vec<AcceptedDraw>) =
            posterior.draws.iter().partition(|d| which.value(&d.theta) == 0.0);
        io::write_draw_table(&out.join(format!("group_A1_{}.csv", which.name())), &meta, &a1)?;
        io::write_draw_table(&out.join(format!("group_A2_{}.csv", which.name())), &meta, &a2)?;
        groups.push(GroupSplit { parameter: which.name().into(), a1: a1.len(), a2: a2.len() });
    }

    let mut it = summaries.into_iter();
    let mut next = || it.next().expect("six summaries");
    let summary = InferSummary {
        run: RunInfo {
            scheme: scheme_label(scheme),
            law_family: abc.law_family.label(),
            pool_size: abc.pool_size,
            tolerance_quantile: abc.tolerance_quantile,
            force_positive_beta: abc.force_positive_beta,
            force_positive_m_r: abc.force_positive_m_r,
            m_max: abc.prior.m_max,
            hpd_level: level,
            bandwidth_rule: "silverman".into(),
            observed_sha256: obs_file.sha256(),
            epsilon: posterior.epsilon,
            n_compatible: posterior.n_compatible,
            n_accepted: posterior.draws.len(),
        },
        parameters: Parameters { alpha: next(), beta: next(), m_R: next(), m_r: next() },
        rates: Rates { tau_R: next(), tau_r: next() },
        groups,
    };
    io::write_json(&out.join("summary.json"), &meta, &summary)?;
    Ok(InferOutcome { posterior, summary })
}

pub fn render_summary(s: &InferSummary) -> String {
    let mut text = format!(
        "scheme {}, law {}: {} draws accepted from {} compatible paths (pool {}), epsilon {:.6}\n",
        s.run.scheme, s.run.law_family, s.run.n_accepted, s.run.n_compatible, s.run.pool_size, s.run.epsilon
    );
    let level = (s.run.hpd_level * 100.0).round();
    let p = &s.parameters;
    for (name, ps) in [("alpha", &p.alpha), ("beta", &p.beta), ("m_R", &p.m_R), ("m_r", &p.m_r), ("tau_R", &s.rates.tau_R), ("tau_r", &s.rates.tau_r)] {
        let hpd: Vec<String> = ps.hpd.iter().map(|[a, b]| format!("({a:.4}, {b:.4})")).collect();
        text.push_str(&format!("{name:<6} mean {:>10.4}  {level}% HPD {}", ps.mean, hpd.join(" U ")));
        if let Some(pz) = ps.spike_probability {
            text.push_str(&format!("  P({name}=0|data) {pz:.3}  K {}", ps.bayes_factor_display.as_deref().unwrap_or("-")));
        }
        if let Some(r) = ps.rmse {
            text.push_str(&format!("  RMSE {r:.4}"));
        }
        if let Some(z) = &ps.rmse_zero_surrogate {
            text.push_str(&format!("  RMSE {:.4} ({})", z.value, z.label));
        }
        text.push('\n');
    }
    text
}

// ---- predict ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantitySummary {
    pub mean: f64,
    pub hpd: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_mass: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictSummary {
    pub start: Census,
    pub horizon: usize,
    pub replicates: u64,
    pub n_draws: usize,
    pub law_family: String,
    pub hpd_level: f64,
    /// α(Z^R m_R + Z^r m_r) at the posterior means, with the expected
    /// mating split of the start census.
    pub one_step_expected_females_at_posterior_mean: f64,
    pub quantities: Vec<(String, QuantitySummary)>,
}

pub fn predict(cfg: &ExperimentConfig) -> AppResult<PredictSummary> {
    let meta = meta(cfg)?;
    let out = cfg.output_dir()?.to_path_buf();
    let level = cfg.hpd_level()?;
    let section = cfg.predictive()?;
    let posterior_path = cfg
        .io
        .posterior
        .clone()
        .ok_or_else(|| AppError::config("predict needs a posterior: set `io.posterior`"))?;
    if !posterior_path.exists() {
        return Err(AppError::config(format!("posterior file {} does not exist", posterior_path.display())));
    }
    let (posterior, sidecar) = io::read_posterior(&posterior_path)?;
    if posterior.draws.is_empty() {
        return Err(AppError::format(&posterior_path, "posterior has no draws"));
    }
    let start = match (section.start, &cfg.io.observed) {
        (Some(s), _) => s,
        (None, Some(p)) => {
            let p = cfg.input("io.observed", Some(p))?;
            let obs = ObservedFile::read(&p)?;
            Census::new(obs.last.females, obs.last.males_R, obs.last.males_r)
        }
        (None, None) => {
            return Err(AppError::config("predict needs a start census: set `predictive.start` or `io.observed`"))
        }
    };
    let family: LawFamily = section
        .law_family
        .or(sidecar.as_ref().map(|s| s.abc.law_family))
        .unwrap_or_default();
    let pcfg = PredictiveConfig { horizon: section.horizon, replicates: section.replicates, start, seed: cfg.seed()? };
    pcfg.validate().map_err(|e| AppError::config(format!("`predictive`: {e}")))?;
    let pool = parallel::thread_pool(cfg.workers)?;
    let rows = parallel::predict(&posterior, &pcfg, family, &pool)?;

    io::ensure_dir(&out)?;
    io::write_predictive(&out.join("predictive.csv"), &meta, &rows)?;
    if cfg.summary.plots {
        io::ensure_dir(&out.join("plots"))?;
    }
    let mut quantities = Vec::new();
    let columns: [(&str, fn(&ybbp_core::model::GenerationState) -> u64); 4] = [
        ("F", |s| s.females),
        ("M_R", |s| s.males_R),
        ("M_Rr", |s| s.males_Rr),
        ("M_rr", |s| s.males_rr),
    ];
    for (name, get) in columns {
        let values: Vec<f64> = rows.iter().map(|r| get(&r.state) as f64).collect();
        let mean = stats::point_estimate(&values)?;
        let q = match stats::kde(&values)? {
            DensityReport::PointMass(c) => QuantitySummary { mean, hpd: vec![[c, c]], point_mass: Some(c) },
            DensityReport::Smooth(est) => {
                let set = clip(stats::hpd(&values, level)?, f64::INFINITY);
                io::write_density(&out.join(format!("density_{name}.csv")), &meta, &est)?;
                if cfg.summary.plots {
                    plot::write_svg(
                        &out.join("plots").join(format!("{name}.svg")),
                        &plot::density_svg(name, &est, Some(&set), None),
                    )?;
                }
                QuantitySummary { mean, hpd: set.intervals.iter().map(|&(a, b)| [a, b]).collect(), point_mass: None }
            }
        };
        quantities.push((name.to_string(), q));
    }
    let n = posterior.draws.len() as f64;
    let avg = |f: fn(&ParamVector) -> f64| posterior.draws.iter().map(|d| f(&d.theta)).sum::<f64>() / n;
    let theta_bar = ParamVector {
        alpha: avg(|t| t.alpha),
        beta: avg(|t| t.beta),
        m_R: avg(|t| t.m_R),
        m_r: avg(|t| t.m_r),
    };
    let summary = PredictSummary {
        start,
        horizon: pcfg.horizon,
        replicates: pcfg.replicates,
        n_draws: posterior.draws.len(),
        law_family: family.label(),
        hpd_level: level,
        one_step_expected_females_at_posterior_mean: expected_next_females(&theta_bar, start),
        quantities,
    };
    io::write_json(&out.join("predictive_summary.json"), &meta, &summary)?;
    Ok(summary)
}

// ---- report ----

#[derive(Debug, Deserialize)]
struct SummaryFile {
    #[allow(dead_code)]
    meta: Meta,
    #[serde(flatten)]
    summary: InferSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub run: String,
    pub law_family: String,
    pub n_accepted: usize,
    pub epsilon: f64,
    pub parameters: Parameters,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub scheme: String,
    pub hpd_level: f64,
    pub rows: Vec<ReportRow>,
}

/// Run directories named directly, or found one level below.
fn run_dirs(roots: &[PathBuf]) -> AppResult<Vec<PathBuf>> {
    let mut runs = Vec::new();
    for root in roots {
        if !root.is_dir() {
            return Err(AppError::config(format!("run directory {} does not exist", root.display())));
        }
        if root.join("summary.json").is_file() {
            runs.push(root.clone());
            continue;
        }
        let mut found: Vec<PathBuf> = std::fs::read_dir(root)
            .map_err(|e| AppError::io(root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("summary.json").is_file())
            .collect();
        found.sort();
        runs.extend(found);
    }
    if runs.is_empty() {
        return Err(AppError::config("no run directories with a summary.json were found"));
    }
    Ok(runs)
}

fn run_name(dir: &Path) -> String {
    dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn hpd_text(hpd: &[[f64; 2]]) -> String {
    hpd.iter().map(|[a, b]| format!("({a:.4}; {b:.4})")).collect::<Vec<_>>().join(" U ")
}

pub fn report(cfg: &ExperimentConfig) -> AppResult<Report> {
    let meta = meta(cfg)?;
    let out = cfg.output_dir()?.to_path_buf();
    if cfg.io.runs.is_empty() {
        return Err(AppError::config("report needs `io.runs`"));
    }
    let dirs = run_dirs(&cfg.io.runs)?;
    let mut loaded = Vec::new();
    for dir in &dirs {
        let file: SummaryFile = io::read_json(&dir.join("summary.json"))?;
        loaded.push((run_name(dir), file.summary));
    }

    let first = &loaded[0].1.run;
    let mut mismatched = Vec::new();
    for (name, s) in &loaded[1..] {
        let r = &s.run;
        let checks: [(&str, String, String); 5] = [
            ("scheme", first.scheme.clone(), r.scheme.clone()),
            ("observed_sha256", first.observed_sha256.clone(), r.observed_sha256.clone()),
            ("pool_size", first.pool_size.to_string(), r.pool_size.to_string()),
            ("tolerance_quantile", first.tolerance_quantile.to_string(), r.tolerance_quantile.to_string()),
            ("hpd_level", first.hpd_level.to_string(), r.hpd_level.to_string()),
        ];
        for (field, a, b) in checks {
            if a != b {
                mismatched.push(format!("{field} ({}: {a}, {name}: {b})", loaded[0].0));
            }
        }
    }
    if !mismatched.is_empty() {
        return Err(AppError::config(format!("incompatible run metadata: {}", mismatched.join("; "))));
    }

    let report = Report {
        scheme: first.scheme.clone(),
        hpd_level: first.hpd_level,
        rows: loaded
            .iter()
            .map(|(name, s)| ReportRow {
                run: name.clone(),
                law_family: s.run.law_family.clone(),
                n_accepted: s.run.n_accepted,
                epsilon: s.run.epsilon,
                parameters: s.parameters.clone(),
            })
            .collect(),
    };

    io::ensure_dir(&out)?;
    io::write_json(&out.join("report.json"), &meta, &report)?;
    let mut csv = io::CsvOut::new(&meta, &[]);
    csv.row([
        "run", "law_family", "n_accepted", "alpha_mean", "alpha_hpd", "beta_mean", "beta_hpd", "m_R_mean", "m_R_hpd",
        "m_r_mean", "m_r_hpd",
    ]);
    for row in &report.rows {
        let p = &row.parameters;
        csv.row([
            row.run.clone(),
            row.law_family.clone(),
            row.n_accepted.to_string(),
            format!("{:.4}", p.alpha.mean),
            hpd_text(&p.alpha.hpd),
            format!("{:.4}", p.beta.mean),
            hpd_text(&p.beta.hpd),
            format!("{:.4}", p.m_R.mean),
            hpd_text(&p.m_R.hpd),
            format!("{:.4}", p.m_r.mean),
            hpd_text(&p.m_r.hpd),
        ]);
    }
    csv.save(&out.join("report.csv"))?;
    Ok(report)
}

pub fn observed_scheme(obs: &Observed) -> String {
    scheme_label(obs.scheme())
}
