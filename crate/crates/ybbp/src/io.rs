//! File formats. CSV files open with `#` comment lines carrying the tool
//! version, seed and config hash; JSON files carry the same under `meta`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ybbp_core::abc::{AcceptedDraw, Observed, PosteriorSample};
use ybbp_core::model::{GenerationState, PathRecord};
use ybbp_core::observation::{BasicSample, ExtendedSample, LastGeneration, SchemeVariant};
use ybbp_core::predictive::PredictiveRow;
use ybbp_core::stats::DensityEstimate;
use ybbp_core::ParamVector;

use crate::config::{sha256_hex, SchemeChoice};
use crate::error::{AppError, AppResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Meta {
    pub fn new(seed: u64, config_sha256: String) -> Self {
        Self { tool: "ybbp".into(), version: VERSION.into(), seed, config_sha256 }
    }

    fn comment(&self) -> String {
        format!("# {} {} seed={} config_sha256={}\n", self.tool, self.version, self.seed, self.config_sha256)
    }
}

pub fn ensure_dir(dir: &Path) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> AppResult<()> {
    let mut f = fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    f.write_all(bytes).map_err(|e| AppError::io(path, e))
}

/// A CSV body under a metadata comment.
pub struct CsvOut {
    buf: Vec<u8>,
}

impl CsvOut {
    pub fn new(meta: &Meta, extra: &[String]) -> Self {
        let mut buf = meta.comment().into_bytes();
        for line in extra {
            buf.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        Self { buf }
    }

    pub fn row<I: IntoIterator<Item = S>, S: ToString>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().map(|f| f.to_string()).collect();
        self.buf.extend_from_slice(line.join(",").as_bytes());
        self.buf.push(b'\n');
    }

    pub fn save(self, path: &Path) -> AppResult<()> {
        write_file(path, &self.buf)
    }
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, body: &T) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(&WithMeta { meta, body }).expect("serialisable");
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| AppError::format(path, format!("at `{}`: {}", e.path(), e.inner())))
}

/// Data rows of a comment-headed CSV, header rows included.
fn records(path: &Path) -> AppResult<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::format(path, e.to_string()))?;
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_owned).collect())
                .map_err(|e| AppError::format(path, e.to_string()))
        })
        .collect()
}

fn parse<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> AppResult<T> {
    field
        .parse()
        .map_err(|_| AppError::format(path, format!("record {line}: cannot parse `{field}`")))
}

fn expect_header(path: &Path, rows: &[Vec<String>], at: usize, header: &[&str]) -> AppResult<()> {
    match rows.get(at) {
        Some(row) if row.iter().map(String::as_str).eq(header.iter().copied()) => Ok(()),
        Some(row) => Err(AppError::format(
            path,
            format!("record {}: expected header `{}`, found `{}`", at + 1, header.join(","), row.join(",")),
        )),
        None => Err(AppError::format(path, format!("missing `{}` block", header.join(",")))),
    }
}

// ---- paths ----

pub const PATH_HEADER: [&str; 7] = ["n", "F", "M_R", "M_Rr", "M_rr", "Z_R", "Z_r"];

pub fn write_path(path: &Path, meta: &Meta, record: &PathRecord) -> AppResult<()> {
    let mut out = CsvOut::new(meta, &[]);
    out.row(PATH_HEADER);
    for s in &record.states {
        out.row([s.n as u64, s.females, s.males_R, s.males_Rr, s.males_rr, s.couples_R, s.couples_r]);
    }
    out.save(path)
}

pub fn read_path(path: &Path) -> AppResult<PathRecord> {
    let rows = records(path)?;
    expect_header(path, &rows, 0, &PATH_HEADER)?;
    let mut states = Vec::with_capacity(rows.len() - 1);
    for (i, row) in rows.iter().enumerate().skip(1) {
        if row.len() != 7 {
            return Err(AppError::format(path, format!("record {}: expected 7 fields", i + 1)));
        }
        let v: Vec<u64> = row.iter().map(|f| parse(path, i + 1, f)).collect::<AppResult<_>>()?;
        states.push(GenerationState {
            n: v[0] as u32,
            females: v[1],
            males_R: v[2],
            males_Rr: v[3],
            males_rr: v[4],
            couples_R: v[5],
            couples_r: v[6],
        });
    }
    Ok(PathRecord { states })
}

// ---- observed samples ----

const OBS_TOTALS: [&str; 3] = ["n", "F", "M"];
const OBS_LAST: [&str; 3] = ["F_N", "M_R_N", "M_r_N"];
const OBS_EXTRA: [&str; 4] = ["M_R_prev", "M_r_prev", "M_Rr_last", "M_rr_last"];

/// Raw contents of an observed-sample file, before any validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedFile {
    pub fm: Vec<(u64, u64)>,
    pub last: LastGeneration,
    /// (M^R_{N−1}, M^r_{N−1}, M^{R→r}_N, M^{r→r}_N)
    pub extended: Option<[u64; 4]>,
}

impl ObservedFile {
    /// Both projections of a simulated path, unvalidated.
    pub fn from_path(record: &PathRecord) -> Option<Self> {
        let n = record.states.len();
        if n < 2 {
            return None;
        }
        let prev = &record.states[n - 2];
        let last = &record.states[n - 1];
        Some(Self {
            fm: record.states[..n - 1].iter().map(|s| (s.females, s.males())).collect(),
            last: LastGeneration { females: last.females, males_R: last.males_R, males_r: last.males_r() },
            extended: Some([prev.males_R, prev.males_r(), last.males_Rr, last.males_rr]),
        })
    }

    pub fn basic_only(&self) -> Self {
        Self { extended: None, ..self.clone() }
    }

    pub fn write(&self, path: &Path, meta: &Meta) -> AppResult<()> {
        let mut out = CsvOut::new(meta, &[]);
        out.row(OBS_TOTALS);
        for (n, (f, m)) in self.fm.iter().enumerate() {
            out.row([n as u64, *f, *m]);
        }
        out.row(OBS_LAST);
        out.row([self.last.females, self.last.males_R, self.last.males_r]);
        if let Some(x) = self.extended {
            out.row(OBS_EXTRA);
            out.row(x);
        }
        out.save(path)
    }

    pub fn read(path: &Path) -> AppResult<Self> {
        let rows = records(path)?;
        expect_header(path, &rows, 0, &OBS_TOTALS)?;
        let mut fm = Vec::new();
        let mut i = 1;
        while i < rows.len() && rows[i].first().map(String::as_str) != Some(OBS_LAST[0]) {
            let row = &rows[i];
            if row.len() != 3 {
                return Err(AppError::format(path, format!("record {}: expected n,F,M", i + 1)));
            }
            let n: usize = parse(path, i + 1, &row[0])?;
            if n != fm.len() {
                return Err(AppError::format(path, format!("record {}: generation {n} out of order", i + 1)));
            }
            fm.push((parse(path, i + 1, &row[1])?, parse(path, i + 1, &row[2])?));
            i += 1;
        }
        if fm.is_empty() {
            return Err(AppError::format(path, "no n,F,M rows"));
        }
        expect_header(path, &rows, i, &OBS_LAST)?;
        let values = |at: usize, width: usize| -> AppResult<Vec<u64>> {
            let row = rows
                .get(at)
                .filter(|r| r.len() == width)
                .ok_or_else(|| AppError::format(path, format!("record {}: expected {width} counts", at + 1)))?;
            row.iter().map(|f| parse(path, at + 1, f)).collect()
        };
        let l = values(i + 1, 3)?;
        let last = LastGeneration { females: l[0], males_R: l[1], males_r: l[2] };
        let extended = if rows.len() > i + 2 {
            expect_header(path, &rows, i + 2, &OBS_EXTRA)?;
            let x = values(i + 3, 4)?;
            if rows.len() > i + 4 {
                return Err(AppError::format(path, format!("record {}: unexpected trailing data", i + 5)));
            }
            Some([x[0], x[1], x[2], x[3]])
        } else {
            None
        };
        Ok(Self { fm, last, extended })
    }

    /// The variant implied by the extended block's zero pattern, if any.
    pub fn implied_variant(&self) -> Option<SchemeVariant> {
        self.extended.and_then(|x| SchemeVariant::detect(x[2], x[3]))
    }

    /// Validated sample under the chosen scheme.
    pub fn to_observed(&self, choice: SchemeChoice, path: &Path) -> AppResult<Observed> {
        let basic = BasicSample::new(self.fm.clone(), self.last).map_err(|e| AppError::format(path, e.to_string()))?;
        let variant = match choice {
            SchemeChoice::Basic => return Ok(Observed::Basic(basic)),
            SchemeChoice::Auto if self.extended.is_none() => return Ok(Observed::Basic(basic)),
            SchemeChoice::Auto => self
                .implied_variant()
                .ok_or_else(|| AppError::format(path, "M_Rr_last and M_rr_last are both zero"))?,
            SchemeChoice::BothPositive => SchemeVariant::BothPositive,
            SchemeChoice::RrZero => SchemeVariant::RrZero,
            SchemeChoice::RmutZero => SchemeVariant::RmutZero,
        };
        let x = self
            .extended
            .ok_or_else(|| AppError::format(path, "the extended scheme needs the M_R_prev,... block"))?;
        let sample = ExtendedSample::new(basic, x[0], x[1], x[2], x[3]).map_err(|e| AppError::format(path, e.to_string()))?;
        let observed = Observed::Extended(sample, variant);
        observed.validate().map_err(|e| AppError::format(path, e.to_string()))?;
        Ok(observed)
    }

    pub fn sha256(&self) -> String {
        let mut text = String::new();
        for (f, m) in &self.fm {
            text.push_str(&format!("{f},{m};"));
        }
        text.push_str(&format!("{},{},{}", self.last.females, self.last.males_R, self.last.males_r));
        if let Some(x) = self.extended {
            text.push_str(&format!(";{},{},{},{}", x[0], x[1], x[2], x[3]));
        }
        sha256_hex(text.as_bytes())
    }
}

// ---- posterior ----

pub const POSTERIOR_HEADER: [&str; 6] = ["alpha", "beta", "m_R", "m_r", "distance", "path_index"];

pub fn write_posterior(path: &Path, meta: &Meta, draws: &[AcceptedDraw]) -> AppResult<()> {
    let mut out = CsvOut::new(meta, &[]);
    out.row(POSTERIOR_HEADER);
    for d in draws {
        let t = d.theta;
        out.row([
            t.alpha.to_string(),
            t.beta.to_string(),
            t.m_R.to_string(),
            t.m_r.to_string(),
            d.distance.to_string(),
            d.path_index.to_string(),
        ]);
    }
    out.save(path)
}

pub fn read_posterior_draws(path: &Path) -> AppResult<Vec<AcceptedDraw>> {
    let rows = records(path)?;
    expect_header(path, &rows, 0, &POSTERIOR_HEADER)?;
    rows.iter()
        .enumerate()
        .skip(1)
        .map(|(i, row)| {
            if row.len() != 6 {
                return Err(AppError::format(path, format!("record {}: expected 6 fields", i + 1)));
            }
            let f = |k: usize| parse::<f64>(path, i + 1, &row[k]);
            let theta = ParamVector::new(f(0)?, f(1)?, f(2)?, f(3)?)
                .map_err(|e| AppError::format(path, format!("record {}: {e}", i + 1)))?;
            Ok(AcceptedDraw { theta, distance: f(4)?, path_index: parse(path, i + 1, &row[5])? })
        })
        .collect()
}

/// Sidecar written next to `posterior.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSidecar {
    pub abc: ybbp_core::AbcConfig,
    pub scheme: String,
    pub observed_sha256: String,
    pub epsilon: f64,
    pub pool_size: u64,
    pub n_compatible: u64,
    pub n_accepted: usize,
    pub seed: u64,
}

pub fn sidecar_path(posterior_csv: &Path) -> PathBuf {
    posterior_csv.with_extension("json")
}

pub fn read_posterior(path: &Path) -> AppResult<(PosteriorSample, Option<PosteriorSidecar>)> {
    let draws = read_posterior_draws(path)?;
    let side = sidecar_path(path);
    let sidecar: Option<PosteriorSidecar> = if side.exists() { Some(read_json(&side)?) } else { None };
    let sample = PosteriorSample {
        epsilon: sidecar.as_ref().map_or_else(|| draws.iter().map(|d| d.distance).fold(0.0, f64::max), |s| s.epsilon),
        pool_size: sidecar.as_ref().map_or(0, |s| s.pool_size),
        n_compatible: sidecar.as_ref().map_or(draws.len() as u64, |s| s.n_compatible),
        draws,
    };
    Ok((sample, sidecar))
}

// ---- predictive ----

pub const PREDICTIVE_HEADER: [&str; 8] = ["draw_index", "replicate", "F", "M_R", "M_Rr", "M_rr", "Z_R", "Z_r"];

pub fn write_predictive(path: &Path, meta: &Meta, rows: &[PredictiveRow]) -> AppResult<()> {
    let mut out = CsvOut::new(meta, &[]);
    out.row(PREDICTIVE_HEADER);
    for r in rows {
        let s = r.state;
        out.row([r.draw_index, r.replicate, s.females, s.males_R, s.males_Rr, s.males_rr, s.couples_R, s.couples_r]);
    }
    out.save(path)
}

// ---- densities ----

pub fn write_density(path: &Path, meta: &Meta, est: &DensityEstimate) -> AppResult<()> {
    let mut out = CsvOut::new(meta, &[format!("bandwidth={} rule=silverman kernel=gaussian", est.bandwidth)]);
    out.row(["grid", "density"]);
    for (g, d) in est.grid.iter().zip(&est.density) {
        out.row([g.to_string(), d.to_string()]);
    }
    out.save(path)
}

pub fn write_draw_table(path: &Path, meta: &Meta, draws: &[AcceptedDraw]) -> AppResult<()> {
    write_posterior(path, meta, draws)
}
