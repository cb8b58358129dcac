use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chanforecast::analysis::{adf_test, beam_metrics, csi_metrics, median, schwert_lags, to_db};
use chanforecast::channel::{build_dataset, read_dataset, write_dataset, Dataset, DatasetDtype, Partition, WindowRef};
use chanforecast::nn::{ParamStore, Real};
use chanforecast::numerics::{CVec, SeededRng};
use chanforecast::predictors::{
    ar_predict, evaluate_loss, lpcnet_param_formula, predict_windows, read_model, sh_predict, train, write_model,
    LpcNet, LpcnetConfig, ModelKind, Precision, PredictorError, AR_ORDER,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::apply_flags;
use crate::manifest::RunManifest;
use crate::report::{to_csv, JsonReport, ModelSummary, ReportRow};
use crate::{CliError, ExperimentConfig};

pub const DATASET_FILE: &str = "dataset.chpd";

/// Stream index of the model initialisation and shuffling RNG; trajectories
/// use `0..n` and the split uses `u64::MAX`.
const TRAIN_STREAM: u64 = u64::MAX - 1;

/// Options shared by every verb.
#[derive(Debug, Clone)]
pub struct Common {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub out: PathBuf,
    pub dtype: Option<Precision>,
}

struct Loaded {
    cfg: ExperimentConfig,
    manifest: RunManifest,
}

fn load(common: &Common, command: &str) -> Result<Loaded, CliError> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::desk(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let mut manifest = RunManifest::new(command, cfg.seed, common.deterministic, cfg.echo());
    if let Some(p) = &common.config {
        manifest.add_input(p)?;
    }
    fs::create_dir_all(&common.out).map_err(|e| CliError::Io(format!("{}: {e}", common.out.display())))?;
    Ok(Loaded { cfg, manifest })
}

fn open_dataset(cfg: &ExperimentConfig, path: &Path, manifest: &mut RunManifest) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let records = read_dataset(BufReader::new(file))?;
    manifest.add_input(path)?;
    if let Some(r) = records.iter().find(|r| r.snapshots.first().map(|h| h.len()) != Some(cfg.scenario.n_b())) {
        return Err(CliError::Config(format!(
            "dataset has {} antennas, config expects N_b = {}",
            r.snapshots.first().map_or(0, |h| h.len()),
            cfg.scenario.n_b()
        )));
    }
    Ok(Dataset::from_records(records, cfg.model.k, &cfg.horizons, cfg.split_ratio, &SeededRng::new(cfg.seed))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub trajectories: usize,
    pub train_trajectories: usize,
    pub test_trajectories: usize,
    /// `(horizon in steps, windows over all trajectories)`.
    pub windows: Vec<(usize, usize)>,
    pub regenerated: usize,
}

pub fn generate(common: &Common) -> Result<GenerateSummary, CliError> {
    let Loaded { cfg, mut manifest } = load(common, "generate")?;
    let ds = build_dataset(&cfg.scenario, cfg.n_traj, cfg.model.k, &cfg.horizons, cfg.split_ratio, &SeededRng::new(cfg.seed))?;
    let dtype = match common.dtype.unwrap_or(Precision::F64) {
        Precision::F64 => DatasetDtype::F64,
        Precision::F32 => DatasetDtype::F32,
    };
    let path = common.out.join(DATASET_FILE);
    let mut w = BufWriter::new(File::create(&path)?);
    write_dataset(&mut w, &ds.trajectories, dtype)?;
    w.flush()?;
    drop(w);
    manifest.add_output(&common.out, DATASET_FILE)?;
    manifest.write(&common.out)?;
    let windows = cfg
        .horizons
        .iter()
        .map(|&h| (h, ds.windows(Partition::Train, h).len() + ds.windows(Partition::Test, h).len()))
        .collect();
    Ok(GenerateSummary {
        trajectories: ds.trajectories.len(),
        train_trajectories: ds.train.len(),
        test_trajectories: ds.test.len(),
        windows,
        regenerated: ds.regenerated,
    })
}

#[derive(Debug, Clone)]
pub struct AdfOptions {
    pub data: PathBuf,
    /// `None` selects Schwert's rule for the segment length.
    pub lags: Option<usize>,
    pub segment_len: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdfRow {
    pub trajectory: usize,
    pub segment_start: usize,
    pub scenario: String,
    pub speed_kmh: f64,
    pub lags: usize,
    pub t_stat: f64,
    pub p_value: f64,
}

/// ADF p-values of sliding segments of antenna 0's real part, written to
/// `adf.csv`. Returns the rows and the median p per speed.
pub fn adf(common: &Common, opts: &AdfOptions) -> Result<(Vec<AdfRow>, Vec<(f64, f64)>), CliError> {
    let Loaded { cfg, mut manifest } = load(common, "adf")?;
    let ds = open_dataset(&cfg, &opts.data, &mut manifest)?;
    if opts.stride == 0 {
        return Err(CliError::Config("stride must be positive".into()));
    }
    let lags = opts.lags.unwrap_or_else(|| schwert_lags(opts.segment_len));
    let per_traj: Vec<Vec<AdfRow>> = ds
        .trajectories
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let series: Vec<f64> = rec.snapshots.iter().map(|h| h[0].re).collect();
            if series.len() < opts.segment_len {
                return Err(CliError::Config(format!(
                    "segment length {} exceeds trajectory length {}",
                    opts.segment_len,
                    series.len()
                )));
            }
            let mut rows = Vec::new();
            for start in (0..=series.len() - opts.segment_len).step_by(opts.stride) {
                let r = adf_test(&series[start..start + opts.segment_len], lags)?;
                rows.push(AdfRow {
                    trajectory: i,
                    segment_start: start,
                    scenario: rec.scenario.name().to_string(),
                    speed_kmh: speed_key(rec.speed_mps * 3.6) as f64 / 100.0,
                    lags,
                    t_stat: r.t_stat,
                    p_value: r.p_value,
                });
            }
            Ok(rows)
        })
        .collect::<Result<_, CliError>>()?;
    let rows: Vec<AdfRow> = per_traj.into_iter().flatten().collect();
    let mut text = String::from("trajectory,segment_start,scenario,speed_kmh,lags,t_stat,p_value\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6e}\n",
            r.trajectory, r.segment_start, r.scenario, r.speed_kmh, r.lags, r.t_stat, r.p_value
        ));
    }
    fs::write(common.out.join("adf.csv"), text)?;
    manifest.add_output(&common.out, "adf.csv")?;
    manifest.write(&common.out)?;
    let mut by_speed: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        by_speed.entry(speed_key(r.speed_kmh)).or_default().push(r.p_value);
    }
    let medians = by_speed
        .into_iter()
        .map(|(k, p)| (k as f64 / 100.0, median(&p).unwrap_or(f64::NAN)))
        .collect();
    Ok((rows, medians))
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    pub data: PathBuf,
    pub kind: Option<ModelKind>,
    pub flags: Option<String>,
    /// Training horizon in time units, e.g. `4ms`.
    pub horizon: Option<String>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub method: String,
    pub model_file: String,
    pub dtype: String,
    pub horizon_ms: f64,
    pub parameters: usize,
    pub train_windows: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub steps: usize,
    pub epoch_loss: Vec<f64>,
}

#[derive(Serialize)]
struct Divergence<'a> {
    method: &'a str,
    error: String,
    epoch: usize,
    batch: usize,
    param_norm: f64,
}

/// Report label of a trained model: the kind, plus the ablation cell when
/// the flags differ from the kind's defaults.
pub fn method_label(kind: ModelKind, cfg: &LpcnetConfig) -> String {
    match kind {
        ModelKind::Lpcnet if cfg.variant_label() != "C+J" => format!("LPCNet[{}]", cfg.variant_label()),
        _ => kind.name().to_string(),
    }
}

pub fn train_model(common: &Common, opts: &TrainOptions) -> Result<TrainSummary, CliError> {
    let Loaded { mut cfg, mut manifest } = load(common, "train")?;
    let kind = opts.kind.unwrap_or(cfg.kind);
    if !kind.is_neural() {
        return Err(CliError::Config(format!("{kind} has no trainable parameters")));
    }
    if let Some(h) = &opts.horizon {
        cfg.model.horizon = cfg.horizon_steps(h).map_err(CliError::Config)?;
    }
    let mut model = cfg.model_for(kind);
    if let Some(f) = &opts.flags {
        apply_flags(&mut model, f).map_err(CliError::Config)?;
    }
    if !cfg.horizons.contains(&model.horizon) {
        return Err(CliError::Config(format!(
            "training horizon {} ms is not among the dataset horizons",
            cfg.horizon_ms(model.horizon)
        )));
    }
    manifest.config.push(("Trained variant".into(), method_label(kind, &model)));
    let ds = open_dataset(&cfg, &opts.data, &mut manifest)?;
    let precision = common.dtype.unwrap_or(Precision::F32);
    let method = method_label(kind, &model);
    let stem = opts.name.clone().unwrap_or_else(|| {
        format!("{}_{}ms", method.to_lowercase().replace(['[', ']'], "").replace(' ', "-"), cfg.horizon_ms(model.horizon))
    });
    let mut rng = SeededRng::new(cfg.seed).spawn(TRAIN_STREAM);
    let refs = ds.windows(Partition::Train, model.horizon);
    let result = match precision {
        Precision::F32 => fit::<f32>(kind, &model, &ds, &refs, &mut rng, &common.out, &stem),
        Precision::F64 => fit::<f64>(kind, &model, &ds, &refs, &mut rng, &common.out, &stem),
    };
    let report = match result {
        Ok(r) => r,
        Err(PredictorError::NonFiniteLoss { epoch, batch, param_norm }) => {
            let dump = Divergence {
                method: &method,
                error: "non-finite loss".into(),
                epoch,
                batch,
                param_norm,
            };
            let file = format!("{stem}.diverged.json");
            fs::write(common.out.join(&file), serde_json::to_string_pretty(&dump)? + "\n")?;
            manifest.add_output(&common.out, &file)?;
            manifest.write(&common.out)?;
            return Err(CliError::Numeric(format!(
                "training diverged at epoch {epoch}, batch {batch} (parameter norm {param_norm:.4e}); details in {file}"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let model_file = format!("{stem}.model");
    let mut curve = String::from("epoch,loss\n");
    for (i, l) in report.epoch_loss.iter().enumerate() {
        curve.push_str(&format!("{},{:.9e}\n", i + 1, l));
    }
    fs::write(common.out.join(format!("{stem}_loss.csv")), curve)?;
    let summary = TrainSummary {
        method,
        model_file: model_file.clone(),
        dtype: precision.name().into(),
        horizon_ms: cfg.horizon_ms(model.horizon),
        parameters: model.param_count(),
        train_windows: refs.len(),
        initial_loss: report.initial_loss,
        final_loss: report.final_loss,
        steps: report.steps,
        epoch_loss: report.epoch_loss,
    };
    fs::write(common.out.join(format!("{stem}_train.json")), serde_json::to_string_pretty(&summary)? + "\n")?;
    for f in [model_file, format!("{stem}_loss.csv"), format!("{stem}_train.json")] {
        manifest.add_output(&common.out, &f)?;
    }
    manifest.write(&common.out)?;
    Ok(summary)
}

fn fit<T: Real>(
    kind: ModelKind,
    model: &LpcnetConfig,
    ds: &Dataset,
    refs: &[WindowRef],
    rng: &mut SeededRng,
    out: &Path,
    stem: &str,
) -> Result<chanforecast::predictors::TrainReport, PredictorError> {
    let (net, mut store) = LpcNet::init::<T, _>(model, rng)?;
    let report = train(kind, &net, &mut store, ds, refs, rng)?;
    let mut w = BufWriter::new(File::create(out.join(format!("{stem}.model")))?);
    write_model(&mut w, kind, model, &store)?;
    w.flush()?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub data: PathBuf,
    pub models: Vec<PathBuf>,
    pub partition: Partition,
}

/// Speeds are stored in whole mm/s, so group and report them at 0.01 km/h.
fn speed_key(kmh: f64) -> i64 {
    (kmh * 100.0).round() as i64
}

/// Window indices of `refs` grouped by trajectory speed, ascending.
fn by_speed(ds: &Dataset, refs: &[WindowRef]) -> BTreeMap<i64, Vec<usize>> {
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, r) in refs.iter().enumerate() {
        groups.entry(speed_key(ds.trajectories[r.traj].speed_mps * 3.6)).or_default().push(i);
    }
    groups
}

enum Predictions {
    Csi(Vec<CVec>),
    Beam(Vec<CVec>),
}

fn rows_for(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    refs: &[WindowRef],
    horizon: usize,
    method: &str,
    preds: &Predictions,
) -> Result<Vec<ReportRow>, CliError> {
    let mut rows = Vec::new();
    for (speed, idx) in by_speed(ds, refs) {
        let truths: Vec<&CVec> = idx.iter().map(|&i| ds.window(refs[i]).target).collect();
        let (nmse_db, cosine_pct) = match preds {
            Predictions::Csi(p) => {
                let sel: Vec<CVec> = idx.iter().map(|&i| p[i].clone()).collect();
                let (e, c) = csi_metrics(&sel, &truths)?;
                (Some(to_db(e)), c)
            }
            Predictions::Beam(p) => {
                let sel: Vec<CVec> = idx.iter().map(|&i| p[i].clone()).collect();
                (None, beam_metrics(&sel, &truths)?)
            }
        };
        rows.push(ReportRow {
            scenario: cfg.scenario.kind.name().to_string(),
            speed_kmh: speed as f64 / 100.0,
            horizon_ms: cfg.horizon_ms(horizon),
            method: method.to_string(),
            nmse_db,
            cosine_pct,
            n: idx.len(),
        });
    }
    Ok(rows)
}

fn model_outputs<T: Real>(
    kind: ModelKind,
    net: &LpcNet,
    store: &ParamStore<T>,
    ds: &Dataset,
    refs: &[WindowRef],
) -> Result<(Vec<CVec>, f64), PredictorError> {
    Ok((predict_windows(net, store, ds, refs)?, evaluate_loss(kind, net, store, ds, refs)?))
}

/// SH and AR at every configured horizon, then every model at its own
/// horizon; writes `report.csv` and `report.json`.
pub fn evaluate(common: &Common, opts: &EvaluateOptions) -> Result<JsonReport, CliError> {
    let Loaded { cfg, mut manifest } = load(common, "evaluate")?;
    let ds = open_dataset(&cfg, &opts.data, &mut manifest)?;
    let mut rows = Vec::new();
    for &h in &cfg.horizons {
        let refs = ds.windows(opts.partition, h);
        let sh: Vec<CVec> = refs.par_iter().map(|&r| sh_predict(ds.window(r).past)).collect();
        let ar: Vec<CVec> = refs.par_iter().map(|&r| ar_predict(ds.window(r).past, h, AR_ORDER).value).collect();
        rows.extend(rows_for(&cfg, &ds, &refs, h, "SH", &Predictions::Csi(sh))?);
        rows.extend(rows_for(&cfg, &ds, &refs, h, "AR", &Predictions::Csi(ar))?);
    }
    let mut models = Vec::new();
    for path in &opts.models {
        let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let m = read_model(BufReader::new(file))?;
        manifest.add_input(path)?;
        let h = m.config.horizon;
        if !cfg.horizons.contains(&h) {
            return Err(CliError::Config(format!(
                "{}: horizon {} ms is not in the dataset",
                path.display(),
                cfg.horizon_ms(h)
            )));
        }
        if m.config.n_b != ds.n_b() || m.config.k != ds.k {
            return Err(CliError::Config(format!(
                "{}: model expects N_b = {}, K = {}; dataset has N_b = {}, K = {}",
                path.display(),
                m.config.n_b,
                m.config.k,
                ds.n_b(),
                ds.k
            )));
        }
        let net = LpcNet::bind(&m.config, &m.store)?;
        let refs = ds.windows(opts.partition, h);
        let (out, loss) = match m.precision {
            Precision::F32 => model_outputs(m.kind, &net, &m.store.cast::<f32>(), &ds, &refs)?,
            Precision::F64 => model_outputs(m.kind, &net, &m.store, &ds, &refs)?,
        };
        let method = method_label(m.kind, &m.config);
        let preds = if m.kind.predicts_beam() { Predictions::Beam(out) } else { Predictions::Csi(out) };
        rows.extend(rows_for(&cfg, &ds, &refs, h, &method, &preds)?);
        models.push(ModelSummary {
            file: path.to_string_lossy().into_owned(),
            method,
            horizon_ms: cfg.horizon_ms(h),
            dtype: m.precision.name().into(),
            loss,
        });
    }
    let report = JsonReport {
        partition: match opts.partition {
            Partition::Train => "train".into(),
            Partition::Test => "test".into(),
        },
        seed: cfg.seed,
        dataset_sha256: manifest.inputs.iter().find(|f| Path::new(&f.path) == opts.data).map(|f| f.sha256.clone()).unwrap_or_default(),
        models,
        rows,
    };
    fs::write(common.out.join("report.csv"), to_csv(&report.rows))?;
    fs::write(common.out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    manifest.add_output(&common.out, "report.csv")?;
    manifest.add_output(&common.out, "report.json")?;
    manifest.write(&common.out)?;
    Ok(report)
}

/// `(ParamStore total, closed form)` for the configured model. The closed
/// form drops the adjuster terms when the adjuster is off.
pub fn paramcount(common: &Common, kind: Option<ModelKind>, flags: Option<&str>) -> Result<(usize, usize), CliError> {
    let cfg = match &common.config {
        Some(p) => ExperimentConfig::parse(&fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)?,
        None => ExperimentConfig::desk(),
    };
    let kind = kind.unwrap_or(cfg.kind);
    if !kind.is_neural() {
        return Ok((0, 0));
    }
    let mut m = cfg.model_for(kind);
    if let Some(f) = flags {
        apply_flags(&mut m, f).map_err(CliError::Config)?;
    }
    let (_, store) = LpcNet::init::<f32, _>(&m, &mut SeededRng::new(0))?;
    let (nb, nz) = (m.n_b, m.n_z);
    let formula = if m.enable_adjuster {
        lpcnet_param_formula(nb, nz, m.n_i(), m.n_w, m.n_s)
    } else {
        10 * nb * nz + 4 * nz * nz + 4 * nz + 2 * nb
    };
    Ok((store.total_count(), formula))
}
