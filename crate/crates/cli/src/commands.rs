use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use attrdiff::baselines::{
    fid_greedy_select, kcenter_select, lof_select, random_select, subsample, LofParams,
};
use attrdiff::diff::{
    compare, count_beyond, dimension_diff, endpoint_direction, histogram, select_endpoint,
    select_window, CompareOptions, Endpoint, Side,
};
use attrdiff::eval::benchmark::{run_benchmark, BenchmarkConfig, BenchmarkSource, Method};
use attrdiff::eval::{derive_seed, ScaleLaw, SynthConfig};
use attrdiff::format::{load_labels, load_matrix, save_matrix, MatrixFormat, Precision};
use attrdiff::report::{
    build_diff_result, directions_csv, histogram_svg, CountResult, HistogramResult, PcaSummary,
    Report, ReportBody, RunConfig,
};
use attrdiff::spectral::{fit_pca, load_pca, save_pca, transform};
use attrdiff::{AttributeMatrix, Order};
use serde_json::{json, Value};

use crate::args::*;

/// A failure with its process exit code: 1 for I/O, 2 for invalid input.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<attrdiff::Error> for CliError {
    fn from(e: attrdiff::Error) -> Self {
        Self {
            code: if e.is_io() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

fn with_path(path: &Path, e: attrdiff::Error) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{}: {}", path.display(), err.message);
    err
}

fn load(path: &Path) -> CliResult<AttributeMatrix> {
    load_matrix(path, MatrixFormat::from_path(path)).map_err(|e| with_path(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| with_path(path, e.into()))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| with_path(path, e.into()))
}

fn emit(report: &Report, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, report.to_json()),
        None => {
            print!("{}", report.to_json());
            Ok(())
        }
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn run_config(subcommand: &str, inputs: &[&Path], seed: u64) -> RunConfig {
    RunConfig {
        subcommand: subcommand.into(),
        inputs: inputs.iter().map(|p| path_str(p)).collect(),
        normalize: true,
        pca_threshold: None,
        k: attrdiff::diff::DEFAULT_TOP_K,
        bins: attrdiff::diff::DEFAULT_BINS,
        seed,
        output: None,
        options: BTreeMap::new(),
    }
}

fn check_threshold(t: Option<f64>) -> CliResult<()> {
    match t {
        Some(t) if !(t > 0.0 && t <= 1.0) => Err(invalid(format!(
            "PCA threshold must lie in (0, 1], got {t}"
        ))),
        _ => Ok(()),
    }
}

pub fn diff(a: &DiffArgs, seed: u64) -> CliResult<()> {
    let threshold = a.pca.threshold();
    check_threshold(threshold)?;
    if a.bins == 0 {
        return Err(invalid("--bins must be at least 1"));
    }
    let order = match a.order {
        OrderArg::W1 => Order::W1,
        OrderArg::W2 => Order::W2,
    };
    let mut config = run_config("diff", &[&a.real, &a.dev], seed);
    config.normalize = !a.no_normalize;
    config.pca_threshold = threshold;
    config.k = a.k;
    config.bins = a.bins;
    config.output = Some(path_str(&a.out));
    config.options.insert("order".into(), json!(order));
    config.options.insert("select_k".into(), json!(a.select_k));

    let real = load(&a.real)?;
    let dev = load(&a.dev)?;
    let opts = CompareOptions {
        normalize: !a.no_normalize,
        pca_threshold: threshold,
        top_k: a.k,
        order,
    };
    let cmp = compare(&real, &dev, &opts)?;
    let mut result = build_diff_result(&real, &dev, &cmp, a.bins, a.select_k)?;

    create_dir(&a.out)?;
    for s in &mut result.selected {
        let name = format!("hist_rank{}_dim{}.svg", s.rank, s.dim);
        let title = format!("rank {} / dim {} / score {:.6}", s.rank, s.dim, s.score);
        write_file(&a.out.join(&name), histogram_svg(&s.histogram, &title))?;
        s.svg = Some(name);
    }
    write_file(&a.out.join("directions.csv"), directions_csv(&result))?;
    Report::new(config, ReportBody::Diff(result))
        .write(&a.out.join("report.json"))
        .map_err(|e| with_path(&a.out, e))
}

pub fn select(a: &SelectArgs, seed: u64) -> CliResult<()> {
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.dev.as_deref());
    inputs.extend(a.pca_model.as_deref());
    let mut config = run_config("select", &inputs, seed);
    config.k = a.k;
    config.output = a.out.as_deref().map(path_str);
    config.options.insert("dim".into(), json!(a.dim));

    let mut real = load(&a.input)?;
    let mut dev = a.dev.as_deref().map(load).transpose()?;
    if let Some(p) = &a.pca_model {
        let model = load_pca(p).map_err(|e| with_path(p, e))?;
        config.pca_threshold = Some(model.threshold());
        real = transform(&model, &real)?;
        dev = dev.map(|d| transform(&model, &d)).transpose()?;
    }
    if let Some(d) = &dev {
        if d.cols() != real.cols() {
            return Err(attrdiff::Error::DimensionMismatch {
                left: real.cols(),
                right: d.cols(),
            }
            .into());
        }
    }
    real.check_col(a.dim)?;

    let result = if let (Some(center), Some(hw)) = (a.center, a.half_width) {
        config.options.insert("center".into(), json!(center));
        config.options.insert("half_width".into(), json!(hw));
        select_window(&real, a.dim, center, hw, a.k, seed)?
    } else {
        let endpoint = match a.endpoint {
            EndpointArg::Min => Endpoint::MinEnd,
            EndpointArg::Max => Endpoint::MaxEnd,
            EndpointArg::Auto => {
                let dev = dev
                    .as_ref()
                    .ok_or_else(|| invalid("--endpoint auto needs --dev"))?;
                endpoint_direction(&dimension_diff(
                    a.dim,
                    &real.column(a.dim),
                    &dev.column(a.dim),
                    Order::W2,
                ))
            }
        };
        config.options.insert("endpoint".into(), json!(endpoint));
        select_endpoint(&real, a.dim, endpoint, a.k)?
    };
    emit(
        &Report::new(config, ReportBody::Selection(result)),
        a.out.as_deref(),
    )
}

pub fn hist(a: &HistArgs, seed: u64) -> CliResult<()> {
    let mut config = run_config("hist", &[&a.real, &a.dev], seed);
    config.bins = a.bins;
    config.output = a.out.as_deref().map(path_str);
    config.options.insert("dim".into(), json!(a.dim));
    let real = load(&a.real)?;
    let dev = load(&a.dev)?;
    let h = histogram(&real, &dev, a.dim, a.bins)?;
    let count = match (a.count_above, a.count_below) {
        (Some(t), _) => Some((Side::Above, t)),
        (_, Some(t)) => Some((Side::Below, t)),
        _ => None,
    };
    let count = count
        .map(|(side, threshold)| -> CliResult<CountResult> {
            Ok(CountResult {
                side,
                threshold,
                real: count_beyond(&real, a.dim, threshold, side)?,
                dev: count_beyond(&dev, a.dim, threshold, side)?,
            })
        })
        .transpose()?;
    if let Some(c) = &count {
        config.options.insert(
            "count".into(),
            json!({ "side": c.side, "threshold": c.threshold }),
        );
    }
    if let Some(p) = &a.svg {
        write_file(p, histogram_svg(&h, &format!("dim {}", a.dim)))?;
        config.options.insert("svg".into(), json!(path_str(p)));
    }
    emit(
        &Report::new(
            config,
            ReportBody::Histogram(HistogramResult {
                histogram: h,
                count,
            }),
        ),
        a.out.as_deref(),
    )
}

pub fn baseline(a: &BaselineArgs, seed: u64) -> CliResult<()> {
    let method = match a.method {
        BaselineMethod::Lof => "lof",
        BaselineMethod::Kcenter => "kcenter",
        BaselineMethod::Fid => "fid",
        BaselineMethod::Random => "random",
    };
    let mut config = run_config("baseline", &[&a.real, &a.dev], seed);
    config.k = a.k;
    config.output = a.out.as_deref().map(path_str);
    config.options.insert("method".into(), json!(method));
    if a.method == BaselineMethod::Lof {
        config
            .options
            .insert("neighbors".into(), json!(a.neighbors));
    }
    let real_full = load(&a.real)?;
    let dev_full = load(&a.dev)?;
    let (real, real_idx, dev) = match a.sample {
        Some(0) => return Err(invalid("--sample must be at least 1")),
        Some(n) => {
            config.options.insert("sample".into(), json!(n));
            let (r, idx) = subsample(&real_full, n, derive_seed(seed, &[0]))?;
            let (d, _) = subsample(&dev_full, n, derive_seed(seed, &[1]))?;
            (r, Some(idx), d)
        }
        None => (real_full, None, dev_full),
    };
    let mut result = match a.method {
        BaselineMethod::Lof => lof_select(
            &real,
            &dev,
            &LofParams {
                k_neighbors: a.neighbors,
            },
            a.k,
        )?,
        BaselineMethod::Kcenter => kcenter_select(&real, &dev, a.k)?,
        BaselineMethod::Fid => fid_greedy_select(&real, &dev, a.k)?,
        BaselineMethod::Random => random_select(&real, a.k, seed)?,
    };
    if let Some(idx) = real_idx {
        result.indices.iter_mut().for_each(|i| *i = idx[*i]);
    }
    emit(
        &Report::new(config, ReportBody::Selection(result)),
        a.out.as_deref(),
    )
}

fn parse_scale(s: &str) -> CliResult<ScaleLaw> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| invalid(format!("bad number {t:?} in scale law {s:?}")))
    };
    match parts.as_slice() {
        ["uniform", v] => Ok(ScaleLaw::Uniform { scale: num(v)? }),
        ["loguniform", lo, hi] => Ok(ScaleLaw::LogUniform {
            lo: num(lo)?,
            hi: num(hi)?,
        }),
        _ => Err(invalid(format!(
            "scale law must be uniform:S or loguniform:LO:HI, got {s:?}"
        ))),
    }
}

pub fn eval(a: &EvalArgs, seed: u64) -> CliResult<()> {
    let threshold = a.pca.threshold();
    check_threshold(threshold)?;
    let methods = a
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()?;
    let bench = BenchmarkConfig {
        methods,
        trials: a.trials,
        base_seed: seed,
        n_per_dataset: a.n_per_dataset,
        selection_size: a.selection_size,
        lof_neighbors: a.neighbors,
        pca_threshold: threshold,
    };
    let mut inputs = Vec::new();
    let source = match (&a.attrs, &a.labels) {
        (Some(attrs_path), Some(labels_path)) => {
            inputs.extend([attrs_path.as_path(), labels_path.as_path()]);
            let attrs = load(attrs_path)?;
            let labels = load_labels(labels_path, &attrs).map_err(|e| with_path(labels_path, e))?;
            let baseline_space = match &a.baseline_attrs {
                Some(p) => {
                    inputs.push(p);
                    Some(load(p)?)
                }
                None => None,
            };
            BenchmarkSource::External {
                name: labels.attribute_name.clone(),
                attrs,
                labels,
                baseline_space,
            }
        }
        _ => {
            let synth = SynthConfig {
                d: a.synth.synth_d,
                n: a.synth.synth_pool,
                planted_dims: a.synth.synth_planted.clone(),
                delta: a.synth.synth_delta,
                scale_law: parse_scale(&a.synth.synth_scale)?,
                rotation: a.synth.synth_rotation,
                seed: 0,
            };
            synth.validate()?;
            BenchmarkSource::Synthetic {
                name: "synthetic".into(),
                synth,
            }
        }
    };
    let mut config = run_config("eval", &inputs, seed);
    config.pca_threshold = threshold;
    config.k = a.selection_size;
    config.output = Some(path_str(&a.out));
    let bench_value = serde_json::to_value(&bench).expect("config serializes");
    if let Value::Object(map) = bench_value {
        config.options.extend(map);
    }
    if let BenchmarkSource::Synthetic { synth, .. } = &source {
        let mut s = serde_json::to_value(synth).expect("config serializes");
        if let Value::Object(m) = &mut s {
            m.remove("seed");
        }
        config.options.insert("synthetic".into(), s);
    }

    let table = run_benchmark(&[source], &bench)?;
    create_dir(&a.out)?;
    write_file(&a.out.join("benchmark.csv"), table.to_csv())?;
    Report::new(config, ReportBody::Benchmark(table))
        .write(&a.out.join("report.json"))
        .map_err(|e| with_path(&a.out, e))
}

pub fn pca(a: &PcaArgs, seed: u64) -> CliResult<()> {
    check_threshold(Some(a.threshold))?;
    let mut config = run_config("pca", &[&a.real, &a.dev], seed);
    config.pca_threshold = Some(a.threshold);
    config.output = Some(path_str(&a.out));
    config
        .options
        .insert("transform".into(), json!(a.transform));
    let real = load(&a.real)?;
    let dev = load(&a.dev)?;
    let model = fit_pca(&real, &dev, a.threshold)?;
    create_dir(&a.out)?;
    let model_path = a.out.join("model.adpc");
    save_pca(&model, &model_path).map_err(|e| with_path(&model_path, e))?;
    if a.transform {
        for (m, name) in [(&real, "real.pca.adif"), (&dev, "dev.pca.adif")] {
            let p = a.out.join(name);
            save_matrix(
                &transform(&model, m)?,
                &p,
                MatrixFormat::Binary,
                Precision::F64,
            )
            .map_err(|e| with_path(&p, e))?;
        }
    }
    Report::new(config, ReportBody::Pca(PcaSummary::of(&model)))
        .write(&a.out.join("report.json"))
        .map_err(|e| with_path(&a.out, e))
}

pub fn convert(a: &ConvertArgs) -> CliResult<()> {
    let m = load(&a.input)?;
    let precision = match a.precision {
        PrecisionArg::F32 => Precision::F32,
        PrecisionArg::F64 => Precision::F64,
    };
    save_matrix(&m, &a.output, MatrixFormat::from_path(&a.output), precision)
        .map_err(|e| with_path(&a.output, e))
}
