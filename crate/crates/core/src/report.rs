//! Serializable reports and the SVG histogram emitter.
//!
//! Every file the CLI writes is a [`Report`]: the tool name and version, the
//! run configuration and one result payload. The layout is described by
//! `schemas/report.schema.json` at the repository root.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diff::{
    endpoint_direction, histogram, select_endpoint, Comparison, Endpoint, HistogramPair, ScoreKind,
    SelectionResult, Side, Source,
};
use crate::error::Result;
use crate::matrix::AttributeMatrix;
use crate::ot::Order;
use crate::spectral::PcaModel;

pub const TOOL: &str = "attrdiff";

/// Options of one CLI run, copied verbatim into its outputs. Thread count is
/// deliberately absent: outputs do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub normalize: bool,
    pub pca_threshold: Option<f64>,
    pub k: usize,
    pub bins: usize,
    pub seed: u64,
    pub output: Option<String>,
    /// Subcommand-specific options.
    #[serde(default)]
    pub options: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "result", rename_all = "snake_case")]
pub enum ReportBody {
    Diff(DiffResult),
    Selection(SelectionResult),
    Histogram(HistogramResult),
    Benchmark(crate::eval::BenchmarkTable),
    Pca(PcaSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl Report {
    pub fn new(config: RunConfig, body: ReportBody) -> Self {
        Self {
            tool: TOOL.into(),
            version: crate::VERSION.into(),
            config,
            body,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("reports contain only finite numbers");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub rows: usize,
    pub cols: usize,
}

impl DatasetInfo {
    fn of(m: &AttributeMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaSummary {
    pub threshold: f64,
    pub input_dim: usize,
    pub n_components: usize,
    pub explained_ratios: Vec<f64>,
}

impl PcaSummary {
    pub fn of(model: &PcaModel) -> Self {
        Self {
            threshold: model.threshold(),
            input_dim: model.input_dim(),
            n_components: model.n_components(),
            explained_ratios: model.explained_ratios().to_vec(),
        }
    }
}

/// One ranked dimension. `mean_real` and `mean_dev` are column means in the
/// compared space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedDim {
    pub rank: usize,
    pub dim: usize,
    pub raw_w: f64,
    pub norm_w: f64,
    pub sigma: f64,
    pub mean_real: f64,
    pub mean_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedDim {
    pub rank: usize,
    pub dim: usize,
    pub score: f64,
    pub endpoint: Endpoint,
    /// Unit vector of the dimension in the input space.
    pub direction: Vec<f64>,
    pub histogram: HistogramPair,
    pub real_selection: SelectionResult,
    /// Development samples at the same endpoint, for contrast.
    pub dev_selection: SelectionResult,
    /// File name of the histogram plot, when one was written.
    pub svg: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffResult {
    pub order: Order,
    pub score_kind: ScoreKind,
    pub top_k: usize,
    pub pca_applied: bool,
    pub pca: Option<PcaSummary>,
    pub real: DatasetInfo,
    pub dev: DatasetInfo,
    pub ranked: Vec<RankedDim>,
    pub selected: Vec<SelectedDim>,
}

impl DiffResult {
    pub fn max_score(&self) -> f64 {
        let kind = self.score_kind;
        self.ranked.first().map_or(0.0, |r| {
            if kind == ScoreKind::Raw {
                r.raw_w
            } else {
                r.norm_w
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub side: Side,
    pub threshold: f64,
    pub real: usize,
    pub dev: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    pub histogram: HistogramPair,
    pub count: Option<CountResult>,
}

/// Assembles the diff payload: every ranked dimension, and for each selected
/// one its histogram, endpoint selections of `select_k` samples from both
/// datasets (fewer when a dataset is smaller) and its input-space direction.
pub fn build_diff_result(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    cmp: &Comparison,
    bins: usize,
    select_k: usize,
) -> Result<DiffResult> {
    let real_p = cmp.project(real)?;
    let dev_p = cmp.project(dev)?;
    let ranked = cmp
        .ranked
        .iter()
        .enumerate()
        .map(|(i, d)| RankedDim {
            rank: i + 1,
            dim: d.dim,
            raw_w: d.raw_w,
            norm_w: d.norm_w,
            sigma: d.sigma,
            mean_real: d.mean_x,
            mean_dev: d.mean_y,
        })
        .collect();
    let mut selected = Vec::with_capacity(cmp.top_k);
    for (i, d) in cmp.selected().iter().enumerate() {
        let endpoint = endpoint_direction(d);
        let real_selection =
            select_endpoint(&real_p, d.dim, endpoint, select_k.min(real_p.rows()))?;
        let mut dev_selection =
            select_endpoint(&dev_p, d.dim, endpoint, select_k.min(dev_p.rows()))?;
        dev_selection.source = Source::Dev;
        selected.push(SelectedDim {
            rank: i + 1,
            dim: d.dim,
            score: d.score(cmp.score_kind),
            endpoint,
            direction: cmp.direction(d.dim)?,
            histogram: histogram(&real_p, &dev_p, d.dim, bins)?,
            real_selection,
            dev_selection,
            svg: None,
        });
    }
    Ok(DiffResult {
        order: cmp.order,
        score_kind: cmp.score_kind,
        top_k: cmp.top_k,
        pca_applied: cmp.pca_applied(),
        pca: cmp.pca.as_ref().map(PcaSummary::of),
        real: DatasetInfo::of(real),
        dev: DatasetInfo::of(dev),
        ranked,
        selected,
    })
}

/// Selected directions as CSV: `rank,dim,v_0,…,v_{d−1}`.
pub fn directions_csv(result: &DiffResult) -> String {
    let d = result.selected.first().map_or(0, |s| s.direction.len());
    let mut out = String::from("rank,dim");
    for j in 0..d {
        let _ = write!(out, ",v_{j}");
    }
    out.push('\n');
    for s in &result.selected {
        let _ = write!(out, "{},{}", s.rank, s.dim);
        for v in &s.direction {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 360.0;
const PAD_L: f64 = 56.0;
const PAD_R: f64 = 16.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 40.0;
const REAL_COLOR: &str = "#1f77b4";
const DEV_COLOR: &str = "#ff7f0e";

/// Overlaid per-bin sample fractions of both datasets. Output depends only on
/// the histogram and title; coordinates are printed with two decimals.
pub fn histogram_svg(h: &HistogramPair, title: &str) -> String {
    let bins = h.counts_x.len();
    let nx: u64 = h.counts_x.iter().sum();
    let ny: u64 = h.counts_y.iter().sum();
    let frac = |c: u64, n: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let fx: Vec<f64> = h.counts_x.iter().map(|&c| frac(c, nx)).collect();
    let fy: Vec<f64> = h.counts_y.iter().map(|&c| frac(c, ny)).collect();
    let ymax = fx
        .iter()
        .chain(&fy)
        .fold(0.0f64, |a, &b| a.max(b))
        .max(f64::MIN_POSITIVE);
    let plot_w = SVG_W - PAD_L - PAD_R;
    let plot_h = SVG_H - PAD_T - PAD_B;
    let bar_w = plot_w / bins as f64;
    let base = SVG_H - PAD_B;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        SVG_W / 2.0,
        xml_escape(title)
    );
    for (series, color, label) in [(&fx, REAL_COLOR, "real"), (&fy, DEV_COLOR, "dev")] {
        let _ = writeln!(
            s,
            r#"<g fill="{color}" fill-opacity="0.5" data-series="{label}">"#
        );
        for (i, &f) in series.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            let bh = f / ymax * plot_h;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                PAD_L + i as f64 * bar_w,
                base - bh,
                bar_w,
                bh
            );
        }
        s.push_str("</g>\n");
    }
    let _ = writeln!(
        s,
        r#"<line x1="{PAD_L}" y1="{base}" x2="{:.2}" y2="{base}" stroke="black"/>"#,
        SVG_W - PAD_R
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PAD_L}" y1="{PAD_T}" x2="{PAD_L}" y2="{base}" stroke="black"/>"#
    );
    let lo = h.edges[0];
    let hi = h.edges[h.edges.len() - 1];
    let _ = writeln!(
        s,
        r#"<text x="{PAD_L}" y="{:.2}" text-anchor="start">{lo:.4}</text>"#,
        base + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{hi:.4}</text>"#,
        SVG_W - PAD_R,
        base + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">dim {}</text>"#,
        PAD_L + plot_w / 2.0,
        base + 30.0,
        h.dim
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{ymax:.4}</text>"#,
        PAD_L - 4.0,
        PAD_T + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{base}" text-anchor="end">0</text>"#,
        PAD_L - 4.0
    );
    let lx = SVG_W - PAD_R - 120.0;
    for (j, (color, label, n)) in [(REAL_COLOR, "real", nx), (DEV_COLOR, "dev", ny)]
        .into_iter()
        .enumerate()
    {
        let y = PAD_T + 4.0 + 16.0 * j as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{y:.2}" width="12" height="12" fill="{color}" fill-opacity="0.5"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{label} (n={n})</text>"#,
            lx + 18.0,
            y + 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}
