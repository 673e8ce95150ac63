//! Plot-data files.
//!
//! Each file is comma-delimited with a single leading `#` line that names
//! the columns. Values are written at full precision.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::analysis::{AnalysisReport, Scatter};
use super::svg;

pub const PLOT_FILES: [&str; 6] = [
    "gain_histogram",
    "gain_kde",
    "gain_qq",
    "cohort_kde_overlay",
    "gain_vs_initial_scatter",
    "increase_vs_initial_scatter",
];

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn csv_row(cells: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(cells).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

fn file_text(header: &str, columns: &[String], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = format!("# {header}; columns: {}", csv_row(columns));
    for row in rows {
        out.push_str(&csv_row(&row));
    }
    out
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn fit_description(s: &Scatter) -> String {
    match &s.fit {
        Some(f) => {
            let kind = if s.degree == 1 { "linear" } else { "quadratic" };
            let coefficients: Vec<String> = f.coefficients.iter().map(|c| c.to_string()).collect();
            format!("{kind} fit r² = {}, coefficients (ascending) = [{}]", f.r_squared, coefficients.join(" "))
        }
        None => "fit undefined".to_string(),
    }
}

fn scatter_text(s: &Scatter) -> String {
    let header = format!("{} vs {}; {}", s.y_name, s.x_name, fit_description(s));
    let rows = s.points.iter().map(|p| {
        let fitted = s.fit.as_ref().map_or(String::new(), |f| f.predict(p.x).to_string());
        vec![p.student_id.clone(), p.cohort.clone(), p.x.to_string(), p.y.to_string(), fitted]
    });
    file_text(&header, &cols(&["student_id", "cohort", s.x_name, s.y_name, "fitted"]), rows)
}

/// Contents of every plot-data file, keyed by base name.
pub fn plot_files(report: &AnalysisReport) -> Vec<(&'static str, String)> {
    let p = &report.plots;
    let hist = &p.histogram;
    let densities = hist.densities();
    let histogram = file_text(
        &format!("gain histogram, {} bins of width {}", hist.counts.len(), hist.bin_width()),
        &cols(&["bin_low", "bin_high", "count", "density"]),
        (0..hist.counts.len()).map(|i| {
            vec![hist.edges[i].to_string(), hist.edges[i + 1].to_string(), hist.counts[i].to_string(), densities[i].to_string()]
        }),
    );
    let kde = file_text(
        &format!("gain density, gaussian kernel bandwidth {}", p.kde.bandwidth),
        &cols(&["gain", "density"]),
        p.kde.grid.iter().zip(&p.kde.density).map(|(g, d)| vec![g.to_string(), d.to_string()]),
    );
    let qq = file_text(
        "normal quantile plot of gain, positions (i - 0.5)/n",
        &cols(&["theoretical", "sample"]),
        p.qq.theoretical_quantiles.iter().zip(&p.qq.sample_quantiles).map(|(t, s)| vec![t.to_string(), s.to_string()]),
    );
    let bandwidths: Vec<String> = p.overlay.series.iter().map(|(c, h, _)| format!("{c}={h}")).collect();
    let mut overlay_cols = vec!["gain".to_string()];
    overlay_cols.extend(p.overlay.series.iter().map(|(c, _, _)| c.clone()));
    let overlay = file_text(
        &format!("per-cohort gain densities on a common grid, bandwidths [{}]", bandwidths.join(" ")),
        &overlay_cols,
        p.overlay.grid.iter().enumerate().map(|(i, g)| {
            let mut row = vec![g.to_string()];
            row.extend(p.overlay.series.iter().map(|(_, _, d)| d[i].to_string()));
            row
        }),
    );
    vec![
        ("gain_histogram", histogram),
        ("gain_kde", kde),
        ("gain_qq", qq),
        ("cohort_kde_overlay", overlay),
        ("gain_vs_initial_scatter", scatter_text(&p.gain_vs_initial)),
        ("increase_vs_initial_scatter", scatter_text(&p.increase_vs_initial)),
    ]
}

/// Writes `<name>.csv` for every plot, plus `<name>.svg` when `svg` is set.
/// Returns the written paths.
pub fn emit_plot_data(report: &AnalysisReport, out_dir: impl AsRef<Path>, svg: bool) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let mut written = Vec::new();
    for (name, text) in plot_files(report) {
        let path = out_dir.join(format!("{name}.csv"));
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    if svg {
        for (name, text) in svg::render_all(&report.plots) {
            let path = out_dir.join(format!("{name}.svg"));
            fs::write(&path, text).map_err(|e| io_error(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
