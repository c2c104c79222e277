//! CSV assembly and the run manifest sidecar. Numbers are rendered with six
//! significant digits, a `.` decimal separator, and no locale formatting;
//! inapplicable fields are empty strings, never NaN text.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Fixed header for design/SER result tables. The first column is the sweep
/// coordinate and is renamed per command (`ez_over_n0_db` or `z_over_sigma`).
pub const RESULT_COLUMNS: &str =
    "design,x1,x2,p,phase1,phase2,ser_analytic,ser_sim,ci_half_width,region_label";

/// Format with six significant digits. Values in [1e-4, 1e6) print in plain
/// decimal; everything else uses scientific notation.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        // Callers render missing data as empty fields; this is a backstop so
        // a stray non-finite value is visible rather than silently blank.
        return format!("{v}");
    }
    let mag = v.abs();
    if (1e-4..1e6).contains(&mag) {
        let digits = (5 - mag.log10().floor() as i32).clamp(0, 17) as usize;
        let s = format!("{v:.digits$}");
        trim_zeros(&s)
    } else {
        format!("{v:.5e}")
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

/// One output row of a design/SER table.
#[derive(Debug, Clone, Default)]
pub struct ResultRow {
    pub coord: f64,
    pub design: &'static str,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub p: Option<f64>,
    pub phase1: Option<&'static str>,
    pub phase2: Option<&'static str>,
    pub ser_analytic: Option<f64>,
    pub ser_sim: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub region_label: Option<String>,
}

impl ResultRow {
    pub fn render(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(self.coord),
            self.design,
            opt(self.x1),
            opt(self.x2),
            opt(self.p),
            self.phase1.unwrap_or(""),
            self.phase2.unwrap_or(""),
            opt(self.ser_analytic),
            opt(self.ser_sim),
            opt(self.ci_half_width),
            self.region_label.as_deref().unwrap_or(""),
        )
    }
}

/// Render a complete table with the given first-column name.
pub fn render_result_table(coord_column: &str, rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(coord_column);
    out.push(',');
    out.push_str(RESULT_COLUMNS);
    out.push('\n');
    for row in rows {
        out.push_str(&row.render());
        out.push('\n');
    }
    out
}

/// Run manifest recorded next to the output CSV.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub command: String,
    pub experiment: String,
    pub config_sha256: String,
    pub seed: u64,
    pub trials: u64,
    pub wall_time_s: f64,
}

impl RunMeta {
    fn render(&self) -> String {
        format!(
            "command: {}\nexperiment: {}\nversion: {}\nconfig_sha256: {}\nseed: {}\ntrials: {}\nwall_time_s: {:.3}\n",
            self.command,
            self.experiment,
            env!("CARGO_PKG_VERSION"),
            self.config_sha256,
            self.seed,
            self.trials,
            self.wall_time_s,
        )
    }
}

fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta")
}

/// Write `content` to `out` (or stdout when `out` is None). When writing to a
/// file, also record the run manifest in a `.meta` sidecar.
pub fn deliver(out: Option<&Path>, content: &str, meta: &RunMeta) -> Result<(), CliError> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let side = meta_path(path);
            std::fs::write(&side, meta.render())
                .map_err(|e| CliError::Io(format!("{}: {e}", side.display())))?;
            Ok(())
        }
    }
}
