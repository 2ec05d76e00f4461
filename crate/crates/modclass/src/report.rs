//! Aggregation of trial records and the files written for a run.
//!
//! Everything except `timing.csv` is a pure function of the records, so two
//! runs with the same configuration produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, Method};
use crate::error::{HarnessError, Result};
use crate::experiment::TrialRecord;

/// Formats `x` with 6 significant digits, `%g` style.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rows are actual modulations, columns are decisions, both in pool order.
/// Rows with no trials are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn row_total(&self, actual: usize) -> usize {
        self.counts[actual].iter().sum()
    }

    /// Empirical probability of deciding `estimated` when `actual` was sent.
    pub fn probability(&self, actual: usize, estimated: usize) -> f64 {
        let total = self.row_total(actual);
        if total == 0 {
            0.0
        } else {
            self.counts[actual][estimated] as f64 / total as f64
        }
    }

    pub fn accuracy(&self, actual: usize) -> f64 {
        self.probability(actual, actual)
    }

    /// Mean of the per-modulation accuracies over rows with trials.
    pub fn mean_accuracy(&self) -> f64 {
        let rows: Vec<usize> = (0..self.size()).filter(|&a| self.row_total(a) > 0).collect();
        rows.iter().map(|&a| self.accuracy(a)).sum::<f64>() / rows.len().max(1) as f64
    }
}

/// Tallies decisions for records from a single (SNR, method, L̂, M) cell.
pub fn confusion_matrix(records: &[TrialRecord], labels: &[String]) -> Result<ConfusionMatrix> {
    let first = records
        .first()
        .ok_or_else(|| HarnessError::EmptyData("no trial records to tabulate".into()))?;
    if records.iter().any(|r| cell_key(r) != cell_key(first)) {
        return Err(HarnessError::Config("confusion matrix records span several cells".into()));
    }
    let n = labels.len();
    let mut counts = vec![vec![0; n]; n];
    for r in records {
        if r.truth >= n || r.decision >= n {
            return Err(HarnessError::Config(format!("trial {} refers to a modulation outside the pool", r.trial_id)));
        }
        counts[r.truth][r.decision] += 1;
    }
    Ok(ConfusionMatrix {
        labels: labels.to_vec(),
        counts,
    })
}

type CellKey = (u64, Method, usize, usize);

fn cell_key(r: &TrialRecord) -> CellKey {
    (r.snr_db.to_bits(), r.method, r.l_hat, r.iterations)
}

/// Records grouped by cell, in order of first appearance.
pub fn group_by_cell(records: &[TrialRecord]) -> Vec<Vec<TrialRecord>> {
    let mut keys: Vec<CellKey> = Vec::new();
    let mut groups: Vec<Vec<TrialRecord>> = Vec::new();
    for r in records {
        let key = cell_key(r);
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r.clone()),
            None => {
                keys.push(key);
                groups.push(vec![r.clone()]);
            }
        }
    }
    groups
}

/// One line of `accuracy_vs_snr.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub snr_db: f64,
    pub method: Method,
    pub l_hat: usize,
    pub iterations: usize,
    /// A pool name, or `all` for the mean over modulations.
    pub modulation: String,
    pub accuracy: f64,
    pub trials: usize,
}

pub fn accuracy_table(records: &[TrialRecord], labels: &[String]) -> Result<Vec<AccuracyRow>> {
    let mut rows = Vec::new();
    for group in group_by_cell(records) {
        let cm = confusion_matrix(&group, labels)?;
        let r = &group[0];
        let row = |modulation: String, accuracy: f64, trials: usize| AccuracyRow {
            snr_db: r.snr_db,
            method: r.method,
            l_hat: r.l_hat,
            iterations: r.iterations,
            modulation,
            accuracy,
            trials,
        };
        for a in 0..labels.len() {
            if cm.row_total(a) > 0 {
                rows.push(row(labels[a].clone(), cm.accuracy(a), cm.row_total(a)));
            }
        }
        rows.push(row("all".into(), cm.mean_accuracy(), group.len()));
    }
    Ok(rows)
}

fn snr_label(snr: f64) -> String {
    fmt_num(snr)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

pub fn trials_csv(records: &[TrialRecord], labels: &[String]) -> String {
    let mut s = String::from("trial_id,snr_db,method,l_hat,iterations,modulation,trial,seed,decision,correct,entropy");
    for l in labels {
        let _ = write!(s, ",p_{l}");
    }
    s.push('\n');
    for r in records {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.trial_id,
            fmt_num(r.snr_db),
            r.method,
            r.l_hat,
            r.iterations,
            labels[r.truth],
            r.trial,
            r.seed,
            labels[r.decision],
            u8::from(r.correct()),
            fmt_num(r.entropy)
        );
        for p in &r.p_a_mean {
            let _ = write!(s, ",{}", fmt_num(*p));
        }
        s.push('\n');
    }
    s
}

pub fn accuracy_csv(rows: &[AccuracyRow]) -> String {
    let mut s = String::from("snr_db,method,l_hat,iterations,modulation,accuracy,trials\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_num(r.snr_db),
            r.method,
            r.l_hat,
            r.iterations,
            r.modulation,
            fmt_num(r.accuracy),
            r.trials
        );
    }
    s
}

/// One block of rows per cell at this SNR.
pub fn confusion_csv(groups: &[Vec<TrialRecord>], labels: &[String]) -> Result<String> {
    let mut s = String::from("method,l_hat,iterations,actual");
    for l in labels {
        let _ = write!(s, ",{l}");
    }
    s.push('\n');
    for group in groups {
        let cm = confusion_matrix(group, labels)?;
        let r = &group[0];
        for a in 0..labels.len() {
            let _ = write!(s, "{},{},{},{}", r.method, r.l_hat, r.iterations, labels[a]);
            for e in 0..labels.len() {
                let _ = write!(s, ",{}", fmt_num(cm.probability(a, e)));
            }
            s.push('\n');
        }
    }
    Ok(s)
}

pub fn timing_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from("trial_id,wall_ms\n");
    for r in records {
        let _ = writeln!(s, "{},{}", r.trial_id, fmt_num(r.wall_time.as_secs_f64() * 1e3));
    }
    s
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of the `all` accuracy rows. The x axis is SNR, or M when the
/// run has a single SNR and several iteration budgets.
pub fn accuracy_svg(rows: &[AccuracyRow], title: &str) -> String {
    let overall: Vec<&AccuracyRow> = rows.iter().filter(|r| r.modulation == "all").collect();
    let mut snrs: Vec<f64> = overall.iter().map(|r| r.snr_db).collect();
    snrs.dedup();
    let mut budgets: Vec<usize> = overall.iter().map(|r| r.iterations).collect();
    budgets.sort_unstable();
    budgets.dedup();
    let by_iterations = snrs.len() == 1 && budgets.len() > 1;
    let x_of = |r: &AccuracyRow| if by_iterations { r.iterations as f64 } else { r.snr_db };

    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in &overall {
        let name = if by_iterations {
            format!("{} L̂={}", r.method, r.l_hat)
        } else {
            format!("{} L̂={} M={}", r.method, r.l_hat, r.iterations)
        };
        match series.iter_mut().find(|(n, _)| *n == name) {
            Some((_, pts)) => pts.push((x_of(r), r.accuracy)),
            None => series.push((name, vec![(x_of(r), r.accuracy)])),
        }
    }
    let xs: Vec<f64> = overall.iter().map(|r| x_of(r)).collect();
    let (mut x0, mut x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let (w, h, left, right, top, bottom) = (720.0, 440.0, 70.0, 250.0, 40.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + (1.0 - y) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, xml_escape(title));
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{left:.2}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#dddddd"/><text x="{2:.2}" y="{3:.2}" text-anchor="end">{4}</text>"##,
            py(y),
            left + pw,
            left - 6.0,
            py(y) + 4.0,
            fmt_num(y)
        );
    }
    let mut ticks = xs.clone();
    ticks.sort_by(|a, b| a.total_cmp(b));
    ticks.dedup();
    for x in ticks {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{4}</text>"#,
            px(x),
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0,
            fmt_num(x)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let xlabel = if by_iterations { "iterations M" } else { "SNR (dB)" };
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, left + pw / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">probability of correct classification</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="{color}" stroke-width="2"/><text x="{3:.2}" y="{4:.2}">{5}</text>"#,
            left + pw + 12.0,
            ly,
            left + pw + 32.0,
            left + pw + 38.0,
            ly + 4.0,
            xml_escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `trials.csv`, `accuracy_vs_snr.csv`, one `confusion_<snr>.csv` per
/// SNR, `accuracy_vs_snr.svg`, the resolved `config.toml` and `timing.csv`
/// into `out_dir`. Returns the paths written.
pub fn emit_outputs(records: &[TrialRecord], config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(HarnessError::EmptyData("no trial records to write".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let labels = &config.pool;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<()> {
        let path = out_dir.join(name);
        write(&path, &contents)?;
        written.push(path);
        Ok(())
    };
    put("trials.csv".into(), trials_csv(records, labels))?;
    let rows = accuracy_table(records, labels)?;
    put("accuracy_vs_snr.csv".into(), accuracy_csv(&rows))?;

    let groups = group_by_cell(records);
    let mut snrs: Vec<f64> = Vec::new();
    for g in &groups {
        if !snrs.iter().any(|s| s.to_bits() == g[0].snr_db.to_bits()) {
            snrs.push(g[0].snr_db);
        }
    }
    for snr in snrs {
        let at: Vec<Vec<TrialRecord>> = groups.iter().filter(|g| g[0].snr_db.to_bits() == snr.to_bits()).cloned().collect();
        put(format!("confusion_{}.csv", snr_label(snr)), confusion_csv(&at, labels)?)?;
    }
    let title = if config.name.is_empty() { "accuracy".to_string() } else { config.name.clone() };
    put("accuracy_vs_snr.svg".into(), accuracy_svg(&rows, &title))?;
    put("config.toml".into(), config.to_toml_string()?)?;
    put("timing.csv".into(), timing_csv(records))?;
    Ok(written)
}
