use std::path::Path;

use anyhow::{Context, Result};
use ternary_qec::montecarlo::RunSummary;

use crate::SweepFile;

pub const PRIMARY_HEADER: [&str; 9] = ["Nodes", "tau", "StdLER", "RegLER", "Impr", "pValue", "Abst", "MiscT", "AbstPct"];
pub const SENSITIVITY_HEADER: [&str; 6] = ["f", "StdLER", "RegLER", "Impr", "pValue", "Abstains"];

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

fn ler(x: f64) -> String {
    format!("{x:.4}")
}

fn pvalue(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn primary_row(s: &RunSummary) -> Vec<String> {
    vec![
        s.nodes.to_string(),
        s.tau.to_string(),
        ler(s.std_ler),
        ler(s.reg_ler),
        pct(s.improvement),
        pvalue(s.p_value),
        s.correct_abstains.to_string(),
        s.misc_ternary.to_string(),
        pct(s.abstain_pct),
    ]
}

pub fn sensitivity_row(s: &RunSummary) -> Vec<String> {
    vec![
        format!("{:.3}", s.f),
        ler(s.std_ler),
        ler(s.reg_ler),
        pct(s.improvement),
        pvalue(s.p_value),
        s.correct_abstains.to_string(),
    ]
}

fn to_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn primary_csv(rows: &[RunSummary]) -> Result<String> {
    to_csv(&PRIMARY_HEADER, rows.iter().map(primary_row))
}

pub fn sensitivity_csv(rows: &[RunSummary]) -> Result<String> {
    to_csv(&SENSITIVITY_HEADER, rows.iter().map(sensitivity_row))
}

/// Right-aligned columns separated by two spaces.
pub fn align(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .chain(std::iter::once(&header[c]))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header) + "\n";
    out += &"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1));
    out += "\n";
    for r in rows {
        out += &line(r);
        out += "\n";
    }
    out
}

/// Renders a sweep JSON file or any CSV file with a header row.
pub fn render_file(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let sweep: SweepFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let (header, rows): (&[&str], Vec<Vec<String>>) = if sweep.table == 2 {
            (&PRIMARY_HEADER, sweep.rows.iter().map(primary_row).collect())
        } else {
            (&SENSITIVITY_HEADER, sweep.rows.iter().map(sensitivity_row).collect())
        };
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        return Ok(align(&header, &rows));
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| Ok(r?.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(align(&header, &rows))
}
