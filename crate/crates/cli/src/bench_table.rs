use std::io::{self, Write};
use std::path::Path;

use skyroute_core::solvers::ComparisonTable;

const HEADER: [&str; 6] = ["algorithm", "total_length_km", "feasible", "evaluations", "wall_time_s", "seed"];

fn cells(table: &ComparisonTable) -> Vec<[String; 6]> {
    table
        .rows
        .iter()
        .map(|r| {
            [
                r.algorithm.to_string(),
                r.total_length_km.map(|v| v.to_string()).unwrap_or_default(),
                r.feasible.to_string(),
                r.evaluations.to_string(),
                r.wall_time_s.to_string(),
                r.seed.to_string(),
            ]
        })
        .collect()
}

/// CSV with a header row and one row per solver. Floats use the shortest
/// representation that parses back to the same value.
pub fn bench_csv(table: &ComparisonTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for row in cells(table) {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
}

/// Column-aligned summary for terminals.
pub fn bench_text_table(table: &ComparisonTable) -> String {
    let rows: Vec<[String; 6]> = table
        .rows
        .iter()
        .map(|r| {
            [
                r.algorithm.to_string(),
                r.total_length_km.map_or("-".into(), |v| format!("{v:.3}")),
                if r.feasible { "yes".into() } else { "no".into() },
                r.evaluations.to_string(),
                format!("{:.6}", r.wall_time_s),
                r.seed.to_string(),
            ]
        })
        .collect();
    let mut widths = HEADER.map(str::len);
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cols: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cols
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(HEADER.to_vec(), &mut out);
    for row in &rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

/// Writes the CSV to `csv_path` and the aligned table to `text_out`.
pub fn emit_bench_table(table: &ComparisonTable, csv_path: &Path, text_out: &mut dyn Write) -> io::Result<()> {
    if table.rows.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "comparison table has no rows"));
    }
    std::fs::write(csv_path, bench_csv(table))?;
    text_out.write_all(bench_text_table(table).as_bytes())
}
