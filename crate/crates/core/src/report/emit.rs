use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{CorpusReport, Distribution};
use crate::a11y::RuleCode;
use crate::codeanalysis::RankedRow;
use crate::htmlutil::escape_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportFormat {
    Json,
    Csv,
    Html,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "html" => Ok(ReportFormat::Html),
            other => Err(format!("unknown report format `{other}` (known: json, csv, html)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("writing {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

type Rows = Vec<Vec<String>>;

fn f2(x: f64) -> String {
    format!("{x:.2}")
}

fn ranked_rows(rows: &[RankedRow]) -> Rows {
    rows.iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), r.name.clone(), r.count.to_string()]).collect()
}

fn cdf_rows(label: &str, d: &Distribution) -> Rows {
    d.cdf.iter().map(|(v, p)| vec![label.to_string(), v.to_string(), p.to_string()]).collect()
}

/// Every tabular view of the report as (file stem, caption, header, rows).
fn tables(r: &CorpusReport) -> Vec<(&'static str, &'static str, Vec<&'static str>, Rows)> {
    let mut out = Vec::new();
    out.push((
        "corpus",
        "Corpus counts",
        vec!["measure", "count"],
        vec![
            vec!["notebooks".into(), r.n_notebooks.to_string()],
            vec!["valid".into(), r.n_valid.to_string()],
            vec!["excluded by language".into(), r.n_language_filtered.to_string()],
            vec!["analyzed".into(), r.n_analyzed.to_string()],
            vec!["code cells that failed to parse".into(), r.parse_failures.to_string()],
            vec!["notebooks without a heading".into(), r.n_without_heading.to_string()],
        ],
    ));
    out.push((
        "output_types",
        "Output types",
        vec!["category", "label", "total", "percent", "cumulative"],
        r.output_type_table
            .iter()
            .map(|o| vec![o.category.clone(), o.label.clone(), o.total.to_string(), f2(o.percent), f2(o.cumulative)])
            .collect(),
    ));
    let centre = |name: &str, d: &Distribution| vec![name.to_string(), d.n.to_string(), f2(d.mean), f2(d.median)];
    let s = &r.image_stats;
    let t = &r.table_stats;
    out.push((
        "distributions",
        "Distribution summaries",
        vec!["distribution", "observations", "mean", "median"],
        vec![
            centre("images per notebook", &s.all_notebooks),
            centre("images per image-bearing notebook", &s.image_bearing),
            centre("tables per notebook", &t.tables_per_notebook),
            centre("table rows", &t.rows),
            centre("table columns", &t.cols),
        ],
    ));
    let mut cdfs = cdf_rows("images per notebook", &s.all_notebooks);
    cdfs.extend(cdf_rows("images per image-bearing notebook", &s.image_bearing));
    cdfs.extend(cdf_rows("tables per notebook", &t.tables_per_notebook));
    cdfs.extend(cdf_rows("table rows", &t.rows));
    cdfs.extend(cdf_rows("table columns", &t.cols));
    out.push(("cdfs", "Cumulative distributions", vec!["distribution", "value", "fraction at or below"], cdfs));
    let cov = |name: &str, c: &super::CoverageRow| {
        vec![name.to_string(), c.images.to_string(), c.with_alt.to_string(), f2(c.percent_with_alt), f2(c.percent_without_alt)]
    };
    out.push((
        "alt_coverage",
        "Alt text coverage",
        vec!["source", "images", "with alt", "percent with alt", "percent without alt"],
        vec![
            cov("all", &r.alt_coverage.all),
            cov("programmatic", &r.alt_coverage.programmatic),
            cov("markdown", &r.alt_coverage.markdown),
        ],
    ));
    out.push(("alt_words", "Alt text words", vec!["rank", "word", "count"], ranked_rows(&r.alt_word_freq)));
    out.push((
        "first_table_positions",
        "Cell of the first table",
        vec!["cell", "notebooks"],
        r.first_table_positions.iter().map(|(c, n)| vec![c.to_string(), n.to_string()]).collect(),
    ));
    let f = &r.figure_context_summary;
    out.push((
        "figure_context",
        "Context around figure cells",
        vec!["measure", "count", "percent of figure cells"],
        vec![
            vec!["figure cells".into(), f.image_cells.to_string(), f2(if f.image_cells > 0 { 100.0 } else { 0.0 })],
            vec!["no heading follows".into(), f.candidates.to_string(), f2(f.percent_candidates)],
            vec!["markdown neighbour".into(), f.with_markdown.to_string(), f2(f.percent_with_markdown)],
            vec!["table neighbour".into(), f.with_table.to_string(), f2(f.percent_with_table)],
            vec!["fully supported".into(), f.fully_supported.to_string(), f2(f.percent_fully_supported)],
        ],
    ));
    let c = &r.code_rank;
    out.push(("module_rank", "Imported modules", vec!["rank", "module", "imports"], ranked_rows(&c.modules)));
    out.push((
        "module_rank_third_party",
        "Imported modules outside the standard library",
        vec!["rank", "module", "imports"],
        ranked_rows(&c.modules_excluding_stdlib),
    ));
    out.push(("call_rank", "Called functions", vec!["rank", "call", "calls"], ranked_rows(&c.calls)));
    out.push((
        "call_rank_non_builtin",
        "Called functions other than built-ins",
        vec!["rank", "call", "calls"],
        ranked_rows(&c.calls_excluding_builtins),
    ));
    out.push((
        "theme_errors",
        "Accessibility errors per document by theme",
        vec!["theme", "documents", "mean", "standard deviation"],
        r.theme_error_stats
            .iter()
            .map(|t| vec![t.theme.clone(), t.n_documents.to_string(), f2(t.mean), f2(t.std_dev)])
            .collect(),
    ));
    out.push((
        "theme_error_cdf",
        "Cumulative distribution of errors per document",
        vec!["theme", "errors", "fraction at or below"],
        r.theme_error_stats
            .iter()
            .flat_map(|t| t.cdf.iter().map(|(v, p)| vec![t.theme.clone(), v.to_string(), p.to_string()]))
            .collect(),
    ));
    out.push((
        "rule_heatmap",
        "Errors per rule relative to the worst theme",
        vec!["theme", "rule", "relative count"],
        r.rule_heatmap
            .iter()
            .flat_map(|(theme, rules)| {
                rules.iter().map(|(rule, v): (&RuleCode, &f64)| vec![theme.clone(), rule.to_string(), f2(*v)])
            })
            .collect(),
    ));
    out.push((
        "size_risk",
        "Notebooks by size risk",
        vec!["risk", "notebooks"],
        r.size_risk_counts.iter().map(|(k, n)| vec![k.clone(), n.to_string()]).collect(),
    ));
    out
}

fn write_csv(path: &Path, header: &[&str], rows: &Rows) -> Result<(), EmitError> {
    let wrap = |source| EmitError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| EmitError::Io { path: path.to_path_buf(), source })
}

/// The heading heatmap as a bare 6-row matrix, one column per cell index.
fn write_heatmap_csv(path: &Path, m: &[Vec<u64>]) -> Result<(), EmitError> {
    let mut text = String::new();
    for row in m {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        text.push_str(&cells.join(","));
        text.push_str("\r\n");
    }
    std::fs::write(path, text).map_err(|source| EmitError::Io { path: path.to_path_buf(), source })
}

fn html_table(out: &mut String, caption: &str, header: &[&str], rows: &Rows, row_headers: bool) {
    const CELL: &str = "border:1px solid #757575;padding:4px 8px;text-align:left";
    out.push_str("<table style=\"border-collapse:collapse;margin-bottom:16px\"><caption style=\"text-align:left;font-weight:bold\">");
    escape_text(caption, out);
    out.push_str("</caption><thead><tr>");
    for h in header {
        let _ = write!(out, "<th scope=\"col\" style=\"{CELL};background-color:#eeeeee\">");
        escape_text(h, out);
        out.push_str("</th>");
    }
    out.push_str("</tr></thead><tbody>");
    for row in rows {
        out.push_str("<tr>");
        for (i, v) in row.iter().enumerate() {
            if i == 0 && row_headers {
                let _ = write!(out, "<th scope=\"row\" style=\"{CELL}\">");
                escape_text(v, out);
                out.push_str("</th>");
            } else {
                let _ = write!(out, "<td style=\"{CELL}\">");
                escape_text(v, out);
                out.push_str("</td>");
            }
        }
        out.push_str("</tr>");
    }
    out.push_str("</tbody></table>\n");
}

/// A static page of accessible data tables; no scripts, no images.
pub fn render_html(r: &CorpusReport) -> String {
    let mut out = String::from(
        "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>Notebook accessibility report</title></head>\n\
         <body style=\"background-color:#ffffff;color:#212121;font-family:sans-serif;margin:0\">\n\
         <main style=\"padding:16px\">\n<h1>Notebook accessibility report</h1>\n",
    );
    let _ = writeln!(out, "<p>Report schema version {}.</p>", r.schema_version);
    for (_, caption, header, rows) in tables(r) {
        out.push_str("<h2>");
        escape_text(caption, &mut out);
        out.push_str("</h2>\n");
        let row_headers = !matches!(header[0], "rank");
        html_table(&mut out, caption, &header, &rows, row_headers);
    }
    out.push_str("<h2>First heading by level and cell</h2>\n");
    let width = r.heading_heatmap.first().map_or(0, Vec::len);
    let header_owned: Vec<String> =
        std::iter::once("level".to_string()).chain((1..=width).map(|c| format!("cell {c}"))).collect();
    let header: Vec<&str> = header_owned.iter().map(String::as_str).collect();
    let rows: Rows = r
        .heading_heatmap
        .iter()
        .enumerate()
        .map(|(i, row)| std::iter::once(format!("h{}", i + 1)).chain(row.iter().map(u64::to_string)).collect())
        .collect();
    html_table(&mut out, "Notebooks whose first heading has this level and cell", &header, &rows, true);
    out.push_str("</main>\n</body></html>\n");
    out
}

fn io_error(path: &Path, source: std::io::Error) -> EmitError {
    EmitError::Io { path: path.to_path_buf(), source }
}

/// Writes the requested formats into `out_dir`. Each file succeeds or
/// fails on its own.
pub fn emit(report: &CorpusReport, formats: &BTreeSet<ReportFormat>, out_dir: &Path) -> Vec<Result<PathBuf, EmitError>> {
    let mut results = Vec::new();
    if let Err(source) = std::fs::create_dir_all(out_dir) {
        results.push(Err(EmitError::Io { path: out_dir.to_path_buf(), source }));
        return results;
    }
    if formats.contains(&ReportFormat::Json) {
        let path = out_dir.join("report.json");
        let r = serde_json::to_string_pretty(report)
            .map_err(EmitError::from)
            .and_then(|text| std::fs::write(&path, text + "\n").map_err(|source| io_error(&path, source)))
            .map(|_| path.clone());
        results.push(r);
    }
    if formats.contains(&ReportFormat::Csv) {
        for (stem, _, header, rows) in tables(report) {
            let path = out_dir.join(format!("{stem}.csv"));
            results.push(write_csv(&path, &header, &rows).map(|_| path.clone()));
        }
        let path = out_dir.join("heading_heatmap.csv");
        results.push(write_heatmap_csv(&path, &report.heading_heatmap).map(|_| path.clone()));
    }
    if formats.contains(&ReportFormat::Html) {
        let path = out_dir.join("report.html");
        let written = std::fs::write(&path, render_html(report));
        results.push(written.map_err(|source| io_error(&path, source)).map(|_| path.clone()));
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a11y::{scan_html, RuleSelection, Severity};
    use crate::htmlexport::Theme;
    use crate::report::{CorpusTally, FigureTally};

    fn sample() -> CorpusReport {
        let mut t = CorpusTally { n_notebooks: 3, n_valid: 3, n_analyzed: 3, ..Default::default() };
        t.output_types.insert("text/plain".into(), 4);
        t.output_types.insert("image/png".into(), 2);
        t.images_per_notebook.insert(0, 1);
        t.images_per_notebook.insert(2, 2);
        t.first_headings.entry(1).or_default().insert(3, 2);
        t.first_headings.entry(2).or_default().insert(1, 1);
        t.alt_words.insert("plot".into(), 2);
        t.figures = FigureTally { image_cells: 2, candidates: 2, with_markdown: 1, ..Default::default() };
        t.usage.modules.insert("numpy".into(), 3);
        let mut errs = std::collections::BTreeMap::new();
        errs.insert(RuleCode::AxeE2, 3);
        t.themes.add_counts("light", &errs);
        t.themes.add_counts("dark", &errs);
        t.size_risk.insert("ok".into(), 3);
        CorpusReport::from_tally(t)
    }

    #[test]
    fn report_html_scans_clean() {
        let theme = Theme::builtin("light").unwrap();
        for report in [sample(), CorpusReport::from_tally(CorpusTally::default())] {
            let html = render_html(&report);
            let scan = scan_html(&html, Path::new("report.html"), &theme, &RuleSelection::all());
            let errors: Vec<_> = scan.findings.iter().filter(|f| f.severity == Severity::Error).collect();
            assert!(errors.is_empty(), "{errors:#?}");
        }
    }

    #[test]
    fn emits_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let formats = [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Html].into_iter().collect();
        let results = emit(&sample(), &formats, dir.path());
        assert!(results.iter().all(Result::is_ok));
        let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        let back: CorpusReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sample());
        let heat = std::fs::read_to_string(dir.path().join("heading_heatmap.csv")).unwrap();
        let rows: Vec<&str> = heat.lines().collect();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.split(',').count() == 3));
        assert_eq!(rows[0], "0,0,2");
    }

    #[test]
    fn csv_quotes_fields() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = CorpusTally::default();
        t.alt_words.insert("a,\"b\"".into(), 1);
        let formats = [ReportFormat::Csv].into_iter().collect();
        emit(&CorpusReport::from_tally(t), &formats, dir.path());
        let text = std::fs::read_to_string(dir.path().join("alt_words.csv")).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rec = rdr.records().next().unwrap().unwrap();
        assert_eq!(&rec[1], "a,\"b\"");
    }

    #[test]
    fn unwritable_directory_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("occupied");
        std::fs::write(&file, "x").unwrap();
        let formats = [ReportFormat::Json].into_iter().collect();
        let results = emit(&sample(), &formats, &file);
        assert!(results[0].is_err());
    }
}
