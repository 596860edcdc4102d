//! Corpus-level aggregation.
//!
//! Aggregation happens in two steps. Per-notebook records fold into a
//! [`CorpusTally`] of integer histograms and counters, which merges by
//! addition and is therefore order independent. [`CorpusReport`] is then
//! derived from a tally; it keeps the tally so two reports can be merged
//! exactly.

mod emit;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::a11y::{theme_comparison, RuleCode, ThemeErrorStats, ThemeTally};
use crate::codeanalysis::{rank, rank_usage, RankTables, RankedRow, UsageCounts};
use crate::metrics::{heatmap_from_counts, NotebookMetrics};
use crate::nbmodel::classify_mime;

pub use emit::{emit, render_html, EmitError, ReportFormat};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RecordStatus {
    Valid,
    Invalid { error: String },
    /// Valid, but excluded by the language filter.
    LanguageFiltered { language: Option<String> },
}

/// Everything the pipeline learned about one notebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotebookRecord {
    pub path: PathBuf,
    #[serde(flatten)]
    pub status: RecordStatus,
    pub metrics: Option<NotebookMetrics>,
    /// MIME type → number of output bundles carrying it.
    pub output_types: BTreeMap<String, u64>,
    pub usage: UsageCounts,
    pub parse_failures: u64,
    /// theme → rule → error findings in that theme's export.
    pub theme_errors: BTreeMap<String, BTreeMap<RuleCode, u64>>,
}

impl NotebookRecord {
    pub fn invalid(path: PathBuf, error: String) -> Self {
        NotebookRecord {
            path,
            status: RecordStatus::Invalid { error },
            metrics: None,
            output_types: BTreeMap::new(),
            usage: UsageCounts::default(),
            parse_failures: 0,
            theme_errors: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltTally {
    pub programmatic_images: u64,
    pub programmatic_with_alt: u64,
    pub markdown_images: u64,
    pub markdown_with_alt: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureTally {
    pub image_cells: u64,
    pub candidates: u64,
    pub with_markdown: u64,
    pub with_table: u64,
    pub fully_supported: u64,
    pub markdown_image_only: u64,
}

type Histogram = BTreeMap<u64, u64>;

fn bump(h: &mut Histogram, value: u64) {
    *h.entry(value).or_insert(0) += 1;
}

fn merge_counts<K: Ord + Clone>(into: &mut BTreeMap<K, u64>, from: &BTreeMap<K, u64>) {
    for (k, v) in from {
        *into.entry(k.clone()).or_insert(0) += v;
    }
}

/// Mergeable raw counts over a set of notebooks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusTally {
    pub n_notebooks: u64,
    pub n_valid: u64,
    pub n_language_filtered: u64,
    pub n_analyzed: u64,
    pub output_types: BTreeMap<String, u64>,
    /// Programmatic images per analyzed notebook.
    pub images_per_notebook: Histogram,
    pub tables_per_notebook: Histogram,
    pub table_rows: Histogram,
    pub table_cols: Histogram,
    pub alt: AltTally,
    pub alt_words: BTreeMap<String, u64>,
    /// level → 1-based cell of the first heading → notebooks.
    pub first_headings: BTreeMap<u8, Histogram>,
    pub no_heading: u64,
    pub first_table_positions: Histogram,
    pub figures: FigureTally,
    pub usage: UsageCounts,
    pub parse_failures: u64,
    pub themes: ThemeTally,
    pub size_risk: BTreeMap<String, u64>,
}

impl CorpusTally {
    pub fn add(&mut self, r: &NotebookRecord) {
        self.n_notebooks += 1;
        match &r.status {
            RecordStatus::Invalid { .. } => return,
            RecordStatus::LanguageFiltered { .. } => {
                self.n_valid += 1;
                self.n_language_filtered += 1;
                return;
            }
            RecordStatus::Valid => {
                self.n_valid += 1;
                self.n_analyzed += 1;
            }
        }
        merge_counts(&mut self.output_types, &r.output_types);
        self.usage.merge(&r.usage);
        self.parse_failures += r.parse_failures;
        for (theme, errors) in &r.theme_errors {
            self.themes.add_counts(theme, errors);
        }
        let Some(m) = &r.metrics else { return };
        bump(&mut self.images_per_notebook, m.alt_programmatic.n_images as u64);
        bump(&mut self.tables_per_notebook, m.n_tables as u64);
        for &(rows, cols) in &m.table_shapes {
            bump(&mut self.table_rows, rows as u64);
            bump(&mut self.table_cols, cols as u64);
        }
        self.alt.programmatic_images += m.alt_programmatic.n_images as u64;
        self.alt.programmatic_with_alt += m.alt_programmatic.n_with_alt as u64;
        self.alt.markdown_images += m.alt_markdown.n_images as u64;
        self.alt.markdown_with_alt += m.alt_markdown.n_with_alt as u64;
        merge_counts(&mut self.alt_words, &m.alt_words);
        match m.first_heading {
            Some(h) => bump(self.first_headings.entry(h.level).or_default(), h.cell_index as u64),
            None => self.no_heading += 1,
        }
        if let Some(c) = m.first_table_cell {
            bump(&mut self.first_table_positions, c as u64);
        }
        for f in &m.figure_context {
            self.figures.image_cells += 1;
            self.figures.candidates += f.candidate as u64;
            self.figures.with_markdown += f.has_markdown_neighbor as u64;
            self.figures.with_table += f.has_table_neighbor as u64;
            self.figures.fully_supported += f.fully_supported as u64;
            self.figures.markdown_image_only += f.markdown_neighbor_image_only as u64;
        }
        *self.size_risk.entry(m.size_risk.as_str().to_string()).or_insert(0) += 1;
    }

    pub fn merge(&mut self, o: &CorpusTally) {
        self.n_notebooks += o.n_notebooks;
        self.n_valid += o.n_valid;
        self.n_language_filtered += o.n_language_filtered;
        self.n_analyzed += o.n_analyzed;
        merge_counts(&mut self.output_types, &o.output_types);
        merge_counts(&mut self.images_per_notebook, &o.images_per_notebook);
        merge_counts(&mut self.tables_per_notebook, &o.tables_per_notebook);
        merge_counts(&mut self.table_rows, &o.table_rows);
        merge_counts(&mut self.table_cols, &o.table_cols);
        self.alt.programmatic_images += o.alt.programmatic_images;
        self.alt.programmatic_with_alt += o.alt.programmatic_with_alt;
        self.alt.markdown_images += o.alt.markdown_images;
        self.alt.markdown_with_alt += o.alt.markdown_with_alt;
        merge_counts(&mut self.alt_words, &o.alt_words);
        for (level, h) in &o.first_headings {
            merge_counts(self.first_headings.entry(*level).or_default(), h);
        }
        self.no_heading += o.no_heading;
        merge_counts(&mut self.first_table_positions, &o.first_table_positions);
        let (f, g) = (&mut self.figures, &o.figures);
        f.image_cells += g.image_cells;
        f.candidates += g.candidates;
        f.with_markdown += g.with_markdown;
        f.with_table += g.with_table;
        f.fully_supported += g.fully_supported;
        f.markdown_image_only += g.markdown_image_only;
        self.usage.merge(&o.usage);
        self.parse_failures += o.parse_failures;
        self.themes.merge(&o.themes);
        merge_counts(&mut self.size_risk, &o.size_risk);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputTypeRow {
    pub category: String,
    pub label: String,
    pub total: u64,
    pub percent: f64,
    pub cumulative: f64,
}

/// A histogram summarised as a CDF plus centre statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub n: u64,
    pub mean: f64,
    /// Midpoint of the two middle values when `n` is even; 0 when empty.
    pub median: f64,
    /// `(value, fraction of observations ≤ value)`, strictly increasing in
    /// both coordinates.
    pub cdf: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageStats {
    pub all_notebooks: Distribution,
    /// Notebooks with at least one programmatic image.
    pub image_bearing: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableStats {
    pub tables_per_notebook: Distribution,
    pub rows: Distribution,
    pub cols: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub images: u64,
    pub with_alt: u64,
    pub percent_with_alt: f64,
    pub percent_without_alt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltCoverageSummary {
    pub all: CoverageRow,
    pub programmatic: CoverageRow,
    pub markdown: CoverageRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureContextSummary {
    pub image_cells: u64,
    pub candidates: u64,
    pub with_markdown: u64,
    pub with_table: u64,
    pub fully_supported: u64,
    pub markdown_image_only: u64,
    pub percent_candidates: f64,
    pub percent_with_markdown: f64,
    pub percent_with_table: f64,
    pub percent_fully_supported: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub schema_version: u32,
    pub n_notebooks: u64,
    pub n_valid: u64,
    pub n_language_filtered: u64,
    pub n_analyzed: u64,
    pub output_type_table: Vec<OutputTypeRow>,
    pub image_stats: ImageStats,
    pub table_stats: TableStats,
    pub alt_coverage: AltCoverageSummary,
    pub alt_word_freq: Vec<RankedRow>,
    /// `[level - 1][cell - 1]` → notebooks whose first heading is there.
    pub heading_heatmap: Vec<Vec<u64>>,
    pub n_without_heading: u64,
    pub first_table_positions: BTreeMap<u64, u64>,
    pub figure_context_summary: FigureContextSummary,
    pub code_rank: RankTables,
    pub parse_failures: u64,
    pub theme_error_stats: Vec<ThemeErrorStats>,
    pub rule_heatmap: BTreeMap<String, BTreeMap<RuleCode, f64>>,
    pub size_risk_counts: BTreeMap<String, u64>,
    pub tally: CorpusTally,
}

fn percent(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 * 100.0 / whole as f64
    }
}

/// The value at 0-based rank `k` of the sorted observations.
fn nth(h: &Histogram, k: u64) -> u64 {
    let mut seen = 0;
    for (v, c) in h {
        seen += c;
        if k < seen {
            return *v;
        }
    }
    0
}

pub fn distribution(h: &Histogram) -> Distribution {
    let n: u64 = h.values().sum();
    if n == 0 {
        return Distribution { n: 0, mean: 0.0, median: 0.0, cdf: Vec::new() };
    }
    let mean = h.iter().map(|(v, c)| *v as f64 * *c as f64).sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        nth(h, n / 2) as f64
    } else {
        (nth(h, n / 2 - 1) as f64 + nth(h, n / 2) as f64) / 2.0
    };
    let mut running = 0;
    let cdf = h
        .iter()
        .filter(|(_, c)| **c > 0)
        .map(|(v, c)| {
            running += c;
            (*v, running as f64 / n as f64)
        })
        .collect();
    Distribution { n, mean, median, cdf }
}

fn output_type_table(types: &BTreeMap<String, u64>) -> Vec<OutputTypeRow> {
    let mut by_label: BTreeMap<(String, String), u64> = BTreeMap::new();
    for (mime, n) in types {
        let Ok(class) = classify_mime(mime) else { continue };
        *by_label.entry((class.category.as_str().to_string(), class.label)).or_insert(0) += n;
    }
    let total: u64 = by_label.values().sum();
    let mut rows: Vec<((String, String), u64)> = by_label.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut running = 0;
    rows.into_iter()
        .map(|((category, label), n)| {
            running += n;
            OutputTypeRow {
                category,
                label,
                total: n,
                percent: percent(n, total),
                cumulative: percent(running, total),
            }
        })
        .collect()
}

fn coverage(images: u64, with_alt: u64) -> CoverageRow {
    CoverageRow {
        images,
        with_alt,
        percent_with_alt: percent(with_alt, images),
        percent_without_alt: if images == 0 { 0.0 } else { percent(images - with_alt, images) },
    }
}

impl CorpusReport {
    pub fn from_tally(tally: CorpusTally) -> CorpusReport {
        let image_bearing: Histogram =
            tally.images_per_notebook.iter().filter(|(v, _)| **v > 0).map(|(v, c)| (*v, *c)).collect();
        let mut heading_counts: BTreeMap<(u8, usize), u64> = BTreeMap::new();
        for (level, h) in &tally.first_headings {
            for (cell, n) in h {
                heading_counts.insert((*level, *cell as usize), *n);
            }
        }
        let a = tally.alt;
        let f = tally.figures;
        let comparison = theme_comparison(&tally.themes);
        CorpusReport {
            schema_version: SCHEMA_VERSION,
            n_notebooks: tally.n_notebooks,
            n_valid: tally.n_valid,
            n_language_filtered: tally.n_language_filtered,
            n_analyzed: tally.n_analyzed,
            output_type_table: output_type_table(&tally.output_types),
            image_stats: ImageStats {
                all_notebooks: distribution(&tally.images_per_notebook),
                image_bearing: distribution(&image_bearing),
            },
            table_stats: TableStats {
                tables_per_notebook: distribution(&tally.tables_per_notebook),
                rows: distribution(&tally.table_rows),
                cols: distribution(&tally.table_cols),
            },
            alt_coverage: AltCoverageSummary {
                all: coverage(
                    a.programmatic_images + a.markdown_images,
                    a.programmatic_with_alt + a.markdown_with_alt,
                ),
                programmatic: coverage(a.programmatic_images, a.programmatic_with_alt),
                markdown: coverage(a.markdown_images, a.markdown_with_alt),
            },
            alt_word_freq: rank(&tally.alt_words),
            heading_heatmap: heatmap_from_counts(&heading_counts),
            n_without_heading: tally.no_heading,
            first_table_positions: tally.first_table_positions.clone(),
            figure_context_summary: FigureContextSummary {
                image_cells: f.image_cells,
                candidates: f.candidates,
                with_markdown: f.with_markdown,
                with_table: f.with_table,
                fully_supported: f.fully_supported,
                markdown_image_only: f.markdown_image_only,
                percent_candidates: percent(f.candidates, f.image_cells),
                percent_with_markdown: percent(f.with_markdown, f.image_cells),
                percent_with_table: percent(f.with_table, f.image_cells),
                percent_fully_supported: percent(f.fully_supported, f.image_cells),
            },
            code_rank: rank_usage(&tally.usage),
            parse_failures: tally.parse_failures,
            theme_error_stats: comparison.themes,
            rule_heatmap: comparison.rule_heatmap,
            size_risk_counts: tally.size_risk.clone(),
            tally,
        }
    }

    /// Report over the union of two disjoint corpora.
    pub fn merge(&self, other: &CorpusReport) -> CorpusReport {
        let mut t = self.tally.clone();
        t.merge(&other.tally);
        CorpusReport::from_tally(t)
    }
}

/// Folds records into a report. Record order does not matter.
pub fn aggregate<'a>(records: impl IntoIterator<Item = &'a NotebookRecord>) -> CorpusReport {
    let mut tally = CorpusTally::default();
    for r in records {
        tally.add(r);
    }
    CorpusReport::from_tally(tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{notebook_metrics, SizeThresholds};
    use crate::nbmodel::{Cell, CellKind, Notebook};

    fn hist(values: &[u64]) -> Histogram {
        let mut h = Histogram::new();
        for v in values {
            bump(&mut h, *v);
        }
        h
    }

    fn record_with_types(types: &[(&str, u64)]) -> NotebookRecord {
        let nb = Notebook::new("a.ipynb", vec![Cell::new(1, CellKind::Markdown, "# A")]);
        NotebookRecord {
            path: "a.ipynb".into(),
            status: RecordStatus::Valid,
            metrics: Some(notebook_metrics(&nb, &SizeThresholds::default())),
            output_types: types.iter().map(|(m, n)| (m.to_string(), *n)).collect(),
            usage: UsageCounts::default(),
            parse_failures: 0,
            theme_errors: BTreeMap::new(),
        }
    }

    #[test]
    fn median_over_image_bearing_subset() {
        let d = distribution(&hist(&[1, 4, 4, 9, 100]));
        assert_eq!(d.median, 4.0);
        let all = distribution(&hist(&[0, 0, 1, 4, 4, 9, 100]));
        assert_eq!(all.median, 4.0);
        assert_eq!(distribution(&hist(&[1, 2, 3, 10])).median, 2.5);
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let d = distribution(&hist(&[3, 1, 1, 7, 3, 3]));
        assert_eq!(d.cdf.first().unwrap().0, 1);
        assert!(d.cdf.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        assert_eq!(d.cdf.last().unwrap().1, 1.0);
    }

    #[test]
    fn empty_corpus_is_all_zero() {
        let r = aggregate(&[]);
        assert_eq!(r.n_notebooks, 0);
        assert!(r.output_type_table.is_empty());
        assert_eq!(r.image_stats.all_notebooks.n, 0);
        assert_eq!(r.heading_heatmap, vec![Vec::<u64>::new(); 6]);
        assert_eq!(r.alt_coverage.all.percent_with_alt, 0.0);
    }

    #[test]
    fn plain_only_outputs_are_one_row() {
        let r = aggregate(&[record_with_types(&[("text/plain", 12)])]);
        assert_eq!(r.output_type_table.len(), 1);
        assert_eq!(r.output_type_table[0].label, "Plain");
        assert_eq!(r.output_type_table[0].percent, 100.0);
    }

    #[test]
    fn output_rows_group_shared_labels_and_accumulate() {
        let r = aggregate(&[record_with_types(&[
            ("text/plain", 5),
            ("image/png", 3),
            ("application/vnd.bokehjs_exec.v0+json", 1),
            ("application/vnd.bokehjs_load.v0+json", 1),
        ])]);
        let labels: Vec<_> = r.output_type_table.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, vec!["Plain", "PNG", "BokehJS + JSON"]);
        let sum: f64 = r.output_type_table.iter().map(|r| r.percent).sum();
        assert!((sum - 100.0).abs() < 1e-9);
        assert!(r.output_type_table.windows(2).all(|w| w[0].cumulative <= w[1].cumulative));
        assert!((r.output_type_table.last().unwrap().cumulative - 100.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_and_filtered_are_counted_separately() {
        let mut filtered = record_with_types(&[]);
        filtered.status = RecordStatus::LanguageFiltered { language: Some("r".into()) };
        let recs = vec![
            record_with_types(&[]),
            NotebookRecord::invalid("b.ipynb".into(), "bad".into()),
            filtered,
        ];
        let r = aggregate(&recs);
        assert_eq!((r.n_notebooks, r.n_valid, r.n_language_filtered, r.n_analyzed), (3, 2, 1, 1));
    }

    #[test]
    fn merge_equals_single_pass() {
        let recs: Vec<_> = (0..5).map(|i| record_with_types(&[("text/plain", i), ("text/html", 1)])).collect();
        let whole = aggregate(&recs);
        let merged = aggregate(&recs[..2]).merge(&aggregate(&recs[2..]));
        assert_eq!(whole, merged);
    }

    #[test]
    fn json_roundtrip() {
        let r = aggregate(&[record_with_types(&[("text/plain", 3), ("image/png", 7)])]);
        let text = serde_json::to_string(&r).unwrap();
        let back: CorpusReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
