//! Per-notebook accessibility measurements.
//!
//! All metrics are optimistic: the presence of a heading, a table or any
//! alt string counts, whatever its quality. Headings are read from
//! rendered markdown cells; tables from rendered markdown and from
//! `text/html` outputs of code cells. Raw cells are never measured.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::htmlutil;
use crate::markdown;
use crate::nbmodel::{extract_images, CellKind, ImageArtifact, Notebook, Provenance};

/// Smallest notebook size (bytes) observed to degrade screen-reader use.
pub const DEFAULT_DEGRADED_BYTES: u64 = 721_056;
/// Smallest notebook size (bytes) observed to crash a screen reader or tab.
pub const DEFAULT_CRASH_RISK_BYTES: u64 = 10_955_553;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeRisk {
    Ok,
    Degraded,
    CrashRisk,
}

impl SizeRisk {
    pub fn as_str(self) -> &'static str {
        match self {
            SizeRisk::Ok => "ok",
            SizeRisk::Degraded => "degraded",
            SizeRisk::CrashRisk => "crash_risk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeThresholds {
    pub degraded: u64,
    pub crash_risk: u64,
}

impl Default for SizeThresholds {
    fn default() -> Self {
        SizeThresholds {
            degraded: DEFAULT_DEGRADED_BYTES,
            crash_risk: DEFAULT_CRASH_RISK_BYTES,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ThresholdError {
    #[error("expected `DEGRADED,CRASH_RISK` byte counts, got `{0}`")]
    BadPair(String),
    #[error("degraded threshold {degraded} exceeds crash-risk threshold {crash_risk}")]
    Unordered { degraded: u64, crash_risk: u64 },
    #[error("cannot read threshold file {path}: {message}")]
    File { path: PathBuf, message: String },
}

impl SizeThresholds {
    pub fn new(degraded: u64, crash_risk: u64) -> Result<Self, ThresholdError> {
        if degraded > crash_risk {
            return Err(ThresholdError::Unordered { degraded, crash_risk });
        }
        Ok(SizeThresholds { degraded, crash_risk })
    }

    /// `"721056,10955553"`.
    pub fn parse_pair(s: &str) -> Result<Self, ThresholdError> {
        let bad = || ThresholdError::BadPair(s.to_string());
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Self::new(a, b)
    }

    /// A TOML (or, for `.json` paths, JSON) file with `degraded` and
    /// `crash_risk` keys.
    pub fn from_file(path: &Path) -> Result<Self, ThresholdError> {
        let err = |message: String| ThresholdError::File {
            path: path.to_path_buf(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let t: SizeThresholds = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| err(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| err(e.to_string()))?
        };
        Self::new(t.degraded, t.crash_risk)
    }

    /// A `A,B` pair or a path to a threshold file.
    pub fn from_arg(arg: &str) -> Result<Self, ThresholdError> {
        if arg.contains(',') && !Path::new(arg).exists() {
            Self::parse_pair(arg)
        } else {
            Self::from_file(Path::new(arg))
        }
    }
}

pub fn size_risk(size_bytes: u64, thresholds: &SizeThresholds) -> SizeRisk {
    if size_bytes >= thresholds.crash_risk {
        SizeRisk::CrashRisk
    } else if size_bytes >= thresholds.degraded {
        SizeRisk::Degraded
    } else {
        SizeRisk::Ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FirstHeading {
    pub level: u8,
    pub cell_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureContextFlags {
    pub cell_index: usize,
    /// The next cell contains no heading.
    pub candidate: bool,
    pub has_markdown_neighbor: bool,
    pub has_table_neighbor: bool,
    pub fully_supported: bool,
    /// A neighbouring markdown cell renders nothing but images.
    pub markdown_neighbor_image_only: bool,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltCoverage {
    pub n_images: usize,
    pub n_with_alt: usize,
}

#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltMetrics {
    pub n_images: usize,
    pub n_with_alt: usize,
    pub programmatic: AltCoverage,
    pub markdown: AltCoverage,
    /// Lowercased word tokens of all alt strings, with multiplicity.
    pub alt_words: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotebookMetrics {
    pub path: PathBuf,
    pub n_cells: usize,
    pub n_code_cells: usize,
    pub n_markdown_cells: usize,
    pub n_images: usize,
    pub n_images_with_alt: usize,
    pub alt_programmatic: AltCoverage,
    pub alt_markdown: AltCoverage,
    pub alt_words: BTreeMap<String, u64>,
    /// Alt string of every image in cell order; `None` when absent.
    pub alt_texts: Vec<Option<String>>,
    pub n_tables: usize,
    pub table_shapes: Vec<(usize, usize)>,
    pub first_heading: Option<FirstHeading>,
    pub first_table_cell: Option<usize>,
    pub heading_census: BTreeMap<u8, u64>,
    pub n_links: usize,
    pub figure_context: Vec<FigureContextFlags>,
    pub size_bytes: u64,
    pub size_risk: SizeRisk,
}

/// Landmarks found in one rendered cell.
#[derive(Debug, Default, Clone)]
struct CellFacts {
    kind: Option<CellKind>,
    headings: Vec<u8>,
    tables: Vec<(usize, usize)>,
    links: usize,
    image_only: bool,
    has_image_output: bool,
}

fn cell_facts(nb: &Notebook) -> Vec<CellFacts> {
    nb.cells
        .iter()
        .map(|cell| {
            let mut f = CellFacts {
                kind: Some(cell.kind),
                ..CellFacts::default()
            };
            match cell.kind {
                CellKind::Markdown => {
                    let s = markdown::summarize(&cell.source);
                    f.headings = s.headings;
                    f.tables = s.tables;
                    f.links = s.links;
                    f.image_only = s.image_only;
                }
                CellKind::Code => {
                    f.has_image_output = cell.has_image_output();
                    for out in &cell.outputs {
                        if let Some(html) = out.text_payload("text/html") {
                            let facts = htmlutil::fragment_facts(html);
                            f.tables.extend(facts.tables);
                            f.links += facts.links;
                        }
                    }
                }
                CellKind::Raw => {}
            }
            f
        })
        .collect()
}

fn headings_of(facts: &[CellFacts]) -> (Option<FirstHeading>, BTreeMap<u8, u64>) {
    let mut first = None;
    let mut census = BTreeMap::new();
    for (i, f) in facts.iter().enumerate() {
        for &level in &f.headings {
            if first.is_none() {
                first = Some(FirstHeading { level, cell_index: i + 1 });
            }
            *census.entry(level).or_insert(0) += 1;
        }
    }
    (first, census)
}

/// First heading (level, 1-based cell) and a count of headings by level.
pub fn heading_metrics(nb: &Notebook) -> (Option<FirstHeading>, BTreeMap<u8, u64>) {
    headings_of(&cell_facts(nb))
}

fn tables_of(facts: &[CellFacts]) -> (usize, Vec<(usize, usize)>, Option<usize>) {
    let shapes: Vec<_> = facts.iter().flat_map(|f| f.tables.iter().copied()).collect();
    let first = facts.iter().position(|f| !f.tables.is_empty()).map(|i| i + 1);
    (shapes.len(), shapes, first)
}

/// Number of tables, their (rows, cols) shapes and the first cell holding
/// one.
pub fn table_metrics(nb: &Notebook) -> (usize, Vec<(usize, usize)>, Option<usize>) {
    tables_of(&cell_facts(nb))
}

pub fn alt_tokens(alt: &str) -> impl Iterator<Item = String> + '_ {
    alt.unicode_words().map(str::to_lowercase)
}

pub fn alt_metrics(images: &[ImageArtifact]) -> AltMetrics {
    let mut m = AltMetrics::default();
    for img in images {
        let bucket = match img.provenance {
            Provenance::Programmatic => &mut m.programmatic,
            Provenance::Markdown => &mut m.markdown,
        };
        bucket.n_images += 1;
        m.n_images += 1;
        if img.has_alt() {
            bucket.n_with_alt += 1;
            m.n_with_alt += 1;
            for tok in alt_tokens(img.alt_text.as_deref().unwrap_or_default()) {
                *m.alt_words.entry(tok).or_insert(0) += 1;
            }
        }
    }
    m
}

fn figure_context_of(facts: &[CellFacts]) -> Vec<FigureContextFlags> {
    let neighbours = |i: usize| {
        let before = i.checked_sub(1).and_then(|j| facts.get(j));
        let after = facts.get(i + 1);
        before.into_iter().chain(after)
    };
    facts
        .iter()
        .enumerate()
        .filter(|(_, f)| f.has_image_output)
        .map(|(i, _)| {
            let candidate = facts.get(i + 1).is_none_or(|next| next.headings.is_empty());
            let markdown_neighbours: Vec<&CellFacts> = neighbours(i)
                .filter(|f| f.kind == Some(CellKind::Markdown))
                .collect();
            let has_markdown_neighbor = !markdown_neighbours.is_empty();
            let has_table_neighbor = neighbours(i).any(|f| !f.tables.is_empty());
            FigureContextFlags {
                cell_index: i + 1,
                candidate,
                has_markdown_neighbor,
                has_table_neighbor,
                fully_supported: candidate && has_markdown_neighbor && has_table_neighbor,
                markdown_neighbor_image_only: markdown_neighbours.iter().any(|f| f.image_only),
            }
        })
        .collect()
}

/// Adjacency flags for every code cell with an image output.
pub fn figure_context(nb: &Notebook) -> Vec<FigureContextFlags> {
    figure_context_of(&cell_facts(nb))
}

pub fn notebook_metrics(nb: &Notebook, thresholds: &SizeThresholds) -> NotebookMetrics {
    let facts = cell_facts(nb);
    let (first_heading, heading_census) = headings_of(&facts);
    let (n_tables, table_shapes, first_table_cell) = tables_of(&facts);
    let images = extract_images(nb);
    let alt = alt_metrics(&images);
    NotebookMetrics {
        path: nb.path.clone(),
        n_cells: nb.cells.len(),
        n_code_cells: nb.cells.iter().filter(|c| c.kind == CellKind::Code).count(),
        n_markdown_cells: nb.cells.iter().filter(|c| c.kind == CellKind::Markdown).count(),
        n_images: alt.n_images,
        n_images_with_alt: alt.n_with_alt,
        alt_programmatic: alt.programmatic,
        alt_markdown: alt.markdown,
        alt_words: alt.alt_words,
        alt_texts: images.into_iter().map(|i| i.alt_text).collect(),
        n_tables,
        table_shapes,
        first_heading,
        first_table_cell,
        heading_census,
        n_links: facts.iter().map(|f| f.links).sum(),
        figure_context: figure_context_of(&facts),
        size_bytes: nb.raw_size_bytes,
        size_risk: size_risk(nb.raw_size_bytes, thresholds),
    }
}

/// `matrix[level - 1][cell - 1]` counts notebooks whose first heading has
/// that level and sits in that cell. Always 6 rows; as many columns as the
/// largest cell index seen.
pub fn heading_heatmap<'a>(
    first_headings: impl IntoIterator<Item = &'a FirstHeading>,
) -> Vec<Vec<u64>> {
    let mut counts: BTreeMap<(u8, usize), u64> = BTreeMap::new();
    for h in first_headings {
        *counts.entry((h.level, h.cell_index)).or_insert(0) += 1;
    }
    heatmap_from_counts(&counts)
}

pub fn heatmap_from_counts(counts: &BTreeMap<(u8, usize), u64>) -> Vec<Vec<u64>> {
    let width = counts.keys().map(|&(_, c)| c).max().unwrap_or(0);
    let mut m = vec![vec![0u64; width]; 6];
    for (&(level, cell), &n) in counts {
        if (1..=6).contains(&level) && cell >= 1 {
            m[level as usize - 1][cell - 1] += n;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbmodel::{Cell, MimePayload, OutputBundle, OutputKind};

    fn md(i: usize, s: &str) -> Cell {
        Cell::new(i, CellKind::Markdown, s)
    }

    fn code(i: usize) -> Cell {
        Cell::new(i, CellKind::Code, "x = 1")
    }

    fn code_with(i: usize, mime: &str, payload: &str) -> Cell {
        let mut c = code(i);
        let mut o = OutputBundle::new(OutputKind::DisplayData);
        o.mime_payloads.insert(mime.into(), MimePayload::Text(payload.into()));
        c.outputs.push(o);
        c
    }

    fn image_cell(i: usize) -> Cell {
        code_with(i, "image/png", "iVBORw0KGgo=")
    }

    fn nb(cells: Vec<Cell>) -> Notebook {
        Notebook::new("t.ipynb", cells)
    }

    #[test]
    fn h1_in_first_cell() {
        let (first, census) = heading_metrics(&nb(vec![md(1, "# Title")]));
        assert_eq!(first, Some(FirstHeading { level: 1, cell_index: 1 }));
        assert_eq!(census.get(&1), Some(&1));
    }

    #[test]
    fn no_markdown_no_heading() {
        let (first, census) = heading_metrics(&nb(vec![code(1)]));
        assert!(first.is_none() && census.is_empty());
    }

    #[test]
    fn heading_in_second_cell() {
        let (first, _) = heading_metrics(&nb(vec![code(1), md(2, "## x")]));
        assert_eq!(first, Some(FirstHeading { level: 2, cell_index: 2 }));
    }

    #[test]
    fn head_table_is_six_by_four() {
        let mut html = String::from("<table><tr><th>a</th><th>b</th><th>c</th><th>d</th></tr>");
        for _ in 0..5 {
            html.push_str("<tr><td>1</td><td>2</td><td>3</td><td>4</td></tr>");
        }
        html.push_str("</table>");
        let (n, shapes, first) = table_metrics(&nb(vec![md(1, "text"), code_with(2, "text/html", &html)]));
        assert_eq!((n, shapes, first), (1, vec![(6, 4)], Some(2)));
    }

    #[test]
    fn no_tables() {
        assert_eq!(table_metrics(&nb(vec![code(1)])), (0, vec![], None));
    }

    #[test]
    fn pipe_table_and_code_source_pipes() {
        let mut commented = code(1);
        commented.source = "# | a | b |\n# |---|---|\n".into();
        let t = table_metrics(&nb(vec![commented, md(2, "| a | b |\n|---|---|\n| 1 | 2 |\n| 3 | 4 |")]));
        assert_eq!(t, (1, vec![(3, 2)], Some(2)));
    }

    #[test]
    fn alt_counts_and_tokens() {
        let make = |prov, alt: Option<&str>| ImageArtifact {
            notebook_path: "n".into(),
            cell_index: 1,
            format: crate::nbmodel::ImageFormat::Png,
            bytes: vec![],
            provenance: prov,
            alt_text: alt.map(str::to_string),
            mime: None,
            output_index: None,
            reference: None,
            unresolved: false,
            decode_error: None,
        };
        let m = alt_metrics(&[
            make(Provenance::Programmatic, None),
            make(Provenance::Programmatic, None),
            make(Provenance::Programmatic, None),
        ]);
        assert_eq!((m.n_images, m.n_with_alt, m.alt_words.len()), (3, 0, 0));

        let m = alt_metrics(&[make(Provenance::Markdown, Some("Open In Colab!"))]);
        let words: Vec<_> = m.alt_words.keys().cloned().collect();
        assert_eq!(words, vec!["colab", "in", "open"]);
        assert_eq!(m.markdown, AltCoverage { n_images: 1, n_with_alt: 1 });

        assert_eq!(alt_metrics(&[]), AltMetrics::default());
    }

    #[test]
    fn figure_followed_by_table() {
        let flags = figure_context(&nb(vec![image_cell(1), md(2, "| a |\n|---|\n| 1 |")]));
        assert_eq!(flags.len(), 1);
        let f = flags[0];
        assert!(f.candidate && f.has_table_neighbor && f.has_markdown_neighbor && f.fully_supported);
    }

    #[test]
    fn figure_followed_by_heading() {
        let flags = figure_context(&nb(vec![image_cell(1), md(2, "## next")]));
        assert!(!flags[0].candidate);
        assert!(!flags[0].fully_supported);
    }

    #[test]
    fn boundaries_and_image_only_neighbours() {
        let flags = figure_context(&nb(vec![md(1, "![x](a.png)"), image_cell(2)]));
        let f = flags[0];
        assert!(f.candidate);
        assert!(f.has_markdown_neighbor && f.markdown_neighbor_image_only);
        assert!(!f.has_table_neighbor);
    }

    #[test]
    fn size_thresholds_from_table_rows() {
        let t = SizeThresholds::default();
        assert_eq!(size_risk(630_352, &t), SizeRisk::Ok);
        assert_eq!(size_risk(721_056, &t), SizeRisk::Degraded);
        assert_eq!(size_risk(10_955_553, &t), SizeRisk::CrashRisk);
        assert_eq!(size_risk(0, &t), SizeRisk::Ok);
    }

    #[test]
    fn threshold_parsing() {
        assert_eq!(SizeThresholds::parse_pair("10, 20").unwrap(), SizeThresholds::new(10, 20).unwrap());
        assert!(SizeThresholds::parse_pair("20,10").is_err());
        assert!(SizeThresholds::parse_pair("x").is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.toml");
        std::fs::write(&p, "degraded = 5\ncrash_risk = 9\n").unwrap();
        assert_eq!(SizeThresholds::from_arg(p.to_str().unwrap()).unwrap(), SizeThresholds::new(5, 9).unwrap());
    }

    #[test]
    fn heatmap_shape() {
        let m = heading_heatmap(&[FirstHeading { level: 1, cell_index: 1 }]);
        assert_eq!(m, vec![vec![1], vec![0], vec![0], vec![0], vec![0], vec![0]]);
        let empty = heading_heatmap(&[]);
        assert_eq!(empty.len(), 6);
        assert!(empty.iter().all(|r| r.is_empty()));
    }
}
