//! The whole pipeline over a corpus: validate, filter by language,
//! extract, export per theme, scan, and aggregate.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::a11y::{error_counts, scan_with, RuleSelection, ScanResult};
use crate::codeanalysis::{analyze_notebook, UsageCounts};
use crate::htmlexport::{export_html, sha1_hex, Theme};
use crate::metrics::{notebook_metrics, SizeThresholds};
use crate::nbmodel::{extract_images, filter_language, parse_notebook, ImageArtifact, Notebook, OutputKind};
use crate::report::{aggregate, emit, CorpusReport, NotebookRecord, RecordStatus, ReportFormat};

/// Seed used for `--sample` when none is given.
pub const DEFAULT_SEED: u64 = 0x6e62_6175_6469_7400;
pub const DEFAULT_LANGUAGE: &str = "python";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input_paths: Vec<PathBuf>,
    /// `None` keeps every language.
    pub language: Option<String>,
    pub themes: Vec<Theme>,
    pub rules: RuleSelection,
    pub thresholds: SizeThresholds,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub sample: Option<usize>,
    pub dump_images: bool,
    pub formats: BTreeSet<ReportFormat>,
}

impl RunConfig {
    pub fn new(input_paths: Vec<PathBuf>, out_dir: PathBuf) -> Self {
        RunConfig {
            input_paths,
            language: Some(DEFAULT_LANGUAGE.to_string()),
            themes: Theme::all_builtin(),
            rules: RuleSelection::all(),
            thresholds: SizeThresholds::default(),
            jobs: 1,
            out_dir,
            seed: DEFAULT_SEED,
            sample: None,
            dump_images: false,
            formats: [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Html].into_iter().collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("--jobs must be at least 1")]
    NoJobs,
    #[error("no themes selected")]
    NoThemes,
    #[error("sample size {want} exceeds corpus size {have}")]
    SampleTooLarge { want: usize, have: usize },
    #[error("input {path}: {source}")]
    Input { path: PathBuf, source: std::io::Error },
    #[error("output {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "ipynb") {
            out.push(path);
        }
    }
    Ok(())
}

/// Notebook files named by `inputs`: files as given, directories searched
/// recursively for `*.ipynb`. Sorted and deduplicated.
pub fn discover(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, ConfigError> {
    let mut out = Vec::new();
    for p in inputs {
        let meta = std::fs::metadata(p).map_err(|source| ConfigError::Input { path: p.clone(), source })?;
        if meta.is_dir() {
            walk(p, &mut out).map_err(|source| ConfigError::Input { path: p.clone(), source })?;
        } else {
            out.push(p.clone());
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// `n` paths drawn without replacement by a ChaCha8 generator seeded with
/// `seed`, returned in their original order.
pub fn sample_paths(paths: &[PathBuf], n: usize, seed: u64) -> Result<Vec<PathBuf>, ConfigError> {
    if n > paths.len() {
        return Err(ConfigError::SampleTooLarge { want: n, have: paths.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, paths.len(), n).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| paths[i].clone()).collect())
}

/// Output bundles per MIME type. Stream and error outputs carry no MIME
/// bundle and are not counted.
pub fn output_type_counts(nb: &Notebook) -> BTreeMap<String, u64> {
    let mut m = BTreeMap::new();
    for cell in &nb.cells {
        for out in &cell.outputs {
            if matches!(out.output_kind, OutputKind::ExecuteResult | OutputKind::DisplayData) {
                for mime in out.mime_payloads.keys() {
                    *m.entry(mime.clone()).or_insert(0) += 1;
                }
            }
        }
    }
    m
}

/// Everything produced for one notebook.
#[derive(Debug, Clone)]
pub struct NotebookOutcome {
    pub record: NotebookRecord,
    pub scans: Vec<ScanResult>,
    pub images: Vec<ImageArtifact>,
}

/// The per-notebook pipeline. Pure apart from reading `path`.
pub fn process_notebook(path: &Path, config: &RunConfig) -> NotebookOutcome {
    let failed = |error: String| NotebookOutcome {
        record: NotebookRecord::invalid(path.to_path_buf(), error),
        scans: Vec::new(),
        images: Vec::new(),
    };
    let raw = match std::fs::read(path) {
        Ok(raw) => raw,
        Err(e) => return failed(e.to_string()),
    };
    let nb = match parse_notebook(&raw, path) {
        Ok(nb) => nb,
        Err(e) => return failed(e.to_string()),
    };
    if let Some(lang) = &config.language {
        if !filter_language(&nb, lang) {
            let mut record = NotebookRecord::invalid(path.to_path_buf(), String::new());
            record.status = RecordStatus::LanguageFiltered { language: nb.language.clone() };
            return NotebookOutcome { record, scans: Vec::new(), images: Vec::new() };
        }
    }
    let code = analyze_notebook(&nb);
    let mut usage = UsageCounts::default();
    usage.add_imports(&code.imports);
    usage.add_calls(&code.calls);
    let scans: Vec<ScanResult> = config
        .themes
        .iter()
        .map(|theme| scan_with(&export_html(&nb, theme), theme, &config.rules))
        .collect();
    let theme_errors = scans.iter().map(|s| (s.theme.clone(), error_counts(s))).collect();
    NotebookOutcome {
        record: NotebookRecord {
            path: path.to_path_buf(),
            status: RecordStatus::Valid,
            metrics: Some(notebook_metrics(&nb, &config.thresholds)),
            output_types: output_type_counts(&nb),
            usage,
            parse_failures: code.parse_failures.len() as u64,
            theme_errors,
        },
        scans,
        images: if config.dump_images { extract_images(&nb) } else { Vec::new() },
    }
}

#[derive(Debug)]
pub struct AuditSummary {
    pub report: CorpusReport,
    pub n_invalid: u64,
    pub written: Vec<PathBuf>,
    pub write_errors: Vec<String>,
}

impl AuditSummary {
    /// 0 when every notebook was valid, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.n_invalid > 0 {
            2
        } else {
            0
        }
    }
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut f, &item)?;
        f.write_all(b"\n")?;
    }
    f.flush()
}

/// Writes each decoded image once as `<sha1 of bytes>.<ext>`.
fn dump_images(outcomes: &[NotebookOutcome], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files = BTreeSet::new();
    for img in outcomes.iter().flat_map(|o| o.images.iter()).filter(|i| !i.bytes.is_empty()) {
        let file = dir.join(format!("{}.{}", sha1_hex(&img.bytes), img.format.extension()));
        if files.insert(file.clone()) {
            std::fs::create_dir_all(dir)?;
            std::fs::write(&file, &img.bytes)?;
        }
    }
    Ok(files.into_iter().collect())
}

/// Runs the pipeline and writes `notebooks.jsonl`, `findings.jsonl`, the
/// report files and optionally an `images/` dump into `config.out_dir`.
/// Output bytes do not depend on `config.jobs`.
pub fn run_audit(config: &RunConfig) -> Result<AuditSummary, ConfigError> {
    if config.jobs == 0 {
        return Err(ConfigError::NoJobs);
    }
    if config.themes.is_empty() {
        return Err(ConfigError::NoThemes);
    }
    let mut paths = discover(&config.input_paths)?;
    if let Some(n) = config.sample {
        paths = sample_paths(&paths, n, config.seed)?;
    }
    let out = &config.out_dir;
    std::fs::create_dir_all(out).map_err(|source| ConfigError::Output { path: out.clone(), source })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| ConfigError::Pool(e.to_string()))?;
    let outcomes: Vec<NotebookOutcome> =
        pool.install(|| paths.par_iter().map(|p| process_notebook(p, config)).collect());

    let report = aggregate(outcomes.iter().map(|o| &o.record));
    let n_invalid = outcomes.iter().filter(|o| matches!(o.record.status, RecordStatus::Invalid { .. })).count() as u64;
    let mut written = Vec::new();
    let mut write_errors = Vec::new();
    let mut note = |path: PathBuf, r: std::io::Result<()>| match r {
        Ok(()) => written.push(path),
        Err(e) => write_errors.push(format!("{}: {e}", path.display())),
    };
    let records = out.join("notebooks.jsonl");
    note(records.clone(), write_jsonl(&records, outcomes.iter().map(|o| &o.record)));
    let findings = out.join("findings.jsonl");
    let all = outcomes.iter().flat_map(|o| o.scans.iter().flat_map(|s| s.findings.iter()));
    note(findings.clone(), write_jsonl(&findings, all));
    if config.dump_images {
        let dir = out.join("images");
        match dump_images(&outcomes, &dir) {
            Ok(files) => written.extend(files),
            Err(e) => write_errors.push(format!("{}: {e}", dir.display())),
        }
    }
    for r in emit(&report, &config.formats, out) {
        match r {
            Ok(p) => written.push(p),
            Err(e) => write_errors.push(e.to_string()),
        }
    }
    Ok(AuditSummary { report, n_invalid, written, write_errors })
}
