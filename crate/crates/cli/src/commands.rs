use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nbaudit_core::a11y::{scan_bytes, RuleSelection};
use nbaudit_core::altpng::{embed_alt, extract_alt};
use nbaudit_core::audit::{discover, run_audit, RunConfig};
use nbaudit_core::codeanalysis::{analyze_notebook, rank_usage, UsageCounts};
use nbaudit_core::htmlexport::{export_corpus, write_manifest, Theme};
use nbaudit_core::nbmodel::Notebook;
use nbaudit_core::report::{aggregate, emit, NotebookRecord, ReportFormat};
use nbaudit_core::{synth, SizeThresholds};
use serde::Serialize;

use crate::{AltCommand, AnalyzeArgs, AuditArgs, ExportArgs, OutputArgs, ReportArgs, ScanArgs, SynthArgs};

fn themes(names: &[String]) -> Result<Vec<Theme>> {
    names.iter().map(|n| Theme::load(n.trim()).map_err(Into::into)).collect()
}

fn formats(names: &[String]) -> Result<BTreeSet<ReportFormat>> {
    names.iter().map(|n| n.parse().map_err(anyhow::Error::msg)).collect()
}

fn create_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, &item)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

/// Writes `bytes` to `<out>/<name>` and, with `--stdout`, to stdout.
fn deliver(output: &OutputArgs, name: &str, bytes: &[u8]) -> Result<()> {
    create_out(&output.out)?;
    let path = output.out.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    if output.stdout {
        std::io::stdout().write_all(bytes)?;
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn audit(a: AuditArgs) -> Result<u8> {
    let mut config = RunConfig::new(a.inputs, a.output.out.clone());
    config.language = match a.language.as_str() {
        "all" => None,
        l => Some(l.to_string()),
    };
    config.themes = themes(&a.themes)?;
    config.rules = RuleSelection::parse(&a.rules)?;
    if let Some(t) = &a.size_thresholds {
        config.thresholds = SizeThresholds::from_arg(t)?;
    }
    config.jobs = a.jobs;
    config.sample = a.sample;
    config.seed = a.seed;
    config.dump_images = a.dump_images;
    config.formats = formats(&a.formats)?;
    eprintln!(
        "auditing with {} theme(s), {} job(s)",
        config.themes.len(),
        config.jobs
    );
    let summary = run_audit(&config)?;
    let r = &summary.report;
    eprintln!(
        "{} notebooks: {} valid, {} invalid, {} filtered by language, {} analysed",
        r.n_notebooks, r.n_valid, summary.n_invalid, r.n_language_filtered, r.n_analyzed
    );
    for e in &summary.write_errors {
        eprintln!("error: {e}");
    }
    if a.output.stdout {
        println!("{}", serde_json::to_string_pretty(r)?);
    }
    if !summary.write_errors.is_empty() {
        return Ok(1);
    }
    Ok(summary.exit_code() as u8)
}

pub fn export(a: ExportArgs) -> Result<u8> {
    let themes = themes(&a.themes)?;
    let notebooks = discover(&a.notebooks)?;
    create_out(&a.output.out)?;
    let entries = export_corpus(&notebooks, &themes, &a.output.out);
    let failed = entries.iter().filter(|e| e.error.is_some()).count();
    for e in entries.iter().filter(|e| e.error.is_some()) {
        eprintln!("{} ({}): {}", e.notebook.display(), e.theme, e.error.as_deref().unwrap_or_default());
    }
    let manifest = a.output.out.join("manifest.jsonl");
    write_manifest(&entries, &manifest).with_context(|| format!("writing {}", manifest.display()))?;
    if a.output.stdout {
        std::io::stdout().write_all(&jsonl(&entries)?)?;
    }
    eprintln!("exported {} document(s), {failed} failure(s)", entries.len() - failed);
    Ok(if failed > 0 { 2 } else { 0 })
}

pub fn scan(a: ScanArgs) -> Result<u8> {
    let theme = Theme::load(&a.theme)?;
    let rules = RuleSelection::parse(&a.rules)?;
    let mut findings = Vec::new();
    let mut failed = 0;
    for path in &a.html {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        match scan_bytes(&bytes, path, &theme, &rules) {
            Ok(result) => {
                eprintln!("{}: {} finding(s)", path.display(), result.findings.len());
                findings.extend(result.findings);
            }
            Err(e) => {
                eprintln!("error: {e}");
                failed += 1;
            }
        }
    }
    deliver(&a.output, "findings.jsonl", &jsonl(&findings)?)?;
    Ok(if failed > 0 { 2 } else { 0 })
}

#[derive(Serialize)]
struct AnalysisLine<'a> {
    path: &'a Path,
    #[serde(flatten)]
    code: &'a nbaudit_core::codeanalysis::NotebookCode,
}

pub fn analyze(a: AnalyzeArgs) -> Result<u8> {
    let paths = discover(&a.notebooks)?;
    let mut lines = Vec::new();
    let mut usage = UsageCounts::default();
    let mut failed = 0;
    for path in &paths {
        match Notebook::read(path) {
            Ok(nb) => {
                let code = analyze_notebook(&nb);
                usage.add_imports(&code.imports);
                usage.add_calls(&code.calls);
                lines.push((path.clone(), code));
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                failed += 1;
            }
        }
    }
    let records = jsonl(lines.iter().map(|(path, code)| AnalysisLine { path, code }))?;
    deliver(&a.output, "analysis.jsonl", &records)?;
    let ranks = serde_json::to_vec_pretty(&rank_usage(&usage))?;
    let path = a.output.out.join("ranks.json");
    std::fs::write(&path, ranks).with_context(|| format!("writing {}", path.display()))?;
    Ok(if failed > 0 { 2 } else { 0 })
}

pub fn alt(cmd: AltCommand) -> Result<u8> {
    match cmd {
        AltCommand::Embed { input, text, output } => {
            let png = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let embedded = embed_alt(&png, &text).with_context(|| input.display().to_string())?;
            for w in &embedded.warnings {
                eprintln!("warning: {w}");
            }
            std::fs::write(&output, &embedded.png).with_context(|| format!("writing {}", output.display()))?;
            Ok(0)
        }
        AltCommand::Show { input } => {
            let png = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            match extract_alt(&png).with_context(|| input.display().to_string())? {
                Some(text) => {
                    println!("{text}");
                    Ok(0)
                }
                None => {
                    eprintln!("{}: no alt text", input.display());
                    Ok(2)
                }
            }
        }
    }
}

fn read_records(path: &PathBuf) -> Result<Vec<NotebookRecord>> {
    let file = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), n + 1))?;
        out.push(record);
    }
    Ok(out)
}

pub fn report(a: ReportArgs) -> Result<u8> {
    let mut records = Vec::new();
    for path in &a.records {
        records.extend(read_records(path)?);
    }
    let report = aggregate(&records);
    create_out(&a.output.out)?;
    let mut failed = false;
    for r in emit(&report, &formats(&a.formats)?, &a.output.out) {
        match r {
            Ok(p) => eprintln!("wrote {}", p.display()),
            Err(e) => {
                eprintln!("error: {e}");
                failed = true;
            }
        }
    }
    if a.output.stdout {
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    if failed {
        bail!("some report files could not be written");
    }
    Ok(0)
}

pub fn synth(a: SynthArgs) -> Result<u8> {
    let paths = synth::write_corpus(&a.out, a.count, a.seed)
        .with_context(|| format!("writing corpus to {}", a.out.display()))?;
    eprintln!("wrote {} notebooks and {}", paths.len(), synth::LEDGER_FILE);
    Ok(0)
}
