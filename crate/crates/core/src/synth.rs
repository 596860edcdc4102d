//! Seeded generator of synthetic notebooks with a ledger of what each one
//! was built to contain. The ledger is computed from the generation plan,
//! never by reading the notebooks back, so it can serve as an oracle for
//! the metrics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use base64::Engine as _;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::altpng;

const WORDS: &[&str] = &[
    "axis", "bar", "blue", "chart", "count", "curve", "data", "density", "error", "figure", "growth", "histogram",
    "line", "loss", "mean", "model", "plot", "price", "rate", "sales", "scatter", "series", "trend", "value",
    "weekly", "yearly",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum AltSource {
    None,
    Metadata(String),
    Exif(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Planned {
    Heading { level: u8, text: String },
    Prose { text: String, link: bool },
    MarkdownTable { rows: usize, cols: usize },
    MarkdownImage { alt: String },
    Code,
    CodeImage { alt: AltSource },
    CodeTable { data_rows: usize, data_cols: usize },
    CodeMagic,
}

impl Planned {
    fn is_markdown(&self) -> bool {
        matches!(
            self,
            Planned::Heading { .. } | Planned::Prose { .. } | Planned::MarkdownTable { .. } | Planned::MarkdownImage { .. }
        )
    }

    fn table_shape(&self) -> Option<(usize, usize)> {
        match self {
            Planned::MarkdownTable { rows, cols } => Some((*rows, *cols)),
            // Header row plus data rows; index column plus data columns.
            Planned::CodeTable { data_rows, data_cols } => Some((data_rows + 1, data_cols + 1)),
            _ => None,
        }
    }

    fn alt(&self) -> Option<Option<&str>> {
        match self {
            Planned::MarkdownImage { alt } => Some(Some(alt.as_str())),
            Planned::CodeImage { alt: AltSource::None } => Some(None),
            Planned::CodeImage { alt: AltSource::Metadata(a) | AltSource::Exif(a) } => Some(Some(a.as_str())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureTruth {
    pub cell_index: usize,
    pub candidate: bool,
    pub has_markdown_neighbor: bool,
    pub has_table_neighbor: bool,
    pub fully_supported: bool,
    pub markdown_neighbor_image_only: bool,
}

/// What one synthetic notebook was built to contain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub file: String,
    pub n_cells: usize,
    pub n_code_cells: usize,
    pub n_markdown_cells: usize,
    pub n_images: usize,
    pub n_images_with_alt: usize,
    pub n_programmatic_images: usize,
    /// Alt strings of all images in cell order; `None` when absent.
    pub alt_texts: Vec<Option<String>>,
    pub alt_words: BTreeMap<String, u64>,
    /// (level, 1-based cell index).
    pub first_heading: Option<(u8, usize)>,
    pub heading_census: BTreeMap<u8, u64>,
    pub n_tables: usize,
    pub table_shapes: Vec<(usize, usize)>,
    pub first_table_cell: Option<usize>,
    pub figure_context: Vec<FigureTruth>,
    pub text_bearing: bool,
}

fn words(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> String {
    let n = rng.random_range(lo..=hi);
    (0..n).map(|_| *WORDS.choose(rng).expect("non-empty")).collect::<Vec<_>>().join(" ")
}

fn plan_cell(rng: &mut ChaCha8Rng) -> Planned {
    match rng.random_range(0..100) {
        0..=14 => Planned::Heading { level: rng.random_range(1..=6), text: words(rng, 1, 4) },
        15..=34 => Planned::Prose { text: words(rng, 3, 12), link: rng.random_bool(0.3) },
        35..=42 => Planned::MarkdownTable { rows: rng.random_range(2..=6), cols: rng.random_range(1..=5) },
        43..=49 => Planned::MarkdownImage {
            alt: if rng.random_bool(0.5) { words(rng, 1, 4) } else { String::new() },
        },
        50..=64 => Planned::Code,
        65..=79 => Planned::CodeImage {
            alt: match rng.random_range(0..4) {
                0 => AltSource::Metadata(words(rng, 1, 5)),
                1 => AltSource::Exif(words(rng, 1, 5)),
                _ => AltSource::None,
            },
        },
        80..=91 => Planned::CodeTable { data_rows: rng.random_range(1..=8), data_cols: rng.random_range(1..=5) },
        _ => Planned::CodeMagic,
    }
}

fn png(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let (w, h) = (rng.random_range(1..=6u32), rng.random_range(1..=6u32));
    let pixels: Vec<u8> = (0..w * h * 3).map(|_| rng.random()).collect();
    let mut buf = Vec::new();
    let mut enc = png::Encoder::new(&mut buf, w, h);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().expect("in-memory PNG header");
    writer.write_image_data(&pixels).expect("in-memory PNG data");
    writer.finish().expect("in-memory PNG");
    buf
}

fn b64(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn markdown(source: String) -> Value {
    json!({"cell_type": "markdown", "metadata": {}, "source": source})
}

fn code(source: &str, n: usize, outputs: Vec<Value>) -> Value {
    json!({"cell_type": "code", "metadata": {}, "execution_count": n, "source": source, "outputs": outputs})
}

fn cell_json(p: &Planned, idx: usize, rng: &mut ChaCha8Rng) -> Value {
    match p {
        Planned::Heading { level, text } => markdown(format!("{} {text}", "#".repeat(*level as usize))),
        Planned::Prose { text, link } => {
            let tail = if *link { " See [the docs](https://example.org/docs) for more." } else { "" };
            markdown(format!("{text}.{tail}"))
        }
        Planned::MarkdownTable { rows, cols } => {
            let mut s = String::new();
            let header: Vec<String> = (0..*cols).map(|c| format!("col{c}")).collect();
            s.push_str(&format!("| {} |\n", header.join(" | ")));
            s.push_str(&format!("|{}\n", "---|".repeat(*cols)));
            for r in 1..*rows {
                let vals: Vec<String> = (0..*cols).map(|c| format!("{}", r * 10 + c)).collect();
                s.push_str(&format!("| {} |\n", vals.join(" | ")));
            }
            markdown(s)
        }
        Planned::MarkdownImage { alt } => {
            let name = format!("figure{idx}.png");
            let mut cell = markdown(format!("![{alt}](attachment:{name})"));
            cell["attachments"] = json!({ name: {"image/png": b64(&png(rng))} });
            cell
        }
        Planned::Code => {
            let src = "import numpy as np\nx = np.linspace(0, 1, 5)\nprint(len(x))";
            let out = json!({"output_type": "stream", "name": "stdout", "text": "5\n"});
            code(src, idx, vec![out])
        }
        Planned::CodeImage { alt } => {
            let mut bytes = png(rng);
            let mut metadata = json!({});
            match alt {
                AltSource::None => {}
                AltSource::Metadata(a) => metadata = json!({"image/png": {"alt": a}}),
                AltSource::Exif(a) => bytes = altpng::embed_alt(&bytes, a).expect("fresh PNG").png,
            }
            let out = json!({
                "output_type": "display_data",
                "metadata": metadata,
                "data": {"image/png": b64(&bytes), "text/plain": "<Figure size 640x480 with 1 Axes>"}
            });
            code("import matplotlib.pyplot as plt\nplt.plot([1, 2, 3])\nplt.show()", idx, vec![out])
        }
        Planned::CodeTable { data_rows, data_cols } => {
            let mut html = String::from("<table border=\"1\" class=\"dataframe\">\n<thead>\n<tr style=\"text-align: right;\">\n<th></th>");
            for c in 0..*data_cols {
                html.push_str(&format!("<th>c{c}</th>"));
            }
            html.push_str("</tr>\n</thead>\n<tbody>\n");
            for r in 0..*data_rows {
                html.push_str(&format!("<tr>\n<th>{r}</th>"));
                for c in 0..*data_cols {
                    html.push_str(&format!("<td>{}</td>", r * c));
                }
                html.push_str("</tr>\n");
            }
            html.push_str("</tbody>\n</table>");
            let out = json!({
                "output_type": "execute_result",
                "execution_count": idx,
                "metadata": {},
                "data": {"text/html": html, "text/plain": "DataFrame"}
            });
            code("import pandas as pd\ndf = pd.DataFrame()\ndf.head()", idx, vec![out])
        }
        Planned::CodeMagic => {
            let src = "%matplotlib inline\n%%capture\n!pip install seaborn\nimport seaborn as sns\nr = 7 % 3\nsns.set_theme()\nlen?";
            code(src, idx, vec![json!({"output_type": "stream", "name": "stdout", "text": "ok\n"})])
        }
    }
}

fn truth(file: String, plan: &[Planned]) -> LedgerEntry {
    let mut e = LedgerEntry {
        file,
        n_cells: plan.len(),
        n_code_cells: plan.iter().filter(|p| !p.is_markdown()).count(),
        n_markdown_cells: plan.iter().filter(|p| p.is_markdown()).count(),
        n_images: 0,
        n_images_with_alt: 0,
        n_programmatic_images: plan.iter().filter(|p| matches!(p, Planned::CodeImage { .. })).count(),
        alt_texts: Vec::new(),
        alt_words: BTreeMap::new(),
        first_heading: None,
        heading_census: BTreeMap::new(),
        n_tables: 0,
        table_shapes: Vec::new(),
        first_table_cell: None,
        figure_context: Vec::new(),
        // Every cell renders some visible text; image-only cells are the
        // exception.
        text_bearing: plan.iter().any(|p| !matches!(p, Planned::MarkdownImage { .. })),
    };
    for (i, p) in plan.iter().enumerate() {
        let cell = i + 1;
        if let Planned::Heading { level, .. } = p {
            e.first_heading.get_or_insert((*level, cell));
            *e.heading_census.entry(*level).or_insert(0) += 1;
        }
        if let Some(shape) = p.table_shape() {
            e.table_shapes.push(shape);
            e.first_table_cell.get_or_insert(cell);
        }
        if let Some(alt) = p.alt() {
            e.n_images += 1;
            if let Some(a) = alt.filter(|a| !a.trim().is_empty()) {
                e.n_images_with_alt += 1;
                for w in a.split_whitespace() {
                    *e.alt_words.entry(w.to_string()).or_insert(0) += 1;
                }
            }
            e.alt_texts.push(alt.map(str::to_string));
        }
        if matches!(p, Planned::CodeImage { .. }) {
            let prev = i.checked_sub(1).map(|j| &plan[j]);
            let next = plan.get(i + 1);
            let neighbours = [prev, next];
            let candidate = !matches!(next, Some(Planned::Heading { .. }));
            let md = neighbours.iter().flatten().any(|n| n.is_markdown());
            let table = neighbours.iter().flatten().any(|n| n.table_shape().is_some());
            e.figure_context.push(FigureTruth {
                cell_index: cell,
                candidate,
                has_markdown_neighbor: md,
                has_table_neighbor: table,
                fully_supported: candidate && md && table,
                markdown_neighbor_image_only: neighbours.iter().flatten().any(|n| matches!(n, Planned::MarkdownImage { .. })),
            });
        }
    }
    e.n_tables = e.table_shapes.len();
    e
}

pub struct SynthNotebook {
    pub file: String,
    pub json: Value,
    pub truth: LedgerEntry,
}

/// `n` notebooks from `seed`. The same arguments give the same bytes.
pub fn generate(n: usize, seed: u64) -> Vec<SynthNotebook> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let len = rng.random_range(3..=14);
            let plan: Vec<Planned> = (0..len).map(|_| plan_cell(&mut rng)).collect();
            let cells: Vec<Value> = plan.iter().enumerate().map(|(i, p)| cell_json(p, i + 1, &mut rng)).collect();
            let file = format!("synth_{k:03}.ipynb");
            let json = json!({
                "cells": cells,
                "metadata": {
                    "kernelspec": {"display_name": "Python 3", "language": "python", "name": "python3"},
                    "language_info": {"name": "python"}
                },
                "nbformat": 4,
                "nbformat_minor": 5
            });
            SynthNotebook { truth: truth(file.clone(), &plan), file, json }
        })
        .collect()
}

pub const LEDGER_FILE: &str = "ledger.json";

/// Writes the notebooks and `ledger.json` into `dir`.
pub fn write_corpus(dir: &Path, n: usize, seed: u64) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let notebooks = generate(n, seed);
    let mut paths = Vec::with_capacity(n);
    for nb in &notebooks {
        let path = dir.join(&nb.file);
        std::fs::write(&path, serde_json::to_string_pretty(&nb.json)?)?;
        paths.push(path);
    }
    let ledger: Vec<&LedgerEntry> = notebooks.iter().map(|n| &n.truth).collect();
    std::fs::write(dir.join(LEDGER_FILE), serde_json::to_string_pretty(&ledger)?)?;
    Ok(paths)
}

pub fn read_ledger(dir: &Path) -> std::io::Result<Vec<LedgerEntry>> {
    let text = std::fs::read_to_string(dir.join(LEDGER_FILE))?;
    Ok(serde_json::from_str(&text)?)
}
