//! The notebook document model.
//!
//! Notebooks are read from nbformat v3 or v4 JSON and always coerced to the
//! v4 shape. Cell indices are 1-based everywhere.

mod images;
mod mime;
mod parse;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub use images::{extract_images, ImageArtifact, ImageFormat, Provenance};
pub use mime::{classify_mime, is_valid_mime, MimeCategory, MimeClass, MimeError};
pub use parse::parse_notebook;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ValidityError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("not a notebook: {0}")]
    NotANotebook(String),
    #[error("unsupported nbformat major version {0}")]
    UnsupportedVersion(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Code,
    Markdown,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    ExecuteResult,
    DisplayData,
    Stream,
    Error,
}

impl OutputKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputKind::ExecuteResult => "execute_result",
            OutputKind::DisplayData => "display_data",
            OutputKind::Stream => "stream",
            OutputKind::Error => "error",
        }
    }
}

/// One representation inside a MIME bundle. Binary payloads stay base64
/// text, exactly as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MimePayload {
    Text(String),
    Json(Value),
}

impl MimePayload {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            MimePayload::Text(s) => Some(s),
            MimePayload::Json(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub ename: String,
    pub evalue: String,
    pub traceback: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputBundle {
    pub output_kind: OutputKind,
    /// MIME type → payload. Empty for stream and error outputs.
    pub mime_payloads: BTreeMap<String, MimePayload>,
    pub metadata: Map<String, Value>,
    pub execution_count: Option<i64>,
    /// Stream name (`stdout`/`stderr`) for stream outputs.
    pub stream_name: Option<String>,
    /// Stream text for stream outputs.
    pub text: Option<String>,
    pub error: Option<ErrorInfo>,
}

impl OutputBundle {
    pub fn new(kind: OutputKind) -> Self {
        OutputBundle {
            output_kind: kind,
            mime_payloads: BTreeMap::new(),
            metadata: Map::new(),
            execution_count: None,
            stream_name: None,
            text: None,
            error: None,
        }
    }

    pub fn text_payload(&self, mime: &str) -> Option<&str> {
        self.mime_payloads.get(mime).and_then(MimePayload::as_text)
    }

    pub fn has_image(&self) -> bool {
        self.mime_payloads.keys().any(|m| m.starts_with("image/"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// 1-based position in the notebook.
    pub index: usize,
    pub kind: CellKind,
    pub source: String,
    pub outputs: Vec<OutputBundle>,
    pub execution_count: Option<i64>,
    pub metadata: Map<String, Value>,
    /// Attachment name → (MIME type → base64 payload).
    pub attachments: BTreeMap<String, BTreeMap<String, String>>,
}

impl Cell {
    pub fn new(index: usize, kind: CellKind, source: impl Into<String>) -> Self {
        Cell {
            index,
            kind,
            source: source.into(),
            outputs: Vec::new(),
            execution_count: None,
            metadata: Map::new(),
            attachments: BTreeMap::new(),
        }
    }

    pub fn is_code(&self) -> bool {
        self.kind == CellKind::Code
    }

    pub fn is_markdown(&self) -> bool {
        self.kind == CellKind::Markdown
    }

    pub fn has_image_output(&self) -> bool {
        self.is_code() && self.outputs.iter().any(OutputBundle::has_image)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notebook {
    pub path: PathBuf,
    pub format_version: (u64, u64),
    pub language: Option<String>,
    pub metadata: Map<String, Value>,
    pub cells: Vec<Cell>,
    pub raw_size_bytes: u64,
}

impl Notebook {
    pub fn new(path: impl Into<PathBuf>, cells: Vec<Cell>) -> Self {
        Notebook {
            path: path.into(),
            format_version: (4, 5),
            language: None,
            metadata: Map::new(),
            cells,
            raw_size_bytes: 0,
        }
    }

    pub fn stem(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "notebook".to_string())
    }

    pub fn cell(&self, index: usize) -> Option<&Cell> {
        index.checked_sub(1).and_then(|i| self.cells.get(i))
    }

    pub fn code_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_code())
    }

    pub fn output_count(&self) -> usize {
        self.cells.iter().map(|c| c.outputs.len()).sum()
    }

    /// Serialises the model as nbformat v4 JSON.
    pub fn to_v4_json(&self) -> Value {
        let cells: Vec<Value> = self.cells.iter().map(cell_to_json).collect();
        let mut root = Map::new();
        root.insert("cells".into(), Value::Array(cells));
        root.insert("metadata".into(), Value::Object(self.metadata.clone()));
        root.insert("nbformat".into(), Value::from(4));
        root.insert("nbformat_minor".into(), Value::from(self.format_version.1));
        Value::Object(root)
    }

    pub fn read(path: &Path) -> Result<Notebook, NotebookReadError> {
        let raw = std::fs::read(path)?;
        Ok(parse_notebook(&raw, path)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NotebookReadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Invalid(#[from] ValidityError),
}

/// True iff the notebook metadata declares `want` as its language.
/// Notebooks without language metadata never match.
pub fn filter_language(nb: &Notebook, want: &str) -> bool {
    nb.language
        .as_deref()
        .is_some_and(|l| l.trim().eq_ignore_ascii_case(want.trim()))
}

fn cell_to_json(cell: &Cell) -> Value {
    let mut obj = Map::new();
    let kind = match cell.kind {
        CellKind::Code => "code",
        CellKind::Markdown => "markdown",
        CellKind::Raw => "raw",
    };
    obj.insert("cell_type".into(), Value::from(kind));
    obj.insert("metadata".into(), Value::Object(cell.metadata.clone()));
    obj.insert("source".into(), Value::from(cell.source.clone()));
    if !cell.attachments.is_empty() {
        obj.insert(
            "attachments".into(),
            serde_json::to_value(&cell.attachments).unwrap_or(Value::Null),
        );
    }
    if cell.kind == CellKind::Code {
        obj.insert(
            "execution_count".into(),
            cell.execution_count.map(Value::from).unwrap_or(Value::Null),
        );
        obj.insert(
            "outputs".into(),
            Value::Array(cell.outputs.iter().map(output_to_json).collect()),
        );
    }
    Value::Object(obj)
}

fn output_to_json(out: &OutputBundle) -> Value {
    let mut obj = Map::new();
    obj.insert("output_type".into(), Value::from(out.output_kind.as_str()));
    match out.output_kind {
        OutputKind::Stream => {
            obj.insert(
                "name".into(),
                Value::from(out.stream_name.clone().unwrap_or_else(|| "stdout".into())),
            );
            obj.insert("text".into(), Value::from(out.text.clone().unwrap_or_default()));
        }
        OutputKind::Error => {
            let err = out.error.clone().unwrap_or(ErrorInfo {
                ename: String::new(),
                evalue: String::new(),
                traceback: Vec::new(),
            });
            obj.insert("ename".into(), Value::from(err.ename));
            obj.insert("evalue".into(), Value::from(err.evalue));
            obj.insert("traceback".into(), Value::from(err.traceback));
        }
        OutputKind::ExecuteResult | OutputKind::DisplayData => {
            let data: Map<String, Value> = out
                .mime_payloads
                .iter()
                .map(|(k, v)| {
                    let v = match v {
                        MimePayload::Text(s) => Value::from(s.clone()),
                        MimePayload::Json(j) => j.clone(),
                    };
                    (k.clone(), v)
                })
                .collect();
            obj.insert("data".into(), Value::Object(data));
            obj.insert("metadata".into(), Value::Object(out.metadata.clone()));
            if out.output_kind == OutputKind::ExecuteResult {
                obj.insert(
                    "execution_count".into(),
                    out.execution_count.map(Value::from).unwrap_or(Value::Null),
                );
            }
        }
    }
    Value::Object(obj)
}
