//! JSON → [`Notebook`] with v3 → v4 coercion.
//!
//! Validity is shape conformance: a JSON object carrying a cell list (v4) or
//! worksheets (v3) whose cells and outputs have the types the format allows.
//!
//! v3 coercion table:
//!
//! | v3                               | v4                                   |
//! |----------------------------------|--------------------------------------|
//! | `worksheets[*].cells`            | `cells` (concatenated in order)      |
//! | code cell `input` (or `text`)    | `source`                             |
//! | code cell `prompt_number`        | `execution_count`                    |
//! | `heading` cell with `level`      | markdown cell `"#" * level + " " + source` |
//! | output `pyout`                   | `execute_result`                     |
//! | output `pyerr`                   | `error`                              |
//! | stream output `stream` key       | `name`                               |
//! | flat mime keys (`png`, `html`, …) | `data` bundle with full MIME types  |
//! | `metadata.language`              | language (when no kernelspec)        |

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};

use super::mime::is_valid_mime;
use super::{Cell, CellKind, ErrorInfo, MimePayload, Notebook, OutputBundle, OutputKind, ValidityError};

/// Parses and validates a notebook, coercing v3 documents to v4.
pub fn parse_notebook(raw: &[u8], path: &Path) -> Result<Notebook, ValidityError> {
    let root: Value =
        serde_json::from_slice(raw).map_err(|e| ValidityError::MalformedJson(e.to_string()))?;
    let Value::Object(root) = root else {
        return Err(not_nb("top-level JSON value is not an object"));
    };

    let major = match root.get("nbformat") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| not_nb("`nbformat` is not a non-negative integer"))?,
        None if root.contains_key("cells") => 4,
        None if root.contains_key("worksheets") => 3,
        None => return Err(not_nb("no `cells` or `worksheets` structure")),
    };
    let minor = root.get("nbformat_minor").and_then(Value::as_u64).unwrap_or(0);
    if !(3..=4).contains(&major) {
        return Err(ValidityError::UnsupportedVersion(major));
    }

    let metadata = match root.get("metadata") {
        Some(Value::Object(m)) => m.clone(),
        Some(Value::Null) | None => Map::new(),
        Some(_) => return Err(not_nb("`metadata` is not an object")),
    };

    let (cells, minor) = if major == 4 {
        let cells = root
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| not_nb("v4 notebook without a `cells` array"))?;
        let cells = cells
            .iter()
            .enumerate()
            .map(|(i, c)| parse_v4_cell(c, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        (cells, minor)
    } else {
        (parse_v3_cells(&root)?, 0)
    };

    let language = language_from_metadata(&metadata);
    Ok(Notebook {
        path: path.to_path_buf(),
        format_version: (4, minor),
        language,
        metadata,
        cells,
        raw_size_bytes: raw.len() as u64,
    })
}

fn not_nb(msg: impl Into<String>) -> ValidityError {
    ValidityError::NotANotebook(msg.into())
}

fn language_from_metadata(meta: &Map<String, Value>) -> Option<String> {
    fn pick(v: Option<&Value>) -> Option<&str> {
        v.and_then(Value::as_str).filter(|s| !s.trim().is_empty())
    }
    pick(meta.get("kernelspec").and_then(|k| k.get("language")))
        .or_else(|| pick(meta.get("language_info").and_then(|k| k.get("name"))))
        .or_else(|| pick(meta.get("language")))
        .map(str::to_string)
}

/// nbformat allows multiline strings either as a string or a list of lines.
fn multiline(v: Option<&Value>, what: &str) -> Result<String, ValidityError> {
    match v {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Array(parts)) => parts
            .iter()
            .map(|p| {
                p.as_str()
                    .ok_or_else(|| not_nb(format!("{what} contains a non-string line")))
            })
            .collect(),
        Some(_) => Err(not_nb(format!("{what} is neither a string nor a list of strings"))),
    }
}

fn object_field(obj: &Map<String, Value>, key: &str) -> Result<Map<String, Value>, ValidityError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(Map::new()),
        Some(Value::Object(m)) => Ok(m.clone()),
        Some(_) => Err(not_nb(format!("`{key}` is not an object"))),
    }
}

fn parse_v4_cell(v: &Value, index: usize) -> Result<Cell, ValidityError> {
    let obj = v
        .as_object()
        .ok_or_else(|| not_nb(format!("cell {index} is not an object")))?;
    let kind = match obj.get("cell_type").and_then(Value::as_str) {
        Some("code") => CellKind::Code,
        Some("markdown") => CellKind::Markdown,
        Some("raw") => CellKind::Raw,
        Some(other) => return Err(not_nb(format!("cell {index} has unknown type `{other}`"))),
        None => return Err(not_nb(format!("cell {index} has no `cell_type`"))),
    };
    let source = multiline(obj.get("source"), "cell source")?;
    let mut cell = Cell::new(index, kind, source);
    cell.metadata = object_field(obj, "metadata")?;
    cell.attachments = parse_attachments(obj.get("attachments"))?;

    let outputs: &[Value] = match obj.get("outputs") {
        None | Some(Value::Null) => &[],
        Some(Value::Array(outs)) => outs,
        Some(_) => return Err(not_nb(format!("cell {index} `outputs` is not a list"))),
    };
    if kind != CellKind::Code {
        if !outputs.is_empty() {
            return Err(not_nb(format!("non-code cell {index} carries outputs")));
        }
        return Ok(cell);
    }
    cell.execution_count = obj.get("execution_count").and_then(Value::as_i64);
    cell.outputs = outputs
        .iter()
        .map(|o| parse_v4_output(o, index))
        .collect::<Result<_, _>>()?;
    Ok(cell)
}

fn parse_attachments(
    v: Option<&Value>,
) -> Result<BTreeMap<String, BTreeMap<String, String>>, ValidityError> {
    let mut out = BTreeMap::new();
    let Some(Value::Object(map)) = v else {
        return Ok(out);
    };
    for (name, bundle) in map {
        let bundle = bundle
            .as_object()
            .ok_or_else(|| not_nb(format!("attachment `{name}` is not a MIME bundle")))?;
        let mut entries = BTreeMap::new();
        for (mime, payload) in bundle {
            entries.insert(mime.clone(), multiline(Some(payload), "attachment payload")?);
        }
        out.insert(name.clone(), entries);
    }
    Ok(out)
}

fn parse_bundle(
    data: Option<&Value>,
    cell_index: usize,
) -> Result<BTreeMap<String, MimePayload>, ValidityError> {
    let mut bundle = BTreeMap::new();
    let Some(data) = data else {
        return Ok(bundle);
    };
    let data = data
        .as_object()
        .ok_or_else(|| not_nb(format!("cell {cell_index}: output `data` is not an object")))?;
    for (mime, payload) in data {
        if !is_valid_mime(mime) {
            return Err(not_nb(format!("cell {cell_index}: invalid MIME type `{mime}`")));
        }
        bundle.insert(mime.clone(), payload_from(payload));
    }
    Ok(bundle)
}

fn payload_from(v: &Value) -> MimePayload {
    match v {
        Value::String(s) => MimePayload::Text(s.clone()),
        Value::Array(parts) if parts.iter().all(Value::is_string) => {
            MimePayload::Text(parts.iter().filter_map(Value::as_str).collect())
        }
        other => MimePayload::Json(other.clone()),
    }
}

fn parse_v4_output(v: &Value, cell_index: usize) -> Result<OutputBundle, ValidityError> {
    let obj = v
        .as_object()
        .ok_or_else(|| not_nb(format!("cell {cell_index}: output is not an object")))?;
    let kind = match obj.get("output_type").and_then(Value::as_str) {
        Some("execute_result") => OutputKind::ExecuteResult,
        Some("display_data") => OutputKind::DisplayData,
        Some("stream") => OutputKind::Stream,
        Some("error") => OutputKind::Error,
        Some(other) => {
            return Err(not_nb(format!("cell {cell_index}: unknown output type `{other}`")))
        }
        None => return Err(not_nb(format!("cell {cell_index}: output without `output_type`"))),
    };
    let mut out = OutputBundle::new(kind);
    match kind {
        OutputKind::Stream => {
            out.stream_name = Some(
                obj.get("name")
                    .and_then(Value::as_str)
                    .unwrap_or("stdout")
                    .to_string(),
            );
            out.text = Some(multiline(obj.get("text"), "stream text")?);
        }
        OutputKind::Error => out.error = Some(parse_error_info(obj)?),
        OutputKind::ExecuteResult | OutputKind::DisplayData => {
            out.mime_payloads = parse_bundle(obj.get("data"), cell_index)?;
            out.metadata = object_field(obj, "metadata")?;
            if kind == OutputKind::ExecuteResult {
                out.execution_count = obj.get("execution_count").and_then(Value::as_i64);
            }
        }
    }
    Ok(out)
}

fn parse_error_info(obj: &Map<String, Value>) -> Result<ErrorInfo, ValidityError> {
    let traceback = match obj.get("traceback") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(lines)) => lines
            .iter()
            .map(|l| l.as_str().map(str::to_string).unwrap_or_default())
            .collect(),
        Some(_) => return Err(not_nb("error traceback is not a list")),
    };
    Ok(ErrorInfo {
        ename: obj.get("ename").and_then(Value::as_str).unwrap_or_default().to_string(),
        evalue: obj.get("evalue").and_then(Value::as_str).unwrap_or_default().to_string(),
        traceback,
    })
}

// ---- v3 ----

const V3_MIME_KEYS: &[(&str, &str)] = &[
    ("text", "text/plain"),
    ("html", "text/html"),
    ("markdown", "text/markdown"),
    ("latex", "text/latex"),
    ("png", "image/png"),
    ("jpeg", "image/jpeg"),
    ("svg", "image/svg+xml"),
    ("javascript", "application/javascript"),
    ("json", "application/json"),
    ("pdf", "application/pdf"),
];

fn parse_v3_cells(root: &Map<String, Value>) -> Result<Vec<Cell>, ValidityError> {
    let worksheets = root
        .get("worksheets")
        .and_then(Value::as_array)
        .ok_or_else(|| not_nb("v3 notebook without a `worksheets` list"))?;
    let mut cells = Vec::new();
    for ws in worksheets {
        let ws_cells = match ws.get("cells") {
            Some(Value::Array(c)) => c,
            None => continue,
            Some(_) => return Err(not_nb("worksheet `cells` is not a list")),
        };
        for c in ws_cells {
            let index = cells.len() + 1;
            cells.push(parse_v3_cell(c, index)?);
        }
    }
    Ok(cells)
}

fn parse_v3_cell(v: &Value, index: usize) -> Result<Cell, ValidityError> {
    let obj = v
        .as_object()
        .ok_or_else(|| not_nb(format!("cell {index} is not an object")))?;
    let cell_type = obj
        .get("cell_type")
        .and_then(Value::as_str)
        .ok_or_else(|| not_nb(format!("cell {index} has no `cell_type`")))?;
    let metadata = object_field(obj, "metadata")?;
    let mut cell = match cell_type {
        "code" => {
            let src = obj.get("input").or_else(|| obj.get("source")).or_else(|| obj.get("text"));
            let mut cell = Cell::new(index, CellKind::Code, multiline(src, "cell input")?);
            cell.execution_count = obj.get("prompt_number").and_then(Value::as_i64);
            if let Some(outs) = obj.get("outputs") {
                let outs = outs
                    .as_array()
                    .ok_or_else(|| not_nb(format!("cell {index} `outputs` is not a list")))?;
                cell.outputs = outs
                    .iter()
                    .map(|o| parse_v3_output(o, index))
                    .collect::<Result<_, _>>()?;
            }
            cell
        }
        "markdown" | "html" => Cell::new(
            index,
            CellKind::Markdown,
            multiline(obj.get("source"), "cell source")?,
        ),
        "raw" => Cell::new(index, CellKind::Raw, multiline(obj.get("source"), "cell source")?),
        "heading" => {
            let level = obj.get("level").and_then(Value::as_u64).unwrap_or(1).clamp(1, 6);
            let text = multiline(obj.get("source"), "cell source")?;
            let hashes = "#".repeat(level as usize);
            Cell::new(index, CellKind::Markdown, format!("{hashes} {text}"))
        }
        other => return Err(not_nb(format!("cell {index} has unknown type `{other}`"))),
    };
    cell.metadata = metadata;
    Ok(cell)
}

fn parse_v3_output(v: &Value, cell_index: usize) -> Result<OutputBundle, ValidityError> {
    let obj = v
        .as_object()
        .ok_or_else(|| not_nb(format!("cell {cell_index}: output is not an object")))?;
    let kind = match obj.get("output_type").and_then(Value::as_str) {
        Some("pyout") | Some("execute_result") => OutputKind::ExecuteResult,
        Some("display_data") => OutputKind::DisplayData,
        Some("stream") => OutputKind::Stream,
        Some("pyerr") | Some("error") => OutputKind::Error,
        Some(other) => {
            return Err(not_nb(format!("cell {cell_index}: unknown output type `{other}`")))
        }
        None => return Err(not_nb(format!("cell {cell_index}: output without `output_type`"))),
    };
    let mut out = OutputBundle::new(kind);
    match kind {
        OutputKind::Stream => {
            let name = obj
                .get("stream")
                .or_else(|| obj.get("name"))
                .and_then(Value::as_str)
                .unwrap_or("stdout");
            out.stream_name = Some(name.to_string());
            out.text = Some(multiline(obj.get("text"), "stream text")?);
        }
        OutputKind::Error => out.error = Some(parse_error_info(obj)?),
        OutputKind::ExecuteResult | OutputKind::DisplayData => {
            for (short, mime) in V3_MIME_KEYS {
                if let Some(p) = obj.get(*short) {
                    out.mime_payloads.insert(mime.to_string(), payload_from(p));
                }
            }
            for (key, p) in obj {
                if key.contains('/') && is_valid_mime(key) {
                    out.mime_payloads.insert(key.clone(), payload_from(p));
                }
            }
            out.metadata = object_field(obj, "metadata")?;
            if kind == OutputKind::ExecuteResult {
                out.execution_count = obj.get("prompt_number").and_then(Value::as_i64);
            }
        }
    }
    Ok(out)
}
