use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use super::{export_html, Theme};
use crate::nbmodel::Notebook;

pub fn sha1_hex(bytes: &[u8]) -> String {
    Sha1::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One line of the export manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub notebook: PathBuf,
    pub theme: String,
    pub output: Option<PathBuf>,
    pub bytes: Option<u64>,
    pub sha1: Option<String>,
    pub error: Option<String>,
}

/// File stems for `paths`, made unique by suffixing `-2`, `-3`, … in
/// input order.
fn unique_stems(paths: &[PathBuf]) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    paths
        .iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "notebook".into());
            let n = seen.entry(stem.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                stem
            } else {
                format!("{stem}-{n}")
            }
        })
        .collect()
}

fn export_one(path: &Path, stem: &str, themes: &[Theme], out_dir: &Path) -> Vec<ManifestEntry> {
    let entry = |theme: &Theme| ManifestEntry {
        notebook: path.to_path_buf(),
        theme: theme.name.clone(),
        output: None,
        bytes: None,
        sha1: None,
        error: None,
    };
    let nb = match Notebook::read(path) {
        Ok(nb) => nb,
        Err(e) => {
            return themes
                .iter()
                .map(|t| ManifestEntry { error: Some(e.to_string()), ..entry(t) })
                .collect()
        }
    };
    themes
        .iter()
        .map(|theme| {
            let doc = export_html(&nb, theme);
            let dir = out_dir.join(&theme.name);
            let file = dir.join(format!("{stem}.html"));
            let written = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&file, doc.as_bytes()));
            match written {
                Ok(()) => ManifestEntry {
                    output: Some(file),
                    bytes: Some(doc.html.len() as u64),
                    sha1: Some(sha1_hex(doc.as_bytes())),
                    ..entry(theme)
                },
                Err(e) => ManifestEntry { error: Some(e.to_string()), ..entry(theme) },
            }
        })
        .collect()
}

/// Writes `<out_dir>/<theme>/<stem>.html` for every notebook and theme.
/// Entries come back in input order, themes in the order given; files
/// that cannot be read or written are reported, not fatal.
pub fn export_corpus(notebooks: &[PathBuf], themes: &[Theme], out_dir: &Path) -> Vec<ManifestEntry> {
    let stems = unique_stems(notebooks);
    notebooks
        .par_iter()
        .zip(stems.par_iter())
        .map(|(path, stem)| export_one(path, stem, themes, out_dir))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// JSON lines, one entry per line.
pub fn write_manifest(entries: &[ManifestEntry], path: &Path) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for e in entries {
        serde_json::to_writer(&mut f, e)?;
        f.write_all(b"\n")?;
    }
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha1_of_abc() {
        assert_eq!(sha1_hex(b"abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
    }

    #[test]
    fn stems_are_deduplicated() {
        let paths = vec![PathBuf::from("a/x.ipynb"), PathBuf::from("b/x.ipynb"), PathBuf::from("y.ipynb")];
        assert_eq!(unique_stems(&paths), vec!["x", "x-2", "y"]);
    }

    #[test]
    fn unreadable_file_is_an_entry() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.ipynb");
        std::fs::write(&good, r##"{"cells":[{"cell_type":"markdown","source":"# A","metadata":{}}],"metadata":{},"nbformat":4,"nbformat_minor":5}"##).unwrap();
        let bad = dir.path().join("bad.ipynb");
        std::fs::write(&bad, "{").unwrap();
        let out = dir.path().join("out");
        let themes = vec![Theme::builtin("light").unwrap(), Theme::builtin("dark").unwrap()];
        let entries = export_corpus(&[good, bad], &themes, &out);
        assert_eq!(entries.len(), 4);
        assert_eq!(entries.iter().filter(|e| e.error.is_some()).count(), 2);
        assert!(out.join("light/good.html").exists());
        assert!(out.join("dark/good.html").exists());
    }
}
