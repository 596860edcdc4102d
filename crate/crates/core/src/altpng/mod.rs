//! Alt text stored inside PNG metadata.
//!
//! A description is written twice: as the EXIF ImageDescription tag
//! (0x010e) inside an `eXIf` chunk, and as a `Description` text chunk for
//! consumers that ignore EXIF. ASCII descriptions use `tEXt`; anything else
//! uses uncompressed `iTXt`, since `tEXt` is Latin-1 only.

mod chunks;
mod exif;

use serde::{Deserialize, Serialize};

pub use chunks::{Chunk, SIGNATURE};

pub const IMAGE_DESCRIPTION_TAG: u16 = 0x010E;
pub const TEXT_KEYWORD: &str = "Description";
/// Longest description still mirrored into a text chunk.
pub const TEXT_CHUNK_LIMIT: usize = u16::MAX as usize;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum AltPngError {
    #[error("not a PNG: {0}")]
    NotAPng(String),
    #[error("alt text description is empty")]
    EmptyDescription,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AltEncoding {
    ExifChunk,
    TextChunk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PngAltRecord {
    pub description: String,
    pub tag_id: u16,
    pub encoding: AltEncoding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedWarning {
    /// Too long for a text chunk; stored in `eXIf` only.
    DescriptionTooLong { bytes: usize },
    /// Text chunks cannot hold NUL bytes; stored in `eXIf` only.
    ContainsNul,
}

impl std::fmt::Display for EmbedWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EmbedWarning::DescriptionTooLong { bytes } => write!(
                f,
                "description is {bytes} bytes (> {TEXT_CHUNK_LIMIT}); stored in eXIf only"
            ),
            EmbedWarning::ContainsNul => {
                write!(f, "description contains NUL; stored in eXIf only")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Embedded {
    pub png: Vec<u8>,
    pub warnings: Vec<EmbedWarning>,
}

fn text_keyword(chunk: &Chunk) -> Option<&[u8]> {
    if !(chunk.is(b"tEXt") || chunk.is(b"iTXt") || chunk.is(b"zTXt")) {
        return None;
    }
    let nul = chunk.data.iter().position(|&b| b == 0)?;
    Some(&chunk.data[..nul])
}

fn is_alt_record(chunk: &Chunk) -> bool {
    chunk.is(b"eXIf") || text_keyword(chunk) == Some(TEXT_KEYWORD.as_bytes())
}

fn text_chunk(description: &str) -> Chunk {
    let mut data = TEXT_KEYWORD.as_bytes().to_vec();
    data.push(0);
    if description.is_ascii() {
        data.extend_from_slice(description.as_bytes());
        Chunk::new(b"tEXt", data)
    } else {
        // compression flag, compression method, empty language tag,
        // empty translated keyword
        data.extend_from_slice(&[0, 0, 0, 0]);
        data.extend_from_slice(description.as_bytes());
        Chunk::new(b"iTXt", data)
    }
}

/// Returns a copy of `png` carrying `description` as alt text. Any alt
/// records already present (an `eXIf` chunk or `Description` text chunks)
/// are replaced; image data chunks are copied untouched.
pub fn embed_alt(png: &[u8], description: &str) -> Result<Embedded, AltPngError> {
    if description.is_empty() {
        return Err(AltPngError::EmptyDescription);
    }
    let chunks = chunks::parse(png)?;
    let first_idat = chunks
        .iter()
        .position(|c| c.is(b"IDAT"))
        .ok_or_else(|| AltPngError::NotAPng("no IDAT chunk".into()))?;

    let mut warnings = Vec::new();
    let mut inserted = vec![Chunk::new(b"eXIf", exif::build(description))];
    if description.len() > TEXT_CHUNK_LIMIT {
        warnings.push(EmbedWarning::DescriptionTooLong { bytes: description.len() });
    } else if description.contains('\0') {
        warnings.push(EmbedWarning::ContainsNul);
    } else {
        inserted.push(text_chunk(description));
    }

    let mut out = Vec::with_capacity(chunks.len() + inserted.len());
    for (i, chunk) in chunks.into_iter().enumerate() {
        if i == first_idat {
            out.append(&mut inserted);
        }
        if !is_alt_record(&chunk) {
            out.push(chunk);
        }
    }
    Ok(Embedded {
        png: chunks::write(&out),
        warnings,
    })
}

fn text_value(chunk: &Chunk) -> Option<String> {
    let nul = chunk.data.iter().position(|&b| b == 0)?;
    let rest = &chunk.data[nul + 1..];
    if chunk.is(b"tEXt") {
        // Latin-1
        return Some(rest.iter().map(|&b| b as char).collect());
    }
    if chunk.is(b"iTXt") {
        let (&compressed, rest) = rest.split_first()?;
        if compressed != 0 {
            return None;
        }
        let rest = rest.get(1..)?;
        let lang_end = rest.iter().position(|&b| b == 0)?;
        let rest = &rest[lang_end + 1..];
        let tkey_end = rest.iter().position(|&b| b == 0)?;
        return Some(String::from_utf8_lossy(&rest[tkey_end + 1..]).into_owned());
    }
    None
}

/// All alt records found in the PNG, EXIF first.
pub fn read_records(png: &[u8]) -> Result<Vec<PngAltRecord>, AltPngError> {
    let chunks = chunks::parse(png)?;
    let mut exif_records = Vec::new();
    let mut text_records = Vec::new();
    for chunk in &chunks {
        if chunk.is(b"eXIf") {
            if let Some(description) = exif::read_description(&chunk.data) {
                exif_records.push(PngAltRecord {
                    description,
                    tag_id: IMAGE_DESCRIPTION_TAG,
                    encoding: AltEncoding::ExifChunk,
                });
            }
        } else if text_keyword(chunk) == Some(TEXT_KEYWORD.as_bytes()) {
            if let Some(description) = text_value(chunk) {
                text_records.push(PngAltRecord {
                    description,
                    tag_id: IMAGE_DESCRIPTION_TAG,
                    encoding: AltEncoding::TextChunk,
                });
            }
        }
    }
    exif_records.extend(text_records);
    Ok(exif_records)
}

/// The EXIF ImageDescription if present, else the `Description` text
/// chunk, else `None`.
pub fn extract_alt(png: &[u8]) -> Result<Option<String>, AltPngError> {
    Ok(read_records(png)?.into_iter().next().map(|r| r.description))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1×1 RGBA PNG.
    pub(crate) fn tiny_png() -> Vec<u8> {
        let ihdr = [0, 0, 0, 1, 0, 0, 0, 1, 8, 6, 0, 0, 0];
        // zlib stream of the single scanline [0, 255, 0, 0, 255]
        let idat = vec![
            0x78, 0x01, 0x01, 0x05, 0x00, 0xfa, 0xff, 0x00, 0xff, 0x00, 0x00, 0xff, 0x04, 0xfe,
            0x01, 0xfe,
        ];
        chunks::write(&[
            Chunk::new(b"IHDR", ihdr.to_vec()),
            Chunk::new(b"IDAT", idat),
            Chunk::new(b"IEND", vec![]),
        ])
    }

    #[test]
    fn roundtrip() {
        let out = embed_alt(&tiny_png(), "a red dot").unwrap();
        assert!(out.warnings.is_empty());
        assert_eq!(extract_alt(&out.png).unwrap().as_deref(), Some("a red dot"));
        let records = read_records(&out.png).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].encoding, AltEncoding::ExifChunk);
        assert_eq!(records[1].encoding, AltEncoding::TextChunk);
        assert!(records.iter().all(|r| r.tag_id == 270));
    }

    #[test]
    fn second_embed_replaces_first() {
        let once = embed_alt(&tiny_png(), "first").unwrap().png;
        let twice = embed_alt(&once, "second").unwrap().png;
        assert_eq!(extract_alt(&twice).unwrap().as_deref(), Some("second"));
        assert_eq!(read_records(&twice).unwrap().len(), 2);
    }

    #[test]
    fn plain_png_has_no_alt() {
        assert_eq!(extract_alt(&tiny_png()).unwrap(), None);
    }

    #[test]
    fn text_only_fallback() {
        let mut chunks = chunks::parse(&tiny_png()).unwrap();
        chunks.insert(1, text_chunk("from a text chunk"));
        let png = chunks::write(&chunks);
        assert_eq!(extract_alt(&png).unwrap().as_deref(), Some("from a text chunk"));
    }

    #[test]
    fn unicode_goes_to_itxt() {
        let out = embed_alt(&tiny_png(), "gráfico de barras ✓").unwrap().png;
        let chunks = chunks::parse(&out).unwrap();
        assert!(chunks.iter().any(|c| c.is(b"iTXt")));
        assert!(!chunks.iter().any(|c| c.is(b"tEXt")));
        let records = read_records(&out).unwrap();
        assert_eq!(records[1].description, "gráfico de barras ✓");
    }

    #[test]
    fn oversized_description_is_exif_only() {
        let long = "x".repeat(TEXT_CHUNK_LIMIT + 1);
        let out = embed_alt(&tiny_png(), &long).unwrap();
        assert_eq!(
            out.warnings,
            vec![EmbedWarning::DescriptionTooLong { bytes: TEXT_CHUNK_LIMIT + 1 }]
        );
        assert_eq!(read_records(&out.png).unwrap().len(), 1);
        assert_eq!(extract_alt(&out.png).unwrap().as_deref(), Some(long.as_str()));
    }

    #[test]
    fn nul_bytes_survive_through_exif() {
        let out = embed_alt(&tiny_png(), "a\0b\0").unwrap();
        assert_eq!(out.warnings, vec![EmbedWarning::ContainsNul]);
        assert_eq!(extract_alt(&out.png).unwrap().as_deref(), Some("a\0b\0"));
    }

    #[test]
    fn rejects_non_png_and_bad_crc() {
        assert!(matches!(extract_alt(b"GIF89a"), Err(AltPngError::NotAPng(_))));
        let mut png = tiny_png();
        let last = png.len() - 1;
        png[last] ^= 0xff;
        assert!(matches!(extract_alt(&png), Err(AltPngError::NotAPng(_))));
        assert!(matches!(embed_alt(&tiny_png(), ""), Err(AltPngError::EmptyDescription)));
    }

    #[test]
    fn records_sit_before_image_data() {
        let out = embed_alt(&tiny_png(), "desc").unwrap().png;
        let kinds: Vec<[u8; 4]> = chunks::parse(&out).unwrap().iter().map(|c| c.kind).collect();
        assert_eq!(kinds, vec![*b"IHDR", *b"eXIf", *b"tEXt", *b"IDAT", *b"IEND"]);
    }
}
