//! Minimal PNG chunk reader/writer.

use super::AltPngError;

pub const SIGNATURE: &[u8; 8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub kind: [u8; 4],
    pub data: Vec<u8>,
}

impl Chunk {
    pub fn new(kind: &[u8; 4], data: Vec<u8>) -> Self {
        Chunk { kind: *kind, data }
    }

    pub fn is(&self, kind: &[u8; 4]) -> bool {
        &self.kind == kind
    }

    fn crc(&self) -> u32 {
        let mut h = crc32fast::Hasher::new();
        h.update(&self.kind);
        h.update(&self.data);
        h.finalize()
    }
}

fn bad(msg: impl Into<String>) -> AltPngError {
    AltPngError::NotAPng(msg.into())
}

/// Splits a PNG into chunks, checking the signature, every CRC, and that
/// the stream starts with IHDR and ends with IEND.
pub fn parse(bytes: &[u8]) -> Result<Vec<Chunk>, AltPngError> {
    let mut rest = bytes
        .strip_prefix(SIGNATURE.as_slice())
        .ok_or_else(|| bad("missing PNG signature"))?;
    let mut chunks = Vec::new();
    while !rest.is_empty() {
        if rest.len() < 12 {
            return Err(bad("truncated chunk header"));
        }
        let len = u32::from_be_bytes(rest[0..4].try_into().unwrap()) as usize;
        if len > i32::MAX as usize || rest.len() < 12 + len {
            return Err(bad("chunk length exceeds file"));
        }
        let kind: [u8; 4] = rest[4..8].try_into().unwrap();
        if !kind.iter().all(u8::is_ascii_alphabetic) {
            return Err(bad("invalid chunk type"));
        }
        let chunk = Chunk::new(&kind, rest[8..8 + len].to_vec());
        let stored = u32::from_be_bytes(rest[8 + len..12 + len].try_into().unwrap());
        if stored != chunk.crc() {
            return Err(bad(format!(
                "CRC mismatch in {} chunk",
                String::from_utf8_lossy(&kind)
            )));
        }
        rest = &rest[12 + len..];
        let end = chunk.is(b"IEND");
        chunks.push(chunk);
        if end {
            break;
        }
    }
    match (chunks.first(), chunks.last()) {
        (Some(first), Some(last)) if first.is(b"IHDR") && last.is(b"IEND") => Ok(chunks),
        _ => Err(bad("chunk stream must start with IHDR and end with IEND")),
    }
}

pub fn write(chunks: &[Chunk]) -> Vec<u8> {
    let total: usize = chunks.iter().map(|c| c.data.len() + 12).sum();
    let mut out = Vec::with_capacity(SIGNATURE.len() + total);
    out.extend_from_slice(SIGNATURE);
    for c in chunks {
        out.extend_from_slice(&(c.data.len() as u32).to_be_bytes());
        out.extend_from_slice(&c.kind);
        out.extend_from_slice(&c.data);
        out.extend_from_slice(&c.crc().to_be_bytes());
    }
    out
}
