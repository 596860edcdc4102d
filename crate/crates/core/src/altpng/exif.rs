//! TIFF/EXIF payload holding a single ImageDescription entry.

use super::IMAGE_DESCRIPTION_TAG;

const TYPE_ASCII: u16 = 2;
const TYPE_UNDEFINED: u16 = 7;
const TYPE_UTF8: u16 = 129;

/// Big-endian TIFF header, one IFD, one ImageDescription entry. The value
/// is the UTF-8 description plus the NUL terminator the ASCII type needs.
pub fn build(description: &str) -> Vec<u8> {
    let mut value = description.as_bytes().to_vec();
    value.push(0);
    let count = value.len() as u32;

    let mut out = Vec::with_capacity(26 + value.len());
    out.extend_from_slice(b"MM");
    out.extend_from_slice(&42u16.to_be_bytes());
    out.extend_from_slice(&8u32.to_be_bytes());
    // IFD0
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&IMAGE_DESCRIPTION_TAG.to_be_bytes());
    out.extend_from_slice(&TYPE_ASCII.to_be_bytes());
    out.extend_from_slice(&count.to_be_bytes());
    if value.len() <= 4 {
        let mut inline = [0u8; 4];
        inline[..value.len()].copy_from_slice(&value);
        out.extend_from_slice(&inline);
        out.extend_from_slice(&0u32.to_be_bytes());
    } else {
        // header (8) + count (2) + entry (12) + next-IFD offset (4)
        out.extend_from_slice(&26u32.to_be_bytes());
        out.extend_from_slice(&0u32.to_be_bytes());
        out.extend_from_slice(&value);
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    big_endian: bool,
}

impl Reader<'_> {
    fn u16(&self, at: usize) -> Option<u16> {
        let b: [u8; 2] = self.data.get(at..at + 2)?.try_into().ok()?;
        Some(if self.big_endian { u16::from_be_bytes(b) } else { u16::from_le_bytes(b) })
    }

    fn u32(&self, at: usize) -> Option<u32> {
        let b: [u8; 4] = self.data.get(at..at + 4)?.try_into().ok()?;
        Some(if self.big_endian { u32::from_be_bytes(b) } else { u32::from_le_bytes(b) })
    }
}

/// Reads the ImageDescription (tag 270) from IFD0 of a TIFF-structured
/// EXIF block. A leading `Exif\0\0` marker is tolerated.
pub fn read_description(exif: &[u8]) -> Option<String> {
    let data = exif.strip_prefix(b"Exif\0\0".as_slice()).unwrap_or(exif);
    let big_endian = match data.get(0..2)? {
        b"MM" => true,
        b"II" => false,
        _ => return None,
    };
    let r = Reader { data, big_endian };
    if r.u16(2)? != 42 {
        return None;
    }
    let ifd = r.u32(4)? as usize;
    let entries = r.u16(ifd)? as usize;
    for i in 0..entries {
        let at = ifd + 2 + i * 12;
        if r.u16(at)? != IMAGE_DESCRIPTION_TAG {
            continue;
        }
        let ty = r.u16(at + 2)?;
        if !matches!(ty, TYPE_ASCII | TYPE_UNDEFINED | TYPE_UTF8) {
            return None;
        }
        let count = r.u32(at + 4)? as usize;
        let raw = if count <= 4 {
            data.get(at + 8..at + 8 + count)?
        } else {
            let off = r.u32(at + 8)? as usize;
            data.get(off..off.checked_add(count)?)?
        };
        let raw = raw.strip_suffix(&[0]).unwrap_or(raw);
        return Some(String::from_utf8_lossy(raw).into_owned());
    }
    None
}
