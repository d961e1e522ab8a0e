//! FIXMAP binary container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FXM1"
//! 4       4     rows M      (u32 LE)
//! 8       4     cols N      (u32 LE)
//! 12      4     frames K    (u32 LE)
//! 16      4     reserved, 0 (u32 LE)
//! 20      2*K*M*N  counts, u16 LE, frame-major then row-major
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::map::{FixationMap, MapError, SPARSE_DENSITY_THRESHOLD};

pub const MAGIC: &[u8; 4] = b"FXM1";
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"FXM1\"")]
    BadMagic([u8; 4]),
    #[error("reserved header field is {0}, expected 0")]
    BadReserved(u32),
    #[error("truncated file: {0}")]
    Truncated(&'static str),
    #[error("unexpected data after the payload")]
    TrailingBytes,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for FormatError {
    fn from(e: io::Error) -> Self {
        FormatError::Io(e)
    }
}

pub fn write_map<W: Write>(map: &FixationMap, mut out: W) -> Result<(), FormatError> {
    let dim = |v: usize| {
        u32::try_from(v).map_err(|_| MapError::DimensionOverflow {
            rows: map.rows(),
            cols: map.cols(),
            frames: map.frames(),
        })
    };
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&dim(map.rows())?.to_le_bytes());
    header.extend_from_slice(&dim(map.cols())?.to_le_bytes());
    header.extend_from_slice(&dim(map.frames())?.to_le_bytes());
    header.extend_from_slice(&0u32.to_le_bytes());
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(map.frame_len() * 2);
    for k in 0..map.frames() {
        buf.clear();
        for v in map.frame(k).iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_map<R: Read>(mut input: R) -> Result<FixationMap, FormatError> {
    let mut header = [0u8; HEADER_LEN];
    read_exact_or(&mut input, &mut header, "header")?;
    let magic: [u8; 4] = header[0..4].try_into().expect("4 bytes");
    if &magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes"));
    let (rows, cols, frames, reserved) = (word(4) as usize, word(8) as usize, word(12) as usize, word(16));
    if reserved != 0 {
        return Err(FormatError::BadReserved(reserved));
    }
    let frame_len = rows
        .checked_mul(cols)
        .filter(|fl| fl.checked_mul(frames).and_then(|l| l.checked_mul(2)).is_some())
        .ok_or(MapError::DimensionOverflow { rows, cols, frames })?;
    if frame_len == 0 || frames == 0 {
        return Err(MapError::EmptyDimensions { rows, cols, frames }.into());
    }
    let total = frame_len * frames;

    // Collect non-zeros while reading; switch to a dense buffer once the volume is
    // clearly not sparse so huge empty volumes never get materialized.
    let mut entries: Vec<(usize, u16)> = Vec::new();
    let mut dense: Option<Vec<u16>> = None;
    let sparse_limit = (SPARSE_DENSITY_THRESHOLD * total as f64) as usize;
    let mut raw = vec![0u8; frame_len * 2];
    for k in 0..frames {
        read_exact_or(&mut input, &mut raw, "payload")?;
        let base = k * frame_len;
        match dense.as_mut() {
            Some(values) => values.extend(
                raw.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])),
            ),
            None => {
                for (i, c) in raw.chunks_exact(2).enumerate() {
                    let v = u16::from_le_bytes([c[0], c[1]]);
                    if v != 0 {
                        entries.push((base + i, v));
                    }
                }
                if entries.len() > sparse_limit {
                    let mut values = vec![0u16; base + frame_len];
                    values.reserve(total - values.len());
                    for &(i, v) in &entries {
                        values[i] = v;
                    }
                    entries = Vec::new();
                    dense = Some(values);
                }
            }
        }
    }
    let mut probe = [0u8; 1];
    if input.read(&mut probe)? != 0 {
        return Err(FormatError::TrailingBytes);
    }
    Ok(match dense {
        Some(values) => FixationMap::from_dense(rows, cols, frames, values)?,
        None => FixationMap::from_entries(rows, cols, frames, entries)?,
    })
}

fn read_exact_or<R: Read>(input: &mut R, buf: &mut [u8], what: &'static str) -> Result<(), FormatError> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::Truncated(what),
        _ => FormatError::Io(e),
    })
}

pub fn read_map_file(path: &Path) -> Result<FixationMap, FormatError> {
    read_map(BufReader::new(File::open(path)?))
}

/// Writes to a temporary file beside `path` and renames it into place.
pub fn write_map_file(map: &FixationMap, path: &Path) -> Result<(), FormatError> {
    crate::io_util::write_atomic(path, |w| write_map(map, BufWriter::new(w)))
}
