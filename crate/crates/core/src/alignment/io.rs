//! Binary tensor format: four little-endian u64 (`n`, `w`, `r`, `m`), then
//! `n * w * r * m` little-endian f32 values in row-major order.

use std::io::{Read, Write};

use super::{AlignedTensor, InputRow};
use crate::error::{Error, Result};

pub const TENSOR_HEADER_BYTES: usize = 32;

pub fn write_tensor<W: Write>(mut out: W, t: &AlignedTensor) -> std::io::Result<()> {
    for v in [t.len(), t.w, t.r, t.m] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    let mut buf = vec![0u8; t.m * 4];
    for i in 0..t.len() {
        for row in t.rows(i) {
            buf.fill(0);
            for &(c, v) in row {
                let at = c as usize * 4;
                buf[at..at + 4].copy_from_slice(&(v as f32).to_le_bytes());
            }
            out.write_all(&buf)?;
        }
    }
    Ok(())
}

fn format_err(message: impl Into<String>) -> Error {
    Error::Format {
        file: "tensor".into(),
        message: message.into(),
    }
}

pub fn read_tensor<R: Read>(mut input: R) -> Result<AlignedTensor> {
    let mut header = [0u8; TENSOR_HEADER_BYTES];
    input
        .read_exact(&mut header)
        .map_err(|_| format_err("truncated header"))?;
    let field = |i: usize| {
        let mut b = [0u8; 8];
        b.copy_from_slice(&header[i * 8..i * 8 + 8]);
        usize::try_from(u64::from_le_bytes(b)).map_err(|_| format_err("header value too large"))
    };
    let (n, w, r, m) = (field(0)?, field(1)?, field(2)?, field(3)?);
    n.checked_mul(w)
        .and_then(|x| x.checked_mul(r))
        .and_then(|x| x.checked_mul(m))
        .and_then(|x| x.checked_mul(4))
        .ok_or_else(|| format_err("header dimensions overflow"))?;

    let mut buf = vec![0u8; m * 4];
    let mut graphs = Vec::with_capacity(n);
    for i in 0..n {
        let mut rows = Vec::with_capacity(w * r);
        for _ in 0..w * r {
            input
                .read_exact(&mut buf)
                .map_err(|_| format_err(format!("truncated data in graph {i}")))?;
            let row: InputRow = buf
                .chunks_exact(4)
                .enumerate()
                .filter_map(|(c, b)| {
                    let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
                    (v != 0.0).then_some((c as u32, f64::from(v)))
                })
                .collect();
            rows.push(row);
        }
        graphs.push(rows);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest).map_err(|_| format_err("read failed"))? != 0 {
        return Err(format_err("trailing bytes after tensor data"));
    }
    AlignedTensor::new(w, r, m, graphs)
}
