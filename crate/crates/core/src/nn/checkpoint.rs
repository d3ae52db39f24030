//! Model checkpoint: 8-byte magic, u32 version, config as little-endian
//! u64 fields (m, r, w, three conv widths, dense units, classes) plus the
//! dropout rate as f64, then every parameter tensor in declaration order as
//! little-endian f64.

use std::io::{Read, Write};

use super::{Model, ModelConfig, Params};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"DEEPMAP\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut out: W, model: &Model) -> std::io::Result<()> {
    let c = &model.config;
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    let [c1, c2, c3] = c.conv_channels;
    for v in [c.input_dim, c.field_size, c.sequence_len, c1, c2, c3, c.dense_units, c.class_count] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    out.write_all(&c.dropout_rate.to_le_bytes())?;
    for x in model.params.tensors().flatten() {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn bad(message: impl Into<String>) -> Error {
    Error::Format {
        file: "checkpoint".into(),
        message: message.into(),
    }
}

fn read_array<const N: usize>(input: &mut impl Read, what: &str) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input
        .read_exact(&mut b)
        .map_err(|_| bad(format!("truncated while reading {what}")))?;
    Ok(b)
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Model> {
    if &read_array::<8>(&mut input, "magic")? != CHECKPOINT_MAGIC {
        return Err(bad("not a model checkpoint"));
    }
    let version = u32::from_le_bytes(read_array(&mut input, "version")?);
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    let mut fields = [0usize; 8];
    for f in &mut fields {
        *f = usize::try_from(u64::from_le_bytes(read_array(&mut input, "config")?))
            .map_err(|_| bad("config field too large"))?;
    }
    let [m, r, w, c1, c2, c3, dense, classes] = fields;
    let config = ModelConfig {
        input_dim: m,
        field_size: r,
        sequence_len: w,
        conv_channels: [c1, c2, c3],
        dense_units: dense,
        dropout_rate: f64::from_le_bytes(read_array(&mut input, "dropout")?),
        class_count: classes,
    };
    config.validate().map_err(|e| bad(e.to_string()))?;
    let mut params = Params::zeros(&config);
    for t in params.tensors_mut() {
        for x in t.iter_mut() {
            *x = f64::from_le_bytes(read_array(&mut input, "parameters")?);
        }
    }
    if input.read(&mut [0u8; 1]).map_err(|_| bad("read failed"))? != 0 {
        return Err(bad("trailing bytes after parameters"));
    }
    if !params.all_finite() {
        return Err(bad("non-finite parameter"));
    }
    Ok(Model::from_params(config, params, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let model = Model::new(ModelConfig::new(3, 2, 4, 5), 9).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &model).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 * 9 + 8 * model.config.parameter_count());
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back.config, model.config);
        assert_eq!(back.params, model.params);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let model = Model::new(ModelConfig::new(2, 2, 2, 2), 1).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &model).unwrap();
        assert!(read_checkpoint(&buf[..buf.len() - 3]).is_err());
        let mut wrong = buf.clone();
        wrong[0] = b'X';
        assert!(read_checkpoint(wrong.as_slice()).is_err());
        let mut version = buf.clone();
        version[8] = 2;
        assert!(read_checkpoint(version.as_slice()).is_err());
        buf.push(1);
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
