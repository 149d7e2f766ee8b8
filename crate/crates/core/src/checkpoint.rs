//! Binary model files.
//!
//! Layout, all integers little-endian `u32` unless noted:
//!
//! ```text
//! "SCN1"
//! config:  variant u8 (0 scnn, 1 mlp, 2 cnn, 3 bilstm)
//!          vocab_size, embed_dim, seq_len, classes
//!          scnn:   post_filter_relu u8, n, n x filter dim
//!          mlp:    hidden
//!          cnn:    channels, kernel_h, kernel_w, pool
//!          bilstm: layers, hidden
//! count
//! count x { name_len, name (utf-8), rank, rank x dim, len x f64 }
//! ```
//!
//! Tensors appear in build order ([`Model::named_params`]).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Architecture, Model, ModelConfig};

pub const MAGIC: &[u8; 4] = b"SCN1";

pub fn save(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_model(model, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_model(model: &Model, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    write_config(model.config(), w)?;
    let params = model.named_params();
    put_u32(w, params.len())?;
    for (name, t) in params {
        put_u32(w, name.len())?;
        w.write_all(name.as_bytes())?;
        put_u32(w, t.rank())?;
        for &d in t.shape() {
            put_u32(w, d)?;
        }
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a checkpoint into a freshly assembled model.
pub fn load(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(&mut BufReader::new(file))
}

/// Loads parameters into `model`, refusing files written for another configuration.
pub fn load_into(model: &mut Model, path: impl AsRef<Path>) -> Result<()> {
    let loaded = load(path)?;
    if loaded.config() != model.config() {
        return Err(Error::Config(format!(
            "checkpoint holds {:?}, model expects {:?}",
            loaded.config(),
            model.config()
        )));
    }
    *model = loaded;
    Ok(())
}

pub fn read_model(r: &mut impl Read) -> Result<Model> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let config = read_config(r)?;
    config.validate()?;
    let mut model = Model::build(config, 0)?;
    let expected: Vec<(String, Vec<usize>)> = model
        .named_params()
        .into_iter()
        .map(|(n, t)| (n, t.shape().to_vec()))
        .collect();
    let count = get_u32(r)? as usize;
    if count != expected.len() {
        return Err(Error::Checkpoint(format!(
            "file holds {count} tensors, configuration needs {}",
            expected.len()
        )));
    }
    for ((want_name, want_shape), param) in expected.iter().zip(model.params_mut()) {
        let name_len = get_u32(r)? as usize;
        if name_len > 4096 {
            return Err(Error::Checkpoint(format!("implausible name length {name_len}")));
        }
        let mut name = vec![0u8; name_len];
        read_exact(r, &mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
        if &name != want_name {
            return Err(Error::Checkpoint(format!(
                "expected tensor '{want_name}', found '{name}'"
            )));
        }
        let rank = get_u32(r)? as usize;
        if rank > 8 {
            return Err(Error::Checkpoint(format!("implausible rank {rank} for '{name}'")));
        }
        let shape = (0..rank)
            .map(|_| get_u32(r).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if &shape != want_shape {
            return Err(Error::Checkpoint(format!(
                "tensor '{name}' has shape {shape:?}, expected {want_shape:?}"
            )));
        }
        let mut buf = [0u8; 8];
        for v in param.data_mut() {
            read_exact(r, &mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
    }
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing) {
        Ok(0) => Ok(model),
        Ok(_) => Err(Error::Checkpoint("trailing bytes after last tensor".into())),
        Err(e) => Err(Error::Checkpoint(e.to_string())),
    }
}

fn write_config(cfg: &ModelConfig, w: &mut impl Write) -> std::io::Result<()> {
    let tag: u8 = match cfg.arch {
        Architecture::Scnn { .. } => 0,
        Architecture::Mlp { .. } => 1,
        Architecture::Cnn { .. } => 2,
        Architecture::BiLstm { .. } => 3,
    };
    w.write_all(&[tag])?;
    for v in [cfg.vocab_size, cfg.embed_dim, cfg.seq_len, cfg.classes] {
        put_u32(w, v)?;
    }
    match &cfg.arch {
        Architecture::Scnn {
            filter_dims,
            post_filter_relu,
        } => {
            w.write_all(&[u8::from(*post_filter_relu)])?;
            put_u32(w, filter_dims.len())?;
            for &d in filter_dims {
                put_u32(w, d)?;
            }
        }
        Architecture::Mlp { hidden } => put_u32(w, *hidden)?,
        Architecture::Cnn {
            channels,
            kernel_h,
            kernel_w,
            pool,
        } => {
            for v in [*channels, *kernel_h, *kernel_w, *pool] {
                put_u32(w, v)?;
            }
        }
        Architecture::BiLstm { layers, hidden } => {
            put_u32(w, *layers)?;
            put_u32(w, *hidden)?;
        }
    }
    Ok(())
}

fn read_config(r: &mut impl Read) -> Result<ModelConfig> {
    let mut tag = [0u8; 1];
    read_exact(r, &mut tag)?;
    let mut next = || get_u32(r).map(|v| v as usize);
    let (vocab_size, embed_dim, seq_len, classes) = (next()?, next()?, next()?, next()?);
    let arch = match tag[0] {
        0 => {
            let mut flag = [0u8; 1];
            read_exact(r, &mut flag)?;
            let n = get_u32(r)? as usize;
            if n > 1024 {
                return Err(Error::Checkpoint(format!("implausible filter count {n}")));
            }
            let filter_dims = (0..n)
                .map(|_| get_u32(r).map(|v| v as usize))
                .collect::<Result<Vec<_>>>()?;
            Architecture::Scnn {
                filter_dims,
                post_filter_relu: flag[0] != 0,
            }
        }
        1 => Architecture::Mlp {
            hidden: get_u32(r)? as usize,
        },
        2 => {
            let mut next = || get_u32(r).map(|v| v as usize);
            Architecture::Cnn {
                channels: next()?,
                kernel_h: next()?,
                kernel_w: next()?,
                pool: next()?,
            }
        }
        3 => {
            let mut next = || get_u32(r).map(|v| v as usize);
            Architecture::BiLstm {
                layers: next()?,
                hidden: next()?,
            }
        }
        other => return Err(Error::Checkpoint(format!("unknown variant tag {other}"))),
    };
    Ok(ModelConfig {
        vocab_size,
        embed_dim,
        seq_len,
        classes,
        arch,
    })
}

fn put_u32(w: &mut impl Write, v: usize) -> std::io::Result<()> {
    let v = u32::try_from(v).map_err(|_| {
        std::io::Error::new(std::io::ErrorKind::InvalidInput, "value exceeds u32")
    })?;
    w.write_all(&v.to_le_bytes())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => {
            Error::Checkpoint("file is truncated".into())
        }
        _ => Error::Checkpoint(e.to_string()),
    })
}
