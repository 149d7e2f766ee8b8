//! Encoded dataset files.
//!
//! ```text
//! "SCE1", seq_len u32, count u64,
//! count x { label u8, len u16, len x id u32 }
//! ```
//!
//! Only the unpadded ids are stored; padding is restored on load. All
//! integers are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::encode::Example;
use super::vocab::PAD_ID;

const MAGIC: &[u8; 4] = b"SCE1";

pub fn write_examples(path: impl AsRef<Path>, examples: &[Example], seq_len: usize) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(seq_len as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(examples.len() as u64).to_le_bytes()).map_err(io)?;
    for ex in examples {
        w.write_all(&[ex.label]).map_err(io)?;
        w.write_all(&(ex.len as u16).to_le_bytes()).map_err(io)?;
        for id in &ex.ids[..ex.len] {
            w.write_all(&id.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_examples(path: impl AsRef<Path>) -> Result<(usize, Vec<Example>)> {
    let path = path.as_ref();
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let bad = |what: &str| Error::Data(format!("{}: {what}", path.display()));
    let mut read = |buf: &mut [u8]| r.read_exact(buf).map_err(|_| bad("truncated file"));

    let mut magic = [0u8; 4];
    read(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not an encoded dataset"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    read(&mut b4)?;
    let seq_len = u32::from_le_bytes(b4) as usize;
    read(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let mut examples = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let mut head = [0u8; 3];
        read(&mut head)?;
        let label = head[0];
        let len = u16::from_le_bytes([head[1], head[2]]) as usize;
        if label > 1 || len > seq_len {
            return Err(bad("corrupt example header"));
        }
        let mut ids = Vec::with_capacity(seq_len);
        for _ in 0..len {
            read(&mut b4)?;
            ids.push(u32::from_le_bytes(b4));
        }
        ids.resize(seq_len, PAD_ID);
        examples.push(Example { ids, label, len });
    }
    Ok((seq_len, examples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        let examples = vec![
            Example { ids: vec![5, 6, 0, 0], label: 1, len: 2 },
            Example { ids: vec![0, 0, 0, 0], label: 0, len: 0 },
        ];
        write_examples(&path, &examples, 4).unwrap();
        let (seq_len, back) = read_examples(&path).unwrap();
        assert_eq!(seq_len, 4);
        assert_eq!(back, examples);

        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        assert!(read_examples(&path).is_err());
    }
}
