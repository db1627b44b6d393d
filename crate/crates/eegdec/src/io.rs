//! EEGD v1 container: 4-byte magic `EEGD`, version byte 1, little-endian u32
//! header length, UTF-8 JSON header, then raw little-endian f32 payload in
//! row-major order. Recordings, epoch sets, fitted models, and network
//! parameter checkpoints all share this layout; the header `kind` field says
//! which.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{EegError, Result};
use crate::signal::{EpochSet, RawRecording};

pub const MAGIC: [u8; 4] = *b"EEGD";
pub const VERSION: u8 = 1;

/// Write any serializable header plus an f32 payload in EEGD v1 framing.
pub fn write_eegd<H: Serialize>(path: &Path, header: &H, payload: &[f32]) -> Result<()> {
    let header_bytes =
        serde_json::to_vec(header).map_err(|e| EegError::Format(format!("header encode: {e}")))?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    for v in payload {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read an EEGD v1 file, rejecting wrong magic or version.
pub fn read_eegd<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<f32>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(EegError::Format(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(EegError::Format(format!(
            "unsupported version {}, expected {VERSION}",
            version[0]
        )));
    }
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)?;
    let header: H = serde_json::from_slice(&header_bytes)
        .map_err(|e| EegError::Format(format!("header decode: {e}")))?;

    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if rest.len() % 4 != 0 {
        return Err(EegError::Format(format!(
            "payload length {} is not a multiple of 4",
            rest.len()
        )));
    }
    let payload: Vec<f32> = rest
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((header, payload))
}

/// Header for `kind: "raw"` and `kind: "epochs"` files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalHeader {
    pub kind: String,
    pub fs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub channels: Option<Vec<String>>,
    pub shape: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class_names: Option<Vec<String>>,
}

pub fn write_raw(path: &Path, rec: &RawRecording) -> Result<()> {
    let header = SignalHeader {
        kind: "raw".into(),
        fs: rec.fs,
        channels: Some(rec.channel_names.clone()),
        shape: vec![rec.channels(), rec.samples()],
        labels: None,
        class_names: None,
    };
    let payload: Vec<f32> = rec.data.iter().copied().collect();
    write_eegd(path, &header, &payload)
}

pub fn read_raw(path: &Path) -> Result<RawRecording> {
    let (header, payload): (SignalHeader, Vec<f32>) = read_eegd(path)?;
    if header.kind != "raw" {
        return Err(EegError::Format(format!(
            "expected kind \"raw\", got \"{}\"",
            header.kind
        )));
    }
    if header.shape.len() != 2 {
        return Err(EegError::Format(format!(
            "raw shape must have 2 dims, got {:?}",
            header.shape
        )));
    }
    let (c, s) = (header.shape[0], header.shape[1]);
    if payload.len() != c * s {
        return Err(EegError::Format(format!(
            "payload has {} floats, shape {:?} needs {}",
            payload.len(),
            header.shape,
            c * s
        )));
    }
    let data = Array2::from_shape_vec((c, s), payload)
        .map_err(|e| EegError::Format(format!("shape error: {e}")))?;
    let names = header
        .channels
        .ok_or_else(|| EegError::Format("raw header missing channels".into()))?;
    RawRecording::new(data, header.fs, names)
}

pub fn write_epochs(path: &Path, epochs: &EpochSet) -> Result<()> {
    let header = SignalHeader {
        kind: "epochs".into(),
        fs: epochs.fs,
        channels: None,
        shape: epochs.data.shape().to_vec(),
        labels: Some(epochs.labels.clone()),
        class_names: Some(epochs.class_names.clone()),
    };
    let payload: Vec<f32> = epochs.data.iter().copied().collect();
    write_eegd(path, &header, &payload)
}

pub fn read_epochs(path: &Path) -> Result<EpochSet> {
    let (header, payload): (SignalHeader, Vec<f32>) = read_eegd(path)?;
    if header.kind != "epochs" {
        return Err(EegError::Format(format!(
            "expected kind \"epochs\", got \"{}\"",
            header.kind
        )));
    }
    if header.shape.len() != 3 {
        return Err(EegError::Format(format!(
            "epochs shape must have 3 dims, got {:?}",
            header.shape
        )));
    }
    let (t, c, s) = (header.shape[0], header.shape[1], header.shape[2]);
    if payload.len() != t * c * s {
        return Err(EegError::Format(format!(
            "payload has {} floats, shape {:?} needs {}",
            payload.len(),
            header.shape,
            t * c * s
        )));
    }
    let data = Array3::from_shape_vec((t, c, s), payload)
        .map_err(|e| EegError::Format(format!("shape error: {e}")))?;
    let labels = header
        .labels
        .ok_or_else(|| EegError::Format("epochs header missing labels".into()))?;
    let class_names = header
        .class_names
        .ok_or_else(|| EegError::Format("epochs header missing class_names".into()))?;
    EpochSet::new(data, labels, class_names, header.fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn raw_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.eegd");
        let data = Array2::from_shape_fn((3, 17), |(c, s)| (c * 100 + s) as f32 * 0.001 - 0.02);
        let rec = RawRecording::new(
            data,
            1000.0,
            vec!["A".into(), "B".into(), "C".into()],
        )
        .unwrap();
        write_raw(&path, &rec).unwrap();
        let back = read_raw(&path).unwrap();
        assert_eq!(back, rec);

        // writes are byte-identical across calls
        let path2 = dir.path().join("rec2.eegd");
        write_raw(&path2, &rec).unwrap();
        let b1 = std::fs::read(&path).unwrap();
        let b2 = std::fs::read(&path2).unwrap();
        assert_eq!(b1, b2);
        // framing: magic, version, header length
        assert_eq!(&b1[0..4], b"EEGD");
        assert_eq!(b1[4], 1);
        let hlen = u32::from_le_bytes([b1[5], b1[6], b1[7], b1[8]]) as usize;
        assert!(b1.len() == 9 + hlen + 3 * 17 * 4);
    }

    #[test]
    fn epochs_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ep.eegd");
        let data = Array3::from_shape_fn((4, 2, 9), |(t, c, s)| (t + c + s) as f32);
        let ep = EpochSet::new(
            data,
            vec![0, 1, 2, 3],
            vec!["/Ba/".into(), "/Ku/".into(), "/He/".into(), "/Li/".into()],
            250.0,
        )
        .unwrap();
        write_epochs(&path, &ep).unwrap();
        let back = read_epochs(&path).unwrap();
        assert_eq!(back, ep);
    }

    #[test]
    fn reader_rejects_bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.eegd");
        std::fs::write(&path, b"NOPE\x01\x02\x00\x00\x00{}").unwrap();
        assert!(matches!(
            read_raw(&path),
            Err(EegError::Format(_))
        ));

        let mut good = Vec::new();
        good.extend_from_slice(b"EEGD");
        good.push(9); // wrong version
        good.extend_from_slice(&2u32.to_le_bytes());
        good.extend_from_slice(b"{}");
        std::fs::write(&path, &good).unwrap();
        assert!(matches!(read_raw(&path), Err(EegError::Format(_))));
    }
}
