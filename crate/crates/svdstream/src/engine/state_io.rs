//! Versioned binary persistence of the maintained state. Little-endian
//! throughout; the header carries a checksum so truncated or mangled files
//! fail loudly. A save/load/save round trip is byte-identical.

use super::{EngineError, TruncatedSvdState};
use crate::dense::{DenseTallMatrix, SmallDense};
use crate::StepTimes;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: [u8; 8] = *b"TSVDSTA1";
const VERSION: u32 = 1;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl TruncatedSvdState {
    pub fn save_to<W: Write>(&self, w: &mut W) -> Result<(), EngineError> {
        let mut header = Vec::with_capacity(8 + 4 + 8 * 5);
        header.extend_from_slice(&MAGIC);
        header.extend_from_slice(&VERSION.to_le_bytes());
        header.extend_from_slice(&(self.m as u64).to_le_bytes());
        header.extend_from_slice(&(self.n as u64).to_le_bytes());
        header.extend_from_slice(&(self.k as u64).to_le_bytes());
        header.extend_from_slice(&self.update_count.to_le_bytes());
        header.extend_from_slice(&self.reset_count.to_le_bytes());
        let checksum = fnv1a(&header);
        w.write_all(&header)?;
        w.write_all(&checksum.to_le_bytes())?;
        write_f64s(w, self.u_prime.row_major_data())?;
        write_f64s(w, self.u_dd.data())?;
        write_f64s(w, &self.sigma)?;
        write_f64s(w, self.v_dd.data())?;
        write_f64s(w, self.v_prime.row_major_data())?;
        Ok(())
    }

    pub fn load_from<R: Read>(r: &mut R) -> Result<Self, EngineError> {
        let mut header = [0u8; 8 + 4 + 8 * 5];
        r.read_exact(&mut header)?;
        if header[..8] != MAGIC {
            return Err(EngineError::CorruptState("bad magic".into()));
        }
        let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(EngineError::StateVersion { found: version });
        }
        let mut off = 12;
        let mut next_u64 = || {
            let v = u64::from_le_bytes(header[off..off + 8].try_into().unwrap());
            off += 8;
            v
        };
        let m = next_u64() as usize;
        let n = next_u64() as usize;
        let k = next_u64() as usize;
        let update_count = next_u64();
        let reset_count = next_u64();
        let mut checksum_bytes = [0u8; 8];
        r.read_exact(&mut checksum_bytes)?;
        if u64::from_le_bytes(checksum_bytes) != fnv1a(&header) {
            return Err(EngineError::CorruptState("header checksum mismatch".into()));
        }
        if k == 0 || k > m.min(n) {
            return Err(EngineError::CorruptState(format!("bad dims {m}x{n}, k={k}")));
        }
        let u_prime = DenseTallMatrix::new(m, k, read_f64s(r, m * k)?)?;
        let u_dd = SmallDense::new(k, k, read_f64s(r, k * k)?)?;
        let sigma = read_f64s(r, k)?;
        let v_dd = SmallDense::new(k, k, read_f64s(r, k * k)?)?;
        let v_prime = DenseTallMatrix::new(n, k, read_f64s(r, n * k)?)?;

        let cond_u = u_dd.inverse_with_cond().map(|(_, c)| c).unwrap_or(f64::INFINITY);
        let cond_v = v_dd.inverse_with_cond().map(|(_, c)| c).unwrap_or(f64::INFINITY);
        Ok(Self {
            m,
            n,
            k,
            u_prime,
            u_dd,
            sigma,
            v_dd,
            v_prime,
            update_count,
            reset_count,
            cond_u,
            cond_v,
            last_step_times: StepTimes::default(),
            last_reset_drift: 0.0,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EngineError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EngineError> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let state = Self::load_from(&mut r)?;
        Ok(state)
    }

    /// Serialized bytes; convenience for atomic-write call sites and tests.
    pub fn to_bytes(&self) -> Result<Vec<u8>, EngineError> {
        let mut buf = Vec::new();
        self.save_to(&mut buf)?;
        Ok(buf)
    }
}

fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>, EngineError> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}
