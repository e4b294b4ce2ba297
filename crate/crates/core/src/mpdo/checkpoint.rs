//! Binary checkpoint: one JSON header line, then per site three
//! little-endian `u64` shape entries followed by row-major `(re, im)` pairs
//! of little-endian `f64`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::state::{MpdoState, SiteTensor};
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    n: usize,
    chi_max: usize,
    center: usize,
    trace: f64,
}

impl MpdoState {
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        let (sites, center, chi_max, trace) = self.parts();
        let header = Header {
            n: sites.len(),
            chi_max,
            center,
            trace,
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for s in sites {
            for dim in [s.left, 4, s.right] {
                w.write_all(&(dim as u64).to_le_bytes())?;
            }
            for v in &s.values {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_checkpoint<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: Header = serde_json::from_str(line.trim_end())?;
        let mut u64_buf = [0u8; 8];
        let mut read_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut u64_buf)?;
            Ok(u64::from_le_bytes(u64_buf))
        };
        let mut sites = Vec::with_capacity(header.n);
        for k in 0..header.n {
            let left = read_u64(&mut r)? as usize;
            let phys = read_u64(&mut r)? as usize;
            let right = read_u64(&mut r)? as usize;
            if phys != 4 || left == 0 || right == 0 || left.saturating_mul(right) > 1 << 26 {
                return Err(Error::InvalidArgument(format!(
                    "bad tensor shape ({left}, {phys}, {right}) at site {k}"
                )));
            }
            let mut bytes = vec![0u8; left * 4 * right * 16];
            r.read_exact(&mut bytes)?;
            let values = bytes
                .chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                    C64::new(re, im)
                })
                .collect();
            sites.push(SiteTensor::new(left, right, values)?);
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::InvalidArgument(format!("{} trailing bytes in checkpoint", rest.len())));
        }
        MpdoState::from_raw_parts(sites, header.center, header.chi_max, header.trace)
    }
}
