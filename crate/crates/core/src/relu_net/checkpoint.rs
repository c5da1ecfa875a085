//! Binary checkpoint layout (all integers and floats little-endian):
//!
//! ```text
//! magic  8 bytes  b"RELUNET1"
//! d      u64
//! K      u64
//! params f64 × (K·(d+2) + 1)   w row-major (K×d), b (K), v (K), β
//! ```

use std::io::{Read, Write};

use super::{param_count, TwoLayerNet};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"RELUNET1";

pub fn write_checkpoint<W: Write>(net: &TwoLayerNet, mut out: W) -> Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&(net.dim() as u64).to_le_bytes())?;
    out.write_all(&(net.width() as u64).to_le_bytes())?;
    for p in net.params() {
        out.write_all(&p.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<TwoLayerNet> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a network checkpoint (bad magic)".into()));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let k = u64::from_le_bytes(word) as usize;
    if d == 0 || k == 0 || d > 1 << 20 || k > 1 << 26 {
        return Err(Error::Format(format!("implausible checkpoint shape d={d}, K={k}")));
    }
    let mut params = Vec::with_capacity(param_count(d, k));
    for _ in 0..param_count(d, k) {
        input.read_exact(&mut word)?;
        params.push(f64::from_le_bytes(word));
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes after checkpoint", rest.len())));
    }
    TwoLayerNet::from_flat(d, k, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    #[test]
    fn round_trip() {
        let net = TwoLayerNet::kaiming_init(&mut SeededRng::new(1), 3, 5).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&net, &mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 8 * param_count(3, 5));
        assert_eq!(read_checkpoint(buf.as_slice()).unwrap(), net);
    }

    #[test]
    fn rejects_corruption() {
        let net = TwoLayerNet::zeros(1, 1).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&net, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_checkpoint(bad.as_slice()).is_err());
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
