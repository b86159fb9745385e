//! Binary checkpoints.
//!
//! Little-endian throughout:
//!
//! ```text
//! b"TIGR" | u32 version
//! section*   where section = u64 byte length | payload
//!   1. spec:      u32 height | u32 width | u32 classes | str architecture
//!   2. params:    u32 count | (str name | u64 len | f64 * len)*
//!   3. optimizer: u64 step | f64 lr | f64 beta1 | f64 beta2 | f64 eps
//!                 | u32 count | (u64 len | f64 * len)* for m, then the same for v
//!   4. meta:      u64 seed | u64 epoch | u32 count | (str key | f64 value)*
//! str = u32 byte length | UTF-8 bytes
//! ```
//!
//! Anything after the fourth section is rejected.

use std::fs;
use std::path::Path;

use super::arch::{parse_architecture, NetworkSpec};
use super::params::{init_params, NetworkParams};
use crate::error::{Error, Result};
use crate::optim::AdamState;

pub const MAGIC: &[u8; 4] = b"TIGR";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub spec: NetworkSpec,
    pub params: NetworkParams,
    pub optimizer: AdamState,
    pub seed: u64,
    pub epoch: u64,
    pub metrics: Vec<(String, f64)>,
}

impl Checkpoint {
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);

        let mut s = Vec::new();
        put_u32(&mut s, self.spec.height as u32);
        put_u32(&mut s, self.spec.width as u32);
        put_u32(&mut s, self.spec.num_classes as u32);
        put_str(&mut s, &self.spec.to_string());
        put_section(&mut out, &s);

        let mut p = Vec::new();
        let names = self.params.tensor_names();
        put_u32(&mut p, names.len() as u32);
        for (name, t) in names.iter().zip(self.params.tensors()) {
            put_str(&mut p, name);
            put_f64s(&mut p, t);
        }
        put_section(&mut out, &p);

        let o = &self.optimizer;
        let mut q = Vec::new();
        put_u64(&mut q, o.step);
        for v in [o.lr, o.beta1, o.beta2, o.eps] {
            put_f64(&mut q, v);
        }
        for moments in [&o.m, &o.v] {
            put_u32(&mut q, moments.len() as u32);
            for t in moments {
                put_f64s(&mut q, t);
            }
        }
        put_section(&mut out, &q);

        let mut m = Vec::new();
        put_u64(&mut m, self.seed);
        put_u64(&mut m, self.epoch);
        put_u32(&mut m, self.metrics.len() as u32);
        for (k, v) in &self.metrics {
            put_str(&mut m, k);
            put_f64(&mut m, *v);
        }
        put_section(&mut out, &m);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(corrupt("bad magic (not a checkpoint file)"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {version} (this build reads version {VERSION})"
            )));
        }

        let mut s = r.section()?;
        let height = s.u32()? as usize;
        let width = s.u32()? as usize;
        let classes = s.u32()? as usize;
        let arch = s.string()?;
        s.finish()?;
        let spec = parse_architecture(&arch, (height, width), classes)?;

        let mut p = r.section()?;
        let mut params = init_params(&spec, 0)?;
        let names = params.tensor_names();
        let count = p.u32()? as usize;
        if count != names.len() {
            return Err(corrupt(format!(
                "{count} tensors stored, {} expected",
                names.len()
            )));
        }
        for (expected, dst) in names.iter().zip(params.tensors_mut()) {
            let name = p.string()?;
            if &name != expected {
                return Err(corrupt(format!(
                    "tensor `{name}` where `{expected}` was expected"
                )));
            }
            let data = p.f64s()?;
            if data.len() != dst.len() {
                return Err(corrupt(format!(
                    "tensor `{name}` has {} values, expected {}",
                    data.len(),
                    dst.len()
                )));
            }
            *dst = data;
        }
        p.finish()?;

        let mut q = r.section()?;
        let step = q.u64()?;
        let (lr, beta1, beta2, eps) = (q.f64()?, q.f64()?, q.f64()?, q.f64()?);
        let mut moments = Vec::with_capacity(2);
        for _ in 0..2 {
            let n = q.u32()? as usize;
            let mut ts = Vec::with_capacity(n.min(1024));
            for _ in 0..n {
                ts.push(q.f64s()?);
            }
            moments.push(ts);
        }
        q.finish()?;
        let v = moments.pop().expect("two moment sets");
        let m = moments.pop().expect("two moment sets");
        let optimizer = AdamState {
            lr,
            beta1,
            beta2,
            eps,
            step,
            m,
            v,
        };

        let mut meta = r.section()?;
        let seed = meta.u64()?;
        let epoch = meta.u64()?;
        let n = meta.u32()? as usize;
        let mut metrics = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            let k = meta.string()?;
            metrics.push((k, meta.f64()?));
        }
        meta.finish()?;
        r.finish()?;

        Ok(Self {
            spec,
            params,
            optimizer,
            seed,
            epoch,
            metrics,
        })
    }
}

pub fn save_checkpoint(path: impl AsRef<Path>, c: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, c.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Checkpoint(format!("corrupt file: {}", msg.into()))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vs: &[f64]) {
    put_u64(out, vs.len() as u64);
    for &v in vs {
        put_f64(out, v);
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn put_section(out: &mut Vec<u8>, payload: &[u8]) {
    put_u64(out, payload.len() as u64);
    out.extend_from_slice(payload);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt(format!("truncated at byte {} (wanted {n} more)", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = usize::try_from(self.u64()?).map_err(|_| corrupt("length overflow"))?;
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| corrupt("length overflow"))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| corrupt("invalid UTF-8 string"))
    }

    fn section(&mut self) -> Result<Reader<'a>> {
        let n = usize::try_from(self.u64()?).map_err(|_| corrupt("length overflow"))?;
        Ok(Reader {
            buf: self.take(n)?,
            pos: 0,
        })
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(corrupt(format!(
                "{} unexpected trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_architecture;

    fn sample() -> Checkpoint {
        let spec = parse_architecture("SC[2,2]-DP[6]-S[2]-FC[3]", (4, 4), 3).unwrap();
        let params = init_params(&spec, 9).unwrap();
        let optimizer = AdamState::new(&params, 1e-3, 0.9, 0.999, 1e-8);
        Checkpoint {
            spec,
            params,
            optimizer,
            seed: 9,
            epoch: 4,
            metrics: vec![("val_acc".into(), 0.75)],
        }
    }

    #[test]
    fn round_trip_bitwise() {
        let c = sample();
        let back = Checkpoint::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!(back, c);
        for (a, b) in back.params.tensors().iter().zip(c.params.tensors()) {
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(back.metric("val_acc"), Some(0.75));
    }

    #[test]
    fn truncation_detected() {
        let bytes = sample().to_bytes();
        for cut in [3, 7, 20, bytes.len() / 2, bytes.len() - 1] {
            match Checkpoint::from_bytes(&bytes[..cut]) {
                Err(Error::Checkpoint(msg)) => {
                    assert!(msg.contains("corrupt") || msg.contains("magic"), "{msg}")
                }
                other => panic!("cut at {cut}: {other:?}"),
            }
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = sample().to_bytes();
        bytes[0] = b'X';
        assert!(
            matches!(Checkpoint::from_bytes(&bytes), Err(Error::Checkpoint(m)) if m.contains("magic"))
        );
        let mut bytes = sample().to_bytes();
        bytes[4] = 2;
        assert!(
            matches!(Checkpoint::from_bytes(&bytes), Err(Error::Checkpoint(m)) if m.contains("version"))
        );
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = sample().to_bytes();
        bytes.push(0);
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }
}
