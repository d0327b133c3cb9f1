//! Versioned little-endian binary dump of all agent weights plus the hash
//! of the configuration that produced them.

use std::io::{Read, Write};
use std::path::Path;

use super::Mlp;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"FLCKPT\0\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub log_alpha: f64,
    pub policy: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_target: Mlp,
    pub q2_target: Mlp,
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_net(out: &mut Vec<u8>, net: &Mlp) {
    put_u64(out, net.sizes().len() as u64);
    for &s in net.sizes() {
        put_u64(out, s as u64);
    }
    put_u64(out, net.num_params() as u64);
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.buf.len() < n {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self, limit: u64) -> Result<usize> {
        let n = self.u64()?;
        if n > limit {
            return Err(Error::Checkpoint(format!("implausible length {n}")));
        }
        Ok(n as usize)
    }

    fn net(&mut self) -> Result<Mlp> {
        let layers = self.len(64)?;
        let sizes = (0..layers)
            .map(|_| self.len(1 << 20))
            .collect::<Result<Vec<_>>>()?;
        let n = self.len(self.buf.len() as u64 / 8)?;
        let params = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Mlp::from_params(&sizes, params).map_err(|e| Error::Checkpoint(e.to_string()))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_u64(&mut out, self.config_hash.len() as u64);
        out.extend_from_slice(self.config_hash.as_bytes());
        out.extend_from_slice(&self.log_alpha.to_le_bytes());
        for net in [
            &self.policy,
            &self.q1,
            &self.q2,
            &self.q1_target,
            &self.q2_target,
        ] {
            put_net(&mut out, net);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let hash_len = r.len(1024)?;
        let config_hash = String::from_utf8(r.take(hash_len)?.to_vec())
            .map_err(|_| Error::Checkpoint("config hash is not UTF-8".into()))?;
        let log_alpha = r.f64()?;
        let ckpt = Self {
            config_hash,
            log_alpha,
            policy: r.net()?,
            q1: r.net()?,
            q2: r.net()?,
            q1_target: r.net()?,
            q2_target: r.net()?,
        };
        if !r.buf.is_empty() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}
