//! Length-prefixed binary cache of curve records.
//!
//! Layout: magic `BSDC`, one version byte, record count (u64 LE), then each
//! record as a u32 LE byte length followed by its payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_bigint::BigInt;

use super::record::CurveRecord;
use super::IngestError;
use crate::ec::{RationalPoint, WeierstrassCurve};

pub const MAGIC: &[u8; 4] = b"BSDC";
pub const FORMAT_VERSION: u8 = 1;

fn put_bytes(buf: &mut Vec<u8>, b: &[u8]) {
    buf.extend_from_slice(&(b.len() as u32).to_le_bytes());
    buf.extend_from_slice(b);
}

fn put_bigint(buf: &mut Vec<u8>, n: &BigInt) {
    put_bytes(buf, &n.to_signed_bytes_le());
}

fn encode(r: &CurveRecord) -> Vec<u8> {
    let mut b = Vec::with_capacity(128);
    put_bytes(&mut b, r.label.as_bytes());
    for a in r.curve.coeffs() {
        put_bigint(&mut b, a);
    }
    b.extend_from_slice(&r.conductor.to_le_bytes());
    b.push(r.rank);
    b.extend_from_slice(&r.torsion_order.to_le_bytes());
    b.extend_from_slice(&r.tamagawa_product.to_le_bytes());
    for x in [r.omega, r.regulator, r.sha_order] {
        b.extend_from_slice(&x.to_bits().to_le_bytes());
    }
    match &r.generators {
        None => b.push(0),
        Some(gens) => {
            b.push(1);
            b.extend_from_slice(&(gens.len() as u32).to_le_bytes());
            for g in gens {
                put_bytes(&mut b, g.to_string().as_bytes());
            }
        }
    }
    b
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IngestError> {
        if self.pos + n > self.buf.len() {
            return Err(IngestError::Integrity("record payload shorter than its fields".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, IngestError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IngestError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IngestError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, IngestError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn bytes(&mut self) -> Result<&'a [u8], IngestError> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    fn string(&mut self) -> Result<String, IngestError> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| IngestError::Integrity("invalid utf-8 in record".into()))
    }
}

fn decode(buf: &[u8]) -> Result<CurveRecord, IngestError> {
    let mut c = Cursor { buf, pos: 0 };
    let label = c.string()?;
    let mut a = Vec::with_capacity(5);
    for _ in 0..5 {
        a.push(BigInt::from_signed_bytes_le(c.bytes()?));
    }
    let mut a = a.into_iter();
    let curve = WeierstrassCurve::new(a.next().unwrap(), a.next().unwrap(), a.next().unwrap(), a.next().unwrap(), a.next().unwrap());
    let conductor = c.u64()?;
    let rank = c.u8()?;
    let torsion_order = c.u32()?;
    let tamagawa_product = c.u64()?;
    let omega = c.f64()?;
    let regulator = c.f64()?;
    let sha_order = c.f64()?;
    let generators = match c.u8()? {
        0 => None,
        1 => {
            let n = c.u32()?;
            let mut g = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let s = c.string()?;
                g.push(s.parse::<RationalPoint>().map_err(|e| IngestError::Integrity(e.to_string()))?);
            }
            Some(g)
        }
        t => return Err(IngestError::Integrity(format!("bad generator tag {t}"))),
    };
    if c.pos != buf.len() {
        return Err(IngestError::Integrity("trailing bytes in record".into()));
    }
    Ok(CurveRecord { label, curve, conductor, rank, torsion_order, tamagawa_product, omega, regulator, sha_order, generators })
}

/// Streams records to `w`; the count must be known up front.
pub fn write_cache_to<W: Write>(records: &[CurveRecord], w: W) -> Result<(), IngestError> {
    let mut w = BufWriter::new(w);
    let io = |e| IngestError::Io("cache".into(), e);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&[FORMAT_VERSION]).map_err(io)?;
    w.write_all(&(records.len() as u64).to_le_bytes()).map_err(io)?;
    for r in records {
        let payload = encode(r);
        w.write_all(&(payload.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(&payload).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_cache(records: &[CurveRecord], path: &Path) -> Result<(), IngestError> {
    let f = File::create(path).map_err(|e| IngestError::Io(path.display().to_string(), e))?;
    write_cache_to(records, f)
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<(), IngestError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => IngestError::Integrity(format!("truncated cache while reading {what}")),
        _ => IngestError::Io("cache".into(), e),
    })
}

pub fn read_cache_from<R: Read>(r: R) -> Result<Vec<CurveRecord>, IngestError> {
    let mut r = BufReader::new(r);
    let mut head = [0u8; 13];
    read_exact_or_truncated(&mut r, &mut head, "header")?;
    if &head[..4] != MAGIC {
        return Err(IngestError::Integrity("not a curve cache (bad magic)".into()));
    }
    if head[4] != FORMAT_VERSION {
        return Err(IngestError::Version { found: head[4], expected: FORMAT_VERSION });
    }
    let count = u64::from_le_bytes(head[5..13].try_into().unwrap());
    let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
    let mut len = [0u8; 4];
    let mut payload = Vec::new();
    for i in 0..count {
        read_exact_or_truncated(&mut r, &mut len, &format!("record {i} of {count}"))?;
        payload.resize(u32::from_le_bytes(len) as usize, 0);
        read_exact_or_truncated(&mut r, &mut payload, &format!("record {i} of {count}"))?;
        out.push(decode(&payload)?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra).map_err(|e| IngestError::Io("cache".into(), e))? != 0 {
        return Err(IngestError::Integrity("bytes after the last record".into()));
    }
    Ok(out)
}

pub fn read_cache(path: &Path) -> Result<Vec<CurveRecord>, IngestError> {
    let f = File::open(path).map_err(|e| IngestError::Io(path.display().to_string(), e))?;
    read_cache_from(f)
}
