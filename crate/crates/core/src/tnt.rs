//! The `.tnt` binary tensor container.
//!
//! Layout: magic `TNT\x01`, one scalar-code byte (0 real, 1 complex), the
//! order as a little-endian `u32`, one little-endian `u64` per dimension,
//! then the row-major entries as little-endian `f64` (complex entries as
//! interleaved `re, im`).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, ScalarKind, C64};

pub const MAGIC: [u8; 4] = *b"TNT\x01";

pub fn write_to(t: &DenseTensor, mut w: impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 8 * t.order() + 16 * t.len());
    buf.extend_from_slice(&MAGIC);
    buf.push(match t.kind() {
        ScalarKind::Real => 0,
        ScalarKind::Complex => 1,
    });
    buf.extend_from_slice(&(t.order() as u32).to_le_bytes());
    for &d in t.shape() {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for z in t.data() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        if t.kind() == ScalarKind::Complex {
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_from(mut r: impl Read) -> Result<DenseTensor> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Format(format!("truncated .tnt file while reading {what}")));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

pub fn decode(mut bytes: &[u8]) -> Result<DenseTensor> {
    let b = &mut bytes;
    if take(b, 4, "magic")? != MAGIC {
        return Err(Error::Format("not a .tnt file (bad magic or version)".into()));
    }
    let kind = match take(b, 1, "scalar code")?[0] {
        0 => ScalarKind::Real,
        1 => ScalarKind::Complex,
        c => return Err(Error::Format(format!("unknown scalar code {c}"))),
    };
    let order = u32::from_le_bytes(take(b, 4, "order")?.try_into().unwrap()) as usize;
    let mut shape = Vec::with_capacity(order);
    for _ in 0..order {
        let d = u64::from_le_bytes(take(b, 8, "dimensions")?.try_into().unwrap());
        shape.push(usize::try_from(d).map_err(|_| Error::Format(format!("dimension {d} too large")))?);
    }
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("element count overflows".into()))?;
    let width = if kind == ScalarKind::Complex { 16 } else { 8 };
    if b.len() != count * width {
        return Err(Error::Format(format!(
            "expected {} data bytes for shape {shape:?}, found {}",
            count * width,
            b.len()
        )));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().unwrap());
    let data: Vec<C64> = b
        .chunks_exact(width)
        .map(|c| if width == 16 { C64::new(f(&c[..8]), f(&c[8..])) } else { C64::new(f(c), 0.0) })
        .collect();
    DenseTensor::from_parts(shape, data, kind).map_err(|e| Error::Format(e.to_string()))
}

pub fn write(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path.as_ref())?;
    write_to(t, std::io::BufWriter::new(f))
}

pub fn read(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    decode(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(t: &DenseTensor) -> Vec<u8> {
        let mut v = Vec::new();
        write_to(t, &mut v).unwrap();
        v
    }

    #[test]
    fn layout_of_small_real_tensor() {
        let t = DenseTensor::from_real(vec![2], vec![1.0, -0.5]).unwrap();
        let bytes = encode(&t);
        assert_eq!(&bytes[..5], b"TNT\x01\x00");
        assert_eq!(&bytes[5..9], &1u32.to_le_bytes());
        assert_eq!(&bytes[9..17], &2u64.to_le_bytes());
        assert_eq!(&bytes[17..25], &1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 33);
    }

    #[test]
    fn round_trip_keeps_bits() {
        let t = DenseTensor::from_complex(
            vec![1, 3],
            vec![C64::new(-0.0, f64::MIN_POSITIVE), C64::new(f64::NAN, 1e300), C64::new(1.0 / 3.0, -2.0)],
        )
        .unwrap();
        let back = decode(&encode(&t)).unwrap();
        assert_eq!(back.shape(), t.shape());
        assert_eq!(back.kind(), ScalarKind::Complex);
        for (a, b) in back.data().iter().zip(t.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let s = DenseTensor::scalar(C64::new(2.5, 0.0));
        assert_eq!(decode(&encode(&s)).unwrap(), s);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let t = DenseTensor::from_real(vec![2, 2], vec![1.0; 4]).unwrap();
        let good = encode(&t);
        assert!(decode(&good[..good.len() - 1]).is_err());
        let mut bad = good.clone();
        bad[3] = 2;
        assert!(decode(&bad).is_err());
        let mut bad = good.clone();
        bad[4] = 7;
        assert!(decode(&bad).is_err());
        let mut long = good;
        long.push(0);
        assert!(matches!(decode(&long), Err(Error::Format(_))));
    }
}
