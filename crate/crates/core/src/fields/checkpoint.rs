//! Binary checkpoint container for [`RandomFieldState`].
//!
//! Layout, all little-endian: magic `RFHCKPT1`; u32 d; f64 L; u32 N;
//! u64 mode count; u64 extra count; f64 t; f64 mass shift. Then per mode the
//! frequency triple ξ (3 × f64), the amplitude (f64) and z_k as N^d complex
//! values (re, im) in row-major order; then each extra field likewise.

use super::{Background, ModeSet, RandomFieldState, SpectralGrid};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};

const MAGIC: &[u8; 8] = b"RFHCKPT1";

fn put_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_field<W: Write>(w: &mut W, field: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(field.len() * 16);
    for z in field {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    Ok(w.write_all(&buf)?)
}

pub fn write_checkpoint<W: Write>(state: &RandomFieldState, mut w: W) -> Result<()> {
    let grid = state.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    put_f64(&mut w, grid.length())?;
    w.write_all(&(grid.points() as u32).to_le_bytes())?;
    w.write_all(&(state.background.mode_count() as u64).to_le_bytes())?;
    w.write_all(&(state.extras.len() as u64).to_le_bytes())?;
    put_f64(&mut w, state.t)?;
    put_f64(&mut w, state.background.mass_shift)?;
    for (k, mode) in state.background.modes.modes().iter().enumerate() {
        for x in mode.xi {
            put_f64(&mut w, x)?;
        }
        put_f64(&mut w, mode.amplitude)?;
        put_field(&mut w, &state.z_field(k))?;
    }
    for e in &state.extras {
        put_field(&mut w, e)?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated checkpoint: {e}")))?;
        Ok(b)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn field(&mut self, n: usize) -> Result<Vec<Complex64>> {
        let mut raw = vec![0u8; n * 16];
        self.inner.read_exact(&mut raw).map_err(|e| Error::Format(format!("truncated checkpoint: {e}")))?;
        Ok(raw
            .chunks_exact(16)
            .map(|c| Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
            .collect())
    }
}

pub fn read_checkpoint<R: Read>(r: R) -> Result<RandomFieldState> {
    let mut r = Reader { inner: r };
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::Format("not a checkpoint file".into()));
    }
    let dim = r.u32()? as usize;
    let length = r.f64()?;
    let points = r.u32()? as usize;
    let grid = SpectralGrid::new(dim, length, points).map_err(|e| Error::Format(format!("bad checkpoint header: {e}")))?;
    let mode_count = r.u64()? as usize;
    let extra_count = r.u64()? as usize;
    let t = r.f64()?;
    let mass_shift = r.f64()?;
    let mut entries = Vec::with_capacity(mode_count);
    let mut z = Vec::with_capacity(mode_count);
    for _ in 0..mode_count {
        let xi = [r.f64()?, r.f64()?, r.f64()?];
        let amplitude = r.f64()?;
        entries.push((xi.map(|x| (x / grid.dxi()).round() as i64), amplitude));
        z.push(r.field(grid.len())?);
    }
    let extras = (0..extra_count).map(|_| r.field(grid.len())).collect::<Result<Vec<_>>>()?;
    let modes = ModeSet::from_lattice(&grid, &entries).map_err(|e| Error::Format(format!("bad checkpoint modes: {e}")))?;
    let background = Background::with_mass_shift(grid, modes, mass_shift)?;
    RandomFieldState::new(background, t, Some(z), extras)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{compute_density, PerturbationShape};

    #[test]
    fn round_trip_preserves_state() {
        let grid = SpectralGrid::new(2, 9.0, 8).unwrap();
        let modes = ModeSet::from_lattice(&grid, &[([1, 0, 0], 0.5), ([-1, 3, 0], 0.25)]).unwrap();
        let bg = Background::with_mass_shift(grid.clone(), modes, -0.2).unwrap();
        let shape = PerturbationShape::Random { bandwidth: 1.0, amplitude: 0.1, seed: 3 };
        let z = vec![shape.sample(&grid).unwrap(), vec![Complex64::new(0.0, 0.01); grid.len()]];
        let state = RandomFieldState::new(bg, 2.5, Some(z), vec![shape.sample(&grid).unwrap()]).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&state, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 8 + 4 + 8 + 4 + 8 + 8 + 8 + 8 + 2 * (32 + 16 * 64) + 16 * 64);
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(back.t, 2.5);
        assert_eq!(back.background.modes, state.background.modes);
        let (a, b) = (compute_density(&state), compute_density(&back));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(read_checkpoint(&bytes[..40]).is_err());
        assert!(read_checkpoint(&b"garbage!"[..]).is_err());
    }
}
