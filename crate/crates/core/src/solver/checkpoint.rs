//! Flat binary snapshots of a solver state.
//!
//! Layout, all little-endian: the 16-byte prefix [`CHECKPOINT_MAGIC`], box
//! length (f64), modes per axis (u64), time (f64), step index (u64), step
//! size (f64), then for every lattice point in lexicographic order of
//! `(m0, m1, m2)`, each running from `-n/2` to `n/2 - 1`, the three complex
//! coefficients as `(re, im)` f64 pairs.

use std::io::{Read, Write};

use num_complex::Complex;

use super::{SolverError, SolverState};
use crate::spectral::{GridSpec, SpectralVectorField};
use crate::Real;

/// Eight-byte tag, four-byte format version, four reserved bytes.
pub const CHECKPOINT_MAGIC: [u8; 16] = *b"NSAUDCKP\x01\x00\x00\x00\x00\x00\x00\x00";

fn lexicographic<T: Real>(grid: &GridSpec<T>) -> impl Iterator<Item = usize> + '_ {
    let half = (grid.n() / 2) as i64;
    let range = move || -half..half;
    range().flat_map(move |m0| {
        range().flat_map(move |m1| {
            range().map(move |m2| {
                grid.flat(
                    grid.storage_index(m0),
                    grid.storage_index(m1),
                    grid.storage_index(m2),
                )
            })
        })
    })
}

pub fn write_checkpoint<T: Real, W: Write>(
    state: &SolverState<T>,
    mut w: W,
) -> Result<(), SolverError> {
    let grid = state.u.grid();
    let mut buf = Vec::with_capacity(56 + grid.len() * 48);
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&grid.box_length().as_f64().to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    buf.extend_from_slice(&state.t.as_f64().to_le_bytes());
    buf.extend_from_slice(&state.step_index.to_le_bytes());
    buf.extend_from_slice(&state.dt.as_f64().to_le_bytes());
    for idx in lexicographic(grid) {
        for z in state.u.at(idx) {
            buf.extend_from_slice(&z.re.as_f64().to_le_bytes());
            buf.extend_from_slice(&z.im.as_f64().to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(data: &[u8], pos: &mut usize) -> Result<[u8; N], SolverError> {
    let end = *pos + N;
    let bytes = data
        .get(*pos..end)
        .ok_or_else(|| SolverError::Checkpoint(format!("truncated at byte {}", *pos)))?;
    *pos = end;
    Ok(bytes.try_into().unwrap())
}

pub fn read_checkpoint<T: Real, R: Read>(mut r: R) -> Result<SolverState<T>, SolverError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut pos = 0;
    let magic: [u8; 16] = take(&data, &mut pos)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(SolverError::Checkpoint(
            "bad magic or unsupported version".into(),
        ));
    }
    let f64_at = |pos: &mut usize| take::<8>(&data, pos).map(f64::from_le_bytes);
    let box_length = f64_at(&mut pos)?;
    let n = u64::from_le_bytes(take(&data, &mut pos)?) as usize;
    let t = f64_at(&mut pos)?;
    let step_index = u64::from_le_bytes(take(&data, &mut pos)?);
    let dt = f64_at(&mut pos)?;
    let grid = GridSpec::new(T::lit(box_length), n)?;
    let expected = pos + grid.len() * 48;
    if data.len() != expected {
        return Err(SolverError::Checkpoint(format!(
            "expected {expected} bytes for n = {n}, found {}",
            data.len()
        )));
    }
    let mut u = SpectralVectorField::zeros(grid.clone());
    for idx in lexicographic(&grid) {
        let mut v = [Complex::default(); 3];
        for z in v.iter_mut() {
            let re = f64_at(&mut pos)?;
            let im = f64_at(&mut pos)?;
            *z = Complex::new(T::lit(re), T::lit(im));
        }
        u.set(idx, v);
    }
    Ok(SolverState {
        t: T::lit(t),
        u,
        step_index,
        dt: T::lit(dt),
        max_speed: T::zero(),
    })
}
