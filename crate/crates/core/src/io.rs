//! Little-endian binary formats for trajectories, snapshot matrices and
//! reduced bases.
//!
//! Trajectory (`GKSTRAJ1`):
//! `M: u32, count: u32, dt_snap: f64, gamma: f64, L: f64, J: u32,
//! A: [f64; J], phi: [f64; J]`, then `count` snapshots of `M` values each.
//!
//! Snapshot matrix (`GKSSNAP1`):
//! `kind: u8, M: u32, cols: u64`, per-column `(gamma: f64, traj: u32, t: f64)`,
//! then the column-major `M x cols` payload.
//!
//! Basis (`GKSBAS1`):
//! `M: u32, r: u32, n: u32, len: u32, sigma: [f64; len]`, column-major `U`
//! (`M x r`), and when `n > 0`: `eta: [u32; n]`, column-major `Y` (`M x n`)
//! and the column-major `P^T Y` block (`n x n`).

use std::fs;
use std::io::{self, Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial::InitialConditionSpec;
use crate::rom::{DeimOperator, PodBasis, ReducedModel};
use crate::simulate::Trajectory;
use crate::snapshots::{ColumnMeta, SnapshotKind, SnapshotMatrix};

pub const TRAJECTORY_MAGIC: &[u8; 8] = b"GKSTRAJ1";
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"GKSSNAP1";
pub const BASIS_MAGIC: &[u8; 7] = b"GKSBAS1";

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn truncated(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

fn check_magic(cur: &mut Cursor<&[u8]>, magic: &[u8]) -> Result<()> {
    let mut buf = vec![0u8; magic.len()];
    cur.read_exact(&mut buf).map_err(truncated)?;
    if buf != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&buf),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

/// Checks that exactly `bytes` remain after the header.
fn expect_remaining(cur: &Cursor<&[u8]>, bytes: u64) -> Result<()> {
    let remaining = cur.get_ref().len() as u64 - cur.position();
    if remaining < bytes {
        return Err(Error::Format(format!(
            "payload holds {remaining} bytes, header announces {bytes}"
        )));
    }
    if remaining > bytes {
        return Err(Error::Format(format!(
            "{} trailing bytes after the announced payload",
            remaining - bytes
        )));
    }
    Ok(())
}

fn read_f64s(cur: &mut Cursor<&[u8]>, n: usize) -> Result<Vec<f64>> {
    let mut v = vec![0.0; n];
    cur.read_f64_into::<LE>(&mut v).map_err(truncated)?;
    Ok(v)
}

fn write_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for &v in values {
        out.write_f64::<LE>(v).expect("writing to a Vec cannot fail");
    }
}

fn u32_field(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::invalid(format!("{what} = {value} does not fit in u32")))
}

pub fn encode_trajectory(traj: &Trajectory) -> Result<Vec<u8>> {
    let m = traj.grid.num_points();
    let (amps, phases) = traj
        .ic
        .as_ref()
        .map_or((&[][..], &[][..]), |ic| (&ic.amplitudes[..], &ic.phases[..]));
    let mut out = Vec::with_capacity(64 + 16 * amps.len() + 8 * traj.data.len());
    out.extend_from_slice(TRAJECTORY_MAGIC);
    out.write_u32::<LE>(u32_field(m, "M")?)?;
    out.write_u32::<LE>(u32_field(traj.len(), "snapshot count")?)?;
    out.write_f64::<LE>(traj.record_every)?;
    out.write_f64::<LE>(traj.gamma)?;
    out.write_f64::<LE>(traj.grid.length())?;
    out.write_u32::<LE>(u32_field(amps.len(), "J")?)?;
    write_f64s(&mut out, amps);
    write_f64s(&mut out, phases);
    write_f64s(&mut out, &traj.data);
    Ok(out)
}

/// Decodes a trajectory; the initial state is re-evaluated from the stored
/// initial-condition coefficients (zero when none were stored).
pub fn decode_trajectory(bytes: &[u8]) -> Result<Trajectory> {
    let mut cur = Cursor::new(bytes);
    check_magic(&mut cur, TRAJECTORY_MAGIC)?;
    let m = cur.read_u32::<LE>().map_err(truncated)? as usize;
    let count = cur.read_u32::<LE>().map_err(truncated)? as usize;
    let record_every = cur.read_f64::<LE>().map_err(truncated)?;
    let gamma = cur.read_f64::<LE>().map_err(truncated)?;
    let length = cur.read_f64::<LE>().map_err(truncated)?;
    let j = cur.read_u32::<LE>().map_err(truncated)? as usize;
    let grid = Grid::new(m, length).map_err(|e| Error::Format(e.to_string()))?;
    expect_remaining(&cur, 8 * (2 * j as u64 + count as u64 * m as u64))?;
    let amplitudes = read_f64s(&mut cur, j)?;
    let phases = read_f64s(&mut cur, j)?;
    let data = read_f64s(&mut cur, count * m)?;
    let ic = if j > 0 {
        Some(InitialConditionSpec::new(amplitudes, phases).map_err(|e| Error::Format(e.to_string()))?)
    } else {
        None
    };
    let initial = ic.as_ref().map_or_else(|| vec![0.0; m], |ic| ic.evaluate(&grid));
    Ok(Trajectory { gamma, grid, record_every, ic, initial, data })
}

pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    write_atomic(path, &encode_trajectory(traj)?)
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    decode_trajectory(&fs::read(path)?)
}

fn kind_code(kind: SnapshotKind) -> u8 {
    match kind {
        SnapshotKind::State => 0,
        SnapshotKind::Nonlinear => 1,
    }
}

pub fn encode_snapshots(m: &SnapshotMatrix) -> Result<Vec<u8>> {
    let (rows, cols) = m.data.shape();
    let mut out = Vec::with_capacity(21 + cols * 20 + rows * cols * 8);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.write_u8(kind_code(m.kind))?;
    out.write_u32::<LE>(u32_field(rows, "M")?)?;
    out.write_u64::<LE>(cols as u64)?;
    for c in &m.columns {
        out.write_f64::<LE>(c.gamma)?;
        out.write_u32::<LE>(c.trajectory)?;
        out.write_f64::<LE>(c.time)?;
    }
    write_f64s(&mut out, m.data.as_slice());
    Ok(out)
}

pub fn decode_snapshots(bytes: &[u8]) -> Result<SnapshotMatrix> {
    let mut cur = Cursor::new(bytes);
    check_magic(&mut cur, SNAPSHOT_MAGIC)?;
    let kind = match cur.read_u8().map_err(truncated)? {
        0 => SnapshotKind::State,
        1 => SnapshotKind::Nonlinear,
        k => return Err(Error::Format(format!("unknown snapshot kind {k}"))),
    };
    let rows = cur.read_u32::<LE>().map_err(truncated)? as u64;
    let cols = cur.read_u64::<LE>().map_err(truncated)?;
    let payload = cols
        .checked_mul(20)
        .and_then(|meta| rows.checked_mul(cols)?.checked_mul(8)?.checked_add(meta))
        .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
    expect_remaining(&cur, payload)?;
    let (rows, cols) = (rows as usize, cols as usize);
    let mut columns = Vec::with_capacity(cols);
    for _ in 0..cols {
        columns.push(ColumnMeta {
            gamma: cur.read_f64::<LE>().map_err(truncated)?,
            trajectory: cur.read_u32::<LE>().map_err(truncated)?,
            time: cur.read_f64::<LE>().map_err(truncated)?,
        });
    }
    let data = read_f64s(&mut cur, rows * cols)?;
    SnapshotMatrix::new(kind, DMatrix::from_vec(rows, cols, data), columns)
}

pub fn save_snapshots(m: &SnapshotMatrix, path: &Path) -> Result<()> {
    write_atomic(path, &encode_snapshots(m)?)
}

pub fn load_snapshots(path: &Path) -> Result<SnapshotMatrix> {
    decode_snapshots(&fs::read(path)?)
}

pub fn encode_basis(model: &ReducedModel) -> Result<Vec<u8>> {
    let basis = &model.basis;
    let (m, r) = basis.vectors.shape();
    let n = model.deim.as_ref().map_or(0, |d| d.size());
    let mut out = Vec::new();
    out.extend_from_slice(BASIS_MAGIC);
    out.write_u32::<LE>(u32_field(m, "M")?)?;
    out.write_u32::<LE>(u32_field(r, "r")?)?;
    out.write_u32::<LE>(u32_field(n, "n")?)?;
    out.write_u32::<LE>(u32_field(basis.singular_values.len(), "spectrum length")?)?;
    write_f64s(&mut out, &basis.singular_values);
    write_f64s(&mut out, basis.vectors.as_slice());
    if let Some(deim) = &model.deim {
        for &i in deim.indices() {
            out.write_u32::<LE>(u32_field(i, "DEIM index")?)?;
        }
        write_f64s(&mut out, deim.basis().as_slice());
        write_f64s(&mut out, deim.sampled_basis().as_slice());
    }
    Ok(out)
}

pub fn decode_basis(bytes: &[u8]) -> Result<ReducedModel> {
    let mut cur = Cursor::new(bytes);
    check_magic(&mut cur, BASIS_MAGIC)?;
    let m = cur.read_u32::<LE>().map_err(truncated)? as u64;
    let r = cur.read_u32::<LE>().map_err(truncated)? as u64;
    let n = cur.read_u32::<LE>().map_err(truncated)? as u64;
    let len = cur.read_u32::<LE>().map_err(truncated)? as u64;
    if r == 0 || r > m || n > m {
        return Err(Error::Format(format!("inconsistent basis header M={m}, r={r}, n={n}")));
    }
    expect_remaining(&cur, 8 * (len + m * r) + n * 4 + 8 * (m * n + n * n))?;
    let (m, r, n, len) = (m as usize, r as usize, n as usize, len as usize);
    let singular_values = read_f64s(&mut cur, len)?;
    let vectors = DMatrix::from_vec(m, r, read_f64s(&mut cur, m * r)?);
    let basis = PodBasis {
        vectors,
        singular_values,
        rule: None,
        rule_satisfied: true,
    };
    let deim = if n > 0 {
        let mut indices = Vec::with_capacity(n);
        for _ in 0..n {
            indices.push(cur.read_u32::<LE>().map_err(truncated)? as usize);
        }
        let y = DMatrix::from_vec(m, n, read_f64s(&mut cur, m * n)?);
        let sampled = DMatrix::from_vec(n, n, read_f64s(&mut cur, n * n)?);
        let deim = DeimOperator::with_indices(y, indices).map_err(|e| Error::Format(e.to_string()))?;
        if deim.sampled_basis() != &sampled {
            return Err(Error::Format("stored P^T Y block does not match Y at the DEIM indices".into()));
        }
        Some(deim)
    } else {
        None
    };
    Ok(ReducedModel { basis, deim })
}

pub fn save_basis(model: &ReducedModel, path: &Path) -> Result<()> {
    write_atomic(path, &encode_basis(model)?)
}

pub fn load_basis(path: &Path) -> Result<ReducedModel> {
    decode_basis(&fs::read(path)?)
}
