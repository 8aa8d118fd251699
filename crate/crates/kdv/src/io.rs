//! Trajectory CSV export and binary state snapshots.
//!
//! Snapshot layout: 16-byte header (`b"KDVS"`, version `u16`, node count `u32`,
//! 6 reserved zero bytes), then the interior values as little-endian `f64`.

use std::io::{Read, Write};

use crate::error::KdvError;
use crate::evolve::StateTrajectory;
use crate::norms::discrete_norm;

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"KDVS";
pub const SNAPSHOT_VERSION: u16 = 1;

/// Writes `t, flux, l2_norm, h1_norm, h3_norm` for every stored state.
pub fn write_trajectory_csv<W: Write>(traj: &StateTrajectory, out: W) -> Result<(), KdvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "flux", "l2_norm", "h1_norm", "h3_norm"])?;
    for (&j, u) in traj.stored_steps.iter().zip(&traj.states) {
        let t = j as f64 * traj.dt;
        let row = [
            t,
            traj.flux[j],
            discrete_norm(u, 0, &traj.grid)?,
            discrete_norm(u, 1, &traj.grid)?,
            discrete_norm(u, 3, &traj.grid)?,
        ];
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot<W: Write>(u: &[f64], mut out: W) -> Result<(), KdvError> {
    let n = u32::try_from(u.len()).map_err(|_| KdvError::BadSnapshot("state too long".into()))?;
    let mut header = [0u8; 16];
    header[..4].copy_from_slice(&SNAPSHOT_MAGIC);
    header[4..6].copy_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    header[6..10].copy_from_slice(&n.to_le_bytes());
    out.write_all(&header)?;
    for v in u {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<Vec<f64>, KdvError> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header).map_err(|e| KdvError::BadSnapshot(format!("header: {e}")))?;
    if header[..4] != SNAPSHOT_MAGIC {
        return Err(KdvError::BadSnapshot("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != SNAPSHOT_VERSION {
        return Err(KdvError::BadSnapshot(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes([header[6], header[7], header[8], header[9]]) as usize;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * n {
        return Err(KdvError::BadSnapshot(format!("expected {} payload bytes, found {}", 8 * n, bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}
