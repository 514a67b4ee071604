//! CSV exchange for trajectories (`traj,k,x1..xn,u1..um`) and recorded noise
//! factors (`traj,k,sigma1..sigmap`).

use std::io::{Read, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::learning::{build_batch, DataBatch, Transition};

/// A state sequence with the inputs applied between consecutive states.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub id: u64,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn batch(&self) -> Result<DataBatch> {
        build_batch(&self.states, &self.inputs)
    }

    pub fn transitions(&self) -> Vec<Transition> {
        self.states
            .windows(2)
            .zip(&self.inputs)
            .map(|(w, u)| Transition {
                x: w[0].clone(),
                u: u.clone(),
                x_next: w[1].clone(),
            })
            .collect()
    }
}

/// Recorded noise-factor values for transition `k` of trajectory `traj`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRecord {
    pub traj: u64,
    pub k: usize,
    pub sigma: Vec<f64>,
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

pub fn write_trajectories<W: Write>(w: W, trajs: &[Trajectory]) -> Result<()> {
    let first = trajs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trajectories".into()))?;
    let nx = first.states.first().map_or(0, DVector::len);
    let nu = first.inputs.first().map_or(0, DVector::len);
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["traj".to_string(), "k".to_string()];
    header.extend((1..=nx).map(|i| format!("x{i}")));
    header.extend((1..=nu).map(|i| format!("u{i}")));
    out.write_record(&header).map_err(io_err)?;
    for t in trajs {
        for (k, x) in t.states.iter().enumerate() {
            let mut row = vec![t.id.to_string(), k.to_string()];
            row.extend(x.iter().map(|v| format!("{v:?}")));
            match t.inputs.get(k) {
                Some(u) => row.extend(u.iter().map(|v| format!("{v:?}"))),
                None => row.extend(std::iter::repeat_n(String::new(), nu)),
            }
            out.write_record(&row).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Io(format!("bad number {s:?}")))
}

pub fn read_trajectories<R: Read>(r: R) -> Result<Vec<Trajectory>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(io_err)?.clone();
    if header.get(0) != Some("traj") || header.get(1) != Some("k") {
        return Err(Error::Io("header must start with traj,k".into()));
    }
    let nx = header.iter().filter(|h| h.starts_with('x')).count();
    let nu = header.iter().filter(|h| h.starts_with('u')).count();
    let mut out: Vec<Trajectory> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(io_err)?;
        let id: u64 = rec[0].trim().parse().map_err(io_err)?;
        let k: usize = rec[1].trim().parse().map_err(io_err)?;
        let x = (0..nx)
            .map(|i| parse_f64(&rec[2 + i]))
            .collect::<Result<Vec<_>>>()?;
        let u_cells: Vec<&str> = (0..nu).map(|i| &rec[2 + nx + i]).collect();
        if out.last().is_none_or(|t| t.id != id) {
            out.push(Trajectory {
                id,
                states: Vec::new(),
                inputs: Vec::new(),
            });
        }
        let t = out.last_mut().expect("just pushed");
        if k != t.states.len() {
            return Err(Error::Io(format!(
                "trajectory {id}: expected k = {}, got {k}",
                t.states.len()
            )));
        }
        t.states.push(DVector::from_vec(x));
        if u_cells.iter().all(|c| !c.trim().is_empty()) {
            let u = u_cells
                .iter()
                .map(|c| parse_f64(c))
                .collect::<Result<Vec<_>>>()?;
            t.inputs.push(DVector::from_vec(u));
        }
    }
    Ok(out)
}

pub fn write_noise_sidecar<W: Write>(w: W, rows: &[NoiseRecord]) -> Result<()> {
    let p = rows.first().map_or(0, |r| r.sigma.len());
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["traj".to_string(), "k".to_string()];
    header.extend((1..=p).map(|i| format!("sigma{i}")));
    out.write_record(&header).map_err(io_err)?;
    for r in rows {
        let mut row = vec![r.traj.to_string(), r.k.to_string()];
        row.extend(r.sigma.iter().map(|v| format!("{v:?}")));
        out.write_record(&row).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_noise_sidecar<R: Read>(r: R) -> Result<Vec<NoiseRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(io_err)?;
        out.push(NoiseRecord {
            traj: rec[0].trim().parse().map_err(io_err)?,
            k: rec[1].trim().parse().map_err(io_err)?,
            sigma: rec
                .iter()
                .skip(2)
                .map(parse_f64)
                .collect::<Result<Vec<_>>>()?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trip() {
        let t = Trajectory {
            id: 3,
            states: vec![
                DVector::from_vec(vec![0.1, 1.0 / 3.0]),
                DVector::from_vec(vec![2.0, -1e-17]),
            ],
            inputs: vec![DVector::from_vec(vec![0.25])],
        };
        let mut buf = Vec::new();
        write_trajectories(&mut buf, std::slice::from_ref(&t)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("traj,k,x1,x2,u1\n"));
        assert_eq!(read_trajectories(buf.as_slice()).unwrap(), vec![t]);
    }

    #[test]
    fn sidecar_round_trip() {
        let rows = vec![
            NoiseRecord {
                traj: 0,
                k: 0,
                sigma: vec![0.5],
            },
            NoiseRecord {
                traj: 0,
                k: 1,
                sigma: vec![-0.125],
            },
        ];
        let mut buf = Vec::new();
        write_noise_sidecar(&mut buf, &rows).unwrap();
        assert_eq!(read_noise_sidecar(buf.as_slice()).unwrap(), rows);
    }
}
