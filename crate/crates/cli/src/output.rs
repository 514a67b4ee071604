//! Artifact rendering: set and model JSON, per-step statistics, projection
//! point clouds as CSV and SVG.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use czreach::reach::{canonical_ids, ReachResult, StepStats};
use czreach::{Cpmz, Cpz};
use serde::Serialize;

use crate::error::CliError;

/// Files produced by a run, kept in memory until written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.into(), bytes.into()));
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(p, _)| p == Path::new(path))
            .map(|(_, b)| b.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            let err = |e: std::io::Error| CliError::Write {
                path: path.display().to_string(),
                message: e.to_string(),
            };
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(err)?;
            }
            std::fs::write(&path, bytes).map_err(err)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SetStats {
    step: usize,
    generators: usize,
    constraints: usize,
    factors: usize,
}

#[derive(Serialize)]
struct SetsFile<'a> {
    experiment: &'a str,
    seed: u64,
    sets: &'a [Cpz],
    stats: Vec<SetStats>,
}

#[derive(Serialize)]
struct ModelEntry<'a> {
    step: usize,
    provenance: &'a [u64],
    model: &'a Cpmz,
}

fn stats_of(sets: &[Cpz]) -> Vec<SetStats> {
    sets.iter()
        .enumerate()
        .map(|(step, s)| SetStats {
            step,
            generators: s.num_generators(),
            constraints: s.num_constraints(),
            factors: s.num_factors(),
        })
        .collect()
}

/// `sets.json` and `model_history.json` with factors renumbered to `1..=K`.
/// Wall times are left out so that equal seeds give equal bytes.
pub fn sets_and_models(experiment: &str, result: &ReachResult) -> (String, String) {
    let models: Vec<Cpmz> = result
        .model_history
        .iter()
        .map(|m| m.model.set.clone())
        .collect();
    let (sets, models) = canonical_ids(&result.sets, &models);
    let sets_json = serde_json::to_string_pretty(&SetsFile {
        experiment,
        seed: result.seed,
        stats: stats_of(&sets),
        sets: &sets,
    })
    .expect("sets serialize");
    let history: Vec<ModelEntry> = result
        .model_history
        .iter()
        .zip(&models)
        .map(|(snap, model)| ModelEntry {
            step: snap.step,
            provenance: &snap.model.provenance,
            model,
        })
        .collect();
    let models_json = serde_json::to_string_pretty(&history).expect("models serialize");
    (sets_json, models_json)
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn stats_csv(stats: &[StepStats]) -> Vec<u8> {
    let header = ["step", "generators", "constraints", "factors", "millis"].map(String::from);
    csv_bytes(
        &header,
        stats.iter().map(|s| {
            vec![
                s.step.to_string(),
                s.generators.to_string(),
                s.constraints.to_string(),
                s.factors.to_string(),
                format!("{:.3}", s.millis),
            ]
        }),
    )
}

/// Sampled points of one projection: `(step, x, y)`.
pub struct Cloud {
    pub dims: [usize; 2],
    pub points: Vec<(usize, [f64; 2])>,
    /// Simulated states per trajectory, projected.
    pub traces: Vec<Vec<[f64; 2]>>,
}

impl Cloud {
    pub fn stem(&self) -> String {
        format!("x{}_x{}", self.dims[0], self.dims[1])
    }

    pub fn csv(&self) -> Vec<u8> {
        let header = vec![
            "step".to_string(),
            format!("x{}", self.dims[0]),
            format!("x{}", self.dims[1]),
        ];
        csv_bytes(
            &header,
            self.points
                .iter()
                .map(|(k, p)| vec![k.to_string(), p[0].to_string(), p[1].to_string()]),
        )
    }

    /// Static SVG: one color per step, simulated trajectories as black polylines.
    pub fn svg(&self, title: &str) -> Vec<u8> {
        const W: f64 = 640.0;
        const H: f64 = 480.0;
        const M: f64 = 50.0;
        const PALETTE: [&str; 8] = [
            "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
        ];
        let all = self
            .points
            .iter()
            .map(|(_, p)| *p)
            .chain(self.traces.iter().flatten().copied());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for [x, y] in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let d = (hi - lo).max(1e-12) * 0.05;
            (lo - d, hi + d)
        };
        let ((x0, x1), (y0, y1)) = (pad(x0, x1), pad(y0, y1));
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(
            s,
            "<!-- sampled point cloud of each reachable set, not an exact boundary -->"
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="25" text-anchor="middle" font-size="14">{title}</text>"#,
            W / 2.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">x{}  [{x0:.4}, {x1:.4}]</text>"#,
            W / 2.0,
            H - 15.0,
            self.dims[0]
        );
        let _ = writeln!(
            s,
            r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">x{}  [{y0:.4}, {y1:.4}]</text>"#,
            H / 2.0,
            H / 2.0,
            self.dims[1]
        );
        for (k, p) in &self.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1" fill="{}" fill-opacity="0.5"/>"#,
                sx(p[0]),
                sy(p[1]),
                PALETTE[k % PALETTE.len()]
            );
        }
        for t in &self.traces {
            let pts: Vec<String> = t
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1])))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="black" stroke-width="0.6"/>"#,
                pts.join(" ")
            );
        }
        s.push_str("</svg>\n");
        s.into_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> Cloud {
        Cloud {
            dims: [3, 4],
            points: vec![(0, [0.0, 1.0]), (1, [0.5, -1.0])],
            traces: vec![vec![[0.0, 0.0], [1.0, 1.0]]],
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let text = String::from_utf8(cloud().csv()).unwrap();
        assert_eq!(text, "step,x3,x4\n0,0,1\n1,0.5,-1\n");
        assert_eq!(cloud().stem(), "x3_x4");
    }

    #[test]
    fn svg_draws_every_point() {
        let text = String::from_utf8(cloud().svg("t")).unwrap();
        assert_eq!(text.matches("<circle").count(), 2);
        assert_eq!(text.matches("<polyline").count(), 1);
        assert!(text.contains("not an exact boundary"));
    }

    #[test]
    fn stats_rows() {
        let s = StepStats {
            step: 1,
            generators: 4,
            constraints: 0,
            factors: 3,
            millis: 0.25,
        };
        let text = String::from_utf8(stats_csv(&[s])).unwrap();
        assert_eq!(
            text,
            "step,generators,constraints,factors,millis\n1,4,0,3,0.250\n"
        );
    }

    #[test]
    fn artifacts_lookup() {
        let mut a = Artifacts::default();
        a.add("x/y.txt", "hi");
        assert_eq!(a.get("x/y.txt"), Some(&b"hi"[..]));
        assert_eq!(a.get("y.txt"), None);
    }
}
