use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::matgen::MatrixKind;
use crate::solver::SolverKind;

/// Summary of the successful records of one (matrix kind, size, solver)
/// group. `std` is the sample standard deviation; quantiles interpolate
/// linearly between order statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub matrix: MatrixKind,
    pub size: usize,
    pub solver: SolverKind,
    pub count: usize,
    pub failed: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Groups records and summarizes each group. Groups without a single
/// successful record are left out. Output is sorted by kind, size, solver.
pub fn aggregate(records: &[SweepRecord]) -> Vec<GroupStats> {
    let mut groups: BTreeMap<(&str, usize, SolverKind), (MatrixKind, Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let entry = groups
            .entry((r.matrix.as_str(), r.size, r.solver))
            .or_insert_with(|| (r.matrix, Vec::new(), 0));
        match r.relative_error {
            Some(e) => entry.1.push(e),
            None => entry.2 += 1,
        }
    }
    groups
        .into_iter()
        .filter(|(_, (_, v, _))| !v.is_empty())
        .map(|((_, size, solver), (matrix, mut v, failed))| {
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            GroupStats {
                matrix,
                size,
                solver,
                count: v.len(),
                failed,
                mean,
                std,
                min: v[0],
                q25: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q75: quantile(&v, 0.75),
                max: v[v.len() - 1],
            }
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
