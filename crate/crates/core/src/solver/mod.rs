//! Linear-system solvers built from analog INV and MVM operations: the
//! original single-array INV, one-stage BlockAMC, and its recursive
//! multi-stage form.

mod cascade;
mod partition;

use serde::{Deserialize, Serialize};

use crate::analog::CircuitConfig;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::mapping::MapConfig;
use crate::metrics::relative_error;

pub use cascade::{ArrayInfo, NestedTrace, StageTrace};
pub use partition::{default_split, partition, schur_complement, BlockPartition};

use cascade::{PlanInv, Programmer, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Original,
    OneStage,
    TwoStage,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Original, SolverKind::OneStage, SolverKind::TwoStage];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Original => "original",
            SolverKind::OneStage => "one_stage",
            SolverKind::TwoStage => "two_stage",
        }
    }

    /// Number of partitioning stages.
    pub fn depth(self) -> usize {
        match self {
            SolverKind::Original => 0,
            SolverKind::OneStage => 1,
            SolverKind::TwoStage => 2,
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(SolverKind::Original),
            "one_stage" | "one-stage" => Ok(SolverKind::OneStage),
            "two_stage" | "two-stage" => Ok(SolverKind::TwoStage),
            other => Err(Error::Config(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub map: MapConfig,
    pub circuit: CircuitConfig,
    /// Largest physical array. Defaults to the size of the largest INV
    /// block the chosen depth produces.
    pub array_max: Option<usize>,
    /// Top-level split index, default `⌈n/2⌉`.
    pub k: Option<usize>,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            map: MapConfig::default(),
            circuit: CircuitConfig::default(),
            array_max: None,
            k: None,
            seed: 0,
        }
    }
}

impl SolveConfig {
    /// Noise-free mapping on the ideal engine.
    pub fn ideal() -> Self {
        SolveConfig {
            map: MapConfig::ideal(),
            circuit: CircuitConfig::ideal(),
            ..SolveConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        self.circuit.validate()?;
        if self.array_max == Some(0) {
            return Err(Error::Config("array_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Depth and physical array size for one solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagePlan {
    pub depth: usize,
    pub array_max: usize,
}

impl StagePlan {
    /// With no explicit `array_max`, uses `⌈n/2⌉` iterated `depth` times,
    /// which is the largest INV block a default split yields.
    pub fn for_size(n: usize, depth: usize, array_max: Option<usize>) -> StagePlan {
        let array_max = array_max.unwrap_or_else(|| (0..depth).fold(n, |m, _| if m > 1 { default_split(m) } else { m }));
        StagePlan { depth, array_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub n: usize,
    pub plan: StagePlan,
    pub seed: u64,
    pub x_hat: Vector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<f64>,
    /// Intermediate vectors of the top-level cascade; absent for the
    /// original solver.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<StageTrace>,
    pub arrays: Vec<ArrayInfo>,
    pub map: MapConfig,
    pub circuit: CircuitConfig,
}

impl SolveReport {
    /// Fills `relative_error` against a reference solution.
    pub fn attach_reference(&mut self, x_ref: &[f64]) -> Result<f64> {
        let e = relative_error(x_ref, &self.x_hat)?;
        self.relative_error = Some(e);
        Ok(e)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Solves `A·x = b` with a single INV on the whole matrix.
pub fn solve_original(a: &Matrix, b: &[f64], cfg: &SolveConfig) -> Result<SolveReport> {
    solve_multi_stage(a, b, 0, cfg)
}

/// One-stage BlockAMC: two INV arrays (`A₁`, `A₄ₛ`) and two MVM arrays.
pub fn solve_one_stage(a: &Matrix, b: &[f64], cfg: &SolveConfig) -> Result<SolveReport> {
    solve_multi_stage(a, b, 1, cfg)
}

/// Dispatches on [`SolverKind`].
pub fn solve(kind: SolverKind, a: &Matrix, b: &[f64], cfg: &SolveConfig) -> Result<SolveReport> {
    solve_multi_stage(a, b, kind.depth(), cfg)
}

/// BlockAMC applied recursively: each INV block of a stage is itself solved
/// by a block cascade, `depth` levels deep. Depth 0 is the original solver.
pub fn solve_multi_stage(a: &Matrix, b: &[f64], depth: usize, cfg: &SolveConfig) -> Result<SolveReport> {
    run(a, b, depth, cfg, RunOptions::default())
}

fn run(a: &Matrix, b: &[f64], depth: usize, cfg: &SolveConfig, mut opts: RunOptions) -> Result<SolveReport> {
    cfg.validate()?;
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} system is not square", a.rows(), a.cols())));
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs has {} entries for n = {n}", b.len())));
    }
    let tree = PlanInv::build(a, depth, cfg.array_max.unwrap_or(usize::MAX), cfg.k)?;
    let plan = StagePlan {
        depth,
        array_max: cfg.array_max.unwrap_or_else(|| tree.largest_leaf()),
    };
    let global_scale = if cfg.map.global_normalization {
        Some(tree.max_abs())
    } else {
        None
    };
    let programmer = Programmer {
        map: &cfg.map,
        circuit: &cfg.circuit,
        global_scale,
        array_max: plan.array_max,
    };
    let root = if depth == 0 { "a" } else { "" };
    let unit = programmer.program_inv(&tree, cfg.seed, root)?;
    opts.dac_bits = cfg.map.dac_bits;
    opts.adc_bits = cfg.map.adc_bits;
    let (x_hat, trace) = unit.solve(b, &opts)?;
    let mut arrays = Vec::new();
    unit.arrays(root, &mut arrays);
    let solver = match depth {
        0 => "original".to_string(),
        1 => "one_stage".to_string(),
        2 => "two_stage".to_string(),
        d => format!("multi_stage_{d}"),
    };
    Ok(SolveReport {
        solver,
        n,
        plan,
        seed: cfg.seed,
        x_hat,
        relative_error: None,
        trace,
        arrays,
        map: cfg.map.clone(),
        circuit: cfg.circuit.clone(),
    })
}

/// `−A·v` on arrays of at most `array_max` rows and columns, summing tile
/// partial products digitally. Zero tiles are not programmed.
pub fn block_mvm(a: &Matrix, v: &[f64], array_max: usize, cfg: &SolveConfig) -> Result<Vector> {
    cfg.validate()?;
    if array_max == 0 {
        return Err(Error::Config("array_max must be >= 1".into()));
    }
    let programmer = Programmer {
        map: &cfg.map,
        circuit: &cfg.circuit,
        global_scale: cfg.map.global_normalization.then(|| a.max_abs()),
        array_max,
    };
    programmer.program_tiled(a, cfg.seed, "mvm")?.apply(v)
}

#[cfg(test)]
mod tests {
    use super::cascade::SignPoint;
    use super::*;
    use crate::linalg::solve_dense;
    use crate::matgen::{generate, gen_rhs, GenSpec, MatrixKind};

    fn hand_example() -> (Matrix, Vec<f64>) {
        (Matrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap(), vec![1.0, 0.0])
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn hand_traced_cascade() {
        let (a, b) = hand_example();
        let r = solve_one_stage(&a, &b, &SolveConfig { k: Some(1), ..SolveConfig::ideal() }).unwrap();
        let t = r.trace.as_ref().unwrap();
        let tol = 1e-12;
        assert!(close(&t.y_t(), &[1.0], tol));
        assert!(close(&t.g_t, &[0.5], tol));
        assert!(close(t.schur.data(), &[0.75], tol));
        assert!(close(&t.z, &[-2.0 / 3.0], tol));
        assert!(close(&t.f_t(), &[-1.0 / 3.0], tol));
        assert!(close(&t.f_s, &[4.0 / 3.0], tol));
        assert!(close(&t.y(), &[4.0 / 3.0], tol));
        assert!(close(&r.x_hat, &[4.0 / 3.0, -2.0 / 3.0], tol));
    }

    #[test]
    fn ideal_solvers_match_dense() {
        let a = generate(&GenSpec::new(MatrixKind::Wishart, 12, 3)).unwrap();
        let b = gen_rhs(12, 4).unwrap();
        let x = solve_dense(&a, &b).unwrap();
        for kind in SolverKind::ALL {
            let r = solve(kind, &a, &b, &SolveConfig::ideal()).unwrap();
            assert!(close(&r.x_hat, &x, 1e-9), "{kind}");
        }
        for depth in 3..5 {
            let r = solve_multi_stage(&a, &b, depth, &SolveConfig::ideal()).unwrap();
            assert!(close(&r.x_hat, &x, 1e-9));
        }
    }

    #[test]
    fn every_sign_is_load_bearing() {
        let (a, b) = hand_example();
        let cfg = SolveConfig { k: Some(1), ..SolveConfig::ideal() };
        let good = solve_one_stage(&a, &b, &cfg).unwrap().x_hat;
        for point in [SignPoint::NegYt, SignPoint::Gt, SignPoint::Z, SignPoint::NegFt, SignPoint::NegY] {
            let opts = RunOptions { flip: Some(point), ..Default::default() };
            let bad = run(&a, &b, 1, &cfg, opts).unwrap().x_hat;
            assert!(!close(&bad, &good, 1e-6), "{point:?}");
        }
    }

    #[test]
    fn array_counts_and_sizes() {
        let a = generate(&GenSpec::new(MatrixKind::Wishart, 8, 1)).unwrap();
        let b = gen_rhs(8, 2).unwrap();
        let one = solve_one_stage(&a, &b, &SolveConfig::ideal()).unwrap();
        assert_eq!(one.plan.array_max, 4);
        assert_eq!(one.arrays.len(), 4);
        assert!(one.arrays.iter().all(|a| a.rows == 4 && a.cols == 4));
        let two = solve(SolverKind::TwoStage, &a, &b, &SolveConfig::ideal()).unwrap();
        assert_eq!(two.plan.array_max, 2);
        // Two nested cascades of four arrays each, plus A₂ and A₃ tiled 2x2.
        assert_eq!(two.arrays.len(), 4 + 4 + 4 + 4);
        assert!(two.arrays.iter().all(|a| a.rows == 2 && a.cols == 2));
        let t = two.trace.unwrap();
        let steps: Vec<_> = t.nested.iter().map(|n| n.step.as_str()).collect();
        assert_eq!(steps, ["step1/a1", "step3/a4s", "step5/a1"]);
    }

    #[test]
    fn inv_block_larger_than_array_max() {
        let a = generate(&GenSpec::new(MatrixKind::Wishart, 8, 1)).unwrap();
        let cfg = SolveConfig { array_max: Some(3), ..SolveConfig::ideal() };
        let err = solve_one_stage(&a, &[1.0; 8], &cfg).unwrap_err();
        assert!(matches!(err, Error::ArrayTooLarge { rows: 4, .. }));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (a, _) = hand_example();
        let r = solve_one_stage(&a, &[0.0, 0.0], &SolveConfig::ideal()).unwrap();
        assert_eq!(r.x_hat.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn block_mvm_matches_product() {
        let a = generate(&GenSpec::new(MatrixKind::Uniform, 10, 5)).unwrap();
        let v = gen_rhs(10, 6).unwrap();
        let want = a.matvec(&v).unwrap().neg();
        for am in [1, 3, 4, 10, 16] {
            let got = block_mvm(&a, &v, am, &SolveConfig::ideal()).unwrap();
            assert!(close(&got, &want, 1e-12), "array_max {am}");
        }
    }

    #[test]
    fn block_mvm_skips_zero_tiles() {
        let mut rows = vec![[0.0; 4]; 4];
        rows[0][0] = 1.0;
        rows[3][3] = 2.0;
        let a = Matrix::from_rows(&rows).unwrap();
        let p = Programmer {
            map: &MapConfig::ideal(),
            circuit: &CircuitConfig::default(),
            global_scale: None,
            array_max: 2,
        };
        assert_eq!(p.program_tiled(&a, 0, "m").unwrap().tiles.len(), 2);
    }

    #[test]
    fn report_json_round_trip() {
        let (a, b) = hand_example();
        let mut r = solve_one_stage(&a, &b, &SolveConfig::ideal()).unwrap();
        r.attach_reference(&[4.0 / 3.0, -2.0 / 3.0]).unwrap();
        let back = SolveReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().unwrap().contains("neg_y_t"));
    }
}
