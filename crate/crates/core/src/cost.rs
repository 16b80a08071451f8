//! Resource counts, area and power estimates, and a cycle-level latency
//! model for the original, one-stage and two-stage solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::solver::{default_split, SolverKind};

/// Calibration fitted to the published 512x512 area totals and power
/// savings; see `data/calibration.toml`.
pub const CALIBRATION_TOML: &str = include_str!("../data/calibration.toml");

/// Per-unit costs. Areas in mm², powers in W, supply in V, current in A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub opa_area: f64,
    pub opa_vs: f64,
    pub opa_iq: f64,
    pub adc_area: f64,
    pub adc_power: f64,
    pub dac_area: f64,
    pub dac_power: f64,
    pub cell_area: f64,
    pub cell_power: f64,
}

impl CostConfig {
    pub fn zero() -> Self {
        CostConfig {
            opa_area: 0.0,
            opa_vs: 0.0,
            opa_iq: 0.0,
            adc_area: 0.0,
            adc_power: 0.0,
            dac_area: 0.0,
            dac_power: 0.0,
            cell_area: 0.0,
            cell_power: 0.0,
        }
    }

    /// The shipped calibration.
    pub fn calibrated() -> Self {
        CostConfig::from_toml(CALIBRATION_TOML).expect("shipped calibration parses")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: CostConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("opa_area", self.opa_area),
            ("opa_vs", self.opa_vs),
            ("opa_iq", self.opa_iq),
            ("adc_area", self.adc_area),
            ("adc_power", self.adc_power),
            ("dac_area", self.dac_area),
            ("dac_power", self.dac_power),
            ("cell_area", self.cell_area),
            ("cell_power", self.cell_power),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Every per-unit value multiplied by `c`, with the OPA supply current
    /// carrying the factor so `V_s` stays physical.
    pub fn scaled(&self, c: f64) -> Self {
        CostConfig {
            opa_area: self.opa_area * c,
            opa_vs: self.opa_vs,
            opa_iq: self.opa_iq * c,
            adc_area: self.adc_area * c,
            adc_power: self.adc_power * c,
            dac_area: self.dac_area * c,
            dac_power: self.dac_power * c,
            cell_area: self.cell_area * c,
            cell_power: self.cell_power * c,
        }
    }

    /// Power drawn by one OPA, `V_s·I_q`.
    pub fn opa_power(&self) -> f64 {
        self.opa_vs * self.opa_iq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub opa: usize,
    pub dac: usize,
    pub adc: usize,
    /// RRAM cells over every array, both sign arrays included.
    pub cells: usize,
}

/// Counts for an `n x n` system with the default split.
pub fn component_counts(kind: SolverKind, n: usize) -> ComponentCounts {
    component_counts_split(kind, n, default_split(n.max(2)))
}

/// Counts with `A₁` of size `k`. The shared peripherals of the block macro
/// serve the larger of the two halves. The two-stage solver keeps one OPA
/// bank per first-stage operation, so its OPA count equals the original's,
/// while its converters match the one-stage macro.
pub fn component_counts_split(kind: SolverKind, n: usize, k: usize) -> ComponentCounts {
    let cells = 2 * n * n;
    let half = k.max(n.saturating_sub(k));
    match kind {
        SolverKind::Original => ComponentCounts { opa: n, dac: n, adc: n, cells },
        SolverKind::OneStage => ComponentCounts { opa: half, dac: half, adc: half, cells },
        SolverKind::TwoStage => ComponentCounts { opa: n, dac: half, adc: half, cells },
    }
}

/// One figure split over the four hardware parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub opa: f64,
    pub dac: f64,
    pub adc: f64,
    pub rram: f64,
    pub total: f64,
}

impl Breakdown {
    fn new(opa: f64, dac: f64, adc: f64, rram: f64) -> Self {
        Breakdown { opa, dac, adc, rram, total: opa + dac + adc + rram }
    }
}

/// Power in W; the OPA term is `N·V_s·I_q`.
pub fn estimate_power(counts: &ComponentCounts, cfg: &CostConfig) -> Breakdown {
    Breakdown::new(
        counts.opa as f64 * cfg.opa_vs * cfg.opa_iq,
        counts.dac as f64 * cfg.dac_power,
        counts.adc as f64 * cfg.adc_power,
        counts.cells as f64 * cfg.cell_power,
    )
}

/// Area in mm².
pub fn estimate_area(counts: &ComponentCounts, cfg: &CostConfig) -> Breakdown {
    Breakdown::new(
        counts.opa as f64 * cfg.opa_area,
        counts.dac as f64 * cfg.dac_area,
        counts.adc as f64 * cfg.adc_area,
        counts.cells as f64 * cfg.cell_area,
    )
}

/// Clock cycles for one solve, one MVM or INV per cycle. A depth-`d` solve
/// runs three depth-`(d−1)` INV sub-solves and two tiled MVMs whose tiles
/// are issued one per cycle.
pub fn latency_cycles(n: usize, depth: usize, array_max: Option<usize>) -> u64 {
    let am = array_max.unwrap_or_else(|| crate::solver::StagePlan::for_size(n, depth, None).array_max).max(1);
    cascade_cycles(n, depth, am)
}

fn cascade_cycles(n: usize, depth: usize, am: usize) -> u64 {
    if depth == 0 || n < 2 {
        return 1;
    }
    let k = default_split(n);
    let m = n - k;
    let inv1 = cascade_cycles(k, depth - 1, am);
    let inv4 = cascade_cycles(m, depth - 1, am);
    let tiles = |r: usize, c: usize| (r.div_ceil(am) * c.div_ceil(am)) as u64;
    2 * inv1 + inv4 + tiles(m, k) + tiles(k, m)
}

/// Cycles between successive problems entering the solver. The one-stage
/// macro overlaps problems through its two sample-and-hold banks, so a new
/// problem starts every five cycles; deeper solvers are modeled unpipelined.
pub fn initiation_interval(n: usize, depth: usize, array_max: Option<usize>) -> u64 {
    match depth {
        0 => 1,
        1 => 5,
        _ => latency_cycles(n, depth, array_max),
    }
}

/// Floating-point operations spent on digital Schur complements before
/// programming, summed over every stage.
pub fn preprocessing_flops(n: usize, depth: usize) -> f64 {
    if depth == 0 || n < 2 {
        return 0.0;
    }
    let k = default_split(n) as f64;
    let m = n as f64 - k;
    // LU of A₁, A₁⁻¹A₂, A₃·(A₁⁻¹A₂), subtraction from A₄.
    let own = 2.0 / 3.0 * k.powi(3) + 2.0 * k * k * m + 2.0 * m * k * m + m * m;
    let k_int = default_split(n);
    own + preprocessing_flops(k_int, depth - 1) + preprocessing_flops(n - k_int, depth - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub solver: SolverKind,
    pub n: usize,
    pub counts: ComponentCounts,
    /// mm².
    pub area_mm2: Breakdown,
    /// W.
    pub power_w: Breakdown,
    pub latency_cycles: u64,
    pub initiation_interval: u64,
    pub preprocessing_flops: f64,
}

pub fn cost_report(kind: SolverKind, n: usize, array_max: Option<usize>, cfg: &CostConfig) -> CostReport {
    let counts = component_counts(kind, n);
    let depth = kind.depth();
    CostReport {
        solver: kind,
        n,
        counts,
        area_mm2: estimate_area(&counts, cfg),
        power_w: estimate_power(&counts, cfg),
        latency_cycles: latency_cycles(n, depth, array_max),
        initiation_interval: initiation_interval(n, depth, array_max),
        preprocessing_flops: preprocessing_flops(n, depth),
    }
}

/// Reports for every solver kind.
pub fn cost_reports(n: usize, array_max: Option<usize>, cfg: &CostConfig) -> Vec<CostReport> {
    SolverKind::ALL.iter().map(|&k| cost_report(k, n, array_max, cfg)).collect()
}

/// `1 − total(kind)/total(original)`.
pub fn savings(reports: &[CostReport], kind: SolverKind, pick: impl Fn(&CostReport) -> f64) -> Option<f64> {
    let base = reports.iter().find(|r| r.solver == SolverKind::Original).map(&pick)?;
    let this = reports.iter().find(|r| r.solver == kind).map(&pick)?;
    Some(1.0 - this / base)
}

pub const CSV_HEADER: &str = "solver,n,metric,opa,dac,adc,rram,total";

/// Rows of `CSV_HEADER`: one area and one power row per report.
pub fn to_csv(reports: &[CostReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        for (metric, b) in [("area_mm2", &r.area_mm2), ("power_w", &r.power_w)] {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{:e},{:e}\n",
                r.solver, r.n, metric, b.opa, b.dac, b.adc, b.rram, b.total
            ));
        }
    }
    out
}

/// Targets for [`calibrate`]: published totals and savings for one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub n: usize,
    /// Area totals (original, one-stage, two-stage), mm².
    pub area_totals: [f64; 3],
    /// Area savings (one-stage, two-stage) relative to the original.
    pub area_savings: [f64; 2],
    /// Power savings (one-stage, two-stage) relative to the original.
    pub power_savings: [f64; 2],
    pub opa_vs: f64,
    pub opa_iq: f64,
    /// Fraction of the converter cost assigned to the DAC.
    pub dac_fraction: f64,
}

impl CalibrationTargets {
    /// The 512x512 figures: totals 0.01577/0.00807/0.01383 mm², area
    /// savings 48.3%/12.3%, power savings 40%/37.4%, 1 V supply and 10 µA
    /// quiescent current.
    pub fn published() -> Self {
        CalibrationTargets {
            n: 512,
            area_totals: [0.01577, 0.00807, 0.01383],
            area_savings: [0.483, 0.123],
            power_savings: [0.40, 0.374],
            opa_vs: 1.0,
            opa_iq: 10e-6,
            dac_fraction: 1.0 / 3.0,
        }
    }
}

/// Least-squares fit of per-unit costs to the targets.
///
/// Per solver the totals are linear in three unknowns: OPA cost, combined
/// converter cost and cell cost. Area uses the three totals plus the two
/// savings rewritten as linear equations in the unknowns. Power has no
/// absolute totals, so the OPA power is fixed at `V_s·I_q` and the two
/// savings determine the rest.
pub fn calibrate(t: &CalibrationTargets) -> Result<CostConfig> {
    let c = |kind| component_counts(kind, t.n);
    let rows: Vec<[f64; 3]> = SolverKind::ALL
        .iter()
        .map(|&k| {
            let c = c(k);
            [c.opa as f64, c.dac as f64, c.cells as f64]
        })
        .collect();
    // Area: totals, and savings s·total(orig) − (total(orig) − total(kind)) = 0.
    let mut eqs: Vec<([f64; 3], f64)> = rows.iter().zip(t.area_totals).map(|(r, a)| (*r, a)).collect();
    for (i, s) in t.area_savings.iter().enumerate() {
        let (o, k) = (rows[0], rows[i + 1]);
        eqs.push(([s * o[0] - (o[0] - k[0]), s * o[1] - (o[1] - k[1]), s * o[2] - (o[2] - k[2])], 0.0));
    }
    let [opa_area, conv_area, cell_area] = least_squares(&eqs)?;

    // Power: unknowns (converter, cell) with the OPA term known.
    let p_opa = t.opa_vs * t.opa_iq;
    let mut peqs: Vec<([f64; 2], f64)> = Vec::new();
    for (i, s) in t.power_savings.iter().enumerate() {
        let (o, k) = (rows[0], rows[i + 1]);
        // s·P(orig) = P(orig) − P(kind), moved to the form a·x = b.
        let a = [s * o[1] - (o[1] - k[1]), s * o[2] - (o[2] - k[2])];
        let b = -(s * o[0] - (o[0] - k[0])) * p_opa;
        peqs.push((a, b));
    }
    let conv_power;
    let cell_power;
    {
        let m = Matrix::from_rows(&[peqs[0].0, peqs[1].0])?;
        let x = Lu::factor(&m)?.solve(&[peqs[0].1, peqs[1].1])?;
        conv_power = x[0];
        cell_power = x[1];
    }
    let f = t.dac_fraction;
    let cfg = CostConfig {
        opa_area,
        opa_vs: t.opa_vs,
        opa_iq: t.opa_iq,
        adc_area: conv_area * (1.0 - f),
        adc_power: conv_power * (1.0 - f),
        dac_area: conv_area * f,
        dac_power: conv_power * f,
        cell_area,
        cell_power,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Solves the normal equations of an overdetermined 3-unknown system after
/// scaling each column to unit norm.
fn least_squares(eqs: &[([f64; 3], f64)]) -> Result<[f64; 3]> {
    let mut norm = [0.0; 3];
    for (a, _) in eqs {
        for j in 0..3 {
            norm[j] += a[j] * a[j];
        }
    }
    let norm = norm.map(|v: f64| if v > 0.0 { v.sqrt() } else { 1.0 });
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (a, b) in eqs {
        let a = [a[0] / norm[0], a[1] / norm[1], a[2] / norm[2]];
        for i in 0..3 {
            atb[i] += a[i] * b;
            for j in 0..3 {
                ata[i][j] += a[i] * a[j];
            }
        }
    }
    let x = Lu::factor(&Matrix::from_rows(&ata)?)?.solve(&atb)?;
    Ok([x[0] / norm[0], x[1] / norm[1], x[2] / norm[2]])
}
