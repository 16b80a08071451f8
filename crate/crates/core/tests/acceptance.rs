//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use blockamc::analog::{build_network, inv_ideal, inv_network, mvm_ideal, mvm_network, CircuitConfig, Mode};
use blockamc::bench::{aggregate, emit, run_sweep, EmitOptions, GroupStats, SweepConfig};
use blockamc::cost::{cost_reports, latency_cycles, savings, CostConfig};
use blockamc::linalg::solve_dense;
use blockamc::mapping::{map_matrix, program, MapConfig};
use blockamc::matgen::{gen_rhs, generate, GenSpec, MatrixKind};
use blockamc::metrics::relative_error;
use blockamc::rng::derive_indexed;
use blockamc::solver::{solve_multi_stage, solve_one_stage, SolveConfig, SolverKind};
use blockamc::Matrix;

use common::{dominant_matrix, max_rel_diff, random_matrix, random_vector, Mna};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Noise-free solves of seeded random systems match a direct dense solve.
fn exactness() -> Outcome {
    let start = Instant::now();
    let kinds = [MatrixKind::Wishart, MatrixKind::Toeplitz, MatrixKind::Uniform];
    let mut worst = 0.0_f64;
    let mut systems = 0;
    for n in [4, 8, 16, 32, 64] {
        for t in 0..100u64 {
            let kind = kinds[t as usize % kinds.len()];
            let seed = derive_indexed(1, "exactness", n as u64 * 1000 + t);
            let a = generate(&GenSpec::new(kind, n, seed)).map_err(|e| e.to_string())?;
            let b = gen_rhs(n, seed ^ 1).map_err(|e| e.to_string())?;
            let x = solve_dense(&a, &b).map_err(|e| format!("n={n} trial {t}: {e}"))?;
            for kind in SolverKind::ALL {
                let r = solve_multi_stage(&a, &b, kind.depth(), &SolveConfig::ideal())
                    .map_err(|e| format!("n={n} trial {t} {kind}: {e}"))?;
                worst = worst.max(relative_error(&x, &r.x_hat).map_err(|e| e.to_string())?);
            }
            systems += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && secs < 60.0,
        format!("{systems} systems x 3 solvers, worst error {worst:.2e} (limit 1e-8), solve time {secs:.1} s (limit 60 s)"),
    )
}

/// The 2x2 hand example reproduces every intermediate exactly.
fn hand_trace() -> Outcome {
    let a = Matrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap();
    let cfg = SolveConfig { k: Some(1), ..SolveConfig::ideal() };
    let r = solve_one_stage(&a, &[1.0, 0.0], &cfg).map_err(|e| e.to_string())?;
    let t = r.trace.ok_or("no trace")?;
    let got = [t.y_t()[0], t.g_t[0], t.schur[(0, 0)], t.z[0], t.f_s[0], t.y()[0]];
    let want = [1.0, 0.5, 0.75, -2.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0];
    let worst = got.iter().zip(&want).fold(0.0_f64, |m, (g, w)| m.max((g - w).abs()));
    check(
        worst <= 4.0 * f64::EPSILON,
        format!("y_t, g_t, A4s, z, f_s, y = {got:?}, max deviation {worst:.1e}"),
    )
}

/// Vanishing wire resistance reproduces the ideal engine, solves satisfy
/// KCL, and the 1x1 series-resistance closed forms hold.
fn network_consistency() -> Outcome {
    let mut worst_ideal = 0.0_f64;
    let mut worst_kcl = 0.0_f64;
    for seed in 0..10 {
        let arr = map_matrix(&dominant_matrix(8, seed), &MapConfig::ideal(), seed).unwrap();
        let v = random_vector(8, 1000 + seed);
        let cfg = CircuitConfig { r_seg: 1e-9, ..CircuitConfig::network() };
        let m = mvm_network(&arr, &v, &cfg).map_err(|e| e.to_string())?;
        let i = inv_network(&arr, &v, &cfg).map_err(|e| e.to_string())?;
        worst_ideal = worst_ideal
            .max(max_rel_diff(&m, &mvm_ideal(&arr, &v).unwrap()))
            .max(max_rel_diff(&i, &inv_ideal(&arr, &v).unwrap()));
        for r_seg in [1e-9, 1.0] {
            let cfg = CircuitConfig { r_seg, ..CircuitConfig::network() };
            let sm = build_network(&arr, &cfg, Mode::Mvm).unwrap().solve_mvm(&v).map_err(|e| e.to_string())?;
            let si = build_network(&arr, &cfg, Mode::Inv).unwrap().solve_inv(&v).map_err(|e| e.to_string())?;
            worst_kcl = worst_kcl.max(sm.relative_residual).max(si.relative_residual);
        }
    }
    let unit = program(&Matrix::identity(1), &MapConfig::ideal(), 0).unwrap();
    let mut worst_closed = 0.0_f64;
    for r in [0.5, 1.0, 10.0, 100.0] {
        let cfg = CircuitConfig { r_seg: r, ..CircuitConfig::network() };
        let k = 2.0 * r * unit.g0 + 1.0;
        let m = mvm_network(&unit, &[1.0], &cfg).unwrap()[0];
        let i = inv_network(&unit, &[1.0], &cfg).unwrap()[0];
        worst_closed = worst_closed.max((m + 1.0 / k).abs() * k).max((i + k).abs() / k);
    }
    let tol = CircuitConfig::default().solver_tol;
    check(
        worst_ideal <= 1e-6 && worst_kcl <= tol && worst_closed <= 1e-12,
        format!(
            "vs ideal {worst_ideal:.1e} (limit 1e-6), KCL {worst_kcl:.1e} (limit {tol:.0e}), closed forms {worst_closed:.1e} (limit 1e-12)"
        ),
    )
}

/// The production network engine matches an independent dense nodal
/// analysis on 2x2 and 3x3 arrays with 1 ohm segments.
fn mna_oracle() -> Outcome {
    let cfg = CircuitConfig { r_seg: 1.0, ..CircuitConfig::network() };
    let mut worst = 0.0_f64;
    let mut cases = vec![(Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap(), false)];
    for seed in 0..5 {
        cases.push((dominant_matrix(2, seed), true));
        let r = random_matrix(3, 3, seed);
        cases.push((Matrix::from_fn(3, 3, |i, j| 0.5 * r[(i, j)] + if i == j { 1.0 } else { 0.0 }), true));
    }
    for (t, (a, invertible)) in cases.iter().enumerate() {
        let arr = map_matrix(a, &MapConfig::ideal(), 0).unwrap();
        let oracle = Mna::new(&arr, &cfg);
        let v = if t == 0 { vec![1.0, 1.0] } else { random_vector(a.rows(), t as u64) };
        worst = worst.max(max_rel_diff(&mvm_network(&arr, &v, &cfg).map_err(|e| e.to_string())?, &oracle.mvm(&v)));
        if *invertible {
            worst = worst.max(max_rel_diff(&inv_network(&arr, &v, &cfg).map_err(|e| e.to_string())?, &oracle.inv(&v)));
        }
    }
    check(worst <= 1e-10, format!("{} arrays, worst deviation {worst:.1e} (limit 1e-10)", cases.len()))
}

fn mean_of(stats: &[GroupStats], kind: MatrixKind, size: usize, solver: SolverKind) -> Result<&GroupStats, String> {
    stats
        .iter()
        .find(|s| s.matrix == kind && s.size == size && s.solver == solver)
        .ok_or_else(|| format!("no results for {} n={size} {solver}", kind.as_str()))
}

fn describe(s: &GroupStats) -> String {
    let failed = if s.failed > 0 { format!(", {} failed", s.failed) } else { String::new() };
    format!("{} mean {:.3e} (median {:.3e}{failed})", s.solver, s.mean, s.median)
}

fn shipped(name: &str, text: &str) -> Result<SweepConfig, String> {
    SweepConfig::from_toml(text).map_err(|e| format!("{name}: {e}"))
}

/// Device variation: block solving helps Toeplitz systems and leaves
/// Wishart systems essentially unchanged.
fn variation_trend() -> Outcome {
    let cfg = shipped("variation.toml", include_str!("../configs/variation.toml"))?;
    let stats = aggregate(&run_sweep(&cfg).map_err(|e| e.to_string())?);
    let n = *cfg.sizes.iter().max().unwrap();
    let t_orig = mean_of(&stats, MatrixKind::Toeplitz, n, SolverKind::Original)?;
    let t_one = mean_of(&stats, MatrixKind::Toeplitz, n, SolverKind::OneStage)?;
    let w_orig = mean_of(&stats, MatrixKind::Wishart, n, SolverKind::Original)?;
    let w_one = mean_of(&stats, MatrixKind::Wishart, n, SolverKind::OneStage)?;
    let a_ok = t_one.mean < t_orig.mean;
    let gap = (w_one.mean - w_orig.mean).abs() / w_orig.mean;
    let b_ok = gap <= 0.25;
    check(
        a_ok && b_ok,
        format!(
            "n={n}: (a) toeplitz {} vs {} [{}]; (b) wishart {} vs {}, gap {:.1}% (limit 25%) [{}]",
            describe(t_one),
            describe(t_orig),
            if a_ok { "ok" } else { "fails" },
            describe(w_one),
            describe(w_orig),
            100.0 * gap,
            if b_ok { "ok" } else { "fails" },
        ),
    )
}

/// Variation plus wire resistance: each partitioning stage reduces the
/// mean error at the largest size.
fn interconnect_trend() -> Outcome {
    let cfg = shipped("interconnect.toml", include_str!("../configs/interconnect.toml"))?;
    let stats = aggregate(&run_sweep(&cfg).map_err(|e| e.to_string())?);
    let n = *cfg.sizes.iter().max().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for &kind in &cfg.kinds {
        let orig = mean_of(&stats, kind, n, SolverKind::Original)?;
        let one = mean_of(&stats, kind, n, SolverKind::OneStage)?;
        let two = mean_of(&stats, kind, n, SolverKind::TwoStage)?;
        let good = one.mean <= orig.mean && two.mean <= one.mean;
        ok &= good;
        parts.push(format!(
            "{}: {}, {}, {} [{}]",
            kind.as_str(),
            describe(orig),
            describe(one),
            describe(two),
            if good { "ok" } else { "fails" }
        ));
    }
    check(ok, format!("n={n}: {}", parts.join("; ")))
}

/// Shipped calibration reproduces the published totals and savings; OPA
/// count and power halve exactly.
fn cost_regression() -> Outcome {
    let reports = cost_reports(512, None, &CostConfig::calibrated());
    let want_area = [0.01577, 0.00807, 0.01383];
    let mut ok = true;
    let mut area_dev = 0.0_f64;
    for (r, w) in reports.iter().zip(want_area) {
        area_dev = area_dev.max((r.area_mm2.total - w).abs() / w);
    }
    ok &= area_dev <= 0.02;
    let pct = |kind, area: bool| {
        100.0
            * savings(&reports, kind, |r| if area { r.area_mm2.total } else { r.power_w.total }).unwrap_or(f64::NAN)
    };
    let got = [
        pct(SolverKind::OneStage, true),
        pct(SolverKind::TwoStage, true),
        pct(SolverKind::OneStage, false),
        pct(SolverKind::TwoStage, false),
    ];
    let want = [48.3, 12.3, 40.0, 37.4];
    let pp = got.iter().zip(want).fold(0.0_f64, |m, (g, w)| m.max((g - w).abs()));
    ok &= pp <= 2.0;
    let mut ratio_ok = true;
    for cfg in [CostConfig::calibrated(), CostConfig::calibrated().scaled(3.7)] {
        for n in [2, 64, 512, 1000] {
            let r = cost_reports(n, None, &cfg);
            ratio_ok &= r[1].counts.opa * 2 == n && r[1].power_w.opa / r[0].power_w.opa == 0.5;
        }
    }
    ok &= ratio_ok;
    check(
        ok,
        format!(
            "area totals {:.5}/{:.5}/{:.5} mm2 (max dev {:.2}%), savings area {:.2}%/{:.2}% power {:.2}%/{:.2}% (max dev {pp:.2} pp), OPA halving {}",
            reports[0].area_mm2.total,
            reports[1].area_mm2.total,
            reports[2].area_mm2.total,
            100.0 * area_dev,
            got[0],
            got[1],
            got[2],
            got[3],
            if ratio_ok { "exact" } else { "violated" }
        ),
    )
}

/// Depth-2 partitioning of a 256x256 system programs sixteen 64x64 arrays;
/// one-stage latency is five cycles and the original one.
fn structural_counts() -> Outcome {
    let a = generate(&GenSpec::new(MatrixKind::Wishart, 256, 7)).unwrap();
    let b = gen_rhs(256, 8).unwrap();
    let r = solve_multi_stage(&a, &b, 2, &SolveConfig::default()).map_err(|e| e.to_string())?;
    let all_64 = r.arrays.iter().all(|x| x.rows == 64 && x.cols == 64);
    let one = latency_cycles(256, 1, None);
    let orig = latency_cycles(256, 0, None);
    check(
        r.arrays.len() == 16 && all_64 && one == 5 && orig == 1,
        format!(
            "{} arrays, all 64x64: {all_64}; latency one_stage {one}, original {orig}",
            r.arrays.len()
        ),
    )
}

/// Two runs of a sweep config write byte-identical CSV files.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = shipped("smoke.toml", include_str!("../configs/smoke.toml"))?;
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        cfg.out_dir = dir.path().join(run);
        let records = run_sweep(&cfg).map_err(|e| e.to_string())?;
        emit(&cfg, &records, EmitOptions { plots: false }).map_err(|e| e.to_string())?;
        let read = |f: &str| std::fs::read(cfg.out_dir.join(f)).map_err(|e| e.to_string());
        bytes.push((read("records.csv")?, read("summary.csv")?));
    }
    let same = bytes[0] == bytes[1];
    check(
        same,
        format!(
            "records.csv {} bytes, summary.csv {} bytes, identical: {same}",
            bytes[0].0.len(),
            bytes[0].1.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 exactness oracle", exactness),
        ("2 hand-traced cascade", hand_trace),
        ("3 network-engine consistency", network_consistency),
        ("4 nodal-analysis oracle", mna_oracle),
        ("5 variation trend", variation_trend),
        ("6 interconnect trend", interconnect_trend),
        ("7 cost model regression", cost_regression),
        ("8 structural counts", structural_counts),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
