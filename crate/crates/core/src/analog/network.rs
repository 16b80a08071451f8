//! Resistive-network model of a crossbar with wire segment resistance.
//!
//! Each sign array is a grid of bitline nodes `B(i,j)` and wordline nodes
//! `W(i,j)`. The cell conductance sits between `B(i,j)` and `W(i,j)`,
//! adjacent bitline nodes (down a column) and wordline nodes (along a row)
//! are joined by one wire segment, and one extra segment connects each line
//! end to its driver or to its amplifier's virtual-ground input.
//!
//! Unknowns are expressed as deviations `δ` of each node from its line's
//! reference potential (the drive voltage for bitlines, 0 V for wordlines).
//! With that choice the wire stamps carry no source term, the system matrix
//! is a Dirichlet graph Laplacian (symmetric positive definite), and tiny
//! segment resistances do not cancel catastrophically. All conductances are
//! divided by G₀, so currents come out in units of `G₀ · volt`.
//!
//! MVM mode drives the bitlines with `v_in` and reads the currents sunk into
//! the virtual grounds. INV mode eliminates the internal nodes onto the
//! amplifier outputs: the wordline current response `R` (an `n x n` matrix,
//! equal to `G/G₀` without parasitics) is built column by column and the
//! virtual-ground equations `v_in + R·u = 0` are solved for the outputs `u`.
//! The `A₋` array always sees the inverted drive `−u`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::sparse::{CooBuilder, Csr, SpdFactor};
use super::{CircuitConfig, LineEnd};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix, Vector};
use crate::mapping::ProgrammedArray;

const MAX_REFINEMENTS: usize = 4;
const RESPONSE_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Mvm,
    Inv,
}

/// One physical array (`A₊` or `A₋`) and its assembled δ-system.
#[derive(Debug)]
struct SignNetwork {
    sign: f64,
    /// Cell conductances divided by G₀.
    cells: Matrix,
    /// Unknown index of `B(i,j)` / `W(i,j)`, row-major; `None` when the node
    /// is shorted to its line reference (zero segment resistance).
    b_idx: Vec<Option<usize>>,
    w_idx: Vec<Option<usize>>,
    laplacian: Csr,
    factor: Option<SpdFactor>,
}

impl SignNetwork {
    fn build(cells: Matrix, sign: f64, cfg: &CircuitConfig, g0: f64) -> Result<SignNetwork> {
        let (rows, cols) = (cells.rows(), cells.cols());
        if cfg.r_seg == 0.0 {
            return Ok(SignNetwork {
                sign,
                cells,
                b_idx: vec![None; rows * cols],
                w_idx: vec![None; rows * cols],
                laplacian: CooBuilder::new(0, 0).to_csr(),
                factor: None,
            });
        }
        let wire = 1.0 / (cfg.r_seg * g0);
        let b = |i: usize, j: usize| 2 * (i * cols + j);
        let w = |i: usize, j: usize| 2 * (i * cols + j) + 1;
        let n_unknown = 2 * rows * cols;
        let mut coo = CooBuilder::new(n_unknown, n_unknown);
        let head_row = match cfg.driver_side {
            LineEnd::Near => 0,
            LineEnd::Far => rows - 1,
        };
        let tail_col = match cfg.sense_side {
            LineEnd::Near => 0,
            LineEnd::Far => cols - 1,
        };
        for i in 0..rows {
            for j in 0..cols {
                coo.stamp_branch(b(i, j), w(i, j), cells[(i, j)]);
                if i + 1 < rows {
                    coo.stamp_branch(b(i, j), b(i + 1, j), wire);
                }
                if j + 1 < cols {
                    coo.stamp_branch(w(i, j), w(i, j + 1), wire);
                }
            }
        }
        // Boundary segments to the drivers and the virtual grounds (δ = 0).
        for j in 0..cols {
            coo.push(b(head_row, j), b(head_row, j), wire);
        }
        for i in 0..rows {
            coo.push(w(i, tail_col), w(i, tail_col), wire);
        }
        let laplacian = coo.to_csr();
        let factor = SpdFactor::new(&laplacian)?;
        Ok(SignNetwork {
            sign,
            cells,
            b_idx: (0..rows * cols).map(|p| Some(2 * p)).collect(),
            w_idx: (0..rows * cols).map(|p| Some(2 * p + 1)).collect(),
            laplacian,
            factor: Some(factor),
        })
    }

    fn rows(&self) -> usize {
        self.cells.rows()
    }

    fn cols(&self) -> usize {
        self.cells.cols()
    }

    fn n_unknown(&self) -> usize {
        self.laplacian.nrows
    }

    /// `C·u`: the source term contributed by the line references through the
    /// cells. The δ-system reads `L·δ + C·u = 0`.
    fn coupling(&self, u: &[f64], out: &mut [f64]) {
        let cols = self.cols();
        for i in 0..self.rows() {
            for j in 0..cols {
                let p = i * cols + j;
                let c = self.cells[(i, j)] * u[j];
                if let Some(k) = self.b_idx[p] {
                    out[k] += c;
                }
                if let Some(k) = self.w_idx[p] {
                    out[k] -= c;
                }
            }
        }
    }

    fn delta(&self, delta: &[f64], idx: Option<usize>) -> f64 {
        idx.map_or(0.0, |k| delta[k])
    }

    /// Current sunk by each wordline's virtual ground, as the sum of its cell
    /// currents.
    fn wordline_currents(&self, u: &[f64], delta: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        (0..self.rows())
            .map(|i| {
                (0..cols)
                    .map(|j| {
                        let p = i * cols + j;
                        let vb = u[j] + self.delta(delta, self.b_idx[p]);
                        let vw = self.delta(delta, self.w_idx[p]);
                        self.cells[(i, j)] * (vb - vw)
                    })
                    .sum()
            })
            .collect()
    }

    /// `L·δ + C·u`, the KCL mismatch at every internal node.
    fn residual(&self, u: &[f64], delta: &[f64]) -> Vec<f64> {
        let mut r = self.laplacian.matvec(delta);
        self.coupling(u, &mut r);
        r
    }

    /// Sum of |cell current| magnitudes the drive would inject with no
    /// parasitics; the scale KCL residuals are judged against.
    fn injected_scale(&self, u: &[f64]) -> f64 {
        let cols = self.cols();
        (0..self.rows())
            .map(|i| (0..cols).map(|j| self.cells[(i, j)].abs() * u[j].abs()).sum::<f64>())
            .sum()
    }

    /// Solves for δ under line drive `u`, refining until the KCL residual is
    /// at most `tol * scale`. Returns δ and the achieved max |residual|.
    fn solve_drive(&self, u: &[f64], tol: f64, scale: f64) -> (Vec<f64>, f64) {
        let Some(factor) = &self.factor else {
            return (Vec::new(), 0.0);
        };
        let mut delta = vec![0.0; self.n_unknown()];
        self.coupling(u, &mut delta);
        delta.iter_mut().for_each(|d| *d = -*d);
        factor.solve(&mut delta);
        let mut worst = max_abs(&self.residual(u, &delta));
        for _ in 0..MAX_REFINEMENTS {
            if worst <= tol * scale {
                break;
            }
            let mut correction = self.residual(u, &delta);
            correction.iter_mut().for_each(|c| *c = -*c);
            factor.solve(&mut correction);
            delta.iter_mut().zip(&correction).for_each(|(d, c)| *d += c);
            worst = max_abs(&self.residual(u, &delta));
        }
        (delta, worst)
    }

    /// Wordline current response to unit drive on each bitline.
    fn response(&self) -> Matrix {
        let (rows, cols) = (self.rows(), self.cols());
        let Some(factor) = &self.factor else {
            return self.cells.clone();
        };
        let n = self.n_unknown();
        let mut out = Matrix::zeros(rows, cols);
        let mut unit = vec![0.0; cols];
        for start in (0..cols).step_by(RESPONSE_CHUNK) {
            let width = RESPONSE_CHUNK.min(cols - start);
            let mut rhs = vec![0.0; n * width];
            for c in 0..width {
                unit[start + c] = 1.0;
                let col = &mut rhs[c * n..(c + 1) * n];
                self.coupling(&unit, col);
                col.iter_mut().for_each(|v| *v = -*v);
                unit[start + c] = 0.0;
            }
            factor.solve_many(&mut rhs, width);
            for c in 0..width {
                unit[start + c] = 1.0;
                let currents = self.wordline_currents(&unit, &rhs[c * n..(c + 1) * n]);
                unit[start + c] = 0.0;
                for (i, cur) in currents.into_iter().enumerate() {
                    out[(i, start + c)] = cur;
                }
            }
        }
        out
    }

    fn node_voltages(&self, u: &[f64], delta: &[f64]) -> (Matrix, Matrix) {
        let cols = self.cols();
        let vb = Matrix::from_fn(self.rows(), cols, |i, j| u[j] + self.delta(delta, self.b_idx[i * cols + j]));
        let vw = Matrix::from_fn(self.rows(), cols, |i, j| self.delta(delta, self.w_idx[i * cols + j]));
        (vb, vw)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Node voltages of one solved sign array, in volts.
#[derive(Debug, Clone)]
pub struct ArrayVoltages {
    /// Bitline node voltages `B(i,j)`.
    pub bitline: Matrix,
    /// Wordline node voltages `W(i,j)`.
    pub wordline: Matrix,
}

/// Result of one network solve.
#[derive(Debug, Clone)]
pub struct NetworkSolution {
    /// Amplifier outputs.
    pub v_out: Vector,
    /// Worst KCL residual over all internal and virtual-ground nodes,
    /// relative to the total injected current magnitude.
    pub relative_residual: f64,
    pub plus: ArrayVoltages,
    pub minus: ArrayVoltages,
    /// Drive applied to the `A₊` bitlines (the `A₋` array sees its negation).
    pub drive: Vector,
}

/// Assembled network for one programmed array in one operating mode. May be
/// reused for many inputs; the factorizations are computed once.
#[derive(Debug)]
pub struct NetworkModel {
    mode: Mode,
    r_seg: f64,
    tol: f64,
    plus: SignNetwork,
    minus: SignNetwork,
    response_lu: OnceLock<std::result::Result<Lu, String>>,
}

/// Builds the network of `arr` for `mode`.
pub fn build_network(arr: &ProgrammedArray, cfg: &CircuitConfig, mode: Mode) -> Result<NetworkModel> {
    cfg.validate()?;
    if mode == Mode::Inv && arr.rows() != arr.cols() {
        return Err(Error::Dimension(format!(
            "INV network needs a square array, got {}x{}",
            arr.rows(),
            arr.cols()
        )));
    }
    let g0 = arr.g0;
    let plus = SignNetwork::build(arr.g_plus.scaled(1.0 / g0), 1.0, cfg, g0)?;
    let minus = SignNetwork::build(arr.g_minus.scaled(1.0 / g0), -1.0, cfg, g0)?;
    Ok(NetworkModel {
        mode,
        r_seg: cfg.r_seg,
        tol: cfg.solver_tol,
        plus,
        minus,
        response_lu: OnceLock::new(),
    })
}

impl NetworkModel {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn rows(&self) -> usize {
        self.plus.rows()
    }

    pub fn cols(&self) -> usize {
        self.plus.cols()
    }

    pub fn r_seg(&self) -> f64 {
        self.r_seg
    }

    /// Physical nodes per sign array: `2 · rows · cols`.
    pub fn nodes_per_array(&self) -> usize {
        self.plus.b_idx.len() + self.plus.w_idx.len()
    }

    /// Size of the assembled (square) system: internal nodes of both arrays,
    /// plus the amplifier outputs in INV mode.
    pub fn unknown_count(&self) -> usize {
        let outputs = if self.mode == Mode::Inv { self.rows() } else { 0 };
        self.plus.n_unknown() + self.minus.n_unknown() + outputs
    }

    /// Solves the MVM network for `v_in`.
    pub fn solve_mvm(&self, v_in: &[f64]) -> Result<NetworkSolution> {
        if self.mode != Mode::Mvm {
            return Err(Error::Config("network was built for INV mode".into()));
        }
        if v_in.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "{} inputs for {} bitlines",
                v_in.len(),
                self.cols()
            )));
        }
        let drive_minus: Vec<f64> = v_in.iter().map(|v| -v).collect();
        let scale = self.plus.injected_scale(v_in) + self.minus.injected_scale(&drive_minus);
        let (dp, rp) = self.plus.solve_drive(v_in, self.tol, scale);
        let (dm, rm) = self.minus.solve_drive(&drive_minus, self.tol, scale);
        let relative_residual = relative(rp.max(rm), scale);
        self.check(relative_residual)?;
        let ip = self.plus.wordline_currents(v_in, &dp);
        let im = self.minus.wordline_currents(&drive_minus, &dm);
        let v_out: Vec<f64> = ip.iter().zip(&im).map(|(a, b)| -(a + b)).collect();
        Ok(self.solution(v_out.into(), v_in, &drive_minus, &dp, &dm, relative_residual))
    }

    /// Solves the INV network for `v_in`.
    pub fn solve_inv(&self, v_in: &[f64]) -> Result<NetworkSolution> {
        if self.mode != Mode::Inv {
            return Err(Error::Config("network was built for MVM mode".into()));
        }
        let n = self.rows();
        if v_in.len() != n {
            return Err(Error::Dimension(format!("{} inputs for {n} wordlines", v_in.len())));
        }
        let lu = self.response_factor()?;
        let neg_v: Vec<f64> = v_in.iter().map(|v| -v).collect();
        let mut u = lu.solve(&neg_v)?.into_inner();
        let input_scale: f64 = v_in.iter().map(|v| v.abs()).sum();
        let mut attempt = 0;
        loop {
            let drive_minus: Vec<f64> = u.iter().map(|v| -v).collect();
            let scale = input_scale + self.plus.injected_scale(&u) + self.minus.injected_scale(&drive_minus);
            let (dp, rp) = self.plus.solve_drive(&u, self.tol, scale);
            let (dm, rm) = self.minus.solve_drive(&drive_minus, self.tol, scale);
            let ip = self.plus.wordline_currents(&u, &dp);
            let im = self.minus.wordline_currents(&drive_minus, &dm);
            // KCL at each virtual ground: input-resistor current plus array currents.
            let vg: Vec<f64> = (0..n).map(|i| v_in[i] + ip[i] + im[i]).collect();
            let worst = rp.max(rm).max(max_abs(&vg));
            let relative_residual = relative(worst, scale);
            if relative_residual <= self.tol || attempt == MAX_REFINEMENTS {
                self.check(relative_residual)?;
                return Ok(self.solution(u.clone().into(), &u, &drive_minus, &dp, &dm, relative_residual));
            }
            let correction = lu.solve(&vg)?;
            u.iter_mut().zip(correction.iter()).for_each(|(x, c)| *x -= c);
            attempt += 1;
        }
    }

    /// The wordline current response `R` (both arrays combined, drive `u` on
    /// `A₊` and `−u` on `A₋`), in units of G₀.
    pub fn response_matrix(&self) -> Result<Matrix> {
        self.plus.response().sub(&self.minus.response())
    }

    fn response_factor(&self) -> Result<&Lu> {
        let cached = self.response_lu.get_or_init(|| {
            self.response_matrix()
                .and_then(|r| Lu::factor(&r))
                .map_err(|e| e.to_string())
        });
        cached
            .as_ref()
            .map_err(|msg| Error::Equilibrium(format!("singular INV network: {msg}")))
    }

    fn check(&self, relative_residual: f64) -> Result<()> {
        if relative_residual > self.tol || !relative_residual.is_finite() {
            return Err(Error::NonConvergence {
                residual: relative_residual,
                tol: self.tol,
            });
        }
        Ok(())
    }

    fn solution(
        &self,
        v_out: Vector,
        drive_plus: &[f64],
        drive_minus: &[f64],
        dp: &[f64],
        dm: &[f64],
        relative_residual: f64,
    ) -> NetworkSolution {
        let (pb, pw) = self.plus.node_voltages(drive_plus, dp);
        let (mb, mw) = self.minus.node_voltages(drive_minus, dm);
        NetworkSolution {
            v_out,
            relative_residual,
            plus: ArrayVoltages { bitline: pb, wordline: pw },
            minus: ArrayVoltages { bitline: mb, wordline: mw },
            drive: drive_plus.to_vec().into(),
        }
    }

    /// The complete square system `M·x = rhs` in δ form, with unknowns
    /// `[δ₊, δ₋]` (MVM) or `[δ₊, δ₋, u]` (INV), in units of G₀.
    pub fn assemble(&self, v_in: &[f64]) -> Result<(Csr, Vec<f64>)> {
        let (np, nm) = (self.plus.n_unknown(), self.minus.n_unknown());
        let n = self.unknown_count();
        let expected = if self.mode == Mode::Inv { self.rows() } else { self.cols() };
        if v_in.len() != expected {
            return Err(Error::Dimension(format!("{} inputs, expected {expected}", v_in.len())));
        }
        let mut coo = CooBuilder::new(n, n);
        let mut rhs = vec![0.0; n];
        for (net, offset) in [(&self.plus, 0), (&self.minus, np)] {
            for (i, j, v) in net.laplacian.iter() {
                coo.push(offset + i, offset + j, v);
            }
            let cols = net.cols();
            for i in 0..net.rows() {
                for j in 0..cols {
                    let p = i * cols + j;
                    let g = net.cells[(i, j)] * net.sign;
                    for (idx, s) in [(net.b_idx[p], 1.0), (net.w_idx[p], -1.0)] {
                        let Some(k) = idx else { continue };
                        match self.mode {
                            Mode::Inv => coo.push(offset + k, np + nm + j, s * g),
                            Mode::Mvm => rhs[offset + k] -= s * g * v_in[j],
                        }
                    }
                }
            }
        }
        if self.mode == Mode::Inv {
            let vg0 = np + nm;
            for (net, offset) in [(&self.plus, 0), (&self.minus, np)] {
                let cols = net.cols();
                for i in 0..net.rows() {
                    for j in 0..cols {
                        let p = i * cols + j;
                        let g = net.cells[(i, j)];
                        coo.push(vg0 + i, vg0 + j, g * net.sign);
                        if let Some(k) = net.b_idx[p] {
                            coo.push(vg0 + i, offset + k, g);
                        }
                        if let Some(k) = net.w_idx[p] {
                            coo.push(vg0 + i, offset + k, -g);
                        }
                    }
                }
            }
            rhs[vg0..].iter_mut().zip(v_in).for_each(|(r, v)| *r = -v);
        }
        Ok((coo.to_csr(), rhs))
    }

    /// Writes the assembled system in Matrix Market format, followed by the
    /// right-hand side as a dense array section.
    pub fn write_matrix_market<W: std::io::Write>(&self, v_in: &[f64], mut w: W) -> Result<()> {
        let (m, rhs) = self.assemble(v_in)?;
        let comment = format!(
            "crossbar network, mode={:?}, rows={}, cols={}, r_seg={} ohm; units of G0",
            self.mode,
            self.rows(),
            self.cols(),
            self.r_seg
        );
        m.write_matrix_market(&mut w, &comment)?;
        writeln!(w, "%%MatrixMarket matrix array real general")?;
        writeln!(w, "{} 1", rhs.len())?;
        for v in rhs {
            writeln!(w, "{v:.17e}")?;
        }
        Ok(())
    }
}

fn relative(residual: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        if residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        residual / scale
    }
}

/// MVM through the resistive network.
pub fn mvm_network(arr: &ProgrammedArray, v_in: &[f64], cfg: &CircuitConfig) -> Result<Vector> {
    Ok(build_network(arr, cfg, Mode::Mvm)?.solve_mvm(v_in)?.v_out)
}

/// INV through the resistive network.
pub fn inv_network(arr: &ProgrammedArray, v_in: &[f64], cfg: &CircuitConfig) -> Result<Vector> {
    Ok(build_network(arr, cfg, Mode::Inv)?.solve_inv(v_in)?.v_out)
}
