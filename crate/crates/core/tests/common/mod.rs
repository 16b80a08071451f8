#![allow(dead_code)]

//! Helpers shared by the integration tests, including a brute-force dense
//! nodal-analysis model of the crossbar that shares no code with the
//! production network engine.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use blockamc::analog::{CircuitConfig, LineEnd};
use blockamc::mapping::ProgrammedArray;
use blockamc::rng::stream;
use blockamc::Matrix;

/// Dense matrix with entries uniform on [-1, 1].
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = stream(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
}

/// Random matrix plus `n` on the diagonal: strictly diagonally dominant, so
/// every leading block and every Schur complement is invertible and well
/// conditioned.
pub fn dominant_matrix(n: usize, seed: u64) -> Matrix {
    let r = random_matrix(n, n, seed);
    Matrix::from_fn(n, n, |i, j| r[(i, j)] + if i == j { n as f64 } else { 0.0 })
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed);
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Absolute node-voltage nodal analysis of one signed crossbar pair, in
/// siemens and volts.
///
/// Per sign array, nodes `B(i,j)` and `W(i,j)` are numbered
/// `base + 2·(i·cols + j)` and `+1`. The cell conductance joins `B(i,j)` to
/// `W(i,j)`, wire conductance `1/r` joins vertical bitline neighbours and
/// horizontal wordline neighbours, and one more wire joins each bitline head
/// to its driver and each wordline tail to its virtual ground at 0 V.
pub struct Mna<'a> {
    arr: &'a ProgrammedArray,
    r: f64,
    head_row: usize,
    tail_col: usize,
}

impl<'a> Mna<'a> {
    pub fn new(arr: &'a ProgrammedArray, cfg: &CircuitConfig) -> Self {
        assert!(cfg.r_seg > 0.0, "the oracle models nonzero wire resistance only");
        Mna {
            arr,
            r: cfg.r_seg,
            head_row: if cfg.driver_side == LineEnd::Near { 0 } else { arr.rows() - 1 },
            tail_col: if cfg.sense_side == LineEnd::Near { 0 } else { arr.cols() - 1 },
        }
    }

    fn per_array(&self) -> usize {
        2 * self.arr.rows() * self.arr.cols()
    }

    fn b(&self, array: usize, i: usize, j: usize) -> usize {
        array * self.per_array() + 2 * (i * self.arr.cols() + j)
    }

    fn w(&self, array: usize, i: usize, j: usize) -> usize {
        self.b(array, i, j) + 1
    }

    fn cells(&self, array: usize) -> &Matrix {
        if array == 0 {
            &self.arr.g_plus
        } else {
            &self.arr.g_minus
        }
    }

    /// `size x size` conductance matrix whose leading block covers the
    /// internal nodes of both arrays; drivers and virtual grounds appear only
    /// through the boundary wires on the diagonal.
    fn stamp(&self, size: usize) -> DMatrix<f64> {
        let (rows, cols) = (self.arr.rows(), self.arr.cols());
        let gw = 1.0 / self.r;
        let mut g = DMatrix::<f64>::zeros(size, size);
        let branch = |g: &mut DMatrix<f64>, a: usize, b: usize, c: f64| {
            g[(a, a)] += c;
            g[(b, b)] += c;
            g[(a, b)] -= c;
            g[(b, a)] -= c;
        };
        for s in 0..2 {
            let cells = self.cells(s);
            for i in 0..rows {
                for j in 0..cols {
                    branch(&mut g, self.b(s, i, j), self.w(s, i, j), cells[(i, j)]);
                    if i + 1 < rows {
                        branch(&mut g, self.b(s, i, j), self.b(s, i + 1, j), gw);
                    }
                    if j + 1 < cols {
                        branch(&mut g, self.w(s, i, j), self.w(s, i, j + 1), gw);
                    }
                }
            }
            for j in 0..cols {
                let h = self.b(s, self.head_row, j);
                g[(h, h)] += gw;
            }
            for i in 0..rows {
                let t = self.w(s, i, self.tail_col);
                g[(t, t)] += gw;
            }
        }
        g
    }

    /// Current flowing from each wordline tail into its virtual ground,
    /// summed over both arrays.
    fn sunk(&self, v: &DVector<f64>) -> Vec<f64> {
        (0..self.arr.rows())
            .map(|i| (0..2).map(|s| v[self.w(s, i, self.tail_col)] / self.r).sum())
            .collect()
    }

    /// MVM: drivers at `v_in` (A₊) and `−v_in` (A₋); `v_out = −I/g0`.
    pub fn mvm(&self, v_in: &[f64]) -> Vec<f64> {
        let n = 2 * self.per_array();
        let g = self.stamp(n);
        let mut rhs = DVector::<f64>::zeros(n);
        for j in 0..self.arr.cols() {
            rhs[self.b(0, self.head_row, j)] += v_in[j] / self.r;
            rhs[self.b(1, self.head_row, j)] -= v_in[j] / self.r;
        }
        let v = g.lu().solve(&rhs).expect("nonsingular nodal matrix");
        self.sunk(&v).into_iter().map(|i| -i / self.arr.g0).collect()
    }

    /// INV: amplifier outputs `u` are extra unknowns that drive the A₊
    /// bitlines (A₋ sees `−u`); each virtual ground balances the input
    /// conductor `g0` from `v_in[i]` against the wordline current.
    pub fn inv(&self, v_in: &[f64]) -> Vec<f64> {
        let n = self.arr.rows();
        let nodes = 2 * self.per_array();
        let size = nodes + n;
        let mut g = self.stamp(size);
        let gw = 1.0 / self.r;
        for j in 0..self.arr.cols() {
            // Driver wire current into the head node: gw·(±u_j − V_head).
            g[(self.b(0, self.head_row, j), nodes + j)] -= gw;
            g[(self.b(1, self.head_row, j), nodes + j)] += gw;
        }
        let mut rhs = DVector::<f64>::zeros(size);
        for i in 0..n {
            for s in 0..2 {
                g[(nodes + i, self.w(s, i, self.tail_col))] += gw;
            }
            rhs[nodes + i] = -self.arr.g0 * v_in[i];
        }
        let x = g.lu().solve(&rhs).expect("nonsingular nodal matrix");
        (0..n).map(|i| x[nodes + i]).collect()
    }
}
