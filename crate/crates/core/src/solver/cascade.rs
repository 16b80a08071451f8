//! Digital planning, programming, and execution of the INV/MVM cascade.
//!
//! A solve happens in three phases: the block tree is planned digitally
//! (partitions and Schur complements at every stage), every array in the
//! tree is programmed once, and then the five-step cascade runs on the
//! programmed arrays. Programming before running is what makes `A₁` see the
//! same frozen devices in steps 1 and 5.

use serde::{Deserialize, Serialize};

use super::partition::{partition, schur_complement};
use crate::analog::{AnalogArray, CircuitConfig};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::mapping::{program_scaled, quantize_opt, MapConfig};
use crate::rng::derive_seed;

/// Digital block tree for one INV operand.
#[derive(Debug, Clone)]
pub(crate) enum PlanInv {
    Leaf(Matrix),
    Block(Box<PlanBlock>),
}

#[derive(Debug, Clone)]
pub(crate) struct PlanBlock {
    pub k: usize,
    pub a1: PlanInv,
    pub a2: Matrix,
    pub a3: Matrix,
    pub a4s: PlanInv,
    pub schur: Matrix,
}

impl PlanInv {
    /// Partitions `a` `depth` times; `k` only applies to the top split.
    pub fn build(a: &Matrix, depth: usize, array_max: usize, k: Option<usize>) -> Result<PlanInv> {
        let n = a.rows();
        if depth == 0 || n == 1 {
            if n > array_max {
                return Err(Error::ArrayTooLarge { rows: n, cols: n, array_max });
            }
            return Ok(PlanInv::Leaf(a.clone()));
        }
        let p = partition(a, &vec![0.0; n], k)?;
        let schur = schur_complement(&p)?;
        Ok(PlanInv::Block(Box::new(PlanBlock {
            k: p.k,
            a1: PlanInv::build(&p.a1, depth - 1, array_max, None)?,
            a4s: PlanInv::build(&schur, depth - 1, array_max, None)?,
            a2: p.a2,
            a3: p.a3,
            schur,
        })))
    }

    /// Dimension of the largest INV leaf.
    pub fn largest_leaf(&self) -> usize {
        match self {
            PlanInv::Leaf(m) => m.rows(),
            PlanInv::Block(b) => b.a1.largest_leaf().max(b.a4s.largest_leaf()),
        }
    }

    /// Largest |entry| over every matrix that will be programmed.
    pub fn max_abs(&self) -> f64 {
        match self {
            PlanInv::Leaf(m) => m.max_abs(),
            PlanInv::Block(b) => b
                .a1
                .max_abs()
                .max(b.a4s.max_abs())
                .max(b.a2.max_abs())
                .max(b.a3.max_abs()),
        }
    }
}

/// Record of one programmed array, for reports and structural checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayInfo {
    pub path: String,
    pub rows: usize,
    pub cols: usize,
    pub scale: f64,
    pub seed: u64,
}

/// Shared programming parameters.
pub(crate) struct Programmer<'a> {
    pub map: &'a MapConfig,
    pub circuit: &'a CircuitConfig,
    pub global_scale: Option<f64>,
    /// Largest physical array; MVM operands are tiled to this size.
    pub array_max: usize,
}

impl Programmer<'_> {
    fn program(&self, m: &Matrix, seed: u64) -> Result<AnalogArray> {
        let s = match self.global_scale {
            Some(s) => s,
            None => m.max_abs(),
        };
        if s == 0.0 {
            return Err(Error::Config("cannot program an all-zero array".into()));
        }
        let arr = program_scaled(&m.scaled(1.0 / s), s, self.map, seed)?;
        Ok(AnalogArray::new(arr, self.circuit.clone()))
    }

    pub fn program_inv(&self, plan: &PlanInv, seed: u64, path: &str) -> Result<InvUnit> {
        match plan {
            PlanInv::Leaf(m) => {
                if m.is_zero() {
                    return Err(Error::Singular(format!("INV block `{path}` is all zero")));
                }
                Ok(InvUnit::Leaf(self.program(m, derive_seed(seed, path))?))
            }
            PlanInv::Block(b) => Ok(InvUnit::Block(Box::new(BlockUnit {
                k: b.k,
                a1: self.program_inv(&b.a1, seed, &join(path, "a1"))?,
                a2: self.program_tiled(&b.a2, seed, &join(path, "a2"))?,
                a3: self.program_tiled(&b.a3, seed, &join(path, "a3"))?,
                a4s: self.program_inv(&b.a4s, seed, &join(path, "a4s"))?,
                schur: b.schur.clone(),
            }))),
        }
    }

    pub fn program_tiled(&self, m: &Matrix, seed: u64, path: &str) -> Result<TiledMvm> {
        let am = self.array_max;
        let mut tiles = Vec::new();
        for r0 in (0..m.rows()).step_by(am) {
            for c0 in (0..m.cols()).step_by(am) {
                let tile = m.block(r0, c0, am.min(m.rows() - r0), am.min(m.cols() - c0));
                if tile.is_zero() {
                    continue;
                }
                let label = if tile.rows() == m.rows() && tile.cols() == m.cols() {
                    path.to_string()
                } else {
                    format!("{path}[{r0},{c0}]")
                };
                tiles.push(Tile { r0, c0, array: self.program(&tile, derive_seed(seed, &label))?, label });
            }
        }
        Ok(TiledMvm { rows: m.rows(), cols: m.cols(), tiles })
    }
}

fn join(path: &str, leaf: &str) -> String {
    if path.is_empty() {
        leaf.to_string()
    } else {
        format!("{path}/{leaf}")
    }
}

pub(crate) struct Tile {
    pub r0: usize,
    pub c0: usize,
    pub label: String,
    pub array: AnalogArray,
}

/// A matrix spread over one or more physical arrays; partial products are
/// summed digitally.
pub(crate) struct TiledMvm {
    pub rows: usize,
    pub cols: usize,
    pub tiles: Vec<Tile>,
}

impl TiledMvm {
    /// `−M·v`, with the circuit's sign.
    pub fn apply(&self, v: &[f64]) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("{} inputs for {} columns", v.len(), self.cols)));
        }
        let mut out = Vector::zeros(self.rows);
        for t in &self.tiles {
            let part = leaf_mvm(&t.array, &v[t.c0..t.c0 + t.array.cols()])?;
            for (o, p) in out[t.r0..t.r0 + t.array.rows()].iter_mut().zip(part.iter()) {
                *o += p;
            }
        }
        Ok(out)
    }

    pub fn arrays(&self, out: &mut Vec<ArrayInfo>) {
        for t in &self.tiles {
            out.push(info(&t.label, &t.array));
        }
    }
}

fn info(path: &str, a: &AnalogArray) -> ArrayInfo {
    ArrayInfo {
        path: path.to_string(),
        rows: a.rows(),
        cols: a.cols(),
        scale: a.array().scale,
        seed: a.array().seed,
    }
}

/// `−B·v` for the true block `B = scale·(G/G₀)`, driving the array with the
/// input rescaled to unit peak voltage.
fn leaf_mvm(arr: &AnalogArray, v: &[f64]) -> Result<Vector> {
    let c = peak(v);
    if c == 0.0 {
        return Ok(Vector::zeros(arr.rows()));
    }
    let out = arr.mvm(&scaled(v, 1.0 / c))?;
    Ok(out.scaled(arr.array().scale * c))
}

/// `−B⁻¹·v`, same voltage bookkeeping as [`leaf_mvm`]; the optional DAC
/// quantizes the unit-peak drive.
fn leaf_inv(arr: &AnalogArray, v: &[f64], dac: Option<u32>) -> Result<Vector> {
    let c = peak(v);
    if c == 0.0 {
        return Ok(Vector::zeros(arr.rows()));
    }
    let drive = quantize_opt(&scaled(v, 1.0 / c), dac, 1.0);
    let out = arr.inv(&drive)?;
    Ok(out.scaled(c / arr.array().scale))
}

fn peak(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn scaled(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().map(|x| x * c).collect()
}

fn adc(v: Vector, bits: Option<u32>) -> Vector {
    match bits {
        Some(_) => {
            let fs = v.max_abs();
            quantize_opt(&v, bits, fs)
        }
        None => v,
    }
}

/// Intermediate vectors of one cascade, each with the sign it carries on
/// the analog path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub k: usize,
    /// `A₄ₛ`, computed digitally.
    pub schur: Matrix,
    /// Step 1 output, `−y_t`.
    pub neg_y_t: Vector,
    /// Step 2 output, `g_t`.
    pub g_t: Vector,
    /// Step 3 input, `−g_s = −g + g_t`.
    pub neg_g_s: Vector,
    /// Step 3 output, `z`.
    pub z: Vector,
    /// Step 4 output, `−f_t`.
    pub neg_f_t: Vector,
    /// Step 5 input, `f_s = −f_t + f`.
    pub f_s: Vector,
    /// Step 5 output, `−y`.
    pub neg_y: Vector,
    /// Traces of nested block solvers used for the INV steps.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nested: Vec<NestedTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedTrace {
    pub step: String,
    pub trace: StageTrace,
}

impl StageTrace {
    pub fn y_t(&self) -> Vector {
        self.neg_y_t.neg()
    }

    pub fn g_s(&self) -> Vector {
        self.neg_g_s.neg()
    }

    pub fn f_t(&self) -> Vector {
        self.neg_f_t.neg()
    }

    pub fn y(&self) -> Vector {
        self.neg_y.neg()
    }
}

/// Sign points of the cascade; used to check that every sign matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum SignPoint {
    NegYt,
    Gt,
    Z,
    NegFt,
    NegY,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunOptions {
    pub dac_bits: Option<u32>,
    pub adc_bits: Option<u32>,
    pub flip: Option<SignPoint>,
}

pub(crate) enum InvUnit {
    Leaf(AnalogArray),
    Block(Box<BlockUnit>),
}

pub(crate) struct BlockUnit {
    pub k: usize,
    pub a1: InvUnit,
    pub a2: TiledMvm,
    pub a3: TiledMvm,
    pub a4s: InvUnit,
    pub schur: Matrix,
}

impl InvUnit {
    /// `−B⁻¹·v`. A nested block solver delivers its digital result, which
    /// is handed on with the INV sign so the outer cascade is unchanged.
    fn inv(&self, v: &[f64], opts: &RunOptions, step: &str, nested: &mut Vec<NestedTrace>) -> Result<Vector> {
        match self {
            InvUnit::Leaf(arr) => leaf_inv(arr, v, opts.dac_bits),
            InvUnit::Block(b) => {
                let inner = RunOptions { flip: None, ..*opts };
                let (x, trace) = b.solve(v, &inner)?;
                nested.push(NestedTrace { step: step.to_string(), trace });
                Ok(x.neg())
            }
        }
    }

    /// Top-level solve of `B·x = b`.
    pub fn solve(&self, b: &[f64], opts: &RunOptions) -> Result<(Vector, Option<StageTrace>)> {
        match self {
            InvUnit::Leaf(arr) => {
                let out = adc(leaf_inv(arr, b, opts.dac_bits)?, opts.adc_bits);
                Ok((out.neg(), None))
            }
            InvUnit::Block(blk) => {
                let (x, trace) = blk.solve(b, opts)?;
                Ok((x, Some(trace)))
            }
        }
    }

    pub fn arrays(&self, path: &str, out: &mut Vec<ArrayInfo>) {
        match self {
            InvUnit::Leaf(a) => out.push(info(path, a)),
            InvUnit::Block(b) => {
                b.a1.arrays(&join(path, "a1"), out);
                b.a2.arrays(out);
                b.a3.arrays(out);
                b.a4s.arrays(&join(path, "a4s"), out);
            }
        }
    }
}

impl BlockUnit {
    /// The five-step cascade for `[[A₁, A₂], [A₃, A₄]]·[y; z] = [f; g]`.
    fn solve(&self, b: &[f64], opts: &RunOptions) -> Result<(Vector, StageTrace)> {
        let n = self.k + self.a2.cols;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs has {} entries for n = {n}", b.len())));
        }
        let flip = |point: SignPoint, v: Vector| if opts.flip == Some(point) { v.neg() } else { v };
        let (f, g) = (&b[..self.k], &b[self.k..]);
        let mut nested = Vec::new();

        // 1: −y_t = INV(A₁, f)
        let neg_y_t = flip(SignPoint::NegYt, self.a1.inv(f, opts, "step1/a1", &mut nested)?);
        // 2: g_t = MVM(A₃, −y_t)
        let g_t = flip(SignPoint::Gt, self.a3.apply(&neg_y_t)?);
        // 3: z = INV(A₄ₛ, −g_s), −g_s = −g + g_t summed at the input node
        let neg_g_s: Vector = g.iter().zip(g_t.iter()).map(|(g, gt)| -g + gt).collect::<Vec<_>>().into();
        let z = self.a4s.inv(&neg_g_s, opts, "step3/a4s", &mut nested)?;
        let z = flip(SignPoint::Z, adc(z, opts.adc_bits));
        // 4: −f_t = MVM(A₂, z)
        let neg_f_t = flip(SignPoint::NegFt, self.a2.apply(&z)?);
        // 5: −y = INV(A₁, f_s), f_s = −f_t + f
        let f_s: Vector = neg_f_t.iter().zip(f).map(|(nf, f)| nf + f).collect::<Vec<_>>().into();
        let neg_y = self.a1.inv(&f_s, opts, "step5/a1", &mut nested)?;
        let neg_y = flip(SignPoint::NegY, adc(neg_y, opts.adc_bits));

        let x = neg_y.neg().concat(&z);
        let trace = StageTrace {
            k: self.k,
            schur: self.schur.clone(),
            neg_y_t,
            g_t,
            neg_g_s,
            z,
            neg_f_t,
            f_s,
            neg_y,
            nested,
        };
        Ok((x, trace))
    }
}
