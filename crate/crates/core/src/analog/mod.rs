//! The two analog primitives (one-step MVM and one-step INV) under an ideal
//! transfer-function engine and a resistive-network engine.

pub mod ideal;
pub mod network;
pub mod sparse;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Vector};
use crate::mapping::ProgrammedArray;

pub use ideal::{inv_ideal, mvm_ideal};
pub use network::{build_network, inv_network, mvm_network, Mode, NetworkModel, NetworkSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Ideal,
    Network,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Engine::Ideal),
            "network" => Ok(Engine::Network),
            other => Err(Error::Config(format!("unknown engine `{other}`"))),
        }
    }
}

/// Which end of a line the driver (bitlines) or sense amplifier (wordlines)
/// is attached to. `Near` is row 0 for bitlines and column 0 for wordlines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineEnd {
    Near,
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CircuitConfig {
    /// Wire resistance per segment, ohms.
    pub r_seg: f64,
    pub engine: Engine,
    pub driver_side: LineEnd,
    pub sense_side: LineEnd,
    /// Relative KCL residual the network solve must reach.
    pub solver_tol: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        CircuitConfig {
            r_seg: 1.0,
            engine: Engine::Ideal,
            driver_side: LineEnd::Near,
            sense_side: LineEnd::Far,
            solver_tol: 1e-10,
        }
    }
}

impl CircuitConfig {
    pub fn ideal() -> Self {
        CircuitConfig::default()
    }

    pub fn network() -> Self {
        CircuitConfig {
            engine: Engine::Network,
            ..CircuitConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_seg >= 0.0 && self.r_seg.is_finite()) {
            return Err(Error::Config(format!("r_seg must be >= 0, got {}", self.r_seg)));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::Config(format!("solver_tol must be > 0, got {}", self.solver_tol)));
        }
        Ok(())
    }
}

/// One-shot MVM dispatched on `cfg.engine`.
pub fn mvm(arr: &ProgrammedArray, v_in: &[f64], cfg: &CircuitConfig) -> Result<Vector> {
    match cfg.engine {
        Engine::Ideal => mvm_ideal(arr, v_in),
        Engine::Network => mvm_network(arr, v_in, cfg),
    }
}

/// One-shot INV dispatched on `cfg.engine`.
pub fn inv(arr: &ProgrammedArray, v_in: &[f64], cfg: &CircuitConfig) -> Result<Vector> {
    match cfg.engine {
        Engine::Ideal => inv_ideal(arr, v_in),
        Engine::Network => inv_network(arr, v_in, cfg),
    }
}

/// A programmed array bound to an engine. Factorizations are built on first
/// use and reused, so an array driven several times (like `A₁` in steps 1
/// and 5) is solved against the same frozen devices at no extra cost.
#[derive(Debug)]
pub struct AnalogArray {
    array: ProgrammedArray,
    cfg: CircuitConfig,
    ideal_lu: OnceLock<Lu>,
    mvm_net: OnceLock<NetworkModel>,
    inv_net: OnceLock<NetworkModel>,
}

impl AnalogArray {
    pub fn new(array: ProgrammedArray, cfg: CircuitConfig) -> Self {
        AnalogArray {
            array,
            cfg,
            ideal_lu: OnceLock::new(),
            mvm_net: OnceLock::new(),
            inv_net: OnceLock::new(),
        }
    }

    pub fn array(&self) -> &ProgrammedArray {
        &self.array
    }

    pub fn rows(&self) -> usize {
        self.array.rows()
    }

    pub fn cols(&self) -> usize {
        self.array.cols()
    }

    /// `v_out = −(G/G₀)·v_in` as realized by the configured engine.
    pub fn mvm(&self, v_in: &[f64]) -> Result<Vector> {
        match self.cfg.engine {
            Engine::Ideal => mvm_ideal(&self.array, v_in),
            Engine::Network => {
                let net = cached(&self.mvm_net, || build_network(&self.array, &self.cfg, Mode::Mvm))?;
                Ok(net.solve_mvm(v_in)?.v_out)
            }
        }
    }

    /// `v_out = −(G/G₀)⁻¹·v_in` as realized by the configured engine.
    pub fn inv(&self, v_in: &[f64]) -> Result<Vector> {
        match self.cfg.engine {
            Engine::Ideal => {
                let lu = cached(&self.ideal_lu, || ideal::factor_ideal(&self.array))?;
                ideal::inv_with_factor(lu, v_in)
            }
            Engine::Network => {
                let net = cached(&self.inv_net, || build_network(&self.array, &self.cfg, Mode::Inv))?;
                Ok(net.solve_inv(v_in)?.v_out)
            }
        }
    }
}

fn cached<T>(cell: &OnceLock<T>, init: impl FnOnce() -> Result<T>) -> Result<&T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let value = init()?;
    Ok(cell.get_or_init(|| value))
}
