//! Dense statevector simulator for small qubit counts.
//!
//! Qubit convention is little-endian throughout the crate: qubit `i`
//! corresponds to bit `i` of a basis-state index. This is the single
//! place the convention is defined; the patch encoder and lookup tables
//! inherit it.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use thiserror::Error;

/// Global count of circuit simulations, used to observe that lookup-table
/// and cache paths avoid re-simulation.
static SIM_COUNT: AtomicU64 = AtomicU64::new(0);

pub fn simulation_count() -> u64 {
    SIM_COUNT.load(Ordering::Relaxed)
}

#[derive(Debug, Error)]
pub enum QsimError {
    #[error("basis index {index} out of range for {n_qubits} qubits")]
    BasisIndexOutOfRange { index: usize, n_qubits: usize },
    #[error("gate target {target} out of range for {n_qubits} qubits")]
    TargetOutOfRange { target: usize, n_qubits: usize },
    #[error("invalid gate spec: {0}")]
    InvalidGateSpec(String),
    #[error("circuit parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U3,
    P,
    T,
    H,
    CNot,
    Swap,
    SqrtSwap,
    ControlledU3,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::U3
            | GateKind::P
            | GateKind::T
            | GateKind::H => 1,
            GateKind::CNot | GateKind::Swap | GateKind::SqrtSwap | GateKind::ControlledU3 => 2,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U3 | GateKind::ControlledU3 => 3,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::U3 => "U3",
            GateKind::P => "P",
            GateKind::T => "T",
            GateKind::H => "H",
            GateKind::CNot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::SqrtSwap => "SQRTSWAP",
            GateKind::ControlledU3 => "CU3",
        }
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "RX" => GateKind::Rx,
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "U3" => GateKind::U3,
            "P" => GateKind::P,
            "T" => GateKind::T,
            "H" => GateKind::H,
            "CNOT" => GateKind::CNot,
            "SWAP" => GateKind::Swap,
            "SQRTSWAP" => GateKind::SqrtSwap,
            "CU3" => GateKind::ControlledU3,
            other => return Err(format!("unknown gate kind {other:?}")),
        })
    }
}

/// One gate in a circuit. For two-qubit controlled gates the first target
/// is the control.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub params: Vec<f64>,
}

impl GateSpec {
    pub fn new(kind: GateKind, targets: Vec<usize>, params: Vec<f64>) -> Result<Self, QsimError> {
        let g = GateSpec {
            kind,
            targets,
            params,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), QsimError> {
        if self.targets.len() != self.kind.arity() {
            return Err(QsimError::InvalidGateSpec(format!(
                "{} expects {} targets, got {}",
                self.kind.name(),
                self.kind.arity(),
                self.targets.len()
            )));
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(QsimError::InvalidGateSpec(format!(
                "{} targets must be distinct",
                self.kind.name()
            )));
        }
        if self.params.len() != self.kind.param_count() {
            return Err(QsimError::InvalidGateSpec(format!(
                "{} expects {} params, got {}",
                self.kind.name(),
                self.kind.param_count(),
                self.params.len()
            )));
        }
        Ok(())
    }
}

/// Either a 2x2 or 4x4 unitary, row-major. For two-qubit matrices the
/// local basis index is `bit(targets[0]) + 2 * bit(targets[1])`.
#[derive(Debug, Clone, PartialEq)]
pub enum GateMatrix {
    One([[Complex64; 2]; 2]),
    Two([[Complex64; 4]; 4]),
}

fn u3_entries(theta: f64, phi: f64, lambda: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [
            Complex64::new(c, 0.0),
            -Complex64::from_polar(s, lambda),
        ],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

pub fn gate_matrix(g: &GateSpec) -> Result<GateMatrix, QsimError> {
    g.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    Ok(match g.kind {
        GateKind::Rx => {
            let (c, s) = ((g.params[0] / 2.0).cos(), (g.params[0] / 2.0).sin());
            GateMatrix::One([
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ])
        }
        GateKind::Ry => {
            let (c, s) = ((g.params[0] / 2.0).cos(), (g.params[0] / 2.0).sin());
            GateMatrix::One([
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ])
        }
        GateKind::Rz => {
            let half = g.params[0] / 2.0;
            GateMatrix::One([
                [Complex64::from_polar(1.0, -half), zero],
                [zero, Complex64::from_polar(1.0, half)],
            ])
        }
        GateKind::U3 => GateMatrix::One(u3_entries(g.params[0], g.params[1], g.params[2])),
        GateKind::P => GateMatrix::One([[one, zero], [zero, Complex64::new(0.0, 1.0)]]),
        GateKind::T => GateMatrix::One([
            [one, zero],
            [zero, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
        ]),
        GateKind::H => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            GateMatrix::One([[h, h], [h, -h]])
        }
        GateKind::CNot => {
            // control = targets[0] (local bit 0), target = targets[1] (local bit 1)
            let mut m = [[zero; 4]; 4];
            m[0][0] = one;
            m[2][2] = one;
            m[3][1] = one;
            m[1][3] = one;
            GateMatrix::Two(m)
        }
        GateKind::Swap => {
            let mut m = [[zero; 4]; 4];
            m[0][0] = one;
            m[2][1] = one;
            m[1][2] = one;
            m[3][3] = one;
            GateMatrix::Two(m)
        }
        GateKind::SqrtSwap => {
            let a = Complex64::new(0.5, 0.5);
            let b = Complex64::new(0.5, -0.5);
            let mut m = [[zero; 4]; 4];
            m[0][0] = one;
            m[3][3] = one;
            m[1][1] = a;
            m[1][2] = b;
            m[2][1] = b;
            m[2][2] = a;
            GateMatrix::Two(m)
        }
        GateKind::ControlledU3 => {
            let u = u3_entries(g.params[0], g.params[1], g.params[2]);
            let mut m = [[zero; 4]; 4];
            // control (local bit 0) = 0 subspace untouched
            m[0][0] = one;
            m[2][2] = one;
            m[1][1] = u[0][0];
            m[1][3] = u[0][1];
            m[3][1] = u[1][0];
            m[3][3] = u[1][1];
            GateMatrix::Two(m)
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new_basis_state(n_qubits: usize, basis_index: usize) -> Result<Self, QsimError> {
        assert!(n_qubits > 0, "n_qubits must be positive");
        let dim = 1usize << n_qubits;
        if basis_index >= dim {
            return Err(QsimError::BasisIndexOutOfRange {
                index: basis_index,
                n_qubits,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[basis_index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probability(&self, basis_index: usize) -> f64 {
        self.amplitudes[basis_index].norm_sqr()
    }

    pub fn apply_gate(&mut self, g: &GateSpec) -> Result<(), QsimError> {
        for &t in &g.targets {
            if t >= self.n_qubits {
                return Err(QsimError::TargetOutOfRange {
                    target: t,
                    n_qubits: self.n_qubits,
                });
            }
        }
        match gate_matrix(g)? {
            GateMatrix::One(m) => {
                let mask = 1usize << g.targets[0];
                let dim = self.amplitudes.len();
                let mut i = 0;
                while i < dim {
                    if i & mask == 0 {
                        let j = i | mask;
                        let a0 = self.amplitudes[i];
                        let a1 = self.amplitudes[j];
                        self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                        self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
                    }
                    i += 1;
                }
            }
            GateMatrix::Two(m) => {
                let m0 = 1usize << g.targets[0];
                let m1 = 1usize << g.targets[1];
                let dim = self.amplitudes.len();
                for i in 0..dim {
                    if i & m0 == 0 && i & m1 == 0 {
                        let idx = [i, i | m0, i | m1, i | m0 | m1];
                        let a: Vec<Complex64> =
                            idx.iter().map(|&k| self.amplitudes[k]).collect();
                        for r in 0..4 {
                            self.amplitudes[idx[r]] =
                                m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Index of the highest-probability basis state; ties break toward the
    /// lowest index.
    pub fn most_likely_basis_state(&self) -> usize {
        let mut best = 0usize;
        let mut best_p = self.amplitudes[0].norm_sqr();
        for (i, a) in self.amplitudes.iter().enumerate().skip(1) {
            let p = a.norm_sqr();
            if p > best_p {
                best = i;
                best_p = p;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCircuit {
    pub n_qubits: usize,
    pub gates: Vec<GateSpec>,
    pub seed: u64,
}

impl QuantumCircuit {
    pub fn run(&self, basis_index: usize) -> Result<StateVector, QsimError> {
        SIM_COUNT.fetch_add(1, Ordering::Relaxed);
        let mut state = StateVector::new_basis_state(self.n_qubits, basis_index)?;
        for g in &self.gates {
            state.apply_gate(g)?;
        }
        Ok(state)
    }

    /// Line-oriented text serialization. Header `n_qubits seed`, then one
    /// gate per line: `KIND target[,target] [param,param,param]`, params
    /// printed with 17 significant digits so round-trips are bit-exact.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_qubits, self.seed);
        for g in &self.gates {
            let targets: Vec<String> = g.targets.iter().map(|t| t.to_string()).collect();
            let _ = write!(out, "{} {}", g.kind.name(), targets.join(","));
            if !g.params.is_empty() {
                let params: Vec<String> =
                    g.params.iter().map(|p| format!("{p:.16e}")).collect();
                let _ = write!(out, " {}", params.join(","));
            }
            out.push('\n');
        }
        out
    }

    pub fn deserialize(text: &str) -> Result<Self, QsimError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(QsimError::Parse {
            line: 1,
            msg: "empty circuit file".into(),
        })?;
        let mut parts = header.split_whitespace();
        let n_qubits: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(QsimError::Parse {
                line: 1,
                msg: "header must be `n_qubits seed`".into(),
            })?;
        let seed: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(QsimError::Parse {
                line: 1,
                msg: "header must be `n_qubits seed`".into(),
            })?;
        let mut gates = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let mut fields = line.split_whitespace();
            let kind: GateKind = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|msg| QsimError::Parse { line: lineno, msg })?;
            let targets_str = fields.next().ok_or(QsimError::Parse {
                line: lineno,
                msg: "missing targets".into(),
            })?;
            let targets: Vec<usize> = targets_str
                .split(',')
                .map(|s| {
                    s.parse().map_err(|_| QsimError::Parse {
                        line: lineno,
                        msg: format!("bad target {s:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            let params: Vec<f64> = match fields.next() {
                Some(ps) => ps
                    .split(',')
                    .map(|s| {
                        s.parse().map_err(|_| QsimError::Parse {
                            line: lineno,
                            msg: format!("bad param {s:?}"),
                        })
                    })
                    .collect::<Result<_, _>>()?,
                None => Vec::new(),
            };
            let gate = GateSpec::new(kind, targets, params).map_err(|e| QsimError::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            for &t in &gate.targets {
                if t >= n_qubits {
                    return Err(QsimError::Parse {
                        line: lineno,
                        msg: format!("target {t} out of range for {n_qubits} qubits"),
                    });
                }
            }
            gates.push(gate);
        }
        Ok(QuantumCircuit {
            n_qubits,
            gates,
            seed,
        })
    }
}
