//! Dense statevector simulator.
//!
//! Basis index `b` encodes qubit 0 as its least significant bit. An
//! [`Operator`] is an ordered list of instructions, each of which is a
//! single-qubit gate, a basis permutation of a sub-register (optionally with
//! a per-basis phase), or a dense unitary on a sub-register. Every
//! instruction may carry controls, which may be conditioned on |1⟩ or |0⟩.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalization tolerance enforced on states.
pub const NORM_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex amplitude vector over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state |index⟩.
    ///
    /// Panics if `index >= 2^n_qubits`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    /// Builds a state from raw amplitudes. The length must be a power of two
    /// and the vector must be normalized within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::validation(
                "amplitudes",
                format!("length {len} is not a power of two"),
            ));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::validation(
                "amplitudes",
                format!("squared norm {norm} differs from 1"),
            ));
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Measurement probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability that measuring `qubit` yields `outcome`.
    pub fn probability_of(&self, qubit: usize, outcome: bool) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let want = if outcome { bit } else { 0 };
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b & bit == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Marginal distribution of the integer held by `qubits`, where
    /// `qubits[j]` carries weight `2^j`.
    pub fn register_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (b, a) in self.amplitudes.iter().enumerate() {
            out[extract_bits(b, qubits)] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Applies `op` in place.
    pub fn apply(&mut self, op: &Operator) -> Result<()> {
        if op.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: op.n_qubits,
                found: self.n_qubits,
            });
        }
        let mut scratch = Vec::new();
        for inst in &op.instructions {
            inst.apply(&mut self.amplitudes, &mut scratch);
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }
}

/// Returns `op` applied to a copy of `state`.
pub fn apply(op: &Operator, state: &StateVector) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(op)?;
    Ok(out)
}

/// Elementary single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X,
    H,
    Z,
    /// Rotation about Y: |0⟩ ↦ cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
    Ry(f64),
    /// diag(1, e^{iφ}).
    Phase(f64),
}

impl Gate {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let r = |x: f64| Complex64::new(x, 0.0);
        match self {
            Gate::X => [[ZERO, ONE], [ONE, ZERO]],
            Gate::H => [
                [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
                [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            ],
            Gate::Z => [[ONE, ZERO], [ZERO, r(-1.0)]],
            Gate::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [[r(c), r(-s)], [r(s), r(c)]]
            }
            Gate::Phase(phi) => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, phi)]],
        }
    }

    pub fn adjoint(self) -> Gate {
        match self {
            Gate::Ry(theta) => Gate::Ry(-theta),
            Gate::Phase(phi) => Gate::Phase(-phi),
            g => g,
        }
    }
}

/// A control condition: the instruction fires only when `qubit` reads `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub value: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control { qubit, value: true }
    }

    pub fn off(qubit: usize) -> Self {
        Control {
            qubit,
            value: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct ControlMask {
    mask: usize,
    value: usize,
}

impl ControlMask {
    fn fires(self, b: usize) -> bool {
        b & self.mask == self.value
    }
}

#[derive(Debug, Clone)]
enum Action {
    Gate {
        gate: Gate,
        target: usize,
    },
    Permutation {
        qubits: Vec<usize>,
        table: Arc<Vec<usize>>,
        phases: Option<Arc<Vec<Complex64>>>,
    },
    Unitary {
        qubits: Vec<usize>,
        /// Row-major `dim × dim`.
        matrix: Arc<Vec<Complex64>>,
    },
}

#[derive(Debug, Clone)]
struct Instruction {
    action: Action,
    controls: ControlMask,
}

impl Instruction {
    fn targets(&self) -> Vec<usize> {
        match &self.action {
            Action::Gate { target, .. } => vec![*target],
            Action::Permutation { qubits, .. } | Action::Unitary { qubits, .. } => qubits.clone(),
        }
    }

    fn target_mask(&self) -> usize {
        self.targets().iter().fold(0, |m, q| m | (1 << q))
    }

    fn adjoint(&self) -> Instruction {
        let action = match &self.action {
            Action::Gate { gate, target } => Action::Gate {
                gate: gate.adjoint(),
                target: *target,
            },
            Action::Permutation {
                qubits,
                table,
                phases,
            } => {
                // |r⟩ ↦ φ_r |π(r)⟩ inverts to |π(r)⟩ ↦ conj(φ_r) |r⟩.
                let mut inverse = vec![0; table.len()];
                let mut inv_phases = phases.as_ref().map(|_| vec![ONE; table.len()]);
                for (r, &t) in table.iter().enumerate() {
                    inverse[t] = r;
                    if let (Some(ip), Some(p)) = (inv_phases.as_mut(), phases.as_ref()) {
                        ip[t] = p[r].conj();
                    }
                }
                Action::Permutation {
                    qubits: qubits.clone(),
                    table: Arc::new(inverse),
                    phases: inv_phases.map(Arc::new),
                }
            }
            Action::Unitary { qubits, matrix } => {
                let dim = 1 << qubits.len();
                let mut adj = vec![ZERO; dim * dim];
                for r in 0..dim {
                    for c in 0..dim {
                        adj[c * dim + r] = matrix[r * dim + c].conj();
                    }
                }
                Action::Unitary {
                    qubits: qubits.clone(),
                    matrix: Arc::new(adj),
                }
            }
        };
        Instruction {
            action,
            controls: self.controls,
        }
    }

    fn remap(&self, map: &[usize]) -> Instruction {
        let remap_mask = |mask: usize| {
            (0..usize::BITS as usize)
                .filter(|q| mask >> q & 1 == 1)
                .fold(0, |m, q| m | (1 << map[q]))
        };
        let action = match &self.action {
            Action::Gate { gate, target } => Action::Gate {
                gate: *gate,
                target: map[*target],
            },
            Action::Permutation {
                qubits,
                table,
                phases,
            } => Action::Permutation {
                qubits: qubits.iter().map(|&q| map[q]).collect(),
                table: table.clone(),
                phases: phases.clone(),
            },
            Action::Unitary { qubits, matrix } => Action::Unitary {
                qubits: qubits.iter().map(|&q| map[q]).collect(),
                matrix: matrix.clone(),
            },
        };
        Instruction {
            action,
            controls: ControlMask {
                mask: remap_mask(self.controls.mask),
                value: remap_mask(self.controls.value),
            },
        }
    }

    fn apply(&self, amps: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let ctl = self.controls;
        match &self.action {
            Action::Gate { gate, target } => {
                let [[m00, m01], [m10, m11]] = gate.matrix();
                let tbit = 1usize << target;
                for i in 0..amps.len() {
                    if i & tbit != 0 || !ctl.fires(i) {
                        continue;
                    }
                    let j = i | tbit;
                    let (a, b) = (amps[i], amps[j]);
                    amps[i] = m00 * a + m01 * b;
                    amps[j] = m10 * a + m11 * b;
                }
            }
            Action::Permutation {
                qubits,
                table,
                phases,
            } => {
                let offsets = deposit_table(qubits);
                let reg_mask = offsets[offsets.len() - 1];
                scratch.clear();
                scratch.extend_from_slice(amps);
                for (b, &amp) in scratch.iter().enumerate() {
                    if !ctl.fires(b) {
                        continue;
                    }
                    let r = extract_bits(b, qubits);
                    let dest = (b & !reg_mask) | offsets[table[r]];
                    amps[dest] = match phases {
                        Some(p) => p[r] * amp,
                        None => amp,
                    };
                }
            }
            Action::Unitary { qubits, matrix } => {
                let offsets = deposit_table(qubits);
                let dim = offsets.len();
                let reg_mask = offsets[dim - 1];
                let mut local = vec![ZERO; dim];
                for base in 0..amps.len() {
                    if base & reg_mask != 0 || !ctl.fires(base) {
                        continue;
                    }
                    for (r, v) in local.iter_mut().enumerate() {
                        *v = amps[base | offsets[r]];
                    }
                    for r in 0..dim {
                        let row = &matrix[r * dim..(r + 1) * dim];
                        amps[base | offsets[r]] = row.iter().zip(&local).map(|(m, v)| m * v).sum();
                    }
                }
            }
        }
    }
}

/// Reads the integer held by `qubits` (qubits[j] has weight 2^j) out of `b`.
pub fn extract_bits(b: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |r, (j, &q)| r | ((b >> q) & 1) << j)
}

/// Scatters the bits of `r` onto `qubits`.
pub fn deposit_bits(r: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |b, (j, &q)| b | ((r >> j) & 1) << q)
}

// offsets[r] = deposit_bits(r, qubits); the last entry is the register mask.
fn deposit_table(qubits: &[usize]) -> Vec<usize> {
    (0..1usize << qubits.len())
        .map(|r| deposit_bits(r, qubits))
        .collect()
}

/// A unitary acting on a fixed number of qubits.
#[derive(Debug, Clone)]
pub struct Operator {
    name: String,
    n_qubits: usize,
    instructions: Vec<Instruction>,
}

impl Operator {
    /// The identity on `n_qubits`; gates are appended with the `push_*` methods.
    pub fn identity(n_qubits: usize, name: impl Into<String>) -> Self {
        Operator {
            name: name.into(),
            n_qubits,
            instructions: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Qubits written by at least one instruction.
    pub fn target_qubits(&self) -> BTreeSet<usize> {
        self.instructions.iter().flat_map(|i| i.targets()).collect()
    }

    pub fn push(&mut self, gate: Gate, target: usize) -> Result<&mut Self> {
        self.push_controlled(gate, target, &[])
    }

    pub fn push_controlled(
        &mut self,
        gate: Gate,
        target: usize,
        controls: &[Control],
    ) -> Result<&mut Self> {
        self.check_qubit(target)?;
        let inst = Instruction {
            action: Action::Gate { gate, target },
            controls: self.control_mask(controls, 1 << target)?,
        };
        self.instructions.push(inst);
        Ok(self)
    }

    /// Basis permutation `|r⟩ ↦ |f(r)⟩` on the integer held by `qubits`
    /// (qubits[j] has weight 2^j), identity on every other qubit.
    pub fn permutation(
        n_qubits: usize,
        qubits: &[usize],
        f: impl Fn(usize) -> usize,
        name: impl Into<String>,
    ) -> Result<Self> {
        let table: Vec<usize> = (0..1usize << qubits.len()).map(f).collect();
        Self::permutation_with_phases(n_qubits, qubits, table, None, name)
    }

    /// Like [`Operator::permutation`] with `|r⟩ ↦ phases[r] |table[r]⟩`.
    pub fn permutation_with_phases(
        n_qubits: usize,
        qubits: &[usize],
        table: Vec<usize>,
        phases: Option<Vec<Complex64>>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let mut op = Operator::identity(n_qubits, name);
        let reg_mask = op.register_mask(qubits)?;
        let dim = 1usize << qubits.len();
        if table.len() != dim {
            return Err(Error::Reversibility(format!(
                "table has {} entries, register has {dim} basis states",
                table.len()
            )));
        }
        let mut seen = vec![false; dim];
        for (r, &t) in table.iter().enumerate() {
            if t >= dim {
                return Err(Error::Reversibility(format!(
                    "{r} maps to {t}, outside the register"
                )));
            }
            if std::mem::replace(&mut seen[t], true) {
                return Err(Error::Reversibility(format!(
                    "{t} is the image of more than one basis state"
                )));
            }
        }
        if let Some(p) = &phases {
            if p.len() != dim || p.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
                return Err(Error::validation(
                    "phases",
                    "need one unit-modulus phase per basis state",
                ));
            }
        }
        debug_assert_eq!(reg_mask.count_ones() as usize, qubits.len());
        op.instructions.push(Instruction {
            action: Action::Permutation {
                qubits: qubits.to_vec(),
                table: Arc::new(table),
                phases: phases.map(Arc::new),
            },
            controls: ControlMask::default(),
        });
        Ok(op)
    }

    /// Dense unitary on `qubits`, given row-major. Rejects non-unitary input.
    pub fn register_unitary(
        n_qubits: usize,
        qubits: &[usize],
        matrix: Vec<Complex64>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let mut op = Operator::identity(n_qubits, name);
        op.register_mask(qubits)?;
        let dim = 1usize << qubits.len();
        if matrix.len() != dim * dim {
            return Err(Error::validation(
                "matrix",
                format!("expected {dim}x{dim} entries"),
            ));
        }
        for r in 0..dim {
            for c in 0..dim {
                let dot: Complex64 = (0..dim)
                    .map(|k| matrix[k * dim + r].conj() * matrix[k * dim + c])
                    .sum();
                let want = if r == c { ONE } else { ZERO };
                if (dot - want).norm() > 1e-10 {
                    return Err(Error::validation("matrix", "not unitary"));
                }
            }
        }
        op.instructions.push(Instruction {
            action: Action::Unitary {
                qubits: qubits.to_vec(),
                matrix: Arc::new(matrix),
            },
            controls: ControlMask::default(),
        });
        Ok(op)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Operator) -> Result<Operator> {
        let mut out = self.clone();
        out.append(next)?;
        Ok(out)
    }

    /// Appends `next` to the end of `self`.
    pub fn append(&mut self, next: &Operator) -> Result<&mut Self> {
        if next.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: next.n_qubits,
            });
        }
        self.instructions.extend(next.instructions.iter().cloned());
        Ok(self)
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            name: format!("{}†", self.name),
            n_qubits: self.n_qubits,
            instructions: self
                .instructions
                .iter()
                .rev()
                .map(Instruction::adjoint)
                .collect(),
        }
    }

    /// `self` applied `k` times in sequence.
    pub fn power(&self, k: usize) -> Operator {
        let mut out = Operator::identity(self.n_qubits, format!("{}^{k}", self.name));
        for _ in 0..k {
            out.instructions.extend(self.instructions.iter().cloned());
        }
        out
    }

    /// Acts as `self` where every qubit in `controls` is |1⟩ and as the
    /// identity elsewhere.
    pub fn controlled(&self, controls: &[usize]) -> Result<Operator> {
        let controls: Vec<Control> = controls.iter().map(|&q| Control::on(q)).collect();
        let targets = self.instructions.iter().fold(0, |m, i| m | i.target_mask());
        let added = self.control_mask(&controls, targets)?;
        let mut instructions = Vec::with_capacity(self.instructions.len());
        for inst in &self.instructions {
            let mut inst = inst.clone();
            inst.controls.mask |= added.mask;
            inst.controls.value |= added.value;
            instructions.push(inst);
        }
        Ok(Operator {
            name: format!("c-{}", self.name),
            n_qubits: self.n_qubits,
            instructions,
        })
    }

    /// Places `self` into a wider register, sending local qubit `q` to
    /// `map[q]`.
    pub fn embed(&self, n_qubits: usize, map: &[usize]) -> Result<Operator> {
        if map.len() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: map.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for &q in map {
            if q >= n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits });
            }
            if !seen.insert(q) {
                return Err(Error::validation("map", format!("qubit {q} used twice")));
            }
        }
        Ok(Operator {
            name: self.name.clone(),
            n_qubits,
            instructions: self.instructions.iter().map(|i| i.remap(map)).collect(),
        })
    }

    /// Applies to a copy of `state`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        apply(self, state)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn register_mask(&self, qubits: &[usize]) -> Result<usize> {
        if qubits.is_empty() {
            return Err(Error::validation("qubits", "register is empty"));
        }
        let mut mask = 0usize;
        for &q in qubits {
            self.check_qubit(q)?;
            if mask & (1 << q) != 0 {
                return Err(Error::validation(
                    "qubits",
                    format!("qubit {q} listed twice"),
                ));
            }
            mask |= 1 << q;
        }
        Ok(mask)
    }

    fn control_mask(&self, controls: &[Control], targets: usize) -> Result<ControlMask> {
        let mut out = ControlMask::default();
        for c in controls {
            self.check_qubit(c.qubit)?;
            let bit = 1usize << c.qubit;
            if targets & bit != 0 {
                return Err(Error::ControlOverlap(c.qubit));
            }
            out.mask |= bit;
            if c.value {
                out.value |= bit;
            }
        }
        Ok(out)
    }
}

/// Contiguous register assignment of the CDF circuit: latent factor, asset
/// indicators, loss sum, then the objective qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    pub z_register: Range<usize>,
    pub asset_register: Range<usize>,
    pub sum_register: Range<usize>,
    pub objective: usize,
}

impl RegisterLayout {
    pub fn new(n_z: usize, n_assets: usize, n_sum: usize) -> Self {
        let z_register = 0..n_z;
        let asset_register = n_z..n_z + n_assets;
        let sum_register = asset_register.end..asset_register.end + n_sum;
        let objective = sum_register.end;
        RegisterLayout {
            z_register,
            asset_register,
            sum_register,
            objective,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.objective + 1
    }

    pub fn z_qubits(&self) -> Vec<usize> {
        self.z_register.clone().collect()
    }

    pub fn asset_qubits(&self) -> Vec<usize> {
        self.asset_register.clone().collect()
    }

    pub fn sum_qubits(&self) -> Vec<usize> {
        self.sum_register.clone().collect()
    }
}
