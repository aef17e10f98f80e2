//! Builders for the loss-CDF oracle and its Grover operator.
//!
//! The oracle is `A = C·S·U` on the layout of [`RegisterLayout`]: `U` loads
//! the default indicators (optionally conditioned on the latent factor), `S`
//! writes the weighted loss into the sum register and `C` flips the
//! objective qubit when the loss is at most the threshold.

use serde::{Deserialize, Serialize};

use crate::circuit::{Control, Gate, Operator, RegisterLayout, StateVector};
use crate::distributions::{
    angle_of, conditional_pd, fit_linear_angles, AngleFit, LatentGrid, Portfolio,
};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// How the conditional default angles are loaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadingMode {
    /// One uncontrolled rotation plus one controlled rotation per latent
    /// qubit, following a first-order fit of the angle.
    #[default]
    Linear,
    /// One rotation per grid point, controlled on the whole latent register.
    /// Reproduces the discretized model exactly.
    Exact,
}

impl std::str::FromStr for LoadingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(LoadingMode::Linear),
            "exact" => Ok(LoadingMode::Exact),
            other => Err(Error::validation(
                "mode",
                format!("unknown loading mode '{other}'"),
            )),
        }
    }
}

impl RegisterLayout {
    /// Layout for `portfolio` with `n_z` latent qubits (0 for the independent model).
    pub fn for_portfolio(portfolio: &Portfolio, n_z: usize) -> Self {
        RegisterLayout::new(n_z, portfolio.len(), portfolio.n_sum_qubits())
    }
}

/// Independent defaults: `RY(2·arcsin√p⁰_k)` on asset qubit k. Acts on K qubits.
pub fn build_u_independent(portfolio: &Portfolio) -> Result<Operator> {
    let mut op = Operator::identity(portfolio.len(), "U");
    for (k, asset) in portfolio.assets().iter().enumerate() {
        op.push(Gate::Ry(angle_of(asset.pd0)?), k)?;
    }
    Ok(op)
}

/// State preparation `|0⟩ ↦ Σ_i √q_i |i⟩` on `n` qubits, realized as the
/// Householder reflection exchanging |0⟩ and the target state.
pub fn amplitude_loader(probs: &[f64], name: &str) -> Result<Operator> {
    let dim = probs.len();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::validation("probs", "length must be a power of two"));
    }
    let n = dim.trailing_zeros() as usize;
    let psi: Vec<f64> = probs.iter().map(|q| q.max(0.0).sqrt()).collect();
    let mut v = psi.iter().map(|p| -p).collect::<Vec<_>>();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let id = if r == c { 1.0 } else { 0.0 };
            let refl = if vv > 0.0 {
                2.0 * v[r] * v[c] / vv
            } else {
                0.0
            };
            matrix[r * dim + c] = Complex64::new(id - refl, 0.0);
        }
    }
    Operator::register_unitary(n, &(0..n).collect::<Vec<_>>(), matrix, name)
}

/// Conditional defaults on `n_z + K` qubits (latent register first).
///
/// `fits` is only read in [`LoadingMode::Linear`].
pub fn build_u_gci(
    portfolio: &Portfolio,
    grid: &LatentGrid,
    fits: &[AngleFit],
    mode: LoadingMode,
) -> Result<Operator> {
    let n_z = grid.n_z();
    let n = n_z + portfolio.len();
    let z_qubits: Vec<usize> = (0..n_z).collect();
    let mut op = amplitude_loader(grid.probs(), "Z")?.embed(n, &z_qubits)?;
    match mode {
        LoadingMode::Linear => {
            if fits.len() != portfolio.len() {
                return Err(Error::validation("fits", "need one angle fit per asset"));
            }
            for (k, fit) in fits.iter().enumerate() {
                let fit = fit.clamped(grid.len());
                let target = n_z + k;
                op.push(Gate::Ry(fit.intercept), target)?;
                for j in 0..n_z {
                    let angle = fit.slope * (1u64 << j) as f64;
                    op.push_controlled(Gate::Ry(angle), target, &[Control::on(j)])?;
                }
            }
        }
        LoadingMode::Exact => {
            for (i, &z) in grid.points().iter().enumerate() {
                let controls: Vec<Control> = (0..n_z)
                    .map(|j| Control {
                        qubit: j,
                        value: i >> j & 1 == 1,
                    })
                    .collect();
                for (k, asset) in portfolio.assets().iter().enumerate() {
                    let theta = angle_of(conditional_pd(asset, z)?)?;
                    op.push_controlled(Gate::Ry(theta), n_z + k, &controls)?;
                }
            }
        }
    }
    Ok(op.with_name("U"))
}

/// `|x⟩|s⟩ ↦ |x⟩|s ⊕ λ·x⟩` on K asset qubits followed by n_S sum qubits.
pub fn build_s(portfolio: &Portfolio) -> Result<Operator> {
    let k = portfolio.len();
    let n_s = portfolio.n_sum_qubits();
    let lgds: Vec<u64> = portfolio.assets().iter().map(|a| a.lgd).collect();
    let qubits: Vec<usize> = (0..k + n_s).collect();
    Operator::permutation(
        k + n_s,
        &qubits,
        |r| {
            let x = r & ((1 << k) - 1);
            let s = r >> k;
            let loss = lgds
                .iter()
                .enumerate()
                .filter(|(j, _)| x >> j & 1 == 1)
                .map(|(_, l)| *l as usize)
                .sum::<usize>();
            x | (s ^ loss) << k
        },
        "S",
    )
}

/// `|i⟩|b⟩ ↦ |i⟩|b ⊕ [i ≤ x]⟩` on n_S sum qubits followed by the objective.
pub fn build_c(threshold: u64, n_s: usize) -> Result<Operator> {
    let max = (1u64 << n_s) - 1;
    if threshold > max {
        return Err(Error::validation(
            "threshold",
            format!("{threshold} exceeds the largest {n_s}-qubit value {max}"),
        ));
    }
    let x = threshold as usize;
    Operator::permutation(
        n_s + 1,
        &(0..=n_s).collect::<Vec<_>>(),
        |r| {
            let i = r & ((1 << n_s) - 1);
            if i <= x {
                r ^ (1 << n_s)
            } else {
                r
            }
        },
        "C",
    )
}

/// `A = C·S·U` with the objective qubit encoding `ℙ[loss ≤ threshold]`.
#[derive(Debug, Clone)]
pub struct CdfOracle {
    pub operator: Operator,
    pub layout: RegisterLayout,
    pub threshold: u64,
    pub portfolio: Portfolio,
    pub grid: Option<LatentGrid>,
    pub mode: LoadingMode,
    /// Angle fits used in linear mode; empty otherwise.
    pub fits: Vec<AngleFit>,
}

impl CdfOracle {
    /// `A|0…0⟩`.
    pub fn prepared_state(&self) -> Result<StateVector> {
        self.operator
            .apply(&StateVector::zero(self.layout.n_qubits()))
    }

    /// Probability of the objective qubit reading |1⟩ after `A|0…0⟩`.
    pub fn amplitude(&self) -> Result<f64> {
        self.prepared_state()?
            .probability_of(self.layout.objective, true)
    }

    /// Largest angle-fit residual over the assets (0 in exact mode).
    pub fn max_fit_residual(&self) -> f64 {
        self.fits.iter().map(|f| f.residual).fold(0.0, f64::max)
    }
}

/// Builds the CDF oracle. `grid = None` selects the independent model.
pub fn build_a(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    threshold: u64,
    mode: LoadingMode,
) -> Result<CdfOracle> {
    let n_z = grid.map_or(0, |g| g.n_z());
    let layout = RegisterLayout::for_portfolio(portfolio, n_z);
    let n = layout.n_qubits();
    let n_s = layout.sum_register.len();

    let mut fits = Vec::new();
    let u = match grid {
        None => build_u_independent(portfolio)?.embed(n, &layout.asset_qubits())?,
        Some(grid) => {
            if mode == LoadingMode::Linear {
                fits = portfolio
                    .assets()
                    .iter()
                    .map(|a| fit_linear_angles(a, grid))
                    .collect::<Result<_>>()?;
            }
            let map: Vec<usize> = layout
                .z_qubits()
                .into_iter()
                .chain(layout.asset_qubits())
                .collect();
            build_u_gci(portfolio, grid, &fits, mode)?.embed(n, &map)?
        }
    };
    let s_map: Vec<usize> = layout
        .asset_qubits()
        .into_iter()
        .chain(layout.sum_qubits())
        .collect();
    let s = build_s(portfolio)?.embed(n, &s_map)?;
    let mut c_map = layout.sum_qubits();
    c_map.push(layout.objective);
    let c = build_c(threshold, n_s)?.embed(n, &c_map)?;

    let operator = u.then(&s)?.then(&c)?.with_name(format!("A(x={threshold})"));
    Ok(CdfOracle {
        operator,
        layout,
        threshold,
        portfolio: portfolio.clone(),
        grid: grid.cloned(),
        mode,
        fits,
    })
}

/// `Q = A·S₀·A†·S_ψ₀` on the state qubits of `A` plus one ancilla.
///
/// `S_ψ₀` puts a phase −1 on the objective-|0⟩ component. `S₀` puts a
/// phase −1 on the all-zeros state by computing "all state qubits are zero"
/// into the ancilla, applying Z there and uncomputing. The ancilla must
/// start and therefore ends in |0⟩.
#[derive(Debug, Clone)]
pub struct GroverOperator {
    pub operator: Operator,
    /// Qubits of the preparation operator.
    pub n_state: usize,
    pub objective: usize,
    pub ancilla: usize,
}

impl GroverOperator {
    /// Grover operator for an arbitrary preparation `a` whose success flag is `objective`.
    pub fn new(a: &Operator, objective: usize) -> Result<Self> {
        let n_state = a.arity();
        if objective >= n_state {
            return Err(Error::QubitIndex {
                index: objective,
                n_qubits: n_state,
            });
        }
        let n = n_state + 1;
        let ancilla = n_state;
        let state_map: Vec<usize> = (0..n_state).collect();
        let a_wide = a.embed(n, &state_map)?;

        let mut s_psi0 = Operator::identity(n, "S_psi0");
        s_psi0
            .push(Gate::X, objective)?
            .push(Gate::Z, objective)?
            .push(Gate::X, objective)?;

        let all_zero: Vec<Control> = (0..n_state).map(Control::off).collect();
        let mut s_0 = Operator::identity(n, "S_0");
        s_0.push_controlled(Gate::X, ancilla, &all_zero)?
            .push(Gate::Z, ancilla)?
            .push_controlled(Gate::X, ancilla, &all_zero)?;

        let operator = s_psi0
            .then(&a_wide.adjoint())?
            .then(&s_0)?
            .then(&a_wide)?
            .with_name("Q");
        Ok(GroverOperator {
            operator,
            n_state,
            objective,
            ancilla,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_state + 1
    }
}

/// Grover operator of a CDF oracle.
pub fn build_q(oracle: &CdfOracle) -> Result<GroverOperator> {
    GroverOperator::new(&oracle.operator, oracle.layout.objective)
}
