//! Synthesis of the boundary feedback law.
//!
//! With `d = (φ_1′(1), …, φ_N′(1))` and shifts `ρ < γ_1 < … < γ_N`:
//!
//! ```text
//! B₀  = d dᵀ                       (rank one in 1-D)
//! Λ_k = diag(1 / (γ_k − λ_i))
//! B_k = Λ_k B₀ Λ_k
//! B   = (B_1 + … + B_N)⁻¹
//! U_k = ⟨B m(u), Λ_k d⟩,   U = Σ_k U_k = ⟨g, m(u)⟩,   g = B Σ_k Λ_k d
//! ```
//!
//! The rows of `T` are the vectors `Λ_k d`, so `U = ⟨T B m, 𝟙⟩` as well.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::spectral::{
    modal_projection, ModalProjector, SpectralData, StateField, Window, EIGEN_COINCIDENCE_TOL,
};
use crate::{Error, Result};

/// Minimum spacing between consecutive shifts.
pub const MIN_SHIFT_GAP: f64 = 1e-6;

/// `ΣB_k` is refused when `λ_min < SINGULARITY_RATIO · λ_max`.
pub const SINGULARITY_RATIO: f64 = 1e-12;

/// Shift constants `γ_1 < … < γ_N` above the cutoff `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainConfig {
    gammas: Vec<f64>,
    rho: f64,
}

impl GainConfig {
    pub fn new(gammas: Vec<f64>, rho: f64) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidGains("at least one shift is required".into()));
        }
        if let Some(g) = gammas.iter().find(|g| !g.is_finite()) {
            return Err(Error::InvalidGains(format!("non-finite shift {g}")));
        }
        if gammas[0] <= rho {
            return Err(Error::InvalidGains(format!(
                "gamma_1 = {} must exceed rho = {rho}",
                gammas[0]
            )));
        }
        for (k, pair) in gammas.windows(2).enumerate() {
            if pair[1] - pair[0] < MIN_SHIFT_GAP {
                return Err(Error::InvalidGains(format!(
                    "shifts must increase by at least {MIN_SHIFT_GAP}: gamma_{} = {}, gamma_{} = {}",
                    k + 1,
                    pair[0],
                    k + 2,
                    pair[1]
                )));
            }
        }
        Ok(Self { gammas, rho })
    }

    /// `γ_k = ρ + 5k` for `k = 1..=n`.
    pub fn evenly_spaced(rho: f64, n: usize) -> Result<Self> {
        Self::new((1..=n).map(|k| rho + 5.0 * k as f64).collect(), rho)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

/// Every matrix of the gain construction, plus the conditioning of `ΣB_k`.
#[derive(Debug, Clone)]
pub struct GainSet {
    pub gammas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Boundary normal derivatives `d_i = φ_i′(1)`.
    pub d: DVector<f64>,
    pub b0: DMatrix<f64>,
    pub lambda_mats: Vec<DMatrix<f64>>,
    pub bk: Vec<DMatrix<f64>>,
    /// `ΣB_k`.
    pub sum_bk: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub t: DMatrix<f64>,
    /// Spectral condition number of `ΣB_k`.
    pub cond_b: f64,
    /// Smallest eigenvalue of `ΣB_k`.
    pub min_eig_sum: f64,
}

impl GainSet {
    pub fn n(&self) -> usize {
        self.gammas.len()
    }
}

/// `B₀ = d dᵀ`, entries `π² i j (−1)^{i+j}`.
pub fn gram_matrix(spectral: &SpectralData) -> DMatrix<f64> {
    let d = DVector::from_column_slice(spectral.normal_derivs());
    &d * d.transpose()
}

/// `Λ_γ = diag(1/(γ − λ_i))`.
pub fn lambda_matrix(gamma: f64, spectral: &SpectralData) -> Result<DMatrix<f64>> {
    let mut diag = Vec::with_capacity(spectral.n_unstable());
    for (i, &lambda) in spectral.lambdas().iter().enumerate() {
        if (gamma - lambda).abs() <= EIGEN_COINCIDENCE_TOL {
            return Err(Error::Resonance { gamma, j: i + 1, lambda });
        }
        diag.push(1.0 / (gamma - lambda));
    }
    Ok(DMatrix::from_diagonal(&DVector::from_vec(diag)))
}

pub fn assemble_gains(config: &GainConfig, spectral: &SpectralData) -> Result<GainSet> {
    let n = spectral.n_unstable();
    if n == 0 {
        return Err(Error::InvalidGains("no unstable modes below the cutoff; nothing to feed back".into()));
    }
    if config.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: config.len() });
    }
    if config.rho() != spectral.rho() {
        return Err(Error::InvalidGains(format!(
            "shift config built for rho = {} but spectrum uses rho = {}",
            config.rho(),
            spectral.rho()
        )));
    }

    let d = DVector::from_column_slice(spectral.normal_derivs());
    let b0 = gram_matrix(spectral);
    let lambda_mats = config
        .gammas()
        .iter()
        .map(|&g| lambda_matrix(g, spectral))
        .collect::<Result<Vec<_>>>()?;
    let bk: Vec<_> = lambda_mats.iter().map(|l| l * &b0 * l).collect();
    let sum_bk = bk.iter().fold(DMatrix::zeros(n, n), |acc, b| acc + b);

    let eig = SymmetricEigen::new(sum_bk.clone()).eigenvalues;
    let min_eig = eig.min();
    let max_eig = eig.max();
    if !(min_eig > SINGULARITY_RATIO * max_eig) {
        return Err(Error::SingularSystem(format!(
            "sum of B_k has eigenvalue range [{min_eig:e}, {max_eig:e}]"
        )));
    }
    let inv = sum_bk
        .clone()
        .full_piv_lu()
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("pivoted LU of sum of B_k failed".into()))?;
    let b = (&inv + inv.transpose()) * 0.5;

    let mut t = DMatrix::zeros(n, n);
    for (k, l) in lambda_mats.iter().enumerate() {
        t.set_row(k, &(l * &d).transpose());
    }

    Ok(GainSet {
        gammas: config.gammas().to_vec(),
        lambdas: spectral.lambdas().to_vec(),
        d,
        b0,
        lambda_mats,
        bk,
        sum_bk,
        b,
        t,
        cond_b: max_eig / min_eig,
        min_eig_sum: min_eig,
    })
}

/// Numeric and closed-form determinants of the Cauchy matrix `[1/(γ_k − λ_i)]`.
///
/// Closed form: `∏_{i<k} (γ_k − γ_i)(λ_i − λ_k) / ∏_{k,i} (γ_k − λ_i)`.
pub fn cauchy_determinant_check(gammas: &[f64], lambdas: &[f64]) -> Result<(f64, f64)> {
    let n = gammas.len();
    if lambdas.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lambdas.len() });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty Cauchy matrix".into()));
    }
    let degenerate = |what: &str, a: f64, b: f64| {
        Error::InvalidParameter(format!("degenerate Cauchy input: {what} {a} and {b} coincide"))
    };
    for i in 0..n {
        for k in i + 1..n {
            if (gammas[i] - gammas[k]).abs() <= EIGEN_COINCIDENCE_TOL {
                return Err(degenerate("shifts", gammas[i], gammas[k]));
            }
            if (lambdas[i] - lambdas[k]).abs() <= EIGEN_COINCIDENCE_TOL {
                return Err(degenerate("eigenvalues", lambdas[i], lambdas[k]));
            }
        }
        for &lambda in lambdas {
            if (gammas[i] - lambda).abs() <= EIGEN_COINCIDENCE_TOL {
                return Err(degenerate("shift/eigenvalue", gammas[i], lambda));
            }
        }
    }

    let c = DMatrix::from_fn(n, n, |k, i| 1.0 / (gammas[k] - lambdas[i]));
    let numeric = c.full_piv_lu().determinant();

    let mut closed = 1.0;
    for i in 0..n {
        for k in i + 1..n {
            closed *= (gammas[k] - gammas[i]) * (lambdas[i] - lambdas[k]);
        }
    }
    for &g in gammas {
        for &l in lambdas {
            closed /= g - l;
        }
    }
    if numeric == 0.0 || closed == 0.0 {
        return Err(Error::SingularSystem("Cauchy determinant vanished".into()));
    }
    Ok((numeric, closed))
}

/// `g = B Σ_k Λ_k d = B Tᵀ 𝟙`.
pub fn gain_vector(gains: &GainSet) -> DVector<f64> {
    gain_vector_from(&gains.b, &gains.t)
}

pub fn gain_vector_from(b: &DMatrix<f64>, t: &DMatrix<f64>) -> DVector<f64> {
    let ones = DVector::from_element(t.nrows(), 1.0);
    b * (t.transpose() * ones)
}

/// `Σ_k ⟨B m, Λ_k d⟩` evaluated term by term.
pub fn sum_of_feedbacks(gains: &GainSet, modes: &DVector<f64>) -> f64 {
    let bm = &gains.b * modes;
    gains.lambda_mats.iter().map(|l| bm.dot(&(l * &gains.d))).sum()
}

/// `⟨T B m, 𝟙⟩`.
pub fn t_matrix_form(gains: &GainSet, modes: &DVector<f64>) -> f64 {
    (&gains.t * (&gains.b * modes)).sum()
}

/// The control map `u ↦ U` restricted to an observation window.
#[derive(Debug, Clone)]
pub struct FeedbackLaw {
    gain: DVector<f64>,
    /// Row `k` maps the modal vector to `U_k`; equals `T B`.
    per_shift: DMatrix<f64>,
    gammas: Vec<f64>,
    window: Window,
    spectral: SpectralData,
}

impl FeedbackLaw {
    pub fn new(gains: &GainSet, spectral: &SpectralData, window: Window) -> Self {
        Self {
            gain: gain_vector(gains),
            per_shift: &gains.t * &gains.b,
            gammas: gains.gammas.clone(),
            window,
            spectral: spectral.clone(),
        }
    }

    /// A law with no modes: `U ≡ 0`.
    pub fn zero(spectral: &SpectralData) -> Self {
        Self {
            gain: DVector::zeros(0),
            per_shift: DMatrix::zeros(0, 0),
            gammas: Vec::new(),
            window: Window::full(),
            spectral: spectral.clone(),
        }
    }

    pub fn with_window(&self, window: Window) -> Self {
        Self { window, ..self.clone() }
    }

    pub fn gain(&self) -> &DVector<f64> {
        &self.gain
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn n_modes(&self) -> usize {
        self.gain.len()
    }

    pub fn control_from_modes(&self, modes: &[f64]) -> f64 {
        self.gain.iter().zip(modes).map(|(g, m)| g * m).sum()
    }

    /// The individual feedbacks `U_1 … U_N`.
    pub fn shift_controls(&self, modes: &[f64]) -> DVector<f64> {
        &self.per_shift * DVector::from_column_slice(modes)
    }

    pub fn modal_vector(&self, field: &StateField) -> Result<Vec<f64>> {
        (1..=self.n_modes())
            .map(|j| modal_projection(field, j, self.window))
            .collect()
    }

    pub fn projector(&self, field_grid: &crate::spectral::Grid) -> Result<ModalProjector> {
        ModalProjector::new(field_grid, self.n_modes(), self.window)
    }
}

/// `U = Σ_j g_j ∫_a^b u φ_j`.
pub fn feedback_control(field: &StateField, law: &FeedbackLaw) -> Result<f64> {
    if law.n_modes() == 0 {
        return Ok(0.0);
    }
    Ok(law.control_from_modes(&law.modal_vector(field)?))
}
