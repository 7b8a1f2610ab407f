//! Finite-dimensional Clifford modules for Lorentzian signature `(-,+,…,+)`.
//!
//! Gamma matrices are built by a tensor-product ladder from a 2×2 base, so
//! every entry is an exact small integer or imaginary unit. The fundamental
//! symmetry is `J = iγ⁰` and, in even dimension, the chirality is
//! `χ = ±i^{n/2+1} γ⁰⋯γ^{n-1}`.

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, c, hermitian_deviation, identity, max_abs_diff, pauli, CMatrix, C64, I,
};
use crate::spacetime::FrameAtPoint;

/// Sign choice in front of the chirality operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChiralitySign {
    #[default]
    Plus,
    Minus,
}

impl ChiralitySign {
    pub fn value(self) -> f64 {
        match self {
            ChiralitySign::Plus => 1.0,
            ChiralitySign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ChiralitySign::Plus => ChiralitySign::Minus,
            ChiralitySign::Minus => ChiralitySign::Plus,
        }
    }

    pub fn from_f64(sign: f64) -> Result<Self> {
        if sign == 1.0 {
            Ok(ChiralitySign::Plus)
        } else if sign == -1.0 {
            Ok(ChiralitySign::Minus)
        } else {
            Err(Error::Domain(format!("sign must be +1 or -1, got {sign}")))
        }
    }
}

/// Gamma matrices, flat metric, fundamental symmetry and (even `n`) chirality
/// for one spacetime dimension.
#[derive(Debug, Clone)]
pub struct CliffordModule {
    n: usize,
    fiber_dim: usize,
    gammas: Vec<CMatrix>,
    eta: Vec<f64>,
    j: CMatrix,
    chi: Option<CMatrix>,
    chi_sign: ChiralitySign,
    // γ⁰γᵃ, the building blocks of J[D,f].
    j_gammas: Vec<CMatrix>,
}

fn flat_metric(n: usize) -> Vec<f64> {
    (0..n).map(|a| if a == 0 { -1.0 } else { 1.0 }).collect()
}

/// `i^k` for integer `k`.
fn i_power(k: usize) -> C64 {
    match k % 4 {
        0 => c(1.0),
        1 => I,
        2 => c(-1.0),
        _ => -I,
    }
}

/// `sign · i^{n/2+1} γ⁰⋯γ^{n-1}`; `gammas.len()` must be even.
fn chirality_of(gammas: &[CMatrix], sign: ChiralitySign) -> CMatrix {
    let n = gammas.len();
    let dim = gammas[0].nrows();
    let product = gammas.iter().fold(identity(dim), |acc, g| acc * g);
    product * (i_power(n / 2 + 1) * sign.value())
}

/// Even-dimensional ladder: base `γ⁰ = iσ¹`, `γ¹ = σ²`; each step maps
/// `Γᵃ ↦ Γᵃ⊗σ¹` and appends `1⊗σ²`, `1⊗σ³`.
fn even_ladder(n: usize) -> Vec<CMatrix> {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let mut gammas = vec![pauli(1) * I, pauli(2)];
    while gammas.len() < n {
        let dim = gammas[0].nrows();
        let s1 = pauli(1);
        let mut next: Vec<CMatrix> = gammas.iter().map(|g| g.kronecker(&s1)).collect();
        next.push(identity(dim).kronecker(&pauli(2)));
        next.push(identity(dim).kronecker(&pauli(3)));
        gammas = next;
    }
    gammas
}

/// Build the Clifford module for dimension `n ≥ 2` with the `+` chirality sign.
pub fn build_gamma_matrices(n: usize) -> Result<CliffordModule> {
    CliffordModule::build(n, ChiralitySign::Plus)
}

impl CliffordModule {
    /// Build the module for dimension `n` with the given chirality sign.
    ///
    /// Odd `n` reuses the fiber of dimension `n - 1` and appends the
    /// (`+`-sign) chirality of that sub-algebra as the last generator.
    pub fn build(n: usize, chi_sign: ChiralitySign) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "spacetime dimension must be at least 2, got {n}"
            )));
        }
        let gammas = if n.is_multiple_of(2) {
            even_ladder(n)
        } else {
            let mut gammas = even_ladder(n - 1);
            let extra = chirality_of(&gammas, ChiralitySign::Plus);
            gammas.push(extra);
            gammas
        };
        Self::assemble(gammas, chi_sign)
    }

    /// Assemble a module from arbitrary generators. `J = iγ⁰` and, for an
    /// even number of generators, `χ` are derived from them. No Clifford
    /// identity is checked here; use [`verify_clifford`].
    pub fn from_gammas(gammas: Vec<CMatrix>, chi_sign: ChiralitySign) -> Result<Self> {
        if gammas.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 generators, got {}",
                gammas.len()
            )));
        }
        let dim = gammas[0].nrows();
        for g in &gammas {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.nrows().max(g.ncols()),
                });
            }
        }
        Self::assemble(gammas, chi_sign)
    }

    fn assemble(gammas: Vec<CMatrix>, chi_sign: ChiralitySign) -> Result<Self> {
        let n = gammas.len();
        let chi = n.is_multiple_of(2).then(|| chirality_of(&gammas, chi_sign));
        Ok(Self::with_parts(gammas, chi, chi_sign))
    }

    fn with_parts(gammas: Vec<CMatrix>, chi: Option<CMatrix>, chi_sign: ChiralitySign) -> Self {
        let n = gammas.len();
        let fiber_dim = gammas[0].nrows();
        let j = &gammas[0] * I;
        let j_gammas = gammas.iter().map(|g| &gammas[0] * g).collect();
        CliffordModule {
            n,
            fiber_dim,
            eta: flat_metric(n),
            j,
            chi,
            chi_sign,
            j_gammas,
            gammas,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    pub fn gamma(&self, a: usize) -> &CMatrix {
        &self.gammas[a]
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Fundamental symmetry `J = iγ⁰`.
    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    pub fn chi(&self) -> Option<&CMatrix> {
        self.chi.as_ref()
    }

    pub fn chi_sign(&self) -> ChiralitySign {
        self.chi_sign
    }

    /// The same module with the opposite chirality sign.
    pub fn with_flipped_chirality(&self) -> Self {
        let sign = self.chi_sign.flipped();
        let chi = self.chi.as_ref().map(|x| -x);
        Self::with_parts(self.gammas.clone(), chi, sign)
    }

    /// Frame components `c_a = e^μ_a f,μ` of a covector.
    pub fn frame_components(&self, frame: &FrameAtPoint, df: &[f64]) -> Result<Vec<f64>> {
        if frame.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: frame.dim(),
            });
        }
        if df.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: df.len(),
            });
        }
        Ok(frame.covector_in_frame(df))
    }

    /// `J[D,f] = γ⁰γᵃ e^μ_a f,μ` on the spinor fiber at the frame's point.
    pub fn clifford_action(&self, frame: &FrameAtPoint, df: &[f64]) -> Result<CMatrix> {
        let comps = self.frame_components(frame, df)?;
        let mut out = CMatrix::zeros(self.fiber_dim, self.fiber_dim);
        for (jg, &ca) in self.j_gammas.iter().zip(&comps) {
            if ca != 0.0 {
                out += jg * c(ca);
            }
        }
        Ok(out)
    }

    /// `[D,f] = -i γᵃ e^μ_a f,μ`.
    pub fn dirac_commutator(&self, frame: &FrameAtPoint, df: &[f64]) -> Result<CMatrix> {
        let comps = self.frame_components(frame, df)?;
        let mut out = CMatrix::zeros(self.fiber_dim, self.fiber_dim);
        for (g, &ca) in self.gammas.iter().zip(&comps) {
            out += g * (-I * ca);
        }
        Ok(out)
    }

    /// Matrices whose joint negative semi-definiteness encodes steepness:
    /// `[J([D,f] + iχ)]` for even `n`, `[J([D,f] + 1), J([D,f] - 1)]` for odd `n`.
    pub fn steep_operators(&self, frame: &FrameAtPoint, df: &[f64]) -> Result<Vec<CMatrix>> {
        let action = self.clifford_action(frame, df)?;
        if self.n.is_multiple_of(2) {
            let chi = self.chi.as_ref().ok_or(Error::MissingChirality(self.n))?;
            let shift = &self.j * chi * I;
            Ok(vec![action + shift])
        } else {
            Ok(vec![&action + &self.j, &action - &self.j])
        }
    }
}

/// Raise an even-dimensional module by one dimension, using `γⁿ = sign·χ` as
/// the extra generator over the same fiber.
pub fn extend_even(module: &CliffordModule, sign: ChiralitySign) -> Result<CliffordModule> {
    if !module.n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "extend_even needs an even dimension, got {}",
            module.n
        )));
    }
    let chi = module
        .chi
        .as_ref()
        .ok_or(Error::MissingChirality(module.n))?;
    let mut gammas = module.gammas.clone();
    gammas.push(chi * c(sign.value()));
    Ok(CliffordModule::with_parts(gammas, None, module.chi_sign))
}

/// Raise an odd-dimensional module by one dimension on the doubled fiber
/// `H ⊗ ℂ²`: `γ̃^μ = γ^μ ⊗ σ¹`, `γ̃ⁿ = 1 ⊗ σ²`, hence `J̃ = J ⊗ σ¹`.
pub fn extend_odd(module: &CliffordModule) -> Result<CliffordModule> {
    if module.n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "extend_odd needs an odd dimension, got {}",
            module.n
        )));
    }
    let s1 = pauli(1);
    let mut gammas: Vec<CMatrix> = module.gammas.iter().map(|g| g.kronecker(&s1)).collect();
    gammas.push(identity(module.fiber_dim).kronecker(&pauli(2)));
    CliffordModule::assemble(gammas, module.chi_sign)
}

/// One checked identity and its deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub identity: String,
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct CliffordReport {
    pub n: usize,
    pub tol: f64,
    pub checks: Vec<IdentityCheck>,
    pub max_deviation: f64,
    pub passed: bool,
}

impl CliffordReport {
    pub fn violations(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks
            .iter()
            .filter(move |c| !(c.deviation <= self.tol))
    }
}

/// Scan every Clifford, Hermiticity, `J` and `χ` identity of the module.
pub fn verify_clifford(module: &CliffordModule, tol: f64) -> CliffordReport {
    let n = module.n;
    let dim = module.fiber_dim;
    let id = identity(dim);
    let mut checks = Vec::new();
    let mut push = |identity: String, deviation: f64| {
        checks.push(IdentityCheck {
            identity,
            deviation,
        })
    };

    for a in 0..n {
        for b in 0..n {
            let expected = if a == b {
                &id * c(2.0 * module.eta[a])
            } else {
                CMatrix::zeros(dim, dim)
            };
            let got = anticommutator(&module.gammas[a], &module.gammas[b]);
            let rhs = if a == b {
                format!("{}", 2.0 * module.eta[a])
            } else {
                "0".to_string()
            };
            push(
                format!("{{g{a},g{b}}}={rhs}"),
                max_abs_diff(&got, &expected),
            );
        }
    }
    for (a, g) in module.gammas.iter().enumerate() {
        if a == 0 {
            push("g0 anti-Hermitian".into(), max_abs_diff(g, &(-g.adjoint())));
        } else {
            push(format!("g{a} Hermitian"), hermitian_deviation(g));
        }
    }

    let j = &module.j;
    push("J Hermitian".into(), hermitian_deviation(j));
    push("J^2=1".into(), max_abs_diff(&(j * j), &id));
    push("J=i*g0".into(), max_abs_diff(j, &(&module.gammas[0] * I)));

    match (&module.chi, n.is_multiple_of(2)) {
        (Some(chi), true) => {
            push("chi Hermitian".into(), hermitian_deviation(chi));
            push("chi^2=1".into(), max_abs_diff(&(chi * chi), &id));
            for (a, g) in module.gammas.iter().enumerate() {
                push(
                    format!("{{chi,g{a}}}=0"),
                    anticommutator(chi, g)
                        .iter()
                        .map(|z| z.norm())
                        .fold(0.0, f64::max),
                );
            }
            push(
                "{chi,J}=0".into(),
                anticommutator(chi, j)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            );
        }
        (None, true) => push("chi present (even n)".into(), f64::INFINITY),
        (Some(_), false) => push("chi absent (odd n)".into(), f64::INFINITY),
        (None, false) => {}
    }

    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    CliffordReport {
        n,
        tol,
        passed: max_deviation <= tol,
        max_deviation,
        checks,
    }
}
