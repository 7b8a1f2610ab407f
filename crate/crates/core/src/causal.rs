//! Causality and steepness of test functions, checked two ways.
//!
//! The gradient route tests `g^{μν} f,μ f,ν ≤ 0` (causal) or `≤ -1` (steep)
//! together with `-f,0 ≤ 0`. The operator route tests negative
//! semi-definiteness of `J[D,f]` (causal) and of `J([D,f] + iχ)` or both
//! `J([D,f] ± 1)` (steep) on the spinor fiber at the point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{extend_even, extend_odd, ChiralitySign, CliffordModule};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eigenvalues, largest_eigenvalue, max_abs_diff};
use crate::spacetime::{CovectorSample, SpacetimeModel};

/// Tolerance of the negative semi-definiteness test (largest eigenvalue).
pub const NSD_TOL: f64 = 1e-9;
/// Samples whose margin lies within this multiple of the tolerance are
/// treated as ties in equivalence scans.
pub const BOUNDARY_BAND_FACTOR: f64 = 10.0;
/// Random covector components are drawn uniformly from `[-R, R]`.
pub const COVECTOR_RANGE: f64 = 3.0;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Gradient,
    Operator,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Gradient => "gradient",
            Route::Operator => "operator",
        }
    }
}

/// Outcome of a causality/steepness check at a point or over a grid.
///
/// Margins are the most violated constraint value, `≤ 0` when satisfied.
/// Gradient route: `max(g(∇f,∇f), -f,0)` and `max(g(∇f,∇f) + 1, -f,0)`.
/// Operator route: the largest eigenvalue of the checked matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalVerdict {
    pub causal: bool,
    pub steep: bool,
    pub causal_margin: f64,
    pub steep_margin: f64,
    pub route: Route,
}

fn check_sample(model: &SpacetimeModel, sample: &CovectorSample) -> Result<()> {
    if sample.components.len() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            got: sample.components.len(),
        });
    }
    Ok(())
}

/// Gradient conditions `g^{μν} f,μ f,ν ≤ 0`, `-f,0 ≤ 0`.
pub fn gradient_causal_check(
    model: &SpacetimeModel,
    sample: &CovectorSample,
    tol: f64,
) -> Result<CausalVerdict> {
    check_sample(model, sample)?;
    let norm = model.covector_norm(&sample.point, &sample.components)?;
    let past = -sample.components[0];
    let causal_margin = norm.max(past);
    let steep_margin = (norm + 1.0).max(past);
    Ok(CausalVerdict {
        causal: causal_margin <= tol,
        steep: steep_margin <= tol,
        causal_margin,
        steep_margin,
        route: Route::Gradient,
    })
}

/// Steepness `g^{μν} f,μ f,ν ≤ -1`, `-f,0 ≤ 0`. Same evaluation as
/// [`gradient_causal_check`]; read `steep` and `steep_margin`.
pub fn gradient_steep_check(
    model: &SpacetimeModel,
    sample: &CovectorSample,
    tol: f64,
) -> Result<CausalVerdict> {
    gradient_causal_check(model, sample, tol)
}

fn check_dims(cliff: &CliffordModule, model: &SpacetimeModel) -> Result<()> {
    if cliff.n() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            got: cliff.n(),
        });
    }
    Ok(())
}

fn nsd_margin(m: &nalgebra::DMatrix<crate::linalg::C64>) -> Result<f64> {
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(largest_eigenvalue(m))
}

fn operator_verdict(
    cliff: &CliffordModule,
    model: &SpacetimeModel,
    sample: &CovectorSample,
    tol: f64,
    require_steep: bool,
) -> Result<CausalVerdict> {
    check_dims(cliff, model)?;
    check_sample(model, sample)?;
    let frame = model.frame_at(&sample.point)?;
    let action = cliff.clifford_action(&frame, &sample.components)?;
    let causal_margin = nsd_margin(&action)?;
    let steep_margin = match cliff.steep_operators(&frame, &sample.components) {
        Ok(ops) => ops
            .iter()
            .map(nsd_margin)
            .try_fold(f64::NEG_INFINITY, |acc, m| m.map(|m| acc.max(m)))?,
        Err(e @ Error::MissingChirality(_)) if require_steep => return Err(e),
        Err(Error::MissingChirality(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(CausalVerdict {
        causal: causal_margin <= tol,
        steep: steep_margin <= tol,
        causal_margin,
        steep_margin,
        route: Route::Operator,
    })
}

/// Negative semi-definiteness of `J[D,f]` at the sample point.
pub fn operator_causal_check(
    cliff: &CliffordModule,
    model: &SpacetimeModel,
    sample: &CovectorSample,
    tol: f64,
) -> Result<CausalVerdict> {
    operator_verdict(cliff, model, sample, tol, false)
}

/// Negative semi-definiteness of `J([D,f] + iχ)` (even `n`) or of both
/// `J([D,f] ± 1)` (odd `n`).
pub fn operator_steep_check(
    cliff: &CliffordModule,
    model: &SpacetimeModel,
    sample: &CovectorSample,
    tol: f64,
) -> Result<CausalVerdict> {
    operator_verdict(cliff, model, sample, tol, true)
}

/// Predicted spectrum of `J[D,f]`: `-f,0 ∓ √(g^{ij} f,i f,j)`, each with
/// multiplicity `fiber_dim / 2`, ascending.
pub fn predicted_spectrum(
    model: &SpacetimeModel,
    sample: &CovectorSample,
    fiber_dim: usize,
) -> Result<Vec<f64>> {
    let s = model
        .spatial_covector_norm(&sample.point, &sample.components)?
        .sqrt();
    let f0 = sample.components[0];
    let half = fiber_dim / 2;
    Ok(std::iter::repeat_n(-f0 - s, half)
        .chain(std::iter::repeat_n(-f0 + s, half))
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct ScanSettings {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            trials: 1000,
            seed: 0,
            tol: NSD_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    Causal,
    Steep,
    /// Doubled operator on `H ⊗ ℂ²` versus the pair `J([D,f] ± 1)`.
    OddSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disagreement {
    pub index: usize,
    pub sample: CovectorSample,
    pub predicate: Predicate,
    pub gradient_margin: f64,
    pub operator_margin: f64,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub n: usize,
    pub model: String,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub causal_compared: usize,
    pub causal_agree: usize,
    pub steep_compared: usize,
    pub steep_agree: usize,
    pub causal_count: usize,
    pub steep_count: usize,
    pub disagreements: Vec<Disagreement>,
    /// Max over samples of `|spec(J[D,f]) - predicted|`.
    pub max_spectrum_residual: f64,
    /// Even `n`: max `|J([D,f] + iχ) - J̃[D̃,f̃]|` with `f̃ = f - xₙ`.
    pub max_extension_residual: Option<f64>,
    /// Odd `n`: max `|λmax(J̃[D̃,f̃]) - max λmax(J([D,f] ± 1))|`.
    pub max_split_residual: Option<f64>,
    /// Samples where `steep` held but `causal` did not (either route).
    pub steep_not_causal: usize,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty() && self.steep_not_causal == 0
    }
}

/// Draw random covectors at random points and compare gradient and operator
/// verdicts for causality and steepness.
pub fn equivalence_scan(
    cliff: &CliffordModule,
    model: &SpacetimeModel,
    settings: ScanSettings,
) -> Result<ScanReport> {
    check_dims(cliff, model)?;
    let n = model.n();
    let tol = settings.tol;
    let band = BOUNDARY_BAND_FACTOR * tol;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);

    let even_ext = if n.is_multiple_of(2) {
        Some(extend_even(cliff, ChiralitySign::Plus)?)
    } else {
        None
    };
    let odd_ext = if n % 2 == 1 {
        Some(extend_odd(cliff)?)
    } else {
        None
    };

    let mut report = ScanReport {
        n,
        model: model.to_string(),
        trials: settings.trials,
        seed: settings.seed,
        tol,
        causal_compared: 0,
        causal_agree: 0,
        steep_compared: 0,
        steep_agree: 0,
        causal_count: 0,
        steep_count: 0,
        disagreements: Vec::new(),
        max_spectrum_residual: 0.0,
        max_extension_residual: even_ext.as_ref().map(|_| 0.0),
        max_split_residual: odd_ext.as_ref().map(|_| 0.0),
        steep_not_causal: 0,
    };

    for index in 0..settings.trials {
        let point = model.sample_point(&mut rng);
        let df: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-COVECTOR_RANGE..=COVECTOR_RANGE))
            .collect();
        let sample = CovectorSample::new(point, df)?;

        let grad = gradient_causal_check(model, &sample, tol)?;
        let op = operator_steep_check(cliff, model, &sample, tol)?;
        report.causal_count += grad.causal as usize;
        report.steep_count += grad.steep as usize;
        if (grad.steep && !grad.causal) || (op.steep && !op.causal) {
            report.steep_not_causal += 1;
        }

        let mut compare = |predicate, g: f64, o: f64, gv: bool, ov: bool| -> Option<bool> {
            if g.abs() <= band || o.abs() <= band {
                return None;
            }
            if gv != ov {
                report.disagreements.push(Disagreement {
                    index,
                    sample: sample.clone(),
                    predicate,
                    gradient_margin: g,
                    operator_margin: o,
                });
            }
            Some(gv == ov)
        };
        if let Some(ok) = compare(
            Predicate::Causal,
            grad.causal_margin,
            op.causal_margin,
            grad.causal,
            op.causal,
        ) {
            report.causal_compared += 1;
            report.causal_agree += ok as usize;
        }
        if let Some(ok) = compare(
            Predicate::Steep,
            grad.steep_margin,
            op.steep_margin,
            grad.steep,
            op.steep,
        ) {
            report.steep_compared += 1;
            report.steep_agree += ok as usize;
        }

        let frame = model.frame_at(&sample.point)?;
        let action = cliff.clifford_action(&frame, &sample.components)?;
        let spectrum = hermitian_eigenvalues(&action);
        let predicted = predicted_spectrum(model, &sample, cliff.fiber_dim())?;
        let residual = spectrum
            .iter()
            .zip(&predicted)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.max_spectrum_residual = report.max_spectrum_residual.max(residual);

        let ext_frame = frame.extended();
        let mut ext_df = sample.components.clone();
        ext_df.push(-1.0);
        if let Some(ext) = &even_ext {
            let lifted = ext.clifford_action(&ext_frame, &ext_df)?;
            let direct = &cliff.steep_operators(&frame, &sample.components)?[0];
            let r = max_abs_diff(&lifted, direct);
            let slot = report.max_extension_residual.get_or_insert(0.0);
            *slot = slot.max(r);
        }
        if let Some(ext) = &odd_ext {
            let doubled = ext.clifford_action(&ext_frame, &ext_df)?;
            let doubled_margin = nsd_margin(&doubled)?;
            let slot = report.max_split_residual.get_or_insert(0.0);
            *slot = slot.max((doubled_margin - op.steep_margin).abs());
            if doubled_margin.abs() > band && op.steep_margin.abs() > band {
                let dv = doubled_margin <= tol;
                if dv != op.steep {
                    report.disagreements.push(Disagreement {
                        index,
                        sample: sample.clone(),
                        predicate: Predicate::OddSplit,
                        gradient_margin: doubled_margin,
                        operator_margin: op.steep_margin,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Rectangular lattice of chart points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
}

impl Grid {
    /// `counts[k]` evenly spaced values on `[lower[k], upper[k]]` per axis.
    pub fn uniform(lower: &[f64], upper: &[f64], counts: &[usize]) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len().max(counts.len()),
            });
        }
        let axes = lower
            .iter()
            .zip(upper)
            .zip(counts)
            .map(|((&lo, &hi), &k)| match k {
                0 => Vec::new(),
                1 => vec![0.5 * (lo + hi)],
                _ => (0..k)
                    .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
                    .collect(),
            })
            .collect();
        Ok(Grid { axes })
    }

    pub fn from_axes(axes: Vec<Vec<f64>>) -> Self {
        Grid { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(Vec::len).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        if self.axes.is_empty() {
            Vec::new()
        } else {
            out
        }
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A C¹ test function with an analytic gradient and a checking grid.
pub struct SampledFunction {
    value: ValueFn,
    gradient: GradientFn,
    pub grid: Grid,
}

impl SampledFunction {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        grid: Grid,
    ) -> Self {
        SampledFunction {
            value: Box::new(value),
            gradient: Box::new(gradient),
            grid,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// Largest relative discrepancy between the gradient and central
    /// differences of the value at `x`.
    pub fn gradient_defect(&self, x: &[f64]) -> f64 {
        let g = self.gradient(x);
        let mut worst: f64 = 0.0;
        let mut probe = x.to_vec();
        for mu in 0..x.len() {
            let h = 1e-5 * x[mu].abs().max(1.0);
            probe[mu] = x[mu] + h;
            let up = self.value(&probe);
            probe[mu] = x[mu] - h;
            let down = self.value(&probe);
            probe[mu] = x[mu];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - g[mu]).abs() / g[mu].abs().max(1.0));
        }
        worst
    }
}

/// Relative tolerance of the value/gradient consistency check.
pub const GRADIENT_CONSISTENCY_TOL: f64 = 1e-5;

/// Conjunction of the pointwise verdicts over the function's grid, with the
/// worst margins.
pub fn function_causal_on_grid(
    cliff: &CliffordModule,
    model: &SpacetimeModel,
    f: &SampledFunction,
    route: Route,
    tol: f64,
) -> Result<CausalVerdict> {
    let points = f.grid.points();
    if points.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    let mut out = CausalVerdict {
        causal: true,
        steep: true,
        causal_margin: f64::NEG_INFINITY,
        steep_margin: f64::NEG_INFINITY,
        route,
    };
    for p in points {
        let defect = f.gradient_defect(&p);
        if !(defect <= GRADIENT_CONSISTENCY_TOL) {
            return Err(Error::InconsistentGradient {
                point: p,
                error: defect,
            });
        }
        let sample = CovectorSample::new(p.clone(), f.gradient(&p))?;
        let v = match route {
            Route::Gradient => gradient_causal_check(model, &sample, tol)?,
            Route::Operator => operator_steep_check(cliff, model, &sample, tol)?,
        };
        out.causal &= v.causal;
        out.steep &= v.steep;
        out.causal_margin = out.causal_margin.max(v.causal_margin);
        out.steep_margin = out.steep_margin.max(v.steep_margin);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_gamma_matrices;
    use crate::spacetime::ScaleFactor;

    fn mink(n: usize) -> (CliffordModule, SpacetimeModel) {
        (
            build_gamma_matrices(n).unwrap(),
            SpacetimeModel::minkowski(n).unwrap(),
        )
    }

    fn sample(p: &[f64], df: &[f64]) -> CovectorSample {
        CovectorSample::new(p.to_vec(), df.to_vec()).unwrap()
    }

    #[test]
    fn gradient_causal_examples() {
        let (_, m) = mink(2);
        let v = gradient_causal_check(&m, &sample(&[0.0, 0.0], &[1.0, 0.0]), NSD_TOL).unwrap();
        assert!(v.causal);
        assert_eq!(v.causal_margin, -1.0);
        assert_eq!(v.route, Route::Gradient);

        let v = gradient_causal_check(&m, &sample(&[0.0, 0.0], &[1.0, 2.0]), NSD_TOL).unwrap();
        assert!(!v.causal);
        assert_eq!(v.causal_margin, 3.0);

        let v = gradient_causal_check(&m, &sample(&[0.0, 0.0], &[-1.0, 0.0]), NSD_TOL).unwrap();
        assert!(!v.causal);
        assert_eq!(v.causal_margin, 1.0);
    }

    #[test]
    fn operator_causal_examples() {
        let (c, m) = mink(2);
        let s = sample(&[0.0, 0.0], &[1.0, 0.0]);
        let v = operator_causal_check(&c, &m, &s, NSD_TOL).unwrap();
        assert!(v.causal);
        let frame = m.frame_at(&s.point).unwrap();
        let ev = hermitian_eigenvalues(&c.clifford_action(&frame, &s.components).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] + 1.0).abs() < 1e-12);

        let s = sample(&[0.0, 0.0], &[2.0, 1.0]);
        let v = operator_causal_check(&c, &m, &s, NSD_TOL).unwrap();
        assert!(v.causal);
        assert!((v.causal_margin + 1.0).abs() < 1e-12);

        let s = sample(&[0.0, 0.0], &[1.0, 2.0]);
        let v = operator_causal_check(&c, &m, &s, NSD_TOL).unwrap();
        assert!(!v.causal);
        assert!((v.causal_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_steep_examples() {
        let (_, m) = mink(2);
        let v = gradient_steep_check(&m, &sample(&[0.0, 0.0], &[1.0, 0.0]), NSD_TOL).unwrap();
        assert!(v.steep);
        assert_eq!(v.steep_margin, 0.0);

        let v = gradient_steep_check(&m, &sample(&[0.0, 0.0], &[2.0, 1.0]), NSD_TOL).unwrap();
        assert!(v.steep);

        let v = gradient_steep_check(&m, &sample(&[0.0, 0.0], &[1.0, 0.5]), NSD_TOL).unwrap();
        assert!(v.causal && !v.steep);
        assert!((v.steep_margin - 0.25).abs() < 1e-15);
    }

    #[test]
    fn operator_steep_examples() {
        let (c, m) = mink(2);
        let v = operator_steep_check(&c, &m, &sample(&[0.0, 0.0], &[1.0, 0.0]), NSD_TOL).unwrap();
        assert!(v.steep);
        assert!(v.steep_margin.abs() < 1e-12);

        let s = sample(&[0.0, 0.0], &[1.0, 0.5]);
        let v = operator_steep_check(&c, &m, &s, NSD_TOL).unwrap();
        assert!(v.causal && !v.steep);
        assert!(!gradient_steep_check(&m, &s, NSD_TOL).unwrap().steep);
        // -1 + sqrt(0.25 + 1)
        assert!((v.steep_margin - (1.25f64.sqrt() - 1.0)).abs() < 1e-12);

        let (c3, m3) = mink(3);
        let s = sample(&[0.0; 3], &[2.0, 1.0, 0.0]);
        let v = operator_steep_check(&c3, &m3, &s, NSD_TOL).unwrap();
        assert!(v.steep);
        assert!(gradient_steep_check(&m3, &s, NSD_TOL).unwrap().steep);
        let frame = m3.frame_at(&s.point).unwrap();
        let ops = c3.steep_operators(&frame, &s.components).unwrap();
        assert_eq!(ops.len(), 2);
        // eigenvalues -2 ± sqrt(1 + 1) for both signs
        for op in &ops {
            let ev = hermitian_eigenvalues(op);
            assert!((ev[1] - (-2.0 + 2f64.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_chirality_is_an_error_for_steepness() {
        let m = SpacetimeModel::minkowski(2).unwrap();
        let base = build_gamma_matrices(2).unwrap();
        let ext = extend_even(&base, ChiralitySign::Plus).unwrap();
        // three generators → odd module is fine
        let m3 = SpacetimeModel::minkowski(3).unwrap();
        assert!(
            operator_steep_check(&ext, &m3, &sample(&[0.0; 3], &[1.0, 0.0, 0.0]), NSD_TOL).is_ok()
        );
        assert!(matches!(
            operator_steep_check(&ext, &m, &sample(&[0.0; 2], &[1.0, 0.0]), NSD_TOL),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_hermitian_action_detected() {
        let base = build_gamma_matrices(2).unwrap();
        let mut g = base.gammas().to_vec();
        // a Hermitian γ⁰ breaks Hermiticity of γ⁰γ¹
        g[0] = crate::linalg::pauli(1);
        let bad = CliffordModule::from_gammas(g, ChiralitySign::Plus).unwrap();
        let m = SpacetimeModel::minkowski(2).unwrap();
        assert!(matches!(
            operator_causal_check(&bad, &m, &sample(&[0.0, 0.0], &[0.3, 1.0]), NSD_TOL),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn scans_agree() {
        let flrw_t = SpacetimeModel::flrw(
            2,
            ScaleFactor::Linear {
                slope: 1.0,
                intercept: 0.0,
            },
            0.5,
            4.0,
        )
        .unwrap();
        let cases = [
            (
                build_gamma_matrices(4).unwrap(),
                SpacetimeModel::minkowski(4).unwrap(),
            ),
            (build_gamma_matrices(2).unwrap(), flrw_t),
            (
                build_gamma_matrices(5).unwrap(),
                SpacetimeModel::minkowski(5).unwrap(),
            ),
        ];
        for (c, m) in &cases {
            let r = equivalence_scan(
                c,
                m,
                ScanSettings {
                    trials: 1000,
                    seed: 7,
                    tol: NSD_TOL,
                },
            )
            .unwrap();
            assert!(r.passed(), "{:?}", r.disagreements);
            assert_eq!(r.causal_agree, r.causal_compared);
            assert_eq!(r.steep_agree, r.steep_compared);
            assert!(r.causal_compared > 900);
            assert!(r.max_spectrum_residual < 1e-9);
            // the distribution must exercise both outcomes
            assert!(
                r.causal_count > 10 && r.causal_count < 990,
                "{}",
                r.causal_count
            );
            assert!(r.steep_count > 5, "{}", r.steep_count);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let (c, m) = mink(3);
        let s = ScanSettings {
            trials: 200,
            seed: 42,
            tol: NSD_TOL,
        };
        let a = equivalence_scan(&c, &m, s).unwrap();
        let b = equivalence_scan(&c, &m, s).unwrap();
        assert_eq!(a.causal_count, b.causal_count);
        assert_eq!(a.steep_count, b.steep_count);
        assert_eq!(a.max_spectrum_residual, b.max_spectrum_residual);
    }

    #[test]
    fn grid_enumeration() {
        let g = Grid::uniform(&[0.0, -1.0], &[1.0, 1.0], &[2, 3]).unwrap();
        assert_eq!(g.len(), 6);
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![0.0, -1.0]);
        assert_eq!(pts[5], vec![1.0, 1.0]);
        assert!(Grid::from_axes(vec![]).is_empty());
    }

    fn grid2() -> Grid {
        Grid::uniform(&[-2.0, -3.0], &[2.0, 3.0], &[5, 13]).unwrap()
    }

    #[test]
    fn grid_functions() {
        let (c, m) = mink(2);
        for route in [Route::Gradient, Route::Operator] {
            let t = SampledFunction::new(|x| x[0], |_| vec![1.0, 0.0], grid2());
            let v = function_causal_on_grid(&c, &m, &t, route, NSD_TOL).unwrap();
            assert!(v.causal && v.steep, "{route:?}");
            assert_eq!(v.route, route);

            let wavy = SampledFunction::new(
                |x| x[0] + 0.5 * x[1].sin(),
                |x| vec![1.0, 0.5 * x[1].cos()],
                grid2(),
            );
            let v = function_causal_on_grid(&c, &m, &wavy, route, NSD_TOL).unwrap();
            assert!(v.causal && !v.steep, "{route:?}");

            let x = SampledFunction::new(|x| x[1], |_| vec![0.0, 1.0], grid2());
            let v = function_causal_on_grid(&c, &m, &x, route, NSD_TOL).unwrap();
            assert!(!v.causal && !v.steep, "{route:?}");
        }
    }

    #[test]
    fn grid_rejects_wrong_gradient_and_empty_grid() {
        let (c, m) = mink(2);
        let wrong = SampledFunction::new(|x| 2.0 * x[0], |_| vec![1.0, 0.0], grid2());
        assert!(matches!(
            function_causal_on_grid(&c, &m, &wrong, Route::Gradient, NSD_TOL),
            Err(Error::InconsistentGradient { .. })
        ));
        let empty = SampledFunction::new(|x| x[0], |_| vec![1.0, 0.0], Grid::from_axes(vec![]));
        assert!(function_causal_on_grid(&c, &m, &empty, Route::Gradient, NSD_TOL).is_err());
    }

    #[test]
    fn predicted_spectrum_layout() {
        let m = SpacetimeModel::minkowski(4).unwrap();
        let s = sample(&[0.0; 4], &[1.0, 3.0, 0.0, 4.0]);
        assert_eq!(
            predicted_spectrum(&m, &s, 4).unwrap(),
            vec![-6.0, -6.0, 4.0, 4.0]
        );
    }
}
