//! Model spacetimes in normalized temporal gauge (`g₀₀ = -1`, `g₀ᵢ = 0`).
//!
//! Two families are built in: Minkowski space and spatially flat FLRW
//! `-dt² + a(t)² |dx|²` on a declared time interval where `a > 0`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Half-width of the spatial box used when drawing random chart points.
pub const SAMPLE_SPATIAL_EXTENT: f64 = 5.0;
/// Width of the band around the light cone reported as null.
pub const NULL_TOL: f64 = 1e-10;

/// Scale factor `a(t)`, restricted to a small whitelist of closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleFactor {
    /// `a(t) = c`
    Constant(f64),
    /// `a(t) = slope·t + intercept`
    Linear { slope: f64, intercept: f64 },
    /// `a(t) = coeff·t^exponent`
    Power { coeff: f64, exponent: f64 },
}

impl ScaleFactor {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            ScaleFactor::Constant(c) => c,
            ScaleFactor::Linear { slope, intercept } => slope * t + intercept,
            ScaleFactor::Power { coeff, exponent } => coeff * t.powf(exponent),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            ScaleFactor::Constant(_) => 0.0,
            ScaleFactor::Linear { slope, .. } => slope,
            ScaleFactor::Power { coeff, exponent } => coeff * exponent * t.powf(exponent - 1.0),
        }
    }

    /// Conformal time `∫_{t0}^{t1} dt / a(t)`; assumes `a > 0` on the interval.
    pub fn conformal_time(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            ScaleFactor::Constant(c) => (t1 - t0) / c,
            ScaleFactor::Linear { slope, intercept } => {
                if slope == 0.0 {
                    (t1 - t0) / intercept
                } else {
                    (self.value(t1) / self.value(t0)).ln() / slope
                }
            }
            ScaleFactor::Power { coeff, exponent } => {
                if exponent == 1.0 {
                    (t1 / t0).ln() / coeff
                } else {
                    let k = 1.0 - exponent;
                    (t1.powf(k) - t0.powf(k)) / (coeff * k)
                }
            }
        }
    }

    /// Parse `c`, `t`, `c*t`, `c*t+d`, `t-d`, `t^p` or `c*t^p`.
    pub fn parse(expr: &str) -> Result<Self> {
        let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Config(format!("unsupported scale factor expression '{expr}'"));
        let num = |x: &str| x.parse::<f64>().ok().filter(|v| v.is_finite());

        let Some(pos) = s.find('t') else {
            return num(&s).map(ScaleFactor::Constant).ok_or_else(bad);
        };
        let (head, tail) = (&s[..pos], &s[pos + 1..]);
        let coeff = match head {
            "" => 1.0,
            "-" => -1.0,
            _ => head.strip_suffix('*').and_then(num).ok_or_else(bad)?,
        };
        if tail.is_empty() {
            return Ok(ScaleFactor::Linear {
                slope: coeff,
                intercept: 0.0,
            });
        }
        if let Some(p) = tail.strip_prefix('^') {
            let exponent = num(p).ok_or_else(bad)?;
            return Ok(ScaleFactor::Power { coeff, exponent });
        }
        if tail.starts_with('+') || tail.starts_with('-') {
            let intercept = num(tail).ok_or_else(bad)?;
            return Ok(ScaleFactor::Linear {
                slope: coeff,
                intercept,
            });
        }
        Err(bad())
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScaleFactor::Constant(c) => write!(f, "{c}"),
            ScaleFactor::Linear { slope, intercept } => {
                write!(f, "{slope}*t")?;
                if intercept != 0.0 {
                    write!(f, "{intercept:+}")?;
                }
                Ok(())
            }
            ScaleFactor::Power { coeff, exponent } => write!(f, "{coeff}*t^{exponent}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Minkowski,
    Flrw {
        scale: ScaleFactor,
        t_min: f64,
        t_max: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeModel {
    n: usize,
    kind: ModelKind,
}

impl fmt::Display for SpacetimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModelKind::Minkowski => write!(f, "minkowski"),
            ModelKind::Flrw {
                scale,
                t_min,
                t_max,
            } => write!(f, "flrw(a={scale};t=[{t_min};{t_max}])"),
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "spacetime dimension must be at least 2, got {n}"
        )));
    }
    Ok(())
}

impl SpacetimeModel {
    pub fn minkowski(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(SpacetimeModel {
            n,
            kind: ModelKind::Minkowski,
        })
    }

    /// FLRW on the time interval `[t_min, t_max]`; rejects scale factors that
    /// are not strictly positive there.
    pub fn flrw(n: usize, scale: ScaleFactor, t_min: f64, t_max: f64) -> Result<Self> {
        check_dim(n)?;
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::Domain(format!(
                "invalid time domain [{t_min}, {t_max}]"
            )));
        }
        let positive = match scale {
            ScaleFactor::Constant(c) => c > 0.0,
            // linear: positivity at both ends suffices
            ScaleFactor::Linear { .. } => scale.value(t_min) > 0.0 && scale.value(t_max) > 0.0,
            ScaleFactor::Power { coeff, .. } => coeff > 0.0 && t_min > 0.0,
        };
        if !positive {
            return Err(Error::Domain(format!(
                "scale factor a(t) = {scale} is not positive on [{t_min}, {t_max}]"
            )));
        }
        Ok(SpacetimeModel {
            n,
            kind: ModelKind::Flrw {
                scale,
                t_min,
                t_max,
            },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn is_minkowski(&self) -> bool {
        matches!(self.kind, ModelKind::Minkowski)
    }

    /// Time interval on which the model is defined.
    pub fn time_domain(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Minkowski => (f64::NEG_INFINITY, f64::INFINITY),
            ModelKind::Flrw { t_min, t_max, .. } => (t_min, t_max),
        }
    }

    /// Validate a chart point and return the spatial scale `a(t)` there.
    pub fn scale_at(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {point:?}")));
        }
        match self.kind {
            ModelKind::Minkowski => Ok(1.0),
            ModelKind::Flrw {
                scale,
                t_min,
                t_max,
            } => {
                let t = point[0];
                if t < t_min || t > t_max {
                    return Err(Error::Domain(format!(
                        "t = {t} outside the model domain [{t_min}, {t_max}]"
                    )));
                }
                let a = scale.value(t);
                if a <= 0.0 {
                    return Err(Error::Domain(format!("a({t}) = {a} is not positive")));
                }
                Ok(a)
            }
        }
    }

    pub fn metric_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let a = self.scale_at(point)?;
        Ok(self.diagonal(-1.0, a * a))
    }

    pub fn inverse_metric_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let a = self.scale_at(point)?;
        Ok(self.diagonal(-1.0, 1.0 / (a * a)))
    }

    fn diagonal(&self, time: f64, space: f64) -> DMatrix<f64> {
        let diag = DVector::from_fn(self.n, |i, _| if i == 0 { time } else { space });
        DMatrix::from_diagonal(&diag)
    }

    /// Pseudo-orthonormal frame `e^μ_a` adapted to `∂_t`: `e⁰₀ = 1`, mixed
    /// time components zero, spatial block from the Cholesky factor of `g_ij`.
    pub fn frame_at(&self, point: &[f64]) -> Result<FrameAtPoint> {
        let g = self.metric_at(point)?;
        let n = self.n;
        let spatial = g.view((1, 1), (n - 1, n - 1)).into_owned();
        let chol = spatial
            .cholesky()
            .ok_or_else(|| Error::Domain("spatial metric is not positive definite".into()))?;
        let lower_inv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular spatial metric".into()))?;
        let mut e = DMatrix::zeros(n, n);
        e[(0, 0)] = 1.0;
        e.view_mut((1, 1), (n - 1, n - 1))
            .copy_from(&lower_inv.transpose());
        Ok(FrameAtPoint {
            point: point.to_vec(),
            e,
        })
    }

    /// `g^{μν} f,μ f,ν` at a point.
    pub fn covector_norm(&self, point: &[f64], df: &[f64]) -> Result<f64> {
        let a = self.scale_at(point)?;
        self.check_covector(df)?;
        Ok(-df[0] * df[0] + spatial_norm_sq(df) / (a * a))
    }

    /// `g^{ij} f,i f,j`, the spatial part of the inverse-metric norm.
    pub fn spatial_covector_norm(&self, point: &[f64], df: &[f64]) -> Result<f64> {
        let a = self.scale_at(point)?;
        self.check_covector(df)?;
        Ok(spatial_norm_sq(df) / (a * a))
    }

    /// `g(v,v)` for a tangent vector at a point.
    pub fn vector_norm(&self, point: &[f64], v: &[f64]) -> Result<f64> {
        let a = self.scale_at(point)?;
        self.check_covector(v)?;
        Ok(-v[0] * v[0] + a * a * spatial_norm_sq(v))
    }

    fn check_covector(&self, df: &[f64]) -> Result<()> {
        if df.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: df.len(),
            });
        }
        Ok(())
    }

    /// Random chart point: `t` uniform in the time domain (Minkowski: in the
    /// spatial box), spatial coordinates uniform in the sampling box.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let ext = SAMPLE_SPATIAL_EXTENT;
        let (lo, hi) = match self.kind {
            ModelKind::Minkowski => (-ext, ext),
            ModelKind::Flrw { t_min, t_max, .. } => (t_min, t_max),
        };
        let mut p = Vec::with_capacity(self.n);
        p.push(rng.random_range(lo..=hi));
        for _ in 1..self.n {
            p.push(rng.random_range(-ext..=ext));
        }
        p
    }

    /// Causal character and time orientation of the gradient of `f`.
    pub fn classify_covector(&self, sample: &CovectorSample) -> Result<CovectorClass> {
        let df = &sample.components;
        let norm = self.covector_norm(&sample.point, df)?;
        if df.iter().all(|&x| x == 0.0) {
            return Ok(CovectorClass::Zero);
        }
        let character = if norm > NULL_TOL {
            CausalCharacter::Spacelike
        } else if norm < -NULL_TOL {
            CausalCharacter::Timelike
        } else {
            CausalCharacter::Null
        };
        // g(∇f, ∂_t) = -f,0 in this gauge
        let orientation = match character {
            CausalCharacter::Spacelike => Orientation::None,
            _ if -df[0] < 0.0 => Orientation::PastDirected,
            _ if -df[0] > 0.0 => Orientation::FutureDirected,
            _ => Orientation::None,
        };
        Ok(CovectorClass::NonZero {
            character,
            orientation,
        })
    }
}

fn spatial_norm_sq(v: &[f64]) -> f64 {
    v[1..].iter().map(|x| x * x).sum()
}

/// Vierbein components `e^μ_a` (row `μ`, column `a`) at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAtPoint {
    pub point: Vec<f64>,
    pub e: DMatrix<f64>,
}

impl FrameAtPoint {
    pub fn identity(point: Vec<f64>) -> Self {
        let n = point.len();
        FrameAtPoint {
            point,
            e: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    /// `c_a = e^μ_a f,μ`.
    pub fn covector_in_frame(&self, df: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|a| (0..n).map(|mu| self.e[(mu, a)] * df[mu]).sum())
            .collect()
    }

    /// Frame on `M × ℝ` with `e^n_n = 1` and no mixing with the new axis.
    pub fn extended(&self) -> Self {
        let n = self.dim();
        let mut e = DMatrix::zeros(n + 1, n + 1);
        e.view_mut((0, 0), (n, n)).copy_from(&self.e);
        e[(n, n)] = 1.0;
        let mut point = self.point.clone();
        point.push(0.0);
        FrameAtPoint { point, e }
    }

    /// Largest entry of `|eᵀ g e - η|`.
    pub fn orthonormality_defect(&self, metric: &DMatrix<f64>) -> f64 {
        let gram = self.e.transpose() * metric * &self.e;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let eta = match (a == b, a) {
                    (true, 0) => -1.0,
                    (true, _) => 1.0,
                    _ => 0.0,
                };
                worst = worst.max((gram[(a, b)] - eta).abs());
            }
        }
        worst
    }
}

/// Gradient components `f,μ` of a test function at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorSample {
    pub point: Vec<f64>,
    pub components: Vec<f64>,
}

impl CovectorSample {
    pub fn new(point: Vec<f64>, components: Vec<f64>) -> Result<Self> {
        if point.len() != components.len() {
            return Err(Error::DimensionMismatch {
                expected: point.len(),
                got: components.len(),
            });
        }
        if components.iter().chain(&point).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite covector sample".into()));
        }
        Ok(CovectorSample { point, components })
    }

    pub fn negated(&self) -> Self {
        CovectorSample {
            point: self.point.clone(),
            components: self.components.iter().map(|x| -x).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalCharacter {
    Timelike,
    Null,
    Spacelike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    PastDirected,
    FutureDirected,
    None,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::PastDirected => Orientation::FutureDirected,
            Orientation::FutureDirected => Orientation::PastDirected,
            Orientation::None => Orientation::None,
        }
    }
}

/// Classification of the gradient `∇f` of a covector `df`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovectorClass {
    Zero,
    NonZero {
        character: CausalCharacter,
        orientation: Orientation,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flrw_t(n: usize) -> SpacetimeModel {
        SpacetimeModel::flrw(
            n,
            ScaleFactor::Linear {
                slope: 1.0,
                intercept: 0.0,
            },
            0.5,
            4.0,
        )
        .unwrap()
    }

    #[test]
    fn minkowski_metric() {
        let m = SpacetimeModel::minkowski(4).unwrap();
        let g = m.metric_at(&[3.0, -1.0, 2.0, 0.5]).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0, 1.0]));
        assert_eq!(g, want);
    }

    #[test]
    fn flrw_metric_and_inverse() {
        let m = flrw_t(2);
        let g = m.metric_at(&[2.0, 0.5]).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 4.0]));
        let gi = m.inverse_metric_at(&[2.0, 0.5]).unwrap();
        assert_eq!(gi, DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.25]));
        let prod = &gi * &g;
        assert!((prod - DMatrix::<f64>::identity(2, 2)).amax() < 1e-10);
    }

    #[test]
    fn flrw_domain_violations() {
        let m = flrw_t(2);
        assert!(matches!(m.metric_at(&[0.1, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(m.frame_at(&[5.0, 0.0]), Err(Error::Domain(_))));
        let bad = SpacetimeModel::flrw(
            2,
            ScaleFactor::Linear {
                slope: 1.0,
                intercept: 0.0,
            },
            -1.0,
            1.0,
        );
        assert!(matches!(bad, Err(Error::Domain(_))));
        assert!(SpacetimeModel::flrw(2, ScaleFactor::Constant(0.0), 0.0, 1.0).is_err());
        assert!(SpacetimeModel::minkowski(1).is_err());
    }

    #[test]
    fn frames() {
        let m = SpacetimeModel::minkowski(3).unwrap();
        assert_eq!(
            m.frame_at(&[0.0, 1.0, 2.0]).unwrap().e,
            DMatrix::<f64>::identity(3, 3)
        );

        let f = flrw_t(2).frame_at(&[2.0, 0.3]).unwrap();
        assert!((f.e[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((f.e[(1, 1)] - 0.5).abs() < 1e-15);
        assert_eq!(f.e[(0, 1)], 0.0);
        assert_eq!(f.e[(1, 0)], 0.0);

        let unit = SpacetimeModel::flrw(3, ScaleFactor::Constant(1.0), 0.0, 1.0).unwrap();
        assert_eq!(
            unit.frame_at(&[0.5, 0.0, 0.0]).unwrap().e,
            DMatrix::<f64>::identity(3, 3)
        );
    }

    #[test]
    fn frame_orthonormality_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let models = [
            SpacetimeModel::minkowski(4).unwrap(),
            flrw_t(3),
            SpacetimeModel::flrw(
                4,
                ScaleFactor::Power {
                    coeff: 1.0,
                    exponent: 2.0 / 3.0,
                },
                0.2,
                5.0,
            )
            .unwrap(),
        ];
        for m in &models {
            for _ in 0..1000 {
                let p = m.sample_point(&mut rng);
                let f = m.frame_at(&p).unwrap();
                assert!(f.orthonormality_defect(&m.metric_at(&p).unwrap()) <= 1e-10);
                for mu in 1..m.n() {
                    assert_eq!(f.e[(0, mu)], 0.0);
                    assert_eq!(f.e[(mu, 0)], 0.0);
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        let m = SpacetimeModel::minkowski(3).unwrap();
        let s = CovectorSample::new(vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            m.classify_covector(&s).unwrap(),
            CovectorClass::NonZero {
                character: CausalCharacter::Timelike,
                orientation: Orientation::PastDirected
            }
        );

        let m2 = SpacetimeModel::minkowski(2).unwrap();
        let s = CovectorSample::new(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(
            m2.classify_covector(&s).unwrap(),
            CovectorClass::NonZero {
                character: CausalCharacter::Spacelike,
                orientation: Orientation::None
            }
        );

        let two = SpacetimeModel::flrw(2, ScaleFactor::Constant(2.0), 0.0, 10.0).unwrap();
        let s = CovectorSample::new(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((two.covector_norm(&s.point, &s.components).unwrap() + 0.75).abs() < 1e-15);
        assert!(matches!(
            two.classify_covector(&s).unwrap(),
            CovectorClass::NonZero {
                character: CausalCharacter::Timelike,
                ..
            }
        ));

        let zero = CovectorSample::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(m2.classify_covector(&zero).unwrap(), CovectorClass::Zero);

        let null = CovectorSample::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            m2.classify_covector(&null).unwrap(),
            CovectorClass::NonZero {
                character: CausalCharacter::Null,
                orientation: Orientation::PastDirected
            }
        ));
    }

    #[test]
    fn negation_flips_orientation_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = flrw_t(3);
        for _ in 0..500 {
            let p = m.sample_point(&mut rng);
            let df: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..=3.0)).collect();
            let s = CovectorSample::new(p, df).unwrap();
            let a = m.classify_covector(&s).unwrap();
            let b = m.classify_covector(&s.negated()).unwrap();
            match (a, b) {
                (
                    CovectorClass::NonZero {
                        character: ca,
                        orientation: oa,
                    },
                    CovectorClass::NonZero {
                        character: cb,
                        orientation: ob,
                    },
                ) => {
                    assert_eq!(ca, cb);
                    assert_eq!(oa.flipped(), ob);
                }
                _ => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn unit_scale_flrw_matches_minkowski() {
        let mink = SpacetimeModel::minkowski(3).unwrap();
        let unit = SpacetimeModel::flrw(3, ScaleFactor::Constant(1.0), -5.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = unit.sample_point(&mut rng);
            let df: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..=3.0)).collect();
            assert!((mink.metric_at(&p).unwrap() - unit.metric_at(&p).unwrap()).amax() <= 1e-12);
            assert!(
                (mink.inverse_metric_at(&p).unwrap() - unit.inverse_metric_at(&p).unwrap()).amax()
                    <= 1e-12
            );
            assert!((mink.frame_at(&p).unwrap().e - unit.frame_at(&p).unwrap().e).amax() <= 1e-12);
            let s = CovectorSample::new(p, df).unwrap();
            assert_eq!(
                mink.classify_covector(&s).unwrap(),
                unit.classify_covector(&s).unwrap()
            );
        }
    }

    #[test]
    fn scale_factor_parsing() {
        assert_eq!(ScaleFactor::parse("2").unwrap(), ScaleFactor::Constant(2.0));
        assert_eq!(
            ScaleFactor::parse("t").unwrap(),
            ScaleFactor::Linear {
                slope: 1.0,
                intercept: 0.0
            }
        );
        assert_eq!(
            ScaleFactor::parse(" 0.5 * t + 1").unwrap(),
            ScaleFactor::Linear {
                slope: 0.5,
                intercept: 1.0
            }
        );
        assert_eq!(
            ScaleFactor::parse("t-0.25").unwrap(),
            ScaleFactor::Linear {
                slope: 1.0,
                intercept: -0.25
            }
        );
        assert_eq!(
            ScaleFactor::parse("3*t^0.5").unwrap(),
            ScaleFactor::Power {
                coeff: 3.0,
                exponent: 0.5
            }
        );
        for bad in ["", "sin(t)", "t*t", "exp(t)", "2*x", "t^", "t+"] {
            assert!(ScaleFactor::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn conformal_time_against_quadrature() {
        let cases = [
            ScaleFactor::Constant(2.0),
            ScaleFactor::Linear {
                slope: 1.0,
                intercept: 0.0,
            },
            ScaleFactor::Linear {
                slope: 0.5,
                intercept: 1.0,
            },
            ScaleFactor::Power {
                coeff: 1.5,
                exponent: 2.0 / 3.0,
            },
            ScaleFactor::Power {
                coeff: 2.0,
                exponent: 1.0,
            },
        ];
        for sf in cases {
            let (t0, t1) = (0.7, 2.9);
            // composite Simpson, 2000 panels
            let m = 2000;
            let h = (t1 - t0) / m as f64;
            let mut s = 1.0 / sf.value(t0) + 1.0 / sf.value(t1);
            for k in 1..m {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w / sf.value(t0 + k as f64 * h);
            }
            let quad = s * h / 3.0;
            assert!((sf.conformal_time(t0, t1) - quad).abs() < 1e-10, "{sf}");
        }
    }

    #[test]
    fn scale_derivative_matches_finite_difference() {
        let sf = ScaleFactor::Power {
            coeff: 1.3,
            exponent: 0.4,
        };
        let h = 1e-6;
        let t = 1.7;
        let fd = (sf.value(t + h) - sf.value(t - h)) / (2.0 * h);
        assert!((fd - sf.derivative(t)).abs() < 1e-8);
    }
}
