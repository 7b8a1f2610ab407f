//! Lorentzian distance, computed several independent ways.
//!
//! * [`analytic_distance`]: closed forms (Minkowski, comoving FLRW pairs).
//! * [`oracle_distance`]: proper time maximized over polygonal causal curves
//!   with uniform time nodes. A lower bound on `d(p,q)` up to quadrature error.
//! * [`steep_family_distance`]: `inf [f(q) - f(p)]⁺` over a finite-dimensional
//!   family of grid-validated steep functions. An upper bound on `d(p,q)`.
//! * [`riemannian_baseline`]: `sup |f(q) - f(p)|` over affine functions with
//!   `‖[D,f]‖ ≤ 1` on flat Euclidean space.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::causal::gradient_steep_check;
use crate::clifford::build_gamma_matrices;
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, CMatrix};
use crate::spacetime::{CovectorSample, ModelKind, SpacetimeModel};

/// Segment causality slack used by [`curve_length`].
pub const CURVE_CAUSAL_TOL: f64 = 1e-10;
/// Relative distance kept from the light cone when restoring feasibility.
pub const CONE_MARGIN: f64 = 1e-6;
/// Steepness slack for family members on the validation grid.
pub const STEEP_SLACK: f64 = 1e-8;
/// Stop local searches once an accepted step improves by less than this.
pub const IMPROVEMENT_TOL: f64 = 1e-10;

/// `[α]⁺ = max{0, α}`.
pub fn pos_part(alpha: f64) -> f64 {
    if alpha > 0.0 {
        alpha
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    CurveOracle,
    SteepVariational,
    RiemannianBaseline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::CurveOracle => "curve-oracle",
            Method::SteepVariational => "steep-variational",
            Method::RiemannianBaseline => "riemannian-baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    None,
    Curve(PolygonalCausalCurve),
    Parameters(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    pub method: Method,
    pub certificate: Certificate,
    pub diagnostics: Vec<String>,
}

impl DistanceResult {
    fn new(value: f64, method: Method) -> Self {
        DistanceResult {
            value,
            method,
            certificate: Certificate::None,
            diagnostics: Vec::new(),
        }
    }

    fn note(mut self, msg: impl Into<String>) -> Self {
        self.diagnostics.push(msg.into());
        self
    }
}

/// Chart points with strictly increasing time coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalCausalCurve {
    nodes: Vec<Vec<f64>>,
}

impl PolygonalCausalCurve {
    pub fn new(nodes: Vec<Vec<f64>>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Domain("a curve needs at least two nodes".into()));
        }
        let dim = nodes[0].len();
        for w in nodes.windows(2) {
            if w[1].len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: w[1].len(),
                });
            }
            if !(w[1][0] > w[0][0]) {
                return Err(Error::Domain(
                    "curve time coordinate must increase strictly".into(),
                ));
            }
        }
        Ok(PolygonalCausalCurve { nodes })
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Midpoint-rule proper time `Σ √(-g(Δ,Δ))` over the segments, `g` taken at
/// each segment midpoint.
pub fn curve_length(model: &SpacetimeModel, curve: &PolygonalCausalCurve) -> Result<f64> {
    let mut total = 0.0;
    for (index, w) in curve.nodes.windows(2).enumerate() {
        let delta: Vec<f64> = w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect();
        let mid: Vec<f64> = w[1].iter().zip(&w[0]).map(|(b, a)| 0.5 * (a + b)).collect();
        let norm = model.vector_norm(&mid, &delta)?;
        if norm > CURVE_CAUSAL_TOL * delta[0].powi(2).max(1.0) {
            return Err(Error::SpacelikeSegment { index, norm });
        }
        total += (-norm).max(0.0).sqrt();
    }
    Ok(total)
}

/// Causal relation of `q` to `p` from the analytic cone conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `q` in the chronological future of `p`.
    Chronological,
    /// `q` on the future light cone of `p` (or `q = p`).
    Null,
    Unrelated,
}

/// Light-cone tolerance of [`causal_relation`], relative to the time gap.
const RELATION_TOL: f64 = 1e-12;

pub fn causal_relation(model: &SpacetimeModel, p: &[f64], q: &[f64]) -> Result<Relation> {
    model.scale_at(p)?;
    model.scale_at(q)?;
    let dt = q[0] - p[0];
    let dx = spatial_distance(p, q);
    if dt < 0.0 {
        return Ok(Relation::Unrelated);
    }
    // comoving coordinate reach of light rays
    let reach = match model.kind() {
        ModelKind::Minkowski => dt,
        ModelKind::Flrw { scale, .. } => scale.conformal_time(p[0], q[0]),
    };
    let tol = RELATION_TOL * reach.max(1.0);
    Ok(if dx < reach - tol {
        Relation::Chronological
    } else if dx <= reach + tol {
        Relation::Null
    } else {
        Relation::Unrelated
    })
}

fn spatial_distance(p: &[f64], q: &[f64]) -> f64 {
    p[1..]
        .iter()
        .zip(&q[1..])
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
}

/// Closed forms: Minkowski for any pair, FLRW for comoving pairs.
pub fn analytic_distance(model: &SpacetimeModel, p: &[f64], q: &[f64]) -> Result<DistanceResult> {
    model.scale_at(p)?;
    model.scale_at(q)?;
    let dt = q[0] - p[0];
    let dx = spatial_distance(p, q);
    match model.kind() {
        ModelKind::Minkowski => {
            let value = if dt >= 0.0 && dt >= dx {
                (dt * dt - dx * dx).max(0.0).sqrt()
            } else {
                0.0
            };
            Ok(DistanceResult::new(value, Method::Analytic))
        }
        ModelKind::Flrw { .. } if p[1..] == q[1..] => {
            Ok(DistanceResult::new(pos_part(dt), Method::Analytic))
        }
        ModelKind::Flrw { .. } => Err(Error::Unsupported(
            "analytic FLRW distance needs comoving points".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub segments: usize,
    pub iterations: usize,
    pub starts: usize,
    pub seed: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            segments: 64,
            iterations: 2000,
            starts: 8,
            seed: 0,
        }
    }
}

/// Discretized proper-time functional over the spatial node positions of a
/// curve with fixed, uniform time nodes. Node positions are stored flat,
/// `spatial` values per node.
struct CurveProblem {
    spatial: usize,
    dt: f64,
    // a(t) at segment midpoints
    scale: Vec<f64>,
    times: Vec<f64>,
}

impl CurveProblem {
    fn segments(&self) -> usize {
        self.scale.len()
    }

    fn cone_limit(&self) -> f64 {
        self.dt * (1.0 - CONE_MARGIN)
    }

    /// `|x_{k+1} - x_k|²`
    fn disp_sq(&self, x: &[f64], k: usize) -> f64 {
        let s = self.spatial;
        (0..s)
            .map(|i| {
                let d = x[(k + 1) * s + i] - x[k * s + i];
                d * d
            })
            .sum()
    }

    fn feasible(&self, x: &[f64]) -> bool {
        let lim = self.cone_limit();
        (0..self.segments()).all(|k| self.scale[k] * self.disp_sq(x, k).sqrt() <= lim)
    }

    fn length(&self, x: &[f64]) -> f64 {
        let dt2 = self.dt * self.dt;
        (0..self.segments())
            .map(|k| {
                let a = self.scale[k];
                (dt2 - a * a * self.disp_sq(x, k)).max(0.0).sqrt()
            })
            .sum()
    }

    /// Gradient with respect to the interior nodes (endpoint entries zero).
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let s = self.spatial;
        let n = self.segments();
        g.fill(0.0);
        for k in 0..n {
            let a2 = self.scale[k] * self.scale[k];
            let ell = (self.dt * self.dt - a2 * self.disp_sq(x, k))
                .max(1e-300)
                .sqrt();
            for i in 0..s {
                let w = a2 * (x[(k + 1) * s + i] - x[k * s + i]) / ell;
                if k + 1 < n {
                    g[(k + 1) * s + i] -= w;
                }
                if k > 0 {
                    g[k * s + i] += w;
                }
            }
        }
    }

    /// Largest `λ ∈ [0,1]` with `anchor + λ(x - anchor)` inside the cones;
    /// `anchor` must be feasible. Returns the pulled-back nodes.
    fn pull_back(&self, anchor: &[f64], x: &[f64]) -> Vec<f64> {
        let s = self.spatial;
        let lim = self.cone_limit();
        let mut lambda: f64 = 1.0;
        for k in 0..self.segments() {
            let (mut qa, mut qb, mut yy) = (0.0, 0.0, 0.0);
            for i in 0..s {
                let dy = anchor[(k + 1) * s + i] - anchor[k * s + i];
                let dx = x[(k + 1) * s + i] - x[k * s + i];
                let delta = dx - dy;
                qa += delta * delta;
                qb += 2.0 * dy * delta;
                yy += dy * dy;
            }
            if qa == 0.0 {
                continue;
            }
            // |dy + λ δ|² ≤ (lim / a)²
            let qc = yy - (lim / self.scale[k]).powi(2);
            if qa + qb + qc <= 0.0 {
                continue;
            }
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
            let root = (-qb + disc) / (2.0 * qa);
            lambda = lambda.min(root.clamp(0.0, 1.0));
        }
        let mut out = blend(anchor, x, lambda);
        while !self.feasible(&out) && lambda > 0.0 {
            lambda = (lambda * (1.0 - 1e-9) - 1e-15).max(0.0);
            out = blend(anchor, x, lambda);
        }
        out
    }

    /// Projected ascent with Barzilai-Borwein steps and backtracking.
    fn ascend(&self, mut x: Vec<f64>, iterations: usize) -> (Vec<f64>, f64) {
        let mut value = self.length(&x);
        let mut grad = vec![0.0; x.len()];
        let mut next_grad = vec![0.0; x.len()];
        self.gradient(&x, &mut grad);
        let amax = self.scale.iter().copied().fold(0.0, f64::max);
        let base_step = self.dt / (4.0 * amax * amax);
        let mut step = base_step;
        for _ in 0..iterations {
            let mut accepted = None;
            let mut trial_step = step;
            for _ in 0..60 {
                let cand: Vec<f64> = x
                    .iter()
                    .zip(&grad)
                    .map(|(u, g)| u + trial_step * g)
                    .collect();
                let cand = self.pull_back(&x, &cand);
                let v = self.length(&cand);
                if v > value {
                    accepted = Some((cand, v));
                    break;
                }
                trial_step *= 0.5;
            }
            let Some((next, next_value)) = accepted else {
                break;
            };
            self.gradient(&next, &mut next_grad);
            let improvement = next_value - value;
            // BB1 step for the concave objective: sᵀs / -sᵀy
            let (mut ss, mut sy) = (0.0, 0.0);
            for j in 0..x.len() {
                let s = next[j] - x[j];
                ss += s * s;
                sy -= s * (next_grad[j] - grad[j]);
            }
            step = if sy > 0.0 && ss > 0.0 {
                (ss / sy).clamp(1e-6 * base_step, 1e6 * base_step)
            } else {
                base_step
            };
            x = next;
            value = next_value;
            std::mem::swap(&mut grad, &mut next_grad);
            if improvement < IMPROVEMENT_TOL {
                break;
            }
        }
        (x, value)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn blend(anchor: &[f64], x: &[f64], lambda: f64) -> Vec<f64> {
    anchor
        .iter()
        .zip(x)
        .map(|(u, v)| u + lambda * (v - u))
        .collect()
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add((start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Maximize midpoint-rule proper time over polygonal future-directed causal
/// curves from `p` to `q` with `segments` uniform time steps.
///
/// Every start is the discrete comoving-light-cone-proportional curve,
/// possibly perturbed and pulled back into the causal cones; the best local
/// maximum over all starts is returned with its curve as certificate.
pub fn oracle_distance(
    model: &SpacetimeModel,
    p: &[f64],
    q: &[f64],
    settings: OracleSettings,
) -> Result<DistanceResult> {
    if settings.segments == 0 {
        return Err(Error::Domain("need at least one segment".into()));
    }
    match causal_relation(model, p, q)? {
        Relation::Chronological => {}
        Relation::Null => {
            return Ok(DistanceResult::new(0.0, Method::CurveOracle).note("null-related"))
        }
        Relation::Unrelated => {
            return Ok(DistanceResult::new(0.0, Method::CurveOracle).note("unreachable"))
        }
    }

    let n_seg = settings.segments;
    let spatial = model.n() - 1;
    let dt = (q[0] - p[0]) / n_seg as f64;
    let times: Vec<f64> = (0..=n_seg)
        .map(|k| {
            if k == n_seg {
                q[0]
            } else {
                p[0] + k as f64 * dt
            }
        })
        .collect();
    let mut scale = Vec::with_capacity(n_seg);
    for k in 0..n_seg {
        let mut mid = p.to_vec();
        mid[0] = 0.5 * (times[k] + times[k + 1]);
        scale.push(model.scale_at(&mid)?);
    }
    let problem = CurveProblem {
        spatial,
        dt,
        scale,
        times,
    };

    // reference: displacement proportional to discrete conformal time
    let weights: Vec<f64> = problem.scale.iter().map(|a| dt / a).collect();
    let conformal: f64 = weights.iter().sum();
    let total: Vec<f64> = q[1..].iter().zip(&p[1..]).map(|(b, a)| b - a).collect();
    if norm(&total) / conformal > 1.0 - CONE_MARGIN {
        return Ok(DistanceResult::new(0.0, Method::CurveOracle)
            .note("unreachable: no causal curve at this resolution"));
    }
    let mut reference: Vec<f64> = Vec::with_capacity((n_seg + 1) * spatial);
    let mut acc = 0.0;
    reference.extend_from_slice(&p[1..]);
    for w in &weights[..n_seg - 1] {
        acc += w / conformal;
        reference.extend(p[1..].iter().zip(&total).map(|(a, d)| a + acc * d));
    }
    reference.extend_from_slice(&q[1..]);

    let spread = 0.1 * (q[0] - p[0]);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in 0..settings.starts.max(1) {
        let init = if start == 0 {
            reference.clone()
        } else {
            let mut rng = start_rng(settings.seed, start);
            let mut x = reference.clone();
            for v in &mut x[spatial..n_seg * spatial] {
                *v += rng.random_range(-spread..=spread);
            }
            problem.pull_back(&reference, &x)
        };
        let (x, value) = problem.ascend(init, settings.iterations);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((x, value));
        }
    }
    let (x, _) = best.expect("at least one start");
    let nodes: Vec<Vec<f64>> = x
        .chunks(spatial)
        .zip(&problem.times)
        .map(|(xs, &t)| std::iter::once(t).chain(xs.iter().copied()).collect())
        .collect();
    let curve = PolygonalCausalCurve::new(nodes)?;
    let value = curve_length(model, &curve)?;
    let mut out = DistanceResult::new(value, Method::CurveOracle);
    out.certificate = Certificate::Curve(curve);
    Ok(out)
}

/// A smooth function `f_θ(x)` depending on a parameter vector `θ`.
pub trait ParametricFunction: Send + Sync {
    fn n_params(&self) -> usize;
    fn value(&self, theta: &[f64], x: &[f64]) -> f64;
    fn gradient(&self, theta: &[f64], x: &[f64]) -> Vec<f64>;
    fn name(&self) -> String;
}

/// Boosted time functions `f_β(x) = t cosh|β| - sinh|β| (β̂·x)` of Minkowski
/// space, with rapidity vector `β ∈ ℝ^{n-1}`. Every member has
/// `g(∇f,∇f) = -1`.
pub struct Boost {
    pub n: usize,
}

impl ParametricFunction for Boost {
    fn n_params(&self) -> usize {
        self.n - 1
    }

    fn value(&self, theta: &[f64], x: &[f64]) -> f64 {
        let r = norm(theta);
        if r == 0.0 {
            return x[0];
        }
        x[0] * r.cosh() - r.sinh() * dot(theta, &x[1..]) / r
    }

    fn gradient(&self, theta: &[f64], _x: &[f64]) -> Vec<f64> {
        let r = norm(theta);
        let mut g = vec![r.cosh()];
        if r == 0.0 {
            g.extend(std::iter::repeat_n(0.0, self.n - 1));
        } else {
            let s = r.sinh() / r;
            g.extend(theta.iter().map(|b| -s * b));
        }
        g
    }

    fn name(&self) -> String {
        "boost".into()
    }
}

/// The single function `f = t`.
pub struct TimeCoordinate;

impl ParametricFunction for TimeCoordinate {
    fn n_params(&self) -> usize {
        0
    }

    fn value(&self, _theta: &[f64], x: &[f64]) -> f64 {
        x[0]
    }

    fn gradient(&self, _theta: &[f64], x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        g[0] = 1.0;
        g
    }

    fn name(&self) -> String {
        "time".into()
    }
}

/// `f_c(x) = t + c·x`; steep only where `|c| ≤ a(t)·√(slack)`.
pub struct TimePlusLinear {
    pub n: usize,
}

impl ParametricFunction for TimePlusLinear {
    fn n_params(&self) -> usize {
        self.n - 1
    }

    fn value(&self, theta: &[f64], x: &[f64]) -> f64 {
        x[0] + dot(theta, &x[1..])
    }

    fn gradient(&self, theta: &[f64], _x: &[f64]) -> Vec<f64> {
        std::iter::once(1.0).chain(theta.iter().copied()).collect()
    }

    fn name(&self) -> String {
        "time-linear".into()
    }
}

/// `f_β(t,x) = t cosh(x - β)` on two-dimensional FLRW with `a(t) = t`, the
/// boosted time functions of the Milne chart `T = t cosh x`, `X = t sinh x`.
pub struct MilneBoost;

impl ParametricFunction for MilneBoost {
    fn n_params(&self) -> usize {
        1
    }

    fn value(&self, theta: &[f64], x: &[f64]) -> f64 {
        x[0] * (x[1] - theta[0]).cosh()
    }

    fn gradient(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let u = x[1] - theta[0];
        vec![u.cosh(), x[0] * u.sinh()]
    }

    fn name(&self) -> String {
        "milne-boost".into()
    }
}

/// Parametrized candidate steep functions over a parameter box, with the
/// grid on which each candidate must be steep before it is used.
pub struct SteepFamily {
    function: Box<dyn ParametricFunction>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    grid: Vec<Vec<f64>>,
}

/// Default rapidity bound of the boost family; larger values lose the
/// `-1` normalization to rounding (`cosh² - sinh²` in floating point).
pub const DEFAULT_MAX_RAPIDITY: f64 = 8.0;

impl SteepFamily {
    pub fn new(
        function: Box<dyn ParametricFunction>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        grid: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = function.n_params();
        if lower.len() != k || upper.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: lower.len().max(upper.len()),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::Domain("empty parameter box".into()));
        }
        if grid.is_empty() {
            return Err(Error::Domain("empty validation grid".into()));
        }
        Ok(SteepFamily {
            function,
            lower,
            upper,
            grid,
        })
    }

    pub fn boost(n: usize, max_rapidity: f64, grid: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            Box::new(Boost { n }),
            vec![-max_rapidity; n - 1],
            vec![max_rapidity; n - 1],
            grid,
        )
    }

    pub fn time(grid: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Box::new(TimeCoordinate), vec![], vec![], grid)
    }

    pub fn time_plus_linear(n: usize, bound: f64, grid: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            Box::new(TimePlusLinear { n }),
            vec![-bound; n - 1],
            vec![bound; n - 1],
            grid,
        )
    }

    pub fn milne_boost(bound: f64, grid: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Box::new(MilneBoost), vec![-bound], vec![bound], grid)
    }

    pub fn name(&self) -> String {
        self.function.name()
    }

    pub fn n_params(&self) -> usize {
        self.function.n_params()
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub fn grid(&self) -> &[Vec<f64>] {
        &self.grid
    }

    pub fn value(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.function.value(theta, x)
    }

    pub fn gradient(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        self.function.gradient(theta, x)
    }

    /// Whether `f_θ` passes the gradient steepness check at every grid point.
    pub fn is_grid_steep(&self, model: &SpacetimeModel, theta: &[f64]) -> Result<bool> {
        for x in &self.grid {
            let sample = CovectorSample::new(x.clone(), self.function.gradient(theta, x))?;
            if !gradient_steep_check(model, &sample, STEEP_SLACK)?.steep {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn clamp(&self, theta: &mut [f64]) {
        for ((t, l), u) in theta.iter_mut().zip(&self.lower).zip(&self.upper) {
            *t = t.clamp(*l, *u);
        }
    }
}

/// Lattice spanning the bounding box of `p` and `q`, widened by `pad` and
/// clipped to the model's time domain, with `per_axis` points per axis.
pub fn bounding_grid(
    model: &SpacetimeModel,
    p: &[f64],
    q: &[f64],
    pad: f64,
    per_axis: usize,
) -> Vec<Vec<f64>> {
    let (t_min, t_max) = model.time_domain();
    let lower: Vec<f64> = p
        .iter()
        .zip(q)
        .enumerate()
        .map(|(i, (a, b))| {
            let lo = a.min(*b) - pad;
            if i == 0 {
                lo.max(t_min)
            } else {
                lo
            }
        })
        .collect();
    let upper: Vec<f64> = p
        .iter()
        .zip(q)
        .enumerate()
        .map(|(i, (a, b))| {
            let hi = a.max(*b) + pad;
            if i == 0 {
                hi.min(t_max)
            } else {
                hi
            }
        })
        .collect();
    let counts = vec![per_axis; p.len()];
    crate::causal::Grid::uniform(&lower, &upper, &counts)
        .map(|g| g.points())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteepSettings {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SteepSettings {
    fn default() -> Self {
        SteepSettings {
            starts: 8,
            iterations: 500,
            seed: 0,
        }
    }
}

struct Objective<'a> {
    model: &'a SpacetimeModel,
    family: &'a SteepFamily,
    p: &'a [f64],
    q: &'a [f64],
    evaluations: usize,
    rejected: usize,
}

impl Objective<'_> {
    /// `f_θ(q) - f_θ(p)` for grid-steep `θ`, `None` otherwise.
    fn eval(&mut self, theta: &[f64]) -> Result<Option<f64>> {
        self.evaluations += 1;
        if !self.family.is_grid_steep(self.model, theta)? {
            self.rejected += 1;
            return Ok(None);
        }
        Ok(Some(
            self.family.value(theta, self.q) - self.family.value(theta, self.p),
        ))
    }
}

fn local_descent(
    obj: &mut Objective<'_>,
    mut theta: Vec<f64>,
    mut value: f64,
    iterations: usize,
) -> Result<(Vec<f64>, f64)> {
    let k = theta.len();
    let width: Vec<f64> = obj
        .family
        .lower
        .iter()
        .zip(&obj.family.upper)
        .map(|(l, u)| (u - l).max(1e-12))
        .collect();
    let mut step = 0.1 * width.iter().copied().fold(f64::INFINITY, f64::min);

    // gradient descent with finite-difference gradients
    for _ in 0..iterations {
        let mut grad = vec![0.0; k];
        for i in 0..k {
            let h = 1e-7 * width[i].max(1.0);
            let mut up = theta.clone();
            up[i] += h;
            let mut down = theta.clone();
            down[i] -= h;
            let f = |t: &[f64]| obj.family.value(t, obj.q) - obj.family.value(t, obj.p);
            grad[i] = (f(&up) - f(&down)) / (2.0 * h);
        }
        let gn = norm(&grad);
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let mut accepted = false;
        let mut trial = step;
        for _ in 0..50 {
            let mut cand: Vec<f64> = theta
                .iter()
                .zip(&grad)
                .map(|(t, g)| t - trial * g / gn)
                .collect();
            obj.family.clamp(&mut cand);
            if let Some(v) = obj.eval(&cand)? {
                if v < value {
                    let gain = value - v;
                    theta = cand;
                    value = v;
                    accepted = gain >= IMPROVEMENT_TOL;
                    step = trial * 2.0;
                    break;
                }
            }
            trial *= 0.5;
        }
        if !accepted || value < 0.0 {
            break;
        }
    }

    // coordinate refinement
    let mut delta = 0.01 * width.iter().copied().fold(f64::INFINITY, f64::min);
    while delta > 1e-10 && value >= 0.0 {
        let mut improved = false;
        for i in 0..k {
            for dir in [1.0, -1.0] {
                let mut cand = theta.clone();
                cand[i] += dir * delta;
                obj.family.clamp(&mut cand);
                if let Some(v) = obj.eval(&cand)? {
                    if v < value {
                        theta = cand;
                        value = v;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    Ok((theta, value))
}

/// `inf [f_θ(q) - f_θ(p)]⁺` over grid-steep members of the family.
pub fn steep_family_distance(
    model: &SpacetimeModel,
    family: &SteepFamily,
    p: &[f64],
    q: &[f64],
    settings: SteepSettings,
) -> Result<DistanceResult> {
    model.scale_at(p)?;
    model.scale_at(q)?;
    let mut obj = Objective {
        model,
        family,
        p,
        q,
        evaluations: 0,
        rejected: 0,
    };
    let k = family.n_params();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in 0..settings.starts.max(1) {
        let mut theta: Vec<f64> = if start == 0 {
            vec![0.0; k]
        } else {
            let mut rng = start_rng(settings.seed, start);
            family
                .lower
                .iter()
                .zip(&family.upper)
                .map(|(l, u)| if l < u { rng.random_range(*l..=*u) } else { *l })
                .collect()
        };
        family.clamp(&mut theta);
        let Some(v0) = obj.eval(&theta)? else {
            continue;
        };
        let (theta, value) = if k == 0 {
            (theta, v0)
        } else {
            local_descent(&mut obj, theta, v0, settings.iterations)?
        };
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((theta, value));
        }
        if k == 0 {
            break;
        }
    }
    let (theta, raw) = best.ok_or(Error::EmptyFamily)?;
    let mut out = DistanceResult::new(pos_part(raw), Method::SteepVariational);
    out.certificate = Certificate::Parameters(theta);
    out.diagnostics.push(format!(
        "family={} evaluations={} rejected={}",
        family.name(),
        obj.evaluations,
        obj.rejected
    ));
    Ok(out)
}

/// `sup |f(q) - f(p)|` over affine `f(x) = w·x + b` with `‖[D,f]‖ ≤ 1` on flat
/// Euclidean space, where `[D,f] = -i Σ wᵢ eᵢ` for Euclidean Clifford
/// generators `eᵢ`. Solved by projected ascent on `w`.
pub fn riemannian_baseline(p: &[f64], q: &[f64]) -> Result<DistanceResult> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let d = p.len();
    if d == 0 {
        return Err(Error::Domain("empty points".into()));
    }
    // spatial generators of a Lorentzian module in d + 1 dimensions are
    // Hermitian, square to 1 and anticommute
    let lorentz = build_gamma_matrices(d + 1)?;
    let generators: Vec<CMatrix> = lorentz.gammas()[1..].to_vec();
    let op_norm = |w: &[f64]| -> f64 {
        let dim = generators[0].nrows();
        let mut m = CMatrix::zeros(dim, dim);
        for (g, wi) in generators.iter().zip(w) {
            m += g * c(*wi);
        }
        hermitian_eigenvalues(&m)
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    };

    let delta: Vec<f64> = q.iter().zip(p).map(|(b, a)| b - a).collect();
    let mut w = vec![0.0; d];
    let mut best = 0.0;
    for _ in 0..100 {
        let cand: Vec<f64> = w.iter().zip(&delta).map(|(wi, di)| wi + di).collect();
        let nrm = op_norm(&cand);
        let cand: Vec<f64> = if nrm > 1.0 {
            cand.iter().map(|x| x / nrm).collect()
        } else {
            cand
        };
        let v = dot(&cand, &delta).abs();
        if v <= best + 1e-15 {
            break;
        }
        best = v;
        w = cand;
    }
    let mut out = DistanceResult::new(best, Method::RiemannianBaseline);
    out.certificate = Certificate::Parameters(w);
    Ok(out)
}

/// Lower (curve oracle) and upper (steep family) bounds on `d(p,q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub lower: DistanceResult,
    pub upper: DistanceResult,
    pub gap: f64,
    /// `gap` exceeds the closing tolerance: the family is too small here.
    pub family_too_small: bool,
    /// `gap < -eps`: the sandwich `lower ≤ upper` is broken.
    pub sandwich_violated: bool,
}

/// Slack on `lower ≤ upper` covering solver and quadrature error.
pub const SANDWICH_EPS: f64 = 1e-6 + 1e-3;

pub fn duality_gap(
    model: &SpacetimeModel,
    family: &SteepFamily,
    p: &[f64],
    q: &[f64],
    oracle: OracleSettings,
    steep: SteepSettings,
    close_tol: f64,
) -> Result<GapReport> {
    let lower = oracle_distance(model, p, q, oracle)?;
    let upper = steep_family_distance(model, family, p, q, steep)?;
    let gap = upper.value - lower.value;
    Ok(GapReport {
        family_too_small: gap > close_tol,
        sandwich_violated: gap < -SANDWICH_EPS,
        gap,
        lower,
        upper,
    })
}
