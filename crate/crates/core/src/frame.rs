//! Frame-based manifold representation.
//!
//! A manifold is a coordinate chart together with a global frame of vector
//! fields whose coordinate components are scalar expressions, plus a constant
//! frame metric. Lie brackets of expression-component fields are constructed
//! symbolically, so bracket values and their derivatives are analytic.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{EvalError, ScalarExpr};

/// Default chart domain per coordinate.
pub const DEFAULT_DOMAIN: (f64, f64) = (-1.0, 1.0);

/// Tolerance below which the frame metric counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FrameError {
    #[error("point has {got} coordinates, manifold dimension is {expected}")]
    PointDimension { got: usize, expected: usize },
    #[error("point contains a non-finite coordinate")]
    PointNotFinite,
    #[error("point outside chart domain: coordinate {coord} = {value} not in [{lo}, {hi}]")]
    OutsideDomain {
        coord: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("frame metric is not symmetric")]
    MetricNotSymmetric,
    #[error("frame metric is degenerate (|det| = {0:e})")]
    MetricDegenerate(f64),
    #[error("frame has {got} fields, manifold dimension is {expected}")]
    FrameCount { got: usize, expected: usize },
    #[error("frame field {field} has {got} components, expected {expected}")]
    FrameComponentCount {
        field: usize,
        got: usize,
        expected: usize,
    },
    #[error("frame component matrix is singular at a sampled point {0:?}")]
    FrameSingular(Vec<f64>),
    #[error("vector has {got} components, expected {expected}")]
    VectorDimension { got: usize, expected: usize },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("domain bound for `{coord}` is empty: [{lo}, {hi}]")]
    EmptyDomain { coord: String, lo: f64, hi: f64 },
}

/// A chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Basis a vector's components refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Frame,
    Coordinate,
}

/// A tangent vector at a point, tagged with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValue {
    pub components: Vec<f64>,
    pub basis: Basis,
}

impl VectorValue {
    pub fn frame(components: Vec<f64>) -> Self {
        VectorValue {
            components,
            basis: Basis::Frame,
        }
    }

    pub fn coordinate(components: Vec<f64>) -> Self {
        VectorValue {
            components,
            basis: Basis::Coordinate,
        }
    }

    pub fn zero_frame(n: usize) -> Self {
        VectorValue::frame(vec![0.0; n])
    }

    /// Frame basis vector e_i.
    pub fn frame_unit(n: usize, i: usize) -> Self {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        VectorValue::frame(c)
    }

    pub fn scale(&self, s: f64) -> VectorValue {
        VectorValue {
            components: self.components.iter().map(|c| c * s).collect(),
            basis: self.basis,
        }
    }

    pub fn add(&self, other: &VectorValue) -> VectorValue {
        assert_eq!(self.basis, other.basis, "basis mismatch in vector add");
        VectorValue {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
            basis: self.basis,
        }
    }

    pub fn sub(&self, other: &VectorValue) -> VectorValue {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

/// Validated manifold: chart, frame, constant frame metric, chart domain.
#[derive(Debug, Clone)]
pub struct ManifoldSpec {
    dim: usize,
    coord_names: Vec<String>,
    /// frame[i][a] = a-th coordinate component of frame field ν_i.
    frame: Vec<Vec<ScalarExpr>>,
    /// ∂_b frame[i][a], precomputed.
    frame_derivs: Vec<Vec<Vec<ScalarExpr>>>,
    frame_metric: DMatrix<f64>,
    metric_inv: DMatrix<f64>,
    /// ε_i = g(ν_i, ν_i) when the frame is orthonormal.
    signature: Option<Vec<f64>>,
    lorentzian: bool,
    domain: Vec<(f64, f64)>,
    /// bracket_coord[i][j][a] = a-th coordinate component of [ν_i, ν_j].
    bracket_coord: Vec<Vec<Vec<ScalarExpr>>>,
    /// ∂_b bracket_coord[i][j][a].
    bracket_derivs: Vec<Vec<Vec<Vec<ScalarExpr>>>>,
}

/// Symbolic Lie bracket of two expression-component vector fields:
/// `[X, Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a`.
pub fn bracket_fields(x: &[ScalarExpr], y: &[ScalarExpr], dim: usize) -> Vec<ScalarExpr> {
    let mut out = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut acc = ScalarExpr::zero();
        for b in 0..dim {
            acc = acc.add(&x[b].mul(&y[a].diff(b)));
            acc = acc.sub(&y[b].mul(&x[a].diff(b)));
        }
        out.push(acc);
    }
    out
}

impl ManifoldSpec {
    pub fn new(
        coord_names: Vec<String>,
        frame: Vec<Vec<ScalarExpr>>,
        frame_metric: DMatrix<f64>,
        domain: Option<Vec<(f64, f64)>>,
    ) -> Result<Self, FrameError> {
        let dim = coord_names.len();
        if frame.len() != dim {
            return Err(FrameError::FrameCount {
                got: frame.len(),
                expected: dim,
            });
        }
        for (i, field) in frame.iter().enumerate() {
            if field.len() != dim {
                return Err(FrameError::FrameComponentCount {
                    field: i,
                    got: field.len(),
                    expected: dim,
                });
            }
        }
        if frame_metric.nrows() != dim || frame_metric.ncols() != dim {
            return Err(FrameError::FrameCount {
                got: frame_metric.nrows(),
                expected: dim,
            });
        }
        for i in 0..dim {
            for j in 0..i {
                if (frame_metric[(i, j)] - frame_metric[(j, i)]).abs() > 1e-14 {
                    return Err(FrameError::MetricNotSymmetric);
                }
            }
        }
        let det = frame_metric.clone().determinant();
        if det.abs() <= DEGENERACY_TOL {
            return Err(FrameError::MetricDegenerate(det.abs()));
        }
        let metric_inv = frame_metric
            .clone()
            .try_inverse()
            .ok_or(FrameError::MetricDegenerate(det.abs()))?;

        // Orthonormality: diagonal with entries ±1.
        let mut orthonormal = true;
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                if i != j && frame_metric[(i, j)].abs() > 1e-14 {
                    orthonormal = false;
                }
                if i == j && (frame_metric[(i, j)].abs() - expect).abs() > 1e-14 {
                    orthonormal = false;
                }
            }
        }
        let signature = if orthonormal {
            Some((0..dim).map(|i| frame_metric[(i, i)]).collect::<Vec<_>>())
        } else {
            None
        };
        let lorentzian = signature
            .as_ref()
            .map(|s| s.iter().filter(|e| **e < 0.0).count() == 1)
            .unwrap_or(false);

        let domain = match domain {
            Some(d) => {
                if d.len() != dim {
                    return Err(FrameError::FrameCount {
                        got: d.len(),
                        expected: dim,
                    });
                }
                for (k, (lo, hi)) in d.iter().enumerate() {
                    if lo >= hi {
                        return Err(FrameError::EmptyDomain {
                            coord: coord_names[k].clone(),
                            lo: *lo,
                            hi: *hi,
                        });
                    }
                }
                d
            }
            None => vec![DEFAULT_DOMAIN; dim],
        };

        let frame_derivs = frame
            .iter()
            .map(|field| {
                field
                    .iter()
                    .map(|c| (0..dim).map(|b| c.diff(b)).collect())
                    .collect()
            })
            .collect();

        let mut bracket_coord = vec![vec![Vec::new(); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                bracket_coord[i][j] = bracket_fields(&frame[i], &frame[j], dim);
            }
        }
        let bracket_derivs = bracket_coord
            .iter()
            .map(|row| {
                row.iter()
                    .map(|comps| {
                        comps
                            .iter()
                            .map(|c| (0..dim).map(|b| c.diff(b)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let spec = ManifoldSpec {
            dim,
            coord_names,
            frame,
            frame_derivs,
            frame_metric,
            metric_inv,
            signature,
            lorentzian,
            domain,
            bracket_coord,
            bracket_derivs,
        };
        spec.validate_frame_invertibility()?;
        Ok(spec)
    }

    /// Checks frame invertibility over a fixed deterministic sample of the
    /// chart domain.
    fn validate_frame_invertibility(&self) -> Result<(), FrameError> {
        let mut sampler = Sampler::new(0x5eed_c0de);
        for _ in 0..16 {
            let p = sampler.point(self);
            let f = self.frame_matrix(&p)?;
            if f.determinant().abs() <= DEGENERACY_TOL {
                return Err(FrameError::FrameSingular(p.0));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn frame_metric(&self) -> &DMatrix<f64> {
        &self.frame_metric
    }

    pub fn metric_inv(&self) -> &DMatrix<f64> {
        &self.metric_inv
    }

    pub fn signature(&self) -> Option<&[f64]> {
        self.signature.as_deref()
    }

    pub fn is_lorentzian(&self) -> bool {
        self.lorentzian
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn frame_exprs(&self) -> &[Vec<ScalarExpr>] {
        &self.frame
    }

    pub fn check_point(&self, p: &Point) -> Result<(), FrameError> {
        if p.dim() != self.dim {
            return Err(FrameError::PointDimension {
                got: p.dim(),
                expected: self.dim,
            });
        }
        if p.0.iter().any(|c| !c.is_finite()) {
            return Err(FrameError::PointNotFinite);
        }
        for (k, (&value, &(lo, hi))) in p.0.iter().zip(&self.domain).enumerate() {
            let slack = 1e-9 * (hi - lo).abs();
            if value < lo - slack || value > hi + slack {
                return Err(FrameError::OutsideDomain {
                    coord: self.coord_names[k].clone(),
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Frame component matrix with column j = coordinate components of ν_j.
    pub fn frame_matrix(&self, p: &Point) -> Result<DMatrix<f64>, FrameError> {
        let mut f = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for a in 0..self.dim {
                f[(a, j)] = self.frame[j][a].eval(p.coords())?;
            }
        }
        Ok(f)
    }

    /// ∂_b of the frame matrix.
    pub fn frame_matrix_deriv(&self, p: &Point, b: usize) -> Result<DMatrix<f64>, FrameError> {
        let mut f = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for a in 0..self.dim {
                f[(a, j)] = self.frame_derivs[j][a][b].eval(p.coords())?;
            }
        }
        Ok(f)
    }

    /// Converts a vector to frame components at `p`.
    pub fn to_frame(&self, v: &VectorValue, p: &Point) -> Result<Vec<f64>, FrameError> {
        if v.components.len() != self.dim {
            return Err(FrameError::VectorDimension {
                got: v.components.len(),
                expected: self.dim,
            });
        }
        match v.basis {
            Basis::Frame => Ok(v.components.clone()),
            Basis::Coordinate => {
                let f = self.frame_matrix(p)?;
                let lu = f.lu();
                let rhs = DVector::from_column_slice(&v.components);
                let sol = lu
                    .solve(&rhs)
                    .ok_or_else(|| FrameError::FrameSingular(p.0.clone()))?;
                Ok(sol.as_slice().to_vec())
            }
        }
    }

    /// Converts a vector to coordinate components at `p`.
    pub fn to_coordinate(&self, v: &VectorValue, p: &Point) -> Result<Vec<f64>, FrameError> {
        if v.components.len() != self.dim {
            return Err(FrameError::VectorDimension {
                got: v.components.len(),
                expected: self.dim,
            });
        }
        match v.basis {
            Basis::Coordinate => Ok(v.components.clone()),
            Basis::Frame => {
                let f = self.frame_matrix(p)?;
                let rhs = DVector::from_column_slice(&v.components);
                Ok((f * rhs).as_slice().to_vec())
            }
        }
    }

    /// Metric pairing g(X, Y) at `p`; inputs may be in either basis.
    pub fn inner(&self, x: &VectorValue, y: &VectorValue, p: &Point) -> Result<f64, FrameError> {
        let xf = self.to_frame(x, p)?;
        let yf = self.to_frame(y, p)?;
        Ok(self.inner_frame(&xf, &yf))
    }

    /// Metric pairing of frame-component vectors (no conversion).
    pub fn inner_frame(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += x[i] * self.frame_metric[(i, j)] * y[j];
            }
        }
        acc
    }

    /// Coordinate components of the constant frame combination Σ c_i ν_i.
    pub fn combo_coord_exprs(&self, coeffs: &[f64]) -> Vec<ScalarExpr> {
        (0..self.dim)
            .map(|a| {
                let column: Vec<ScalarExpr> =
                    (0..self.dim).map(|i| self.frame[i][a].clone()).collect();
                ScalarExpr::linear_combination(coeffs, &column)
            })
            .collect()
    }

    /// Lie bracket of two constant frame combinations, in frame components.
    pub fn lie_bracket(
        &self,
        x: &[f64],
        y: &[f64],
        p: &Point,
    ) -> Result<VectorValue, FrameError> {
        self.check_point(p)?;
        let mut coord = vec![0.0; self.dim];
        for i in 0..self.dim {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                if y[j] == 0.0 {
                    continue;
                }
                for a in 0..self.dim {
                    coord[a] += x[i] * y[j] * self.bracket_coord[i][j][a].eval(p.coords())?;
                }
            }
        }
        let frame = self.to_frame(&VectorValue::coordinate(coord), p)?;
        Ok(VectorValue::frame(frame))
    }

    /// Frame components of [ν_i, ν_j] at `p`.
    pub fn bracket_frame(&self, i: usize, j: usize, p: &Point) -> Result<Vec<f64>, FrameError> {
        let mut coord = vec![0.0; self.dim];
        for a in 0..self.dim {
            coord[a] = self.bracket_coord[i][j][a].eval(p.coords())?;
        }
        self.to_frame(&VectorValue::coordinate(coord), p)
    }

    pub(crate) fn bracket_coord_exprs(&self, i: usize, j: usize) -> &[ScalarExpr] {
        &self.bracket_coord[i][j]
    }

    pub(crate) fn bracket_coord_deriv(&self, i: usize, j: usize, a: usize, b: usize) -> &ScalarExpr {
        &self.bracket_derivs[i][j][a][b]
    }

    /// Directional derivative X(f)(p) for a constant frame combination X.
    pub fn directional_derivative(
        &self,
        f: &ScalarExpr,
        x: &[f64],
        p: &Point,
    ) -> Result<f64, FrameError> {
        self.check_point(p)?;
        let fm = self.frame_matrix(p)?;
        let mut acc = 0.0;
        for a in 0..self.dim {
            let partial = f.diff(a).eval(p.coords())?;
            if partial == 0.0 {
                continue;
            }
            // coordinate component a of X = Σ_i x_i ν_i
            let mut xa = 0.0;
            for i in 0..self.dim {
                xa += x[i] * fm[(a, i)];
            }
            acc += xa * partial;
        }
        Ok(acc)
    }

    /// Directional derivative along a vector with known coordinate components.
    pub fn directional_derivative_coord(
        &self,
        f: &ScalarExpr,
        x_coord: &[f64],
        p: &Point,
    ) -> Result<f64, FrameError> {
        let mut acc = 0.0;
        for a in 0..self.dim {
            if x_coord[a] == 0.0 {
                continue;
            }
            acc += x_coord[a] * f.diff(a).eval(p.coords())?;
        }
        Ok(acc)
    }
}

/// Deterministic sampler for chart points and constant frame combinations.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derives a per-suite sampler from a base seed and a suite label, so
    /// suites draw independent but reproducible streams.
    pub fn for_suite(seed: u64, suite: &str) -> Self {
        Sampler::new(seed ^ fnv1a64(suite.as_bytes()))
    }

    pub fn point(&mut self, spec: &ManifoldSpec) -> Point {
        let coords = spec
            .domain()
            .iter()
            .map(|(lo, hi)| self.rng.random_range(*lo..=*hi))
            .collect();
        Point(coords)
    }

    /// Point in an explicit box (used for submanifold charts).
    pub fn point_in(&mut self, domain: &[(f64, f64)]) -> Point {
        let coords = domain
            .iter()
            .map(|(lo, hi)| self.rng.random_range(*lo..=*hi))
            .collect();
        Point(coords)
    }

    /// Constant coefficients in [-1, 1]^n.
    pub fn combo(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.rng.random_range(-1.0..=1.0)).collect()
    }

    pub fn scalar(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }
}

/// FNV-1a, fixed here so seed derivation never depends on std hasher details.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn example3_spec() -> ManifoldSpec {
        let names: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
        let frame = vec![
            vec![
                parse_expr("0", &names).unwrap(),
                parse_expr("exp(z)", &names).unwrap(),
                parse_expr("0", &names).unwrap(),
            ],
            vec![
                parse_expr("exp(z)", &names).unwrap(),
                parse_expr("exp(z)", &names).unwrap(),
                parse_expr("0", &names).unwrap(),
            ],
            vec![
                parse_expr("0", &names).unwrap(),
                parse_expr("0", &names).unwrap(),
                parse_expr("1", &names).unwrap(),
            ],
        ];
        let metric = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
        ManifoldSpec::new(names, frame, metric, None).unwrap()
    }

    #[test]
    fn example_frame_brackets() {
        let spec = example3_spec();
        let p = Point(vec![0.3, -0.2, 0.5]);
        // [ν1, ν3] = -ν1
        let b = spec.lie_bracket(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &p).unwrap();
        assert!((b.components[0] + 1.0).abs() < 1e-12);
        assert!(b.components[1].abs() < 1e-12);
        assert!(b.components[2].abs() < 1e-12);
        // [ν1, ν2] = 0
        let b = spec.lie_bracket(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &p).unwrap();
        assert!(b.max_abs() < 1e-12);
        // [ν2, ν3] = -ν2
        let b = spec.lie_bracket(&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &p).unwrap();
        assert!((b.components[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bracket_of_field_with_itself_vanishes() {
        let spec = example3_spec();
        let p = Point(vec![0.1, 0.1, -0.4]);
        let x = vec![0.7, -0.3, 0.2];
        let b = spec.lie_bracket(&x, &x, &p).unwrap();
        assert!(b.max_abs() < 1e-12);
    }

    #[test]
    fn metric_values_match_example() {
        let spec = example3_spec();
        let p = Point(vec![0.0, 0.0, 0.0]);
        let nu3 = VectorValue::frame_unit(3, 2);
        assert_eq!(spec.inner(&nu3, &nu3, &p).unwrap(), -1.0);
        let nu1 = VectorValue::frame_unit(3, 0);
        let nu2 = VectorValue::frame_unit(3, 1);
        assert_eq!(spec.inner(&nu1, &nu2, &p).unwrap(), 0.0);
        assert!(spec.is_lorentzian());
        assert_eq!(spec.signature().unwrap(), &[1.0, 1.0, -1.0]);
    }

    #[test]
    fn basis_round_trip() {
        let spec = example3_spec();
        let mut sampler = Sampler::new(7);
        for _ in 0..32 {
            let p = sampler.point(&spec);
            let v = VectorValue::frame(sampler.combo(3));
            let coord = spec.to_coordinate(&v, &p).unwrap();
            let back = spec
                .to_frame(&VectorValue::coordinate(coord), &p)
                .unwrap();
            for (a, b) in v.components.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn directional_derivative_examples() {
        let spec = example3_spec();
        let origin = Point(vec![0.0, 0.0, 0.0]);
        let names = spec.coord_names().to_vec();
        // ν3 = ∂z applied to e^z at origin
        let f = parse_expr("exp(z)", &names).unwrap();
        let d = spec
            .directional_derivative(&f, &[0.0, 0.0, 1.0], &origin)
            .unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        // ν1 = e^z ∂y applied to y at origin
        let f = parse_expr("y", &names).unwrap();
        let d = spec
            .directional_derivative(&f, &[1.0, 0.0, 0.0], &origin)
            .unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn domain_is_enforced() {
        let spec = example3_spec();
        let outside = Point(vec![2.0, 0.0, 0.0]);
        assert!(matches!(
            spec.check_point(&outside),
            Err(FrameError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn degenerate_metric_rejected() {
        let names: Vec<String> = vec!["x".into(), "y".into()];
        let frame = vec![
            vec![parse_expr("1", &names).unwrap(), parse_expr("0", &names).unwrap()],
            vec![parse_expr("0", &names).unwrap(), parse_expr("1", &names).unwrap()],
        ];
        let metric = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            ManifoldSpec::new(names, frame, metric, None),
            Err(FrameError::MetricDegenerate(_))
        ));
    }
}
