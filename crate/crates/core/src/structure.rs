//! The Lorentzian almost-para-contact quadruple (φ, ξ, η, g).
//!
//! η is derived from ξ and the metric (η(U) = g(U, ξ)) rather than stored,
//! which removes a consistency obligation. φ is a frame-basis matrix whose
//! entries may be expressions; ξ is a frame combination.

use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::connection::{Connection, FrameField};
use crate::expr::ScalarExpr;
use crate::frame::{FrameError, ManifoldSpec, Point, Sampler, VectorValue};
use crate::report::{IdentityEntry, IdentityReport};

#[derive(Debug, Clone, Error)]
pub enum StructureError {
    #[error("phi matrix must be {expected}x{expected}, got {rows}x{cols}")]
    PhiShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("xi must have {expected} frame coefficients, got {got}")]
    XiLength { got: usize, expected: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Lorentzian para-contact structure on a frame-defined manifold.
#[derive(Debug, Clone)]
pub struct LPStructure {
    spec: ManifoldSpec,
    /// phi[k][j]: φν_j = Σ_k phi[k][j] ν_k.
    phi: Vec<Vec<ScalarExpr>>,
    /// ∂_a phi[k][j], precomputed.
    phi_derivs: Vec<Vec<Vec<ScalarExpr>>>,
    /// Frame coefficients of ξ.
    xi: Vec<ScalarExpr>,
    xi_derivs: Vec<Vec<ScalarExpr>>,
}

impl LPStructure {
    pub fn new(
        spec: ManifoldSpec,
        phi: Vec<Vec<ScalarExpr>>,
        xi: Vec<ScalarExpr>,
    ) -> Result<Self, StructureError> {
        let n = spec.dim();
        if phi.len() != n || phi.iter().any(|row| row.len() != n) {
            return Err(StructureError::PhiShape {
                rows: phi.len(),
                cols: phi.first().map(|r| r.len()).unwrap_or(0),
                expected: n,
            });
        }
        if xi.len() != n {
            return Err(StructureError::XiLength {
                got: xi.len(),
                expected: n,
            });
        }
        let phi_derivs = phi
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| (0..n).map(|a| e.diff(a)).collect())
                    .collect()
            })
            .collect();
        let xi_derivs = xi
            .iter()
            .map(|e| (0..n).map(|a| e.diff(a)).collect())
            .collect();
        Ok(LPStructure {
            spec,
            phi,
            phi_derivs,
            xi,
            xi_derivs,
        })
    }

    /// Constant-matrix constructor used for desk examples and perturbations.
    pub fn with_constant_data(
        spec: ManifoldSpec,
        phi: &DMatrix<f64>,
        xi: &[f64],
    ) -> Result<Self, StructureError> {
        let n = spec.dim();
        let phi_exprs = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| ScalarExpr::constant(phi[(k, j)]))
                    .collect()
            })
            .collect();
        let xi_exprs = xi.iter().map(|c| ScalarExpr::constant(*c)).collect();
        LPStructure::new(spec, phi_exprs, xi_exprs)
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn phi_exprs(&self) -> &[Vec<ScalarExpr>] {
        &self.phi
    }

    pub fn xi_exprs(&self) -> &[ScalarExpr] {
        &self.xi
    }

    /// φ matrix evaluated at `p`.
    pub fn phi_matrix(&self, p: &Point) -> Result<Vec<Vec<f64>>, FrameError> {
        let n = self.dim();
        let mut out = vec![vec![0.0; n]; n];
        for k in 0..n {
            for j in 0..n {
                out[k][j] = self.phi[k][j].eval(p.coords())?;
            }
        }
        Ok(out)
    }

    /// ∂_a of the φ matrix at `p`.
    pub(crate) fn phi_matrix_deriv(&self, p: &Point, a: usize) -> Result<Vec<Vec<f64>>, FrameError> {
        let n = self.dim();
        let mut out = vec![vec![0.0; n]; n];
        for k in 0..n {
            for j in 0..n {
                out[k][j] = self.phi_derivs[k][j][a].eval(p.coords())?;
            }
        }
        Ok(out)
    }

    /// Frame coefficients of ξ at `p`.
    pub fn xi_frame(&self, p: &Point) -> Result<Vec<f64>, FrameError> {
        self.xi
            .iter()
            .map(|e| e.eval(p.coords()).map_err(FrameError::from))
            .collect()
    }

    pub(crate) fn xi_frame_deriv(&self, p: &Point, a: usize) -> Result<Vec<f64>, FrameError> {
        self.xi_derivs
            .iter()
            .map(|d| d[a].eval(p.coords()).map_err(FrameError::from))
            .collect()
    }

    /// η(ν_j) = g(ν_j, ξ) for every frame index.
    pub fn eta_frame(&self, p: &Point) -> Result<Vec<f64>, FrameError> {
        let xi = self.xi_frame(p)?;
        let g = self.spec.frame_metric();
        let n = self.dim();
        Ok((0..n)
            .map(|j| (0..n).map(|l| g[(j, l)] * xi[l]).sum())
            .collect())
    }

    /// η(U) for a frame-component vector.
    pub fn eta_of(&self, u: &[f64], p: &Point) -> Result<f64, FrameError> {
        let eta = self.eta_frame(p)?;
        Ok(u.iter().zip(&eta).map(|(a, b)| a * b).sum())
    }

    /// φU for a frame-component vector.
    pub fn apply_phi(&self, u: &[f64], p: &Point) -> Result<Vec<f64>, FrameError> {
        let phi = self.phi_matrix(p)?;
        let n = self.dim();
        Ok((0..n)
            .map(|k| (0..n).map(|j| phi[k][j] * u[j]).sum())
            .collect())
    }

    /// Fundamental form Φ(U, V) = g(φU, V).
    pub fn phi_form(&self, u: &VectorValue, v: &VectorValue, p: &Point) -> Result<f64, FrameError> {
        self.spec.check_point(p)?;
        let uf = self.spec.to_frame(u, p)?;
        let vf = self.spec.to_frame(v, p)?;
        let phi_u = self.apply_phi(&uf, p)?;
        Ok(self.spec.inner_frame(&phi_u, &vf))
    }

    /// ε-weighted trace of Φ over the orthonormal frame.
    pub fn trace_phi(&self, p: &Point) -> Result<f64, FrameError> {
        let eps = self
            .spec
            .signature()
            .ok_or(FrameError::MetricNotSymmetric)?
            .to_vec();
        let phi = self.phi_matrix(p)?;
        let g = self.spec.frame_metric();
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            // Φ(ν_i, ν_i) = Σ_k phi[k][i] g_{ki}
            let phi_ii: f64 = (0..n).map(|k| phi[k][i] * g[(k, i)]).sum();
            acc += eps[i] * phi_ii;
        }
        Ok(acc)
    }

    /// η(V) as a coordinate expression, for a constant frame combination V.
    pub(crate) fn eta_expr(&self, v: &[f64]) -> ScalarExpr {
        let n = self.dim();
        let g = self.spec.frame_metric();
        let mut acc = ScalarExpr::zero();
        for i in 0..n {
            for j in 0..n {
                let c = v[i] * g[(i, j)];
                if c != 0.0 {
                    acc = acc.add(&ScalarExpr::constant(c).mul(&self.xi[j]));
                }
            }
        }
        acc
    }

    /// φV as a frame field with expression components, V a constant combination.
    pub(crate) fn phi_field(&self, v: &[f64]) -> FrameField {
        let n = self.dim();
        let comps = (0..n)
            .map(|k| {
                let mut acc = ScalarExpr::zero();
                for j in 0..n {
                    if v[j] != 0.0 {
                        acc = acc.add(&ScalarExpr::constant(v[j]).mul(&self.phi[k][j]));
                    }
                }
                acc
            })
            .collect();
        FrameField::new(comps)
    }

    /// ξ as a frame field with expression components.
    pub(crate) fn xi_field(&self) -> FrameField {
        FrameField::new(self.xi.clone())
    }
}

/// The three-dimensional structure of the worked example: frame
/// ν1 = e^z ∂y, ν2 = e^z(∂x + ∂y), ν3 = ∂z with g = diag(1, 1, −1),
/// φν1 = −ν1, φν2 = −ν2, φν3 = 0 and ξ = ν3.
pub fn build_example3() -> LPStructure {
    let names: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
    let zero = || ScalarExpr::zero();
    let one = || ScalarExpr::one();
    let ez = || ScalarExpr::var(2).exp();
    let frame = vec![
        vec![zero(), ez(), zero()],
        vec![ez(), ez(), zero()],
        vec![zero(), zero(), one()],
    ];
    let metric = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
    let spec = ManifoldSpec::new(names, frame, metric, None).expect("example frame is valid");
    let phi = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
    LPStructure::with_constant_data(spec, &phi, &[0.0, 0.0, 1.0]).expect("example structure is valid")
}

/// Max-norm of LHS − RHS in frame components.
fn vec_residual(lhs: &[f64], rhs: &[f64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

/// Verifies the structure axioms and the standard derived identities over a
/// seeded sample of points and constant frame combinations.
///
/// Entries: eta_xi, phi_square, metric_compat_phi, nabla_xi, nabla_phi,
/// eta_closed_2_10, phi_xi_zero, eta_phi_zero. Failures are reported, never
/// thrown.
pub fn verify_lp_axioms(
    st: &Arc<LPStructure>,
    seed: u64,
    count: usize,
    tol: f64,
) -> Result<IdentityReport, FrameError> {
    let mut sampler = Sampler::for_suite(seed, "axioms");
    let n = st.dim();
    let lc = Connection::levi_civita(st.clone());

    let mut r_eta_xi = 0.0f64;
    let mut r_phi_square = 0.0f64;
    let mut r_metric_compat = 0.0f64;
    let mut r_nabla_xi = 0.0f64;
    let mut r_nabla_phi = 0.0f64;
    let mut r_eta_closed = 0.0f64;
    let mut r_phi_xi = 0.0f64;
    let mut r_eta_phi = 0.0f64;

    for _ in 0..count {
        let p = sampler.point(st.spec());
        let u = sampler.combo(n);
        let v = sampler.combo(n);
        let xi = st.xi_frame(&p)?;
        let eta_u = st.eta_of(&u, &p)?;
        let eta_v = st.eta_of(&v, &p)?;

        // η(ξ) = −1
        let eta_xi = st.eta_of(&xi, &p)?;
        r_eta_xi = r_eta_xi.max((eta_xi + 1.0).abs());

        // φ²U = U + η(U)ξ
        let phi_u = st.apply_phi(&u, &p)?;
        let phi2_u = st.apply_phi(&phi_u, &p)?;
        let expected: Vec<f64> = (0..n).map(|k| u[k] + eta_u * xi[k]).collect();
        r_phi_square = r_phi_square.max(vec_residual(&phi2_u, &expected));

        // g(φU, φV) = g(U, V) + η(U)η(V)
        let phi_v = st.apply_phi(&v, &p)?;
        let lhs = st.spec().inner_frame(&phi_u, &phi_v);
        let rhs = st.spec().inner_frame(&u, &v) + eta_u * eta_v;
        r_metric_compat = r_metric_compat.max((lhs - rhs).abs());

        // ∇_U ξ = φU
        let tables = lc.tables_at(&p)?;
        let nabla_u_xi = tables.covariant_field(&u, &st.xi_field())?;
        r_nabla_xi = r_nabla_xi.max(vec_residual(&nabla_u_xi, &phi_u));

        // (∇_U φ)V = g(U,V)ξ + η(V)U + 2η(U)η(V)ξ
        let nabla_u_phiv = tables.covariant_field(&u, &st.phi_field(&v))?;
        let nabla_u_v = tables.covariant_const(&u, &v);
        let phi_nabla_u_v = st.apply_phi(&nabla_u_v, &p)?;
        let lhs_vec: Vec<f64> = (0..n).map(|k| nabla_u_phiv[k] - phi_nabla_u_v[k]).collect();
        let guv = st.spec().inner_frame(&u, &v);
        let rhs_vec: Vec<f64> = (0..n)
            .map(|k| guv * xi[k] + eta_v * u[k] + 2.0 * eta_u * eta_v * xi[k])
            .collect();
        r_nabla_phi = r_nabla_phi.max(vec_residual(&lhs_vec, &rhs_vec));

        // (∇_U η)V = Φ(U, V)
        let eta_v_expr = st.eta_expr(&v);
        let u_eta_v = st.spec().directional_derivative(&eta_v_expr, &u, &p)?;
        let eta_nabla_u_v = st.eta_of(&nabla_u_v, &p)?;
        let phi_uv = st.spec().inner_frame(&phi_u, &v);
        r_eta_closed = r_eta_closed.max((u_eta_v - eta_nabla_u_v - phi_uv).abs());

        // φξ = 0, η(φU) = 0
        let phi_xi = st.apply_phi(&xi, &p)?;
        r_phi_xi = r_phi_xi.max(phi_xi.iter().fold(0.0f64, |m, c| m.max(c.abs())));
        let eta_phi_u = st.eta_of(&phi_u, &p)?;
        r_eta_phi = r_eta_phi.max(eta_phi_u.abs());
    }

    let mut report = IdentityReport::new("axioms", seed);
    report.push(IdentityEntry::checked("eta_xi", r_eta_xi, tol, count));
    report.push(IdentityEntry::checked("phi_square", r_phi_square, tol, count));
    report.push(IdentityEntry::checked(
        "metric_compat_phi",
        r_metric_compat,
        tol,
        count,
    ));
    report.push(IdentityEntry::checked("nabla_xi", r_nabla_xi, tol, count));
    report.push(IdentityEntry::checked("nabla_phi", r_nabla_phi, tol, count));
    report.push(IdentityEntry::checked(
        "eta_closed_2_10",
        r_eta_closed,
        tol,
        count,
    ));
    report.push(IdentityEntry::checked("phi_xi_zero", r_phi_xi, tol, count));
    report.push(IdentityEntry::checked("eta_phi_zero", r_eta_phi, tol, count));
    Ok(report)
}

/// Verifies the Levi-Civita curvature identities of the structure:
/// R(ξ,U)V = g(U,V)ξ − η(V)U, R(U,V)ξ = η(V)U − η(U)V,
/// S(U,ξ) = (n−1)η(U) and S(φU,φV) = S(U,V) + (n−1)η(U)η(V).
pub fn verify_lc_curvature_identities(
    st: &Arc<LPStructure>,
    conn: &Connection,
    seed: u64,
    count: usize,
    tol: f64,
) -> Result<IdentityReport, FrameError> {
    let mut sampler = Sampler::for_suite(seed, "lc_curvature");
    let n = st.dim();
    let nf = n as f64;

    let mut r_xi_u_v = 0.0f64;
    let mut r_u_v_xi = 0.0f64;
    let mut r_s_u_xi = 0.0f64;
    let mut r_s_phi_phi = 0.0f64;

    for _ in 0..count {
        let p = sampler.point(st.spec());
        let u = sampler.combo(n);
        let v = sampler.combo(n);
        let xi = st.xi_frame(&p)?;
        let eta_u = st.eta_of(&u, &p)?;
        let eta_v = st.eta_of(&v, &p)?;
        let tables = conn.tables_at(&p)?;
        let curv = tables.riemann_table()?;

        // (2.12) R(ξ,U)V = g(U,V)ξ − η(V)U
        let lhs = curv.apply(&xi, &u, &v);
        let guv = st.spec().inner_frame(&u, &v);
        let rhs: Vec<f64> = (0..n).map(|k| guv * xi[k] - eta_v * u[k]).collect();
        r_xi_u_v = r_xi_u_v.max(vec_residual(&lhs, &rhs));

        // (2.13) R(U,V)ξ = η(V)U − η(U)V
        let lhs = curv.apply(&u, &v, &xi);
        let rhs: Vec<f64> = (0..n).map(|k| eta_v * u[k] - eta_u * v[k]).collect();
        r_u_v_xi = r_u_v_xi.max(vec_residual(&lhs, &rhs));

        // (2.15) S(U,ξ) = (n−1)η(U)
        let ricci = curv.ricci_matrix()?;
        let s_u_xi = ricci_value(&ricci, &u, &xi);
        r_s_u_xi = r_s_u_xi.max((s_u_xi - (nf - 1.0) * eta_u).abs());

        // (2.16) S(φU,φV) = S(U,V) + (n−1)η(U)η(V)
        let phi_u = st.apply_phi(&u, &p)?;
        let phi_v = st.apply_phi(&v, &p)?;
        let lhs = ricci_value(&ricci, &phi_u, &phi_v);
        let rhs = ricci_value(&ricci, &u, &v) + (nf - 1.0) * eta_u * eta_v;
        r_s_phi_phi = r_s_phi_phi.max((lhs - rhs).abs());
    }

    let mut report = IdentityReport::new("lc_curvature", seed);
    report.push(IdentityEntry::checked("r_xi_u_v", r_xi_u_v, tol, count));
    report.push(IdentityEntry::checked("r_u_v_xi", r_u_v_xi, tol, count));
    report.push(IdentityEntry::checked("s_u_xi", r_s_u_xi, tol, count));
    report.push(IdentityEntry::checked("s_phi_phi", r_s_phi_phi, tol, count));
    Ok(report)
}

/// Bilinear evaluation of a Ricci matrix on frame-component vectors.
pub fn ricci_value(ricci: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    let n = ricci.len();
    let mut acc = 0.0;
    for j in 0..n {
        if u[j] == 0.0 {
            continue;
        }
        for k in 0..n {
            acc += u[j] * v[k] * ricci[j][k];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example3_basic_values() {
        let st = build_example3();
        let p = Point(vec![0.2, -0.3, 0.4]);
        let xi = st.xi_frame(&p).unwrap();
        assert_eq!(xi, vec![0.0, 0.0, 1.0]);
        // η(ν3) = −1
        assert_eq!(st.eta_of(&[0.0, 0.0, 1.0], &p).unwrap(), -1.0);
        // φ²ν1 = ν1 (η(ν1) = 0)
        let phi1 = st.apply_phi(&[1.0, 0.0, 0.0], &p).unwrap();
        let phi2 = st.apply_phi(&phi1, &p).unwrap();
        assert_eq!(phi2, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn phi_form_values() {
        let st = build_example3();
        let p = Point(vec![0.0, 0.0, 0.0]);
        let nu1 = VectorValue::frame_unit(3, 0);
        let nu3 = VectorValue::frame_unit(3, 2);
        assert_eq!(st.phi_form(&nu1, &nu1, &p).unwrap(), -1.0);
        assert_eq!(st.phi_form(&nu3, &nu3, &p).unwrap(), 0.0);
        assert_eq!(st.trace_phi(&p).unwrap(), -2.0);
    }

    #[test]
    fn phi_form_symmetry_sampled() {
        let st = build_example3();
        let mut sampler = Sampler::new(11);
        for _ in 0..32 {
            let p = sampler.point(st.spec());
            let u = VectorValue::frame(sampler.combo(3));
            let v = VectorValue::frame(sampler.combo(3));
            let a = st.phi_form(&u, &v, &p).unwrap();
            let b = st.phi_form(&v, &u, &p).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_rank_is_n_minus_one() {
        let st = build_example3();
        let p = Point(vec![0.0, 0.0, 0.0]);
        let phi = st.phi_matrix(&p).unwrap();
        let m = DMatrix::from_fn(3, 3, |k, j| phi[k][j]);
        assert_eq!(m.rank(1e-12), 2);
    }

    #[test]
    fn axioms_pass_on_example() {
        let st = Arc::new(build_example3());
        let report = verify_lp_axioms(&st, 7, 32, 1e-9).unwrap();
        for e in &report.entries {
            assert!(e.pass, "{} residual {}", e.id, e.max_residual);
            assert!(e.max_residual <= 1e-12, "{} residual {}", e.id, e.max_residual);
        }
    }

    #[test]
    fn rescaled_xi_fails_eta_axiom() {
        let st = build_example3();
        let spec = st.spec().clone();
        let phi = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let bad = Arc::new(LPStructure::with_constant_data(spec, &phi, &[0.0, 0.0, 2.0]).unwrap());
        let report = verify_lp_axioms(&bad, 7, 16, 1e-9).unwrap();
        let eta_xi = report.entry("eta_xi").unwrap();
        assert!(!eta_xi.pass);
        // η(2ν3) with ξ = 2ν3 gives −4, residual 3
        assert!((eta_xi.max_residual - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_phi_fails_phi_square() {
        let st = build_example3();
        let spec = st.spec().clone();
        let bad = Arc::new(
            LPStructure::with_constant_data(spec, &DMatrix::identity(3, 3), &[0.0, 0.0, 1.0])
                .unwrap(),
        );
        let report = verify_lp_axioms(&bad, 7, 16, 1e-9).unwrap();
        assert!(!report.entry("phi_square").unwrap().pass);
    }
}
