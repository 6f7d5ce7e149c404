use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{check_boundary_point, RigidityError};
use crate::geometry::{point_env, ConnectionField, MapField};
use crate::sample::Sampler;
use crate::symexpr::EvalError;

const NULL_TOL: f64 = 1e-10;
const GREY_TOL: f64 = 1e-6;

/// The linear part of the 2-jet system at one boundary point. Unknowns are
/// ordered (a, b^1..b^m, db^μ_ν row-major in μ), with m = n − 1 and
/// db^μ_ν standing for ∂_νb^μ.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSystem {
    pub point: Vec<f64>,
    pub n: usize,
    pub matrix: DMatrix<f64>,
    pub labels: Vec<String>,
    gamma: Vec<f64>,
}

/// One solution (a, b, db) of the linear rows together with the c and Υ₀ it determines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JetVector {
    pub a: f64,
    pub b: Vec<f64>,
    /// Row-major: db[μ·m + ν] = ∂_νb^μ.
    pub db: Vec<f64>,
    pub c: Vec<f64>,
    pub upsilon0: f64,
}

impl JetVector {
    pub fn unknowns(&self) -> Vec<f64> {
        std::iter::once(self.a).chain(self.b.iter().copied()).chain(self.db.iter().copied()).collect()
    }
}

impl JetSystem {
    pub fn boundary_dim(&self) -> usize {
        self.n - 1
    }

    pub fn unknowns(&self) -> usize {
        self.matrix.ncols()
    }

    fn g(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[(i * self.n + j) * self.n + k]
    }

    /// max |row · z| over the linear rows.
    pub fn residual(&self, z: &[f64]) -> f64 {
        let v = &self.matrix * DMatrix::from_column_slice(z.len(), 1, z);
        v.amax()
    }

    /// 2c^μ = 2ab^μ + b^μΓ⁰_00 + 2b^μΓ⁰_0τb^τ − 2Γ^μ_0τb^τ − Γ^μ_στb^σb^τ.
    pub fn c_for(&self, a: f64, b: &[f64]) -> Vec<f64> {
        let m = self.boundary_dim();
        (0..m)
            .map(|mu| {
                let i = mu + 1;
                let mut v = 2.0 * a * b[mu] + b[mu] * self.g(0, 0, 0);
                for t in 0..m {
                    v += 2.0 * b[mu] * self.g(0, 0, t + 1) * b[t];
                    v -= 2.0 * self.g(i, 0, t + 1) * b[t];
                    for s in 0..m {
                        v -= self.g(i, s + 1, t + 1) * b[s] * b[t];
                    }
                }
                0.5 * v
            })
            .collect()
    }

    /// Υ₀ = a + Γ⁰_0μb^μ.
    pub fn upsilon0(&self, a: f64, b: &[f64]) -> f64 {
        a + b.iter().enumerate().map(|(mu, bm)| self.g(0, 0, mu + 1) * bm).sum::<f64>()
    }

    pub fn vector(&self, z: &[f64]) -> JetVector {
        let m = self.boundary_dim();
        let a = z[0];
        let b = z[1..1 + m].to_vec();
        let db = z[1 + m..].to_vec();
        let c = self.c_for(a, &b);
        let upsilon0 = self.upsilon0(a, &b);
        JetVector { a, b, db, c, upsilon0 }
    }

    /// Linear residual plus the mismatch of c against its back-substituted value.
    pub fn check(&self, v: &JetVector) -> f64 {
        let c = self.c_for(v.a, &v.b);
        let dc = c.iter().zip(&v.c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        self.residual(&v.unknowns()).max(dc)
    }
}

/// Rows at a boundary point p = (0, y):
/// (i) b^μΓ⁰_ντ = 0;
/// (ii) ∂_νb^μ − b^μΓ⁰_ν0 + Γ^μ_ντb^τ − δ^μ_ν(a + Γ⁰_0σb^σ) = 0;
/// (iii) the tangential derivative of (i), ∂_σb^μΓ⁰_ντ + b^μ∂_σΓ⁰_ντ = 0.
/// Row (iii) is what forces a = 0 once b = 0 at a rigid point.
pub fn jet_system_assemble(
    gamma: &ConnectionField,
    point: &[f64],
    params: &BTreeMap<String, f64>,
) -> Result<JetSystem, RigidityError> {
    check_boundary_point(gamma, point)?;
    let n = gamma.dim();
    let m = n - 1;
    let env = point_env(&gamma.coords, point, params);
    let gv = gamma.eval(point, params)?;
    let g = |i: usize, j: usize, k: usize| gv[(i * n + j) * n + k];
    let mut dg = vec![0.0; m * m * m];
    for nu in 0..m {
        for tau in 0..m {
            for s in 0..m {
                dg[(nu * m + tau) * m + s] = gamma.get(0, nu + 1, tau + 1).diff(&gamma.coords[s + 1]).eval(&env)?;
            }
        }
    }
    let cols = 1 + m + m * m;
    let b_ix = |mu: usize| 1 + mu;
    let db_ix = |mu: usize, nu: usize| 1 + m + mu * m + nu;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for mu in 0..m {
        for nu in 0..m {
            for tau in nu..m {
                let mut r = vec![0.0; cols];
                r[b_ix(mu)] = g(0, nu + 1, tau + 1);
                rows.push(r);
                labels.push(format!("(i) mu={} nu={} tau={}", mu + 1, nu + 1, tau + 1));
            }
        }
    }
    for mu in 0..m {
        for nu in 0..m {
            let mut r = vec![0.0; cols];
            r[db_ix(mu, nu)] += 1.0;
            r[b_ix(mu)] -= g(0, nu + 1, 0);
            for tau in 0..m {
                r[b_ix(tau)] += g(mu + 1, nu + 1, tau + 1);
            }
            if mu == nu {
                r[0] -= 1.0;
                for s in 0..m {
                    r[b_ix(s)] -= g(0, 0, s + 1);
                }
            }
            rows.push(r);
            labels.push(format!("(ii) mu={} nu={}", mu + 1, nu + 1));
        }
    }
    for mu in 0..m {
        for nu in 0..m {
            for tau in nu..m {
                for s in 0..m {
                    let mut r = vec![0.0; cols];
                    r[db_ix(mu, s)] += g(0, nu + 1, tau + 1);
                    r[b_ix(mu)] += dg[(nu * m + tau) * m + s];
                    rows.push(r);
                    labels.push(format!("(iii) mu={} nu={} tau={} sigma={}", mu + 1, nu + 1, tau + 1, s + 1));
                }
            }
        }
    }
    let matrix = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    Ok(JetSystem { point: point.to_vec(), n, matrix, labels, gamma: gv })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Determined,
    /// A singular value sits between the null and the regular range.
    Undetermined { singular_value: f64, condition: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JetSolution {
    pub point: Vec<f64>,
    pub dimension: usize,
    /// Upper bound n(n+2) on the dimension of the automorphism jets.
    pub bound: usize,
    /// Basis of the solution space in reduced row echelon form.
    pub basis: Vec<JetVector>,
    pub singular_values: Vec<f64>,
    pub condition: f64,
    pub max_residual: f64,
    pub status: SolveStatus,
    #[serde(skip)]
    pub system: JetSystem,
    #[serde(skip)]
    orthonormal: Vec<Vec<f64>>,
}

impl JetSolution {
    /// Distance of (a, b, db) from the solution span, together with the
    /// mismatch of c against its back-substituted value.
    pub fn span_residual(&self, v: &JetVector) -> f64 {
        let z = v.unknowns();
        let mut rest = z.clone();
        for q in &self.orthonormal {
            let dot: f64 = q.iter().zip(&z).map(|(x, y)| x * y).sum();
            for (r, qi) in rest.iter_mut().zip(q) {
                *r -= dot * qi;
            }
        }
        let off = rest.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let c = self.system.c_for(v.a, &v.b);
        let dc = c.iter().zip(&v.c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        off.max(dc)
    }
}

fn rref(mut m: DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, val) = (r..rows).map(|i| (i, m[(i, c)].abs())).fold((r, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if val <= tol {
            continue;
        }
        m.swap_rows(r, piv);
        let p = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        r += 1;
    }
    m.map(|v| {
        let near = v.round();
        if (v - near).abs() <= tol { near } else { v }
    })
}

/// Nullspace of the linear rows by SVD; c and Υ₀ follow for each basis vector.
pub fn solve_boundary_jets(
    gamma: &ConnectionField,
    point: &[f64],
    params: &BTreeMap<String, f64>,
) -> Result<JetSolution, RigidityError> {
    let system = jet_system_assemble(gamma, point, params)?;
    let (rows, cols) = system.matrix.shape();
    let mut padded = DMatrix::zeros(rows.max(cols), cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(&system.matrix);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let scale = sv.iter().fold(1.0f64, |m, v| m.max(*v));
    let mut orthonormal = Vec::new();
    let mut grey = None;
    let mut smallest_kept = f64::INFINITY;
    for (i, s) in sv.iter().enumerate() {
        if *s <= NULL_TOL * scale {
            orthonormal.push(v_t.row(i).iter().copied().collect::<Vec<f64>>());
        } else {
            if *s <= GREY_TOL * scale {
                grey = Some(*s);
            }
            smallest_kept = smallest_kept.min(*s);
        }
    }
    let condition = if smallest_kept.is_finite() { scale / smallest_kept } else { 1.0 };
    let dimension = orthonormal.len();
    let basis: Vec<JetVector> = if dimension == 0 {
        Vec::new()
    } else {
        let nmat = DMatrix::from_fn(dimension, cols, |i, j| orthonormal[i][j]);
        let reduced = rref(nmat, 1e-12);
        (0..dimension).map(|i| system.vector(&reduced.row(i).iter().copied().collect::<Vec<_>>())).collect()
    };
    let max_residual = basis.iter().map(|v| system.check(v)).fold(0.0, f64::max);
    let status = match grey {
        Some(s) => SolveStatus::Undetermined { singular_value: s, condition },
        None => SolveStatus::Determined,
    };
    let mut singular_values = sv;
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let n = gamma.dim();
    Ok(JetSolution {
        point: point.to_vec(),
        dimension,
        bound: n * (n + 2),
        basis,
        singular_values,
        condition,
        max_residual,
        status,
        system,
        orthonormal,
    })
}

/// Largest deviation of φ from the identity on the boundary samples:
/// |φ⁰(0, y)| and |φ^μ(0, y) − y^μ|. `sampler` samples the boundary
/// coordinates of the source chart.
pub fn boundary_identity_residual(
    phi: &MapField,
    sampler: &Sampler,
) -> Result<(f64, usize, BTreeMap<String, f64>), EvalError> {
    let x0 = &phi.source_coords[0];
    let compiled: Vec<_> = phi
        .comps
        .iter()
        .map(|e| e.subs_one(x0, &crate::symexpr::Expr::zero()).compile(&sampler.vars, &sampler.fixed))
        .collect::<Result<_, _>>()?;
    let mut worst = (0.0, 0, BTreeMap::new());
    for p in sampler.points() {
        let env = sampler.assignment(&p);
        for (i, c) in compiled.iter().enumerate() {
            let target = if i == 0 { 0.0 } else { env[&phi.source_coords[i]] };
            let r = (c.eval(&p)? - target).abs();
            if r > worst.0 {
                worst = (r, i, env.clone());
            }
        }
    }
    Ok(worst)
}

/// Taylor coefficients φ⁰ = x⁰ + a(x⁰)² + …, φ^μ = y^μ + b^μx⁰ + c^μ(x⁰)² + …
/// of a boundary-fixing map at p, with db^μ_ν = ∂_νb^μ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorJet {
    pub a: f64,
    pub b: Vec<f64>,
    pub db: Vec<f64>,
    pub c: Vec<f64>,
}

impl TaylorJet {
    pub fn as_vector(&self, upsilon0: f64) -> JetVector {
        JetVector { a: self.a, b: self.b.clone(), db: self.db.clone(), c: self.c.clone(), upsilon0 }
    }
}

pub fn boundary_taylor(
    phi: &MapField,
    point: &[f64],
    sampler: &Sampler,
    params: &BTreeMap<String, f64>,
) -> Result<TaylorJet, RigidityError> {
    let n = phi.dim();
    if point.len() != n {
        return Err(RigidityError::Dimension { expected: n, found: point.len() });
    }
    if point[0].abs() > 1e-12 {
        return Err(RigidityError::NotOnBoundary { point: point.to_vec() });
    }
    let (residual, component, at) = boundary_identity_residual(phi, sampler)?;
    if residual > 1e-10 {
        return Err(RigidityError::BoundaryIdentity { component, point: at, residual });
    }
    let env = point_env(&phi.source_coords, point, params);
    let d = phi.jac(0, 0).eval(&env)?;
    if (d - 1.0).abs() > 1e-10 {
        return Err(RigidityError::Normalization { derivative: d, factor: 1.0 / d });
    }
    let m = n - 1;
    let a = 0.5 * phi.hess(0, 0, 0).eval(&env)?;
    let b = (1..n).map(|i| phi.jac(i, 0).eval(&env)).collect::<Result<Vec<_>, _>>()?;
    let c = (1..n).map(|i| Ok(0.5 * phi.hess(i, 0, 0).eval(&env)?)).collect::<Result<Vec<_>, EvalError>>()?;
    let mut db = Vec::with_capacity(m * m);
    for mu in 1..n {
        for nu in 1..n {
            db.push(phi.hess(mu, 0, nu).eval(&env)?);
        }
    }
    Ok(TaylorJet { a, b, db, c })
}
