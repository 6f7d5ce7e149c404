use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("size mismatch: expected n = {expected}, found {found}")]
    Size { expected: usize, found: usize },
    #[error("linear part is singular")]
    Singular,
    #[error("quadratic part is not of the form -(A Υ + Υ A) (residual {residual:e})")]
    NotInImage { residual: f64 },
}

/// A 2-jet at the origin of a local diffeomorphism fixing it: linear part
/// `u` and symmetric quadratic part `q`, with q^i_jk at `(i*n + j)*n + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2Element {
    pub n: usize,
    pub u: DMatrix<f64>,
    pub q: Vec<f64>,
}

impl Jet2Element {
    pub fn new(u: DMatrix<f64>, q: Vec<f64>) -> Result<Jet2Element, JetError> {
        let n = u.nrows();
        if u.ncols() != n {
            return Err(JetError::Size { expected: n, found: u.ncols() });
        }
        if q.len() != n * n * n {
            return Err(JetError::Size { expected: n * n * n, found: q.len() });
        }
        Ok(Jet2Element { n, u, q })
    }

    pub fn identity(n: usize) -> Jet2Element {
        Jet2Element { n, u: DMatrix::identity(n, n), q: vec![0.0; n * n * n] }
    }

    pub fn q(&self, i: usize, j: usize, k: usize) -> f64 {
        self.q[(i * self.n + j) * self.n + k]
    }

    /// (u, U)(s, S) = (us, U(s, s) + uS).
    pub fn compose(&self, other: &Jet2Element) -> Result<Jet2Element, JetError> {
        let n = self.n;
        if other.n != n {
            return Err(JetError::Size { expected: n, found: other.n });
        }
        let s = &other.u;
        let mut q = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = 0.0;
                    for l in 0..n {
                        v += self.u[(i, l)] * other.q(l, j, k);
                        for m in 0..n {
                            v += self.q(i, l, m) * s[(l, j)] * s[(m, k)];
                        }
                    }
                    q[(i * n + j) * n + k] = v;
                }
            }
        }
        Ok(Jet2Element { n, u: &self.u * s, q })
    }

    /// (u, U)⁻¹ = (v, −vU(v, v)) with v = u⁻¹.
    pub fn inverse(&self) -> Result<Jet2Element, JetError> {
        let n = self.n;
        let v = self.u.clone().try_inverse().ok_or(JetError::Singular)?;
        let mut q = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for p in 0..n {
                        for l in 0..n {
                            for m in 0..n {
                                acc += v[(i, p)] * self.q(p, l, m) * v[(l, j)] * v[(m, k)];
                            }
                        }
                    }
                    q[(i * n + j) * n + k] = -acc;
                }
            }
        }
        Ok(Jet2Element { n, u: v, q })
    }

    pub fn max_abs_diff(&self, other: &Jet2Element) -> f64 {
        let du = (&self.u - &other.u).amax();
        let dq = self.q.iter().zip(&other.q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        du.max(dq)
    }
}

/// The element (A, Υ) of the parabolic H as a 2-jet: Q^i_jk = −(A^i_jΥ_k + A^i_kΥ_j).
pub fn h_embed(a: &DMatrix<f64>, upsilon: &[f64]) -> Result<Jet2Element, JetError> {
    let n = a.nrows();
    if upsilon.len() != n {
        return Err(JetError::Size { expected: n, found: upsilon.len() });
    }
    let mut q = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                q[(i * n + j) * n + k] = -(a[(i, j)] * upsilon[k] + a[(i, k)] * upsilon[j]);
            }
        }
    }
    Jet2Element::new(a.clone(), q)
}

/// Inverse of `h_embed`: Υ_k = −(1/(n+1)) Σ_m (u⁻¹Q)^m_mk. Rejects jets whose
/// quadratic part is not in the image (tolerance `tol`, relative to 1 + |Q|).
pub fn h_extract(g: &Jet2Element, tol: f64) -> Result<(DMatrix<f64>, Vec<f64>), JetError> {
    let n = g.n;
    let inv = g.u.clone().try_inverse().ok_or(JetError::Singular)?;
    let upsilon: Vec<f64> = (0..n)
        .map(|k| {
            let tr: f64 = (0..n).flat_map(|m| (0..n).map(move |l| (m, l))).map(|(m, l)| inv[(m, l)] * g.q(l, m, k)).sum();
            -tr / (n as f64 + 1.0)
        })
        .collect();
    let back = h_embed(&g.u, &upsilon)?;
    let scale = 1.0 + g.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = back.max_abs_diff(g);
    if residual > tol * scale {
        return Err(JetError::NotInImage { residual });
    }
    Ok((g.u.clone(), upsilon))
}
