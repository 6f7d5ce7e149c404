use std::collections::BTreeMap;

use serde::Serialize;

use super::Expr;
use crate::sample::Sampler;

/// Outcome of a zero test.
///
/// `SampledZero` means the expression did not simplify to zero but stayed
/// below the sampler tolerance at every valid sample point.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroVerdict {
    ProvablyZero,
    SampledZero { max_abs: f64, samples: usize },
    NonzeroWitness { point: BTreeMap<String, f64>, value: f64 },
    Undetermined { reason: String },
}

impl ZeroVerdict {
    /// Provably zero or zero on every sample.
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::ProvablyZero | ZeroVerdict::SampledZero { .. })
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, ZeroVerdict::NonzeroWitness { .. })
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, ZeroVerdict::Undetermined { .. })
    }

    /// Largest absolute value seen (0 for provable zeros, NaN when undetermined).
    pub fn max_abs(&self) -> f64 {
        match self {
            ZeroVerdict::ProvablyZero => 0.0,
            ZeroVerdict::SampledZero { max_abs, .. } => *max_abs,
            ZeroVerdict::NonzeroWitness { value, .. } => value.abs(),
            ZeroVerdict::Undetermined { .. } => f64::NAN,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ZeroVerdict::ProvablyZero => 0,
            ZeroVerdict::SampledZero { .. } => 1,
            ZeroVerdict::Undetermined { .. } => 2,
            ZeroVerdict::NonzeroWitness { .. } => 3,
        }
    }

    /// Verdict for the conjunction "both are zero".
    pub fn combine(self, other: ZeroVerdict) -> ZeroVerdict {
        use ZeroVerdict::*;
        match (&self, &other) {
            (SampledZero { max_abs: a, samples: n }, SampledZero { max_abs: b, samples: m }) => {
                SampledZero { max_abs: a.max(*b), samples: (*n).min(*m) }
            }
            (NonzeroWitness { value: a, .. }, NonzeroWitness { value: b, .. }) => {
                if b.abs() > a.abs() {
                    other
                } else {
                    self
                }
            }
            _ => {
                if other.rank() > self.rank() {
                    other
                } else {
                    self
                }
            }
        }
    }
}

/// Tests whether `e` vanishes: symbolically first, then on the sampler's points.
pub fn is_zero(e: &Expr, sampler: &Sampler) -> ZeroVerdict {
    let s = e.simplify();
    if s.is_const_zero() {
        return ZeroVerdict::ProvablyZero;
    }
    let compiled = match s.compile(&sampler.vars, &sampler.fixed) {
        Ok(c) => c,
        Err(err) => return ZeroVerdict::Undetermined { reason: err.to_string() },
    };
    let mut max_abs = 0.0f64;
    let mut worst: Option<(Vec<f64>, f64)> = None;
    let mut ok = 0usize;
    let mut first_err = None;
    for p in sampler.points() {
        match compiled.eval(&p) {
            Ok(v) => {
                ok += 1;
                if v.abs() > max_abs {
                    max_abs = v.abs();
                    if v.abs() > sampler.tol {
                        worst = Some((p, v));
                    }
                }
            }
            Err(err) => {
                first_err.get_or_insert(err);
            }
        }
    }
    if let Some((p, v)) = worst {
        return ZeroVerdict::NonzeroWitness { point: sampler.assignment(&p), value: v };
    }
    if ok == 0 {
        let reason = match first_err {
            Some(err) => format!("every sample point failed: {err}"),
            None => "sampler produced no points".to_string(),
        };
        return ZeroVerdict::Undetermined { reason };
    }
    ZeroVerdict::SampledZero { max_abs, samples: ok }
}

/// Combined verdict over several expressions, with the index of the component
/// that decided a nonzero or undetermined outcome.
pub fn is_zero_all(es: &[Expr], sampler: &Sampler) -> (ZeroVerdict, Option<usize>) {
    let mut acc = ZeroVerdict::ProvablyZero;
    let mut idx = None;
    for (i, e) in es.iter().enumerate() {
        let v = is_zero(e, sampler);
        let before = acc.clone();
        acc = acc.combine(v);
        if acc != before && !acc.is_zero() {
            idx = Some(i);
        }
    }
    (acc, idx)
}
