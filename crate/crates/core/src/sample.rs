//! Deterministic sample points in a coordinate box.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Sample points over a box in some of the variables, with the remaining
/// variables (parameters, pinned coordinates) held at fixed values.
///
/// The first point is always the box centre; the rest are uniform draws from
/// a ChaCha8 stream keyed by `seed`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampler {
    pub vars: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    pub fixed: BTreeMap<String, f64>,
    pub count: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Sampler {
    pub fn new(vars: &[String], bounds: &[(f64, f64)]) -> Sampler {
        assert_eq!(vars.len(), bounds.len(), "one bound per sampled variable");
        Sampler {
            vars: vars.to_vec(),
            bounds: bounds.to_vec(),
            fixed: BTreeMap::new(),
            count: DEFAULT_SAMPLES,
            seed: 0,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_count(mut self, count: usize) -> Sampler {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Sampler {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Sampler {
        self.tol = tol;
        self
    }

    pub fn with_fixed(mut self, values: &BTreeMap<String, f64>) -> Sampler {
        for (k, v) in values {
            self.fixed.insert(k.clone(), *v);
        }
        self
    }

    /// Holds `var` at `value` and stops sampling it.
    pub fn pin(&self, var: &str, value: f64) -> Sampler {
        let mut s = self.clone();
        if let Some(i) = s.vars.iter().position(|v| v == var) {
            s.vars.remove(i);
            s.bounds.remove(i);
        }
        s.fixed.insert(var.to_string(), value);
        s
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        if self.count == 0 {
            return out;
        }
        out.push(self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect());
        for _ in 1..self.count {
            out.push(
                self.bounds
                    .iter()
                    .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
                    .collect(),
            );
        }
        out
    }

    /// Full variable assignment (sampled and fixed) for one point.
    pub fn assignment(&self, point: &[f64]) -> BTreeMap<String, f64> {
        let mut m = self.fixed.clone();
        for (name, v) in self.vars.iter().zip(point) {
            m.insert(name.clone(), *v);
        }
        m
    }

    pub fn assignments(&self) -> Vec<BTreeMap<String, f64>> {
        self.points().iter().map(|p| self.assignment(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_point_is_centre_and_stream_is_reproducible() {
        let s = Sampler::new(&["r".into(), "t".into()], &[(0.0, 0.5), (-1.0, 1.0)]).with_count(8).with_seed(7);
        let a = s.points();
        assert_eq!(a[0], vec![0.25, 0.0]);
        assert_eq!(a, s.points());
        assert_ne!(a, s.clone().with_seed(8).points());
        for p in &a {
            assert!((0.0..=0.5).contains(&p[0]) && (-1.0..=1.0).contains(&p[1]));
        }
    }

    #[test]
    fn pinning_moves_a_variable_to_the_fixed_set() {
        let s = Sampler::new(&["r".into(), "t".into()], &[(0.0, 0.5), (-1.0, 1.0)]).pin("r", 0.0);
        assert_eq!(s.vars, vec!["t".to_string()]);
        let a = s.assignment(&[0.3]);
        assert_eq!(a["r"], 0.0);
        assert_eq!(a["t"], 0.3);
    }
}
