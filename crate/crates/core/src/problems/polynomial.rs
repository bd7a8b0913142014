use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// `coefficient · Π xᵢ^exponents[i]`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn new(coefficient: f64, exponents: Vec<u32>) -> Self {
        Term {
            coefficient,
            exponents,
        }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn evaluate(&self, x: &Vector) -> f64 {
        self.exponents
            .iter()
            .zip(x.iter())
            .fold(self.coefficient, |acc, (&e, &xi)| acc * powu(xi, e))
    }

    /// `∂/∂x_j` of the monomial.
    fn partial(&self, x: &Vector, j: usize) -> f64 {
        let ej = self.exponents[j];
        if ej == 0 {
            return 0.0;
        }
        let mut acc = self.coefficient * f64::from(ej);
        for (i, (&e, &xi)) in self.exponents.iter().zip(x.iter()).enumerate() {
            acc *= if i == j { powu(xi, e - 1) } else { powu(xi, e) };
        }
        acc
    }
}

fn powu(x: f64, e: u32) -> f64 {
    match e {
        0 => 1.0,
        1 => x,
        _ => x.powi(e as i32),
    }
}

/// A map `ℝⁿ → ℝᵐ` whose components are sparse multivariate polynomials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialMap {
    input_dim: usize,
    components: Vec<Vec<Term>>,
}

impl PolynomialMap {
    pub fn new(input_dim: usize, components: Vec<Vec<Term>>) -> Result<Self> {
        if input_dim == 0 || components.is_empty() {
            return Err(Error::InvalidProblem(
                "polynomial map needs at least one input and one output".into(),
            ));
        }
        for (i, comp) in components.iter().enumerate() {
            for (j, term) in comp.iter().enumerate() {
                if term.exponents.len() != input_dim {
                    return Err(Error::InvalidProblem(format!(
                        "components[{i}][{j}]: exponents has length {}, expected {input_dim}",
                        term.exponents.len()
                    )));
                }
                if !term.coefficient.is_finite() {
                    return Err(Error::InvalidProblem(format!(
                        "components[{i}][{j}]: coefficient is not finite"
                    )));
                }
            }
        }
        Ok(PolynomialMap {
            input_dim,
            components,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<Term>] {
        &self.components
    }

    pub fn total_degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(Term::degree)
            .max()
            .unwrap_or(0)
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Terms are summed in declaration order.
    pub fn evaluate(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        Ok(DVector::from_iterator(
            self.output_dim(),
            self.components
                .iter()
                .map(|comp| comp.iter().map(|t| t.evaluate(x)).sum()),
        ))
    }

    pub fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        self.check_dim(x)?;
        Ok(Matrix::from_fn(
            self.output_dim(),
            self.input_dim,
            |i, j| self.components[i].iter().map(|t| t.partial(x, j)).sum(),
        ))
    }

    /// `‖F(y) − F(x) − F'(x)(y − x)‖`
    pub fn linearization_error(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let fx = self.evaluate(x)?;
        let fy = self.evaluate(y)?;
        let jx = self.jacobian(x)?;
        Ok((fy - fx - jx * (y - x)).norm())
    }

    /// Homogeneous parts of `u ↦ F(center + u)`: entry `n` holds the terms of
    /// total degree `n`, i.e. `F⁽ⁿ⁾(center)[u]ⁿ / n!`. Coefficients that
    /// cancel to exactly zero are dropped.
    pub fn shifted_homogeneous_parts(&self, center: &Vector) -> Result<Vec<PolynomialMap>> {
        self.check_dim(center)?;
        let degree = self.total_degree() as usize;
        let mut buckets: Vec<Vec<BTreeMap<Vec<u32>, f64>>> =
            vec![vec![BTreeMap::new(); self.output_dim()]; degree + 1];
        for (i, comp) in self.components.iter().enumerate() {
            for term in comp {
                expand_shifted(term, center, &mut |exps, coeff| {
                    let n = exps.iter().sum::<u32>() as usize;
                    *buckets[n][i].entry(exps.to_vec()).or_insert(0.0) += coeff;
                });
            }
        }
        Ok(buckets
            .into_iter()
            .map(|per_output| PolynomialMap {
                input_dim: self.input_dim,
                components: per_output
                    .into_iter()
                    .map(|terms| {
                        terms
                            .into_iter()
                            .filter(|(_, c)| *c != 0.0)
                            .map(|(e, c)| Term::new(c, e))
                            .collect()
                    })
                    .collect(),
            })
            .collect())
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_empty())
    }
}

/// Expands `coeff · Π (cᵢ + uᵢ)^eᵢ` into monomials in `u`.
fn expand_shifted(term: &Term, center: &Vector, emit: &mut impl FnMut(&[u32], f64)) {
    fn rec(
        i: usize,
        term: &Term,
        center: &Vector,
        exps: &mut Vec<u32>,
        coeff: f64,
        emit: &mut impl FnMut(&[u32], f64),
    ) {
        if i == term.exponents.len() {
            emit(exps, coeff);
            return;
        }
        let e = term.exponents[i];
        for k in 0..=e {
            let factor = binomial(e, k) * powu(center[i], e - k);
            if factor == 0.0 {
                continue;
            }
            exps.push(k);
            rec(i + 1, term, center, exps, coeff * factor, emit);
            exps.pop();
        }
    }
    let mut exps = Vec::with_capacity(term.exponents.len());
    rec(0, term, center, &mut exps, term.coefficient, emit);
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `sup_{‖u‖=1} ‖P(u)‖` of a homogeneous polynomial map, which equals the
/// operator norm of the associated symmetric multilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorNorm {
    pub value: f64,
    /// False only when the supremum was computed exactly (dimension one).
    pub estimated: bool,
}

const SPHERE_SAMPLES: usize = 20_000;
const ASCENT_STARTS: usize = 64;
const ASCENT_STEPS: usize = 500;

/// Dimension 1 is exact; dimensions 2 and 3 use at least 2·10⁴ sphere
/// directions followed by local ascent; higher dimensions use seeded
/// multi-start ascent (a shifted power iteration on the form).
pub fn homogeneous_norm(part: &PolynomialMap, seed: u64) -> TensorNorm {
    if part.is_zero() {
        return TensorNorm {
            value: 0.0,
            estimated: false,
        };
    }
    let n = part.input_dim();
    let norm_at = |u: &Vector| part.evaluate(u).map(|v| v.norm()).unwrap_or(0.0);
    match n {
        1 => {
            let a = norm_at(&Vector::from_element(1, 1.0));
            let b = norm_at(&Vector::from_element(1, -1.0));
            TensorNorm {
                value: a.max(b),
                estimated: false,
            }
        }
        2 | 3 => {
            let mut best = Vector::zeros(n);
            let mut best_val = -1.0;
            for u in sphere_grid(n, SPHERE_SAMPLES) {
                let v = norm_at(&u);
                if v > best_val {
                    best_val = v;
                    best = u;
                }
            }
            let refined = ascend(part, best);
            TensorNorm {
                value: best_val.max(refined),
                estimated: true,
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best_val: f64 = 0.0;
            for _ in 0..ASCENT_STARTS {
                let u = random_unit(&mut rng, n);
                best_val = best_val.max(ascend(part, u));
            }
            TensorNorm {
                value: best_val,
                estimated: true,
            }
        }
    }
}

fn random_unit(rng: &mut impl Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Ascent on `φ(u) = ½‖P(u)‖²` restricted to the sphere:
/// `u ← normalize(∇φ(u) + α u)` with the shift `α` doubled on failure.
fn ascend(part: &PolynomialMap, start: Vector) -> f64 {
    let value = |u: &Vector| part.evaluate(u).map(|v| v.norm()).unwrap_or(0.0);
    let mut u = start;
    let mut current = value(&u);
    let mut shift = 1.0;
    for _ in 0..ASCENT_STEPS {
        let (Ok(p), Ok(jac)) = (part.evaluate(&u), part.jacobian(&u)) else {
            break;
        };
        let grad = jac.tr_mul(&p);
        let mut improved = false;
        for _ in 0..30 {
            let cand = &grad + &u * (shift * current.max(1e-300));
            let norm = cand.norm();
            if norm == 0.0 {
                break;
            }
            let cand = cand / norm;
            let val = value(&cand);
            if val > current {
                let gain = val - current;
                u = cand;
                current = val;
                improved = gain > 1e-15 * current;
                shift = (shift * 0.5).max(1e-3);
                break;
            }
            shift *= 2.0;
        }
        if !improved {
            break;
        }
    }
    current
}

fn sphere_grid(n: usize, count: usize) -> Vec<Vector> {
    match n {
        2 => (0..count)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / count as f64;
                Vector::from_vec(vec![th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            // Fibonacci sphere
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let rad = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    Vector::from_vec(vec![rad * th.cos(), rad * th.sin(), z])
                })
                .collect()
        }
        _ => unreachable!("sphere grid only for dimensions 2 and 3"),
    }
}
