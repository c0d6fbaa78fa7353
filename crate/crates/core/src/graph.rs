//! Discrete graphs `(μ, η)`: a weighted point cloud of vertices, dense edge
//! fields, and the nonlocal gradient/divergence pair.

use std::ops::{Deref, DerefMut};

use crate::error::{check_len, Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Probability measure supported on finitely many distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl BaseMeasure {
    /// Builds a measure from points and positive weights summing to one.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        check_len(points.len(), weights.len())?;
        if points.is_empty() {
            return Err(Error::InvalidInput("a graph needs at least one vertex".into()));
        }
        let dim = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("point {i} is not finite")));
            }
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidInput(format!("weight {i} = {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::InvalidInput(format!(
                        "points {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Self { points, weights })
    }

    /// Uniform weights `1/n` on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len().max(1);
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Uniform measure on `0, 1, …, n−1` along the real line.
    pub fn uniform_line(n: usize) -> Result<Self> {
        Self::uniform((0..n).map(|i| vec![i as f64]).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total mass `μ(K)`.
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Squared Euclidean distance between vertices `i` and `j`.
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `Σ_i m_i f_i`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(m, v)| m * v).sum()
    }
}

/// Symmetry tag carried by an [`EdgeField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
    None,
}

/// Dense `n × n` real field on the off-diagonal pairs.
///
/// The diagonal is always zero. Fields built through [`EdgeField::from_fn`]
/// mirror the upper triangle so the tagged symmetry holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    n: usize,
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl EdgeField {
    pub fn zeros(n: usize, symmetry: Symmetry) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
            symmetry,
        }
    }

    /// Constant `c` on every off-diagonal entry.
    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_fn(n, Symmetry::Symmetric, |_, _| c)
    }

    /// Fills the field from `f(i, j)`.
    ///
    /// For symmetric fields `f` is only called with `i < j`; for antisymmetric
    /// fields the lower triangle is the negated mirror of the upper one.
    pub fn from_fn(n: usize, symmetry: Symmetry, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                match symmetry {
                    Symmetry::None => values[i * n + j] = f(i, j),
                    Symmetry::Symmetric | Symmetry::Antisymmetric if i < j => {
                        let v = f(i, j);
                        values[i * n + j] = v;
                        values[j * n + i] = if symmetry == Symmetry::Symmetric { v } else { -v };
                    }
                    _ => {}
                }
            }
        }
        Self { n, values, symmetry }
    }

    /// Builds a field from explicit rows, validating the diagonal and the
    /// requested symmetry.
    pub fn from_rows(rows: Vec<Vec<f64>>, symmetry: Symmetry) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            check_len(n, row.len())?;
            if row[i] != 0.0 {
                return Err(Error::InvalidInput(format!("diagonal entry ({i},{i}) is nonzero")));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i} is not finite")));
            }
            values.extend(row);
        }
        let field = Self { n, values, symmetry };
        field.check_symmetry()?;
        Ok(field)
    }

    fn check_symmetry(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                let ok = match self.symmetry {
                    Symmetry::Symmetric => a == b,
                    Symmetry::Antisymmetric => a == -b,
                    Symmetry::None => true,
                };
                if !ok {
                    return Err(Error::ContractViolation(format!(
                        "entries ({i},{j}) = {a} and ({j},{i}) = {b} break {:?} symmetry",
                        self.symmetry
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fails unless the field is tagged antisymmetric and its values agree.
    pub fn require_antisymmetric(&self) -> Result<()> {
        if self.symmetry != Symmetry::Antisymmetric {
            return Err(Error::ContractViolation(format!(
                "expected an antisymmetric edge field, got {:?}",
                self.symmetry
            )));
        }
        self.check_symmetry()
    }

    pub fn require_symmetric(&self) -> Result<()> {
        if self.symmetry != Symmetry::Symmetric {
            return Err(Error::ContractViolation(format!(
                "expected a symmetric edge field, got {:?}",
                self.symmetry
            )));
        }
        self.check_symmetry()
    }

    /// Linear combination `self + s·other`, keeping the symmetry tag of `self`.
    pub fn axpy(&self, s: f64, other: &EdgeField) -> EdgeField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        EdgeField {
            n: self.n,
            values,
            symmetry: self.symmetry,
        }
    }

    /// Applies `f` entrywise to the off-diagonal values.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> EdgeField {
        let n = self.n;
        let mut values = self.values.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    values[i * n + j] = f(values[i * n + j]);
                }
            }
        }
        EdgeField {
            n,
            values,
            symmetry: self.symmetry,
        }
    }

    /// Replaces the field by `(E + Eᵀ)/2` and tags it symmetric.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.values[i * n + j] + self.values[j * n + i]);
                self.values[i * n + j] = avg;
                self.values[j * n + i] = avg;
            }
        }
        self.symmetry = Symmetry::Symmetric;
    }

    fn offdiag(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n;
        self.values
            .iter()
            .enumerate()
            .filter(move |(k, _)| k / n != k % n)
            .map(|(_, v)| *v)
    }

    /// Minimum off-diagonal entry; `None` for a single vertex.
    pub fn min_offdiag(&self) -> Option<f64> {
        self.offdiag().reduce(f64::min)
    }

    pub fn max_offdiag(&self) -> Option<f64> {
        self.offdiag().reduce(f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.offdiag().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn sup_distance(&self, other: &EdgeField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Density `r = dρ/dμ` sampled at the vertices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexDensity(pub Vec<f64>);

impl VertexDensity {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|v| *v >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &VertexDensity) -> VertexDensity {
        VertexDensity(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    /// `‖self − other‖_{L²_μ}`.
    pub fn l2_distance(&self, other: &VertexDensity, mu: &BaseMeasure) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .zip(mu.weights())
            .map(|((a, b), m)| m * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for VertexDensity {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for VertexDensity {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for VertexDensity {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// `(∇̄φ)(i, j) = φ_j − φ_i`.
pub fn nonlocal_gradient(phi: &VertexDensity, mu: &BaseMeasure) -> Result<EdgeField> {
    check_len(mu.len(), phi.len())?;
    Ok(EdgeField::from_fn(phi.len(), Symmetry::Antisymmetric, |i, j| {
        phi[j] - phi[i]
    }))
}

/// Divergence of an antisymmetric edge flux with `dj = j d(μ⊗μ)`:
/// `(∇̄·j)_i = Σ_j j[i][j] m_j`.
pub fn nonlocal_divergence(j: &EdgeField, mu: &BaseMeasure) -> Result<VertexDensity> {
    check_len(mu.len(), j.n())?;
    j.require_antisymmetric()?;
    let w = mu.weights();
    Ok(VertexDensity(
        (0..j.n())
            .map(|i| j.row(i).iter().zip(w).map(|(v, m)| v * m).sum())
            .collect(),
    ))
}

/// Integration-by-parts residual
/// `|Σ_i φ_i (∇̄·j)_i m_i + ½ Σ_{i,j} (∇̄φ)_{ij} j_{ij} m_i m_j|`.
pub fn adjointness_defect(phi: &VertexDensity, j: &EdgeField, mu: &BaseMeasure) -> Result<f64> {
    let div = nonlocal_divergence(j, mu)?;
    let grad = nonlocal_gradient(phi, mu)?;
    let w = mu.weights();
    let lhs: f64 = (0..mu.len()).map(|i| phi[i] * div[i] * w[i]).sum();
    let mut pairing = 0.0;
    for a in 0..mu.len() {
        for b in 0..mu.len() {
            pairing += grad.get(a, b) * j.get(a, b) * w[a] * w[b];
        }
    }
    Ok((lhs + 0.5 * pairing).abs())
}
