//! Small dense linear algebra for the Gaussian model `K = (I−Λ)Ω(I−Λ)ᵀ`:
//! parameter sampling, model membership, the group action and the maximal
//! invariant.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{component_order, components, require_nf, HybridGraph};
use crate::symmetry::{equivalence_classes, g0_pattern_via_essential, ZeroPattern};
use crate::vertex_set::VertexSet;

/// Inverses with an estimated condition number above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Rejection bound for random group elements.
pub const GROUP_ELEMENT_CONDITION_LIMIT: f64 = 1e6;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 1.0;
        }
        a
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut a = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            a[(i, i)] = v;
        }
        a
    }

    /// Panics if the rows have different lengths.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Panics on incompatible shapes.
    pub fn mul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &r) in rows.iter().enumerate() {
            for (b, &c) in cols.iter().enumerate() {
                out[(a, b)] = self[(r, c)];
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let all: Vec<usize> = (0..self.cols).collect();
        self.submatrix(rows, &all)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup-norm distance.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.sub(other).max_abs()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn symmetrized(&self) -> Self {
        let t = self.transpose();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&t.data).map(|(a, b)| 0.5 * (a + b)).collect(),
        }
    }

    /// Gauss–Jordan elimination with partial pivoting. Fails with
    /// `SingularMatrix` when a pivot vanishes or the estimated condition
    /// number `‖A‖∞‖A⁻¹‖∞` exceeds [`CONDITION_LIMIT`].
    pub fn inverse(&self) -> Result<DenseMatrix> {
        self.inverse_with_limit(CONDITION_LIMIT)
    }

    pub fn inverse_with_limit(&self, limit: f64) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs();
        if n > 0 && scale == 0.0 {
            return Err(Error::SingularMatrix);
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
                .expect("non-empty range");
            if a[(pivot, col)].abs() <= f64::EPSILON * scale {
                return Err(Error::SingularMatrix);
            }
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                let f = a[(r, col)];
                if r == col || f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] -= f * a[(col, j)];
                    inv[(r, j)] -= f * inv[(col, j)];
                }
            }
        }
        let cond = self.inf_norm() * inv.inf_norm();
        if !cond.is_finite() || cond > limit {
            return Err(Error::SingularMatrix);
        }
        Ok(inv)
    }

    /// LU with partial pivoting.
    pub fn determinant(&self) -> f64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
                .expect("non-empty range");
            if a[(pivot, col)] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                a.swap_rows(col, pivot);
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for j in col..n {
                    a[(r, j)] -= f * a[(col, j)];
                }
            }
        }
        det
    }

    /// Lower-triangular `L` with `A = LLᵀ`.
    pub fn cholesky(&self) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("Cholesky needs a square matrix".into()));
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let d = self[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::SingularMatrix);
            }
            l[(j, j)] = d.sqrt();
            for i in j + 1..n {
                let s = self[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
                l[(i, j)] = s / l[(j, j)];
            }
        }
        Ok(l)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// One row per line, entries separated by single spaces, printed with the
/// shortest representation that round-trips.
impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "{:?}", self.row(i))?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    /// `lambda[(i, j)]` is the coefficient of the arrow `i -> j`.
    pub lambda: DenseMatrix,
    pub omega: DenseMatrix,
}

fn signed_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v = rng.random_range(lo..=hi);
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

/// Seeded draw: `λ` on arrows and `ω` on undirected edges are uniform on
/// `±[0.2, 1]` and `±[0.1, 0.5]`; `ω_ii = 1 + Σ_j |ω_ij|`.
pub fn sample_parameters(h: &HybridGraph, seed: u64) -> Result<ModelParameters> {
    require_nf(h)?;
    let m = h.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lambda = DenseMatrix::zeros(m, m);
    for (i, j) in h.arrows() {
        lambda[(i, j)] = signed_uniform(&mut rng, 0.2, 1.0);
    }
    let mut omega = DenseMatrix::zeros(m, m);
    for (i, j) in h.undirected_edges() {
        let w = signed_uniform(&mut rng, 0.1, 0.5);
        omega[(i, j)] = w;
        omega[(j, i)] = w;
    }
    for i in 0..m {
        omega[(i, i)] = 1.0 + omega.row(i).iter().map(|v| v.abs()).sum::<f64>();
    }
    Ok(ModelParameters { lambda, omega })
}

/// `K = (I−Λ)Ω(I−Λ)ᵀ`.
pub fn concentration(p: &ModelParameters) -> DenseMatrix {
    let m = p.lambda.rows();
    let a = DenseMatrix::identity(m).sub(&p.lambda);
    a.mul(&p.omega).mul(&a.transpose()).symmetrized()
}

/// Decides `K ∈ 𝒦(H)` up to `tol`.
///
/// Works on `Σ = K⁻¹` one component at a time in topological order: the
/// regression of `X_T` on the earlier components may only use the parents of
/// `T`, and the conditional concentration of `X_T` must vanish off the
/// undirected edges inside `T`.
pub fn membership(h: &HybridGraph, k: &DenseMatrix, tol: f64) -> Result<bool> {
    require_nf(h)?;
    if k.rows() != h.m() || !k.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but the graph has {} vertices",
            k.rows(),
            k.cols(),
            h.m()
        )));
    }
    let sigma = k.inverse()?;
    let parts = components(h);
    let order = component_order(h, &parts).expect("chain graph has a component order");
    let mut pre: Vec<usize> = Vec::new();
    for idx in order {
        let block = parts.blocks[idx];
        let t: Vec<usize> = block.iter().collect();
        let mut cond = sigma.submatrix(&t, &t);
        if !pre.is_empty() {
            let parents = h.parents_of_set(block);
            let beta = sigma.submatrix(&t, &pre).mul(&sigma.submatrix(&pre, &pre).inverse()?);
            for (c, &v) in pre.iter().enumerate() {
                if parents.contains(v) {
                    continue;
                }
                if (0..t.len()).any(|r| beta[(r, c)].abs() > tol) {
                    return Ok(false);
                }
            }
            cond = cond.sub(&beta.mul(&sigma.submatrix(&pre, &t)));
        }
        let omega_t = cond.inverse()?;
        for (a, &x) in t.iter().enumerate() {
            for (b, &y) in t.iter().enumerate() {
                if a != b && !h.has_edge(x, y) && omega_t[(a, b)].abs() > tol {
                    return Ok(false);
                }
            }
        }
        pre.extend(t);
        pre.sort_unstable();
    }
    Ok(true)
}

/// `g·K = g⁻ᵀ K g⁻¹`, symmetrized.
pub fn act(g: &DenseMatrix, k: &DenseMatrix) -> Result<DenseMatrix> {
    let gi = g.inverse()?;
    Ok(gi.transpose().mul(k).mul(&gi).symmetrized())
}

/// Data transformation matching [`act`]: `x ↦ g x`.
pub fn act_on_data(g: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    g.mul(x)
}

/// Random invertible matrix supported on the pattern: diagonal uniform on
/// `[0.5, 2]`, allowed off-diagonal entries uniform on `[−1, 1]`, redrawn
/// until the condition estimate is below [`GROUP_ELEMENT_CONDITION_LIMIT`].
pub fn random_pattern_element(pattern: &ZeroPattern, rng: &mut impl Rng) -> DenseMatrix {
    let m = pattern.m();
    loop {
        let mut g = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in pattern.row(i) {
                g[(i, j)] = if i == j {
                    rng.random_range(0.5..=2.0)
                } else {
                    rng.random_range(-1.0..=1.0)
                };
            }
        }
        if g.inverse_with_limit(GROUP_ELEMENT_CONDITION_LIMIT).is_ok() {
            return g;
        }
    }
}

/// Per-class projections `x[↓i]ᵀ (x[↓i] x[↓i]ᵀ)⁻¹ x[↓i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantStatistic {
    /// Equivalence classes, ordered by smallest member.
    pub classes: Vec<VertexSet>,
    pub down_sets: Vec<VertexSet>,
    pub projections: Vec<DenseMatrix>,
}

impl InvariantStatistic {
    /// Sup-norm distance over all projections; `∞` if the shapes differ.
    pub fn max_abs_diff(&self, other: &InvariantStatistic) -> f64 {
        if self.classes != other.classes {
            return f64::INFINITY;
        }
        self.projections
            .iter()
            .zip(&other.projections)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

pub fn maximal_invariant(h: &HybridGraph, x: &DenseMatrix) -> Result<InvariantStatistic> {
    require_nf(h)?;
    if x.rows() != h.m() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} rows but the graph has {} vertices",
            x.rows(),
            h.m()
        )));
    }
    let pattern = g0_pattern_via_essential(h)?;
    let min = (0..h.m()).map(|i| pattern.row(i).len()).max().unwrap_or(0);
    if x.cols() < min {
        return Err(Error::SampleTooSmall { n: x.cols(), min });
    }
    let classes = equivalence_classes(h)?.classes;
    let mut down_sets = Vec::new();
    let mut projections = Vec::new();
    for &class in &classes {
        let rep = class.min().expect("classes are non-empty");
        let down = pattern.row(rep);
        let rows: Vec<usize> = down.iter().collect();
        let xi = x.select_rows(&rows);
        let gram_inv = xi
            .mul(&xi.transpose())
            .inverse()
            .map_err(|_| Error::RankDeficientData(format!("rows {} of the data are not linearly independent", down)))?;
        projections.push(xi.transpose().mul(&gram_inv).mul(&xi).symmetrized());
        down_sets.push(down);
    }
    Ok(InvariantStatistic {
        classes,
        down_sets,
        projections,
    })
}

/// `|det K[A, B]|` for `trials` parameter draws with seeds `seed, seed+1, …`.
pub fn sampled_minors(h: &HybridGraph, a: VertexSet, b: VertexSet, trials: u64, seed: u64) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            rows: a.len(),
            cols: b.len(),
        });
    }
    let rows: Vec<usize> = a.iter().collect();
    let cols: Vec<usize> = b.iter().collect();
    (0..trials)
        .map(|t| {
            let k = concentration(&sample_parameters(h, seed.wrapping_add(t))?);
            Ok(k.submatrix(&rows, &cols).determinant().abs())
        })
        .collect()
}

/// True when `|det K[A, B]| < tol` for every draw.
pub fn numeric_vanishing_check(
    h: &HybridGraph,
    a: VertexSet,
    b: VertexSet,
    trials: u64,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    Ok(sampled_minors(h, a, b, trials, seed)?.iter().all(|&d| d < tol))
}

/// `n` observations from `N(0, K⁻¹)` with `K` drawn by [`sample_parameters`].
pub fn sample_data(h: &HybridGraph, seed: u64, n: usize) -> Result<DenseMatrix> {
    let k = concentration(&sample_parameters(h, seed)?);
    let l = k.cholesky()?;
    // separate stream so the parameters do not depend on n
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut z = DenseMatrix::zeros(h.m(), n);
    for i in 0..h.m() {
        for j in 0..n {
            z[(i, j)] = rng.sample(StandardNormal);
        }
    }
    Ok(l.transpose().inverse()?.mul(&z))
}

/// Generic data with independent standard normal entries.
pub fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut z = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            z[(i, j)] = rng.sample(StandardNormal);
        }
    }
    z
}

/// One variable per line, observations separated by commas. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Csv {
                        line: idx + 1,
                        message: format!("invalid number '{}'", f.trim()),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Csv {
                    line: idx + 1,
                    message: format!("expected {} values, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok(DenseMatrix::from_rows(&rows))
}
