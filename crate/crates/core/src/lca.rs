//! Finite modeling of trigonometric-polynomial measures on H x Z^d (dual
//! side H^ x T^d): sample the torus directions at a prime modulus, compare
//! the model norm against a quadrature of the true norm, and split integer
//! lattices of frequencies into commensurability classes via exact
//! Hermite-form algebra.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Domain, Group, GroupError, GroupFunction};

#[derive(Debug, Error)]
pub enum LcaError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("modulus {n} folds distinct frequencies together: {a:?} and {b:?}")]
    ModulusTooSmall { n: u64, a: Vec<i64>, b: Vec<i64> },
    #[error("modulus {0} is not prime")]
    ModulusNotPrime(u64),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrequencyTerm {
    pub sign: i8,
    /// Character coordinates on the finite part H.
    pub omega: Vec<usize>,
    /// Integer frequency vector for the torus part.
    pub r: Vec<i64>,
}

/// A signed sum of frequency atoms (omega, r) on H^ x Z^d.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrequencySpec {
    pub d: usize,
    pub finite_orders: Vec<usize>,
    pub terms: Vec<FrequencyTerm>,
}

impl FrequencySpec {
    pub fn validate(&self) -> Result<(), LcaError> {
        let mut seen = std::collections::BTreeSet::new();
        for t in &self.terms {
            if t.omega.len() != self.finite_orders.len() || t.r.len() != self.d {
                return Err(LcaError::BadParameter("term shape mismatch".into()));
            }
            if t.sign != 1 && t.sign != -1 {
                return Err(LcaError::BadParameter("signs must be +1 or -1".into()));
            }
            if !seen.insert((t.omega.clone(), t.r.clone())) {
                return Err(LcaError::BadParameter("duplicate frequency atom".into()));
            }
        }
        Ok(())
    }

    pub fn max_frequency(&self) -> i64 {
        self.terms
            .iter()
            .flat_map(|t| t.r.iter().map(|&x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    /// The value at (h, theta) with theta in [0,1)^d.
    fn eval(&self, h: &[usize], theta: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut phase = 0.0f64;
            for ((&w, &coord), &n) in t.omega.iter().zip(h).zip(&self.finite_orders) {
                phase += (w * coord) as f64 / n as f64;
            }
            for (&ri, &th) in t.r.iter().zip(theta) {
                phase += ri as f64 * th;
            }
            let ang = 2.0 * PI * phase;
            acc += t.sign as f64 * Complex64::new(ang.cos(), ang.sin());
        }
        acc
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

pub fn next_prime(floor: u64) -> u64 {
    let mut n = floor.max(2);
    while !is_prime(n) {
        n += 1;
    }
    n
}

#[derive(Clone, Debug)]
pub struct ModelBuildReport {
    pub n: u64,
    pub model: GroupFunction,
    /// E |model| over the finite group.
    pub norm_estimate: f64,
}

/// Sample the torus directions at x/N: the model lives on H x (Z/N)^d.
pub fn build_finite_model(spec: &FrequencySpec, n: u64) -> Result<ModelBuildReport, LcaError> {
    spec.validate()?;
    if !is_prime(n) {
        return Err(LcaError::ModulusNotPrime(n));
    }
    if (n as i64) <= 2 * spec.max_frequency() {
        return Err(LcaError::BadParameter(format!(
            "modulus {n} does not dominate twice the top frequency"
        )));
    }
    // distinct atoms must stay distinct after reduction mod N
    for (i, a) in spec.terms.iter().enumerate() {
        for b in &spec.terms[i + 1..] {
            if a.omega == b.omega
                && a.r
                    .iter()
                    .zip(&b.r)
                    .all(|(&x, &y)| (x - y).rem_euclid(n as i64) == 0)
            {
                return Err(LcaError::ModulusTooSmall {
                    n,
                    a: a.r.clone(),
                    b: b.r.clone(),
                });
            }
        }
    }
    let mut orders = spec.finite_orders.clone();
    orders.extend(std::iter::repeat(n as usize).take(spec.d));
    if orders.is_empty() {
        orders.push(1);
    }
    let group = Group::new(orders)?;
    let h_rank = spec.finite_orders.len();
    let mut values = Vec::with_capacity(group.size());
    for idx in group.elements() {
        let coords = group.coords(idx);
        let theta: Vec<f64> = coords[h_rank..]
            .iter()
            .map(|&x| x as f64 / n as f64)
            .collect();
        values.push(spec.eval(&coords[..h_rank], &theta));
    }
    let model = GroupFunction::new(group, values, Domain::Primal)?;
    let norm_estimate = model.norm(1.0);
    Ok(ModelBuildReport {
        n,
        model,
        norm_estimate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormQuadrature {
    pub value: f64,
    pub error_bound: f64,
    pub resolution: usize,
}

/// Riemann sum for `E_h int_{T^d} |sum_j ...|`, with compensated summation
/// so the result is reproducible regardless of partitioning.
pub fn norm_quadrature(spec: &FrequencySpec, resolution: usize) -> Result<NormQuadrature, LcaError> {
    spec.validate()?;
    if (resolution as i64) < 2 * spec.max_frequency() + 1 {
        return Err(LcaError::BadParameter(
            "resolution below the Nyquist floor for these frequencies".into(),
        ));
    }
    let h_size: usize = spec.finite_orders.iter().product::<usize>().max(1);
    let h_group = if spec.finite_orders.is_empty() {
        None
    } else {
        Some(Group::new(spec.finite_orders.clone())?)
    };
    let cells = resolution.pow(spec.d as u32).max(1);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64; // Kahan carry
    for h_idx in 0..h_size {
        let h = match &h_group {
            Some(g) => g.coords(h_idx),
            None => Vec::new(),
        };
        for cell in 0..cells {
            let mut c = cell;
            let mut theta = vec![0.0f64; spec.d];
            for t in theta.iter_mut() {
                *t = (c % resolution) as f64 / resolution as f64;
                c /= resolution;
            }
            let y = spec.eval(&h, &theta).norm() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    let value = sum / (h_size * cells) as f64;
    // |grad| of the integrand is at most 2 pi |terms| max|r| per direction
    let lipschitz = 2.0 * PI * spec.terms.len() as f64 * spec.max_frequency() as f64;
    let error_bound = lipschitz * spec.d as f64 / resolution as f64;
    Ok(NormQuadrature {
        value,
        error_bound,
        resolution,
    })
}

/// A sublattice of Z^d in canonical column Hermite form: pivots positive
/// and strictly descending in row, off-pivot entries reduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub d: usize,
    /// Columns generate the lattice; stored canonically.
    pub basis: Vec<Vec<i128>>,
}

fn col_is_zero(c: &[i128]) -> bool {
    c.iter().all(|&x| x == 0)
}

/// Column Hermite reduction; returns (canonical nonzero columns, rank).
fn hermite_columns(mut cols: Vec<Vec<i128>>, d: usize) -> Vec<Vec<i128>> {
    let mut pivot_col = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (col, row)
    for row in 0..d {
        loop {
            let mut nonzero: Vec<usize> = (pivot_col..cols.len())
                .filter(|&j| cols[j][row] != 0)
                .collect();
            if nonzero.is_empty() {
                break;
            }
            if nonzero.len() == 1 {
                let j = nonzero[0];
                cols.swap(pivot_col, j);
                if cols[pivot_col][row] < 0 {
                    for v in cols[pivot_col].iter_mut() {
                        *v = -*v;
                    }
                }
                pivots.push((pivot_col, row));
                pivot_col += 1;
                break;
            }
            nonzero.sort_by_key(|&j| cols[j][row].abs());
            let j0 = nonzero[0];
            for &j in &nonzero[1..] {
                let q = cols[j][row] / cols[j0][row];
                for i in 0..d {
                    let sub = q * cols[j0][i];
                    cols[j][i] -= sub;
                }
            }
        }
    }
    // reduce earlier columns against each pivot for canonicity
    for &(pc, pr) in &pivots {
        let p = cols[pc][pr];
        for j in 0..pc {
            let q = cols[j][pr].div_euclid(p);
            if q != 0 {
                for i in 0..d {
                    let sub = q * cols[pc][i];
                    cols[j][i] -= sub;
                }
            }
        }
    }
    cols.retain(|c| !col_is_zero(c));
    cols
}

impl Lattice {
    pub fn new(d: usize, columns: Vec<Vec<i128>>) -> Result<Lattice, LcaError> {
        if columns.iter().any(|c| c.len() != d) {
            return Err(LcaError::BadParameter("column length mismatch".into()));
        }
        Ok(Lattice {
            d,
            basis: hermite_columns(columns, d),
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[i128]) -> bool {
        // solve by forward substitution against the triangular pivots
        let mut v = v.to_vec();
        for col in &self.basis {
            let row = (0..self.d).find(|&i| col[i] != 0).unwrap();
            if v[row] % col[row] != 0 {
                return false;
            }
            let q = v[row] / col[row];
            for i in 0..self.d {
                v[i] -= q * col[i];
            }
        }
        col_is_zero(&v)
    }

    /// Rank of the union of generating sets (rational span dimension).
    fn joint_rank(&self, other: &Lattice) -> usize {
        let mut cols = self.basis.clone();
        cols.extend(other.basis.iter().cloned());
        hermite_columns(cols, self.d).len()
    }

    pub fn same_span(&self, other: &Lattice) -> bool {
        self.rank() == other.rank() && self.joint_rank(other) == self.rank()
    }

    /// Index of `sub` inside self, when finite (same span).
    pub fn index_of(&self, sub: &Lattice) -> Option<u128> {
        if !self.same_span(sub) || !sub.basis.iter().all(|c| self.contains(c)) {
            return None;
        }
        // express sub's basis in self's coordinates and take |det|
        let r = self.rank();
        let mut m = vec![vec![0i128; r]; r]; // m[row][col]
        for (cidx, col) in sub.basis.iter().enumerate() {
            let mut v = col.clone();
            for (bidx, b) in self.basis.iter().enumerate() {
                let row = (0..self.d).find(|&i| b[i] != 0).unwrap();
                let q = v[row] / b[row];
                m[bidx][cidx] = q;
                for i in 0..self.d {
                    v[i] -= q * b[i];
                }
            }
        }
        Some(int_det_abs(m))
    }
}

fn int_det_abs(mut m: Vec<Vec<i128>>) -> u128 {
    // fraction-free Gaussian elimination (Bareiss)
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut denom: i128 = 1;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            if let Some(s) = (k + 1..n).find(|&i| m[i][k] != 0) {
                m.swap(k, s);
            } else {
                return 0;
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / denom;
            }
            m[i][k] = 0;
        }
        denom = m[k][k];
    }
    m[n - 1][n - 1].unsigned_abs()
}

/// Integer kernel of a d x n matrix given as columns, via column reduction
/// with a tracked unimodular transform.
fn integer_kernel(cols: &[Vec<i128>], d: usize) -> Vec<Vec<i128>> {
    let n = cols.len();
    let mut a: Vec<Vec<i128>> = cols.to_vec();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1 } else { 0 }).collect())
        .collect();
    let mut pivot_col = 0;
    for row in 0..d {
        loop {
            let mut nonzero: Vec<usize> = (pivot_col..n).filter(|&j| a[j][row] != 0).collect();
            if nonzero.is_empty() {
                break;
            }
            if nonzero.len() == 1 {
                a.swap(pivot_col, nonzero[0]);
                u.swap(pivot_col, nonzero[0]);
                pivot_col += 1;
                break;
            }
            nonzero.sort_by_key(|&j| a[j][row].abs());
            let j0 = nonzero[0];
            for &j in &nonzero[1..] {
                let q = a[j][row] / a[j0][row];
                for i in 0..d {
                    let sub = q * a[j0][i];
                    a[j][i] -= sub;
                }
                for i in 0..n {
                    let sub = q * u[j0][i];
                    u[j][i] -= sub;
                }
            }
        }
    }
    (0..n)
        .filter(|&j| col_is_zero(&a[j]))
        .map(|j| u[j].clone())
        .collect()
}

/// `L1 ∩ L2` from the integer kernel of the stacked matrix [B1 | -B2].
pub fn lattice_intersect(l1: &Lattice, l2: &Lattice) -> Result<Lattice, LcaError> {
    if l1.d != l2.d {
        return Err(LcaError::BadParameter("ambient rank mismatch".into()));
    }
    let r1 = l1.rank();
    let mut stacked: Vec<Vec<i128>> = l1.basis.clone();
    for c in &l2.basis {
        stacked.push(c.iter().map(|&x| -x).collect());
    }
    let kernel = integer_kernel(&stacked, l1.d);
    let mut cols = Vec::new();
    for k in kernel {
        let mut v = vec![0i128; l1.d];
        for (j, col) in l1.basis.iter().enumerate() {
            for i in 0..l1.d {
                v[i] += k[j] * col[i];
            }
        }
        let _ = r1;
        if !col_is_zero(&v) {
            cols.push(v);
        }
    }
    Lattice::new(l1.d, cols)
}

#[derive(Clone, Debug, Serialize)]
pub struct CommensurabilityClass {
    pub members: Vec<usize>,
    /// Intersection of all members of the class.
    pub omega: Lattice,
}

/// Partition by equality of rational spans; mutual finite index within the
/// span is exactly span equality for integer lattices.
pub fn commensurability_classes(
    lattices: &[Lattice],
) -> Result<Vec<CommensurabilityClass>, LcaError> {
    let mut classes: Vec<CommensurabilityClass> = Vec::new();
    for (i, l) in lattices.iter().enumerate() {
        if let Some(c) = classes
            .iter_mut()
            .find(|c| lattices[c.members[0]].same_span(l))
        {
            c.omega = lattice_intersect(&c.omega, l)?;
            c.members.push(i);
        } else {
            classes.push(CommensurabilityClass {
                members: vec![i],
                omega: l.clone(),
            });
        }
    }
    Ok(classes)
}
