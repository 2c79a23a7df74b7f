//! Finite abelian groups as explicit products of cyclic groups.
//!
//! Elements and characters share one mixed-radix index space
//! `{0, ..., |G|-1}` (finite abelian groups are self-dual as index sets).
//! Functions on the group carry a domain tag: primal functions integrate
//! against the normalised counting measure `E_x`, dual functions against
//! counting measure `sum_gamma`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// Equality tolerance for floating-point identities (Plancherel, inversion,
/// convolution theorem).
pub const TOL_EQ: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("operation requires a {expected:?} function, got {got:?}")]
    DomainMismatch { expected: Domain, got: Domain },
    #[error("functions live on different groups")]
    GroupMismatch,
    #[error("value length {got} does not match group size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cyclic orders must all be >= 1")]
    InvalidOrders,
    #[error("set of elements is not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("generating set must be nonempty")]
    EmptyGenerators,
}

#[derive(Debug)]
struct GroupData {
    orders: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
    /// lcm of the orders, for exact character-triviality tests.
    exponent: u128,
}

/// A finite abelian group `Z/n1 x ... x Z/nk`, shared by reference.
#[derive(Clone)]
pub struct Group(Arc<GroupData>);

/// Alias matching the domain vocabulary.
pub type FiniteAbelianGroup = Group;

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group{:?}", self.0.orders)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.orders == other.0.orders
    }
}
impl Eq for Group {}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Group {
    pub fn new(orders: Vec<usize>) -> Result<Self, GroupError> {
        if orders.is_empty() || orders.iter().any(|&n| n == 0) {
            return Err(GroupError::InvalidOrders);
        }
        let size: usize = orders.iter().product();
        let mut strides = vec![1usize; orders.len()];
        for i in (0..orders.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * orders[i + 1];
        }
        let exponent = orders
            .iter()
            .fold(1u128, |l, &n| l / gcd(l, n as u128) * n as u128);
        Ok(Group(Arc::new(GroupData {
            orders,
            strides,
            size,
            exponent,
        })))
    }

    pub fn cyclic(n: usize) -> Self {
        Group::new(vec![n]).expect("n >= 1")
    }

    pub fn orders(&self) -> &[usize] {
        &self.0.orders
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.size());
        self.0
            .orders
            .iter()
            .zip(&self.0.strides)
            .map(|(&n, &s)| (index / s) % n)
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.0.orders.len());
        coords
            .iter()
            .zip(self.0.orders.iter().zip(&self.0.strides))
            .map(|(&c, (&n, &s))| (c % n) * s)
            .sum()
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for (&n, &s) in self.0.orders.iter().zip(&self.0.strides) {
            let ca = (a / s) % n;
            let cb = (b / s) % n;
            out += ((ca + cb) % n) * s;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        let mut out = 0;
        for (&n, &s) in self.0.orders.iter().zip(&self.0.strides) {
            let c = (a / s) % n;
            out += ((n - c) % n) * s;
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// gamma(x) = e(sum_i gamma_i x_i / n_i).
    pub fn char_value(&self, gamma: usize, x: usize) -> Complex64 {
        let mut phase = 0.0f64;
        for (&n, &s) in self.0.orders.iter().zip(&self.0.strides) {
            let cg = (gamma / s) % n;
            let cx = (x / s) % n;
            phase += ((cg * cx) % n) as f64 / n as f64;
        }
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
    }

    /// Exact integer test for gamma(x) = 1.
    pub fn char_is_one_at(&self, gamma: usize, x: usize) -> bool {
        let l = self.0.exponent;
        let mut acc = 0u128;
        for (&n, &s) in self.0.orders.iter().zip(&self.0.strides) {
            let cg = ((gamma / s) % n) as u128;
            let cx = ((x / s) % n) as u128;
            acc = (acc + cg * cx * (l / n as u128)) % l;
        }
        acc == 0
    }

    /// |1 - gamma(x)|, used for Bohr radii.
    pub fn char_distance(&self, gamma: usize, x: usize) -> f64 {
        if self.char_is_one_at(gamma, x) {
            0.0
        } else {
            (Complex64::new(1.0, 0.0) - self.char_value(gamma, x)).norm()
        }
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size()
    }
}

/// Which measure a function integrates against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// On G, with normalised counting measure `E_x`.
    Primal,
    /// On the dual, with counting measure `sum_gamma`.
    Dual,
}

/// A dense complex-valued function on a group (or its dual).
#[derive(Clone, Debug)]
pub struct GroupFunction {
    group: Group,
    values: Vec<Complex64>,
    domain: Domain,
}

impl GroupFunction {
    pub fn new(group: Group, values: Vec<Complex64>, domain: Domain) -> Result<Self, GroupError> {
        if values.len() != group.size() {
            return Err(GroupError::LengthMismatch {
                expected: group.size(),
                got: values.len(),
            });
        }
        Ok(GroupFunction {
            group,
            values,
            domain,
        })
    }

    pub fn from_real(group: Group, values: &[f64], domain: Domain) -> Result<Self, GroupError> {
        let v = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        GroupFunction::new(group, v, domain)
    }

    pub fn zero(group: Group, domain: Domain) -> Self {
        let n = group.size();
        GroupFunction {
            group,
            values: vec![Complex64::new(0.0, 0.0); n],
            domain,
        }
    }

    pub fn constant(group: Group, c: f64) -> Self {
        let n = group.size();
        GroupFunction {
            group,
            values: vec![Complex64::new(c, 0.0); n],
            domain: Domain::Primal,
        }
    }

    /// 0/1 indicator of a set of element indices.
    pub fn indicator(group: Group, set: &[usize]) -> Self {
        let mut f = GroupFunction::zero(group, Domain::Primal);
        for &x in set {
            f.values[x] = Complex64::new(1.0, 0.0);
        }
        f
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    /// Fourier transform: `f^(gamma) = E_x f(x) conj(gamma(x))`.
    pub fn dft(&self) -> Result<GroupFunction, GroupError> {
        if self.domain != Domain::Primal {
            return Err(GroupError::DomainMismatch {
                expected: Domain::Primal,
                got: self.domain,
            });
        }
        let mut v = self.values.clone();
        multi_axis_dft(&mut v, &self.group, -1.0);
        let scale = 1.0 / self.group.size() as f64;
        for z in &mut v {
            *z *= scale;
        }
        Ok(GroupFunction {
            group: self.group.clone(),
            values: v,
            domain: Domain::Dual,
        })
    }

    /// Inversion: `f(x) = sum_gamma f^(gamma) gamma(x)`.
    pub fn idft(&self) -> Result<GroupFunction, GroupError> {
        if self.domain != Domain::Dual {
            return Err(GroupError::DomainMismatch {
                expected: Domain::Dual,
                got: self.domain,
            });
        }
        let mut v = self.values.clone();
        multi_axis_dft(&mut v, &self.group, 1.0);
        Ok(GroupFunction {
            group: self.group.clone(),
            values: v,
            domain: Domain::Primal,
        })
    }

    /// `f * g (t) = E_x f(x) g(t - x)`, computed through the convolution
    /// identity `(f*g)^ = f^ g^`.
    pub fn convolve(&self, other: &GroupFunction) -> Result<GroupFunction, GroupError> {
        if self.group != other.group {
            return Err(GroupError::GroupMismatch);
        }
        if self.domain != Domain::Primal || other.domain != Domain::Primal {
            return Err(GroupError::DomainMismatch {
                expected: Domain::Primal,
                got: Domain::Dual,
            });
        }
        let mut fh = self.dft()?;
        let gh = other.dft()?;
        for (a, b) in fh.values.iter_mut().zip(&gh.values) {
            *a *= b;
        }
        fh.idft()
    }

    /// L^p (primal, `E_x`) or `l^p` (dual, counting) norm.
    pub fn norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        match self.domain {
            Domain::Primal => (s / self.group.size() as f64).powf(1.0 / p),
            Domain::Dual => s.powf(1.0 / p),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Complex64 {
        let s: Complex64 = self.values.iter().sum();
        s / self.group.size() as f64
    }

    pub fn scaled(&self, c: f64) -> GroupFunction {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    pub fn add_fn(&self, other: &GroupFunction) -> Result<GroupFunction, GroupError> {
        if self.group != other.group || self.domain != other.domain {
            return Err(GroupError::GroupMismatch);
        }
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        GroupFunction::new(self.group.clone(), v, self.domain)
    }

    pub fn sub_fn(&self, other: &GroupFunction) -> Result<GroupFunction, GroupError> {
        if self.group != other.group || self.domain != other.domain {
            return Err(GroupError::GroupMismatch);
        }
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        GroupFunction::new(self.group.clone(), v, self.domain)
    }

    pub fn mul_pointwise(&self, other: &GroupFunction) -> Result<GroupFunction, GroupError> {
        if self.group != other.group || self.domain != other.domain {
            return Err(GroupError::GroupMismatch);
        }
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        GroupFunction::new(self.group.clone(), v, self.domain)
    }

    /// Translate: `(tau_t f)(x) = f(x - t)`.
    pub fn translate(&self, t: usize) -> GroupFunction {
        let g = &self.group;
        let mut v = vec![Complex64::new(0.0, 0.0); g.size()];
        for x in g.elements() {
            v[x] = self.values[g.sub(x, t)];
        }
        GroupFunction {
            group: g.clone(),
            values: v,
            domain: self.domain,
        }
    }
}

/// Row-column multi-dimensional DFT: one naive 1-D transform per cyclic
/// factor. `sign = -1.0` forward, `+1.0` inverse (unscaled in both cases).
fn multi_axis_dft(values: &mut [Complex64], group: &Group, sign: f64) {
    let orders = group.orders();
    let size = values.len();
    let mut strides = vec![1usize; orders.len()];
    for i in (0..orders.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * orders[i + 1];
    }
    let mut line = Vec::new();
    for (axis, (&n, &stride)) in orders.iter().zip(&strides).enumerate() {
        if n == 1 {
            continue;
        }
        let _ = axis;
        // Twiddle table for this axis.
        let tw: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        let block = stride * n;
        let mut base = 0;
        while base < size {
            for off in 0..stride {
                line.clear();
                line.extend((0..n).map(|j| values[base + off + j * stride]));
                for (k, slot) in (0..n).zip(0..n) {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &v) in line.iter().enumerate() {
                        acc += v * tw[(j * k) % n];
                    }
                    values[base + off + slot * stride] = acc;
                }
            }
            base += block;
        }
    }
}

/// A subgroup stored both as a sorted index set and a generator list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    group: Group,
    elements: Vec<usize>,
    generators: Vec<usize>,
}

impl Subgroup {
    /// Smallest subgroup containing `generators`, by BFS closure under
    /// addition and negation.
    pub fn closure(group: &Group, generators: &[usize]) -> Result<Subgroup, GroupError> {
        if generators.is_empty() {
            return Err(GroupError::EmptyGenerators);
        }
        let mut in_set = vec![false; group.size()];
        in_set[0] = true;
        let mut queue: Vec<usize> = vec![0];
        for &g in generators {
            if !in_set[g] {
                in_set[g] = true;
                queue.push(g);
            }
            let ng = group.neg(g);
            if !in_set[ng] {
                in_set[ng] = true;
                queue.push(ng);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let a = queue[head];
            head += 1;
            for &g in generators {
                for b in [group.add(a, g), group.sub(a, g)] {
                    if !in_set[b] {
                        in_set[b] = true;
                        queue.push(b);
                    }
                }
            }
        }
        let mut elements: Vec<usize> = (0..group.size()).filter(|&i| in_set[i]).collect();
        elements.sort_unstable();
        Ok(Subgroup {
            group: group.clone(),
            elements,
            generators: generators.to_vec(),
        })
    }

    pub fn trivial(group: &Group) -> Subgroup {
        Subgroup {
            group: group.clone(),
            elements: vec![0],
            generators: vec![0],
        }
    }

    pub fn full(group: &Group) -> Subgroup {
        let gens: Vec<usize> = group
            .orders()
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let mut c = vec![0; group.orders().len()];
                c[i] = 1 % group.orders()[i];
                group.index(&c)
            })
            .collect();
        Subgroup {
            group: group.clone(),
            elements: (0..group.size()).collect(),
            generators: gens,
        }
    }

    /// Validate a sorted element set: identity, closure, divisibility.
    pub fn from_elements(group: &Group, mut elements: Vec<usize>) -> Result<Subgroup, GroupError> {
        elements.sort_unstable();
        elements.dedup();
        if elements.binary_search(&0).is_err() {
            return Err(GroupError::NotASubgroup("missing identity".into()));
        }
        for &a in &elements {
            if elements.binary_search(&group.neg(a)).is_err() {
                return Err(GroupError::NotASubgroup(format!("not closed under negation at {a}")));
            }
            for &b in &elements {
                if elements.binary_search(&group.add(a, b)).is_err() {
                    return Err(GroupError::NotASubgroup(format!(
                        "not closed under addition at ({a},{b})"
                    )));
                }
            }
        }
        if group.size() % elements.len() != 0 {
            return Err(GroupError::NotASubgroup("order does not divide |G|".into()));
        }
        let generators = elements.clone();
        Ok(Subgroup {
            group: group.clone(),
            elements,
            generators,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn density(&self) -> f64 {
        self.order() as f64 / self.group.size() as f64
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// The annihilator `H^perp = { gamma : gamma(h) = 1 for all h in H }`,
    /// as a subgroup of the (self-dual) character index space.
    pub fn annihilator(&self) -> Subgroup {
        let g = &self.group;
        let elements: Vec<usize> = g
            .elements()
            .filter(|&gamma| self.generators.iter().all(|&h| g.char_is_one_at(gamma, h)))
            .collect();
        let generators = elements.clone();
        Subgroup {
            group: g.clone(),
            elements,
            generators,
        }
    }

    /// Indicator of the coset `x + H`.
    pub fn coset_indicator(&self, x: usize) -> GroupFunction {
        let g = &self.group;
        let set: Vec<usize> = self.elements.iter().map(|&h| g.add(x, h)).collect();
        GroupFunction::indicator(g.clone(), &set)
    }

    /// Canonical coset representative: smallest index in `x + H`.
    pub fn coset_rep(&self, x: usize) -> usize {
        self.elements
            .iter()
            .map(|&h| self.group.add(x, h))
            .min()
            .unwrap_or(x)
    }
}
