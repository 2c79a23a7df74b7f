//! Multi-scale approximate-subgroup systems: a family `X_rho` of nested,
//! symmetric, additively compatible level sets with a doubling dimension
//! certificate, plus smoothing measures and the projection `psi`.
//!
//! Representation: one entry radius `r(x)` per group element, with
//! `X_rho = { x : r(x) <= rho }`. Nesting is then structural, symmetry /
//! additivity / doubling are checkable properties of `r`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Domain, Group, GroupError, GroupFunction, Subgroup, TOL_EQ};
use crate::spectral::spec_of_dual;

/// Level sets are tracked on the fixed domain [0, 4]; dimension control
/// is not maintainable beyond the top scale.
pub const RHO_MAX: f64 = 4.0;
/// Boundary slack on level-set membership, absorbing rounding in radii.
pub const LEVEL_TOL: f64 = 1e-12;
/// Floor for "nonnegative spectrum" checks.
pub const PSD_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BourgainError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("level parameter {0} outside the tracked domain")]
    RhoOutOfRange(f64),
    #[error("level set X_{0} is empty")]
    EmptyLevelSet(f64),
    #[error("doubling certificate d={dim} fails at rho={rho}: |X_2rho|={big} > 2^d*{small}")]
    CertificateViolated {
        dim: f64,
        rho: f64,
        big: usize,
        small: usize,
    },
    #[error("size lower bound violated: |X_1|={got} < {bound}")]
    SizeBoundViolated { got: usize, bound: f64 },
    #[error("bad constructor parameter: {0}")]
    BadParameter(String),
    #[error("no dilation factor on the search grid is regular; best violation {best_violation} at lambda={best_lambda}")]
    NoRegularDilate {
        best_lambda: f64,
        best_violation: f64,
    },
}

/// Serializable construction recipe; radii are recomputed on build, so a
/// descriptor plus group orders round-trips a system exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemDescriptor {
    Subgroup {
        generators: Vec<Vec<usize>>,
    },
    Bohr {
        gammas: Vec<Vec<usize>>,
        kappas: Vec<f64>,
    },
    Dilate {
        lambda: f64,
        inner: Box<SystemDescriptor>,
    },
    Join {
        left: Box<SystemDescriptor>,
        right: Box<SystemDescriptor>,
    },
    /// Verbatim radii (entries above RHO_MAX stand for "never enters").
    Raw {
        radii: Vec<f64>,
        dim: f64,
    },
}

impl SystemDescriptor {
    pub fn build(&self, group: &Group) -> Result<BourgainSystem, BourgainError> {
        match self {
            SystemDescriptor::Subgroup { generators } => {
                let gens: Vec<usize> = generators.iter().map(|c| group.index(c)).collect();
                let h = if gens.is_empty() {
                    Subgroup::trivial(group)
                } else {
                    Subgroup::closure(group, &gens)?
                };
                Ok(BourgainSystem::subgroup_system(&h))
            }
            SystemDescriptor::Bohr { gammas, kappas } => {
                let gs: Vec<usize> = gammas.iter().map(|c| group.index(c)).collect();
                BourgainSystem::bohr_system(group, &gs, kappas)
            }
            SystemDescriptor::Dilate { lambda, inner } => {
                inner.build(group)?.dilate(*lambda)
            }
            SystemDescriptor::Join { left, right } => {
                left.build(group)?.join(&right.build(group)?)
            }
            SystemDescriptor::Raw { radii, dim } => Ok(BourgainSystem::from_radii_unchecked(
                group.clone(),
                radii.clone(),
                *dim,
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BourgainSystem {
    group: Group,
    radii: Vec<f64>,
    sorted_radii: Vec<f64>,
    dim: f64,
    descriptor: SystemDescriptor,
}

fn finite_or_cap(r: f64) -> f64 {
    if r.is_finite() {
        r
    } else {
        1e300
    }
}

impl BourgainSystem {
    fn assemble(
        group: Group,
        radii: Vec<f64>,
        dim: f64,
        descriptor: SystemDescriptor,
    ) -> BourgainSystem {
        let mut sorted_radii = radii.clone();
        sorted_radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        BourgainSystem {
            group,
            radii,
            sorted_radii,
            dim,
            descriptor,
        }
    }

    /// Constant family `X_rho = H`: dimension 0.
    pub fn subgroup_system(h: &Subgroup) -> BourgainSystem {
        let g = h.group().clone();
        let radii: Vec<f64> = g
            .elements()
            .map(|x| if h.contains(x) { 0.0 } else { f64::INFINITY })
            .collect();
        let descriptor = SystemDescriptor::Subgroup {
            generators: h
                .generators()
                .iter()
                .map(|&x| g.coords(x).to_vec())
                .collect(),
        };
        BourgainSystem::assemble(g, radii, 0.0, descriptor)
    }

    /// `X_rho = { x : |1 - gamma_j(x)| <= kappa_j * rho  for all j }`,
    /// with dimension certificate `3k` and, for kappa_j <= 1, the size
    /// bound `|X_1| >= 8^{-k} kappa_1...kappa_k |G|`.
    pub fn bohr_system(
        group: &Group,
        gammas: &[usize],
        kappas: &[f64],
    ) -> Result<BourgainSystem, BourgainError> {
        if gammas.is_empty() || gammas.len() != kappas.len() {
            return Err(BourgainError::BadParameter(
                "need matching nonempty character and width lists".into(),
            ));
        }
        if kappas.iter().any(|&k| !(k > 0.0)) {
            return Err(BourgainError::BadParameter("widths must be positive".into()));
        }
        let k = gammas.len();
        let radii: Vec<f64> = group
            .elements()
            .map(|x| {
                gammas
                    .iter()
                    .zip(kappas)
                    .map(|(&g, &kap)| group.char_distance(g, x) / kap)
                    .fold(0.0, f64::max)
            })
            .collect();
        let descriptor = SystemDescriptor::Bohr {
            gammas: gammas.iter().map(|&g| group.coords(g).to_vec()).collect(),
            kappas: kappas.to_vec(),
        };
        let s = BourgainSystem::assemble(group.clone(), radii, 3.0 * k as f64, descriptor);
        s.validate_certificate()?;
        if kappas.iter().all(|&kap| kap <= 1.0) {
            let bound =
                8f64.powi(-(k as i32)) * kappas.iter().product::<f64>() * group.size() as f64;
            let got = s.level_size(1.0);
            if (got as f64) < bound - TOL_EQ {
                return Err(BourgainError::SizeBoundViolated { got, bound });
            }
        }
        Ok(s)
    }

    /// `X'_rho = X_{lambda rho}`; the dimension certificate survives, and
    /// `|X'_1| >= (lambda/2)^d |X_1|` is asserted.
    pub fn dilate(&self, lambda: f64) -> Result<BourgainSystem, BourgainError> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(BourgainError::BadParameter(format!(
                "dilation factor {lambda} outside (0,1]"
            )));
        }
        let radii: Vec<f64> = self.radii.iter().map(|&r| r / lambda).collect();
        let descriptor = SystemDescriptor::Dilate {
            lambda,
            inner: Box::new(self.descriptor.clone()),
        };
        let s = BourgainSystem::assemble(self.group.clone(), radii, self.dim, descriptor);
        s.validate_certificate()?;
        let bound = (lambda / 2.0).powf(self.dim) * self.size() as f64;
        let got = s.size();
        if (got as f64) < bound - TOL_EQ {
            return Err(BourgainError::SizeBoundViolated { got, bound });
        }
        Ok(s)
    }

    /// Pointwise intersection `X''_rho = X_rho ∩ X'_rho`; certificate
    /// `4(d + d')` and size `>= 2^{-3(d+d')} mu(S') |S|`.
    pub fn join(&self, other: &BourgainSystem) -> Result<BourgainSystem, BourgainError> {
        if self.group != other.group {
            return Err(GroupError::GroupMismatch.into());
        }
        let radii: Vec<f64> = self
            .radii
            .iter()
            .zip(&other.radii)
            .map(|(&a, &b)| a.max(b))
            .collect();
        let dim = 4.0 * (self.dim + other.dim);
        let descriptor = SystemDescriptor::Join {
            left: Box::new(self.descriptor.clone()),
            right: Box::new(other.descriptor.clone()),
        };
        let s = BourgainSystem::assemble(self.group.clone(), radii, dim, descriptor);
        s.validate_certificate()?;
        let bound =
            2f64.powf(-3.0 * (self.dim + other.dim)) * other.density() * self.size() as f64;
        let got = s.size();
        if (got as f64) < bound - TOL_EQ {
            return Err(BourgainError::SizeBoundViolated { got, bound });
        }
        Ok(s)
    }

    /// Relabel through a bijection and re-verify the certificate; this is
    /// how image systems under additive relabelings are admitted.
    pub fn relabel(&self, pi: &[usize]) -> Result<BourgainSystem, BourgainError> {
        if pi.len() != self.group.size() {
            return Err(BourgainError::BadParameter("relabeling length mismatch".into()));
        }
        let mut radii = vec![f64::INFINITY; pi.len()];
        for (x, &px) in pi.iter().enumerate() {
            radii[px] = self.radii[x];
        }
        let s = BourgainSystem::from_radii_unchecked(self.group.clone(), radii, self.dim);
        s.validate_certificate()?;
        let rep = s.check_axioms();
        if !rep.pass {
            return Err(BourgainError::BadParameter(
                "relabeled radii do not satisfy the system axioms".into(),
            ));
        }
        Ok(s)
    }

    /// No validation; used for adversarial instances in tests and for raw
    /// deserialized data (callers should run check_axioms).
    pub fn from_radii_unchecked(group: Group, radii: Vec<f64>, dim: f64) -> BourgainSystem {
        let descriptor = SystemDescriptor::Raw {
            radii: radii.iter().map(|&r| finite_or_cap(r)).collect(),
            dim,
        };
        BourgainSystem::assemble(group, radii, dim, descriptor)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn dim(&self) -> f64 {
        self.dim
    }

    pub fn descriptor(&self) -> &SystemDescriptor {
        &self.descriptor
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn member(&self, rho: f64, x: usize) -> bool {
        self.radii[x] <= rho + LEVEL_TOL
    }

    /// |X_rho| (no domain check; internal and report use).
    pub fn level_size(&self, rho: f64) -> usize {
        self.sorted_radii.partition_point(|&r| r <= rho + LEVEL_TOL)
    }

    pub fn level_set(&self, rho: f64) -> Result<Vec<usize>, BourgainError> {
        if !(0.0..=RHO_MAX).contains(&rho) {
            return Err(BourgainError::RhoOutOfRange(rho));
        }
        Ok(self
            .group
            .elements()
            .filter(|&x| self.member(rho, x))
            .collect())
    }

    /// |S| = |X_1|.
    pub fn size(&self) -> usize {
        self.level_size(1.0)
    }

    pub fn density(&self) -> f64 {
        self.size() as f64 / self.group.size() as f64
    }

    fn dyadic_grid() -> Vec<f64> {
        (-10..=2).map(|e| 2f64.powi(e)).collect()
    }

    /// Doubling certificate check on the dyadic grid (the load-bearing
    /// axiom downstream); named constructors reject failures.
    pub fn validate_certificate(&self) -> Result<(), BourgainError> {
        if self.radii[0] > LEVEL_TOL {
            return Err(BourgainError::BadParameter(
                "identity has nonzero entry radius".into(),
            ));
        }
        let factor = 2f64.powf(self.dim);
        for rho in Self::dyadic_grid() {
            if rho > 1.0 {
                break;
            }
            let small = self.level_size(rho);
            let big = self.level_size(2.0 * rho);
            if big as f64 > factor * small as f64 * (1.0 + 1e-12) {
                return Err(BourgainError::CertificateViolated {
                    dim: self.dim,
                    rho,
                    big,
                    small,
                });
            }
        }
        Ok(())
    }

    /// Greedy covering of `target` by translates of `X_cover_rho`: scan the
    /// target, open a new center at the first uncovered point, mark its
    /// translate. Maximality of the center set gives the textbook count
    /// bounds, so the greedy count is comparable against them.
    fn greedy_cover_count(&self, target: &[usize], cover_rho: f64) -> usize {
        let cover: Vec<usize> = self
            .group
            .elements()
            .filter(|&x| self.member(cover_rho, x))
            .collect();
        let mut covered = vec![false; self.group.size()];
        let mut count = 0;
        for &y in target {
            if covered[y] {
                continue;
            }
            count += 1;
            for &x in &cover {
                covered[self.group.add(y, x)] = true;
            }
        }
        count
    }

    pub fn check_axioms(&self) -> AxiomReport {
        let g = &self.group;
        let n = g.size();
        // BS1 nesting is structural for a radius function; recorded as such.
        let bs1_nested = true;
        let bs2_zero = self.radii[0] <= LEVEL_TOL;

        let mut bs3_witness = None;
        for x in g.elements() {
            let a = self.radii[x];
            let b = self.radii[g.neg(x)];
            let both_out = a > RHO_MAX && b > RHO_MAX;
            if !both_out && (a - b).abs() > TOL_EQ {
                bs3_witness = Some(x);
                break;
            }
        }

        let mut bs4_witness = None;
        'outer: for x in g.elements() {
            let rx = self.radii[x];
            if rx > RHO_MAX {
                continue;
            }
            for y in g.elements() {
                let ry = self.radii[y];
                let sum = rx + ry;
                if sum > RHO_MAX {
                    continue;
                }
                if self.radii[g.add(x, y)] > sum + TOL_EQ {
                    bs4_witness = Some((x, y));
                    break 'outer;
                }
            }
        }

        let factor = 2f64.powf(self.dim);
        let mut bs5_witness = None;
        for rho in Self::dyadic_grid() {
            if rho > 1.0 {
                break;
            }
            let small = self.level_size(rho);
            let big = self.level_size(2.0 * rho);
            if big as f64 > factor * small as f64 * (1.0 + 1e-12) {
                bs5_witness = Some(rho);
                break;
            }
        }

        // covering: X_{2rho} by translates of X_{rho/2}, bound 2^{4d}
        let cover_bound = 2f64.powf(4.0 * self.dim);
        let mut covering = Vec::new();
        let mut covering_ok = true;
        for rho in Self::dyadic_grid() {
            if rho > 0.5 {
                break;
            }
            let target: Vec<usize> = g.elements().filter(|&x| self.member(2.0 * rho, x)).collect();
            let count = self.greedy_cover_count(&target, rho / 2.0);
            if count as f64 > cover_bound {
                covering_ok = false;
            }
            covering.push(CoverCheck {
                rho,
                count,
                bound: cover_bound,
            });
        }

        // metric entropy: G by translates of X_rho, bound (4/rho)^d / mu(S)
        let all: Vec<usize> = g.elements().collect();
        let mu = self.density();
        let mut entropy = Vec::new();
        let mut entropy_ok = true;
        for rho in Self::dyadic_grid() {
            if rho > 1.0 {
                break;
            }
            let count = self.greedy_cover_count(&all, rho);
            let bound = (4.0 / rho).powf(self.dim) / mu;
            if count as f64 > bound {
                entropy_ok = false;
            }
            entropy.push(CoverCheck { rho, count, bound });
        }

        let _ = n;
        let pass = bs1_nested
            && bs2_zero
            && bs3_witness.is_none()
            && bs4_witness.is_none()
            && bs5_witness.is_none()
            && covering_ok
            && entropy_ok;
        AxiomReport {
            dim: self.dim,
            size: self.size(),
            bs1_nested,
            bs2_zero,
            bs3_witness,
            bs4_witness,
            bs5_witness,
            covering,
            covering_ok,
            entropy,
            entropy_ok,
            pass,
        }
    }

    /// Regularity of the lambda-dilate at a given deviation kappa:
    /// ratio = |X^lam_1| / |X^lam_{1+kappa}| must sit in 1 ± 10 d |kappa|.
    fn regularity_violation(&self, lambda: f64, kappa: f64) -> f64 {
        let base = self.level_size(lambda) as f64;
        let other = self.level_size(lambda * (1.0 + kappa)) as f64;
        if other == 0.0 {
            return f64::INFINITY;
        }
        let ratio = base / other;
        let width = 10.0 * self.dim * kappa.abs();
        (ratio - (1.0 + width)).max((1.0 - width) - ratio).max(0.0)
    }

    fn kappa_grid(&self, lambda: f64) -> Vec<f64> {
        // a flat family (d = 0) must have constant size near rho = 1
        let kmax = if self.dim > 0.0 {
            1.0 / (10.0 * self.dim)
        } else {
            0.5
        };
        let mut ks = Vec::new();
        for i in 0..41 {
            ks.push(-kmax + 2.0 * kmax * i as f64 / 40.0);
        }
        ks.push(0.0);
        // size jumps exactly where lambda(1+kappa) crosses a stored radius;
        // straddle each nearby jump so step behavior cannot hide between
        // grid points
        let lo = lambda * (1.0 - kmax) - 1e-6;
        let hi = lambda * (1.0 + kmax) + 1e-6;
        for &r in &self.sorted_radii {
            if r < lo {
                continue;
            }
            if r > hi {
                break;
            }
            let k = r / lambda - 1.0;
            for cand in [k - 1e-9, k, k + 1e-9] {
                if cand.abs() <= kmax {
                    ks.push(cand);
                }
            }
        }
        ks
    }

    /// Worst regularity violation of the lambda-dilate over the kappa grid;
    /// 0 means the dilated system is regular (lambda may exceed 1 here, for
    /// probing levels above the unit scale).
    pub fn regularity_violation_at(&self, lambda: f64) -> f64 {
        self.kappa_grid(lambda)
            .iter()
            .map(|&k| self.regularity_violation(lambda, k))
            .fold(0.0, f64::max)
    }

    /// Collapse a family that is constant across the whole tracked domain
    /// (every radius either ~0 or past the top scale) to its exact subgroup
    /// form with dimension 0, discharging certificates inflated by joins.
    pub fn canonical(&self) -> BourgainSystem {
        const SNAP: f64 = 1e-9;
        if self.radii.iter().all(|&r| r <= SNAP || r > RHO_MAX) {
            let elems: Vec<usize> = self
                .group
                .elements()
                .filter(|&x| self.radii[x] <= SNAP)
                .collect();
            if let Ok(h) = Subgroup::from_elements(&self.group, elems) {
                return BourgainSystem::subgroup_system(&h);
            }
        }
        self.clone()
    }

    /// Scan lambda over [1/2, 1] on a 1e-3 grid for a regular dilate.
    pub fn regular_dilate_search(&self) -> Result<RegularityReport, BourgainError> {
        let mut best_lambda = 0.5;
        let mut best_violation = f64::INFINITY;
        for i in 500..=1000 {
            let lambda = i as f64 / 1000.0;
            let ks = self.kappa_grid(lambda);
            let viol = ks
                .iter()
                .map(|&k| self.regularity_violation(lambda, k))
                .fold(0.0, f64::max);
            if viol < best_violation {
                best_violation = viol;
                best_lambda = lambda;
            }
            if viol <= TOL_EQ {
                return Ok(RegularityReport {
                    lambda,
                    max_ratio_violation: viol,
                    kappas_tested: ks.len(),
                });
            }
        }
        Err(BourgainError::NoRegularDilate {
            best_lambda,
            best_violation,
        })
    }

    /// Convenience: search then dilate.
    pub fn regularize(&self) -> Result<(BourgainSystem, RegularityReport), BourgainError> {
        let rep = self.regular_dilate_search()?;
        Ok((self.dilate(rep.lambda)?, rep))
    }

    /// Smoothing density at level rho: the self-convolution of the
    /// normalized level-set indicator. The transform is forced through
    /// `|.|^2`, so its nonnegativity is structural, not numerical.
    pub fn beta_measure(&self, rho: f64) -> Result<SystemMeasure, BourgainError> {
        if !(rho > 0.0 && rho <= 2.0) {
            return Err(BourgainError::RhoOutOfRange(rho));
        }
        let x = self.level_set(rho)?;
        if x.is_empty() {
            return Err(BourgainError::EmptyLevelSet(rho));
        }
        let g = &self.group;
        let scale = g.size() as f64 / x.len() as f64;
        let nu = GroupFunction::indicator(g.clone(), &x).scaled(scale);
        let nu_hat = nu.dft()?;
        let beta_hat_vals: Vec<Complex64> = nu_hat
            .values()
            .iter()
            .map(|v| Complex64::new(v.norm_sqr(), 0.0))
            .collect();
        let beta_hat = GroupFunction::new(g.clone(), beta_hat_vals, Domain::Dual)?;
        let mut beta = beta_hat.idft()?;
        for (i, v) in beta.values_mut().iter_mut().enumerate() {
            // support lives in X_{2rho}; shave transform residue elsewhere
            if !self.member(2.0 * rho, i) || v.re < PSD_TOL {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v = Complex64::new(v.re, 0.0);
            }
        }
        Ok(SystemMeasure {
            rho,
            beta,
            beta_hat,
        })
    }

    /// `psi f = f * beta_1`.
    pub fn psi_apply(&self, f: &GroupFunction) -> Result<GroupFunction, BourgainError> {
        let b1 = self.beta_measure(1.0)?;
        Ok(f.convolve(&b1.beta)?)
    }

    /// Invariance of the smoothing under shifts from a deep level set:
    /// for y in X_kappa,
    ///   E_x |beta_1(x+y) - beta_1(x)|        <= 20 d kappa
    ///   |psi f(x+y) - psi f(x)|              <= 20 d kappa ||f||_inf
    ///   |1 - gamma(y)| for gamma in Spec_delta(beta_1) <= 20 d kappa / delta
    pub fn invariance_checks(
        &self,
        kappa: f64,
        f: Option<&GroupFunction>,
        deltas: &[f64],
    ) -> Result<InvarianceReport, BourgainError> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(BourgainError::BadParameter("kappa must be in (0,1)".into()));
        }
        let g = &self.group;
        let b1 = self.beta_measure(1.0)?;
        let shifts = self.level_set(kappa)?;
        let n = g.size();

        let measure_bound = 20.0 * self.dim * kappa;
        let mut measure_max = 0.0f64;
        for &y in &shifts {
            let mut acc = 0.0;
            for x in g.elements() {
                acc += (b1.beta.values()[g.add(x, y)].re - b1.beta.values()[x].re).abs();
            }
            measure_max = measure_max.max(acc / n as f64);
        }

        let (psi_bound, psi_max) = match f {
            Some(f) => {
                let pf = self.psi_apply(f)?;
                let mut m = 0.0f64;
                for &y in &shifts {
                    for x in g.elements() {
                        m = m.max((pf.values()[g.add(x, y)] - pf.values()[x]).norm());
                    }
                }
                (Some(measure_bound * f.norm_inf()), Some(m))
            }
            None => (None, None),
        };

        // ||beta_1||_1 = 1, so the large spectrum thresholds directly
        let mut spec_checks = Vec::new();
        for &delta in deltas {
            let sp = spec_of_dual(&b1.beta_hat, delta, 1.0)
                .map_err(|_| BourgainError::BadParameter("bad delta".into()))?;
            let mut worst = 0.0f64;
            for &gamma in &sp.members {
                for &y in &shifts {
                    worst = worst.max(g.char_distance(gamma, y));
                }
            }
            spec_checks.push(SpecInvariance {
                delta,
                bound: 20.0 * kappa * self.dim / delta,
                max_char_distance: worst,
            });
        }

        let pass = measure_max <= measure_bound + TOL_EQ
            && psi_max.unwrap_or(0.0) <= psi_bound.unwrap_or(f64::INFINITY) + TOL_EQ
            && spec_checks
                .iter()
                .all(|c| c.max_char_distance <= c.bound + TOL_EQ);
        Ok(InvarianceReport {
            kappa,
            measure_bound,
            measure_max,
            psi_bound,
            psi_max,
            spec_checks,
            pass,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverCheck {
    pub rho: f64,
    pub count: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub dim: f64,
    pub size: usize,
    pub bs1_nested: bool,
    pub bs2_zero: bool,
    pub bs3_witness: Option<usize>,
    pub bs4_witness: Option<(usize, usize)>,
    pub bs5_witness: Option<f64>,
    pub covering: Vec<CoverCheck>,
    pub covering_ok: bool,
    pub entropy: Vec<CoverCheck>,
    pub entropy_ok: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub lambda: f64,
    pub max_ratio_violation: f64,
    pub kappas_tested: usize,
}

/// beta_rho with its transform; E_x beta = 1, beta >= 0, transform >= 0.
#[derive(Clone, Debug)]
pub struct SystemMeasure {
    pub rho: f64,
    pub beta: GroupFunction,
    pub beta_hat: GroupFunction,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecInvariance {
    pub delta: f64,
    pub bound: f64,
    pub max_char_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub kappa: f64,
    pub measure_bound: f64,
    pub measure_max: f64,
    pub psi_bound: Option<f64>,
    pub psi_max: Option<f64>,
    pub spec_checks: Vec<SpecInvariance>,
    pub pass: bool,
}
