//! Fourier-combinatorial primitives: algebra norm, large spectrum, integer
//! rounding, dissociated sets, Chang covers, Riesz products, additive energy.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::group::{Domain, Group, GroupError, GroupFunction, TOL_EQ};

/// Default cap on dissociativity / span enumeration (cost 3^|A|).
pub const DEFAULT_DISSOCIATION_CAP: usize = 16;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("some value sits within {0} of the half-integer boundary; rounding is ambiguous")]
    AmbiguousRounding(f64),
    #[error("set size {got} exceeds the enumeration cap {cap}")]
    CapExceeded { got: usize, cap: usize },
    #[error("base points are not dissociated")]
    NotDissociated,
    #[error("spectrum threshold must lie in (0, 1]")]
    BadThreshold,
}

/// `||f||_A = sum_gamma |f^(gamma)|`.
pub fn algebra_norm(f: &GroupFunction) -> Result<f64, SpectralError> {
    Ok(f.dft()?.norm(1.0))
}

/// The large spectrum `Spec_rho(f)`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSet {
    pub rho: f64,
    pub base_norm: f64,
    pub members: Vec<usize>,
}

impl SpectrumSet {
    pub fn contains(&self, gamma: usize) -> bool {
        self.members.binary_search(&gamma).is_ok()
    }
}

/// `Spec_rho(f) = { gamma : |f^(gamma)| >= rho ||f||_1 }`.
pub fn spec(f: &GroupFunction, rho: f64) -> Result<SpectrumSet, SpectralError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(SpectralError::BadThreshold);
    }
    let base_norm = f.norm(1.0);
    let fh = f.dft()?;
    spec_of_dual(&fh, rho, base_norm)
}

/// Spectrum from an already-computed transform, against a supplied L1 norm.
pub fn spec_of_dual(
    fh: &GroupFunction,
    rho: f64,
    base_norm: f64,
) -> Result<SpectrumSet, SpectralError> {
    let threshold = rho * base_norm;
    let members: Vec<usize> = fh
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() >= threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(SpectrumSet {
        rho,
        base_norm,
        members,
    })
}

/// Nearest-integer rounding `f_Z` with the max-norm distance `d(f, Z)`.
#[derive(Clone, Debug)]
pub struct RoundingReport {
    pub rounded: GroupFunction,
    pub distance: f64,
}

pub fn round_to_integers(f: &GroupFunction) -> Result<RoundingReport, SpectralError> {
    let mut distance = 0.0f64;
    let mut vals = Vec::with_capacity(f.values().len());
    for v in f.values() {
        let r = v.re.round();
        let d = (v.re - r).abs().max(v.im.abs());
        if d >= 0.5 - 1e-12 {
            return Err(SpectralError::AmbiguousRounding(d));
        }
        distance = distance.max(d);
        vals.push(Complex64::new(r, 0.0));
    }
    let rounded = GroupFunction::new(f.group().clone(), vals, f.domain())?;
    Ok(RoundingReport { rounded, distance })
}

/// Integer distance `d(f, Z)` without producing the rounded function.
pub fn integer_distance(f: &GroupFunction) -> f64 {
    f.values()
        .iter()
        .map(|v| (v.re - v.re.round()).abs().max(v.im.abs()))
        .fold(0.0, f64::max)
}

/// Verdict of a dissociativity check; `witness` is a nontrivial vanishing
/// sign pattern when the set is not dissociated.
#[derive(Clone, Debug)]
pub struct DissociationVerdict {
    pub dissociated: bool,
    pub witness: Option<Vec<i8>>,
}

fn check_cap(len: usize, cap: usize) -> Result<(), SpectralError> {
    if len > cap {
        Err(SpectralError::CapExceeded { got: len, cap })
    } else {
        Ok(())
    }
}

/// Enumerate all `{-1,0,1}` sign patterns over `a`, calling `visit` with the
/// pattern and the resulting group sum.
pub(crate) fn for_each_combination(
    group: &Group,
    a: &[usize],
    mut visit: impl FnMut(&[i8], usize) -> bool,
) {
    let m = a.len();
    let mut eps = vec![0i8; m];
    let total = 3usize.pow(m as u32);
    for code in 0..total {
        let mut c = code;
        let mut sum = 0usize;
        for i in 0..m {
            let e = (c % 3) as i8 - 1;
            c /= 3;
            eps[i] = e;
            match e {
                1 => sum = group.add(sum, a[i]),
                -1 => sum = group.sub(sum, a[i]),
                _ => {}
            }
        }
        if !visit(&eps, sum) {
            return;
        }
    }
}

/// True iff no nontrivial `{-1,0,1}`-combination of `a` vanishes.
pub fn is_dissociated(
    group: &Group,
    a: &[usize],
    cap: usize,
) -> Result<DissociationVerdict, SpectralError> {
    check_cap(a.len(), cap)?;
    let mut verdict = DissociationVerdict {
        dissociated: true,
        witness: None,
    };
    for_each_combination(group, a, |eps, sum| {
        if sum == 0 && eps.iter().any(|&e| e != 0) {
            verdict.dissociated = false;
            verdict.witness = Some(eps.to_vec());
            false
        } else {
            true
        }
    });
    Ok(verdict)
}

/// The eps-span `<A> = { sum eps_i a_i : eps_i in {-1,0,1} }` (contains 0).
pub fn span(group: &Group, a: &[usize], cap: usize) -> Result<Vec<usize>, SpectralError> {
    check_cap(a.len(), cap)?;
    let mut in_span = vec![false; group.size()];
    for_each_combination(group, a, |_, sum| {
        in_span[sum] = true;
        true
    });
    Ok((0..group.size()).filter(|&i| in_span[i]).collect())
}

/// A greedy Chang cover: a dissociated `Lambda` inside `Gamma` whose span
/// contains `Gamma`.
#[derive(Clone, Debug)]
pub struct ChangCover {
    pub lambda: Vec<usize>,
    /// Chang's bound `32 K ln(1/alpha)`; exceeding it is reported, not fatal,
    /// since the greedy construction always satisfies the span property.
    pub size_bound: f64,
    pub exceeds_bound: bool,
}

pub fn chang_cover(
    group: &Group,
    gamma_set: &[usize],
    alpha: f64,
    k_doubling: f64,
    cap: usize,
) -> Result<ChangCover, SpectralError> {
    let mut lambda: Vec<usize> = Vec::new();
    let mut in_span = vec![false; group.size()];
    in_span[0] = true;
    let mut sorted = gamma_set.to_vec();
    sorted.sort_unstable();
    for &g in &sorted {
        if in_span[g] {
            continue;
        }
        lambda.push(g);
        check_cap(lambda.len(), cap)?;
        // rebuild span; greedy adjoin keeps Lambda dissociated
        in_span.iter_mut().for_each(|b| *b = false);
        for_each_combination(group, &lambda, |_, sum| {
            in_span[sum] = true;
            true
        });
    }
    let size_bound = 32.0 * k_doubling * (1.0 / alpha).ln();
    let exceeds_bound = (lambda.len() as f64) > size_bound;
    Ok(ChangCover {
        lambda,
        size_bound,
        exceeds_bound,
    })
}

/// A Riesz product over dissociated base points. With the forward transform
/// normalised by `E_x`, the product form lives on the dual side scaled by
/// `1/|G|`, so that `sum_gamma p^ = 1`, `supp(p) in <A>` and `p(a_i) >= 1/2`.
#[derive(Clone, Debug)]
pub struct RieszProduct {
    pub base: Vec<usize>,
    pub p: GroupFunction,
    pub p_hat: GroupFunction,
}

pub fn riesz_product(
    group: &Group,
    a: &[usize],
    cap: usize,
) -> Result<RieszProduct, SpectralError> {
    let verdict = is_dissociated(group, a, cap)?;
    if !verdict.dissociated {
        return Err(SpectralError::NotDissociated);
    }
    let n = group.size() as f64;
    let vals: Vec<Complex64> = group
        .elements()
        .map(|g| {
            let prod: f64 = a
                .iter()
                .map(|&ai| 1.0 + group.char_value(g, ai).re)
                .product();
            Complex64::new(prod / n, 0.0)
        })
        .collect();
    let p_hat = GroupFunction::new(group.clone(), vals, Domain::Dual)?;
    let p = p_hat.idft()?;
    Ok(RieszProduct {
        base: a.to_vec(),
        p,
        p_hat,
    })
}

impl RieszProduct {
    /// Check the standard Riesz-product properties; returns max violation.
    pub fn max_violation(&self, group: &Group, cap: usize) -> Result<f64, SpectralError> {
        let mut viol = 0.0f64;
        for v in self.p_hat.values() {
            viol = viol.max(-v.re).max(v.im.abs());
        }
        let total: f64 = self.p_hat.values().iter().map(|v| v.re).sum();
        viol = viol.max((total - 1.0).abs());
        let sp = span(group, &self.base, cap)?;
        let in_span: Vec<bool> = {
            let mut b = vec![false; group.size()];
            for &s in &sp {
                b[s] = true;
            }
            b
        };
        for (x, v) in self.p.values().iter().enumerate() {
            if !in_span[x] {
                viol = viol.max(v.norm());
            }
        }
        for &ai in &self.base {
            viol = viol.max(0.5 - self.p.values()[ai].re);
        }
        Ok(viol)
    }
}

/// Exact count of additive quadruples `a1 + a2 = a3 + a4` in `A^4`,
/// via an O(|A|^2 + |G|) sum histogram.
pub fn additive_energy(group: &Group, a: &[usize]) -> Result<u64, SpectralError> {
    check_cap(a.len(), 4096)?;
    let mut hist = vec![0u64; group.size()];
    for &x in a {
        for &y in a {
            hist[group.add(x, y)] += 1;
        }
    }
    Ok(hist.iter().map(|&c| c * c).sum())
}

/// Fourier route to the energy: `|G|^3 ||1_A^||_4^4`.
pub fn additive_energy_fourier(group: &Group, a: &[usize]) -> Result<f64, SpectralError> {
    let f = GroupFunction::indicator(group.clone(), a);
    let fh = f.dft()?;
    let n = group.size() as f64;
    Ok(n.powi(3) * fh.norm(4.0).powi(4))
}

/// `||f||_inf <= ||f||_A` sanity helper used in property tests.
pub fn sup_bounded_by_anorm(f: &GroupFunction) -> Result<bool, SpectralError> {
    Ok(f.norm_inf() <= algebra_norm(f)? + TOL_EQ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Subgroup;

    #[test]
    fn anorm_of_coset_indicator_is_one() {
        let g = Group::cyclic(12);
        let h = Subgroup::closure(&g, &[4]).unwrap();
        let f = h.coset_indicator(5);
        assert!((algebra_norm(&f).unwrap() - 1.0).abs() < TOL_EQ);
    }

    #[test]
    fn anorm_of_cosine_is_one() {
        let g = Group::cyclic(8);
        let vals: Vec<f64> = (0..8)
            .map(|x| (2.0 * std::f64::consts::PI * x as f64 / 8.0).cos())
            .collect();
        let f = GroupFunction::from_real(g, &vals, Domain::Primal).unwrap();
        assert!((algebra_norm(&f).unwrap() - 1.0).abs() < TOL_EQ);
    }

    #[test]
    fn anorm_of_two_point_indicator_frozen_constant() {
        // oracle: sum over k of (1/8)|1 + e(-k/8)| = (1/4) sum |cos(pi k/8)|
        let g = Group::cyclic(8);
        let f = GroupFunction::indicator(g.clone(), &[0, 1]);
        let a = algebra_norm(&f).unwrap();
        // naive-DFT + absolute-sum oracle
        let mut oracle = 0.0;
        for k in 0..8 {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in [0usize, 1] {
                acc += g.char_value(k, x).conj();
            }
            oracle += (acc / 8.0).norm();
        }
        assert!((a - oracle).abs() < TOL_EQ);
        assert!((a - 1.2568348730314621).abs() < 1e-9);
    }

    #[test]
    fn spec_of_subgroup_indicator_is_annihilator() {
        let g = Group::cyclic(12);
        let h = Subgroup::closure(&g, &[3]).unwrap();
        let f = h.coset_indicator(0);
        let s = spec(&f, 0.5).unwrap();
        assert_eq!(s.members, h.annihilator().elements());
    }

    #[test]
    fn spec_monotone_in_rho() {
        let g = Group::cyclic(12);
        let f = GroupFunction::indicator(g, &[0, 1, 2]);
        let lo = spec(&f, 0.25).unwrap();
        let hi = spec(&f, 0.5).unwrap();
        assert!(hi.members.iter().all(|m| lo.contains(*m)));
        // cross-check against direct enumeration
        let fh = f.dft().unwrap();
        let l1 = f.norm(1.0);
        let direct: Vec<usize> = (0..12)
            .filter(|&k| fh.values()[k].norm() >= 0.25 * l1)
            .collect();
        assert_eq!(lo.members, direct);
    }

    #[test]
    fn rounding_reports() {
        let g = Group::cyclic(4);
        let f = GroupFunction::from_real(g.clone(), &[1.0, -2.0, 0.0, 3.0], Domain::Primal).unwrap();
        let r = round_to_integers(&f).unwrap();
        assert_eq!(r.distance, 0.0);

        let f = GroupFunction::constant(g.clone(), 0.3);
        let r = round_to_integers(&f).unwrap();
        assert!((r.distance - 0.3).abs() < 1e-15);
        assert!(r.rounded.values().iter().all(|v| v.re == 0.0));

        let f = GroupFunction::constant(g, 0.5);
        assert!(matches!(
            round_to_integers(&f),
            Err(SpectralError::AmbiguousRounding(_))
        ));
    }

    #[test]
    fn rounding_recovers_perturbed_indicator() {
        let g = Group::cyclic(12);
        let h = Subgroup::closure(&g, &[4]).unwrap();
        let base = h.coset_indicator(0);
        let mut vals: Vec<f64> = base.values().iter().map(|v| v.re).collect();
        for (i, v) in vals.iter_mut().enumerate() {
            *v += 0.01 * ((i as f64 * 2.3).sin());
        }
        let f = GroupFunction::from_real(g, &vals, Domain::Primal).unwrap();
        let r = round_to_integers(&f).unwrap();
        assert!(r.distance <= 0.01);
        for (a, b) in r.rounded.values().iter().zip(base.values()) {
            assert_eq!(a.re, b.re);
        }
    }

    #[test]
    fn dissociation_small_cases() {
        let g = Group::cyclic(16);
        assert!(is_dissociated(&g, &[1], 16).unwrap().dissociated);
        let v = is_dissociated(&g, &[1, 2, 3], 16).unwrap();
        assert!(!v.dissociated);
        let w = v.witness.unwrap();
        // witness replays to zero
        let mut sum = 0usize;
        for (i, &a) in [1usize, 2, 3].iter().enumerate() {
            match w[i] {
                1 => sum = g.add(sum, a),
                -1 => sum = g.sub(sum, a),
                _ => {}
            }
        }
        assert_eq!(sum, 0);
        assert!(is_dissociated(&g, &[1, 2, 4], 16).unwrap().dissociated);
    }

    #[test]
    fn dissociation_cap() {
        let g = Group::cyclic(4);
        let too_big = vec![1usize; 17];
        assert!(matches!(
            is_dissociated(&g, &too_big, 16),
            Err(SpectralError::CapExceeded { .. })
        ));
    }

    #[test]
    fn span_examples() {
        let g = Group::cyclic(9);
        assert_eq!(span(&g, &[], 16).unwrap(), vec![0]);
        assert_eq!(span(&g, &[3], 16).unwrap(), vec![0, 3, 6]);
        let g = Group::cyclic(10);
        assert_eq!(span(&g, &[1, 4], 16).unwrap(), vec![0, 1, 3, 4, 5, 6, 7, 9]);
    }

    #[test]
    fn chang_cover_examples() {
        let g = Group::cyclic(16);
        let c = chang_cover(&g, &[5], 0.5, 1.0, 16).unwrap();
        assert_eq!(c.lambda, vec![5]);

        // {g1, g2, g1+g2}: third element lands in the span
        let c = chang_cover(&g, &[1, 2, 3], 0.5, 1.0, 16).unwrap();
        assert_eq!(c.lambda, vec![1, 2]);
        let sp = span(&g, &c.lambda, 16).unwrap();
        assert!([1usize, 2, 3].iter().all(|x| sp.contains(x)));
    }

    #[test]
    fn chang_cover_of_annihilator() {
        let g = Group::new(vec![2, 8]).unwrap();
        let h = Subgroup::closure(&g, &[g.index(&[1, 0])]).unwrap();
        let gamma: Vec<usize> = h.annihilator().elements().to_vec();
        let c = chang_cover(&g, &gamma, 0.5, 1.0, 16).unwrap();
        let sp = span(&g, &c.lambda, 16).unwrap();
        assert!(gamma.iter().all(|x| sp.contains(x)));
        assert!(c.lambda.len() as f64 <= (h.annihilator().order() as f64).log2() + 1e-9);
        assert!(is_dissociated(&g, &c.lambda, 16).unwrap().dissociated);
    }

    #[test]
    fn riesz_product_empty_base() {
        let g = Group::cyclic(6);
        let r = riesz_product(&g, &[], 16).unwrap();
        assert!(r.max_violation(&g, 16).unwrap() < TOL_EQ);
        // p is the indicator of {0}; p_hat is flat 1/|G|
        assert!((r.p.values()[0].re - 1.0).abs() < TOL_EQ);
        for x in 1..6 {
            assert!(r.p.values()[x].norm() < TOL_EQ);
        }
    }

    #[test]
    fn riesz_product_single_point_matches_expansion_oracle() {
        let g = Group::cyclic(8);
        let r = riesz_product(&g, &[1], 16).unwrap();
        for k in 0..8 {
            let expect = (1.0 + (2.0 * std::f64::consts::PI * k as f64 / 8.0).cos()) / 8.0;
            assert!((r.p_hat.values()[k].re - expect).abs() < TOL_EQ);
        }
        // eps-expansion oracle: p(x) = sum over eps with -sum(eps a) = x of 2^{-|eps|}
        let mut oracle = vec![0.0f64; 8];
        for eps in [-1i8, 0, 1] {
            let x = match eps {
                1 => g.neg(1),
                -1 => 1,
                _ => 0,
            };
            oracle[x] += 0.5f64.powi(eps.abs() as i32);
        }
        for x in 0..8 {
            assert!((r.p.values()[x].re - oracle[x]).abs() < TOL_EQ);
        }
        assert!(r.max_violation(&g, 16).unwrap() < TOL_EQ);
    }

    #[test]
    fn riesz_product_two_points() {
        let g = Group::cyclic(10);
        let r = riesz_product(&g, &[1, 4], 16).unwrap();
        assert!(r.max_violation(&g, 16).unwrap() < TOL_EQ);
    }

    #[test]
    fn riesz_rejects_non_dissociated() {
        let g = Group::cyclic(16);
        assert!(matches!(
            riesz_product(&g, &[1, 2, 3], 16),
            Err(SpectralError::NotDissociated)
        ));
    }

    #[test]
    fn energy_examples() {
        let g = Group::cyclic(8);
        assert_eq!(additive_energy(&g, &[0]).unwrap(), 1);
        let h = Subgroup::closure(&g, &[2]).unwrap();
        assert_eq!(
            additive_energy(&g, h.elements()).unwrap(),
            (h.order() as u64).pow(3)
        );
        // {0,1,2}: enumeration of all 81 tuples gives 19
        let mut count = 0u64;
        let a = [0usize, 1, 2];
        for &x in &a {
            for &y in &a {
                for &z in &a {
                    for &w in &a {
                        if g.add(x, y) == g.add(z, w) {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 19);
        assert_eq!(additive_energy(&g, &a).unwrap(), 19);
    }

    #[test]
    fn energy_matches_fourier_identity() {
        let g = Group::cyclic(24);
        let a = [0usize, 1, 5, 11, 13];
        let direct = additive_energy(&g, &a).unwrap() as f64;
        let fourier = additive_energy_fourier(&g, &a).unwrap();
        assert!((direct - fourier).abs() / direct < 1e-6);
    }

    #[test]
    fn doubling_energy_lower_bound() {
        // if |A+A| <= K|A| then ||1_A^||_4^4 >= alpha^3 / K
        let g = Group::cyclic(64);
        let a: Vec<usize> = (0..9).collect();
        let mut sums = vec![false; 64];
        for &x in &a {
            for &y in &a {
                sums[g.add(x, y)] = true;
            }
        }
        let k = sums.iter().filter(|&&b| b).count() as f64 / a.len() as f64;
        let alpha = a.len() as f64 / 64.0;
        let f4 = GroupFunction::indicator(g.clone(), &a)
            .dft()
            .unwrap()
            .norm(4.0)
            .powi(4);
        assert!(f4 >= alpha.powi(3) / k - TOL_EQ);
    }
}
