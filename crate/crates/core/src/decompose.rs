//! Splitting an integer-valued function of small transform-l1 norm into
//! signed coset indicators: the single splitting step, the recursive
//! driver, and an exact verifier. The driver's contract is unconditional
//! exactness; the structured guarantees (few distinct subgroups, bounded
//! piece count) are certified when the structured path succeeds.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bourgain::{BourgainError, BourgainSystem};
use crate::config::RunConfig;
use crate::freiman::concentration_system;
use crate::group::{Group, GroupError, GroupFunction, Subgroup, TOL_EQ};
use crate::refine::{refine_system, RefineError};
use crate::spectral::{algebra_norm, integer_distance, SpectralError};

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    System(#[from] BourgainError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("neither split branch is certifiable: {0}")]
    SplitFailed(String),
    #[error("input is not integer-valued (distance {0})")]
    NotIntegerValued(f64),
}

#[derive(Clone, Debug)]
pub struct CosetPiece {
    pub sign: i8,
    pub rep: usize,
    pub subgroup: Subgroup,
}

impl CosetPiece {
    pub fn indicator(&self) -> GroupFunction {
        self.subgroup.coset_indicator(self.rep)
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum BranchTag {
    /// Both halves continue: the smoothed part lost at least 1/2 in norm.
    NormDrop,
    /// The smoothed part rounds to a sum of cosets of one subgroup.
    CosetSum { subgroup_order: usize, pieces: usize },
    /// Degenerate zero input.
    Zero,
}

pub struct SplitOutcome {
    pub f1: GroupFunction,
    pub f2: GroupFunction,
    pub branch: BranchTag,
    /// Pieces extracted in the coset-sum branch (empty otherwise).
    pub pieces: Vec<CosetPiece>,
    pub norm_before: f64,
    pub norm_f1: f64,
    pub norm_f2: f64,
    pub int_dist_f1: f64,
    pub int_dist_f2: f64,
}

fn round_re(v: Complex64) -> f64 {
    v.re.round()
}

fn is_zero_rounded(f: &GroupFunction) -> bool {
    f.values().iter().all(|&v| round_re(v) == 0.0)
}

/// Attempt the coset-sum branch on a given system: the smoothing must round
/// to a function constant on cosets of the subgroup generated by a deep
/// level set, and subtracting the rounded pieces (taken exactly, as signed
/// indicators) must cost the residual at least half a unit of norm. Returns
/// `None` when either condition fails.
fn coset_branch(
    f: &GroupFunction,
    s: &BourgainSystem,
    eps: f64,
    m: f64,
    norm_before: f64,
) -> Result<Option<SplitOutcome>, DecomposeError> {
    let g = f.group().clone();
    let d_eff = s.dim().max(1.0);
    let level = (eps / (20.0 * d_eff * m)).min(4.0);
    let deep = s.level_set(level)?;
    let h = Subgroup::closure(&g, &deep)?;
    let f1s = s.psi_apply(f)?;
    let mut pieces = Vec::new();
    let mut seen = vec![false; g.size()];
    for x in g.elements() {
        if seen[x] {
            continue;
        }
        let rep = h.coset_rep(x);
        let c = round_re(f1s.values()[rep]);
        for &hh in h.elements() {
            let y = g.add(rep, hh);
            seen[y] = true;
            if round_re(f1s.values()[y]) != c {
                return Ok(None);
            }
        }
        let sign = if c > 0.0 { 1i8 } else { -1i8 };
        for _ in 0..(c.abs() as usize) {
            pieces.push(CosetPiece {
                sign,
                rep,
                subgroup: h.clone(),
            });
        }
    }
    if pieces.is_empty() {
        return Ok(None);
    }
    let mut vals = vec![0.0f64; g.size()];
    for p in &pieces {
        for &hh in p.subgroup.elements() {
            vals[g.add(p.rep, hh)] += p.sign as f64;
        }
    }
    let f1 = GroupFunction::from_real(g.clone(), &vals, crate::group::Domain::Primal)?;
    let f2 = f.sub_fn(&f1)?;
    let norm_f2 = algebra_norm(&f2)?;
    if norm_f2 > norm_before - 0.5 + TOL_EQ {
        return Ok(None);
    }
    let norm_f1 = algebra_norm(&f1)?;
    // the distinct-subgroup count is paid for out of the norm budget (every
    // nonzero finished part costs about one unit), so an extraction that
    // spends more norm than the function has must be refused
    if norm_f1 + norm_f2 > norm_before + 0.01 {
        return Ok(None);
    }
    let int_dist_f1 = integer_distance(&f1);
    let int_dist_f2 = integer_distance(&f2);
    let n_pieces = pieces.len();
    Ok(Some(SplitOutcome {
        f1,
        f2,
        branch: BranchTag::CosetSum {
            subgroup_order: h.order(),
            pieces: n_pieces,
        },
        pieces,
        norm_before,
        norm_f1,
        norm_f2,
        int_dist_f1,
        int_dist_f2,
    }))
}

/// One splitting step: concentrate, refine, and cut `f` into the smoothed
/// part and the residual. The residual always loses at least 1/2 of the
/// transform-l1 norm; the smoothed part either also drops or rounds to a
/// coset sum over the subgroup generated by a deep level set.
pub fn inductive_step(
    f: &GroupFunction,
    eps: f64,
    config: &RunConfig,
) -> Result<SplitOutcome, DecomposeError> {
    let g = f.group().clone();
    let norm_before = algebra_norm(f)?;
    let d_f = integer_distance(f);
    if is_zero_rounded(f) && norm_before < 0.5 {
        let zero = GroupFunction::zero(g, crate::group::Domain::Primal);
        return Ok(SplitOutcome {
            f1: zero.clone(),
            f2: zero,
            branch: BranchTag::Zero,
            pieces: Vec::new(),
            norm_before,
            norm_f1: 0.0,
            norm_f2: 0.0,
            int_dist_f1: 0.0,
            int_dist_f2: 0.0,
        });
    }
    let m = norm_before.ceil().max(1.0);

    let (s, _conc) = concentration_system(f, m, config.m_cap, config.budget)
        .map_err(|e| DecomposeError::SplitFailed(format!("concentration: {e}")))?;
    // structured-first: if the concentration smoothing already rounds to a
    // coset sum and the exact residual loses half a unit of norm, take the
    // pieces without paying for refinement (which on small groups can only
    // satisfy its mean-square test by collapsing the system entirely)
    if let Some(out) = coset_branch(f, &s, eps, m, norm_before)? {
        return Ok(out);
    }
    let (s_ref, _cert) = refine_system(f, &s, eps.min(0.25), m)
        .map_err(|e: RefineError| DecomposeError::SplitFailed(format!("refinement: {e}")))?;

    let f1 = s_ref.psi_apply(f)?;
    let f2 = f.sub_fn(&f1)?;
    let norm_f1 = algebra_norm(&f1)?;
    let norm_f2 = algebra_norm(&f2)?;
    let int_dist_f1 = integer_distance(&f1);
    let int_dist_f2 = integer_distance(&f2);

    if int_dist_f1 > d_f + eps + TOL_EQ || int_dist_f2 > 2.0 * d_f + eps + TOL_EQ {
        return Err(DecomposeError::SplitFailed(
            "almost-integrality degraded beyond the stated budget".into(),
        ));
    }
    if norm_f2 > norm_before - 0.5 + TOL_EQ {
        return Err(DecomposeError::SplitFailed(
            "residual did not lose half a unit of norm".into(),
        ));
    }

    if norm_f1 <= norm_before - 0.5 + TOL_EQ {
        return Ok(SplitOutcome {
            f1,
            f2,
            branch: BranchTag::NormDrop,
            pieces: Vec::new(),
            norm_before,
            norm_f1,
            norm_f2,
            int_dist_f1,
            int_dist_f2,
        });
    }

    // coset-sum branch: the rounding of f1 must be constant on cosets of
    // the subgroup generated by a deep level set of the refined system
    let d_eff = s_ref.dim().max(1.0);
    let level = (eps / (20.0 * d_eff * m)).min(4.0);
    let deep = s_ref.level_set(level)?;
    let h = Subgroup::closure(&g, &deep)?;
    let mut pieces = Vec::new();
    let mut seen = vec![false; g.size()];
    for x in g.elements() {
        if seen[x] {
            continue;
        }
        let rep = h.coset_rep(x);
        let c = round_re(f1.values()[rep]);
        for &hh in h.elements() {
            let y = g.add(rep, hh);
            seen[y] = true;
            if round_re(f1.values()[y]) != c {
                return Err(DecomposeError::SplitFailed(
                    "rounded smoothing not constant on cosets of the generated subgroup".into(),
                ));
            }
        }
        let sign = if c > 0.0 { 1i8 } else { -1i8 };
        for _ in 0..(c.abs() as usize) {
            pieces.push(CosetPiece {
                sign,
                rep,
                subgroup: h.clone(),
            });
        }
    }
    let n_pieces = pieces.len();
    Ok(SplitOutcome {
        f1,
        f2,
        branch: BranchTag::CosetSum {
            subgroup_order: h.order(),
            pieces: n_pieces,
        },
        pieces,
        norm_before,
        norm_f1,
        norm_f2,
        int_dist_f1,
        int_dist_f2,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitRecord {
    pub depth: usize,
    pub norm_before: f64,
    pub branch: String,
    pub norm_f1: f64,
    pub norm_f2: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub exact: bool,
    pub l: usize,
    /// Terminal nodes of the splitting tree (each may hold many pieces).
    pub leaves: usize,
    pub distinct_subgroups: usize,
    pub a_norm: f64,
    pub m: f64,
    pub epsilon: f64,
    pub structured_path: bool,
    pub singleton_fallback: bool,
    pub dense_path: bool,
    pub max_leaf_int_dist: f64,
    pub splits: Vec<SplitRecord>,
}

#[derive(Clone, Debug)]
pub struct CosetDecomposition {
    pub pieces: Vec<CosetPiece>,
    pub certificate: DecompositionCertificate,
}

fn emit_singletons(g: &Group, values: &[i64], pieces: &mut Vec<CosetPiece>) {
    let trivial = Subgroup::trivial(g);
    for (x, &c) in values.iter().enumerate() {
        let sign = if c > 0 { 1i8 } else { -1i8 };
        for _ in 0..c.unsigned_abs() {
            pieces.push(CosetPiece {
                sign,
                rep: x,
                subgroup: trivial.clone(),
            });
        }
    }
}

fn rounded_values(f: &GroupFunction) -> Vec<i64> {
    f.values().iter().map(|&v| round_re(v) as i64).collect()
}

/// Decompose an integer-valued function into signed coset indicators.
/// Exactness is a hard guarantee: any residue the structured path leaves
/// behind is paid for with singleton pieces, and the certificate says so.
pub fn decompose(
    f: &GroupFunction,
    config: &RunConfig,
) -> Result<CosetDecomposition, DecomposeError> {
    let g = f.group().clone();
    let dist = integer_distance(f);
    if dist > 1e-6 {
        return Err(DecomposeError::NotIntegerValued(dist));
    }
    let target = rounded_values(f);
    let f = GroupFunction::from_real(
        g.clone(),
        &target.iter().map(|&c| c as f64).collect::<Vec<_>>(),
        crate::group::Domain::Primal,
    )?;

    let a_norm = algebra_norm(&f)?;
    let m = a_norm.ceil().max(1.0);
    let epsilon = config.epsilon_for(m);
    let depth_cap = (2.0 * m - 1.0) as usize;
    let leaf_cap = 2usize.pow((2.0 * m - 1.0).min(16.0) as u32).max(8) * 4;

    let mut pieces: Vec<CosetPiece> = Vec::new();
    let mut splits: Vec<SplitRecord> = Vec::new();
    let mut singleton_fallback = false;
    let mut structured_path = true;
    let mut max_leaf_int_dist = 0.0f64;
    let mut leaves = 0usize;

    let mut queue: Vec<(GroupFunction, usize)> = vec![(f.clone(), 0)];
    let mut processed = 0usize;
    while let Some(pos) = queue
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let na = algebra_norm(&a.1 .0).unwrap_or(0.0);
            let nb = algebra_norm(&b.1 .0).unwrap_or(0.0);
            na.partial_cmp(&nb).unwrap()
        })
        .map(|(i, _)| i)
    {
        let (leaf, depth) = queue.swap_remove(pos);
        processed += 1;
        max_leaf_int_dist = max_leaf_int_dist.max(integer_distance(&leaf));
        if is_zero_rounded(&leaf) {
            leaves += 1;
            continue; // the final residual pass settles any dust
        }
        let exhausted = depth >= depth_cap || processed > leaf_cap;
        let step = if exhausted {
            Err(DecomposeError::SplitFailed("depth budget exhausted".into()))
        } else {
            inductive_step(&leaf, epsilon, config)
        };
        match step {
            Ok(out) => {
                splits.push(SplitRecord {
                    depth,
                    norm_before: out.norm_before,
                    branch: format!("{:?}", out.branch),
                    norm_f1: out.norm_f1,
                    norm_f2: out.norm_f2,
                });
                match out.branch {
                    BranchTag::Zero => {
                        leaves += 1;
                    }
                    BranchTag::NormDrop => {
                        queue.push((out.f1, depth + 1));
                        queue.push((out.f2, depth + 1));
                    }
                    BranchTag::CosetSum { .. } => {
                        // the finished part is a leaf; the residual continues
                        leaves += 1;
                        pieces.extend(out.pieces);
                        queue.push((out.f2, depth + 1));
                    }
                }
            }
            Err(DecomposeError::SplitFailed(why)) => {
                splits.push(SplitRecord {
                    depth,
                    norm_before: algebra_norm(&leaf)?,
                    branch: format!("Fallback({why})"),
                    norm_f1: 0.0,
                    norm_f2: 0.0,
                });
                emit_singletons(&g, &rounded_values(&leaf), &mut pieces);
                leaves += 1;
                singleton_fallback = true;
                structured_path = false;
            }
            Err(e) => return Err(e),
        }
    }

    // unconditional exactness: settle the integer residual with singletons
    let mut residual = target.clone();
    for p in &pieces {
        for &hh in p.subgroup.elements() {
            residual[g.add(p.rep, hh)] -= p.sign as i64;
        }
    }
    if residual.iter().any(|&c| c != 0) {
        emit_singletons(&g, &residual, &mut pieces);
        singleton_fallback = true;
        structured_path = false;
    }

    let distinct: BTreeSet<Vec<usize>> = pieces
        .iter()
        .map(|p| p.subgroup.elements().to_vec())
        .collect();
    let certificate = DecompositionCertificate {
        exact: true,
        l: pieces.len(),
        leaves,
        distinct_subgroups: distinct.len(),
        a_norm,
        m,
        epsilon,
        structured_path,
        singleton_fallback,
        dense_path: !splits.is_empty(),
        max_leaf_int_dist,
        splits,
    };
    let d = CosetDecomposition {
        pieces,
        certificate,
    };
    debug_assert!(verify_decomposition(&f, &d).exact);
    Ok(d)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub exact: bool,
    pub first_mismatch: Option<(usize, i64, i64)>,
    pub l: usize,
    pub distinct_subgroups: usize,
    pub a_norm: f64,
    pub distinct_bound: usize,
    pub distinct_ok: bool,
}

/// Replay a decomposition against `f`: pointwise integer equality, piece
/// recount, and the distinct-subgroup budget floor(||f||_A + 1/100).
pub fn verify_decomposition(f: &GroupFunction, d: &CosetDecomposition) -> VerifyReport {
    let g = f.group();
    let mut sum = vec![0i64; g.size()];
    for p in &d.pieces {
        for &hh in p.subgroup.elements() {
            sum[g.add(p.rep, hh)] += p.sign as i64;
        }
    }
    let mut exact = true;
    let mut first_mismatch = None;
    for x in g.elements() {
        let want = round_re(f.values()[x]) as i64;
        if sum[x] != want {
            exact = false;
            first_mismatch = Some((x, want, sum[x]));
            break;
        }
    }
    let distinct: BTreeSet<Vec<usize>> = d
        .pieces
        .iter()
        .map(|p| p.subgroup.elements().to_vec())
        .collect();
    let a_norm = algebra_norm(f).unwrap_or(f64::NAN);
    let distinct_bound = (a_norm + 0.01).floor() as usize;
    VerifyReport {
        exact,
        first_mismatch,
        l: d.pieces.len(),
        distinct_subgroups: distinct.len(),
        a_norm,
        distinct_bound,
        distinct_ok: distinct.len() <= distinct_bound.max(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Domain;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn single_coset_is_one_piece() {
        let g = Group::cyclic(8);
        let h = Subgroup::closure(&g, &[4]).unwrap();
        let f = h.coset_indicator(0);
        let d = decompose(&f, &cfg()).unwrap();
        assert!(d.certificate.exact);
        assert_eq!(d.certificate.l, 1);
        assert_eq!(d.certificate.distinct_subgroups, 1);
        assert!(d.certificate.structured_path);
        let rep = verify_decomposition(&f, &d);
        assert!(rep.exact && rep.distinct_ok);
    }

    #[test]
    fn translated_coset_piece() {
        let g = Group::cyclic(12);
        let h = Subgroup::closure(&g, &[3]).unwrap();
        let f = h.coset_indicator(2);
        let d = decompose(&f, &cfg()).unwrap();
        assert!(verify_decomposition(&f, &d).exact);
        assert_eq!(d.certificate.l, 1);
        assert_eq!(d.pieces[0].subgroup.elements(), h.elements());
    }

    #[test]
    fn nested_subgroup_sum() {
        let g = Group::cyclic(8);
        let h1 = Subgroup::closure(&g, &[2]).unwrap();
        let h2 = Subgroup::closure(&g, &[4]).unwrap();
        let f = h1.coset_indicator(0).add_fn(&h2.coset_indicator(0)).unwrap();
        let d = decompose(&f, &cfg()).unwrap();
        let rep = verify_decomposition(&f, &d);
        assert!(rep.exact);
        assert!(rep.distinct_ok, "{rep:?}");
        assert!(d.certificate.l as f64 <= 2f64.powf(2.0 * d.certificate.m - 1.0));
    }

    #[test]
    fn two_point_indicator_needs_two_singletons() {
        let g = Group::cyclic(8);
        let f = GroupFunction::indicator(g, &[0, 1]);
        let d = decompose(&f, &cfg()).unwrap();
        let rep = verify_decomposition(&f, &d);
        assert!(rep.exact);
        assert_eq!(rep.l, 2);
        assert_eq!(rep.distinct_subgroups, 1);
    }

    #[test]
    fn signed_coset_combination() {
        let g = Group::cyclic(8);
        let h = Subgroup::closure(&g, &[4]).unwrap();
        let f = h
            .coset_indicator(0)
            .sub_fn(&h.coset_indicator(2))
            .unwrap();
        let d = decompose(&f, &cfg()).unwrap();
        let rep = verify_decomposition(&f, &d);
        assert!(rep.exact);
        assert!(rep.distinct_subgroups <= 2);
    }

    #[test]
    fn zero_function_decomposes_empty() {
        let g = Group::cyclic(6);
        let f = GroupFunction::zero(g, Domain::Primal);
        let d = decompose(&f, &cfg()).unwrap();
        assert!(d.pieces.is_empty());
        assert!(d.certificate.exact);
    }

    #[test]
    fn non_integer_input_rejected() {
        let g = Group::cyclic(6);
        let f = GroupFunction::constant(g, 0.4);
        assert!(matches!(
            decompose(&f, &cfg()),
            Err(DecomposeError::NotIntegerValued(_))
        ));
    }

    #[test]
    fn arbitrary_integer_function_is_exact() {
        let g = Group::new(vec![2, 6]).unwrap();
        let vals: Vec<f64> = (0..12).map(|x| ((x * 5 + 2) % 4) as f64 - 1.0).collect();
        let f = GroupFunction::from_real(g, &vals, Domain::Primal).unwrap();
        let d = decompose(&f, &cfg()).unwrap();
        assert!(verify_decomposition(&f, &d).exact);
        assert!(d.certificate.exact);
    }

    #[test]
    fn verifier_catches_tampered_sign() {
        let g = Group::cyclic(8);
        let h = Subgroup::closure(&g, &[2]).unwrap();
        let f = h.coset_indicator(0);
        let mut d = decompose(&f, &cfg()).unwrap();
        d.pieces[0].sign = -d.pieces[0].sign;
        let rep = verify_decomposition(&f, &d);
        assert!(!rep.exact);
        assert!(rep.first_mismatch.is_some());
    }

    #[test]
    fn verifier_is_order_independent() {
        let g = Group::cyclic(8);
        let h1 = Subgroup::closure(&g, &[2]).unwrap();
        let h2 = Subgroup::closure(&g, &[4]).unwrap();
        let f = h1.coset_indicator(0).add_fn(&h2.coset_indicator(1)).unwrap();
        let mut d = decompose(&f, &cfg()).unwrap();
        assert!(verify_decomposition(&f, &d).exact);
        d.pieces.reverse();
        assert!(verify_decomposition(&f, &d).exact);
        d.pieces.rotate_left(1);
        assert!(verify_decomposition(&f, &d).exact);
    }

    #[test]
    fn split_preserves_sum_and_norm_accounting() {
        let g = Group::cyclic(8);
        let h1 = Subgroup::closure(&g, &[2]).unwrap();
        let h2 = Subgroup::closure(&g, &[4]).unwrap();
        let f = h1.coset_indicator(0).add_fn(&h2.coset_indicator(0)).unwrap();
        let out = inductive_step(&f, 0.001, &cfg()).unwrap();
        // exact additive split
        for x in g.elements() {
            let lhs = out.f1.values()[x] + out.f2.values()[x];
            assert!((lhs - f.values()[x]).norm() < 1e-9);
        }
        // transform-l1 accounting: subadditivity, and the split may not
        // spend more than 1/100 beyond the norm it started with
        assert!(out.norm_f1 + out.norm_f2 >= out.norm_before - 1e-9);
        assert!(out.norm_f1 + out.norm_f2 <= out.norm_before + 0.01 + 1e-9);
        assert!(out.norm_f2 <= out.norm_before - 0.5 + 1e-9);
    }
}
