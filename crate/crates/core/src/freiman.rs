//! Weak structure theory for sets of small doubling, and concentration of
//! an almost-integer function on an approximate-subgroup system: spectrum +
//! dissociated cover -> Bohr system, exhaustive arithmetic-connectedness
//! testing with replayable witnesses, and the quadruple-count lower bound.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bourgain::{BourgainError, BourgainSystem};
use crate::group::{Group, GroupError, GroupFunction, Subgroup, TOL_EQ};
use crate::spectral::{
    additive_energy, chang_cover, for_each_combination, round_to_integers, spec, SpectralError,
};

#[derive(Debug, Error)]
pub enum FreimanError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    System(#[from] BourgainError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("the input set is empty")]
    EmptySet,
    #[error("rounded input is identically zero")]
    ZeroSupport,
    #[error("support is not {m}-connected; refuting subset {subset:?}")]
    NotConnected { m: usize, subset: Vec<usize> },
    #[error("subset enumeration cost {cost} exceeds the budget {budget}")]
    BudgetExceeded { cost: u128, budget: u128 },
}

pub fn sumset(group: &Group, a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut hit = vec![false; group.size()];
    for &x in a {
        for &y in b {
            hit[group.add(x, y)] = true;
        }
    }
    (0..group.size()).filter(|&i| hit[i]).collect()
}

pub fn negated(group: &Group, a: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().map(|&x| group.neg(x)).collect();
    v.sort_unstable();
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct FreimanOutput {
    #[serde(skip)]
    pub system: BourgainSystem,
    pub alpha: f64,
    pub k_doubling: f64,
    pub lambda: f64,
    pub gamma_size: usize,
    pub gamma_bound: f64,
    pub chang_size: usize,
    pub sup_psi: f64,
    pub sup_psi_bound: f64,
    pub containment_ok: bool,
    pub pass: bool,
}

/// Spectrum -> dissociated cover -> Bohr system of width lambda/20k.
/// Postconditions checked: `X_4` sits inside `2A - 2A`, the smoothing of
/// `1_A` peaks at `>= 1/2K`, and `|Gamma| <= 16K/alpha`.
pub fn bogolyubov_chang(group: &Group, a: &[usize]) -> Result<FreimanOutput, FreimanError> {
    if a.is_empty() {
        return Err(FreimanError::EmptySet);
    }
    let mut a = a.to_vec();
    a.sort_unstable();
    a.dedup();
    let alpha = a.len() as f64 / group.size() as f64;
    let aa = sumset(group, &a, &a);
    let k_doubling = aa.len() as f64 / a.len() as f64;

    let f = GroupFunction::indicator(group.clone(), &a);
    let rho = (1.0 / (4.0 * k_doubling.sqrt())).min(1.0);
    let gamma = spec(&f, rho)?;
    let cover = chang_cover(group, &gamma.members, alpha, k_doubling, 24)?;

    let (system, lambda) = if cover.lambda.is_empty() {
        (BourgainSystem::subgroup_system(&Subgroup::full(group)), 0.5)
    } else {
        let k = cover.lambda.len();
        let widths = vec![1.0 / (20.0 * k as f64); k];
        let bohr = BourgainSystem::bohr_system(group, &cover.lambda, &widths)?;
        let (reg, rep) = bohr.regularize()?;
        (reg, rep.lambda)
    };

    // X_4 against the iterated difference set, element-exactly
    let neg_a = negated(group, &a);
    let two_a_minus_two_a = sumset(group, &aa, &sumset(group, &neg_a, &neg_a));
    let x4 = system.level_set(4.0)?;
    let containment_ok = x4
        .iter()
        .all(|x| two_a_minus_two_a.binary_search(x).is_ok());

    let sup_psi = system.psi_apply(&f)?.norm_inf();
    let sup_psi_bound = 1.0 / (2.0 * k_doubling);
    let gamma_bound = 16.0 * k_doubling / alpha;
    let pass = containment_ok
        && sup_psi >= sup_psi_bound - TOL_EQ
        && (gamma.members.len() as f64) <= gamma_bound;
    Ok(FreimanOutput {
        system,
        alpha,
        k_doubling,
        lambda,
        gamma_size: gamma.members.len(),
        gamma_bound,
        chang_size: cover.lambda.len(),
        sup_psi,
        sup_psi_bound,
        containment_ok,
        pass,
    })
}

/// Why one particular m-subset does not refute connectedness.
#[derive(Clone, Debug, Serialize)]
pub enum SubsetEvidence {
    NonDissociated { subset: Vec<usize>, relation: Vec<i8> },
    Spanned { subset: Vec<usize>, extra: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectednessVerdict {
    pub m: usize,
    pub connected: bool,
    pub refuting_subset: Option<Vec<usize>>,
    pub evidence: Vec<SubsetEvidence>,
}

/// Every m-subset must be non-dissociated or span a further point of A.
pub fn is_arithmetically_connected(
    group: &Group,
    a: &[usize],
    m: usize,
    budget: u128,
) -> Result<ConnectednessVerdict, FreimanError> {
    if a.contains(&0) {
        return Err(FreimanError::EmptySet); // 0 in A is outside the definition
    }
    let mut a = a.to_vec();
    a.sort_unstable();
    a.dedup();
    let n = a.len();
    if n < m {
        return Ok(ConnectednessVerdict {
            m,
            connected: true,
            refuting_subset: None,
            evidence: Vec::new(),
        });
    }
    let combos = {
        let mut c: u128 = 1;
        for i in 0..m {
            c = c * (n - i) as u128 / (i + 1) as u128;
        }
        c
    };
    let cost = combos.saturating_mul(3u128.saturating_pow(m as u32));
    if cost > budget {
        return Err(FreimanError::BudgetExceeded { cost, budget });
    }

    if m >= 32 {
        return Err(FreimanError::BudgetExceeded {
            cost: u128::MAX,
            budget,
        });
    }

    // A set is non-dissociated exactly when two of its 2^m subset sums
    // coincide: cancelling the overlap of the two subsets leaves a
    // nontrivial vanishing signed combination. That collision test is the
    // fast path here; only dissociated subsets pay for the 3^m span probe.
    let mut in_a = vec![false; group.size()];
    for &x in &a {
        in_a[x] = true;
    }
    let mut sums = vec![0usize; 1 << m];
    let mut stamp = vec![u32::MAX; group.size()];
    let mut owner = vec![0usize; group.size()];
    let mut generation: u32 = 0;
    const EVIDENCE_CAP: usize = 256;

    let mut evidence = Vec::new();
    let mut subset = vec![0usize; m];
    let mut idxs: Vec<usize> = (0..m).collect();
    loop {
        for (slot, &i) in subset.iter_mut().zip(&idxs) {
            *slot = a[i];
        }
        generation += 1;
        for (i, &x) in subset.iter().enumerate() {
            let half = 1usize << i;
            for mask in 0..half {
                sums[half | mask] = group.add(sums[mask], x);
            }
        }
        let mut collision: Option<(usize, usize)> = None;
        for (mask, &s) in sums.iter().enumerate() {
            if stamp[s] == generation {
                collision = Some((owner[s], mask));
                break;
            }
            stamp[s] = generation;
            owner[s] = mask;
        }
        if let Some((p, q)) = collision {
            if evidence.len() < EVIDENCE_CAP {
                let relation: Vec<i8> = (0..m)
                    .map(|i| ((p >> i) & 1) as i8 - ((q >> i) & 1) as i8)
                    .collect();
                evidence.push(SubsetEvidence::NonDissociated {
                    subset: subset.clone(),
                    relation,
                });
            }
        } else {
            let mut extra: Option<usize> = None;
            for_each_combination(group, &subset, |_, sum| {
                if in_a[sum] && !subset.contains(&sum) {
                    extra = Some(sum);
                    false
                } else {
                    true
                }
            });
            match extra {
                Some(x) => {
                    if evidence.len() < EVIDENCE_CAP {
                        evidence.push(SubsetEvidence::Spanned {
                            subset: subset.clone(),
                            extra: x,
                        });
                    }
                }
                None => {
                    return Ok(ConnectednessVerdict {
                        m,
                        connected: false,
                        refuting_subset: Some(subset),
                        evidence,
                    })
                }
            }
        }
        // advance to the next lexicographic index combination
        let mut i = m;
        let done = loop {
            if i == 0 {
                break true;
            }
            i -= 1;
            if idxs[i] != i + n - m {
                break false;
            }
            if i == 0 {
                break true;
            }
        };
        if done {
            break;
        }
        idxs[i] += 1;
        for j in i + 1..m {
            idxs[j] = idxs[j - 1] + 1;
        }
    }
    Ok(ConnectednessVerdict {
        m,
        connected: true,
        refuting_subset: None,
        evidence,
    })
}

/// Explicit constant in `energy >= c_m |A|^3` for an m-connected set,
/// composed from the pigeonhole/convexity chain: a Riesz-product argument
/// gives at least (1/(2*3^{m+1})) |A|^{m} sign patterns collapsing onto
/// span elements, which converts to c_m = (1/(6 m^2 3^m))^2.
pub fn quadruple_constant(m: usize) -> f64 {
    let base = 6.0 * (m as f64).powi(2) * 3f64.powi(m as i32);
    1.0 / (base * base)
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadrupleReport {
    pub m: usize,
    pub applicable: bool,
    pub energy: u64,
    pub c_m: f64,
    pub lower_bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

pub fn quadruple_lower_bound_check(
    group: &Group,
    a: &[usize],
    m: usize,
    budget: u128,
) -> Result<QuadrupleReport, FreimanError> {
    let verdict = is_arithmetically_connected(group, a, m, budget)?;
    let energy = additive_energy(group, a)?;
    let c_m = quadruple_constant(m);
    let lower_bound = c_m * (a.len() as f64).powi(3);
    if !verdict.connected {
        return Ok(QuadrupleReport {
            m,
            applicable: false,
            energy,
            c_m,
            lower_bound,
            ratio: 0.0,
            pass: false,
        });
    }
    Ok(QuadrupleReport {
        m,
        applicable: true,
        energy,
        c_m,
        lower_bound,
        ratio: energy as f64 / lower_bound,
        pass: energy as f64 >= lower_bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub m: usize,
    pub translation: usize,
    pub dense_path: bool,
    pub connected: bool,
    pub k_doubling: f64,
    pub delta: f64,
    pub gamma: usize,
    pub sup_psi: f64,
    pub dim_final: f64,
    pub density_final: f64,
}

/// Build a system on which the smoothing of `f` stays large. Pipeline:
/// square, round, translate the support off 0, test connectedness, run the
/// dense-path cover construction, then correct from f^2 back to f by
/// joining a one-character Bohr system found from the smoothed correlation.
pub fn concentration_system(
    f: &GroupFunction,
    m_big: f64,
    m_cap: usize,
    budget: u128,
) -> Result<(BourgainSystem, ConcentrationReport), FreimanError> {
    let g = f.group().clone();
    let m_big = m_big.max(0.5);
    let f_z = round_to_integers(f)?;
    if f_z.rounded.values().iter().all(|v| v.re == 0.0) {
        return Err(FreimanError::ZeroSupport);
    }
    let sq = f.mul_pointwise(f)?;
    let sq_z = round_to_integers(&sq)?;
    let a: Vec<usize> = g
        .elements()
        .filter(|&x| sq_z.rounded.values()[x].re != 0.0)
        .collect();
    if a.is_empty() {
        return Err(FreimanError::ZeroSupport);
    }

    let m_requested = ((50.0 * m_big.powi(4)).ceil() as usize).min(m_cap);
    // The subset scan costs roughly C(n, m) * 3^m operations; keep the scan
    // itself under a practical ceiling well below the certificate budget so
    // the gate stays cheap relative to the rest of the split. A verdict at a
    // smaller m is a weaker property, so a refutation there only demotes the
    // certificate instead of aborting — the split checks downstream remain
    // the actual guards.
    const PRACTICAL_SCAN: u128 = 1 << 26;
    let scan_cost = |n: usize, m: usize| -> u128 {
        if m > n {
            return 0;
        }
        let mut c: u128 = 1;
        for i in 0..m {
            c = c.saturating_mul((n - i) as u128) / (i + 1) as u128;
        }
        c.saturating_mul(3u128.saturating_pow(m as u32))
    };
    let mut m = m_requested;
    while m > 3 && scan_cost(a.len(), m) > budget.min(PRACTICAL_SCAN) {
        m -= 1;
    }
    let (translation, connected) = if a.len() == g.size() {
        // full support: nothing to translate away from, dense by fiat
        (0, true)
    } else {
        let t = g.elements().find(|x| a.binary_search(x).is_err()).unwrap();
        let shifted: Vec<usize> = {
            let mut v: Vec<usize> = a.iter().map(|&x| g.sub(x, t)).collect();
            v.sort_unstable();
            v
        };
        match is_arithmetically_connected(&g, &shifted, m, budget) {
            Ok(verdict) if verdict.connected => (t, true),
            Ok(verdict) if m == m_requested => {
                // refuted at the requested subset size: genuinely scattered
                return Err(FreimanError::NotConnected {
                    m,
                    subset: verdict.refuting_subset.unwrap_or_default(),
                });
            }
            // refutation at a downgraded m only demotes the certificate
            Ok(_) => (t, false),
            // even the floor scan is out of reach: dense by fiat
            Err(FreimanError::BudgetExceeded { .. }) => (t, false),
            Err(e) => return Err(e),
        }
    };

    // dense path: the cover construction applied directly to the support
    let freiman = bogolyubov_chang(&g, &a)?;
    let s = freiman.system.clone();

    // correction from f^2 to f: delta is the achieved peak of the smoothed
    // square, and gamma maximizes |E_y f(y) beta_1(y - x) gamma(y)|
    let delta = s.psi_apply(&sq)?.norm_inf();
    let b1 = s.beta_measure(1.0)?;
    // |u_x^(gamma)| <= E_y |f(y)| beta(y-x) for every character, so the
    // correlation of |f| with beta caps each translate; translates that
    // cannot beat the running best skip their transform entirely.
    let n = g.size() as f64;
    let cap: Vec<f64> = g
        .elements()
        .map(|x| {
            g.elements()
                .map(|y| f.values()[y].norm() * b1.beta.values()[g.sub(y, x)].re)
                .sum::<f64>()
                / n
        })
        .collect();
    let mut best = (0usize, 0.0f64);
    for x in g.elements() {
        if cap[x] <= best.1 + TOL_EQ {
            continue;
        }
        let vals: Vec<Complex64> = g
            .elements()
            .map(|y| f.values()[y] * b1.beta.values()[g.sub(y, x)].re)
            .collect();
        let u = GroupFunction::new(g.clone(), vals, crate::group::Domain::Primal)?;
        let uh = u.dft()?;
        for (gamma, v) in uh.values().iter().enumerate() {
            if v.norm() > best.1 + TOL_EQ {
                best = (gamma, v.norm());
            }
        }
    }
    let (gamma, _) = best;
    let d = s.dim().max(1.0);
    let shrink = (delta / (80.0 * d * m_big * m_big)).clamp(1e-6, 1.0);
    let width = (delta / (8.0 * m_big * m_big)).max(1e-9);
    let corrected = s
        .dilate(shrink)?
        .join(&BourgainSystem::bohr_system(&g, &[gamma], &[width])?)?;
    let (s_final, _) = corrected.canonical().regularize()?;
    let s_final = s_final.canonical();
    let sup_psi = s_final.psi_apply(f)?.norm_inf();

    let report = ConcentrationReport {
        m,
        translation,
        dense_path: true,
        connected,
        k_doubling: freiman.k_doubling,
        delta,
        gamma,
        sup_psi,
        dim_final: s_final.dim(),
        density_final: s_final.density(),
    };
    Ok((s_final, report))
}
