//! JSON wire formats: functions, element sets, subgroups, systems,
//! decompositions. Output is deterministic given identical inputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bourgain::{BourgainSystem, SystemDescriptor};
use crate::decompose::{CosetDecomposition, CosetPiece, DecompositionCertificate};
use crate::group::{Domain, Group, GroupError, GroupFunction, Subgroup};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    System(#[from] crate::bourgain::BourgainError),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionJson {
    pub orders: Vec<usize>,
    /// Complex values as [re, im] pairs, indexed in mixed-radix order.
    pub values: Vec<(f64, f64)>,
    #[serde(default)]
    pub domain: Option<String>,
}

pub fn function_to_json(f: &GroupFunction) -> FunctionJson {
    FunctionJson {
        orders: f.group().orders().to_vec(),
        values: f.values().iter().map(|v| (v.re, v.im)).collect(),
        domain: Some(
            match f.domain() {
                Domain::Primal => "primal",
                Domain::Dual => "dual",
            }
            .to_string(),
        ),
    }
}

pub fn function_from_json(doc: &FunctionJson) -> Result<GroupFunction, IoError> {
    let group = Group::new(doc.orders.clone())?;
    let domain = match doc.domain.as_deref() {
        None | Some("primal") => Domain::Primal,
        Some("dual") => Domain::Dual,
        Some(other) => return Err(IoError::Malformed(format!("unknown domain {other:?}"))),
    };
    let values: Vec<Complex64> = doc
        .values
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    Ok(GroupFunction::new(group, values, domain)?)
}

/// A plain element set, given by coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetJson {
    pub orders: Vec<usize>,
    pub elements: Vec<Vec<usize>>,
}

pub fn set_from_json(doc: &SetJson) -> Result<(Group, Vec<usize>), IoError> {
    let group = Group::new(doc.orders.clone())?;
    let mut elems: Vec<usize> = doc.elements.iter().map(|c| group.index(c)).collect();
    elems.sort_unstable();
    elems.dedup();
    Ok((group, elems))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupJson {
    pub orders: Vec<usize>,
    pub generators: Vec<Vec<usize>>,
}

pub fn subgroup_from_json(doc: &SubgroupJson) -> Result<Subgroup, IoError> {
    let group = Group::new(doc.orders.clone())?;
    let gens: Vec<usize> = doc.generators.iter().map(|c| group.index(c)).collect();
    if gens.is_empty() {
        Ok(Subgroup::trivial(&group))
    } else {
        Ok(Subgroup::closure(&group, &gens)?)
    }
}

/// System document: {"orders", "kind", "params", "dim"}; params carry the
/// construction recipe, so the radii rebuild exactly.
pub fn system_to_json(s: &BourgainSystem) -> Result<Value, IoError> {
    let mut v = serde_json::to_value(s.descriptor())?;
    let kind = v
        .as_object_mut()
        .and_then(|o| o.remove("kind"))
        .ok_or_else(|| IoError::Malformed("descriptor without kind".into()))?;
    Ok(json!({
        "orders": s.group().orders(),
        "kind": kind,
        "params": v,
        "dim": s.dim(),
    }))
}

pub fn system_from_json(v: &Value) -> Result<BourgainSystem, IoError> {
    let orders: Vec<usize> = serde_json::from_value(
        v.get("orders")
            .cloned()
            .ok_or_else(|| IoError::Malformed("missing orders".into()))?,
    )?;
    let group = Group::new(orders)?;
    let mut params = v.get("params").cloned().unwrap_or_else(|| json!({}));
    let kind = v
        .get("kind")
        .cloned()
        .ok_or_else(|| IoError::Malformed("missing kind".into()))?;
    params
        .as_object_mut()
        .ok_or_else(|| IoError::Malformed("params must be an object".into()))?
        .insert("kind".into(), kind);
    let descriptor: SystemDescriptor = serde_json::from_value(params)?;
    Ok(descriptor.build(&group)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceJson {
    pub sign: i8,
    pub rep: Vec<usize>,
    pub generators: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub orders: Vec<usize>,
    pub pieces: Vec<PieceJson>,
    pub certificate: Value,
}

pub fn decomposition_to_json(g: &Group, d: &CosetDecomposition) -> Result<DecompositionJson, IoError> {
    let pieces = d
        .pieces
        .iter()
        .map(|p| PieceJson {
            sign: p.sign,
            rep: g.coords(p.rep),
            generators: p
                .subgroup
                .generators()
                .iter()
                .map(|&x| g.coords(x))
                .collect(),
        })
        .collect();
    Ok(DecompositionJson {
        orders: g.orders().to_vec(),
        pieces,
        certificate: serde_json::to_value(&d.certificate)?,
    })
}

pub fn decomposition_from_json(doc: &DecompositionJson) -> Result<(Group, CosetDecomposition), IoError> {
    let group = Group::new(doc.orders.clone())?;
    let mut pieces = Vec::new();
    for p in &doc.pieces {
        let gens: Vec<usize> = p.generators.iter().map(|c| group.index(c)).collect();
        let subgroup = if gens.is_empty() || gens.iter().all(|&x| x == 0) {
            Subgroup::trivial(&group)
        } else {
            Subgroup::closure(&group, &gens)?
        };
        pieces.push(CosetPiece {
            sign: p.sign,
            rep: group.index(&p.rep),
            subgroup,
        });
    }
    let certificate: DecompositionCertificate = serde_json::from_value(doc.certificate.clone())
        .unwrap_or(DecompositionCertificate {
            exact: false,
            l: pieces.len(),
            leaves: 0,
            distinct_subgroups: 0,
            a_norm: f64::NAN,
            m: 0.0,
            epsilon: 0.0,
            structured_path: false,
            singleton_fallback: false,
            dense_path: false,
            max_leaf_int_dist: 0.0,
            splits: Vec::new(),
        });
    Ok((group, CosetDecomposition {
        pieces,
        certificate,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_round_trip() {
        let g = Group::new(vec![2, 3]).unwrap();
        let f = GroupFunction::indicator(g, &[0, 4]);
        let doc = function_to_json(&f);
        let back = function_from_json(&doc).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.domain(), Domain::Primal);
    }

    #[test]
    fn system_document_round_trip() {
        let g = Group::cyclic(24);
        let s = BourgainSystem::bohr_system(&g, &[1, 5], &[0.5, 0.9])
            .unwrap()
            .dilate(0.75)
            .unwrap();
        let doc = system_to_json(&s).unwrap();
        assert_eq!(doc["kind"], "dilate");
        let back = system_from_json(&doc).unwrap();
        assert_eq!(back.radii(), s.radii());
        assert_eq!(back.dim(), s.dim());
    }

    #[test]
    fn decomposition_round_trip() {
        let g = Group::cyclic(8);
        let h = Subgroup::closure(&g, &[2]).unwrap();
        let f = h.coset_indicator(1);
        let d = crate::decompose::decompose(&f, &crate::config::RunConfig::default()).unwrap();
        let doc = decomposition_to_json(&g, &d).unwrap();
        let (_, back) = decomposition_from_json(&doc).unwrap();
        let rep = crate::decompose::verify_decomposition(&f, &back);
        assert!(rep.exact);
    }

    #[test]
    fn set_document_parses_and_dedups() {
        let doc = SetJson {
            orders: vec![6],
            elements: vec![vec![1], vec![3], vec![1]],
        };
        let (_, elems) = set_from_json(&doc).unwrap();
        assert_eq!(elems, vec![1, 3]);
    }

    #[test]
    fn deterministic_serialization() {
        let g = Group::cyclic(12);
        let s = BourgainSystem::bohr_system(&g, &[1], &[1.0]).unwrap();
        let a = serde_json::to_string(&system_to_json(&s).unwrap()).unwrap();
        let b = serde_json::to_string(&system_to_json(&s).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
