//! JSON records. Complex numbers are `[re, im]` pairs and matrices are
//! row-major nested arrays:
//!
//! ```text
//! algebra   {"blocks":[2,3]}
//! element   {"blocks":[[[[re,im],…],…],…]}
//! tuple     {"entries":[element,…]}
//! state     {"weights":[…],"densities":[matrix,…]}
//! operator  {"terms":[{"weight":w,"unitary":element},…]}
//! ```
//!
//! Floats are written in shortest round-trip form and parsed exactly, so
//! serialize → parse → serialize reproduces the same bytes.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{Element, FdAlgebra, Tuple};
use crate::duality::{DualityReport, IdealBound, TraceBound};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::mixing::{MixingOperator, Term, Unitary};
use crate::state::{State, TracialState};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Json("matrix is not square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    pub blocks: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleJson {
    pub entries: Vec<ElementJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub weights: Vec<f64>,
    pub densities: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub weight: f64,
    pub unitary: ElementJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingOperatorJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceBoundJson {
    pub value: f64,
    pub vertex: usize,
    pub weights: Vec<f64>,
    pub vertex_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealBoundJson {
    pub block: usize,
    pub value: f64,
    pub dual_lower: f64,
    pub states: Vec<StateJson>,
    pub restart_values: Vec<f64>,
}

/// Duality report; the witnesses are the maximizing trace, the minimizing
/// states per ideal and the operators attaining `upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityReportJson {
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub weak_duality_ok: bool,
    pub under_converged: bool,
    pub trace_witness: TraceBoundJson,
    pub ideal_witnesses: Vec<IdealBoundJson>,
    pub operators: Vec<MixingOperatorJson>,
    pub restart_values: Vec<f64>,
}

impl From<&FdAlgebra> for AlgebraJson {
    fn from(a: &FdAlgebra) -> Self {
        Self {
            blocks: a.block_dims().to_vec(),
        }
    }
}

impl TryFrom<&AlgebraJson> for FdAlgebra {
    type Error = Error;
    fn try_from(j: &AlgebraJson) -> Result<Self> {
        FdAlgebra::new(j.blocks.clone())
    }
}

impl From<&Element> for ElementJson {
    fn from(e: &Element) -> Self {
        Self {
            blocks: e.blocks().iter().map(matrix_to_json).collect(),
        }
    }
}

impl TryFrom<&ElementJson> for Element {
    type Error = Error;
    fn try_from(j: &ElementJson) -> Result<Self> {
        let blocks = j
            .blocks
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        let e = Element::new(blocks)?;
        FdAlgebra::new(e.dims())?;
        Ok(e)
    }
}

impl From<&Tuple> for TupleJson {
    fn from(t: &Tuple) -> Self {
        Self {
            entries: t.entries().iter().map(ElementJson::from).collect(),
        }
    }
}

impl TryFrom<&TupleJson> for Tuple {
    type Error = Error;
    fn try_from(j: &TupleJson) -> Result<Self> {
        Tuple::new(
            j.entries
                .iter()
                .map(Element::try_from)
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

impl From<&State> for StateJson {
    fn from(s: &State) -> Self {
        Self {
            weights: s.weights().to_vec(),
            densities: s.densities().iter().map(matrix_to_json).collect(),
        }
    }
}

impl TryFrom<&StateJson> for State {
    type Error = Error;
    fn try_from(j: &StateJson) -> Result<Self> {
        let densities = j
            .densities
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        let algebra = FdAlgebra::new(densities.iter().map(|d| d.nrows()).collect())?;
        State::new(&algebra, j.weights.clone(), densities)
    }
}

impl From<&MixingOperator> for MixingOperatorJson {
    fn from(op: &MixingOperator) -> Self {
        Self {
            terms: op
                .terms()
                .iter()
                .map(|t| TermJson {
                    weight: t.weight,
                    unitary: ElementJson::from(t.unitary.as_element()),
                })
                .collect(),
        }
    }
}

impl TryFrom<&MixingOperatorJson> for MixingOperator {
    type Error = Error;
    fn try_from(j: &MixingOperatorJson) -> Result<Self> {
        let terms = j
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    weight: t.weight,
                    unitary: Unitary::new(Element::try_from(&t.unitary)?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidWeights("no terms".into()))?;
        let algebra = FdAlgebra::new(first.unitary.dims())?;
        MixingOperator::exact(&algebra, terms)
    }
}

impl From<&TraceBound> for TraceBoundJson {
    fn from(t: &TraceBound) -> Self {
        Self {
            value: t.value,
            vertex: t.vertex,
            weights: t.state.weights().to_vec(),
            vertex_values: t.vertex_values.clone(),
        }
    }
}

impl From<&IdealBound> for IdealBoundJson {
    fn from(b: &IdealBound) -> Self {
        Self {
            block: b.block,
            value: b.value,
            dual_lower: b.dual_lower,
            states: b.states.iter().map(StateJson::from).collect(),
            restart_values: b.restart_values.clone(),
        }
    }
}

impl From<&DualityReport> for DualityReportJson {
    fn from(r: &DualityReport) -> Self {
        Self {
            upper: r.upper,
            lower: r.lower,
            gap: r.gap,
            weak_duality_ok: r.weak_duality_ok,
            under_converged: r.under_converged,
            trace_witness: TraceBoundJson::from(&r.trace),
            ideal_witnesses: r.ideals.iter().map(IdealBoundJson::from).collect(),
            operators: r.operators.iter().map(MixingOperatorJson::from).collect(),
            restart_values: r.restart_values.clone(),
        }
    }
}

/// Pretty-printed JSON for any serializable record.
pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Json(e.to_string()))
}

pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

/// Conversions between domain values and their JSON text.
pub trait JsonRecord: Sized {
    fn to_json(&self) -> Result<String>;
    fn from_json(text: &str) -> Result<Self>;
}

macro_rules! json_record {
    ($ty:ty, $repr:ty) => {
        impl JsonRecord for $ty {
            fn to_json(&self) -> Result<String> {
                to_string(&<$repr>::from(self))
            }
            fn from_json(text: &str) -> Result<Self> {
                <$ty>::try_from(&from_str::<$repr>(text)?)
            }
        }
    };
}

json_record!(FdAlgebra, AlgebraJson);
json_record!(Element, ElementJson);
json_record!(Tuple, TupleJson);
json_record!(State, StateJson);
json_record!(MixingOperator, MixingOperatorJson);

impl JsonRecord for TracialState {
    fn to_json(&self) -> Result<String> {
        to_string(&serde_json::json!({ "weights": self.weights() }))
    }
    fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            weights: Vec<f64>,
        }
        let r: Repr = from_str(text)?;
        let algebra = FdAlgebra::with_limits(vec![1; r.weights.len()], usize::MAX, usize::MAX)?;
        TracialState::new(&algebra, r.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_mixing_operator, random_state, random_tuple, rng_for};

    fn round_trip<T: JsonRecord + PartialEq + std::fmt::Debug>(value: &T) {
        let first = value.to_json().unwrap();
        let parsed = T::from_json(&first).unwrap();
        assert_eq!(&parsed, value);
        assert_eq!(parsed.to_json().unwrap(), first);
    }

    #[test]
    fn schemas_use_the_documented_field_names() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let compact = serde_json::to_string(&AlgebraJson::from(&alg)).unwrap();
        assert_eq!(compact, r#"{"blocks":[2,3]}"#);
        let e = Element::new(vec![CMat::from_row_slice(
            1,
            1,
            &[Complex64::new(0.5, -1.0)],
        )])
        .unwrap();
        assert_eq!(
            serde_json::to_string(&ElementJson::from(&e)).unwrap(),
            r#"{"blocks":[[[[0.5,-1.0]]]]}"#
        );
        let op = MixingOperator::identity(&FdAlgebra::new(vec![1]).unwrap());
        assert_eq!(
            serde_json::to_string(&MixingOperatorJson::from(&op)).unwrap(),
            r#"{"terms":[{"weight":1.0,"unitary":{"blocks":[[[[1.0,0.0]]]]}}]}"#
        );
    }

    #[test]
    fn random_records_round_trip_byte_for_byte() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let mut rng = rng_for(5, 0);
        for _ in 0..10 {
            round_trip(&random_tuple(&alg, 3, &mut rng));
            round_trip(&random_state(&alg, &mut rng));
            round_trip(&random_mixing_operator(&alg, 4, &mut rng));
        }
        round_trip(&alg);
        round_trip(&TracialState::new(&alg, vec![0.25, 0.75]).unwrap());
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(Element::from_json(r#"{"blocks":[[[[1.0,0.0],[0.0,0.0]]]]}"#).is_err());
        assert!(Tuple::from_json(r#"{"entries":[]}"#).is_err());
        assert!(FdAlgebra::from_json(r#"{"blocks":[2],"extra":1}"#).is_err());
        assert!(MixingOperator::from_json(
            r#"{"terms":[{"weight":0.5,"unitary":{"blocks":[[[[1.0,0.0]]]]}}]}"#
        )
        .is_err());
    }
}
