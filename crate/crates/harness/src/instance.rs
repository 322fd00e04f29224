//! Seeded problem instances.

use dixmier_core::json::{self, TupleJson};
use dixmier_core::random::{
    gaussian_complex, random_commutator_sum, random_element, random_traceless, rng_for,
};
use dixmier_core::{Element, FdAlgebra, Tuple};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// Gaussians minus their center-valued trace.
    Traceless,
    /// Sums of random commutators.
    CommutatorSpan,
    /// Raw Gaussians.
    Generic,
    /// Traceless tuples with a central component planted in the first tuple.
    AdversarialUnitComponent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub seed: u64,
    pub block_dims: Vec<usize>,
    /// Tuple length.
    pub n: usize,
    /// Number of tuples.
    pub m: usize,
    pub kind: Kind,
}

/// The central component `Σⱼ cⱼ eₖ` added to the first tuple of an
/// adversarial instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Planted {
    pub block: usize,
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub tuples: Vec<Tuple>,
    pub planted: Option<Planted>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub spec: InstanceSpec,
    pub tuples: Vec<TupleJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Planted>,
}

impl InstanceSpec {
    pub fn algebra(&self) -> dixmier_core::Result<FdAlgebra> {
        if self.n == 0 || self.m == 0 {
            return Err(dixmier_core::Error::InvalidArgument(
                "n and m must be positive".into(),
            ));
        }
        FdAlgebra::new(self.block_dims.clone())
    }

    /// The same spec with another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Builds the instance; all randomness comes from `spec.seed`.
pub fn generate(spec: &InstanceSpec) -> dixmier_core::Result<Instance> {
    let algebra = spec.algebra()?;
    let mut rng = rng_for(spec.seed, 0);
    let sample = |rng: &mut dixmier_core::random::SeededRng| match spec.kind {
        Kind::Traceless | Kind::AdversarialUnitComponent => random_traceless(&algebra, rng),
        Kind::CommutatorSpan => random_commutator_sum(&algebra, 2, rng),
        Kind::Generic => random_element(&algebra, rng),
    };
    let mut tuples: Vec<Tuple> = (0..spec.m)
        .map(|_| Tuple::new((0..spec.n).map(|_| sample(&mut rng)).collect()))
        .collect::<dixmier_core::Result<_>>()?;
    let mut planted = None;
    if spec.kind == Kind::AdversarialUnitComponent {
        let block = rng.random_range(0..algebra.num_blocks());
        let e = algebra.block_projection(block)?;
        let values: Vec<Complex64> = (0..spec.n)
            .map(|_| {
                let c = gaussian_complex(&mut rng);
                // keep the planted component away from zero
                c / c.norm() * (1.0 + c.norm())
            })
            .collect();
        let shifted = tuples[0]
            .entries()
            .iter()
            .zip(&values)
            .map(|(a, &c)| a.add(&e.scale(c)))
            .collect::<dixmier_core::Result<Vec<Element>>>()?;
        tuples[0] = Tuple::new(shifted)?;
        planted = Some(Planted {
            block,
            values: values.iter().map(|c| [c.re, c.im]).collect(),
        });
    }
    Ok(Instance {
        spec: spec.clone(),
        tuples,
        planted,
    })
}

impl Instance {
    pub fn algebra(&self) -> FdAlgebra {
        self.tuples[0].algebra()
    }

    pub fn to_json(&self) -> dixmier_core::Result<String> {
        json::to_string(&InstanceJson {
            spec: self.spec.clone(),
            tuples: self.tuples.iter().map(TupleJson::from).collect(),
            planted: self.planted.clone(),
        })
    }

    pub fn from_json(text: &str) -> dixmier_core::Result<Self> {
        let repr: InstanceJson = json::from_str(text)?;
        let tuples = repr
            .tuples
            .iter()
            .map(Tuple::try_from)
            .collect::<dixmier_core::Result<Vec<_>>>()?;
        let spec = repr.spec;
        let consistent = tuples.len() == spec.m
            && tuples
                .iter()
                .all(|t| t.len() == spec.n && t.dims() == spec.block_dims);
        if !consistent {
            return Err(dixmier_core::Error::Json(
                "tuples do not match the spec".into(),
            ));
        }
        Ok(Self {
            spec,
            tuples,
            planted: repr.planted,
        })
    }
}
