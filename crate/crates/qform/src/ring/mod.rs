pub mod factor;
pub mod finite;
pub mod radical;
pub mod unitary;

pub use factor::{Decomposition, FactorKind, SimpleFactorData};
pub use finite::{additive_closure, additive_span_generators, Elem, FiniteRing, RingSpec};
pub use radical::{corner_set, ef_inverse, lift_idempotent, lift_orthogonal_system, EfInverter};
pub use unitary::{
    lambda_bounds, validate_anti_structure, validate_form_parameter, AntiStructure, LambdaSpec,
    SigmaRule, UnitaryRing, ValidationReport, Violation,
};
