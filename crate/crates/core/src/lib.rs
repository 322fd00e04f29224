pub mod algebra;
pub mod averaging;
pub mod duality;
pub mod error;
pub mod hmap;
pub mod json;
pub mod linalg;
pub mod mixing;
pub mod random;
pub mod state;
pub mod state_solver;
pub mod unitary_search;

pub use algebra::{commutator, Element, FdAlgebra, Quotient, Tuple};
pub use duality::{verify_theorem, Budget, DualityReport, MixInfProblem};
pub use error::{Error, Result};
pub use hmap::{verify_h_map, HMapConfig, HMapReport, LinearMap};
pub use json::JsonRecord;
pub use mixing::{MixingOperator, Term, Unitary};
pub use state::{State, TracialState};
