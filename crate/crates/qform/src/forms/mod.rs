mod module;
mod reduce;
mod space;

pub use module::{Codec, PresentedModule, Submodule};
pub use reduce::{project_element, project_vector, reduce_mod_radical, FactorComponent, Reduction};
pub use space::{check_isometry, invert_map, normalize_map, QuadraticSpace};
