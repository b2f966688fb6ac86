//! Krichever–Novikov type algebras on the Riemann sphere with several marked
//! points, computed in exact rational arithmetic.

pub mod error;
pub mod exact;
pub mod knalgebra;
pub mod knbasis;
pub mod kncohomology;
pub mod scalar;
pub mod surface;
pub mod verify;

pub use error::{KnError, Result};
pub use scalar::Scalar;
pub use surface::{degree_set, BasisIndex, HalfInt, Window};

pub type Rat = num_rational::BigRational;
pub type Poly = exact::Polynomial<Rat>;
pub type RatFunc = exact::RationalFunction<Rat>;
pub type SurfaceConfig = surface::SurfaceConfig<Rat>;
pub type MeroForm = knbasis::MeroForm<Rat>;
pub type FormExpansion = knbasis::FormExpansion<Rat>;
pub type Basis = knbasis::Basis<Rat>;
pub type SuperElement = knalgebra::SuperElement<Rat>;
pub type Algebra = knalgebra::Algebra<Rat>;
pub type StructTable = knalgebra::StructTable<Rat>;
pub type ProjectiveConnection = kncohomology::ProjectiveConnection<Rat>;
pub type CocycleSpec = kncohomology::CocycleSpec<Rat>;
pub type LinearForm = kncohomology::LinearForm<Rat>;
