//! Pythagorean modules: pairs of complex matrices `(A, B)` with
//! `A*A + B*B = I`, and the unitary representations of Thompson's groups
//! `F`, `T`, `V` and of the Cuntz algebra `O_2` that they induce.
//!
//! The crate is organised bottom-up:
//!
//! * [`words`]: binary words, prime words and their cyclic classes.
//! * [`pmodule`]: the module type, builders, word operators.
//! * [`decompose`]: sub-module lattice, decomposition, Pythagorean dimension.
//! * [`classify`]: diffuse/atomic split, atomic normal forms, fingerprints,
//!   unitary equivalence and the aggregated report.
//! * [`forest`]: trees as dyadic partitions and tree-pair arithmetic.
//! * [`rep`]: exact evaluation of the induced representation on decorated trees.
//! * [`moduli`]: numerical rank checks of the moduli-space dimension counts
//!   and an orbit distance on the unitary group.

pub mod classify;
pub mod decompose;
mod error;
pub mod forest;
pub mod json;
pub mod linalg;
pub mod moduli;
pub mod pmodule;
pub mod rep;
pub mod words;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

pub use pmodule::{PModule, PhaseDiagonal};
pub use words::{BinaryWord, Ray};
pub use classify::{
    atomic_canonical_form, classification_report, decay_oracle, fingerprint, is_diffuse,
    unitary_equivalent, AtomicForm, ClassificationReport, Diffuseness, Fingerprint,
};
pub use decompose::{
    closure_of, decompose, largest_submodule_within, module_predicates, pdim,
    smallest_complete_submodule, Decomposition, ModulePredicates, SubspaceBasis,
};
pub use forest::{GroupKind, Tree, VElement};
pub use rep::TreeVector;
