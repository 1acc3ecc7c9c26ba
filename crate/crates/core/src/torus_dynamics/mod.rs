//! Exact shearing maps on the torus, Fourier analysis of divergence-free
//! fields, certified approximation of isotopies by shearing programs, the
//! Moser correction, and conversion of programs into perturbation data.

pub mod builder;
pub mod field;
pub mod flow;
pub mod fourier;
pub mod interp;
pub mod moser;
pub mod perturbation;
pub mod point;
pub mod profile;
pub mod program;
pub mod shear;
pub mod spectral;

pub use builder::{
    build_shearing_program, measure_deviation, BuildError, BuildParams, DeviationReport,
    ErrorCertificate, SliceData,
};
pub use field::{
    derive_time_field, estimate_lipschitz, DeriveOptions, FieldConfig, FieldError, FieldSpec,
    TimeField,
};
pub use flow::{gronwall_bound, splitting_bound, splitting_constant, SplittingConstant};
pub use fourier::{fourier_decompose, DecomposeOptions, FourierError, FourierField, FourierTerm, GridSamples};
pub use moser::{moser_correct, IsotopySpec, MoserChecks, MoserError, MoserOptions, MoserResult};
pub use perturbation::{perturbation_to_map, program_to_perturbation, PerturbationStep};
pub use point::TorusPoint;
pub use profile::ShearingProfile;
pub use program::{eval_program, Segment, ShearingProgram};
pub use shear::{apply_shearing, ShearingMap};
