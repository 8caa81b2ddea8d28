//! Annihilating Fuchsian operators, determining equations and characteristic exponents.

pub mod annihilator;
pub mod closed_forms;
pub mod indicial;
pub mod isomonodromy;
pub mod ncdet;

pub use annihilator::{annihilates, annihilates_component, build_annihilator, build_shifted_annihilator, conversion_coefficients, ordinary_annihilator, FuchsOperator};
pub use ncdet::{nc_determinant, nc_determinant_slots};
pub use indicial::{indicial_at, indicial_at_infinity, indicial_ordinary, indicial_polynomial, singular_points, DeterminingEquation, ExponentSet, PointLabel};
pub use closed_forms::{check_index_family, exponents_closed_form, exponents_computed, fuchs_sum_audit, Family, FuchsAudit, IndexFamilyCheck, SpecialPoint};
pub use isomonodromy::{check_isomonodromy_factorization, scale_sample, stratum_point, IsoReport, SampleReport, StratumSample};
