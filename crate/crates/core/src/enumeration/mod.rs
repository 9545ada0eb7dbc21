//! Counting nested canalizing functions: closed form, recursion, generating
//! function, asymptotics, equivalence classes and exhaustive censuses.

mod asymptotic;
mod census;
mod counting;
pub(crate) mod forms;
mod series;

pub use asymptotic::{
    approximation_error_table, asymptotic_prefactor, count_ncfs_asymptotic, ApproxRow, ASYMPTOTIC_PRECISION_BITS,
};
pub use census::{census, census_orbits, orbits_of_forms, Census, OrbitCensus, CENSUS_TABLE_GUARD};
pub use counting::{
    composition_count, count_equivalence_classes, count_ncfs, count_ncfs_recursive, stirling2, stirling2_row,
    stratum_counts, CountMethod, CountReport, StratumCount,
};
pub use forms::{all_canonical_forms, compositions, MAX_ENUMERATED_FORMS};
pub use series::{count_ncfs_egf, egf_coefficients, SeriesCoefficients};
