//! Manufactured solutions, error norms, convergence studies and the
//! cross-checking suites.

mod cases;
mod norms;
pub mod oracle;
mod suites;
mod table;

pub use cases::{CaseId, ManufacturedCase};
pub use norms::{
    discrete_h2_seminorm, discrete_h2_seminorm_diff, error_norms, face_jump_sum, projected_gradient_diff, ErrorReport,
    NormId,
};
pub use suites::{equivalence_suite, property_suite, relative_deviation, CheckResult, SuiteReport, EQUIVALENCE_TOL};
pub use table::{convergence_study, eps_label, sci, ConvergenceTable, StudySpec, TableRow};
