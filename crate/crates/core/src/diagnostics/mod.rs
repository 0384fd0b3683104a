//! Energy ledger, energy inequality, ε-sweep defect study and weak-form residuals.

mod defect;
mod ledger;
mod weak_form;

pub use defect::{defect_study, fit_domination, DefectReport};
pub use ledger::{ledger_update, verify_energy_inequality, Dissipation, EnergyCheck, LedgerRow};
pub use weak_form::{weak_form_residual, TestField, WeakFormReport, TEST_DIVERGENCE_TOL};
