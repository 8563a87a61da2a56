//! Independent validation tooling for the dosm simulator.
//!
//! Everything here deliberately avoids calling into the production solver
//! or delay code paths: the oracles and checkers re-derive delays,
//! assignments, and constraints from their definitions so that agreement
//! with `dosm-core` is meaningful evidence, not circular reasoning. The
//! only shared surface is the plain data types (catalog, placement,
//! demand) and the plan structs being compared.

pub mod checker;
pub mod fd;
pub mod gen;
pub mod oracle;

pub use checker::{check_migrate_plan, check_scale_in_plan, check_scale_out_plan};
pub use fd::finite_diff_grad;
pub use gen::{random_instance, random_instance_sized, TestInstance};
pub use oracle::{
    oracle_assignment_mean, oracle_migrate, oracle_scale_in, oracle_scale_out, OracleMigrate,
    OracleReport, OracleScale,
};
