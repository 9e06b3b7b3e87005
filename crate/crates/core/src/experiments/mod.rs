//! Numerical experiments: the five-option Monte Carlo comparison and the
//! four-option example with a regularity violation.

mod appendix;
mod table1;

pub use appendix::{
    appendix_nested_generator, appendix_problem, regularity_check, run_appendix_example,
    RegularityIncrease, RegularityReport, APPENDIX_STATES, REGULARITY_SLACK,
};
pub use table1::{
    run_table1, summarize, table1_generator, uniform_problem, write_table1_csv, MonteCarloConfig,
    SummaryStats, Table1Report,
};
