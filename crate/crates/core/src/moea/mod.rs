//! NSGA-II machinery and the evolutionary outer loops.

mod config;
mod nsga;
mod run;

pub use config::{BetaMode, RunConfig};
pub use nsga::{
    crowded_winner, crowding_distance, dominates, merge, nondominated_sort, survivor_indices, tournament_index,
    tournament_select, Population, Ranking,
};
pub use run::{
    audit_scores, evaluate_candidate, produce_offspring, produce_offspring_with, run_base, run_base_traced, run_mo,
    Acceptance, NoObserver, Observer, RunOutcome,
};
