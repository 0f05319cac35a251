pub mod closed_sets;
