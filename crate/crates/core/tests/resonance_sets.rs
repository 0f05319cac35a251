mod common;

use common::closed_sets::{closed_forms, hausdorff, literal_t_plus_minus_minus, Oracle};
use stres_core::resonance::{resonant_sets, Classifier, PhaseSpec, SearchBox, SetKind};

fn cell_diagonal(search: &SearchBox, dim: usize) -> f64 {
    search.spacing() * (dim as f64).sqrt()
}

#[test]
fn all_phases_match_closed_forms_within_one_cell() {
    for spec in PhaseSpec::all() {
        let search = SearchBox::default_for(&spec);
        let t0 = std::time::Instant::now();
        let sets = resonant_sets(&spec, search, Classifier::CellDistance).unwrap();
        let elapsed = t0.elapsed();
        let cell = cell_diagonal(&search, sets.dim());
        for (kind, set) in [SetKind::S, SetKind::T, SetKind::R].into_iter().zip(closed_forms(&spec.label())) {
            let h = hausdorff(&sets, kind, &Oracle::new(set, search, spec.arity()), 2000);
            eprintln!("{spec} {kind:?}: {h:?} cell {cell} ({elapsed:?})");
            assert!(h.value() <= cell, "{spec} {kind:?}: {h:?} > {cell}");
        }
    }
}

#[test]
fn literal_plus_minus_minus_display_differs_from_phase_zero_set() {
    let spec = PhaseSpec::parse("+--").unwrap();
    let search = SearchBox::default_for(&spec);
    let sets = resonant_sets(&spec, search, Classifier::CellDistance).unwrap();
    let h = hausdorff(&sets, SetKind::T, &Oracle::new(literal_t_plus_minus_minus(), search, 3), 2000);
    assert!(h.value() > 4.0 * cell_diagonal(&search, 3), "{h:?}");
}
