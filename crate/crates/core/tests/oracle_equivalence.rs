use flowertrees::classes::{class_gf, cumulative_gf, spec_grid, Parameter};
use flowertrees::oracle::{count_and_accumulate, enumerate, validate};
use num_bigint::BigInt;
use rayon::prelude::*;

const MAX_SIZE: usize = 9;

fn integers(s: &flowertrees::powerseries::Series) -> Vec<BigInt> {
    s.to_integers().expect("integer coefficients")
}

#[test]
fn counts_and_totals_match_series_on_grid() {
    let failures: Vec<String> = spec_grid()
        .par_iter()
        .filter_map(|spec| {
            let totals = count_and_accumulate(spec, MAX_SIZE).unwrap();
            let f = integers(&class_gf(spec, MAX_SIZE).unwrap());
            let chi = integers(&cumulative_gf(spec, Parameter::Petals, MAX_SIZE).unwrap());
            let xi = integers(&cumulative_gf(spec, Parameter::PetalEdges, MAX_SIZE).unwrap());
            for n in 0..=MAX_SIZE {
                let t = &totals[n];
                if t.count != f[n] || t.petals != chi[n] || t.petal_edges != xi[n] {
                    return Some(format!(
                        "{spec} n={n}: oracle ({}, {}, {}) vs series ({}, {}, {})",
                        t.count, t.petals, t.petal_edges, f[n], chi[n], xi[n]
                    ));
                }
            }
            None
        })
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn enumerated_objects_are_valid_and_round_trip() {
    for spec in spec_grid() {
        for (n, row) in enumerate(&spec, 5).unwrap().iter().enumerate() {
            for t in row {
                validate(&spec, t, n).unwrap_or_else(|e| panic!("{spec}: {t}: {e}"));
                let text = t.to_string();
                let back: flowertrees::oracle::FloweredTree = text.parse().unwrap();
                assert_eq!(back.to_string(), text);
                assert_eq!(&back, t);
            }
        }
    }
}

#[test]
fn objects_are_distinct() {
    for spec in spec_grid() {
        for row in enumerate(&spec, 6).unwrap() {
            let mut texts: Vec<String> = row.iter().map(ToString::to_string).collect();
            let before = texts.len();
            texts.sort();
            texts.dedup();
            assert_eq!(texts.len(), before, "{spec}");
        }
    }
}
