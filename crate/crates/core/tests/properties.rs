use flowertrees::asymptotics::{analyze, exact_coefficients, exact_cumulative, expectation_slope, support_period};
use flowertrees::classes::{spec_grid, ClassSpec, Parameter};
use flowertrees::oeis::{match_sequence, OeisSequence};
use num_bigint::BigInt;
use proptest::prelude::*;

fn grid_spec() -> impl Strategy<Value = ClassSpec> {
    let grid = spec_grid();
    (0..grid.len()).prop_map(move |i| grid[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spec_display_round_trips(s in grid_spec()) {
        prop_assert_eq!(s.to_string().parse::<ClassSpec>().unwrap(), s);
    }

    #[test]
    fn parameter_totals_are_ordered(s in grid_spec()) {
        let f = exact_coefficients(&s, 30).unwrap();
        let chi = exact_cumulative(&s, Parameter::Petals, 30).unwrap();
        let xi = exact_cumulative(&s, Parameter::PetalEdges, 30).unwrap();
        for n in 0..=30 {
            prop_assert!(chi[n] <= xi[n]);
            prop_assert!(xi[n] <= &f[n] * BigInt::from(n));
        }
    }

    #[test]
    fn coefficients_vanish_off_the_support_class(s in grid_spec()) {
        let Ok(report) = analyze(&s) else { return Ok(()) };
        let f = exact_coefficients(&s, 60).unwrap();
        for (n, c) in f.iter().enumerate().skip(1) {
            if n % report.period != report.residue {
                prop_assert_eq!(c, &BigInt::from(0), "{} at {}", s, n);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn slopes_are_bounded(s in grid_spec()) {
        let (Ok(chi), Ok(xi)) = (expectation_slope(&s, Parameter::Petals), expectation_slope(&s, Parameter::PetalEdges)) else {
            return Ok(());
        };
        let (a, b) = (chi.c.to_f64(), xi.c.to_f64());
        prop_assert!(0.0 < a && a <= b + 1e-12 && b <= 1.0 + 1e-12, "{}: {} {}", s, a, b);
    }
}

proptest! {
    #[test]
    fn planted_normalization_is_recovered(
        terms in prop::collection::vec(1u64..1_000_000_000_000, 30),
        shift in 0i64..=3,
        scale in 1u32..=4,
    ) {
        let cand = OeisSequence { id: "A000001".into(), offset: 0, terms: terms.iter().map(|&t| BigInt::from(t)).collect() };
        let computed: Vec<BigInt> = cand.terms[shift as usize..].iter().map(|t| t * scale).collect();
        let m = match_sequence(&computed, &cand).unwrap();
        prop_assert_eq!(m.clone(), match_sequence(&computed, &cand).unwrap());
        prop_assert_eq!((m.shift, m.scale, m.dropped_leading, m.decimation), (shift, scale, 0, 1));
    }

    #[test]
    fn support_period_divides_gaps(period in 1usize..6, residue in 0usize..6, len in 20usize..60) {
        let residue = residue % period;
        let seq: Vec<BigInt> =
            (0..len).map(|n| BigInt::from(u8::from(n >= residue && (n - residue) % period == 0))).collect();
        prop_assert_eq!(support_period(&seq), (period, residue));
    }
}
