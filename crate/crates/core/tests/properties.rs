mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use rewcat::equivalence::{canonical_exchange_form, exchange_adjacent, equivalent, Move, Verdict};
use rewcat::rewrite::{find_redexes, Derivation, Measure};
use rewcat::sig::{preset, Class, Presentation, TypedString};
use rewcat::Budget;

fn adjunction_string(pres: &Presentation, picks: &[bool], base: bool) -> Option<TypedString> {
    let names: Vec<&str> = picks.iter().map(|&f| if f { "F" } else { "G" }).collect();
    pres.sig().validate_string(&names, Some(if base { "C" } else { "D" })).ok()
}

/// A random walk of base-rule steps from `x`.
fn walk(pres: &Presentation, x: TypedString, rng: &mut StdRng, len: usize, max_len: usize) -> Derivation {
    let mut d = Derivation::identity(x);
    for _ in 0..len {
        let y = d.target(pres);
        let steps: Vec<_> = find_redexes(pres, &y, &pres.base_rules())
            .into_iter()
            .filter(|s| s.target(pres).len() <= max_len)
            .collect();
        let Some(s) = steps.choose(rng) else { break };
        d.steps.push(s.clone());
    }
    d
}

proptest! {
    #[test]
    fn concatenation_is_associative(
        a in prop::collection::vec(any::<bool>(), 0..4),
        b in prop::collection::vec(any::<bool>(), 0..4),
        c in prop::collection::vec(any::<bool>(), 0..4),
        cells in prop::array::uniform3(any::<bool>()),
    ) {
        let pres = preset("adjunction").unwrap();
        let sig = pres.sig();
        let (Some(a), Some(b), Some(c)) = (
            adjunction_string(&pres, &a, cells[0]),
            adjunction_string(&pres, &b, cells[1]),
            adjunction_string(&pres, &c, cells[2]),
        ) else {
            return Ok(());
        };
        let left = sig.concat(&a, &b).and_then(|ab| sig.concat(&ab, &c));
        let right = sig.concat(&b, &c).and_then(|bc| sig.concat(&a, &bc));
        prop_assert_eq!(left.is_ok(), right.is_ok());
        if let (Ok(l), Ok(r)) = (left, right) {
            prop_assert_eq!(l.len(), a.len() + b.len() + c.len());
            prop_assert_eq!(l, r);
        }
    }

    #[test]
    fn good_steps_decrease_the_measure(seed in any::<u64>(), preset_index in 0usize..4) {
        let pres = preset(rewcat::sig::PRESET_NAMES[preset_index]).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let u = pres.universes().choose(&mut rng).unwrap();
        let strings = u.enumerate(&pres, 5);
        let x = strings.choose(&mut rng).unwrap();
        for s in find_redexes(&pres, x, &pres.good_rules()) {
            prop_assert_eq!(s.class(&pres), Class::Good);
            prop_assert!(Measure::of(&pres, &s.target(&pres)) < Measure::of(&pres, x));
        }
    }

    #[test]
    fn canonical_form_is_invariant_under_exchange(seed in any::<u64>(), preset_index in 0usize..4) {
        let pres = preset(rewcat::sig::PRESET_NAMES[preset_index]).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let strings = pres.universes()[0].enumerate(&pres, 3);
        let x = strings.choose(&mut rng).unwrap().clone();
        let d = walk(&pres, x, &mut rng, 4, 6);
        let (canon, trace) = canonical_exchange_form(&pres, &d);
        prop_assert_eq!(trace.replay(&pres, &d).unwrap(), canon.clone());
        let all_exchanges = trace.moves.iter().all(|m| matches!(m, Move::Exchange { .. }));
        prop_assert!(all_exchanges);
        for i in 0..d.len().saturating_sub(1) {
            if let Ok(e) = exchange_adjacent(&pres, &d, i) {
                prop_assert_eq!(e.target(&pres), d.target(&pres));
                prop_assert_eq!(&canonical_exchange_form(&pres, &e).0, &canon);
            }
        }
    }

    #[test]
    fn canonical_form_is_idempotent(seed in any::<u64>()) {
        let pres = preset("composite-monad").unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let strings = pres.universes()[0].enumerate(&pres, 4);
        let x = strings.choose(&mut rng).unwrap().clone();
        let d = walk(&pres, x, &mut rng, 5, 6);
        let (canon, _) = canonical_exchange_form(&pres, &d);
        let (again, trace) = canonical_exchange_form(&pres, &canon);
        prop_assert_eq!(again, canon);
        prop_assert!(trace.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn disjoint_steps_exchange(seed in any::<u64>()) {
        let (pres, d1, d2) = common::random_exchange(seed);
        prop_assert_eq!(d1.target(&pres), d2.target(&pres));
        match equivalent(&pres, &d1, &d2, &Budget::default()).unwrap() {
            Verdict::Equal(t) => {
                if d1 != d2 {
                    prop_assert_eq!(t.len(), 1);
                    let is_exchange = matches!(t.moves[0], Move::Exchange { .. });
                    prop_assert!(is_exchange);
                }
                prop_assert_eq!(t.replay(&pres, &d1).unwrap(), d2);
            }
            Verdict::Unknown(diag) => prop_assert!(false, "unknown: {}", diag.reason),
        }
    }
}
