#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use rewcat::equivalence::exchange_steps;
use rewcat::rewrite::{find_redexes, Derivation};
use rewcat::sig::{build_presentation, Declarations, GenDecl, Presentation, RuleDecl, StrDecl, TypedString};

const GENS: [&str; 3] = ["a", "b", "c"];

fn word(rng: &mut StdRng, max: usize) -> Vec<&'static str> {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| *GENS.choose(rng).unwrap()).collect()
}

fn str_decl(w: &[&str]) -> StrDecl {
    if w.is_empty() {
        StrDecl::identity("C")
    } else {
        StrDecl::gens(w)
    }
}

/// A one-cell presentation with up to four rules of sides at most two long.
pub fn random_presentation(rng: &mut StdRng) -> Presentation {
    let mut d = Declarations {
        cells: vec!["C".into()],
        gens: GENS
            .iter()
            .map(|g| GenDecl {
                name: g.to_string(),
                dom: "C".into(),
                cod: "C".into(),
            })
            .collect(),
        ..Declarations::default()
    };
    let n = rng.gen_range(1..=4);
    while d.rules.len() < n {
        let (l, r) = (word(rng, 2), word(rng, 2));
        if l == r {
            continue;
        }
        d.rules.push(RuleDecl {
            name: format!("r{}", d.rules.len()),
            lhs: str_decl(&l),
            rhs: str_decl(&r),
        });
    }
    build_presentation(&d).expect("one-cell rules are well-typed")
}

pub fn random_string(pres: &Presentation, rng: &mut StdRng, max: usize) -> TypedString {
    pres.sig().validate_string(&word(rng, max), Some("C")).expect("one cell")
}

/// A random presentation with two derivations `s1 ; s2` and `s2' ; s1'` of
/// disjoint steps applied in both orders.
pub fn random_exchange(seed: u64) -> (Presentation, Derivation, Derivation) {
    let mut rng = StdRng::seed_from_u64(seed);
    loop {
        let pres = random_presentation(&mut rng);
        let rules = pres.base_rules();
        let x = random_string(&pres, &mut rng, 5);
        let first = find_redexes(&pres, &x, &rules);
        let Some(s1) = first.choose(&mut rng).cloned() else { continue };
        let y = s1.target(&pres);
        let second: Vec<_> = find_redexes(&pres, &y, &rules)
            .into_iter()
            .filter_map(|s2| exchange_steps(&pres, &s1, &s2).map(|e| (s2, e)))
            .collect();
        let Some((s2, (t2, t1))) = second.choose(&mut rng).cloned() else { continue };
        let d1 = Derivation::new(&pres, x.clone(), vec![s1, s2]).expect("consecutive steps");
        let d2 = Derivation::new(&pres, x, vec![t2, t1]).expect("exchanged steps");
        return (pres, d1, d2);
    }
}
