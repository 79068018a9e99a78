//! Normalization, the state-based construction and the effect `Keep`
//! checked against LTSs derived directly from the reference rules.

mod common;

use std::collections::HashSet;

use common::{bisimilar, raw_lts, rng, Sb, TermGen};
use pact_core::action::name;
use pact_core::effect::{EffectDesc, EffectSpec};
use pact_core::event::{build_lts, normalize, SemanticsError};
use pact_core::formula::{Formula, SymbolTable};
use pact_core::lts::Lts;
use pact_core::state::build_sb_lts;
use pact_core::term::Term;
use proptest::prelude::*;
use std::sync::Arc;

fn term_edges(l: &Lts) -> HashSet<(String, String, String)> {
    let label = |s: usize| l.states[s].term.as_ref().unwrap().to_string();
    l.transitions.iter().map(|t| (label(t.source), t.action.to_string(), label(t.target))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normalized_lts_is_bisimilar_to_raw(seed in any::<u64>()) {
        let t = TermGen::event(2, 1).term(&mut rng(seed), 4);
        let Some(raw) = raw_lts(&t, 3000) else { return Ok(()) };
        let built = build_lts(&t, 3000).unwrap();
        prop_assert!(built.len() <= raw.len());
        prop_assert!(bisimilar(&built, &raw), "{}", t);
    }

    #[test]
    fn normalize_preserves_one_step_behavior(seed in any::<u64>()) {
        let t = TermGen::event(2, 1).term(&mut rng(seed), 4);
        let n = normalize(&t);
        prop_assert_eq!(normalize(&n).clone(), n.clone());
        let (a, b) = (raw_lts(&t, 3000), raw_lts(&n, 3000));
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert!(bisimilar(&a, &b), "{} vs {}", t, n);
        }
    }

    #[test]
    fn state_based_lts_is_bisimilar_to_raw(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = TermGen::state(2, 1, 2);
        let table = g.table();
        let eff = g.effect(&mut r);
        let t = g.term(&mut r, 4);
        let o = Sb { table: &table, effect: &eff };
        let Some(raw) = o.raw_lts(&t, 3000) else { return Ok(()) };
        match build_sb_lts(&t, &table, &eff, &Formula::True, 3000) {
            Ok(built) => prop_assert!(bisimilar(&built, &raw), "{}", t),
            Err(SemanticsError::NoConsistentInitial) => prop_assert!(raw.initial.is_empty()),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn states_are_consistent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = TermGen::state(2, 1, 3);
        let table = g.table();
        let eff = g.effect(&mut r);
        let t = g.term(&mut r, 4);
        let o = Sb { table: &table, effect: &eff };
        if let Ok(l) = build_sb_lts(&t, &table, &eff, &Formula::True, 3000) {
            for s in &l.states {
                prop_assert!(o.cons(s.term.as_ref().unwrap(), s.valuation.unwrap()));
            }
        }
    }

    #[test]
    fn keep_effect_is_isomorphic_to_event_semantics(seed in any::<u64>()) {
        let t = TermGen::event(2, 1).term(&mut rng(seed), 4);
        let Ok(ev) = build_lts(&t, 3000) else { return Ok(()) };
        let table = Arc::new(SymbolTable::new([name("P")]).unwrap());
        let sb = build_sb_lts(&t, &table, &EffectSpec::uniform(EffectDesc::Keep), &Formula::not(Formula::sym("P")), 3000)
            .unwrap();
        prop_assert_eq!(sb.len(), ev.len());
        prop_assert_eq!(sb.transitions.len(), ev.transitions.len());
        prop_assert_eq!(&sb.terminating, &ev.terminating);
        prop_assert_eq!(term_edges(&sb), term_edges(&ev));
        prop_assert!(sb.states.iter().all(|s| s.valuation == sb.states[0].valuation));
    }
}

#[test]
fn star_target_must_be_consistent() {
    // After `a` the loop body would have to emit P again; with effect
    // `unset(P)` that is impossible, so only the non-looping branch remains.
    let table = Arc::new(SymbolTable::new([name("P")]).unwrap());
    let a = pact_core::action::Action::event("a", None);
    let t = Term::star(Term::emit(Formula::sym("P"), Term::prefix(a, Term::Empty)));
    let eff = EffectSpec::uniform(EffectDesc::SetFalse(vec![name("P")]));
    let l = build_sb_lts(&t, &table, &eff, &Formula::sym("P"), 100).unwrap();
    assert_eq!(l.len(), 1);
    assert!(l.transitions.is_empty());
}
