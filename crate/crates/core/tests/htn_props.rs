use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tasklearn::env::ObjectRef;
use tasklearn::htn::{ActionSchema, KnowledgeBase, Step, Term};

const OBJECTS: [&str; 5] = ["onion", "tomato", "plate", "pot", "delivery"];

/// A random knowledge base built only through `add_schema`.
fn random_kb(seed: u64, learned: usize) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kb = KnowledgeBase::with_primitives();
    for i in 0..learned {
        let arity = rng.gen_range(0..3);
        let params: Vec<String> = (0..arity).map(|p| format!("a{p}")).collect();
        let names = kb.names();
        let body_len = rng.gen_range(1..4);
        let body = (0..body_len)
            .map(|_| {
                let callee = kb.get(&names[rng.gen_range(0..names.len())]).unwrap();
                let args = (0..callee.arity())
                    .map(|_| {
                        if !params.is_empty() && rng.gen_bool(0.5) {
                            Term::Var(params[rng.gen_range(0..params.len())].clone())
                        } else {
                            Term::Const(ObjectRef::from(OBJECTS[rng.gen_range(0..OBJECTS.len())]))
                        }
                    })
                    .collect();
                Step::new(callee.name.clone(), args)
            })
            .collect();
        let name = kb.unique_name(["get", "put", "cook"][i % 3]);
        kb.add_schema(ActionSchema::learned(name, params, body, format!("text {i}")))
            .unwrap();
    }
    kb
}

fn top_step(kb: &KnowledgeBase, seed: u64) -> Step {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let names = kb.names();
    let schema = kb.get(&names[rng.gen_range(0..names.len())]).unwrap();
    let args = (0..schema.arity())
        .map(|_| Term::Const(ObjectRef::from(OBJECTS[rng.gen_range(0..OBJECTS.len())])))
        .collect();
    Step::new(schema.name.clone(), args)
}

/// Same knowledge with every parameter renamed.
fn alpha_rename(kb: &KnowledgeBase) -> KnowledgeBase {
    let mut out = KnowledgeBase::new();
    for s in kb.schemas() {
        let rename = |p: &str| format!("renamed_{p}_z");
        let mut s = s.clone();
        s.params = s.params.iter().map(|p| rename(p)).collect();
        for step in &mut s.body {
            for t in &mut step.args {
                if let Term::Var(v) = t {
                    *v = rename(v);
                }
            }
        }
        out.add_schema(s).unwrap();
    }
    out
}

proptest! {
    #[test]
    fn serialization_round_trips(seed in any::<u64>(), n in 0usize..12) {
        let kb = random_kb(seed, n);
        let back = KnowledgeBase::from_json(&kb.to_json()).unwrap();
        prop_assert_eq!(&back, &kb);
        prop_assert_eq!(back.names(), kb.names());
    }

    #[test]
    fn expansion_is_primitive_and_alpha_invariant(seed in any::<u64>(), n in 1usize..12) {
        let kb = random_kb(seed, n);
        let step = top_step(&kb, seed);
        let calls = kb.expand(&step, &BTreeMap::new()).unwrap();
        let primitives = kb.primitive_names();
        prop_assert!(calls.iter().all(|c| primitives.contains(&c.action)));
        let renamed = alpha_rename(&kb);
        prop_assert_eq!(renamed.expand(&step, &BTreeMap::new()).unwrap(), calls);
    }

    #[test]
    fn unique_name_never_collides(seed in any::<u64>(), n in 0usize..12) {
        let kb = random_kb(seed, n);
        for base in ["get", "put", "cook", "plate"] {
            let name = kb.unique_name(base);
            prop_assert!(!kb.contains(&name));
            prop_assert_eq!(name == base, !kb.contains(base));
        }
    }
}
