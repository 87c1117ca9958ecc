mod common;

use arp_core::engine::{self, EnumOptions, Semantics};
use arp_core::syntax;
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sem(s: Semantics) -> Sem {
    match s {
        Semantics::Mpt => Sem::Mpt,
        Semantics::Fitting => Sem::Fitting,
    }
}

fn revisions(ctx: &Ctx, p: &OProg, bi: &OVal, s: Semantics) -> std::collections::BTreeSet<OVal> {
    let e = engine::enumerate_revisions(&ctx.program(p), &ctx.val(bi), s, &EnumOptions::default()).unwrap();
    assert!(e.revisions.iter().all(|o| o.verified));
    ctx.unvals(e.revisions.iter().map(|o| &o.candidate))
}

fn lattices() -> impl Strategy<Value = OLat> {
    prop_oneof![Just(OLat::Pow(1)), Just(OLat::Pow(2)), Just(OLat::Chain(3)), Just(OLat::Chain(4))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn operator_and_fixpoint_match_oracle(seed in any::<u64>(), lat in lattices(), atoms in 1usize..=3, new in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = if new { gen_new(&mut rng, lat, atoms, 6) } else { gen_old(&mut rng, lat, atoms, 6) };
        let ctx = Ctx::new(lat, atoms);
        let prog = ctx.program(&p);
        let b = gen_val(&mut rng, lat, atoms);
        prop_assert_eq!(ctx.unval(&engine::tpb(&prog, &ctx.val(&b)).unwrap()), p.t(&b));
        let fix = engine::necessary_change(&prog).unwrap();
        prop_assert_eq!(ctx.unval(&fix.value), p.lfp());
        prop_assert!(fix.applications <= prog.len() + 1);
        prop_assert_eq!(engine::is_model(&prog, &ctx.val(&b)).unwrap(), p.is_model(&b));
        prop_assert_eq!(engine::is_smodel(&prog, &ctx.val(&b)).unwrap(), p.is_smodel(&b));
    }

    #[test]
    fn verification_matches_oracle(seed in any::<u64>(), lat in lattices(), atoms in 1usize..=3, new in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = if new { gen_new(&mut rng, lat, atoms, 5) } else { gen_old(&mut rng, lat, atoms, 5) };
        let ctx = Ctx::new(lat, atoms);
        let prog = ctx.program(&p);
        let bi = gen_val(&mut rng, lat, atoms);
        let br = gen_val(&mut rng, lat, atoms);
        for s in [Semantics::Mpt, Semantics::Fitting] {
            let out = engine::is_justified_revision(&prog, &ctx.val(&bi), &ctx.val(&br), s).unwrap();
            prop_assert_eq!(ctx.unval(&out.necessary_change), p.necessary_change_of_reduct(&bi, &br, sem(s)));
            prop_assert_eq!(out.verified, p.justified(&bi, &br, sem(s)));
        }
    }

    #[test]
    fn enumeration_matches_oracle(seed in any::<u64>(), lat in lattices(), atoms in 1usize..=2, new in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = if new { gen_new(&mut rng, lat, atoms, 5) } else { gen_old(&mut rng, lat, atoms, 5) };
        let ctx = Ctx::new(lat, atoms);
        let bi = gen_val(&mut rng, lat, atoms);
        for s in [Semantics::Mpt, Semantics::Fitting] {
            prop_assert_eq!(revisions(&ctx, &p, &bi, s), p.revisions(&bi, sem(s)));
        }
    }

    #[test]
    fn tpb_is_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Pow(2);
        let p = gen_old(&mut rng, lat, 3, 6);
        let ctx = Ctx::new(lat, 3);
        let prog = ctx.program(&p);
        let b = gen_val(&mut rng, lat, 3);
        let b2 = join_kv(lat, &b, &gen_val(&mut rng, lat, 3));
        let t1 = engine::tpb(&prog, &ctx.val(&b)).unwrap();
        let t2 = engine::tpb(&prog, &ctx.val(&b2)).unwrap();
        prop_assert!(t1.leq_k(&t2).unwrap());
    }

    #[test]
    fn parallel_enumeration_is_identical(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Pow(2);
        let p = gen_old(&mut rng, lat, 2, 5);
        let ctx = Ctx::new(lat, 2);
        let prog = ctx.program(&p);
        let bi = ctx.val(&gen_val(&mut rng, lat, 2));
        let one = engine::enumerate_revisions(&prog, &bi, Semantics::Mpt, &EnumOptions::default()).unwrap();
        let four = engine::enumerate_revisions(&prog, &bi, Semantics::Mpt, &EnumOptions { jobs: 4, ..Default::default() }).unwrap();
        prop_assert_eq!(one, four);
    }

    #[test]
    fn revisions_are_smodels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Pow(2);
        let p = gen_old(&mut rng, lat, 2, 6);
        let ctx = Ctx::new(lat, 2);
        let prog = ctx.program(&p);
        let bi = gen_val(&mut rng, lat, 2);
        for r in revisions(&ctx, &p, &bi, Semantics::Mpt) {
            prop_assert!(engine::is_smodel(&prog, &ctx.val(&r)).unwrap());
            prop_assert!(engine::is_model(&prog, &ctx.val(&r)).unwrap());
        }
    }

    #[test]
    fn consistent_model_iff_smodel(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Pow(2);
        let p = gen_old(&mut rng, lat, 3, 6);
        let b = gen_consistent_val(&mut rng, lat, 3);
        prop_assert_eq!(p.is_model(&b), p.is_smodel(&b));
    }

    #[test]
    fn models_of_a_model_shrink(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Pow(2);
        let p = gen_old(&mut rng, lat, 2, 6);
        let ctx = Ctx::new(lat, 2);
        let bi = lift_to_model(&p, &gen_val(&mut rng, lat, 2));
        let revs = revisions(&ctx, &p, &bi, Semantics::Mpt);
        prop_assert_eq!(revs.contains(&bi), p.is_smodel(&bi));
        for r in &revs {
            prop_assert!(leq_kv(lat, r, &bi));
        }
        if consistent_v(lat, &bi) {
            prop_assert_eq!(revs.into_iter().collect::<Vec<_>>(), vec![bi]);
        }
    }

    #[test]
    fn join_transform_keeps_mpt_revisions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Pow(2);
        let p = gen_old(&mut rng, lat, 2, 5);
        let ctx = Ctx::new(lat, 2);
        let prog = ctx.program(&p);
        let joined = syntax::join_transform(&prog).unwrap();
        let bi = ctx.val(&gen_val(&mut rng, lat, 2));
        let a = engine::enumerate_revisions(&prog, &bi, Semantics::Mpt, &EnumOptions::default()).unwrap();
        let b = engine::enumerate_revisions(&joined, &bi, Semantics::Mpt, &EnumOptions::default()).unwrap();
        prop_assert_eq!(
            a.revisions.iter().map(|o| &o.candidate).collect::<Vec<_>>(),
            b.revisions.iter().map(|o| &o.candidate).collect::<Vec<_>>()
        );
    }

    #[test]
    fn chain_semantics_agree(seed in any::<u64>(), k in 2u32..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Chain(k);
        let p = gen_old(&mut rng, lat, 2, 5);
        let ctx = Ctx::new(lat, 2);
        let bi = gen_val(&mut rng, lat, 2);
        prop_assert_eq!(revisions(&ctx, &p, &bi, Semantics::Mpt), revisions(&ctx, &p, &bi, Semantics::Fitting));
    }

    #[test]
    fn new_fitting_reduct_agrees_with_split_rules(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = OLat::Pow(2);
        let p = gen_new(&mut rng, lat, 2, 4);
        let ctx = Ctx::new(lat, 2);
        let prog = ctx.program(&p);
        let old = syntax::tr2(&prog).unwrap();
        let bi = ctx.val(&gen_val(&mut rng, lat, 2));
        let a = engine::enumerate_revisions(&prog, &bi, Semantics::Fitting, &EnumOptions::default()).unwrap();
        let b = engine::enumerate_revisions(&old, &bi, Semantics::Fitting, &EnumOptions::default()).unwrap();
        prop_assert_eq!(
            a.revisions.iter().map(|o| &o.candidate).collect::<Vec<_>>(),
            b.revisions.iter().map(|o| &o.candidate).collect::<Vec<_>>()
        );
    }
}

#[test]
fn least_fixpoint_is_meet_of_prefixpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lat = OLat::Pow(2);
    for _ in 0..40 {
        let p = gen_old(&mut rng, lat, 2, 5);
        let ctx = Ctx::new(lat, 2);
        let top = vec![(lat.top(), lat.top()); 2];
        let tarski = p.all_valuations().into_iter().filter(|b| p.is_model(b)).fold(top, |acc, b| meet_kv(lat, &acc, &b));
        let nc = engine::necessary_change(&ctx.program(&p)).unwrap();
        assert_eq!(ctx.unval(&nc.value), tarski);
    }
}

#[test]
fn enumeration_refuses_oversized_search() {
    let lat = OLat::Pow(2);
    let ctx = Ctx::new(lat, 3);
    let p = OProg { lat, atoms: 3, rules: ORules::Old(vec![]) };
    let err = engine::enumerate_revisions(
        &ctx.program(&p),
        &ctx.val(&p.bottom()),
        Semantics::Mpt,
        &EnumOptions { cap: 4095, ..Default::default() },
    )
    .unwrap_err();
    assert!(matches!(err, engine::EngineError::CapExceeded { .. }), "{err}");
    assert!(err.to_string().contains("4096"), "{err}");
}

#[test]
fn fixpoint_bound_held_in_this_process() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let p = gen_old(&mut rng, OLat::Chain(4), 3, 6);
        let ctx = Ctx::new(OLat::Chain(4), 3);
        engine::necessary_change(&ctx.program(&p)).unwrap();
    }
    let stats = engine::fixpoint_stats();
    assert!(stats.computations >= 50);
    assert_eq!(stats.bound_violations, 0);
}
