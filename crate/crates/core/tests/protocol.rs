use zkcec_core::circuit::{parse_netlist, Circuit};
use zkcec_core::cnf::{Clause, CnfFormula, Lit};
use zkcec_core::error::{CheckKind, Error, Phase};
use zkcec_core::protocol::{prepare, run_local, run_plan, Config, Instance, Mutation, VerifyOptions};

const AND: &str = "input a\ninput b\noutput c\ngate AND c a b\n";
const NAND_NOT: &str = "input a\ninput b\noutput c\ngate NAND n a b\ngate NOT c n\n";
const OR: &str = "input a\ninput b\noutput c\ngate OR c a b\n";

fn circuit(name: &str, text: &str) -> Circuit {
    parse_netlist(name, text).unwrap()
}

fn and_pair() -> Instance {
    Instance::cec(&circuit("spec", AND), &circuit("impl", NAND_NOT)).unwrap()
}

fn and_or() -> Instance {
    Instance::cec(&circuit("spec", AND), &circuit("impl", OR)).unwrap()
}

fn cfg(seed: u64) -> Config {
    Config { dealer_seed: seed, verifier_seed: seed.wrapping_mul(31).wrapping_add(7), prover_seed: seed ^ 0x55, ..Config::default() }
}

fn expect_abort(inst: &Instance, m: Mutation, phase: Phase, seed: u64) -> CheckKind {
    let run = run_local(inst, &cfg(seed), Some(m), VerifyOptions::default()).unwrap();
    let a = run.abort().unwrap_or_else(|| panic!("{m:?} accepted: {:?}", run.verifier)).clone();
    assert_eq!(a.phase, phase, "{m:?}: {a}");
    assert!(run.prover.is_err());
    a.kind
}

#[test]
fn honest_runs_accept_with_exact_tape() {
    for compress in [true, false] {
        for batch in [1, 3, 64] {
            let c = Config { compress, batch_steps: batch, ..Config::default() };
            let run = run_local(&and_pair(), &c, None, VerifyOptions::default()).unwrap();
            let v = run.verifier.unwrap();
            let p = run.prover.unwrap();
            assert!(v.accepted && p.accepted);
            assert_eq!(v.tape_used, v.tape.total());
            assert_eq!(p.tape_used, p.tape.total());
            assert_eq!(v.leakage, p.leakage);
            assert_eq!(p.traffic.bytes_sent, v.traffic.bytes_received);
        }
    }
}

#[test]
fn inequivalent_pair_stops_before_any_message() {
    assert!(matches!(run_local(&and_or(), &Config::default(), None, VerifyOptions::default()), Err(Error::NotEquivalent)));
}

#[test]
fn blueprint_example_is_accepted() {
    let cl = |v: &[i64]| Clause::new(v.iter().map(|x| Lit::from_dimacs(*x).unwrap()).collect()).unwrap();
    // c = a AND b with a = x1, b = x2, c = x3
    let mut sys = CnfFormula::new(3);
    for c in [&[-3, 1][..], &[-3, 2], &[3, -1, -2]] {
        sys.push(cl(c));
    }
    let mut prop = CnfFormula::new(3);
    prop.push(cl(&[3]));
    prop.push(cl(&[-1]));
    let inst = Instance::blueprint(prop, sys, &[0, 2]).unwrap();
    let run = run_local(&inst, &Config::default(), None, VerifyOptions::default()).unwrap();
    let v = run.verifier.unwrap();
    assert!(v.accepted);
    assert_eq!(v.tape.p4, 1);
    assert_eq!(v.tape_used, v.tape.total());
}

#[test]
fn public_clause_mutations_abort_in_p1() {
    assert_eq!(expect_abort(&and_pair(), Mutation::AlterPublicClause, Phase::P1, 1), CheckKind::Open);
    assert_eq!(expect_abort(&and_pair(), Mutation::DropPublicClause, Phase::P1, 2), CheckKind::Framing);
    assert_eq!(expect_abort(&and_pair(), Mutation::TamperMac, Phase::P1, 3), CheckKind::Open);
}

#[test]
fn refutation_mutations_abort_in_p2() {
    for m in [Mutation::ForgeResolvent, Mutation::ForwardRead, Mutation::WrongRomValue, Mutation::AntecedentSwap] {
        for seed in 0..5 {
            expect_abort(&and_pair(), m, Phase::P2, seed);
        }
    }
    for seed in 0..5 {
        expect_abort(&and_or(), Mutation::GhostClauses, Phase::P2, seed);
    }
}

#[test]
fn contradictory_secret_is_caught_deterministically() {
    for seed in 0..5 {
        assert_eq!(expect_abort(&and_or(), Mutation::ContradictorySecret, Phase::P3, seed), CheckKind::Complement);
    }
}

#[test]
fn bad_assignment_and_smuggling() {
    for seed in 0..5 {
        assert_eq!(expect_abort(&and_pair(), Mutation::BadAssignment, Phase::P3, seed), CheckKind::Mul);
        assert_eq!(expect_abort(&and_pair(), Mutation::SmuggleClause, Phase::P4, seed), CheckKind::Mul);
    }
}

#[test]
fn flipped_wire_bytes_abort() {
    let inst = and_pair();
    let n = {
        let run = run_local(&inst, &Config::default(), None, VerifyOptions::default()).unwrap();
        run.prover.unwrap().traffic.frames_sent as usize
    };
    for frame in 0..n {
        for byte in [0, 5, 17] {
            let run = run_local(&inst, &Config::default(), Some(Mutation::FlipWireByte { frame, byte }), VerifyOptions::default())
                .unwrap();
            assert!(run.abort().is_some(), "frame {frame} byte {byte} went unnoticed");
        }
    }
}

#[test]
fn plan_statement_matches_leakage() {
    let plan = prepare(&and_pair(), &Config::default(), None).unwrap();
    let run = run_plan(&plan, &Config::default(), VerifyOptions::default());
    let v = run.verifier.unwrap();
    assert_eq!(v.leakage.n_sec, plan.instance.phi_sec.len());
    assert_eq!(v.leakage.r_stored, plan.stats.r_stored);
    assert_eq!(v.leakage.m, plan.instance.phi_sec.used_vars().len());
}

#[test]
fn verifier_view_hides_secret_codes() {
    use std::collections::HashSet;
    use zkcec_core::circuit::VarClass;
    use zkcec_core::zk::Tag;

    let inst = Instance::cec(&circuit("spec", AND), &circuit("impl", "input a\ninput b\noutput c\ngate NOT na a\ngate NOT nb b\ngate NOR c na nb\n")).unwrap();
    let plan = prepare(&inst, &Config::default(), None).unwrap();
    let run = run_plan(&plan, &Config::default(), VerifyOptions { record: true });
    let v = run.verifier.unwrap();
    assert!(v.accepted);

    let classes = inst.classes();
    let secret: HashSet<[u8; 16]> = (0..inst.num_vars as u32)
        .filter(|x| classes[*x as usize] == VarClass::Secret)
        .flat_map(|x| [Lit::pos(x), Lit::neg(x)])
        .map(|l| plan.ctx.code(l).to_le_bytes())
        .collect();
    assert!(!secret.is_empty());

    let allowed = [Tag::Hello, Tag::CommitDelta, Tag::IndexMap, Tag::Open, Tag::MulProof, Tag::AssignCodes, Tag::Checkpoint];
    let mut assign_frames = 0;
    for (phase, f) in &v.view {
        assert!(allowed.contains(&f.tag), "unexpected {:?} in {phase}", f.tag);
        if f.tag == Tag::AssignCodes {
            assign_frames += 1;
            assert_eq!(f.payload.len(), 16 * plan.statement.m);
            continue;
        }
        for w in f.payload.windows(16) {
            assert!(!secret.contains(w), "secret code leaked in {:?} during {phase}", f.tag);
        }
    }
    assert_eq!(assign_frames, 1);
}

fn cl(v: &[i64]) -> Clause {
    Clause::new(v.iter().map(|x| Lit::from_dimacs(*x).unwrap()).collect()).unwrap()
}

fn cnf(nv: u32, cs: &[&[i64]]) -> CnfFormula {
    let mut f = CnfFormula::new(nv);
    for c in cs {
        f.push(cl(c));
    }
    f
}

#[test]
fn micro_tape_matches_hand_count() {
    // (x1) public, (¬x1) secret, w = 1, one resolution step.
    let inst = Instance::blueprint(cnf(1, &[&[1]]), cnf(1, &[&[-1]]), &[0]).unwrap();
    let run = run_local(&inst, &Config::default(), None, VerifyOptions::default()).unwrap();
    let v = run.verifier.unwrap();
    assert_eq!((v.leakage.w, v.leakage.r), (1, 1));
    let read = zkcec_core::zk::rom::read_cost(2, 1) as u64;
    assert_eq!(read, 49);
    // commit 2, P1 2, P2: stored 2 + 1 + two reads + pivot and witnesses 5, P3 1, P4 1
    assert_eq!((v.tape.commit, v.tape.p1, v.tape.p2, v.tape.p3, v.tape.p4), (2, 2, 106, 1, 1));
    assert_eq!(v.tape.total(), 112);
    assert_eq!(v.tape_used, 112);
    assert_eq!(run.prover.unwrap().tape_used, 112);
}

#[test]
fn undersized_tape_fails_before_first_commitment() {
    use zkcec_core::protocol::{run_prover, run_verifier, TapeSource};
    use zkcec_core::zk::{dealer_gen, duplex};

    let c = Config::default();
    let plan = prepare(&and_pair(), &c, None).unwrap();
    let full = run_plan(&plan, &c, VerifyOptions::default()).verifier.unwrap().tape.total();
    let (pt, vt) = dealer_gen(c.dealer_seed, full - 1);
    let (a, b) = duplex();
    let public = &plan.instance.public;
    let (p, v) = std::thread::scope(|s| {
        let h = s.spawn(|| run_prover(&plan, &c, Box::new(a), TapeSource::Given(pt)));
        let v = run_verifier(public, &c, Box::new(b), TapeSource::Given(vt), VerifyOptions { record: true });
        (h.join().unwrap(), v)
    });
    assert!(matches!(p, Err(Error::TapeExhausted { .. })), "{p:?}");
    assert!(matches!(v, Err(Error::TapeExhausted { .. })), "{v:?}");
}

#[test]
fn verifier_with_wrong_spec_aborts_in_p1() {
    use zkcec_core::protocol::{run_prover, run_verifier, PublicInstance, TapeSource};
    use zkcec_core::zk::duplex;

    let c = Config::default();
    let plan = prepare(&and_pair(), &c, None).unwrap();
    let wrong = PublicInstance::cec(&circuit("spec", OR));
    let (a, b) = duplex();
    let (p, v) = std::thread::scope(|s| {
        let h = s.spawn(|| run_prover(&plan, &c, Box::new(a), TapeSource::Seeded));
        let v = run_verifier(&wrong, &c, Box::new(b), TapeSource::Seeded, VerifyOptions::default());
        (h.join().unwrap(), v)
    });
    let a = v.unwrap_err();
    assert_eq!(a.as_abort().expect("abort").phase, Phase::P1, "{a}");
    assert!(p.is_err());
}

#[test]
fn transcripts_are_deterministic() {
    let c = cfg(9);
    let plan = prepare(&and_pair(), &c, None).unwrap();
    let one = run_plan(&plan, &c, VerifyOptions { record: true }).verifier.unwrap();
    let two = run_plan(&plan, &c, VerifyOptions { record: true }).verifier.unwrap();
    assert!(!one.view.is_empty());
    assert_eq!(one.view, two.view);
    let again = prepare(&and_pair(), &c, None).unwrap();
    let three = run_plan(&again, &c, VerifyOptions { record: true }).verifier.unwrap();
    assert_eq!(one.view, three.view);
    let other = run_plan(&plan, &cfg(10), VerifyOptions { record: true }).verifier.unwrap();
    assert_ne!(one.view, other.view);
}

#[test]
fn dropped_connection_is_a_transport_error() {
    use zkcec_core::protocol::{run_verifier, TapeSource};
    use zkcec_core::zk::{duplex, Role, Session, Tag};

    let c = Config::default();
    let plan = prepare(&and_pair(), &c, None).unwrap();
    let (a, b) = duplex();
    let mut s = Session::new(Role::Prover, Box::new(a));
    s.send(Tag::Hello, plan.statement.encode()).unwrap();
    drop(s);
    let v = run_verifier(&plan.instance.public, &c, Box::new(b), TapeSource::Seeded, VerifyOptions::default());
    assert!(matches!(v, Err(Error::Transport(_))), "{v:?}");
}

#[test]
fn identical_circuits_are_accepted() {
    let inst = Instance::cec(&circuit("spec", AND), &circuit("impl", AND)).unwrap();
    let run = run_local(&inst, &Config::default(), None, VerifyOptions::default()).unwrap();
    assert!(run.accepted(), "{:?}", run.verifier);
}

#[test]
fn honest_prover_cannot_satisfy_contradiction() {
    let mut inst = and_pair();
    let x = inst.phi_sec.used_vars()[0];
    inst.phi_sec.push(Clause::new(vec![Lit::pos(x)]).unwrap());
    inst.phi_sec.push(Clause::new(vec![Lit::neg(x)]).unwrap());
    assert!(matches!(run_local(&inst, &Config::default(), None, VerifyOptions::default()), Err(Error::Witness(_))));
}

#[test]
fn blueprint_edge_cases() {
    use zkcec_core::protocol::run_blueprint;

    let c = Config::default();
    let sys = cnf(3, &[&[-3, 1], &[-3, 2], &[3, -1, -2]]);
    let prop = cnf(3, &[&[3], &[-1]]);
    assert!(run_blueprint(&prop, &sys, &[0, 2], &c, None, VerifyOptions::default()).unwrap().accepted());

    let sat = run_blueprint(&cnf(1, &[&[1]]), &cnf(2, &[&[2]]), &[], &c, None, VerifyOptions::default());
    assert!(matches!(sat, Err(Error::NotRefutable)));

    let mut broken = sys.clone();
    broken.push(cl(&[2]));
    broken.push(cl(&[-2]));
    assert!(matches!(run_blueprint(&prop, &broken, &[0, 2], &c, None, VerifyOptions::default()), Err(Error::Witness(_))));
    let run = run_blueprint(&prop, &broken, &[0, 2], &c, Some(Mutation::BadAssignment), VerifyOptions::default()).unwrap();
    assert_eq!(run.abort().expect("abort").phase, Phase::P3);
    let run = run_blueprint(&prop, &sys, &[0, 2], &c, Some(Mutation::ContradictorySecret), VerifyOptions::default()).unwrap();
    let a = run.abort().expect("abort");
    assert_eq!((a.phase, a.kind), (Phase::P3, CheckKind::Complement));
}
