//! Acceptance suite: every criterion runs at its stated instance count and
//! tolerance (zero tolerance: exact arithmetic throughout) and prints one
//! PASS/FAIL line.

use ccx_core::campaigns::{run_campaign, CampaignConfig};

fn cfg(instances: usize) -> CampaignConfig {
    CampaignConfig { seed: 20260808, instances, ..Default::default() }
}

fn criterion(label: &str, pass: bool) -> bool {
    println!("ACCEPTANCE {label} {}", if pass { "PASS" } else { "FAIL" });
    pass
}

#[test]
fn criterion_01_structure_relation_soundness() {
    // 200 random quadratic complexes: boundary output passes the structure
    // relation at radius <= 2 eps; Poincare inputs contract at 4 eps.
    let report = run_campaign("3.1", &cfg(200)).unwrap();
    print!("{}", report.render());
    assert!(criterion("01 structure-relation soundness (200 instances)", report.all_pass()));
}

#[test]
fn criterion_02_thom_thickening_roundtrip() {
    // Alternating instances: 100 Poincare pairs with the 11-radius
    // retraction carrying the boundary structure back exactly, and 100
    // complexes with both 3-radius equivalences replaying.
    let report = run_campaign("3.2", &cfg(200)).unwrap();
    print!("{}", report.render());
    assert!(criterion("02 thom/thickening roundtrip (100 + 100)", report.all_pass()));
}

#[test]
fn criterion_03_union_bounds() {
    // 100 adjoining Poincare cobordism pairs: the union certifies
    // Poincare within 100 eps over the -100 eps shrinking, connectivity
    // within 100 eps, and the propagated radius stays within 2 eps.
    let poincare = run_campaign("2.8", &cfg(100)).unwrap();
    print!("{}", poincare.render());
    let connected = run_campaign("3.5", &cfg(100)).unwrap();
    print!("{}", connected.render());
    assert!(criterion(
        "03 union bounds (100 + 100)",
        poincare.all_pass() && connected.all_pass()
    ));
}

#[test]
fn criterion_04_cone_criterion_both_directions() {
    // 100 fixtures: contraction -> weak equivalence at 2 eps; weak
    // equivalence -> contraction at 3 eps over the -2 eps shrinking;
    // composition stays within the additive bound.
    let report = run_campaign("2.4", &cfg(100)).unwrap();
    print!("{}", report.render());
    assert!(criterion("04 cone criterion both directions (100)", report.all_pass()));
}

#[test]
fn criterion_05_folding_and_projective_reduction() {
    // 100 connected fixtures: 12-radius folds for complexes, 24-radius for
    // pair boundaries, exact idempotents and replayable stable
    // isomorphisms at dimension one.
    let report = run_campaign("3.4", &cfg(100)).unwrap();
    print!("{}", report.render());
    assert!(criterion("05 folding and projective reduction (100)", report.all_pass()));
}

#[test]
fn criterion_06_constant_audits() {
    // Decorations scale by exactly 20000 under the projective-to-free map
    // and by exactly 150000(n+2) under the connecting map; the ledger
    // audits every run.
    assert_eq!(ccx_core::ltheory::ALPHA, 20_000);
    assert_eq!(ccx_core::ltheory::kappa(1), 450_000);
    let report = run_campaign("constants", &cfg(50)).unwrap();
    print!("{}", report.render());
    assert!(criterion("06 constant audits (alpha, kappa)", report.all_pass()));
}

#[test]
fn criterion_07_excision_stability() {
    // 50 split fixtures: excise, include back, and certify agreement with
    // the inclusion-induced relax-control through the comparison map.
    let report = run_campaign("6.exc", &cfg(50)).unwrap();
    print!("{}", report.render());
    assert!(criterion("07 excision stability (50)", report.all_pass()));
}

#[test]
fn criterion_08_stably_exact_composites() {
    // Rotation over the six parts: 300 instances give 50 of each
    // composite-zero witness and 50 (>= 20) of each lift roundtrip.
    let report = run_campaign("5.2", &cfg(300)).unwrap();
    print!("{}", report.render());
    assert!(criterion(
        "08 stably-exact composites (50 x witnesses, >= 20 x lifts)",
        report.all_pass()
    ));
}

#[test]
fn criterion_09_signature() {
    // Fixed values (hyperbolic 0, rank-one 1, rank-eight even form 8) plus
    // signature agreement across 50 verified Poincare cobordism pairs.
    let report = run_campaign("10.1", &cfg(50)).unwrap();
    print!("{}", report.render());
    assert!(criterion("09 signature values and cobordism invariance (50)", report.all_pass()));
}

#[test]
fn criterion_01_and_03_hold_over_modular_coefficients() {
    // The same soundness and union-bound criteria over Z mod 5.
    let cfg = CampaignConfig {
        seed: 20260808,
        instances: 50,
        ring: ccx_core::ring::Ring::Mod(5),
        ..Default::default()
    };
    let boundary = run_campaign("3.1", &cfg).unwrap();
    print!("{}", boundary.render());
    let union = run_campaign("2.8", &cfg).unwrap();
    print!("{}", union.render());
    assert!(criterion(
        "01+03 modular coefficients (50 + 50 over Z mod 5)",
        boundary.all_pass() && union.all_pass()
    ));
}

#[test]
fn criterion_10_determinism_and_replay() {
    // Identical seeds give byte-identical reports; emitted certificates
    // replay with matrix arithmetic only.
    let first = run_campaign("2.8", &cfg(25)).unwrap().render();
    let second = run_campaign("2.8", &cfg(25)).unwrap().render();
    let deterministic = first == second;

    // Build a document carrying certificates for a Poincare structure,
    // emit it, reparse it, and replay solver-free.
    let q = ccx_core::fixtures::hyperbolic_form(ccx_core::ring::Ring::Int);
    let over = q.carrier.space.full_subset();
    let cert = ccx_core::quad::poincare_certify_structure(&q, &over).unwrap();
    let mut doc = ccx_core::ccx::CcxDocument {
        ring: Some(ccx_core::ring::RingWithInvolution::new(ccx_core::ring::Ring::Int)),
        ..Default::default()
    };
    doc.spaces.insert("X".into(), q.carrier.space.clone());
    doc.subsets.insert("W".into(), over);
    doc.complexes.insert("C".into(), q.carrier.clone());
    doc.structures.insert("psi".into(), ("C".into(), q.clone()));
    doc.certificates.insert(
        "gamma".into(),
        ccx_core::ccx::CertBlock::Contraction {
            target: ccx_core::ccx::CertTarget::DualityCone("psi".into()),
            cert,
        },
    );
    let text = ccx_core::ccx::emit_ccx(&doc);
    let reparsed = ccx_core::ccx::parse_ccx(&text).expect("emitted text parses");
    let replay_ok = reparsed.replay_all().iter().all(|(_, r)| r.is_ok());
    let text2 = ccx_core::ccx::emit_ccx(&reparsed);
    let canonical = text == text2;

    assert!(criterion(
        "10 determinism and solver-free replay",
        deterministic && replay_ok && canonical
    ));
}
