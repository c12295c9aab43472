//! End-to-end CLI runs against the committed fixture files.

use ccx_core::cli::run_command;

fn argv(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn e8_fixture_checks_and_has_signature_eight() {
    let path = fixture("e8.ccx");
    let out = run_command(&argv(&["check", "--in", &path]));
    assert_eq!(out.exit_code, 0, "{}", out.report);
    let out = run_command(&argv(&["signature", "--in", &path, "--structure", "e8"]));
    assert_eq!(out.exit_code, 0, "{}", out.report);
    assert_eq!(out.report.trim(), "8");
}

#[test]
fn boundary_and_thicken_emit_parseable_documents() {
    let path = fixture("e8.ccx");
    let dir = std::env::temp_dir().join("ccx_cli_files");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("e8_thickened.ccx");
    let out = run_command(&argv(&[
        "thicken",
        "--in",
        &path,
        "--structure",
        "e8",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    assert_eq!(out.exit_code, 0, "{}", out.report);
    let emitted = std::fs::read_to_string(&out_path).unwrap();
    let doc = ccx_core::ccx::parse_ccx(&emitted).expect("emitted document parses");
    assert!(doc.pairs.contains_key("e8_thickening"));
    // The emitted document checks clean.
    let out = run_command(&argv(&["check", "--in", out_path.to_str().unwrap()]));
    assert_eq!(out.exit_code, 0, "{}", out.report);
}

#[test]
fn mv_subcommand_consumes_a_full_splitting_document() {
    use ccx_core::complex::{ChainMap, ControlledComplex};
    use ccx_core::module::{GeomModule, GeomMorphism};
    use ccx_core::quad::{Cobordism, QuadPair, QuadStructure};
    use ccx_core::rat::rat;
    use ccx_core::ring::{Ring, RingWithInvolution};

    // Two-point splitting: lagrangian null-pairs doubled along a
    // hyperbolic interface piece.
    let rwi = RingWithInvolution::new(Ring::Int);
    let sp = ccx_core::space::ControlSpace::line(2, rat(1));
    let qm = GeomModule::new(rwi, sp.clone(), vec![1, 1]).unwrap();
    let q_cx =
        ControlledComplex::new(rwi, sp.clone(), 0, vec![qm.clone()], vec![], None, rat(0));
    let psi0 = GeomMorphism::new(qm.clone(), qm.clone(), [((0, 1), 1)].into(), rat(0));
    let piece = QuadStructure {
        n: 0,
        carrier: q_cx.clone(),
        psis: vec![[(0i64, psi0)].into()],
        radius: rat(0),
    };
    let lag = |pt: usize| {
        let lm = GeomModule::new(rwi, sp.clone(), vec![pt]).unwrap();
        ControlledComplex::new(rwi, sp.clone(), 0, vec![lm], vec![], None, rat(0))
    };
    let (l_a, l_b) = (lag(0), lag(1));
    let proj = |target: &ControlledComplex| {
        let m = GeomMorphism::new(qm.clone(), target.module_at(0), [((0, 1), 1)].into(), rat(1));
        ChainMap::new(q_cx.clone(), target.clone(), [(0i64, m)].into(), rat(1))
    };
    let left_pair =
        QuadPair { f: proj(&l_a), delta: Vec::new(), psi: piece.neg(), radius: rat(1) };
    let right_pair =
        QuadPair { f: proj(&l_b), delta: Vec::new(), psi: piece.clone(), radius: rat(1) };
    let empty_q = QuadStructure::zero(0, ControlledComplex::empty(rwi, sp.clone()));
    let left_cob = Cobordism::try_new(left_pair.clone(), empty_q.clone(), piece.clone()).unwrap();
    let right_cob = Cobordism::try_new(right_pair.clone(), piece.clone(), empty_q).unwrap();
    let double = ccx_core::union::union(&left_cob, &right_cob).unwrap();
    let input = QuadStructure {
        n: 1,
        carrier: double.pair.f.target.clone(),
        psis: double.pair.delta.clone(),
        radius: rat(2),
    };
    let glue = ccx_core::quad::trivial_cobordism(&input);

    // Serialize the whole witness as a document.
    let mut doc = ccx_core::ccx::CcxDocument {
        ring: Some(rwi),
        ..Default::default()
    };
    doc.spaces.insert("X".into(), sp.clone());
    doc.subsets.insert("A".into(), sp.subset_of(&[0, 1]));
    doc.subsets.insert("B".into(), sp.subset_of(&[1]));
    doc.subsets.insert("W".into(), sp.subset_of(&[1]));
    doc.subsets.insert("NONE".into(), sp.empty_subset());
    doc.complexes.insert("Q".into(), q_cx.clone());
    doc.complexes.insert("LA".into(), l_a.clone());
    doc.complexes.insert("LB".into(), l_b.clone());
    doc.complexes.insert("DBL".into(), input.carrier.clone());
    doc.complexes.insert(
        "SUMQ".into(),
        left_pair.psi.carrier.clone(),
    );
    doc.structures.insert("piece".into(), ("Q".into(), piece.clone()));
    doc.structures.insert("pieceneg".into(), ("Q".into(), piece.neg()));
    doc.structures.insert("input".into(), ("DBL".into(), input.clone()));
    doc.chainmaps.insert("fa".into(), ("Q".into(), "LA".into(), left_pair.f.clone()));
    doc.chainmaps.insert("fb".into(), ("Q".into(), "LB".into(), right_pair.f.clone()));
    doc.pairs.insert("ca".into(), ("fa".into(), "pieceneg".into(), left_pair.clone()));
    doc.pairs.insert("cb".into(), ("fb".into(), "piece".into(), right_pair.clone()));
    // Trivial glue cobordism blocks.
    let glue_psi = glue.pair.psi.clone();
    doc.complexes.insert("GLS".into(), glue_psi.carrier.clone());
    doc.complexes.insert("GLT".into(), glue.pair.f.target.clone());
    doc.structures.insert("glb".into(), ("GLS".into(), glue_psi));
    doc.chainmaps.insert(
        "glf".into(),
        ("GLS".into(), "GLT".into(), glue.pair.f.clone()),
    );
    doc.pairs.insert("glp".into(), ("glf".into(), "glb".into(), glue.pair.clone()));
    doc.structures.insert("inputL".into(), ("DBL".into(), glue.left.clone()));
    doc.structures.insert("inputR".into(), ("DBL".into(), glue.right.clone()));
    doc.cobordisms.insert(
        "glue".into(),
        ("glp".into(), "inputL".into(), "inputR".into(), glue.clone()),
    );
    doc.reps.insert(
        "R".into(),
        ccx_core::ccx::RepBlock {
            structure: "input".into(),
            dec_n: 1,
            delta: rat(2),
            eps: rat(2),
            zone: "NONE".into(),
            poincare: None,
            connectivity: None,
        },
    );
    let dir = std::env::temp_dir().join("ccx_mv_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("split.ccx");
    std::fs::write(&path, ccx_core::ccx::emit_ccx(&doc)).unwrap();

    // The emitted document parses and checks clean end to end.
    let out = run_command(&argv(&["check", "--in", path.to_str().unwrap()]));
    assert_eq!(out.exit_code, 0, "{}", out.report);
    let out = run_command(&argv(&[
        "mv",
        "--in",
        path.to_str().unwrap(),
        "--rep",
        "R",
        "--piece",
        "piece",
        "--left-pair",
        "ca",
        "--right-pair",
        "cb",
        "--glue",
        "glue",
        "--a",
        "A",
        "--b",
        "B",
        "--w",
        "W",
    ]));
    assert_eq!(out.exit_code, 0, "{}", out.report);
    assert!(out.report.contains("MV R piece piece rank 2"), "{}", out.report);
    assert!(out.report.contains("LEDGER mv_boundary"), "{}", out.report);
}

#[test]
fn connect_subcommand_runs_the_pipeline_from_a_document() {
    use ccx_core::rat::rat;
    use ccx_core::ring::Ring;

    // A 1-dimensional Poincare representative: the boundary structure of a
    // middle-dimensional form, serialized with its rep block.
    let base = ccx_core::fixtures::concentrated_form(Ring::Int, 2, &[(0, 1, 1)], 2);
    let data = ccx_core::boundary::boundary_complex(&base);
    let sp = data.structure.carrier.space.clone();
    let mut doc = ccx_core::ccx::CcxDocument {
        ring: Some(ccx_core::ring::RingWithInvolution::new(Ring::Int)),
        ..Default::default()
    };
    doc.spaces.insert("X".into(), sp.clone());
    doc.subsets.insert("NONE".into(), sp.empty_subset());
    doc.complexes.insert("BD".into(), data.structure.carrier.clone());
    doc.structures.insert("bdpsi".into(), ("BD".into(), data.structure.clone()));
    doc.reps.insert(
        "R".into(),
        ccx_core::ccx::RepBlock {
            structure: "bdpsi".into(),
            dec_n: 1,
            delta: rat(1),
            eps: data.structure.radius.clone(),
            zone: "NONE".into(),
            poincare: None,
            connectivity: None,
        },
    );
    let dir = std::env::temp_dir().join("ccx_connect_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rep.ccx");
    std::fs::write(&path, ccx_core::ccx::emit_ccx(&doc)).unwrap();
    let out_path = dir.join("connected.ccx");
    let out = run_command(&argv(&[
        "connect",
        "--in",
        path.to_str().unwrap(),
        "--rep",
        "R",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    assert_eq!(out.exit_code, 0, "{}", out.report);
    assert!(out.report.contains("LEDGER connecting_boundary"), "{}", out.report);
    assert!(out.report.contains("CONNECT R n 0 rank 0"), "{}", out.report);
    // The emitted document parses and checks clean.
    let emitted = std::fs::read_to_string(&out_path).unwrap();
    let doc2 = ccx_core::ccx::parse_ccx(&emitted).unwrap();
    assert!(doc2.structures.contains_key("R_connect"));
}
