//! Geometric subcomplexes and quotients of quadratic complexes, the
//! comparison of representatives agreeing away from a zone, excision, and
//! the Mayer-Vietoris boundary on supplied splitting witnesses.

use crate::complex::{geometric_quotient, GeometricQuotient};
use crate::homotopy::{replay_contraction, ContractionCert, ConnectivityCert};
use crate::ltheory::{DecorationLedger, Decorations, LClassRep};
use crate::module::GeomMorphism;
use crate::quad::{Cobordism, QuadPair, QuadStructure};
use crate::rat::{rat, Rat};
use crate::space::Subset;
use std::collections::BTreeMap;

/// Quotient of a quadratic complex by a geometric subcomplex: the
/// projection pushes the structure forward; the induced cobordism is the
/// pushforward cobordism of the projection.
#[derive(Debug, Clone)]
pub struct StructureQuotient {
    pub split: GeometricQuotient,
    pub quotient: QuadStructure,
    pub cobordism: Cobordism,
}

pub fn quotient_structure(
    q: &QuadStructure,
    sub_indices: &BTreeMap<i64, Vec<usize>>,
) -> Result<StructureQuotient, crate::complex::QuotientError> {
    let split = geometric_quotient(&q.carrier, sub_indices)?;
    let quotient = q.pushforward(&split.projection);
    let (_, cobordism) = crate::quad::pushforward_with_cobordism(&split.projection, q);
    Ok(StructureQuotient { split, quotient, cobordism })
}

/// The skeletal subcomplex of Example-style cutoffs:
/// `C'_r = C_r(Y^{(n+l-r) delta})`.
pub fn skeletal_subcomplex(
    q: &QuadStructure,
    y: &Subset,
    delta: &Rat,
    l: i64,
) -> Result<StructureQuotient, crate::complex::QuotientError> {
    assert!(*delta >= q.radius, "cutoff spacing must dominate the radius");
    let n = q.n;
    let mut sel: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for r in q.carrier.lo()..=q.carrier.hi() {
        let m = q.carrier.module_at(r);
        let zone = y.neighborhood(&(rat((n + l - r) as i128) * delta.clone()));
        sel.insert(
            r,
            (0..m.rank()).filter(|&i| zone.contains(m.points[i])).collect(),
        );
    }
    quotient_structure(q, &sel)
}

/// Extracts the quotient connectivity witness from the parent's witness by
/// block compression (exact when the duality image condition holds); falls
/// back to a fresh solver search at the same budget.
pub fn quotient_connectivity(
    parent: &QuadStructure,
    parent_conn: &ConnectivityCert,
    sq: &StructureQuotient,
) -> Option<ConnectivityCert> {
    let cone_parent = crate::complex::mapping_cone(&parent.duality_map());
    let cone_quotient = crate::complex::mapping_cone(&sq.quotient.duality_map());
    // The projection on cones: quotient blocks of C and of the dual.
    let h = &parent_conn.h;
    // Compression indices: degree 0 of the cone is C_0 (+) dual part, and
    // the quotient keeps the complement rows/cols.
    let parent_m0 = cone_parent.module_at(0);
    let parent_m1 = cone_parent.module_at(1);
    let q_m0 = cone_quotient.module_at(0);
    let q_m1 = cone_quotient.module_at(1);
    // Identify kept indices by matching located basis order: the quotient
    // modules are sub-lists of the parent modules.
    let keep0 = match_sublist(&parent_m0.points, &q_m0.points)?;
    let keep1 = match_sublist(&parent_m1.points, &q_m1.points)?;
    let compressed = h.compress(&keep1, &keep0, q_m1, q_m0);
    let cert = ConnectivityCert { h: compressed, radius: parent_conn.radius.clone() };
    if crate::homotopy::replay_connectivity(&cone_quotient, &cert).is_ok() {
        return Some(cert);
    }
    crate::homotopy::check_connected(&cone_quotient, &sq.quotient.radius)
}

/// Greedy order-preserving sublist matching on located points.
fn match_sublist(parent: &[usize], sub: &[usize]) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    let mut i = 0usize;
    for &want in sub {
        loop {
            if i >= parent.len() {
                return None;
            }
            if parent[i] == want {
                out.push(i);
                i += 1;
                break;
            }
            i += 1;
        }
    }
    Some(out)
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CompareError {
    #[error("representatives do not agree away from the zone: {0}")]
    Disagree(&'static str),
    #[error("quotient construction failed")]
    Quotient,
    #[error("no contraction over the enlarged complement")]
    NoContraction,
}

/// Comparison of two representatives that agree away from the zone: both
/// quotient onto the same complex by the skeletal cutoff, and the two
/// induced cobordisms certify equality over the enlarged zone.
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub left: StructureQuotient,
    pub right: StructureQuotient,
    pub enlarged_zone: Subset,
    pub left_poincare: ContractionCert,
    pub right_poincare: ContractionCert,
}

pub fn compare_classes(
    a: &LClassRep,
    b: &LClassRep,
) -> Result<CompareOutcome, CompareError> {
    let n = a.dec.n;
    let y = &a.dec.zone;
    let eps = a.structure.radius.clone();
    let four_eps = rat(4) * eps.clone();
    let away = y.neighborhood(&four_eps).complement();
    // Hypotheses: identical module restrictions away from Y; identical
    // differential and structure entries away from Y^{4 eps}, compared
    // through the shared away-part sub-bases (the radius margin keeps all
    // restricted entries inside the shared part).
    let away_sel = |m: &crate::module::GeomMorphism, of_source: bool| -> Vec<usize> {
        let module = if of_source { &m.source } else { &m.target };
        (0..module.rank()).filter(|&i| away.contains(module.points[i])).collect()
    };
    let compare_away =
        |fa: &crate::module::GeomMorphism, fb: &crate::module::GeomMorphism| -> bool {
            let (sa, ta) = (away_sel(fa, true), away_sel(fa, false));
            let (sb, tb) = (away_sel(fb, true), away_sel(fb, false));
            // Restricted entries must stay inside the away part.
            let contained = |f: &crate::module::GeomMorphism, srows: &[usize]| {
                f.restrict(&away)
                    .entries()
                    .all(|(row, _, _)| srows.contains(&row))
            };
            if !contained(fa, &ta) || !contained(fb, &tb) {
                return false;
            }
            let (ra, _) = fa.source.restrict_to(&away);
            let (ta_m, _) = fa.target.restrict_to(&away);
            let (rb, _) = fb.source.restrict_to(&away);
            let (tb_m, _) = fb.target.restrict_to(&away);
            if ra.points != rb.points || ta_m.points != tb_m.points {
                return false;
            }
            fa.compress(&ta, &sa, ta_m, ra) == fb.compress(&tb, &sb, tb_m, rb)
        };
    for r in a.structure.carrier.lo().min(b.structure.carrier.lo())
        ..=a.structure.carrier.hi().max(b.structure.carrier.hi())
    {
        let ma = a.structure.carrier.module_at(r);
        let mb = b.structure.carrier.module_at(r);
        let pa: Vec<usize> = ma
            .points
            .iter()
            .copied()
            .filter(|&p| !y.contains(p))
            .collect();
        let pb: Vec<usize> = mb
            .points
            .iter()
            .copied()
            .filter(|&p| !y.contains(p))
            .collect();
        if pa != pb {
            return Err(CompareError::Disagree("module restrictions"));
        }
        if !compare_away(
            &a.structure.carrier.diff_at(r),
            &b.structure.carrier.diff_at(r),
        ) {
            return Err(CompareError::Disagree("differentials"));
        }
    }
    for s in 0..a.structure.psis.len().max(b.structure.psis.len()) {
        for r in a.structure.carrier.lo() - 2..=a.structure.carrier.hi() + 2 {
            if !compare_away(&a.structure.psi_at(s, r), &b.structure.psi_at(s, r)) {
                return Err(CompareError::Disagree("structures"));
            }
        }
    }
    // Quotient both by the skeletal cutoff C_r(Y^{(n+1-r) 4 eps}).
    let cut = |rep: &LClassRep| -> Result<StructureQuotient, CompareError> {
        let mut sel: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for r in rep.structure.carrier.lo()..=rep.structure.carrier.hi() {
            let m = rep.structure.carrier.module_at(r);
            let zone = y.neighborhood(&(rat((n + 1 - r) as i128) * four_eps.clone()));
            sel.insert(
                r,
                (0..m.rank()).filter(|&i| zone.contains(m.points[i])).collect(),
            );
        }
        quotient_structure(&rep.structure, &sel).map_err(|_| CompareError::Quotient)
    };
    let left = cut(a)?;
    let right = cut(b)?;
    let enlarged_zone = y.neighborhood(&(rat((n + 3) as i128) * four_eps.clone()));
    // The restricted contraction certifies Poincare over the complement of
    // the enlarged zone for each quotient.
    let certify = |rep: &LClassRep, sq: &StructureQuotient| -> Result<ContractionCert, CompareError> {
        let over = enlarged_zone.complement();
        let cone = crate::complex::mapping_cone(&sq.quotient.duality_map());
        // Restrict the parent's contraction when available; otherwise solve.
        if let Some(gamma) = &rep.poincare {
            let parent_cone = crate::complex::mapping_cone(&rep.structure.duality_map());
            let trimmed: BTreeMap<i64, GeomMorphism> = gamma
                .gamma
                .iter()
                .filter_map(|(&r, m)| {
                    let src = cone.module_at(r);
                    let tgt = cone.module_at(r + 1);
                    let keep_src = match_sublist(&parent_cone.module_at(r).points, &src.points)?;
                    let keep_tgt =
                        match_sublist(&parent_cone.module_at(r + 1).points, &tgt.points)?;
                    Some((r, m.compress(&keep_tgt, &keep_src, tgt, src)))
                })
                .collect();
            let cert = ContractionCert {
                gamma: trimmed,
                radius: gamma.radius.clone(),
                over: over.clone(),
            };
            if replay_contraction(&cone, &cert).is_ok() {
                return Ok(cert);
            }
        }
        crate::homotopy::find_contraction(&cone, &(rat(4) * rep.structure.radius.clone()), &over)
            .ok_or(CompareError::NoContraction)
    };
    let left_poincare = certify(a, &left)?;
    let right_poincare = certify(b, &right)?;
    if left.quotient.carrier != right.quotient.carrier
        || left.quotient.psis != right.quotient.psis
    {
        return Err(CompareError::Disagree("quotients"));
    }
    Ok(CompareOutcome { left, right, enlarged_zone, left_poincare, right_poincare })
}

/// Support audit for restricted morphisms: every entry starting over
/// `B (+) N^gamma` lands over `B (+) N^{max(gamma+delta, 2 delta)}`.
pub fn restriction_support_audit(
    f: &GeomMorphism,
    b_set: &Subset,
    n_set: &Subset,
    gamma: &Rat,
) -> bool {
    let delta = f.tight_radius();
    let from = b_set.union(&n_set.neighborhood(gamma));
    let bound = crate::rat::rat_max(gamma.clone() + delta.clone(), rat(2) * delta);
    let to = b_set.union(&n_set.neighborhood(&bound));
    let restricted = f.restrict(&from);
    let ok = restricted
        .entries()
        .all(|(row, _, _)| to.contains(f.target.points[row]));
    ok
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ExcisionError {
    #[error("the two closed parts do not cover the space")]
    NotCovering,
    #[error("quotient construction failed")]
    Quotient,
    #[error("excised representative lost a required certificate: {0}")]
    Cert(&'static str),
}

/// Excision: quotient by the geometric subcomplex supported near `B`, with
/// cutoff `C'_r = C_r(B (+) N^{(n+2-r) 4 eps})`.
#[derive(Debug, Clone)]
pub struct ExcisionOutput {
    pub quotient: StructureQuotient,
    pub rep: LClassRep,
}

pub fn excision(
    rep: &LClassRep,
    a_set: &Subset,
    b_set: &Subset,
    ledger: &mut DecorationLedger,
) -> Result<ExcisionOutput, ExcisionError> {
    let space_full = rep.structure.carrier.space.full_subset();
    if a_set.union(b_set) != space_full {
        return Err(ExcisionError::NotCovering);
    }
    let n_set = a_set.intersect(b_set);
    let n = rep.dec.n;
    let eps = rep.structure.radius.clone();
    let four_eps = rat(4) * eps.clone();
    let mut sel: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for r in rep.structure.carrier.lo()..=rep.structure.carrier.hi() {
        let m = rep.structure.carrier.module_at(r);
        let zone = b_set.union(&n_set.neighborhood(&(rat((n + 2 - r) as i128) * four_eps.clone())));
        sel.insert(
            r,
            (0..m.rank()).filter(|&i| zone.contains(m.points[i])).collect(),
        );
    }
    let quotient = quotient_structure(&rep.structure, &sel)
        .map_err(|_| ExcisionError::Quotient)?;
    let new_zone = a_set.intersect(&n_set.neighborhood(&(rat((n + 5) as i128) * four_eps.clone())));
    let dec = Decorations {
        n,
        delta: rep.dec.delta.clone(),
        eps: rep.dec.eps.clone(),
        zone: new_zone.clone(),
        family: Vec::new(),
    };
    ledger.record("excision", &rep.dec, &dec, 1);
    let mut out = LClassRep {
        structure: QuadStructure {
            radius: rep.structure.radius.clone(),
            ..quotient.quotient.clone()
        },
        dec,
        connectivity: None,
        poincare: None,
        k0_witnesses: Vec::new(),
    };
    out.connectivity = rep
        .connectivity
        .as_ref()
        .and_then(|conn| quotient_connectivity(&rep.structure, conn, &quotient));
    let over = out.dec.zone.complement();
    out.poincare = crate::quad::poincare_certify_structure(&out.structure, &over);
    if out.poincare.is_none() {
        return Err(ExcisionError::Cert("duality contraction over the excised zone"));
    }
    Ok(ExcisionOutput { quotient, rep: out })
}

/// Splitting witness consumed by the Mayer-Vietoris boundary: two pairs
/// over the thickened closed parts with common projective boundary piece,
/// plus free replacements of the piece on each side, plus the cobordism
/// from the input to the union of the two pairs.
#[derive(Debug, Clone)]
pub struct SplittingWitness {
    pub piece: QuadStructure,
    pub left_pair: QuadPair,
    pub right_pair: QuadPair,
    /// Free replacements of the piece over each thickened part.
    pub left_free: crate::k0::VanishingWitness,
    pub right_free: crate::k0::VanishingWitness,
    /// The glued cobordism from the input structure to the union.
    pub glue: Cobordism,
    pub glue_poincare: Option<crate::quad::PairPoincareCert>,
    pub radius: Rat,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MvError {
    #[error("splitting witness fails verification: {0}")]
    Witness(&'static str),
    #[error("ledger constant violated")]
    Ledger,
}

/// Verifies a splitting witness and returns the boundary class it induces.
pub fn mv_boundary(
    rep: &LClassRep,
    witness: &SplittingWitness,
    a_set: &Subset,
    b_set: &Subset,
    w_set: &Subset,
    ledger: &mut DecorationLedger,
) -> Result<LClassRep, MvError> {
    witness.piece.check().map_err(|_| MvError::Witness("piece structure"))?;
    witness.left_pair.check().map_err(|_| MvError::Witness("left pair"))?;
    witness.right_pair.check().map_err(|_| MvError::Witness("right pair"))?;
    witness.glue.pair.check().map_err(|_| MvError::Witness("glue cobordism"))?;
    // Boundary shape: the left pair bounds -piece, the right pair bounds
    // +piece (adjoining along the piece).
    if witness.left_pair.psi.psis != witness.piece.neg().psis {
        return Err(MvError::Witness("left boundary must be the negated piece"));
    }
    if witness.right_pair.psi.psis != witness.piece.psis {
        return Err(MvError::Witness("right boundary must be the piece"));
    }
    // The glue must start at the input structure.
    if witness.glue.left.psis != rep.structure.psis {
        return Err(MvError::Witness("glue does not start at the input"));
    }
    witness
        .left_free
        .verify(&witness.piece.carrier)
        .map_err(|_| MvError::Witness("left free replacement"))?;
    witness
        .right_free
        .verify(&witness.piece.carrier)
        .map_err(|_| MvError::Witness("right free replacement"))?;
    if let Some(cert) = &witness.glue_poincare {
        crate::quad::replay_pair_poincare(&witness.glue.pair, cert)
            .map_err(|_| MvError::Witness("glue Poincare certificate"))?;
    }
    // Output decorations: kappa is replaced by kappa + 4(n+5) in the
    // Mayer-Vietoris regime.
    let n = rep.dec.n;
    let factor = crate::ltheory::kappa(n) + 4 * (n as i128 + 5);
    let dec = Decorations {
        n: n - 1,
        delta: rat(factor) * rep.dec.delta.clone(),
        eps: rat(factor) * rep.dec.eps.clone(),
        zone: w_set.clone(),
        family: vec![a_set.union(w_set), b_set.union(w_set)],
    };
    ledger.record("mv_boundary", &rep.dec, &dec, factor);
    let mut out = LClassRep {
        structure: QuadStructure { radius: dec.eps.clone(), ..witness.piece.clone() },
        dec,
        connectivity: None,
        poincare: None,
        k0_witnesses: vec![
            (a_set.union(w_set), witness.left_free.clone()),
            (b_set.union(w_set), witness.right_free.clone()),
        ],
    };
    let over = out.dec.zone.complement();
    out.poincare = crate::quad::poincare_certify_structure(&out.structure, &over);
    out.connectivity =
        crate::quad::connected_certify_structure(&out.structure, &out.structure.radius);
    Ok(out)
}

/// Inclusion-induced map on representatives supported in a part: the
/// relabeling is the identity; only the decorations change.
pub fn inclusion_induced(rep: &LClassRep, new_zone: &Subset) -> LClassRep {
    LClassRep {
        dec: Decorations { zone: new_zone.clone(), ..rep.dec.clone() },
        ..rep.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    use crate::complex::ControlledComplex;

    fn rep_on_line() -> LClassRep {
        // Two hyperbolic blocks at the two ends of a 6-point line.
        let sp = crate::space::ControlSpace::line(6, rat(1));
        let mk = |pt: usize| {
            let m = crate::module::GeomModule::new(
                crate::ring::RingWithInvolution::new(Ring::Int),
                std::sync::Arc::clone(&sp),
                vec![pt, pt],
            )
            .unwrap();
            let c = ControlledComplex::new(
                crate::ring::RingWithInvolution::new(Ring::Int),
                std::sync::Arc::clone(&sp),
                0,
                vec![m.clone()],
                vec![],
                None,
                rat(0),
            );
            let psi0 =
                GeomMorphism::new(m.clone(), m.clone(), [((0, 1), 1)].into(), rat(0));
            QuadStructure { n: 0, carrier: c, psis: vec![[(0i64, psi0)].into()], radius: rat(0) }
        };
        let q = mk(0).direct_sum(&mk(5));
        let mut rep = LClassRep {
            structure: q,
            dec: Decorations {
                n: 0,
                delta: rat(1),
                eps: rat(1),
                zone: sp.empty_subset(),
                family: Vec::new(),
            },
            connectivity: None,
            poincare: None,
            k0_witnesses: Vec::new(),
        };
        rep.certify().unwrap();
        rep
    }

    #[test]
    fn trivial_quotients() {
        let rep = rep_on_line();
        let q = &rep.structure;
        // Empty subcomplex: quotient is the whole thing.
        let sel: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let out = quotient_structure(q, &sel).unwrap();
        assert_eq!(out.quotient.carrier.total_rank(), q.carrier.total_rank());
        // Full subcomplex: quotient is empty.
        let full: BTreeMap<i64, Vec<usize>> = q
            .carrier
            .degrees()
            .map(|r| (r, (0..q.carrier.module_at(r).rank()).collect()))
            .collect();
        let out = quotient_structure(q, &full).unwrap();
        assert_eq!(out.quotient.carrier.total_rank(), 0);
        out.cobordism.pair.check().unwrap();
    }

    #[test]
    fn compare_identical_reps() {
        let rep = rep_on_line();
        let out = compare_classes(&rep, &rep).unwrap();
        assert_eq!(out.left.quotient.psis, out.right.quotient.psis);
    }

    #[test]
    fn compare_rejects_disagreement_away_from_zone() {
        let rep = rep_on_line();
        let mut other = rep.clone();
        // Flip a structure entry at the far end (outside the zone).
        other.structure = other.structure.neg();
        assert!(matches!(
            compare_classes(&rep, &other),
            Err(CompareError::Disagree(_))
        ));
    }

    #[test]
    fn excision_keeps_the_far_part() {
        let rep = rep_on_line();
        let sp = rep.structure.carrier.space.clone();
        let a_set = sp.subset_of(&[0, 1, 2, 3]);
        let b_set = sp.subset_of(&[3, 4, 5]);
        let mut ledger = DecorationLedger::default();
        let out = excision(&rep, &a_set, &b_set, &mut ledger).unwrap();
        // The block at point 5 is excised; the block at 0 survives.
        assert_eq!(out.rep.structure.carrier.total_rank(), 2);
        assert!(out.rep.verify().is_ok());
        // Identity-like when the support is away from B entirely.
        let far = excision(
            &LClassRep {
                structure: {
                    let m = crate::module::GeomModule::new(
                        crate::ring::RingWithInvolution::new(Ring::Int),
                        std::sync::Arc::clone(&sp),
                        vec![0, 0],
                    )
                    .unwrap();
                    let c = ControlledComplex::new(
                        crate::ring::RingWithInvolution::new(Ring::Int),
                        std::sync::Arc::clone(&sp),
                        0,
                        vec![m.clone()],
                        vec![],
                        None,
                        rat(0),
                    );
                    let psi0 = GeomMorphism::new(
                        m.clone(),
                        m.clone(),
                        [((0, 1), 1)].into(),
                        rat(0),
                    );
                    QuadStructure {
                        n: 0,
                        carrier: c,
                        psis: vec![[(0i64, psi0)].into()],
                        radius: rat(0),
                    }
                },
                dec: Decorations {
                    n: 0,
                    delta: rat(1),
                    eps: rat(1),
                    zone: sp.empty_subset(),
                    family: Vec::new(),
                },
                connectivity: None,
                poincare: None,
                k0_witnesses: Vec::new(),
            },
            &a_set,
            &sp.subset_of(&[5]).union(&sp.subset_of(&[3, 4])),
            &mut ledger,
        );
        // B = {3,4,5} does not cover with A? A (+) B = all: fine; the far
        // block at 0 survives whole.
        let far = far.unwrap();
        assert_eq!(far.rep.structure.carrier.total_rank(), 2);
    }

    #[test]
    fn skeletal_quotient_and_cobordism_stay_connected() {
        // Skeletal cutoff of a connected structure: both the quotient
        // structure and the induced cobordism certify connected at the
        // input radius when the duality image condition holds.
        let rep = rep_on_line();
        let q = &rep.structure;
        let y = q.carrier.space.subset_of(&[0]);
        let out = skeletal_subcomplex(q, &y, &rat(1), 0).unwrap();
        out.quotient.check().unwrap();
        out.cobordism.pair.check().unwrap();
        let eps = rat(1);
        assert!(
            crate::quad::connected_certify_structure(&out.quotient, &eps).is_some(),
            "quotient structure is connected"
        );
        assert!(
            crate::quad::connected_certify_pair(&out.cobordism.pair, &eps).is_some(),
            "induced cobordism is connected"
        );
        // Parent connectivity compresses onto the quotient when shapes align.
        if let Some(conn) = &rep.connectivity {
            assert!(quotient_connectivity(q, conn, &out).is_some());
        }
    }

    #[test]
    fn mv_boundary_of_an_already_split_representative_is_zero() {
        // Input literally a direct sum of parts supported in A - N and
        // B - N: the splitting witness has the empty piece and the trivial
        // glue, and the boundary class is zero.
        let rep = rep_on_line();
        let sp = rep.structure.carrier.space.clone();
        let a_set = sp.subset_of(&[0, 1, 2, 3]);
        let b_set = sp.subset_of(&[3, 4, 5]);
        let w_set = sp.subset_of(&[3]);
        let empty_cx = ControlledComplex::empty(
            rep.structure.carrier.ring,
            sp.clone(),
        );
        let empty_piece = QuadStructure::zero(-1, empty_cx.clone());
        // Split the carrier into the two hyperbolic blocks.
        let block = |idx: &[usize]| {
            let m = rep.structure.carrier.module_at(0);
            let pts: Vec<usize> = idx.iter().map(|&i| m.points[i]).collect();
            let bm = crate::module::GeomModule {
                ring: m.ring,
                space: sp.clone(),
                points: pts,
            };
            let c = ControlledComplex::new(
                m.ring,
                sp.clone(),
                0,
                vec![bm.clone()],
                vec![],
                None,
                crate::rat::rat(0),
            );
            let psi0 = rep.structure.psi_at(0, 0).compress(idx, idx, bm.clone(), bm);
            QuadStructure {
                n: 0,
                carrier: c,
                psis: vec![[(0i64, psi0)].into()],
                radius: crate::rat::rat(0),
            }
        };
        let psi_a = block(&[0, 1]);
        let psi_b = block(&[2, 3]);
        let mk_closed_pair = |q: &QuadStructure| QuadPair {
            f: crate::complex::ChainMap::zero(empty_cx.clone(), q.carrier.clone()),
            delta: q.psis.clone(),
            psi: QuadStructure::zero(-1, empty_cx.clone()),
            radius: q.radius.clone(),
        };
        let left_pair = mk_closed_pair(&psi_a);
        let right_pair = mk_closed_pair(&psi_b);
        left_pair.check().unwrap();
        right_pair.check().unwrap();
        let glue = crate::quad::trivial_cobordism(&rep.structure);
        let witness = SplittingWitness {
            piece: empty_piece,
            left_pair,
            right_pair,
            left_free: crate::k0::identity_witness(&empty_cx),
            right_free: crate::k0::identity_witness(&empty_cx),
            glue,
            glue_poincare: None,
            radius: crate::rat::rat(0),
        };
        let mut ledger = DecorationLedger::default();
        let out = mv_boundary(&rep, &witness, &a_set, &b_set, &w_set, &mut ledger).unwrap();
        assert_eq!(out.structure.carrier.total_rank(), 0, "boundary of a split class is zero");
        assert!(ledger.all_within_bounds());
    }

    #[test]
    fn mv_boundary_replays_a_hand_built_two_point_splitting() {
        // Two-point space, A = {a, b}, B = {b}, N = {b}: the double of the
        // lagrangian null-pairs along a hyperbolic piece at the interface.
        let sp = crate::space::ControlSpace::line(2, rat(1));
        let rwi = crate::ring::RingWithInvolution::new(Ring::Int);
        let a_set = sp.subset_of(&[0, 1]);
        let b_set = sp.subset_of(&[1]);
        let w_set = sp.subset_of(&[1]);
        // The piece: hyperbolic form at the interface point.
        let qm = crate::module::GeomModule::new(rwi, sp.clone(), vec![1, 1]).unwrap();
        let q_cx = ControlledComplex::new(
            rwi,
            sp.clone(),
            0,
            vec![qm.clone()],
            vec![],
            None,
            rat(0),
        );
        let psi0 = GeomMorphism::new(qm.clone(), qm.clone(), [((0, 1), 1)].into(), rat(0));
        let piece = QuadStructure {
            n: 0,
            carrier: q_cx.clone(),
            psis: vec![[(0i64, psi0)].into()],
            radius: rat(0),
        };
        // Lagrangian targets on each side.
        let lag = |pt: usize| {
            let lm = crate::module::GeomModule::new(rwi, sp.clone(), vec![pt]).unwrap();
            ControlledComplex::new(rwi, sp.clone(), 0, vec![lm], vec![], None, rat(0))
        };
        let l_a = lag(0);
        let l_b = lag(1);
        let proj = |target: &ControlledComplex, col: usize| {
            let entries = [((0usize, col), 1i128)].into();
            let m = GeomMorphism::new(qm.clone(), target.module_at(0), entries, rat(1));
            crate::complex::ChainMap::new(q_cx.clone(), target.clone(), [(0i64, m)].into(), rat(1))
        };
        let left_pair = QuadPair {
            f: proj(&l_a, 1),
            delta: Vec::new(),
            psi: piece.neg(),
            radius: rat(1),
        };
        let right_pair = QuadPair {
            f: proj(&l_b, 1),
            delta: Vec::new(),
            psi: piece.clone(),
            radius: rat(1),
        };
        left_pair.check().unwrap();
        right_pair.check().unwrap();
        // The double: union of the two pairs along the piece.
        let empty_q = QuadStructure::zero(
            0,
            ControlledComplex::empty(rwi, sp.clone()),
        );
        let left_cob =
            crate::quad::Cobordism::try_new(left_pair.clone(), empty_q.clone(), piece.clone())
                .unwrap();
        let right_cob =
            crate::quad::Cobordism::try_new(right_pair.clone(), piece.clone(), empty_q).unwrap();
        let double = crate::union::union(&left_cob, &right_cob).unwrap();
        let input_structure = QuadStructure {
            n: 1,
            carrier: double.pair.f.target.clone(),
            psis: double.pair.delta.clone(),
            radius: rat(2),
        };
        input_structure.check().unwrap();
        let mut rep = LClassRep {
            structure: input_structure,
            dec: Decorations {
                n: 1,
                delta: rat(2),
                eps: rat(2),
                zone: sp.empty_subset(),
                family: Vec::new(),
            },
            connectivity: None,
            poincare: None,
            k0_witnesses: Vec::new(),
        };
        rep.certify().unwrap();
        let witness = SplittingWitness {
            piece: piece.clone(),
            left_pair,
            right_pair,
            left_free: crate::k0::identity_witness(&q_cx),
            right_free: crate::k0::identity_witness(&q_cx),
            glue: crate::quad::trivial_cobordism(&rep.structure),
            glue_poincare: None,
            radius: rat(2),
        };
        let mut ledger = DecorationLedger::default();
        let out = mv_boundary(&rep, &witness, &a_set, &b_set, &w_set, &mut ledger).unwrap();
        // The boundary class is the interface piece, and it replays.
        assert_eq!(out.structure.psis, piece.psis);
        out.verify().unwrap();
        assert!(out.poincare.is_some(), "the piece is Poincare over the window");
        assert!(ledger.all_within_bounds());
    }

    #[test]
    fn support_audit_accepts_bounded_morphisms() {
        let sp = crate::space::ControlSpace::line(5, rat(1));
        let m = crate::module::GeomModule::new(
            crate::ring::RingWithInvolution::new(Ring::Int),
            std::sync::Arc::clone(&sp),
            vec![0, 2, 4],
        )
        .unwrap();
        let f = GeomMorphism::new(
            m.clone(),
            m.clone(),
            [((0, 0), 1), ((1, 1), 2), ((2, 2), 3)].into(),
            rat(0),
        );
        let b_set = sp.subset_of(&[4]);
        let n_set = sp.subset_of(&[2]);
        assert!(restriction_support_audit(&f, &b_set, &n_set, &rat(1)));
    }
}
