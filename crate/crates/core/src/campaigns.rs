//! Seeded, reproducible property campaigns: each named property generates
//! random instances from a seed, runs the relevant construction, audits the
//! radius used against the stated bound, and reports one line per instance.

use crate::boundary::{boundary_complex, fold_complex, roundtrip_certify, thicken_thom_roundtrip, FoldMode};
use crate::complex::mapping_cone;
use crate::fixtures::{FixtureParams, Rng};
use crate::homotopy::{
    cone_contraction_from_weak_equiv, find_contraction, replay_contraction, replay_equivalence,
    weak_equiv_from_cone_contraction,
};
use crate::ltheory::{DecorationLedger, Decorations, LClassRep, ALPHA};
use crate::quad::QuadStructure;
use crate::rat::{format_rat, rat, ratio, Rat};
use crate::ring::Ring;
use crate::union::union;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub seed: u64,
    pub instances: usize,
    pub max_rank: usize,
    pub max_degree: i64,
    pub space_points: usize,
    pub ring: Ring,
    /// Fixed control space for every instance instead of seeded random
    /// spaces.
    pub space: Option<std::sync::Arc<crate::space::ControlSpace>>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 1,
            instances: 20,
            max_rank: 2,
            max_degree: 2,
            space_points: 4,
            ring: Ring::Int,
            space: None,
        }
    }
}

impl CampaignConfig {
    fn space(&self, rng: &mut Rng, params: &FixtureParams) -> std::sync::Arc<crate::space::ControlSpace> {
        match &self.space {
            Some(sp) => std::sync::Arc::clone(sp),
            None => crate::fixtures::random_space(rng, params),
        }
    }

    fn params(&self) -> FixtureParams {
        FixtureParams {
            ring: self.ring,
            space_points: self.space_points,
            max_rank: self.max_rank,
            max_degree: self.max_degree,
            coeff_bound: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceReport {
    pub index: usize,
    pub used: String,
    pub bound: String,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignReport {
    pub prop: String,
    pub instances: Vec<InstanceReport>,
}

impl CampaignReport {
    pub fn all_pass(&self) -> bool {
        !self.instances.is_empty() && self.instances.iter().all(|i| i.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for i in &self.instances {
            let _ = writeln!(
                out,
                "PROP {} INSTANCE {} RADIUS {}/{} {}{}",
                self.prop,
                i.index,
                i.used,
                i.bound,
                if i.pass { "PASS" } else { "FAIL" },
                if i.note.is_empty() { String::new() } else { format!(" # {}", i.note) }
            );
        }
        let _ = writeln!(
            out,
            "PROP {} SUMMARY {}/{} PASS",
            self.prop,
            self.instances.iter().filter(|i| i.pass).count(),
            self.instances.len()
        );
        out
    }
}

fn report(
    prop: &str,
    items: Vec<(usize, Rat, Rat, bool, String)>,
) -> CampaignReport {
    CampaignReport {
        prop: prop.to_string(),
        instances: items
            .into_iter()
            .map(|(index, used, bound, pass, note)| InstanceReport {
                index,
                used: format_rat(&used),
                bound: format_rat(&bound),
                pass,
                note,
            })
            .collect(),
    }
}

/// Generates a Poincare structure of dimension 0 or 2 with its radius.
fn poincare_instance(
    rng: &mut Rng,
    cfg: &CampaignConfig,
    params: &FixtureParams,
    two_dim: bool,
) -> QuadStructure {
    if !two_dim {
        let sp = cfg.space(rng, params);
        return crate::fixtures::random_poincare(rng, params, &sp);
    }
    // Middle-dimensional pairing at a random point of a random space,
    // pushed through an exact self-equivalence of the ambient complex.
    let sp = cfg.space(rng, params);
    let pt = rng.usize_below(sp.len());
    let m = crate::module::GeomModule::new(params.rwi(), sp.clone(), vec![pt, pt]).unwrap();
    let c = crate::complex::ControlledComplex::new(
        params.rwi(),
        sp.clone(),
        1,
        vec![m.clone()],
        vec![],
        None,
        rat(0),
    );
    let psi0 = crate::module::GeomMorphism::new(m.clone(), m, [((0usize, 1usize), 1i128)].into(), rat(0));
    let base = QuadStructure { n: 2, carrier: c, psis: vec![[(1i64, psi0)].into()], radius: rat(0) };
    let (g, _) = crate::fixtures::random_auto_equivalence(rng, params, &base.carrier, &rat(1));
    let out = base.pushforward(&g);
    debug_assert!(out.check().is_ok());
    out
}

/// Structure-relation soundness of the boundary construction plus the
/// contraction of the boundary of Poincare inputs.
pub fn campaign_boundary(cfg: &CampaignConfig) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut rng = Rng::new(cfg.seed);
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 30 {
        guard += 1;
        let mut r = rng.fork(guard as u64);
        // Alternate general quadratic complexes and Poincare inputs.
        let poincare_case = idx % 2 == 1;
        let (q, eps) = if poincare_case {
            let q = poincare_instance(&mut r, cfg, &params, idx % 4 == 3);
            let eps = crate::rat::rat_max(q.radius.clone(), rat(1));
            (q, eps)
        } else {
            let sp = cfg.space(&mut r, &params);
            let c = crate::fixtures::random_complex(&mut r, &params, &sp, &rat(1));
            let n = r.range(0, 2) as i64;
            let Some(q) = crate::fixtures::random_structure(&mut r, &c, n, &rat(1), 2) else {
                continue;
            };
            let eps = crate::rat::rat_max(q.radius.clone(), c.radius.clone());
            (q, eps)
        };
        let data = boundary_complex(&q);
        let bound = rat(2) * eps.clone();
        let ok_structure = data.structure.check().is_ok();
        let used = data
            .structure
            .psis
            .iter()
            .flat_map(|l| l.values())
            .map(|m| m.tight_radius())
            .fold(rat(0), crate::rat::rat_max);
        let mut pass = ok_structure && used <= bound;
        let mut note = String::new();
        if poincare_case && pass {
            let over = q.carrier.space.full_subset();
            match find_contraction(&data.complex, &(rat(4) * eps.clone()), &over) {
                Some(cert) => {
                    pass = replay_contraction(&data.complex, &cert).is_ok();
                    note = "boundary contraction found".into();
                }
                None => {
                    pass = false;
                    note = "no boundary contraction".into();
                }
            }
        }
        items.push((idx, used, bound, pass, note));
        idx += 1;
    }
    report("3.1", items)
}

/// Thom/thickening roundtrips: the 11-radius retraction on Poincare pairs
/// and the two 3-radius equivalences on complexes.
pub fn campaign_roundtrip(cfg: &CampaignConfig) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 30 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0xA11CE).fork(guard as u64);
        if idx % 2 == 0 {
            // Poincare pair: the thickening of a Poincare structure.
            let q = poincare_instance(&mut r, cfg, &params, idx % 4 == 2);
            let data = boundary_complex(&q);
            let pair = &data.thickening;
            let bound = rat(11) * pair.radius.clone();
            match roundtrip_certify(pair) {
                Ok(cert) => {
                    let ok = replay_equivalence(&cert.g, &cert.equivalence).is_ok();
                    let used = cert
                        .g
                        .degrees()
                        .map(|d| cert.g.map_at(d).tight_radius())
                        .fold(rat(0), crate::rat::rat_max);
                    items.push((idx, used, bound, ok, "retraction".into()));
                }
                Err(e) => items.push((idx, rat(0), bound, false, format!("{e}"))),
            }
        } else {
            let sp = cfg.space(&mut r, &params);
            let c = crate::fixtures::random_complex(&mut r, &params, &sp, &rat(1));
            let n = 1 + r.range(0, 1) as i64;
            let Some(q) = crate::fixtures::random_structure(&mut r, &c, n, &rat(1), 2) else {
                continue;
            };
            let eps = crate::rat::rat_max(q.radius.clone(), c.radius.clone());
            let bound = rat(3) * eps;
            match thicken_thom_roundtrip(&q) {
                Ok(rt) => {
                    let ok = replay_equivalence(&rt.f, &rt.f_cert).is_ok()
                        && replay_equivalence(&rt.f_prime, &rt.f_prime_cert).is_ok();
                    let used = rt
                        .f
                        .degrees()
                        .map(|d| rt.f.map_at(d).tight_radius())
                        .fold(rat(0), crate::rat::rat_max);
                    items.push((idx, used, bound, ok, "thicken-thom".into()));
                }
                Err(e) => items.push((idx, rat(0), bound, false, format!("{e}"))),
            }
        }
        idx += 1;
    }
    report("3.2", items)
}

/// Builds an adjoining pair of Poincare cobordisms from a Poincare
/// structure pushed along two exact self-equivalences.
fn adjoining_poincare_cobordisms(
    rng: &mut Rng,
    cfg: &CampaignConfig,
    params: &FixtureParams,
) -> Option<(crate::quad::Cobordism, crate::quad::Cobordism, Rat)> {
    let sp = cfg.space(rng, params);
    let q = crate::fixtures::random_poincare(rng, params, &sp);
    let (g1, _) = crate::fixtures::random_auto_equivalence(rng, params, &q.carrier, &rat(1));
    let (pushed1, c1) = crate::quad::pushforward_with_cobordism(&g1, &q);
    let (g2, _) =
        crate::fixtures::random_auto_equivalence(rng, params, &pushed1.carrier, &rat(1));
    let (_, c2) = crate::quad::pushforward_with_cobordism(&g2, &pushed1);
    let eps = crate::rat::rat_max(c1.pair.radius.clone(), c2.pair.radius.clone());
    Some((c1, c2, eps))
}

/// Union bounds: adjoining Poincare cobordisms glue to a cobordism that is
/// Poincare and connected within the 100-radius budget, and the union's
/// own radius stays within twice the inputs'.
pub fn campaign_union(cfg: &CampaignConfig, connected: bool) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 30 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0x2818).fork(guard as u64);
        let Some((c1, c2, eps)) = adjoining_poincare_cobordisms(&mut r, cfg, &params) else {
            continue;
        };
        let eps = crate::rat::rat_max(eps, rat(1));
        let glued = match union(&c1, &c2) {
            Ok(g) => g,
            Err(e) => {
                items.push((idx, rat(0), rat(2) * eps, false, format!("{e}")));
                idx += 1;
                continue;
            }
        };
        let radius_ok =
            glued.pair.check().is_ok() && glued.pair.radius <= rat(2) * eps.clone();
        let budget = rat(100) * eps.clone();
        let over = glued
            .pair
            .psi
            .carrier
            .space
            .full_subset()
            .neighborhood(&-(budget.clone()));
        let pass;
        let note;
        if connected {
            match crate::quad::connected_certify_pair(&glued.pair, &(rat(25) * eps.clone())) {
                Some(_) => {
                    pass = radius_ok;
                    note = "union connected".to_string();
                }
                None => {
                    pass = false;
                    note = "no connectivity witness".to_string();
                }
            }
        } else {
            match crate::quad::poincare_certify_pair(&glued.pair, &over) {
                Some(cert) => {
                    pass = radius_ok
                        && crate::quad::replay_pair_poincare(&glued.pair, &cert).is_ok();
                    note = "union Poincare".to_string();
                }
                None => {
                    pass = false;
                    note = "no Poincare witness".to_string();
                }
            }
        }
        items.push((idx, glued.pair.radius.clone(), rat(2) * eps, pass, note));
        idx += 1;
    }
    report(if connected { "3.5" } else { "2.8" }, items)
}

/// Cone criterion both ways at the stated budgets, plus the composition
/// bound for weak equivalences.
pub fn campaign_cone_criterion(cfg: &CampaignConfig) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 40 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0x24).fork(guard as u64);
        let sp = cfg.space(&mut r, &params);
        let c = crate::fixtures::random_complex(&mut r, &params, &sp, &rat(1));
        if c.is_empty_complex() {
            continue;
        }
        let (f, _) = crate::fixtures::random_auto_equivalence(&mut r, &params, &c, &rat(1));
        let eps = crate::rat::rat_max(f.radius.clone(), c.radius.clone());
        let over = sp.full_subset();
        let cone = mapping_cone(&f);
        let Some(gamma) = find_contraction(&cone, &eps, &over) else {
            items.push((idx, rat(0), eps, false, "no cone contraction".into()));
            idx += 1;
            continue;
        };
        // Direction 1: contraction -> weak equivalence at twice the radius.
        let weak = weak_equiv_from_cone_contraction(&f, &gamma);
        let ok1 = replay_equivalence(&f, &weak).is_ok();
        // Direction 2: back to a contraction at three times, over the
        // shrunken subset.
        let back = cone_contraction_from_weak_equiv(&f, &weak);
        let ok2 = back
            .map(|cert| replay_contraction(&cone, &cert).is_ok())
            .unwrap_or(false);
        // Composition bound: compose the weak equivalence with itself on
        // the nose and replay.
        let e1 = crate::homotopy::Equivalence { map: f.clone(), cert: weak.clone() };
        let comp = crate::homotopy::compose_weak_equivalences(&e1, &e1);
        let ok3 = replay_equivalence(&comp.map, &comp.cert).is_ok();
        let used = rat(2) * gamma.radius.clone();
        items.push((
            idx,
            used,
            rat(2) * eps,
            ok1 && ok2 && ok3,
            "cone criterion + composition".into(),
        ));
        idx += 1;
    }
    report("2.4", items)
}

/// Folding bounds: boundary complexes of connected structures fold to the
/// stated dimension within the 12/24-radius budgets; at dimension one the
/// projective reduction has an exact idempotent and replayable stable
/// isomorphism.
pub fn campaign_folding(cfg: &CampaignConfig) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 30 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0x34).fork(guard as u64);
        let q = poincare_instance(&mut r, cfg, &params, true);
        let eps = crate::rat::rat_max(q.radius.clone(), rat(1));
        // Every third instance folds the boundary of the thickening pair
        // within the pair budgets instead.
        if idx % 3 == 2 {
            let data = boundary_complex(&q);
            let pdata = crate::boundary::boundary_pair(&data.thickening);
            let budget = rat(24) * eps.clone();
            match fold_complex(
                &pdata.complex,
                None,
                FoldMode::BottomAndTop,
                &(rat(5) * eps.clone()),
                &budget,
            ) {
                Ok(out) => {
                    let radius_ok = out
                        .folded
                        .degrees()
                        .map(|d| out.folded.diff_at(d).tight_radius())
                        .fold(rat(0), crate::rat::rat_max)
                        <= rat(5) * eps.clone();
                    let ok = out.folded.lo() >= 0
                        && radius_ok
                        && replay_equivalence(&out.map, &out.cert).is_ok();
                    items.push((idx, out.cert.radius.clone(), budget, ok, "pair fold".into()));
                }
                Err(e) => items.push((idx, rat(0), budget, false, format!("{e}"))),
            }
            idx += 1;
            continue;
        }
        let data = boundary_complex(&q);
        let Some(conn) = crate::quad::connected_certify_structure(&q, &eps) else {
            continue;
        };
        let budget = rat(12) * eps.clone();
        match fold_complex(
            &data.complex,
            Some(&conn),
            FoldMode::BottomAndTop,
            &(rat(4) * eps.clone()),
            &budget,
        ) {
            Ok(out) => {
                let dims_ok = out.folded.lo() >= 0 && out.folded.hi() <= q.n - 1;
                let radius_ok = out
                    .folded
                    .degrees()
                    .map(|d| out.folded.diff_at(d).tight_radius())
                    .fold(rat(0), crate::rat::rat_max)
                    <= rat(4) * eps.clone();
                let replay_ok = replay_equivalence(&out.map, &out.cert).is_ok();
                // Dimension-one reduction on a bottom-only fold.
                let one_ok = match fold_complex(
                    &data.complex,
                    Some(&conn),
                    FoldMode::BottomOnly,
                    &(rat(4) * eps.clone()),
                    &budget,
                ) {
                    Ok(one) if one.folded.lo() == 0 && one.folded.hi() == 1 => {
                        let h = crate::boundary::solve_bottom_witness(
                            &one.folded,
                            &(rat(4) * eps.clone()),
                        );
                        let hp = crate::boundary::solve_top_witness(
                            &one.folded,
                            &(rat(12) * eps.clone()),
                        );
                        match (h, hp) {
                            (Some(h), Some(hp)) => {
                                match crate::boundary::project_dim1(&one.folded, &hp, &h) {
                                    Ok(red) => {
                                        red.module.compose(&red.module) == red.module
                                    }
                                    Err(_) => false,
                                }
                            }
                            _ => false,
                        }
                    }
                    _ => true,
                };
                items.push((
                    idx,
                    out.cert.radius.clone(),
                    budget,
                    dims_ok && radius_ok && replay_ok && one_ok,
                    String::new(),
                ));
            }
            Err(e) => items.push((idx, rat(0), budget, false, format!("{e}"))),
        }
        idx += 1;
    }
    report("3.4", items)
}

/// Constant audits: the projective-to-free map scales decorations by
/// exactly ALPHA and the connecting map by kappa(n).
pub fn campaign_constants(cfg: &CampaignConfig) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 30 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0x46).fork(guard as u64);
        let mut ledger = DecorationLedger::default();
        if idx % 2 == 0 {
            // iota on a free representative viewed projectively with the
            // identity witness.
            let sp = cfg.space(&mut r, &params);
            let q = crate::fixtures::random_poincare(&mut r, &params, &sp);
            let carrier = q.carrier.as_projective();
            let q = QuadStructure { carrier, ..q };
            let witness = crate::k0::identity_witness(&q.carrier);
            let rep = LClassRep {
                structure: q,
                dec: Decorations {
                    n: 0,
                    delta: rat(1),
                    eps: rat(1),
                    zone: sp.empty_subset(),
                    family: vec![sp.full_subset()],
                },
                connectivity: None,
                poincare: None,
                k0_witnesses: vec![(sp.full_subset(), witness)],
            };
            match crate::ltheory::iota_z(&rep, 0, &mut ledger) {
                Ok(out) => {
                    let ok = out.dec.delta == rat(ALPHA)
                        && out.dec.eps == rat(ALPHA)
                        && ledger.all_within_bounds();
                    items.push((idx, out.dec.eps.clone(), rat(ALPHA), ok, "alpha".into()));
                }
                Err(e) => items.push((idx, rat(0), rat(ALPHA), false, format!("{e}"))),
            }
        } else {
            // Connecting map on the boundary of a 2-dimensional form.
            let base = poincare_instance(&mut r, cfg, &params, true);
            let data = boundary_complex(&base);
            let n = 1i64;
            let mut rep = LClassRep {
                structure: data.structure.clone(),
                dec: Decorations {
                    n,
                    delta: rat(1),
                    eps: data.structure.radius.clone(),
                    zone: base.carrier.space.empty_subset(),
                    family: Vec::new(),
                },
                connectivity: None,
                poincare: None,
                k0_witnesses: Vec::new(),
            };
            if rep.certify().is_err() {
                continue;
            }
            let k = crate::ltheory::kappa(n);
            match crate::ltheory::connecting_boundary(&rep, &mut ledger) {
                Ok(out) => {
                    let ok = out.rep.dec.delta == rat(k) * rep.dec.delta.clone()
                        && out.rep.dec.eps == rat(k) * rep.dec.eps.clone()
                        && ledger.all_within_bounds();
                    items.push((idx, out.rep.dec.delta.clone(), rat(k), ok, "kappa".into()));
                }
                Err(e) => items.push((idx, rat(0), rat(k), false, format!("{e}"))),
            }
        }
        idx += 1;
    }
    report("4.6+5.1", items)
}

/// Excision stability: quotienting by the part near `B` then including
/// agrees with the inclusion-induced map through the comparison of
/// representatives.
pub fn campaign_excision(cfg: &CampaignConfig) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 30 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0x6E).fork(guard as u64);
        let sp = cfg.space(&mut r, &params);
        if sp.len() < 3 {
            continue;
        }
        // Split the space into two halves sharing a middle point.
        let half = sp.len() / 2;
        let a_set = sp.subset_of(&(0..=half).collect::<Vec<_>>());
        let b_set = sp.subset_of(&(half..sp.len()).collect::<Vec<_>>());
        let q = crate::fixtures::random_poincare(&mut r, &params, &sp);
        let mut rep = LClassRep {
            structure: q,
            dec: Decorations {
                n: 0,
                delta: rat(1),
                eps: rat(1),
                zone: b_set.clone(),
                family: Vec::new(),
            },
            connectivity: None,
            poincare: None,
            k0_witnesses: Vec::new(),
        };
        if rep.certify().is_err() {
            continue;
        }
        let mut ledger = DecorationLedger::default();
        match crate::sections::excision(&rep, &a_set, &b_set, &mut ledger) {
            Ok(out) => {
                // Include the excised representative back over the
                // enlarged zone and compare it against the
                // relax-controlled original through the comparison map:
                // away from the enlarged zone the two agree literally.
                let shared_zone = out.rep.dec.zone.union(&b_set);
                let included = crate::sections::inclusion_induced(&out.rep, &shared_zone);
                let original = LClassRep {
                    dec: Decorations { zone: shared_zone.clone(), ..rep.dec.clone() },
                    ..rep.clone()
                };
                let cmp = crate::sections::compare_classes(&original, &included);
                let ok = match cmp {
                    Ok(c) => {
                        c.left.quotient.psis == c.right.quotient.psis
                            && included.verify().is_ok()
                    }
                    Err(_) => false,
                };
                items.push((
                    idx,
                    out.rep.dec.eps.clone(),
                    rep.dec.eps.clone(),
                    ok,
                    "exc then include equals relax-control".into(),
                ));
            }
            Err(e) => items.push((idx, rat(0), rat(1), false, format!("{e}"))),
        }
        idx += 1;
    }
    report("6.exc", items)
}

/// Signature values and cobordism invariance.
pub fn campaign_signature(cfg: &CampaignConfig) -> CampaignReport {
    let mut items = Vec::new();
    // Fixed values first.
    let fixed: Vec<(i64, QuadStructure)> = vec![
        (0, crate::fixtures::hyperbolic_form(Ring::Int)),
        (1, crate::fixtures::rank_one_form(Ring::Int, 1)),
        (8, crate::signature::e8_form()),
    ];
    for (i, (want, q)) in fixed.into_iter().enumerate() {
        let got = crate::signature::signature(&q);
        items.push((
            i,
            rat(got.clone().unwrap_or(0) as i128),
            rat(want as i128),
            got == Ok(want),
            "fixed value".into(),
        ));
    }
    // Cobordism invariance on fixture pairs: pushforwards along exact
    // self-equivalences preserve the signature.
    let params = FixtureParams {
        ring: Ring::Int,
        space_points: 1,
        max_rank: cfg.max_rank,
        max_degree: 1,
        coeff_bound: 2,
    };
    let mut idx = 3usize;
    let mut guard = 0usize;
    while idx < cfg.instances.max(6) + 3 && guard < cfg.instances * 20 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0x51).fork(guard as u64);
        // Poincare blocks over the integers: hyperbolic planes and the
        // rank-eight even form (possibly negated).
        let blocks = 1 + r.usize_below(2);
        let mut q = crate::fixtures::hyperbolic_form(Ring::Int);
        for _ in 0..blocks {
            let next = if r.chance(2, 3) {
                crate::fixtures::hyperbolic_form(Ring::Int)
            } else if r.chance(1, 2) {
                crate::signature::e8_form()
            } else {
                crate::signature::e8_form().neg()
            };
            q = q.direct_sum(&next);
        }
        let sig1 = crate::signature::signature(&q);
        let (g, _) = crate::fixtures::random_auto_equivalence(&mut r, &params, &q.carrier, &rat(0));
        let (pushed, cob) = crate::quad::pushforward_with_cobordism(&g, &q);
        let sig2 = crate::signature::signature(&pushed);
        let over = q.carrier.space.full_subset();
        let cob_ok = cob.pair.check().is_ok()
            && crate::quad::poincare_certify_pair(&cob.pair, &over).is_some();
        let pass = sig1.is_ok() && sig1 == sig2 && cob_ok;
        items.push((
            idx,
            rat(sig1.unwrap_or(99) as i128),
            rat(sig2.unwrap_or(-99) as i128),
            pass,
            "cobordism invariance".into(),
        ));
        idx += 1;
    }
    report("10.1", items)
}

/// Stably-exact composites: the three vanishing composites produce
/// replaying null-cobordisms; the lift against `j` roundtrips on
/// constructed kernel representatives.
pub fn campaign_stably_exact(cfg: &CampaignConfig) -> CampaignReport {
    let params = cfg.params();
    let mut items = Vec::new();
    let mut idx = 0usize;
    let mut guard = 0usize;
    while idx < cfg.instances && guard < cfg.instances * 40 {
        guard += 1;
        let mut r = Rng::new(cfg.seed ^ 0x52).fork(guard as u64);
        let mut ledger = DecorationLedger::default();
        match idx % 6 {
            0 => {
                // Part "j i": projective representative supported over a
                // proper zone, with decorations small enough that the
                // shrunken Poincare zone stays a proper subset.
                let sp = crate::space::ControlSpace::line(6, rat(1));
                let zone = sp.subset_of(&[0]);
                let blocks = 1 + r.usize_below(2);
                let mut q: Option<QuadStructure> = None;
                for _ in 0..blocks {
                    let m = crate::module::GeomModule::new(
                        params.rwi(),
                        sp.clone(),
                        vec![0, 0],
                    )
                    .unwrap();
                    let c = crate::complex::ControlledComplex::new(
                        params.rwi(),
                        sp.clone(),
                        0,
                        vec![m.clone()],
                        vec![],
                        None,
                        rat(0),
                    );
                    let psi0 = crate::module::GeomMorphism::new(
                        m.clone(),
                        m,
                        [((0usize, 1usize), 1 + r.range(0, 1))].into(),
                        rat(0),
                    );
                    let next = QuadStructure {
                        n: 0,
                        carrier: c,
                        psis: vec![[(0i64, psi0)].into()],
                        radius: rat(0),
                    };
                    q = Some(match q {
                        None => next,
                        Some(prev) => prev.direct_sum(&next),
                    });
                }
                let q = q.expect("blocks");
                let carrier = q.carrier.as_projective();
                let q = QuadStructure { carrier, ..q };
                let witness = crate::k0::identity_witness(&q.carrier);
                let eps = crate::rat::ratio(1, 200);
                let mut rep = LClassRep {
                    structure: q,
                    dec: Decorations {
                        n: 0,
                        delta: eps.clone(),
                        eps: eps.clone(),
                        zone,
                        family: vec![sp.full_subset()],
                    },
                    connectivity: None,
                    poincare: None,
                    k0_witnesses: vec![(sp.full_subset(), witness)],
                };
                if rep.certify().is_err() {
                    continue;
                }
                match crate::ltheory::stably_exact_i_then_j(&rep, 0, &mut ledger) {
                    Ok(w) => {
                        let ok = w.cobordism.pair.check().is_ok()
                            && w.poincare.is_some()
                            && w.poincare_over.card() > 0;
                        items.push((
                            idx,
                            w.cobordism.pair.radius.clone(),
                            rat(24) * rat(ALPHA) * rep.dec.eps.clone(),
                            ok,
                            "part j.i".into(),
                        ));
                    }
                    Err(e) => items.push((idx, rat(0), rat(24), false, format!("{e}"))),
                }
            }
            1 => {
                // Part "bd j": absolute class has zero connecting image.
                let base = poincare_instance(&mut r, cfg, &params, true);
                let data = boundary_complex(&base);
                let mut rep = LClassRep {
                    structure: data.structure.clone(),
                    dec: Decorations {
                        n: 1,
                        delta: rat(1),
                        eps: data.structure.radius.clone(),
                        zone: base.carrier.space.empty_subset(),
                        family: Vec::new(),
                    },
                    connectivity: None,
                    poincare: None,
                    k0_witnesses: Vec::new(),
                };
                if rep.certify().is_err() {
                    continue;
                }
                match crate::ltheory::stably_exact_j_then_bd(&rep, &mut ledger) {
                    Ok((out, w)) => {
                        let ok = out.rep.structure.carrier.total_rank() == 0
                            && w.cobordism.pair.check().is_ok();
                        items.push((
                            idx,
                            out.rep.dec.eps.clone(),
                            rat(crate::ltheory::kappa(1)) * rep.dec.eps.clone(),
                            ok,
                            "part bd.j".into(),
                        ));
                    }
                    Err(e) => items.push((idx, rat(0), rat(1), false, format!("{e}"))),
                }
            }
            2 => {
                // Part "i bd": thickening-based null-cobordism of the
                // connecting image.
                let base = poincare_instance(&mut r, cfg, &params, true);
                let data = boundary_complex(&base);
                let sp = base.carrier.space.clone();
                let mut rep = LClassRep {
                    structure: data.structure.clone(),
                    dec: Decorations {
                        n: 1,
                        delta: rat(1),
                        eps: data.structure.radius.clone(),
                        zone: sp.empty_subset(),
                        family: Vec::new(),
                    },
                    connectivity: None,
                    poincare: None,
                    k0_witnesses: Vec::new(),
                };
                if rep.certify().is_err() {
                    continue;
                }
                match crate::ltheory::stably_exact_bd_then_i(&rep, &mut ledger) {
                    Ok((_, w)) => {
                        let ok = w.cobordism.pair.check().is_ok() && w.poincare.is_some();
                        items.push((
                            idx,
                            w.cobordism.pair.radius.clone(),
                            rat(crate::ltheory::kappa(1)) * rep.dec.eps.clone(),
                            ok,
                            "part i.bd".into(),
                        ));
                    }
                    Err(e) => items.push((idx, rat(0), rat(1), false, format!("{e}"))),
                }
            }
            3 => {
                // Lift against j on a constructed kernel fixture: an
                // absolute Poincare representative with its evident
                // null-cobordism.
                let sp = cfg.space(&mut r, &params);
                let q = crate::fixtures::random_poincare(&mut r, &params, &sp);
                let mut rep = LClassRep {
                    structure: q.clone(),
                    dec: Decorations {
                        n: 0,
                        delta: rat(1),
                        eps: rat(1),
                        zone: sp.subset_of(&[0]),
                        family: Vec::new(),
                    },
                    connectivity: None,
                    poincare: None,
                    k0_witnesses: Vec::new(),
                };
                if rep.certify().is_err() {
                    continue;
                }
                // Null-cobordism: (1 1)-pair of psi (+) -psi has boundary
                // psi (+) -psi; the lift consumes a null pair on psi: use
                // the inverse construction.
                let cob = crate::quad::inverse_nullcobordism(&q);
                match crate::ltheory::stably_exact_lift_j(&rep, &cob.pair, &mut ledger) {
                    Ok(out) => {
                        let ok = out.preimage.verify().is_ok();
                        items.push((
                            idx,
                            out.preimage.dec.eps.clone(),
                            rat(crate::ltheory::kappa(0)) * rep.dec.eps.clone(),
                            ok,
                            "lift j".into(),
                        ));
                    }
                    Err(e) => items.push((idx, rat(0), rat(1), false, format!("{e}"))),
                }
            }
            4 => {
                // Lift against the connecting map on a kernel fixture: an
                // absolute representative whose connecting image is empty,
                // witnessed by the empty null-cobordism.
                let base = poincare_instance(&mut r, cfg, &params, true);
                let data = boundary_complex(&base);
                let spx = data.structure.carrier.space.clone();
                let mut rep = LClassRep {
                    structure: data.structure.clone(),
                    dec: Decorations {
                        n: 1,
                        delta: rat(1),
                        eps: data.structure.radius.clone(),
                        zone: spx.empty_subset(),
                        family: Vec::new(),
                    },
                    connectivity: None,
                    poincare: None,
                    k0_witnesses: Vec::new(),
                };
                if rep.certify().is_err() {
                    continue;
                }
                let Ok(out) = crate::ltheory::connecting_boundary(&rep, &mut ledger) else {
                    items.push((idx, rat(0), rat(1), false, "no connecting output".into()));
                    idx += 1;
                    continue;
                };
                let empty_cx = crate::complex::ControlledComplex::empty(
                    rep.structure.carrier.ring,
                    rep.structure.carrier.space.clone(),
                );
                let null = crate::quad::QuadPair {
                    f: crate::complex::ChainMap::zero(empty_cx.clone(), empty_cx),
                    delta: Vec::new(),
                    psi: out.rep.structure.clone(),
                    radius: rat(0),
                };
                match crate::ltheory::stably_exact_lift_connecting(&rep, &out, &null, &mut ledger)
                {
                    Ok(lift) => {
                        let ok = lift.preimage.verify().is_ok()
                            && lift.preimage.poincare.is_some()
                            && lift
                                .roundtrip
                                .as_ref()
                                .map(|c| c.pair.check().is_ok())
                                .unwrap_or(false);
                        items.push((
                            idx,
                            lift.preimage.dec.eps.clone(),
                            rat(16 * crate::ltheory::kappa(1)) * rep.dec.eps.clone(),
                            ok,
                            "lift connecting".into(),
                        ));
                    }
                    Err(e) => items.push((idx, rat(0), rat(1), false, format!("{e}"))),
                }
            }
            _ => {
                // Lift against iota on a lagrangian kernel fixture.
                let sp = crate::space::ControlSpace::line(6, rat(1));
                let m2 = crate::module::GeomModule::new(
                    params.rwi(),
                    std::sync::Arc::clone(&sp),
                    vec![0, 0],
                )
                .unwrap();
                let c = crate::complex::ControlledComplex::new(
                    params.rwi(),
                    std::sync::Arc::clone(&sp),
                    0,
                    vec![m2.clone()],
                    vec![],
                    None,
                    rat(0),
                );
                let psi0 = crate::module::GeomMorphism::new(
                    m2.clone(),
                    m2.clone(),
                    [((0usize, 1usize), 1i128)].into(),
                    rat(0),
                );
                let q = QuadStructure {
                    n: 0,
                    carrier: c.as_projective(),
                    psis: vec![[(0i64, psi0)].into()],
                    radius: rat(0),
                };
                let witness = crate::k0::identity_witness(&q.carrier);
                let eps = ratio(1, 1000);
                let zone = sp.subset_of(&[0]);
                let mut rep = LClassRep {
                    structure: q,
                    dec: Decorations {
                        n: 0,
                        delta: eps.clone(),
                        eps,
                        zone,
                        family: vec![sp.full_subset()],
                    },
                    connectivity: None,
                    poincare: None,
                    k0_witnesses: vec![(sp.full_subset(), witness)],
                };
                if rep.certify().is_err() {
                    continue;
                }
                let free_target = rep.structure.carrier.forget_idempotents();
                let rank1 = crate::module::GeomMorphism::identity(
                    &crate::module::GeomModule::new(
                        params.rwi(),
                        std::sync::Arc::clone(&sp),
                        vec![0],
                    )
                    .unwrap(),
                )
                .source
                .clone();
                let l_cx = crate::complex::ControlledComplex::new(
                    params.rwi(),
                    std::sync::Arc::clone(&sp),
                    0,
                    vec![rank1.clone()],
                    vec![],
                    None,
                    rat(0),
                );
                let proj = crate::module::GeomMorphism::new(
                    free_target.module_at(0),
                    rank1,
                    [((0usize, 1usize), 1i128)].into(),
                    rat(0),
                );
                let f = crate::complex::ChainMap::new(
                    free_target,
                    l_cx,
                    [(0i64, proj)].into(),
                    rat(0),
                );
                let null = crate::quad::QuadPair {
                    f,
                    delta: Vec::new(),
                    psi: QuadStructure {
                        carrier: rep.structure.carrier.forget_idempotents(),
                        ..rep.structure.clone()
                    },
                    radius: rat(0),
                };
                if null.check().is_err() {
                    items.push((idx, rat(0), rat(1), false, "bad lagrangian null".into()));
                    idx += 1;
                    continue;
                }
                let w_zone = rep.dec.zone.neighborhood(&rat(1));
                match crate::ltheory::stably_exact_lift_iota(&rep, 0, &null, &w_zone, &mut ledger)
                {
                    Ok(lift) => {
                        let ok = lift.preimage.verify().is_ok()
                            && lift.preimage.poincare.is_some()
                            && lift.preimage.dec.n == 1;
                        items.push((
                            idx,
                            lift.preimage.dec.eps.clone(),
                            rat(16 * crate::ltheory::kappa(1)) * rep.dec.eps.clone(),
                            ok,
                            "lift iota".into(),
                        ));
                    }
                    Err(e) => items.push((idx, rat(0), rat(1), false, format!("{e}"))),
                }
            }
        }
        idx += 1;
    }
    report("5.2", items)
}

/// Dispatch by property id.
pub fn run_campaign(prop: &str, cfg: &CampaignConfig) -> Option<CampaignReport> {
    match prop {
        "3.1" | "boundary" => Some(campaign_boundary(cfg)),
        "3.2" | "roundtrip" => Some(campaign_roundtrip(cfg)),
        "2.8" | "union" => Some(campaign_union(cfg, false)),
        "3.5" | "union-connected" => Some(campaign_union(cfg, true)),
        "2.4" | "cone" => Some(campaign_cone_criterion(cfg)),
        "3.4" | "folding" => Some(campaign_folding(cfg)),
        "4.6" | "5.1" | "constants" => Some(campaign_constants(cfg)),
        "6" | "6.exc" | "excision" => Some(campaign_excision(cfg)),
        "5.2" | "stably-exact" => Some(campaign_stably_exact(cfg)),
        "10.1" | "signature" => Some(campaign_signature(cfg)),
        _ => None,
    }
}

pub const ALL_PROPS: &[&str] =
    &["3.1", "3.2", "2.8", "3.5", "2.4", "3.4", "4.6+5.1", "6.exc", "5.2", "10.1"];
