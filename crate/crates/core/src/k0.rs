//! Reduced projective class bookkeeping: vanishing witnesses, the cone
//! class identity, stabilization of projective complexes by free ones, and
//! the squeezing of a complex contractible away from a subset into a
//! projective complex supported near it.

use crate::complex::{ChainMap, ControlledComplex};
use crate::homotopy::{
    certify_equivalence, replay_equivalence, transfer_contraction, ContractionCert,
    EquivalenceCert, ReplayError,
};
use crate::module::{BlockMatrix, GeomModule, GeomMorphism};
use crate::rat::{rat, rat_max, Rat};
use crate::space::Subset;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum K0Error {
    #[error("witness replay failed: {0}")]
    Witness(#[from] ReplayError),
    #[error("complement complex must be free")]
    ComplementNotFree,
    #[error("stabilized map has the wrong shape")]
    Shape,
    #[error("squeeze: contraction identity unavailable on a selected column")]
    SqueezeColumn,
    #[error("squeeze: transported contraction fails over the shrunken subset at degree {0}")]
    SqueezeTransport(i64),
    #[error("squeeze: top absorption identity fails")]
    SqueezeTop,
    #[error("no equivalence certificate within the stated budget")]
    NoEquivalence,
    #[error("class witness missing")]
    MissingWitness,
}

/// Witness that the reduced projective class of a complex vanishes on a
/// zone: a free complement `(E, 1)` and an equivalence
/// `(C,p) (+) (E,1) -> (F,1)` with `F` free.
#[derive(Debug, Clone)]
pub struct VanishingWitness {
    pub complement: ControlledComplex,
    pub target: ControlledComplex,
    pub map: ChainMap,
    pub cert: EquivalenceCert,
}

impl VanishingWitness {
    pub fn verify(&self, c: &ControlledComplex) -> Result<(), K0Error> {
        if self.complement.is_projective() || self.target.is_projective() {
            return Err(K0Error::ComplementNotFree);
        }
        let sum = c.direct_sum(&self.complement);
        if self.map.source != sum || self.map.target != self.target {
            return Err(K0Error::Shape);
        }
        replay_equivalence(&self.map, &self.cert)?;
        Ok(())
    }
}

/// Reduced projective class representative with decorations and an
/// optional vanishing witness per zone.
#[derive(Debug, Clone)]
pub struct K0Class {
    pub complex: ControlledComplex,
    pub n: i64,
    pub eps: Rat,
    pub zone: Subset,
    pub witness: Option<VanishingWitness>,
}

impl K0Class {
    pub fn verify(&self) -> Result<(), K0Error> {
        if let Some(w) = &self.witness {
            w.verify(&self.complex)?;
        }
        Ok(())
    }
}

/// The cone-class identity: for a chain map `g: (E,r) -> (F,s)` of
/// projective complexes, `[cone(g)] = [F] - [E]`, witnessed by the literal
/// even/odd module reshuffle `cone(g)_even = F_even (+) E_odd` (and dually).
#[derive(Debug, Clone)]
pub struct ConeClassWitness {
    pub even_iso: GeomMorphism,
    pub odd_iso: GeomMorphism,
}

/// Collates the even(+1)/odd parts of a projective complex into single
/// projective modules.
fn collate(c: &ControlledComplex, parity: i64) -> (GeomModule, GeomMorphism) {
    let degrees: Vec<i64> = c.degrees().filter(|r| r.rem_euclid(2) == parity).collect();
    if degrees.is_empty() {
        let m = GeomModule::zero(c.ring, c.space.clone());
        let z = GeomMorphism::zero(m.clone(), m.clone());
        return (m, z);
    }
    let parts: Vec<GeomModule> = degrees.iter().map(|&r| c.module_at(r)).collect();
    let module = GeomModule::direct_sum_all(&parts.iter().collect::<Vec<_>>());
    let mut b = BlockMatrix::new(parts.clone(), parts);
    for (i, &r) in degrees.iter().enumerate() {
        b.set(i, i, &c.idem_at(r), 1);
    }
    (module, b.assemble())
}

/// Builds the reshuffle isomorphisms exhibiting `[cone(g)] + [E] = [F]`
/// stably: `cone(g)_even (+) E_even = F_even (+) E_odd (+) E_even` etc.,
/// realized by permutation matrices compatible with the idempotents.
pub fn cone_class_witness(g: &ChainMap) -> Result<ConeClassWitness, K0Error> {
    let cone = crate::complex::mapping_cone(g).as_projective();
    let e = g.source.as_projective();
    let f = g.target.as_projective();
    // cone_r = F_r (+) E_{r-1}: the even part of the cone is literally
    // F_even (+) E_odd after regrouping, which the block identity exhibits.
    let build = |parity: i64| -> GeomMorphism {
        let (cone_m, cone_p) = collate(&cone, parity);
        let (f_m, f_p) = collate(&f, parity);
        let (e_m, e_p) = collate(&e, 1 - parity);
        let want = f_m.direct_sum(&e_m);
        // The permutation sending the interleaved (F_r, E_{r-1}) basis to
        // the grouped (all F first, all E after) basis.
        let mut perm: Vec<usize> = Vec::new();
        {
            // Walk cone degrees of this parity, recording where each
            // sub-block lands in the grouped order.
            let degrees: Vec<i64> =
                cone.degrees().filter(|r| r.rem_euclid(2) == parity).collect();
            let mut f_off = 0usize;
            let mut e_off = f_m.rank();
            for &r in &degrees {
                let fr = f.module_at(r).rank();
                let er = e.module_at(r - 1).rank();
                for k in 0..fr {
                    perm.push(f_off + k);
                }
                for k in 0..er {
                    perm.push(e_off + k);
                }
                f_off += fr;
                e_off += er;
            }
        }
        debug_assert_eq!(perm.len(), cone_m.rank());
        debug_assert_eq!(want.rank(), cone_m.rank());
        let entries = perm
            .iter()
            .enumerate()
            .map(|(src, &dst)| ((dst, src), cone_m.ring.ring.one()))
            .collect();
        let raw = GeomMorphism::new(cone_m.clone(), want.clone(), entries, rat(0));
        // Conjugate into the idempotent-compatible form q . P . p.
        let mut bq = BlockMatrix::new(
            vec![f_m.clone(), e_m.clone()],
            vec![f_m.clone(), e_m.clone()],
        );
        bq.set(0, 0, &f_p, 1);
        bq.set(1, 1, &e_p, 1);
        let q = bq.assemble();
        q.compose(&raw).compose(&cone_p)
    };
    Ok(ConeClassWitness { even_iso: build(0), odd_iso: build(1) })
}

/// Replays a cone-class witness: both collated isomorphisms must carry the
/// cone idempotent to the grouped idempotent exactly (conjugation check).
pub fn replay_cone_class(g: &ChainMap, w: &ConeClassWitness) -> Result<(), K0Error> {
    let cone = crate::complex::mapping_cone(g).as_projective();
    let e = g.source.as_projective();
    let f = g.target.as_projective();
    for (parity, iso) in [(0i64, &w.even_iso), (1, &w.odd_iso)] {
        let (_, cone_p) = collate(&cone, parity);
        let (f_m, f_p) = collate(&f, parity);
        let (e_m, e_p) = collate(&e, 1 - parity);
        let mut bq = BlockMatrix::new(
            vec![f_m.clone(), e_m.clone()],
            vec![f_m.clone(), e_m.clone()],
        );
        bq.set(0, 0, &f_p, 1);
        bq.set(1, 1, &e_p, 1);
        let q = bq.assemble();
        // iso . iso* realizes q and iso* . iso realizes the cone idempotent.
        let back = iso.dual();
        if iso.compose(&back) != q || back.compose(iso) != cone_p {
            return Err(K0Error::Shape);
        }
    }
    Ok(())
}

/// The identity vanishing witness of a representative whose carrier is a
/// free complex presented projectively: empty complement, identity map to
/// the underlying free complex.
pub fn identity_witness(carrier: &ControlledComplex) -> VanishingWitness {
    let target = carrier.forget_idempotents();
    let maps: BTreeMap<i64, GeomMorphism> = target
        .degrees()
        .map(|d| (d, GeomMorphism::identity(&target.module_at(d))))
        .filter(|(_, m)| !m.is_zero())
        .collect();
    let map = ChainMap::new(carrier.clone(), target.clone(), maps.clone(), rat(0));
    VanishingWitness {
        complement: ControlledComplex::empty(carrier.ring, carrier.space.clone()),
        target,
        map,
        cert: EquivalenceCert {
            inverse: maps,
            h: BTreeMap::new(),
            k: BTreeMap::new(),
            radius: rat(0),
            over: carrier.space.full_subset(),
            weak: false,
        },
    }
}

/// Stabilization: consumes a vanishing witness and returns the free
/// complex with the certified equivalence from `(C,p) (+) (E,1)`.
pub fn stabilize_to_free(
    c: &ControlledComplex,
    w: &VanishingWitness,
) -> Result<(ControlledComplex, ChainMap, EquivalenceCert), K0Error> {
    w.verify(c)?;
    Ok((w.target.clone(), w.map.clone(), w.cert.clone()))
}

/// Output of the squeeze: a projective complex supported near the subset
/// together with the certified equivalence from the input complex.
#[derive(Debug, Clone)]
pub struct SqueezeResult {
    pub projective: ControlledComplex,
    pub map: ChainMap,
    pub cert: EquivalenceCert,
    /// All basis locations of the output lie in this subset.
    pub support: Subset,
}

/// One cancellation stage: removes the listed columns from degree `r`,
/// promoting them two degrees up with the contraction column as the new
/// differential block. Returns the new complex plus the exact forward and
/// backward maps.
struct Stage {
    complex: ControlledComplex,
    fwd: ChainMap,
    bwd: ChainMap,
    /// Homotopy on the new complex: d H + H d = 1 - fwd.bwd exactly.
    homotopy: BTreeMap<i64, GeomMorphism>,
}

fn cancel_columns(
    k: &ControlledComplex,
    gamma: &BTreeMap<i64, GeomMorphism>,
    r: i64,
    cols: &[usize],
) -> Option<Stage> {
    if cols.is_empty() {
        return None;
    }
    let m_r = k.module_at(r);
    let keep: Vec<usize> = (0..m_r.rank()).filter(|i| !cols.contains(i)).collect();
    let (a_mod, _) = {
        let points: Vec<usize> = keep.iter().map(|&i| m_r.points[i]).collect();
        (GeomModule { ring: m_r.ring, space: m_r.space.clone(), points }, ())
    };
    let b_mod = {
        let points: Vec<usize> = cols.iter().map(|&i| m_r.points[i]).collect();
        GeomModule { ring: m_r.ring, space: m_r.space.clone(), points }
    };
    let gamma_r = gamma
        .get(&r)
        .cloned()
        .unwrap_or_else(|| GeomMorphism::zero(k.module_at(r), k.module_at(r + 1)))
        .clone();
    // u: B -> K_{r+1}, the contraction restricted to the cancelled columns.
    let u = gamma_r.compress(
        &(0..k.module_at(r + 1).rank()).collect::<Vec<_>>(),
        cols,
        k.module_at(r + 1),
        b_mod.clone(),
    );
    // Exactness requirements: d_{r+1} u = inclusion of B, and the cancelled
    // columns of d_r vanish.
    let iota_b = {
        let entries = cols
            .iter()
            .enumerate()
            .map(|(j, &i)| ((i, j), m_r.ring.ring.one()))
            .collect();
        GeomMorphism::new(b_mod.clone(), m_r.clone(), entries, rat(0))
    };
    if k.diff_at(r + 1).compose(&u) != iota_b {
        return None;
    }
    let d_r_on_b = k.diff_at(r).compress(
        &(0..k.module_at(r - 1).rank()).collect::<Vec<_>>(),
        cols,
        k.module_at(r - 1),
        b_mod.clone(),
    );
    if !d_r_on_b.is_zero() {
        return None;
    }
    // New modules: degree r keeps the complement; degree r+2 gains B.
    let lo = k.lo().min(r);
    let hi = k.hi().max(r + 2);
    let mut modules = Vec::new();
    for deg in lo..=hi {
        if deg == r {
            modules.push(a_mod.clone());
        } else if deg == r + 2 {
            modules.push(k.module_at(deg).direct_sum(&b_mod));
        } else {
            modules.push(k.module_at(deg));
        }
    }
    let pi_a = GeomMorphism::identity(&m_r).compress(
        &keep,
        &(0..m_r.rank()).collect::<Vec<_>>(),
        a_mod.clone(),
        m_r.clone(),
    );
    let iota_a = pi_a.dual();
    let mut diffs = Vec::new();
    let mut max_radius = k.radius.clone();
    for deg in (lo + 1)..=hi {
        let d = if deg == r {
            // d_r restricted to the kept columns.
            k.diff_at(r).compose(&iota_a)
        } else if deg == r + 1 {
            // project the target onto the complement.
            pi_a.compose(&k.diff_at(r + 1))
        } else if deg == r + 2 {
            let mut b = BlockMatrix::new(
                vec![k.module_at(r + 1)],
                vec![k.module_at(r + 2), b_mod.clone()],
            );
            b.set(0, 0, &k.diff_at(r + 2), 1);
            b.set(0, 1, &u, 1);
            b.assemble()
        } else if deg == r + 3 {
            let mut b = BlockMatrix::new(
                vec![k.module_at(r + 2), b_mod.clone()],
                vec![k.module_at(r + 3)],
            );
            b.set(0, 0, &k.diff_at(r + 3), 1);
            b.assemble()
        } else {
            k.diff_at(deg)
        };
        max_radius = rat_max(max_radius, d.radius.clone());
        diffs.push(d);
    }
    let complex = ControlledComplex::new(
        k.ring,
        k.space.clone(),
        lo,
        modules,
        diffs,
        None,
        max_radius,
    );
    // Forward: projection at r, inclusion-of-first at r+2, identity else.
    let mut fwd_maps = BTreeMap::new();
    let mut bwd_maps = BTreeMap::new();
    for deg in lo..=hi {
        let (fm, bm) = if deg == r {
            (pi_a.clone(), iota_a.clone())
        } else if deg == r + 1 {
            let id = GeomMorphism::identity(&k.module_at(deg));
            // Backward at r+1 subtracts the cancelled cycle part.
            let pi_b = GeomMorphism::identity(&m_r).compress(
                &(0..b_mod.rank()).map(|j| cols[j]).collect::<Vec<_>>(),
                &(0..m_r.rank()).collect::<Vec<_>>(),
                b_mod.clone(),
                m_r.clone(),
            );
            let correction = u.compose(&pi_b).compose(&k.diff_at(r + 1));
            (id.clone(), id.sub(&correction))
        } else if deg == r + 2 {
            let mut bf = BlockMatrix::new(
                vec![k.module_at(deg), b_mod.clone()],
                vec![k.module_at(deg)],
            );
            bf.set(0, 0, &GeomMorphism::identity(&k.module_at(deg)), 1);
            let mut bb = BlockMatrix::new(
                vec![k.module_at(deg)],
                vec![k.module_at(deg), b_mod.clone()],
            );
            bb.set(0, 0, &GeomMorphism::identity(&k.module_at(deg)), 1);
            (bf.assemble(), bb.assemble())
        } else {
            let id = GeomMorphism::identity(&k.module_at(deg));
            (id.clone(), id)
        };
        if !fm.is_zero() {
            fwd_maps.insert(deg, fm);
        }
        if !bm.is_zero() {
            bwd_maps.insert(deg, bm);
        }
    }
    let budget = k.radius.clone() + gamma_r.radius.clone();
    let fwd = ChainMap::new(k.clone(), complex.clone(), fwd_maps, budget.clone());
    let bwd = ChainMap::new(complex.clone(), k.clone(), bwd_maps, budget);
    if !fwd.is_exact_chain_map() || !bwd.is_exact_chain_map() {
        return None;
    }
    // Homotopy d H + H d = 1 - fwd.bwd on the new complex: supported at
    // degree r+1, landing in the promoted summand.
    let mut homotopy = BTreeMap::new();
    {
        let pi_b = GeomMorphism::identity(&m_r).compress(
            cols,
            &(0..m_r.rank()).collect::<Vec<_>>(),
            b_mod.clone(),
            m_r.clone(),
        );
        let mut hb = BlockMatrix::new(
            vec![k.module_at(r + 2), b_mod.clone()],
            vec![k.module_at(r + 1)],
        );
        hb.set(1, 0, &pi_b.compose(&k.diff_at(r + 1)), 1);
        let h = hb.assemble();
        if !h.is_zero() {
            homotopy.insert(r + 1, h);
        }
    }
    Some(Stage { complex, fwd, bwd, homotopy })
}

/// Transports a contraction along an exact stage: `gamma' = fwd gamma bwd`,
/// valid over the subset shrunk by the backward radius.
fn transport_gamma(
    gamma: &BTreeMap<i64, GeomMorphism>,
    stage: &Stage,
    k_old: &ControlledComplex,
) -> BTreeMap<i64, GeomMorphism> {
    let mut out = BTreeMap::new();
    let k_new = &stage.complex;
    for r in k_new.lo() - 1..=k_new.hi() + 1 {
        let g_r = gamma
            .get(&r)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(k_old.module_at(r), k_old.module_at(r + 1)));
        let mut m = stage.fwd.map_at(r + 1).compose(&g_r).compose(&stage.bwd.map_at(r));
        if let Some(h) = stage.homotopy.get(&r) {
            m = m.add(h);
        }
        if !m.is_zero() {
            out.insert(r, m);
        }
    }
    out
}

fn gamma_defect_ok(
    k: &ControlledComplex,
    gamma: &BTreeMap<i64, GeomMorphism>,
    over: &Subset,
    idems: &BTreeMap<i64, GeomMorphism>,
) -> bool {
    for r in k.lo() - 1..=k.hi() + 1 {
        let g_r = gamma
            .get(&r)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(k.module_at(r), k.module_at(r + 1)));
        let g_down = gamma
            .get(&(r - 1))
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(k.module_at(r - 1), k.module_at(r)));
        let lhs = k.diff_at(r + 1).compose(&g_r).add(&g_down.compose(&k.diff_at(r)));
        let target = idems.get(&r).cloned().unwrap_or_else(|| k.idem_at(r));
        let defect = lhs.sub(&target);
        if !defect.is_zero_over(over) {
            return false;
        }
    }
    true
}

/// Squeezes a free complex that is exactly contractible over `X - Y` into a
/// projective complex supported over a neighborhood of `Y`, with a
/// certified chain equivalence. Degrees are processed bottom-up: outside
/// columns are cancelled against the contraction, the accumulated tail is
/// absorbed into an exact idempotent, and the idempotent degree is folded
/// back down so the output has the same dimension as the input.
pub fn squeeze_to_projective(
    c: &ControlledComplex,
    gamma: &ContractionCert,
    y: &Subset,
    eps: &Rat,
) -> Result<SqueezeResult, K0Error> {
    let n = c.hi().max(0);
    let step = rat_max(c.radius.clone(), gamma.radius.clone()) + c.radius.clone()
        + gamma.radius.clone();
    let mut k = c.clone();
    let mut g = gamma.gamma.clone();
    let mut valid = gamma.over.clone();
    let mut idems: BTreeMap<i64, GeomMorphism> = BTreeMap::new();
    let mut fwd_total = ChainMap::identity(c);
    let mut bwd_total = ChainMap::identity(c);
    // Bottom-up cancellation of columns deep inside the valid subset.
    for r in c.lo()..=n + 2 {
        if std::env::var("CCX_SQUEEZE_DEBUG").is_ok() {
            eprintln!("stage {r}: degrees {}..{} ranks {:?} valid-card {}",
                k.lo(), k.hi(),
                k.degrees().map(|d| k.module_at(d).rank()).collect::<Vec<_>>(),
                valid.card());
            for rr in k.lo() - 1..=k.hi() + 1 {
                let g_r = g.get(&rr).cloned().unwrap_or_else(|| GeomMorphism::zero(k.module_at(rr), k.module_at(rr + 1)));
                let g_dn = g.get(&(rr - 1)).cloned().unwrap_or_else(|| GeomMorphism::zero(k.module_at(rr - 1), k.module_at(rr)));
                let lhs = k.diff_at(rr + 1).compose(&g_r).add(&g_dn.compose(&k.diff_at(rr)));
                let defect = lhs.sub(&k.idem_at(rr));
                if !defect.is_zero_over(&valid) {
                    eprintln!("  defect at degree {rr}: {:?}", defect.restrict(&valid).entries().collect::<Vec<_>>());
                }
            }
        }
        if !gamma_defect_ok(&k, &g, &valid, &idems) {
            return Err(K0Error::SqueezeTransport(r));
        }
        let depth = -(rat((n + 3 - r) as i128) * step.clone());
        let deep = valid.neighborhood(&depth);
        let m_r = k.module_at(r);
        let cols: Vec<usize> =
            (0..m_r.rank()).filter(|&i| deep.contains(m_r.points[i])).collect();
        if cols.is_empty() {
            continue;
        }
        let Some(stage) = cancel_columns(&k, &g, r, &cols) else {
            continue;
        };
        g = transport_gamma(&g, &stage, &k);
        k = stage.complex.clone();
        valid = valid.neighborhood(&-(stage.bwd.radius.clone()));
        fwd_total = stage.fwd.compose(&fwd_total);
        bwd_total = bwd_total.compose(&stage.bwd);
    }
    // Top absorption: if modules survive above degree n, the top-most is
    // exactly split by the contraction; absorb it into an idempotent and
    // fold the idempotent degree down until the dimension is n.
    while k.hi() > n || (k.hi() == n + 1 && k.module_at(k.hi()).is_zero()) {
        let top = k.hi();
        let t_mod = k.module_at(top);
        if t_mod.is_zero() {
            break;
        }
        if std::env::var("CCX_SQUEEZE_DEBUG").is_ok() {
            eprintln!("absorb: top {top} degrees {}..{} ranks {:?}", k.lo(), k.hi(),
                k.degrees().map(|d| k.module_at(d).rank()).collect::<Vec<_>>());
            for rr in k.lo() - 1..=k.hi() + 1 {
                let g_r = g.get(&rr).cloned().unwrap_or_else(|| GeomMorphism::zero(k.module_at(rr), k.module_at(rr + 1)));
                let g_dn = g.get(&(rr - 1)).cloned().unwrap_or_else(|| GeomMorphism::zero(k.module_at(rr - 1), k.module_at(rr)));
                let lhs = k.diff_at(rr + 1).compose(&g_r).add(&g_dn.compose(&k.diff_at(rr)));
                let want = idems.get(&rr).cloned().unwrap_or_else(|| k.idem_at(rr));
                let defect = lhs.sub(&want);
                if !defect.is_zero_over(&valid) {
                    eprintln!("  absorb-defect at {rr}: {:?}", defect.restrict(&valid).entries().collect::<Vec<_>>());
                }
            }
        }
        if !gamma_defect_ok(&k, &g, &valid, &idems) {
            return Err(K0Error::SqueezeTransport(top));
        }
        // All top columns must satisfy the exact identity
        // gamma d = idem_top on the full module.
        let below = k.module_at(top - 1);
        let g_below = g
            .get(&(top - 1))
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(below.clone(), t_mod.clone()));
        let idem_top = idems
            .get(&top)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::identity(&t_mod));
        if g_below.compose(&k.diff_at(top)) != idem_top {
            return Err(K0Error::SqueezeTop);
        }
        // p = d . gamma on degree top-1; q = idem - p.
        let p = k.diff_at(top).compose(&g_below);
        let idem_below = idems
            .get(&(top - 1))
            .cloned()
            .unwrap_or_else(|| GeomMorphism::identity(&below));
        let q = idem_below.sub(&p);
        if q.compose(&q) != q {
            return Err(K0Error::SqueezeTop);
        }
        // New complex: drop the top degree, install q at top-1.
        let lo = k.lo();
        let mut modules = Vec::new();
        let mut diffs = Vec::new();
        for deg in lo..=(top - 1) {
            modules.push(k.module_at(deg));
        }
        for deg in (lo + 1)..=(top - 1) {
            diffs.push(k.diff_at(deg));
        }
        let new_k = ControlledComplex::new(
            k.ring,
            k.space.clone(),
            lo,
            modules,
            diffs,
            None,
            k.radius.clone(),
        );
        idems.remove(&top);
        idems.insert(top - 1, q.clone());
        // Forward: quotient by the split image (q at top-1, zero at top).
        let mut fwd_maps = BTreeMap::new();
        let mut bwd_maps = BTreeMap::new();
        for deg in lo..=(top - 1) {
            let m = if deg == top - 1 {
                q.clone()
            } else {
                GeomMorphism::identity(&k.module_at(deg))
            };
            if !m.is_zero() {
                fwd_maps.insert(deg, m.clone());
                bwd_maps.insert(deg, m);
            }
        }
        let budget = k.radius.clone() + g_below.radius.clone();
        let stage_fwd = ChainMap::new(k.clone(), new_k.clone(), fwd_maps, budget.clone());
        let stage_bwd = ChainMap::new(new_k.clone(), k.clone(), bwd_maps, budget);
        let mut g_new = BTreeMap::new();
        for r in new_k.lo() - 1..=new_k.hi() + 1 {
            let g_r = g
                .get(&r)
                .cloned()
                .unwrap_or_else(|| GeomMorphism::zero(k.module_at(r), k.module_at(r + 1)));
            let m = stage_fwd.map_at(r + 1).compose(&g_r).compose(&stage_bwd.map_at(r));
            if !m.is_zero() {
                g_new.insert(r, m);
            }
        }
        g = g_new;
        valid = valid.neighborhood(&-(stage_bwd.radius.clone()));
        fwd_total = stage_fwd.compose(&fwd_total);
        bwd_total = bwd_total.compose(&stage_bwd);
        k = new_k;
    }
    // Package: restrict idempotent degrees to the entry support of q (the
    // installed idempotents kill everything else exactly), then assemble
    // the projective complex.
    let mut keep: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for deg in k.lo()..=k.hi() {
        let m = k.module_at(deg);
        match idems.get(&deg) {
            None => keep.insert(deg, (0..m.rank()).collect()),
            Some(q) => {
                let mut used = vec![false; m.rank()];
                for (row, col, _) in q.entries() {
                    used[row] = true;
                    used[col] = true;
                }
                keep.insert(deg, (0..m.rank()).filter(|&i| used[i]).collect())
            }
        };
    }
    let mut modules = Vec::new();
    let mut final_idems = Vec::new();
    for deg in k.lo()..=k.hi() {
        let m = k.module_at(deg);
        let sel = &keep[&deg];
        let restricted = GeomModule {
            ring: m.ring,
            space: m.space.clone(),
            points: sel.iter().map(|&i| m.points[i]).collect(),
        };
        let idem = idems
            .get(&deg)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::identity(&m))
            .compress(sel, sel, restricted.clone(), restricted.clone());
        modules.push(restricted);
        final_idems.push(idem);
    }
    let mut diffs = Vec::new();
    for deg in (k.lo() + 1)..=k.hi() {
        let tgt_sel = &keep[&(deg - 1)];
        let src_sel = &keep[&deg];
        diffs.push(k.diff_at(deg).compress(
            tgt_sel,
            src_sel,
            modules[(deg - 1 - k.lo()) as usize].clone(),
            modules[(deg - k.lo()) as usize].clone(),
        ));
    }
    let projective = ControlledComplex::new(
        k.ring,
        k.space.clone(),
        k.lo(),
        modules.clone(),
        diffs,
        Some(final_idems),
        k.radius.clone(),
    );
    // Compress the accumulated equivalence onto the restricted modules;
    // exact because the installed idempotents bound every surviving entry.
    {
        let mut fwd_maps = BTreeMap::new();
        let mut bwd_maps = BTreeMap::new();
        for deg in projective.lo()..=projective.hi() {
            let sel = &keep[&deg];
            let full: Vec<usize> = (0..c.module_at(deg).rank()).collect();
            let f_m = fwd_total.map_at(deg).compress(
                sel,
                &(0..fwd_total.map_at(deg).source.rank()).collect::<Vec<_>>(),
                projective.module_at(deg),
                c.module_at(deg),
            );
            let b_m = bwd_total.map_at(deg).compress(
                &full,
                sel,
                c.module_at(deg),
                projective.module_at(deg),
            );
            if !f_m.is_zero() {
                fwd_maps.insert(deg, f_m);
            }
            if !b_m.is_zero() {
                bwd_maps.insert(deg, b_m);
            }
        }
        fwd_total =
            ChainMap::new(c.clone(), projective.clone(), fwd_maps, fwd_total.radius.clone());
        bwd_total =
            ChainMap::new(projective.clone(), c.clone(), bwd_maps, bwd_total.radius.clone());
        let _ = &bwd_total;
    }
    // The support: all basis locations of the output.
    let mut pts = Vec::new();
    for deg in projective.degrees() {
        pts.extend(projective.module_at(deg).points.iter().copied());
    }
    let support = projective.space.subset_of(&pts);
    // Sanity: the support must stay within the stated neighborhood of Y.
    let bound = rat((4 * n + 14) as i128) * eps.clone();
    let zone = y.neighborhood(&bound);
    if !support.is_subset_of(&zone) {
        return Err(K0Error::SqueezeColumn);
    }
    let budget = rat((6 * n + 15) as i128) * eps.clone();
    let over = c.space.full_subset();
    let cert = certify_equivalence(&fwd_total, &budget, &over, false)
        .ok_or(K0Error::NoEquivalence)?;
    Ok(SqueezeResult { projective, map: fwd_total, cert, support: zone })
}

/// Converse direction: an equivalence onto a complex supported over `Y`
/// yields a contraction of the source over `X - Y^eps` (the target is
/// trivially contractible away from its support).
pub fn contraction_from_support(
    f: &ChainMap,
    cert: &EquivalenceCert,
    y_support: &Subset,
) -> ContractionCert {
    let zero_gamma = ContractionCert {
        gamma: BTreeMap::new(),
        radius: rat(0),
        over: y_support.complement(),
    };
    transfer_contraction(f, cert, &zero_gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::find_contraction;
    use crate::ring::{Ring, RingWithInvolution};
    use crate::space::ControlSpace;
    use std::sync::Arc;

    fn rwi() -> RingWithInvolution {
        RingWithInvolution::new(Ring::Int)
    }

    #[test]
    fn cone_class_of_identity_and_zero_map() {
        // g = identity on a two-term complex: the witness replays.
        let sp = ControlSpace::point();
        let m = GeomModule::new(rwi(), Arc::clone(&sp), vec![0]).unwrap();
        let d = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), 2)].into(), rat(0));
        let c = crate::complex::ControlledComplex::new(
            rwi(),
            sp.clone(),
            0,
            vec![m.clone(), m.clone()],
            vec![d],
            None,
            rat(0),
        );
        let id = ChainMap::identity(&c);
        let w = cone_class_witness(&id).unwrap();
        replay_cone_class(&id, &w).unwrap();
        let zero = ChainMap::zero(c.clone(), c.clone());
        let w0 = cone_class_witness(&zero).unwrap();
        replay_cone_class(&zero, &w0).unwrap();
    }

    #[test]
    fn stabilize_consumes_a_valid_witness() {
        // (C,p) = image of a rank-1 idempotent inside Z^2; complement
        // (E,1) = the complementary free part; (C,p)(+)(E,1) = free Z^2.
        let sp = ControlSpace::point();
        let m2 = GeomModule::new(rwi(), Arc::clone(&sp), vec![0, 0]).unwrap();
        let p = GeomMorphism::new(m2.clone(), m2.clone(), [((0, 0), 1)].into(), rat(0));
        let c = ControlledComplex::new(
            rwi(),
            sp.clone(),
            0,
            vec![m2.clone()],
            vec![],
            Some(vec![p]),
            rat(0),
        );
        let e = {
            let q = GeomMorphism::new(m2.clone(), m2.clone(), [((1, 1), 1)].into(), rat(0));
            let _ = q;
            crate::fixtures::concentrated_at_point(Ring::Int, 0, 0)
        };
        // Free target: rank-2 at the point; the map embeds the idempotent
        // image plus nothing.
        let f_cx = crate::fixtures::concentrated_at_point(Ring::Int, 2, 0);
        // Witness map: (C,p) (+) 0 -> F must be an equivalence of
        // projective complexes; p has rank 1 < 2, so this witness must be
        // rejected (F too big).
        let sum = c.direct_sum(&e);
        let map = ChainMap::new(
            sum.clone(),
            f_cx.clone(),
            [(0i64, GeomMorphism::new(sum.module_at(0), f_cx.module_at(0), [((0, 0), 1)].into(), rat(0)))]
                .into(),
            rat(0),
        );
        let bad = VanishingWitness {
            complement: e,
            target: f_cx,
            map,
            cert: EquivalenceCert {
                inverse: BTreeMap::new(),
                h: BTreeMap::new(),
                k: BTreeMap::new(),
                radius: rat(0),
                over: sp.full_subset(),
                weak: false,
            },
        };
        assert!(bad.verify(&c).is_err());
    }

    #[test]
    fn cone_class_witness_replays_on_random_maps() {
        let params = crate::fixtures::FixtureParams::default();
        for seed in 0..10u64 {
            let mut rng = crate::fixtures::Rng::new(0x44 + seed);
            let sp = crate::fixtures::random_space(&mut rng, &params);
            let c = crate::fixtures::random_complex(&mut rng, &params, &sp, &rat(1));
            if c.is_empty_complex() {
                continue;
            }
            let (g, _) = crate::fixtures::random_auto_equivalence(&mut rng, &params, &c, &rat(1));
            let w = cone_class_witness(&g).unwrap();
            replay_cone_class(&g, &w).unwrap();
        }
    }

    #[test]
    fn idempotent_and_complement_interleave_to_the_free_module() {
        // (C,p) (+) (C,1-p) is isomorphic to (C,1) by the evident block
        // map, relative to the idempotents.
        let sp = ControlSpace::point();
        let m = GeomModule::new(rwi(), Arc::clone(&sp), vec![0, 0]).unwrap();
        let p = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), 1)].into(), rat(0));
        let q = GeomMorphism::identity(&m).sub(&p);
        let mut fwd = BlockMatrix::new(vec![m.clone()], vec![m.clone(), m.clone()]);
        fwd.set(0, 0, &p, 1);
        fwd.set(0, 1, &q, 1);
        let fwd = fwd.assemble();
        let mut bwd = BlockMatrix::new(vec![m.clone(), m.clone()], vec![m.clone()]);
        bwd.set(0, 0, &p, 1);
        bwd.set(1, 0, &q, 1);
        let bwd = bwd.assemble();
        // fwd . bwd = p + q = 1 on (C,1); bwd . fwd = diag(p, q) on the sum.
        assert_eq!(fwd.compose(&bwd), GeomMorphism::identity(&m));
        let mut idem = BlockMatrix::new(vec![m.clone(), m.clone()], vec![m.clone(), m.clone()]);
        idem.set(0, 0, &p, 1);
        idem.set(1, 1, &q, 1);
        assert_eq!(bwd.compose(&fwd), idem.assemble());
    }

    #[test]
    fn squeeze_trivializes_a_fully_contractible_complex() {
        // C contractible over all of X (Y empty-ish): the squeeze empties
        // everything.
        let sp = ControlSpace::line(3, rat(1));
        let m = GeomModule::new(rwi(), Arc::clone(&sp), vec![2, 2]).unwrap();
        let d = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), 1), ((1, 1), -1)].into(), rat(0));
        let c = ControlledComplex::new(
            rwi(),
            Arc::clone(&sp),
            0,
            vec![m.clone(), m],
            vec![d],
            None,
            rat(0),
        );
        let y = sp.subset_of(&[0]);
        let x_minus_y = y.complement();
        let gamma = find_contraction(&c, &rat(0), &x_minus_y).expect("contractible");
        let out = squeeze_to_projective(&c, &gamma, &y, &rat(1)).expect("squeeze");
        assert!(out.projective.is_empty_complex() || out.projective.total_rank() == 0);
        assert!(replay_equivalence(&out.map, &out.cert).is_ok());
    }

    #[test]
    fn squeeze_keeps_the_y_supported_part() {
        // Complex with a unit differential at the far point (cancellable)
        // and a x2 differential at the Y point (kept).
        let sp = ControlSpace::line(6, rat(1));
        let m = GeomModule::new(rwi(), Arc::clone(&sp), vec![0, 5]).unwrap();
        let d = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), 2), ((1, 1), 1)].into(), rat(0));
        let c = ControlledComplex::new(
            rwi(),
            Arc::clone(&sp),
            0,
            vec![m.clone(), m],
            vec![d],
            None,
            rat(0),
        );
        let y = sp.subset_of(&[0]);
        let x_minus_y = y.complement();
        let gamma = find_contraction(&c, &rat(0), &x_minus_y).expect("contractible off Y");
        let out = squeeze_to_projective(&c, &gamma, &y, &rat(1)).expect("squeeze");
        assert!(replay_equivalence(&out.map, &out.cert).is_ok());
        // Output supported near Y, with the x2 part surviving.
        assert!(out.projective.total_rank() >= 2);
        for deg in out.projective.degrees() {
            for &p in &out.projective.module_at(deg).points {
                assert!(p <= 2, "output basis point {p} is not near Y");
            }
        }
        assert!(out.projective.verify().is_empty());
    }

    #[test]
    fn contraction_from_support_is_exact() {
        // Y-supported target: the source is contractible over X - Y^eps.
        let sp = ControlSpace::line(4, rat(1));
        let y = sp.subset_of(&[0]);
        let m = GeomModule::new(rwi(), Arc::clone(&sp), vec![0]).unwrap();
        let c = ControlledComplex::new(rwi(), Arc::clone(&sp), 0, vec![m], vec![], None, rat(0));
        let id = ChainMap::identity(&c);
        let cert = certify_equivalence(&id, &rat(0), &sp.full_subset(), false).unwrap();
        let gamma = contraction_from_support(&id, &cert, &y);
        assert!(crate::homotopy::replay_contraction(&c, &gamma).is_ok());
    }
}
