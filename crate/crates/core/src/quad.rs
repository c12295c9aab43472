//! Quadratic structures, pairs and cobordisms in the strict model: the
//! structure relation holds as an exact matrix identity per degree and
//! level, with certified radius bounds audited separately.

use crate::complex::{mapping_cone, sign, ChainMap, ControlledComplex};
use crate::homotopy::{
    certify_equivalence, find_contraction, replay_contraction, Equivalence, ContractionCert,
    ConnectivityCert, EquivalenceCert,
};
use crate::module::{BlockMatrix, GeomMorphism};
use crate::rat::{rat, rat_max, Rat};
use crate::space::Subset;
use std::collections::BTreeMap;
use thiserror::Error;

/// Level-indexed family of components: `maps[s]` sends degree `r` to the
/// component at target degree `r`.
pub type PsiFamily = Vec<BTreeMap<i64, GeomMorphism>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("structure relation fails at degree {r}, level {s}")]
    RelationFails { r: i64, s: usize },
    #[error("relation term exceeds the 3-radius audit at degree {r}, level {s}")]
    TermRadius { r: i64, s: usize },
    #[error("component at degree {r}, level {s} exceeds the structure radius")]
    ComponentRadius { r: i64, s: usize },
    #[error("component shape mismatch at degree {r}, level {s}")]
    Shape { r: i64, s: usize },
    #[error("component not compatible with the idempotents at degree {r}, level {s}")]
    ProjectiveCompat { r: i64, s: usize },
    #[error("pair boundary does not split as left (+) -right")]
    BoundaryBlock,
    #[error("carrier complex is defective")]
    Carrier,
}

/// `n`-dimensional quadratic structure on a carrier complex: components
/// `psi_s: C^{n-r-s} -> C_r` of radius <= `radius` satisfying the structure
/// relation exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadStructure {
    pub n: i64,
    pub carrier: ControlledComplex,
    pub psis: PsiFamily,
    pub radius: Rat,
}

/// Component `(T theta_s)^{(r)} = (-1)^{r(dim-r-s)} (theta_s^{(dim-r-s)})*`
/// for a family of dimension `dim` on `carrier`.
pub(crate) fn t_component(
    carrier: &ControlledComplex,
    family: &PsiFamily,
    dim: i64,
    s: usize,
    r: i64,
) -> GeomMorphism {
    let m = dim - r - s as i64;
    let comp = family
        .get(s)
        .and_then(|level| level.get(&m))
        .cloned()
        .unwrap_or_else(|| {
            GeomMorphism::zero(carrier.module_at(dim - m - s as i64), carrier.module_at(m))
        });
    comp.dual().scale(sign(r * m))
}

pub(crate) fn family_component(
    carrier_src: &ControlledComplex,
    carrier_tgt: &ControlledComplex,
    family: &PsiFamily,
    dim: i64,
    s: usize,
    r: i64,
) -> GeomMorphism {
    family
        .get(s)
        .and_then(|level| level.get(&r))
        .cloned()
        .unwrap_or_else(|| {
            GeomMorphism::zero(
                carrier_src.module_at(dim - r - s as i64),
                carrier_tgt.module_at(r),
            )
        })
}

/// The structure relation for a family of dimension `dim` on `c`:
/// `d.psi_s + (-1)^r psi_s.d* + (-1)^{dim-s-1}(psi_{s+1} + (-1)^{s+1} T psi_{s+1})`
/// at target degree `r`, level `s`, plus an extra term supplied by pairs.
pub(crate) fn relation_terms(
    c: &ControlledComplex,
    family: &PsiFamily,
    dim: i64,
    s: usize,
    r: i64,
) -> Vec<GeomMorphism> {
    let t1 = c.diff_at(r + 1).compose(&family_component(c, c, family, dim, s, r + 1));
    let t2 = family_component(c, c, family, dim, s, r)
        .compose(&c.diff_at(dim - r - s as i64).dual())
        .scale(sign(r));
    let t3a = family_component(c, c, family, dim, s + 1, r).scale(sign(dim - s as i64 - 1));
    let t3b = t_component(c, family, dim, s + 1, r)
        .scale(sign(dim - s as i64 - 1) * sign(s as i64 + 1));
    vec![t1, t2, t3a, t3b]
}

/// Full pair-relation residual at `(r, s)` for a candidate structure
/// `(delta, psi)` on `f`: zero for every `(r, s)` exactly when the
/// candidate is a quadratic pair.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn pair_relation_residual(
    f: &ChainMap,
    delta: &PsiFamily,
    psi: &QuadStructure,
    s: usize,
    r: i64,
) -> GeomMorphism {
    let n = psi.n;
    let d_cx = &f.target;
    let mut terms = relation_terms(d_cx, delta, n + 1, s, r);
    let t4 = f
        .map_at(r)
        .compose(&family_component(&psi.carrier, &psi.carrier, &psi.psis, n, s, r))
        .compose(&f.map_at(n - r - s as i64).dual())
        .scale(sign(n));
    terms.push(t4);
    let mut acc = terms[0].clone();
    for t in &terms[1..] {
        acc = acc.add(t);
    }
    acc
}

impl QuadStructure {
    pub fn zero(n: i64, carrier: ControlledComplex) -> Self {
        QuadStructure { n, carrier, psis: Vec::new(), radius: rat(0) }
    }

    pub fn s_max(&self) -> usize {
        self.psis.len().saturating_sub(1)
    }

    pub fn psi_at(&self, s: usize, r: i64) -> GeomMorphism {
        family_component(&self.carrier, &self.carrier, &self.psis, self.n, s, r)
    }

    pub fn t_at(&self, s: usize, r: i64) -> GeomMorphism {
        t_component(&self.carrier, &self.psis, self.n, s, r)
    }

    /// Target degrees at which any stored component can be nonzero.
    fn degree_range(&self) -> (i64, i64) {
        let lo = self.carrier.lo() - 2;
        let hi = self.carrier.hi() + 2;
        (lo, hi)
    }

    /// Exact structure relation check plus radius audits: every component
    /// within `radius`, every relation term within `3 * radius`.
    pub fn check(&self) -> Result<(), Vec<StructureError>> {
        let mut errs = Vec::new();
        if !self.carrier.verify().is_empty() {
            errs.push(StructureError::Carrier);
        }
        let three = rat(3) * self.radius.clone();
        let (lo, hi) = self.degree_range();
        for s in 0..=self.psis.len() {
            for r in lo..=hi {
                if s < self.psis.len() {
                    let comp = self.psi_at(s, r);
                    if comp.source != self.carrier.module_at(self.n - r - s as i64)
                        || comp.target != self.carrier.module_at(r)
                    {
                        errs.push(StructureError::Shape { r, s });
                        continue;
                    }
                    if comp.tight_radius() > self.radius {
                        errs.push(StructureError::ComponentRadius { r, s });
                    }
                    if self.carrier.is_projective() {
                        let p_tgt = self.carrier.idem_at(r);
                        let p_src = self.carrier.idem_at(self.n - r - s as i64).dual();
                        if p_tgt.compose(&comp).compose(&p_src) != comp {
                            errs.push(StructureError::ProjectiveCompat { r, s });
                        }
                    }
                }
                let terms = relation_terms(&self.carrier, &self.psis, self.n, s, r);
                if terms.iter().any(|t| t.tight_radius() > three) {
                    errs.push(StructureError::TermRadius { r, s });
                }
                let mut acc = terms[0].clone();
                for t in &terms[1..] {
                    acc = acc.add(t);
                }
                if !acc.is_zero() {
                    errs.push(StructureError::RelationFails { r, s });
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// The duality chain map `(1+T) psi_0 : C^{n-*} -> C`; exact chain map
    /// whenever the structure relation holds exactly.
    pub fn duality_map(&self) -> ChainMap {
        let source = self.carrier.n_dual(self.n);
        let maps = (self.carrier.lo() - 1..=self.carrier.hi() + 1)
            .map(|r| (r, self.psi_at(0, r).add(&self.t_at(0, r))))
            .filter(|(_, m)| !m.is_zero())
            .collect();
        ChainMap::new(source, self.carrier.clone(), maps, self.radius.clone())
    }

    pub fn neg(&self) -> QuadStructure {
        QuadStructure {
            n: self.n,
            carrier: self.carrier.clone(),
            psis: self
                .psis
                .iter()
                .map(|level| level.iter().map(|(&r, m)| (r, m.neg())).collect())
                .collect(),
            radius: self.radius.clone(),
        }
    }

    /// Blockwise direct sum.
    pub fn direct_sum(&self, other: &QuadStructure) -> QuadStructure {
        assert_eq!(self.n, other.n, "direct sum needs equal dimension");
        let carrier = self.carrier.direct_sum(&other.carrier);
        let levels = self.psis.len().max(other.psis.len());
        let mut psis: PsiFamily = Vec::new();
        for s in 0..levels {
            let mut level = BTreeMap::new();
            for r in carrier.lo() - 2..=carrier.hi() + 2 {
                let src_deg = self.n - r - s as i64;
                let mut b = BlockMatrix::new(
                    vec![self.carrier.module_at(r), other.carrier.module_at(r)],
                    vec![self.carrier.module_at(src_deg), other.carrier.module_at(src_deg)],
                );
                b.set(0, 0, &self.psi_at(s, r), 1);
                b.set(1, 1, &other.psi_at(s, r), 1);
                let m = b.assemble();
                if !m.is_zero() {
                    level.insert(r, m);
                }
            }
            psis.push(level);
        }
        QuadStructure {
            n: self.n,
            carrier,
            psis,
            radius: rat_max(self.radius.clone(), other.radius.clone()),
        }
    }

    /// Pushforward along a chain map: `(g_% psi)_s = g . psi_s . g*`.
    pub fn pushforward(&self, g: &ChainMap) -> QuadStructure {
        assert_eq!(g.source, self.carrier, "pushforward carrier mismatch");
        let target = g.target.clone();
        let mut psis: PsiFamily = Vec::new();
        for s in 0..self.psis.len() {
            let mut level = BTreeMap::new();
            for r in target.lo() - 2..=target.hi() + 2 {
                let src_deg = self.n - r - s as i64;
                let m = g
                    .map_at(r)
                    .compose(&self.psi_at(s, r))
                    .compose(&g.map_at(src_deg).dual());
                if !m.is_zero() {
                    level.insert(r, m);
                }
            }
            psis.push(level);
        }
        let radius = g.radius.clone() + g.radius.clone() + self.radius.clone();
        QuadStructure { n: self.n, carrier: target, psis, radius }
    }
}

/// Quadratic pair `(f: C -> D, (delta psi, psi))` of dimension `n+1` where
/// `psi` has dimension `n` on `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPair {
    pub f: ChainMap,
    pub delta: PsiFamily,
    pub psi: QuadStructure,
    pub radius: Rat,
}

impl QuadPair {
    pub fn dim(&self) -> i64 {
        self.psi.n + 1
    }

    pub fn target(&self) -> &ControlledComplex {
        &self.f.target
    }

    pub fn delta_at(&self, s: usize, r: i64) -> GeomMorphism {
        family_component(&self.f.target, &self.f.target, &self.delta, self.dim(), s, r)
    }

    pub fn t_delta_at(&self, s: usize, r: i64) -> GeomMorphism {
        t_component(&self.f.target, &self.delta, self.dim(), s, r)
    }

    /// Exact pair relation: the boundary relation for `psi` plus
    /// `d.dpsi_s + (-)^r dpsi_s d* + (-)^{n-s}(dpsi_{s+1} + (-)^{s+1}T dpsi_{s+1})
    ///  + (-)^n f psi_s f* = 0`.
    pub fn check(&self) -> Result<(), Vec<StructureError>> {
        let mut errs = Vec::new();
        if let Err(mut e) = self.psi.check() {
            errs.append(&mut e);
        }
        if !self.f.is_exact_chain_map() {
            errs.push(StructureError::Carrier);
        }
        let n = self.psi.n;
        let d_cx = &self.f.target;
        let three = rat(3) * self.radius.clone();
        let lo = d_cx.lo().min(self.psi.carrier.lo()) - 2;
        let hi = d_cx.hi().max(self.psi.carrier.hi()) + 2;
        for s in 0..=self.delta.len() {
            for r in lo..=hi {
                if s < self.delta.len() {
                    let comp = self.delta_at(s, r);
                    if comp.tight_radius() > self.radius {
                        errs.push(StructureError::ComponentRadius { r, s });
                    }
                    if d_cx.is_projective() {
                        let q_tgt = d_cx.idem_at(r);
                        let q_src = d_cx.idem_at(n + 1 - r - s as i64).dual();
                        if q_tgt.compose(&comp).compose(&q_src) != comp {
                            errs.push(StructureError::ProjectiveCompat { r, s });
                        }
                    }
                }
                let mut terms = relation_terms(d_cx, &self.delta, n + 1, s, r);
                let t4 = self
                    .f
                    .map_at(r)
                    .compose(&self.psi.psi_at(s, r))
                    .compose(&self.f.map_at(n - r - s as i64).dual())
                    .scale(sign(n));
                terms.push(t4);
                if terms.iter().any(|t| t.tight_radius() > three) {
                    errs.push(StructureError::TermRadius { r, s });
                }
                let mut acc = terms[0].clone();
                for t in &terms[1..] {
                    acc = acc.add(t);
                }
                if !acc.is_zero() {
                    errs.push(StructureError::RelationFails { r, s });
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Column duality map `D^{n+1-*} -> cone(f)`:
    /// `[(1+T)dpsi_0 ; (-1)^{n+1-r} (1+T)psi_0 . f*]`.
    pub fn duality_into_cone(&self) -> ChainMap {
        let n = self.psi.n;
        let d_cx = &self.f.target;
        let c_cx = &self.psi.carrier;
        let source = d_cx.n_dual(n + 1);
        let cone = mapping_cone(&self.f);
        let mut maps = BTreeMap::new();
        for r in cone.lo() - 1..=cone.hi() + 1 {
            let top = self.delta_at(0, r).add(&self.t_delta_at(0, r));
            let bottom = self
                .psi
                .psi_at(0, r - 1)
                .add(&self.psi.t_at(0, r - 1))
                .compose(&self.f.map_at(n + 1 - r).dual())
                .scale(sign(n + 1 - r));
            let mut b = BlockMatrix::new(
                vec![d_cx.module_at(r), c_cx.module_at(r - 1)],
                vec![d_cx.module_at(n + 1 - r)],
            );
            b.set(0, 0, &top, 1);
            b.set(1, 0, &bottom, 1);
            let m = b.assemble();
            if !m.is_zero() {
                maps.insert(r, m);
            }
        }
        let radius = self.radius.clone() + self.radius.clone();
        ChainMap::new(source, cone, maps, radius)
    }

    /// Row duality map `cone(f)^{n+1-*} -> D`:
    /// `[(1+T)dpsi_0 , f.(1+T)psi_0]`.
    pub fn duality_out_of_cone(&self) -> ChainMap {
        let n = self.psi.n;
        let d_cx = &self.f.target;
        let c_cx = &self.psi.carrier;
        let cone = mapping_cone(&self.f);
        let source = cone.n_dual(n + 1);
        let mut maps = BTreeMap::new();
        for r in d_cx.lo() - 1..=d_cx.hi() + 1 {
            let left = self.delta_at(0, r).add(&self.t_delta_at(0, r));
            let right = self
                .f
                .map_at(r)
                .compose(&self.psi.psi_at(0, r).add(&self.psi.t_at(0, r)));
            let mut b = BlockMatrix::new(
                vec![d_cx.module_at(r)],
                vec![d_cx.module_at(n + 1 - r), c_cx.module_at(n - r)],
            );
            b.set(0, 0, &left, 1);
            b.set(0, 1, &right, 1);
            let m = b.assemble();
            if !m.is_zero() {
                maps.insert(r, m);
            }
        }
        let radius = self.radius.clone() + self.radius.clone();
        ChainMap::new(source, d_cx.clone(), maps, radius)
    }
}

/// Poincare certificate for a structure: contraction of the duality cone.
pub fn poincare_certify_structure(
    q: &QuadStructure,
    over: &Subset,
) -> Option<ContractionCert> {
    let cone = mapping_cone(&q.duality_map());
    find_contraction(&cone, &(rat(4) * q.radius.clone()), over)
}

/// Poincare certificates for a pair: cone of the column duality map plus the
/// boundary structure's own Poincare certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPoincareCert {
    pub pair_cone: ContractionCert,
    pub boundary: ContractionCert,
}

pub fn poincare_certify_pair(p: &QuadPair, over: &Subset) -> Option<PairPoincareCert> {
    let cone = mapping_cone(&p.duality_into_cone());
    let four = rat(4) * p.radius.clone();
    let pair_cone = find_contraction(&cone, &four, over)?;
    let b_cone = mapping_cone(&p.psi.duality_map());
    let boundary = find_contraction(&b_cone, &(rat(4) * p.psi.radius.clone()), over)?;
    Some(PairPoincareCert { pair_cone, boundary })
}

pub fn replay_pair_poincare(
    p: &QuadPair,
    cert: &PairPoincareCert,
) -> Result<(), crate::homotopy::ReplayError> {
    replay_contraction(&mapping_cone(&p.duality_into_cone()), &cert.pair_cone)?;
    replay_contraction(&mapping_cone(&p.psi.duality_map()), &cert.boundary)
}

/// Connectivity certificate for a structure: the duality cone splits in
/// degree 0.
pub fn connected_certify_structure(q: &QuadStructure, eps: &Rat) -> Option<ConnectivityCert> {
    let cone = mapping_cone(&q.duality_map());
    crate::homotopy::check_connected(&cone, eps)
}

/// Connectivity for a pair: both duality maps are connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairConnectivityCert {
    pub boundary: ConnectivityCert,
    pub pair: ConnectivityCert,
}

pub fn connected_certify_pair(p: &QuadPair, eps: &Rat) -> Option<PairConnectivityCert> {
    let boundary = connected_certify_structure(&p.psi, eps)?;
    let cone = mapping_cone(&p.duality_into_cone());
    let pair = crate::homotopy::check_connected(&cone, eps)?;
    Some(PairConnectivityCert { boundary, pair })
}

/// Cobordism: a pair whose boundary splits literally as `left (+) -right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cobordism {
    pub pair: QuadPair,
    pub left: QuadStructure,
    pub right: QuadStructure,
}

/// Compares level families up to trailing empty levels.
pub(crate) fn families_equal(a: &PsiFamily, b: &PsiFamily) -> bool {
    let len = a.len().max(b.len());
    for s in 0..len {
        let ea = a.get(s).map_or(true, |l| l.is_empty());
        let eb = b.get(s).map_or(true, |l| l.is_empty());
        match (a.get(s), b.get(s)) {
            (Some(la), Some(lb)) => {
                if la != lb {
                    return false;
                }
            }
            _ => {
                if !(ea && eb) {
                    return false;
                }
            }
        }
    }
    true
}

impl Cobordism {
    pub fn try_new(
        pair: QuadPair,
        left: QuadStructure,
        right: QuadStructure,
    ) -> Result<Self, StructureError> {
        let expect = left.direct_sum(&right.neg());
        if pair.psi.carrier != expect.carrier || !families_equal(&pair.psi.psis, &expect.psis) {
            return Err(StructureError::BoundaryBlock);
        }
        Ok(Cobordism { pair, left, right })
    }

    /// Inclusion of the left end into the pair source.
    pub fn left_inclusion(&self) -> ChainMap {
        let total = &self.pair.psi.carrier;
        let maps = self
            .left
            .carrier
            .degrees()
            .map(|r| {
                let mut b = BlockMatrix::new(
                    vec![self.left.carrier.module_at(r), self.right.carrier.module_at(r)],
                    vec![self.left.carrier.module_at(r)],
                );
                b.set(0, 0, &GeomMorphism::identity(&self.left.carrier.module_at(r)), 1);
                (r, b.assemble())
            })
            .filter(|(_, m)| !m.is_zero())
            .collect();
        ChainMap::new(self.left.carrier.clone(), total.clone(), maps, rat(0))
    }
}

/// Pushforward of a structure along `g` plus the induced cobordism
/// `((g 1): C (+) C' -> C', (0, psi (+) -g_% psi))`.
pub fn pushforward_with_cobordism(
    g: &ChainMap,
    q: &QuadStructure,
) -> (QuadStructure, Cobordism) {
    let pushed = q.pushforward(g);
    let boundary = q.direct_sum(&pushed.neg());
    let cprime = &g.target;
    let mut maps = BTreeMap::new();
    for r in boundary.carrier.lo()..=boundary.carrier.hi() {
        let mut b = BlockMatrix::new(
            vec![cprime.module_at(r)],
            vec![q.carrier.module_at(r), cprime.module_at(r)],
        );
        b.set(0, 0, &g.map_at(r), 1);
        b.set(0, 1, &GeomMorphism::identity(&cprime.module_at(r)), 1);
        let m = b.assemble();
        if !m.is_zero() {
            maps.insert(r, m);
        }
    }
    let f = ChainMap::new(boundary.carrier.clone(), cprime.clone(), maps, g.radius.clone());
    let pair = QuadPair {
        f,
        delta: Vec::new(),
        psi: boundary,
        radius: pushed.radius.clone(),
    };
    let cob = Cobordism { pair, left: q.clone(), right: pushed.clone() };
    (pushed, cob)
}

/// The trivial self-cobordism of a structure.
pub fn trivial_cobordism(q: &QuadStructure) -> Cobordism {
    let id = ChainMap::identity(&q.carrier);
    pushforward_with_cobordism(&id, q).1
}

/// Null-cobordism `((1 1): C (+) C -> C, (0, psi (+) -psi))` exhibiting
/// `-psi` as the additive inverse.
pub fn inverse_nullcobordism(q: &QuadStructure) -> Cobordism {
    trivial_cobordism(q)
}

/// The displayed pushforward of a pair structure through a homotopy square:
/// `(g, h; k)_% (dpsi, psi)` where `d k + k d = f' g - h f` exactly.
pub fn pushforward_pair(
    g: &ChainMap,
    h: &ChainMap,
    k: &BTreeMap<i64, GeomMorphism>,
    f_prime: &ChainMap,
    pair: &QuadPair,
) -> Result<QuadPair, StructureError> {
    let n = pair.psi.n;
    let f = &pair.f;
    assert_eq!(g.source, f.source);
    assert_eq!(h.source, f.target);
    assert_eq!(f_prime.source, g.target);
    assert_eq!(f_prime.target, h.target);
    let d_prime = &h.target;
    let k_at = |r: i64| {
        k.get(&r)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(f.source.module_at(r), d_prime.module_at(r + 1)))
    };
    // Verify the homotopy identity d k + k d = f' g - h f exactly.
    for r in f.source.lo() - 1..=f.source.hi() + 1 {
        let lhs = d_prime.diff_at(r + 1).compose(&k_at(r)).add(&k_at(r - 1).compose(&f.source.diff_at(r)));
        let rhs = f_prime
            .map_at(r)
            .compose(&g.map_at(r))
            .sub(&h.map_at(r).compose(&f.map_at(r)));
        if lhs != rhs {
            return Err(StructureError::RelationFails { r, s: usize::MAX });
        }
    }
    let pushed_psi = pair.psi.pushforward(g);
    let mut delta: PsiFamily = Vec::new();
    let levels = pair.delta.len().max(pair.psi.psis.len() + 1).max(1);
    for s in 0..levels {
        let mut level = BTreeMap::new();
        for r in d_prime.lo() - 2..=d_prime.hi() + 2 {
            let src_deg = n + 1 - r - s as i64;
            // h . dpsi_s . h*
            let t1 = h
                .map_at(r)
                .compose(&pair.delta_at(s, r))
                .compose(&h.map_at(src_deg).dual());
            // (-1)^{n+1} k . psi_s . f* . h*
            let t2 = k_at(r - 1)
                .compose(&pair.psi.psi_at(s, r - 1))
                .compose(&f.map_at(n - (r - 1) - s as i64).dual())
                .compose(&h.map_at(src_deg).dual())
                .scale(sign(n + 1));
            // (-1)^{n-r+1} f' . g . psi_s . k*
            let t3 = f_prime
                .map_at(r)
                .compose(&g.map_at(r))
                .compose(&pair.psi.psi_at(s, r))
                .compose(&k_at(n - r - s as i64).dual())
                .scale(sign(n - r + 1));
            // (-1)^{r+1} k . (T psi_{s+1}) . k*
            let t4 = k_at(r - 1)
                .compose(&pair.psi.t_at(s + 1, r - 1))
                .compose(&k_at(n - r - s as i64).dual())
                .scale(sign(r + 1));
            let m = t1.add(&t2).add(&t3).add(&t4);
            if !m.is_zero() {
                level.insert(r, m);
            }
        }
        delta.push(level);
    }
    let radius = rat(4)
        * [
            pair.radius.clone(),
            g.radius.clone(),
            h.radius.clone(),
            k.values().map(|m| m.radius.clone()).fold(rat(0), rat_max),
        ]
        .into_iter()
        .fold(rat(0), rat_max);
    Ok(QuadPair { f: f_prime.clone(), delta, psi: pushed_psi, radius })
}

/// Transport of a pair along source/target equivalences: the homotopy
/// `k = -h f Gamma` where `Gamma: g_inv g ~ 1`, then the displayed
/// pushforward applies to `f' = h f g_inv`.
pub fn transport_pair(
    pair: &QuadPair,
    g: &Equivalence,
    h: &Equivalence,
) -> Result<QuadPair, StructureError> {
    let f = &pair.f;
    let g_inv = g.cert.inverse_chain_map(&g.map);
    let f_prime = h.map.compose(f).compose(&g_inv);
    // Gamma: g_inv g ~ 1 is the h-homotopy of the g certificate
    // (d Gamma + Gamma d = p - g_inv g), so 1 - g_inv g = d Gamma + Gamma d
    // and k := -h f Gamma satisfies d k + k d = f' g - h f exactly.
    let mut k = BTreeMap::new();
    for r in f.source.lo() - 1..=f.source.hi() + 1 {
        let gamma_r = g.cert.h_at(&g.map, r);
        let m = h
            .map
            .map_at(r + 1)
            .compose(&f.map_at(r + 1))
            .compose(&gamma_r)
            .neg();
        if !m.is_zero() {
            k.insert(r, m);
        }
    }
    pushforward_pair(&g.map, &h.map, &k, &f_prime, pair)
}

/// Certified equivalence search specialised to duality use sites: find an
/// equivalence certificate for `f` at radius `eps` over the full space.
pub fn certify_full_equivalence(f: &ChainMap, eps: &Rat) -> Option<EquivalenceCert> {
    let over = f.source.space.full_subset();
    certify_equivalence(f, eps, &over, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::GeomModule;
    use crate::ring::{Ring, RingWithInvolution};
    use crate::space::ControlSpace;
    use std::sync::Arc;

    fn rwi(ring: Ring) -> RingWithInvolution {
        RingWithInvolution::new(ring)
    }

    /// Rank-k module concentrated in degree `deg` at a point.
    fn concentrated(ring: Ring, rank: usize, deg: i64) -> ControlledComplex {
        let sp = ControlSpace::point();
        let m = GeomModule::new(rwi(ring), Arc::clone(&sp), vec![0; rank]).unwrap();
        ControlledComplex::new(rwi(ring), sp, deg, vec![m], vec![], None, rat(0))
    }

    fn rank_one_form(ring: Ring, a: i128) -> QuadStructure {
        crate::fixtures::rank_one_form(ring, a)
    }

    fn hyperbolic_form(ring: Ring) -> QuadStructure {
        crate::fixtures::hyperbolic_form(ring)
    }

    #[test]
    fn zero_structure_checks() {
        let c = concentrated(Ring::Int, 2, 0);
        let q = QuadStructure::zero(0, c);
        q.check().unwrap();
    }

    #[test]
    fn rank_one_form_checks_and_duality_doubles() {
        let q = rank_one_form(Ring::Int, 1);
        q.check().unwrap();
        let d = q.duality_map();
        assert!(d.is_exact_chain_map());
        assert_eq!(d.map_at(0).entry(0, 0), 2);
    }

    #[test]
    fn hyperbolic_duality_is_the_symmetric_pairing() {
        let q = hyperbolic_form(Ring::Int);
        q.check().unwrap();
        let d = q.duality_map();
        let m = d.map_at(0);
        assert_eq!(m.entry(0, 1), 1);
        assert_eq!(m.entry(1, 0), 1);
        assert_eq!(m.entry(0, 0), 0);
        assert_eq!(m.entry(1, 1), 0);
    }

    #[test]
    fn zero_structure_duality_is_zero() {
        let c = concentrated(Ring::Int, 2, 0);
        let q = QuadStructure::zero(0, c);
        assert!(q.duality_map().map_at(0).is_zero());
    }

    #[test]
    fn poincare_rank_one_mod3_but_not_over_z() {
        let over = ControlSpace::point().full_subset();
        let q3 = rank_one_form(Ring::Mod(3), 1);
        assert!(poincare_certify_structure(&q3, &over).is_some());
        let qz = rank_one_form(Ring::Int, 1);
        assert!(poincare_certify_structure(&qz, &over).is_none());
        let hyp = hyperbolic_form(Ring::Int);
        assert!(poincare_certify_structure(&hyp, &over).is_some());
    }

    #[test]
    fn pushforward_by_identity_is_identity_and_cobordism_checks() {
        let q = hyperbolic_form(Ring::Int);
        let id = ChainMap::identity(&q.carrier);
        let (pushed, cob) = pushforward_with_cobordism(&id, &q);
        assert_eq!(pushed.psis, q.psis);
        cob.pair.check().unwrap();
        // The (1 1) cobordism of psi (+) -psi is Poincare whenever psi is.
        let over = q.carrier.space.full_subset();
        assert!(poincare_certify_pair(&cob.pair, &over).is_some());
    }

    #[test]
    fn pushforward_by_unit_scales_by_unit_square() {
        let q = rank_one_form(Ring::Mod(5), 1);
        let m = q.carrier.module_at(0);
        let u = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), 2)].into(), rat(0));
        let g = ChainMap::new(
            q.carrier.clone(),
            q.carrier.clone(),
            [(0i64, u)].into(),
            rat(0),
        );
        let pushed = q.pushforward(&g);
        // g psi g* = 2 * 1 * 2 = 4 mod 5.
        assert_eq!(pushed.psi_at(0, 0).entry(0, 0), 4);
        pushed.check().unwrap();
    }

    #[test]
    fn trivial_cobordism_matches_identity_pushforward() {
        let q = rank_one_form(Ring::Mod(3), 1);
        let triv = trivial_cobordism(&q);
        let (_, via_push) = pushforward_with_cobordism(&ChainMap::identity(&q.carrier), &q);
        assert_eq!(triv.pair.f, via_push.pair.f);
        assert_eq!(triv.pair.psi.psis, via_push.pair.psi.psis);
        triv.pair.check().unwrap();
    }

    #[test]
    fn direct_sum_of_rank_ones_is_diagonal() {
        let a = rank_one_form(Ring::Int, 1);
        let b = rank_one_form(Ring::Int, -2);
        let s = a.direct_sum(&b);
        s.check().unwrap();
        let m = s.psi_at(0, 0);
        assert_eq!(m.entry(0, 0), 1);
        assert_eq!(m.entry(1, 1), -2);
        assert_eq!(m.entry(0, 1), 0);
        // q (+) 0 = q.
        let z = QuadStructure::zero(0, concentrated(Ring::Int, 0, 0));
        let same = a.direct_sum(&z);
        assert_eq!(same.psis, a.psis);
    }

    #[test]
    fn pushforward_transport_certifies_at_the_stated_budget() {
        // A Poincare structure pushed through an exact equivalence of
        // radius delta: both the pushed structure and the induced cobordism
        // certify Poincare at 2 delta + 6 eps over the shrunken subset.
        let params = crate::fixtures::FixtureParams::default();
        let mut rng = crate::fixtures::Rng::new(0x29);
        let sp = crate::fixtures::random_space(&mut rng, &params);
        let q = crate::fixtures::random_poincare(&mut rng, &params, &sp);
        let (g, _) = crate::fixtures::random_auto_equivalence(&mut rng, &params, &q.carrier, &rat(1));
        let (pushed, cob) = pushforward_with_cobordism(&g, &q);
        pushed.check().unwrap();
        cob.pair.check().unwrap();
        let eps = crate::rat::rat_max(q.radius.clone(), rat(1));
        let delta = crate::rat::rat_max(g.radius.clone(), rat(1));
        let budget = rat(2) * delta.clone() + rat(6) * eps.clone();
        let shrink = -(rat(6) * delta + rat(24) * eps);
        let over = sp.full_subset().neighborhood(&shrink);
        let cone = mapping_cone(&pushed.duality_map());
        let cert = find_contraction(&cone, &(rat(4) * budget.clone()), &over)
            .expect("pushforward certifies within the stated budget");
        assert!(replay_contraction(&cone, &cert).is_ok());
        let pair_cone = mapping_cone(&cob.pair.duality_into_cone());
        assert!(find_contraction(&pair_cone, &(rat(4) * budget), &over).is_some());
    }

    #[test]
    fn pushforward_pair_with_identities_is_unchanged() {
        // g = h = id, k = 0: the displayed four-term formula collapses to
        // the original pair.
        let q = hyperbolic_form(Ring::Int);
        let data = crate::boundary::boundary_complex(&q);
        let pair = &data.thickening;
        let g = ChainMap::identity(&pair.f.source);
        let h = ChainMap::identity(&pair.f.target);
        let out = pushforward_pair(&g, &h, &BTreeMap::new(), &pair.f, pair).unwrap();
        assert!(families_equal(&out.psi.psis, &pair.psi.psis));
        assert!(families_equal(&out.delta, &pair.delta));
        out.check().unwrap();
    }

    #[test]
    fn composite_of_connected_maps_is_connected_within_the_sum() {
        // Two connected chain maps compose to a connected map within the
        // additive budget.
        let sp = ControlSpace::point();
        let rwi = RingWithInvolution::new(Ring::Mod(5));
        let m = crate::module::GeomModule::new(rwi, Arc::clone(&sp), vec![0]).unwrap();
        let c = ControlledComplex::new(rwi, sp.clone(), 0, vec![m.clone()], vec![], None, rat(0));
        let unit = |k: i128| {
            let f = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), k)].into(), rat(0));
            ChainMap::new(c.clone(), c.clone(), [(0i64, f)].into(), rat(0))
        };
        let f = unit(2);
        let g = unit(3);
        let conn = |map: &ChainMap, budget: &crate::rat::Rat| {
            crate::homotopy::check_connected(&mapping_cone(map), budget).is_some()
        };
        assert!(conn(&f, &rat(1)));
        assert!(conn(&g, &rat(1)));
        assert!(conn(&g.compose(&f), &rat(2)), "composite connected within the sum");
    }

    #[test]
    fn pair_contractibility_bounds_the_boundary_duality_cone() {
        // If the pair duality cone contracts at 4 eps over W, the boundary
        // duality cone contracts within 100 eps over the -100 eps
        // shrinking.
        let q = hyperbolic_form(Ring::Mod(3));
        let data = crate::boundary::boundary_complex(&q);
        let pair = &data.thickening;
        let over = q.carrier.space.full_subset();
        let eps = crate::rat::rat_max(pair.radius.clone(), rat(1));
        let pair_cone = mapping_cone(&pair.duality_into_cone());
        assert!(find_contraction(&pair_cone, &(rat(4) * eps.clone()), &over).is_some());
        let b_cone = mapping_cone(&pair.psi.duality_map());
        let shrunk = over.neighborhood(&-(rat(100) * eps.clone()));
        let cert = find_contraction(&b_cone, &(rat(100) * eps), &shrunk)
            .expect("boundary duality cone contracts within the stated bound");
        assert!(replay_contraction(&b_cone, &cert).is_ok());
    }

    #[test]
    fn pair_with_zero_structures_checks() {
        // Thickening-shaped trivial pair: f: C -> 0 with (0, -psi).
        let q = rank_one_form(Ring::Mod(3), 1);
        let zero = ControlledComplex::empty(rwi(Ring::Mod(3)), Arc::clone(&q.carrier.space));
        let f = ChainMap::zero(q.carrier.clone(), zero);
        let pair = QuadPair { f, delta: Vec::new(), psi: q.neg(), radius: rat(0) };
        pair.check().unwrap();
    }
}
