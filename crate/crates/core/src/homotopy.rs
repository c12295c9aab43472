//! Certificates for contractibility, connectivity and (weak) chain
//! equivalence over subsets, with exact replay and the constructive moves
//! between them (cone extraction, contraction transfer, triads).
//!
//! Replay never calls the solver: it re-checks the defining identities with
//! matrix arithmetic only.

use crate::complex::{mapping_cone, sign, ChainMap, ControlledComplex};
use crate::module::{BlockMatrix, GeomMorphism};
use crate::rat::{rat, rat_max, Rat};
use crate::solver::{LinearTerm, MorphEquation, MorphismSystem, MorphismVar};
use crate::space::Subset;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("contraction identity fails at degree {0} over the certified subset")]
    ContractionIdentity(i64),
    #[error("connectivity identity d.h = identity fails")]
    ConnectivityIdentity,
    #[error("inverse is not a chain map over the certified subset at degree {0}")]
    InverseNotChainMap(i64),
    #[error("homotopy identity fails at degree {0} ({1})")]
    HomotopyIdentity(i64, &'static str),
    #[error("certified radius exceeded: {0}")]
    RadiusExceeded(&'static str),
    #[error("underlying map is not an exact chain map")]
    NotChainMap,
    #[error("certificate shape mismatch: {0}")]
    Shape(&'static str),
}

/// Chain contraction over a subset: `(d.G + G.d - p)|W = 0` exactly, where
/// `p` is the identity (free case) or the structure idempotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionCert {
    pub gamma: BTreeMap<i64, GeomMorphism>,
    pub radius: Rat,
    pub over: Subset,
}

impl ContractionCert {
    pub fn gamma_at(&self, c: &ControlledComplex, r: i64) -> GeomMorphism {
        self.gamma
            .get(&r)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(c.module_at(r), c.module_at(r + 1)))
    }
}

pub fn replay_contraction(
    c: &ControlledComplex,
    cert: &ContractionCert,
) -> Result<(), ReplayError> {
    for g in cert.gamma.values() {
        if g.tight_radius() > cert.radius {
            return Err(ReplayError::RadiusExceeded("contraction witness"));
        }
    }
    for r in (c.lo() - 1)..=(c.hi() + 1) {
        let lhs = c
            .diff_at(r + 1)
            .compose(&cert.gamma_at(c, r))
            .add(&cert.gamma_at(c, r - 1).compose(&c.diff_at(r)));
        let defect = lhs.sub(&c.idem_at(r));
        if !defect.is_zero_over(&cert.over) {
            return Err(ReplayError::ContractionIdentity(r));
        }
    }
    Ok(())
}

/// Searches for a contraction of radius <= `eps` valid over `over`.
/// Infeasibility is exact (`None`).
pub fn find_contraction(
    c: &ControlledComplex,
    eps: &Rat,
    over: &Subset,
) -> Option<ContractionCert> {
    if c.is_empty_complex() {
        return Some(ContractionCert { gamma: BTreeMap::new(), radius: rat(0), over: over.clone() });
    }
    let mut sys = MorphismSystem::new(c.ring.ring);
    let mut var_of: BTreeMap<i64, usize> = BTreeMap::new();
    for r in c.lo()..=c.hi() {
        let src = c.module_at(r);
        let tgt = c.module_at(r + 1);
        if src.is_zero() || tgt.is_zero() {
            continue;
        }
        let v = sys.add_var(MorphismVar::new(src, tgt, eps.clone()));
        var_of.insert(r, v);
    }
    for r in c.lo()..=c.hi() {
        let target = c.module_at(r);
        if target.is_zero() {
            continue;
        }
        let mut terms = Vec::new();
        if let Some(&v) = var_of.get(&r) {
            // d_{r+1} . (p X p)
            terms.push(LinearTerm::plain(1, Some(c.diff_at(r + 1).compose(&c.idem_at(r + 1))), v, Some(c.idem_at(r))));
        }
        if let Some(&v) = var_of.get(&(r - 1)) {
            // (p X p) . d_r
            terms.push(LinearTerm::plain(1, Some(c.idem_at(r)), v, Some(c.idem_at(r - 1).compose(&c.diff_at(r)))));
        }
        sys.add_equation(MorphEquation {
            source: target.clone(),
            target: target.clone(),
            terms,
            constant: c.idem_at(r).neg(),
            columns: Some(over.clone()),
        });
    }
    let ws = sys.solve()?;
    let extra = if c.is_projective() {
        c.radius.clone() + c.radius.clone()
    } else {
        rat(0)
    };
    let mut gamma = BTreeMap::new();
    for (&r, &v) in &var_of {
        let raw = &ws[v];
        let g = c.idem_at(r + 1).compose(raw).compose(&c.idem_at(r));
        if !g.is_zero() {
            gamma.insert(
                r,
                g.with_radius(eps.clone() + extra.clone()).expect("support bound"),
            );
        }
    }
    let cert = ContractionCert { gamma, radius: eps.clone() + extra, over: over.clone() };
    debug_assert!(replay_contraction(c, &cert).is_ok());
    Some(cert)
}

/// Connectivity witness: a morphism `h: C_0 -> C_1` of radius <= 4 eps with
/// `d.h = p` exactly on degree 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityCert {
    pub h: GeomMorphism,
    pub radius: Rat,
}

pub fn replay_connectivity(
    c: &ControlledComplex,
    cert: &ConnectivityCert,
) -> Result<(), ReplayError> {
    if cert.h.tight_radius() > cert.radius {
        return Err(ReplayError::RadiusExceeded("connectivity witness"));
    }
    if cert.h.source != c.module_at(0) || cert.h.target != c.module_at(1) {
        return Err(ReplayError::Shape("connectivity witness degree"));
    }
    let lhs = c.diff_at(1).compose(&cert.h);
    if lhs != c.idem_at(0) {
        return Err(ReplayError::ConnectivityIdentity);
    }
    Ok(())
}

/// Searches for the degree-0 splitting `d h = p` with `h` of radius 4 eps.
pub fn check_connected(c: &ControlledComplex, eps: &Rat) -> Option<ConnectivityCert> {
    let m0 = c.module_at(0);
    if m0.is_zero() {
        return Some(ConnectivityCert {
            h: GeomMorphism::zero(m0, c.module_at(1)),
            radius: rat(0),
        });
    }
    let budget = rat(4) * eps.clone();
    let mut sys = MorphismSystem::new(c.ring.ring);
    let v = sys.add_var(MorphismVar::new(m0.clone(), c.module_at(1), budget.clone()));
    sys.add_equation(MorphEquation {
        source: m0.clone(),
        target: m0.clone(),
        terms: vec![LinearTerm::plain(1, Some(c.diff_at(1).compose(&c.idem_at(1))), v, Some(c.idem_at(0)))],
        constant: c.idem_at(0).neg(),
        columns: None,
    });
    let ws = sys.solve()?;
    let extra = if c.is_projective() {
        c.radius.clone() + c.radius.clone()
    } else {
        rat(0)
    };
    let h = c.idem_at(1).compose(&ws[0]).compose(&c.idem_at(0));
    let radius = budget + extra;
    let cert = ConnectivityCert { h: h.with_radius(radius.clone()).expect("support"), radius };
    debug_assert!(replay_connectivity(c, &cert).is_ok());
    Some(cert)
}

/// Witness family for a (weak) chain equivalence over a subset:
/// an inverse `g`, a homotopy `h` with `d h + h d = p - g f` over the
/// subset, and a homotopy `k` with `d k + k d = q - f g` over the subset.
/// For a weak equivalence `g` commutes with `d` only over the subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceCert {
    pub inverse: BTreeMap<i64, GeomMorphism>,
    pub h: BTreeMap<i64, GeomMorphism>,
    pub k: BTreeMap<i64, GeomMorphism>,
    pub radius: Rat,
    pub over: Subset,
    pub weak: bool,
}

impl EquivalenceCert {
    pub fn inverse_at(&self, f: &ChainMap, r: i64) -> GeomMorphism {
        self.inverse
            .get(&r)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(f.target.module_at(r), f.source.module_at(r)))
    }
    pub fn h_at(&self, f: &ChainMap, r: i64) -> GeomMorphism {
        self.h
            .get(&r)
            .cloned()
            .unwrap_or_else(|| {
                GeomMorphism::zero(f.source.module_at(r), f.source.module_at(r + 1))
            })
    }
    pub fn k_at(&self, f: &ChainMap, r: i64) -> GeomMorphism {
        self.k
            .get(&r)
            .cloned()
            .unwrap_or_else(|| {
                GeomMorphism::zero(f.target.module_at(r), f.target.module_at(r + 1))
            })
    }

    /// The inverse as a chain map; exact only for non-weak certificates.
    pub fn inverse_chain_map(&self, f: &ChainMap) -> ChainMap {
        ChainMap::new(
            f.target.clone(),
            f.source.clone(),
            self.inverse.clone(),
            self.radius.clone(),
        )
    }
}

/// A chain map bundled with its equivalence certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub map: ChainMap,
    pub cert: EquivalenceCert,
}

pub fn replay_equivalence(f: &ChainMap, cert: &EquivalenceCert) -> Result<(), ReplayError> {
    if !f.is_exact_chain_map() {
        return Err(ReplayError::NotChainMap);
    }
    let c = &f.source;
    let d = &f.target;
    let two = cert.radius.clone() + cert.radius.clone();
    let lo = c.lo().min(d.lo()) - 1;
    let hi = c.hi().max(d.hi()) + 1;
    for r in lo..=hi {
        let g_r = cert.inverse_at(f, r);
        if g_r.tight_radius() > cert.radius {
            return Err(ReplayError::RadiusExceeded("equivalence inverse"));
        }
        let dg = c.diff_at(r).compose(&g_r);
        let gd = cert.inverse_at(f, r - 1).compose(&d.diff_at(r));
        if dg.tight_radius() > cert.radius || gd.tight_radius() > cert.radius {
            return Err(ReplayError::RadiusExceeded("inverse composites"));
        }
        let defect = dg.sub(&gd);
        let ok = if cert.weak { defect.is_zero_over(&cert.over) } else { defect.is_zero() };
        if !ok {
            return Err(ReplayError::InverseNotChainMap(r));
        }
        // d h + h d = p - g f over the subset.
        let h_def = c
            .diff_at(r + 1)
            .compose(&cert.h_at(f, r))
            .add(&cert.h_at(f, r - 1).compose(&c.diff_at(r)))
            .sub(&c.idem_at(r).sub(&g_r.compose(&f.map_at(r))));
        if cert.h_at(f, r).tight_radius() > two {
            return Err(ReplayError::RadiusExceeded("homotopy h"));
        }
        if !h_def.is_zero_over(&cert.over) {
            return Err(ReplayError::HomotopyIdentity(r, "g.f side"));
        }
        let k_def = d
            .diff_at(r + 1)
            .compose(&cert.k_at(f, r))
            .add(&cert.k_at(f, r - 1).compose(&d.diff_at(r)))
            .sub(&d.idem_at(r).sub(&f.map_at(r).compose(&g_r)));
        if cert.k_at(f, r).tight_radius() > two {
            return Err(ReplayError::RadiusExceeded("homotopy k"));
        }
        if !k_def.is_zero_over(&cert.over) {
            return Err(ReplayError::HomotopyIdentity(r, "f.g side"));
        }
    }
    Ok(())
}

/// Solver search for a (weak) equivalence witness at radius `eps` over a
/// subset.
pub fn certify_equivalence(
    f: &ChainMap,
    eps: &Rat,
    over: &Subset,
    weak: bool,
) -> Option<EquivalenceCert> {
    if !f.is_exact_chain_map() {
        return None;
    }
    let c = &f.source;
    let d = &f.target;
    let two = eps.clone() + eps.clone();
    let mut sys = MorphismSystem::new(c.ring.ring);
    let lo = c.lo().min(d.lo());
    let hi = c.hi().max(d.hi());
    let mut g_var: BTreeMap<i64, usize> = BTreeMap::new();
    let mut h_var: BTreeMap<i64, usize> = BTreeMap::new();
    let mut k_var: BTreeMap<i64, usize> = BTreeMap::new();
    for r in lo..=hi {
        if !d.module_at(r).is_zero() && !c.module_at(r).is_zero() {
            g_var.insert(
                r,
                sys.add_var(MorphismVar::new(d.module_at(r), c.module_at(r), eps.clone())),
            );
        }
        if !c.module_at(r).is_zero() && !c.module_at(r + 1).is_zero() {
            h_var.insert(
                r,
                sys.add_var(MorphismVar::new(c.module_at(r), c.module_at(r + 1), two.clone())),
            );
        }
        if !d.module_at(r).is_zero() && !d.module_at(r + 1).is_zero() {
            k_var.insert(
                r,
                sys.add_var(MorphismVar::new(d.module_at(r), d.module_at(r + 1), two.clone())),
            );
        }
    }
    for r in lo..=hi {
        // (d g - g d)|columns = 0 (columns = subset for weak; everything
        // otherwise).
        let mut terms = Vec::new();
        if let Some(&v) = g_var.get(&r) {
            terms.push(LinearTerm::plain(1, Some(c.diff_at(r)), v, None));
        }
        if let Some(&v) = g_var.get(&(r - 1)) {
            terms.push(LinearTerm::plain(-1, None, v, Some(d.diff_at(r))));
        }
        if !terms.is_empty() {
            sys.add_equation(MorphEquation {
                source: d.module_at(r),
                target: c.module_at(r - 1),
                terms,
                constant: GeomMorphism::zero(d.module_at(r), c.module_at(r - 1)),
                columns: if weak { Some(over.clone()) } else { None },
            });
        }
        // d h + h d + g f - p = 0 over the subset.
        let mut terms = Vec::new();
        if let Some(&v) = h_var.get(&r) {
            terms.push(LinearTerm::plain(1, Some(c.diff_at(r + 1)), v, None));
        }
        if let Some(&v) = h_var.get(&(r - 1)) {
            terms.push(LinearTerm::plain(1, None, v, Some(c.diff_at(r))));
        }
        if let Some(&v) = g_var.get(&r) {
            terms.push(LinearTerm::plain(1, None, v, Some(f.map_at(r))));
        }
        if !(terms.is_empty() && c.module_at(r).is_zero()) && !c.module_at(r).is_zero() {
            sys.add_equation(MorphEquation {
                source: c.module_at(r),
                target: c.module_at(r),
                terms,
                constant: c.idem_at(r).neg(),
                columns: Some(over.clone()),
            });
        }
        // d k + k d + f g - q = 0 over the subset.
        let mut terms = Vec::new();
        if let Some(&v) = k_var.get(&r) {
            terms.push(LinearTerm::plain(1, Some(d.diff_at(r + 1)), v, None));
        }
        if let Some(&v) = k_var.get(&(r - 1)) {
            terms.push(LinearTerm::plain(1, None, v, Some(d.diff_at(r))));
        }
        if let Some(&v) = g_var.get(&r) {
            terms.push(LinearTerm::plain(1, Some(f.map_at(r)), v, None));
        }
        if !d.module_at(r).is_zero() {
            sys.add_equation(MorphEquation {
                source: d.module_at(r),
                target: d.module_at(r),
                terms,
                constant: d.idem_at(r).neg(),
                columns: Some(over.clone()),
            });
        }
    }
    let ws = sys.solve()?;
    let collect = |vars: &BTreeMap<i64, usize>| {
        vars.iter()
            .map(|(&r, &v)| (r, ws[v].clone()))
            .filter(|(_, m)| !m.is_zero())
            .collect::<BTreeMap<_, _>>()
    };
    let cert = EquivalenceCert {
        inverse: collect(&g_var),
        h: collect(&h_var),
        k: collect(&k_var),
        radius: eps.clone(),
        over: over.clone(),
        weak,
    };
    debug_assert!(replay_equivalence(f, &cert).is_ok(), "{:?}", replay_equivalence(f, &cert));
    Some(cert)
}

/// Constructive direction of the cone criterion: a contraction of
/// `cone(f)` of radius eps over W yields a weak 2 eps equivalence witness
/// for `f` over W, extracted from the contraction blocks.
pub fn weak_equiv_from_cone_contraction(
    f: &ChainMap,
    gamma: &ContractionCert,
) -> EquivalenceCert {
    let c = &f.source;
    let d = &f.target;
    let cone = mapping_cone(f);
    let mut inverse = BTreeMap::new();
    let mut h = BTreeMap::new();
    let mut k = BTreeMap::new();
    for r in cone.lo()..=cone.hi() {
        // cone_r = D_r + C_{r-1}; Gamma_r: cone_r -> cone_{r+1}.
        let g_r = gamma.gamma_at(&cone, r);
        let d_rank = d.module_at(r).rank();
        let c_rank = c.module_at(r - 1).rank();
        let d_up = d.module_at(r + 1).rank();
        // Block (C-row, D-col) of Gamma_r: rows d_up.., cols 0..d_rank.
        let tgt_c = c.module_at(r);
        let src_d = d.module_at(r);
        let sel_rows: Vec<usize> = (d_up..d_up + tgt_c.rank()).collect();
        let sel_cols: Vec<usize> = (0..d_rank).collect();
        let block_g = g_r.compress(&sel_rows, &sel_cols, tgt_c.clone(), src_d.clone());
        let g_signed = block_g.scale(sign(r));
        if !g_signed.is_zero() {
            inverse.insert(r, g_signed);
        }
        // Block (C-row, C-col): homotopy h at source degree r-1.
        let src_c = c.module_at(r - 1);
        let sel_cols_c: Vec<usize> = (d_rank..d_rank + c_rank).collect();
        let block_e = g_r.compress(&sel_rows, &sel_cols_c, tgt_c, src_c);
        if !block_e.is_zero() {
            h.insert(r - 1, block_e);
        }
        // Block (D-row, D-col): homotopy k at degree r.
        let tgt_d = d.module_at(r + 1);
        let sel_rows_d: Vec<usize> = (0..d_up).collect();
        let block_a = g_r.compress(&sel_rows_d, &sel_cols, tgt_d, src_d);
        if !block_a.is_zero() {
            k.insert(r, block_a);
        }
    }
    EquivalenceCert {
        inverse,
        h,
        k,
        radius: gamma.radius.clone() + gamma.radius.clone(),
        over: gamma.over.clone(),
        weak: true,
    }
}

/// Converse direction: a weak eps equivalence over W yields a cone
/// contraction of radius 3 eps over W^{-2 eps}, found by the solver.
pub fn cone_contraction_from_weak_equiv(
    f: &ChainMap,
    cert: &EquivalenceCert,
) -> Option<ContractionCert> {
    let cone = mapping_cone(f);
    let shrink = -(cert.radius.clone() + cert.radius.clone());
    let over = cert.over.neighborhood(&shrink);
    find_contraction(&cone, &(rat(3) * cert.radius.clone()), &over)
}

/// Contraction transfer along an equivalence: if `B` is contractible over
/// `V` and `f: A -> B` is an equivalence with inverse `g` and homotopy
/// `h: g f ~ p`, then `g.Gamma.f + h` contracts `A` over `V^{-eps}` at
/// radius `2 eps + delta`. Exact in the strict model.
pub fn transfer_contraction(
    f: &ChainMap,
    cert: &EquivalenceCert,
    gamma: &ContractionCert,
) -> ContractionCert {
    let a = &f.source;
    let b = &f.target;
    let mut out = BTreeMap::new();
    for r in (a.lo() - 1)..=(a.hi() + 1) {
        let part = cert
            .inverse_at(f, r + 1)
            .compose(&gamma.gamma_at(b, r))
            .compose(&f.map_at(r))
            .add(&cert.h_at(f, r));
        if !part.is_zero() {
            out.insert(r, part);
        }
    }
    let radius =
        cert.radius.clone() + cert.radius.clone() + gamma.radius.clone();
    let over = gamma.over.neighborhood(&-cert.radius.clone());
    ContractionCert { gamma: out, radius, over }
}

/// Reverses a full (non-weak) equivalence bundle: the inverse becomes the
/// map, with the two homotopy families exchanged.
pub fn reverse_equivalence(f: &ChainMap, cert: &EquivalenceCert) -> (ChainMap, EquivalenceCert) {
    assert!(!cert.weak, "only full equivalences reverse");
    let inv = cert.inverse_chain_map(f);
    let rev = EquivalenceCert {
        inverse: f.degrees().map(|r| (r, f.map_at(r))).collect(),
        h: cert.k.clone(),
        k: cert.h.clone(),
        radius: cert.radius.clone(),
        over: cert.over.clone(),
        weak: false,
    };
    (inv, rev)
}

/// Contraction of `cone(-g)` from a contraction of `cone(g)`: conjugate the
/// off-diagonal blocks by -1.
pub fn negate_cone_contraction(
    g: &ChainMap,
    gamma: &ContractionCert,
) -> ContractionCert {
    let cone = mapping_cone(g);
    let mut out = BTreeMap::new();
    for r in cone.lo()..=cone.hi() {
        let m = gamma.gamma_at(&cone, r);
        let d_rank = g.target.module_at(r).rank();
        let d_up = g.target.module_at(r + 1).rank();
        let mut entries = BTreeMap::new();
        for (row, col, v) in m.entries() {
            let row_in_c = row >= d_up;
            let col_in_c = col >= d_rank;
            let flip = row_in_c != col_in_c;
            entries.insert((row, col), if flip { g.source.ring.ring.neg(v) } else { v });
        }
        let flipped =
            GeomMorphism::new(m.source.clone(), m.target.clone(), entries, m.radius.clone());
        if !flipped.is_zero() {
            out.insert(r, flipped);
        }
    }
    ContractionCert { gamma: out, radius: gamma.radius.clone(), over: gamma.over.clone() }
}

/// Homotopy-commutative square data: `d k + k d = bottom.left - right.top`
/// exactly, `k` raising degree by one from the top-left corner to the
/// bottom-right corner.
#[derive(Debug, Clone)]
pub struct Triad {
    pub top: ChainMap,
    pub bottom: ChainMap,
    pub left: ChainMap,
    pub right: ChainMap,
    pub homotopy: BTreeMap<i64, GeomMorphism>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriadError {
    #[error("triad homotopy identity fails at degree {0}")]
    HomotopyFails(i64),
    #[error("triad corners do not match")]
    CornerMismatch,
}

impl Triad {
    pub fn homotopy_at(&self, r: i64) -> GeomMorphism {
        self.homotopy.get(&r).cloned().unwrap_or_else(|| {
            GeomMorphism::zero(self.top.source.module_at(r), self.bottom.target.module_at(r + 1))
        })
    }

    pub fn verify(&self) -> Result<(), TriadError> {
        if self.top.source != self.left.source
            || self.top.target != self.right.source
            || self.bottom.source != self.left.target
            || self.bottom.target != self.right.target
        {
            return Err(TriadError::CornerMismatch);
        }
        let c = &self.top.source;
        let dprime = &self.bottom.target;
        for r in (c.lo() - 1)..=(c.hi() + 1) {
            let lhs = dprime
                .diff_at(r + 1)
                .compose(&self.homotopy_at(r))
                .add(&self.homotopy_at(r - 1).compose(&c.diff_at(r)));
            let rhs = self
                .bottom
                .map_at(r)
                .compose(&self.left.map_at(r))
                .sub(&self.right.map_at(r).compose(&self.top.map_at(r)));
            if lhs != rhs {
                return Err(TriadError::HomotopyFails(r));
            }
        }
        Ok(())
    }

    /// The two induced block maps `F: cone(-left) -> cone(right)` and
    /// `G: cone(top) -> cone(bottom)`, whose cones agree after the middle
    /// swap.
    pub fn induced_maps(&self) -> (ChainMap, ChainMap) {
        let radius_f = [
            self.top.radius.clone(),
            self.bottom.radius.clone(),
            self.homotopy.values().map(|m| m.radius.clone()).fold(rat(0), rat_max),
        ]
        .into_iter()
        .fold(rat(0), rat_max);
        let radius_g = [
            self.left.radius.clone(),
            self.right.radius.clone(),
            self.homotopy.values().map(|m| m.radius.clone()).fold(rat(0), rat_max),
        ]
        .into_iter()
        .fold(rat(0), rat_max);

        let minus_left = self.left.neg();
        let cone_mleft = mapping_cone(&minus_left);
        let cone_right = mapping_cone(&self.right);
        let mut f_maps = BTreeMap::new();
        for r in cone_mleft.lo().min(cone_right.lo())..=cone_mleft.hi().max(cone_right.hi()) {
            let mut b = BlockMatrix::new(
                vec![self.right.target.module_at(r), self.right.source.module_at(r - 1)],
                vec![self.left.target.module_at(r), self.left.source.module_at(r - 1)],
            );
            b.set(0, 0, &self.bottom.map_at(r), 1);
            b.set(0, 1, &self.homotopy_at(r - 1), sign(r));
            b.set(1, 1, &self.top.map_at(r - 1), -1);
            let m = b.assemble();
            if !m.is_zero() {
                f_maps.insert(r, m);
            }
        }
        let f = ChainMap::new(cone_mleft, cone_right, f_maps, radius_f);

        let cone_top = mapping_cone(&self.top);
        let cone_bottom = mapping_cone(&self.bottom);
        let mut g_maps = BTreeMap::new();
        for r in cone_top.lo().min(cone_bottom.lo())..=cone_top.hi().max(cone_bottom.hi()) {
            let mut b = BlockMatrix::new(
                vec![self.bottom.target.module_at(r), self.bottom.source.module_at(r - 1)],
                vec![self.top.target.module_at(r), self.top.source.module_at(r - 1)],
            );
            b.set(0, 0, &self.right.map_at(r), 1);
            b.set(0, 1, &self.homotopy_at(r - 1), sign(r));
            b.set(1, 1, &self.left.map_at(r - 1), 1);
            let m = b.assemble();
            if !m.is_zero() {
                g_maps.insert(r, m);
            }
        }
        let g = ChainMap::new(cone_top, cone_bottom, g_maps, radius_g);
        (f, g)
    }
}

/// Any chain map between complexes contractible over W is a weak
/// equivalence over W: witness (0, Gamma_source, Gamma_target).
pub fn equivalence_between_contractibles(
    _f: &ChainMap,
    gamma_src: &ContractionCert,
    gamma_tgt: &ContractionCert,
    radius: &Rat,
    over: &Subset,
) -> EquivalenceCert {
    EquivalenceCert {
        inverse: BTreeMap::new(),
        h: gamma_src.gamma.clone(),
        k: gamma_tgt.gamma.clone(),
        radius: radius.clone(),
        over: over.clone(),
        weak: true,
    }
}

/// Composition of weak equivalences with explicit witnesses: a weak
/// `delta` equivalence over `V` followed by a weak `eps` equivalence over
/// `W` composes to a weak `delta+eps` equivalence over
/// `V^{-delta-eps} . W^{-delta}`.
pub fn compose_weak_equivalences(
    f: &Equivalence,
    f2: &Equivalence,
) -> Equivalence {
    let delta = f.cert.radius.clone();
    let eps = f2.cert.radius.clone();
    let c = &f.map.source;
    let d = &f.map.target;
    assert_eq!(*d, f2.map.source, "equivalences do not compose");
    let e = &f2.map.target;
    let comp = f2.map.compose(&f.map);
    let mut inverse = BTreeMap::new();
    let mut h = BTreeMap::new();
    let mut k = BTreeMap::new();
    for r in (c.lo().min(e.lo()) - 1)..=(c.hi().max(e.hi()) + 1) {
        let g_comp = f.cert.inverse_at(&f.map, r).compose(&f2.cert.inverse_at(&f2.map, r));
        if !g_comp.is_zero() {
            inverse.insert(r, g_comp);
        }
        // H = h_f + g_f h' f_f.
        let mid = f
            .cert
            .inverse_at(&f.map, r + 1)
            .compose(&f2.cert.h_at(&f2.map, r))
            .compose(&f.map.map_at(r));
        let h_r = f.cert.h_at(&f.map, r).add(&mid);
        if !h_r.is_zero() {
            h.insert(r, h_r);
        }
        // K = k' + f' k g'.
        let mid = f2
            .map
            .map_at(r + 1)
            .compose(&f.cert.k_at(&f.map, r))
            .compose(&f2.cert.inverse_at(&f2.map, r));
        let k_r = f2.cert.k_at(&f2.map, r).add(&mid);
        if !k_r.is_zero() {
            k.insert(r, k_r);
        }
    }
    let total = delta.clone() + eps.clone();
    let over = f
        .cert
        .over
        .neighborhood(&-total.clone())
        .intersect(&f2.cert.over.neighborhood(&-delta));
    let cert = EquivalenceCert { inverse, h, k, radius: total, over, weak: true };
    Equivalence { map: comp, cert }
}
