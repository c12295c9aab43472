//! Geometric modules and radius-certified morphisms.
//!
//! A geometric module is a free module whose basis elements carry locations
//! in a control space. A morphism is a sparse matrix whose every nonzero
//! entry is certified to connect points at distance at most the stored
//! radius bound. Operations propagate worst-case bounds; `tight_radius`
//! recomputes the exact entry-wise radius for audits.

use crate::rat::{rat, rat_max, Rat};
use crate::ring::{Coeff, RingWithInvolution};
use crate::space::{ControlSpace, Subset};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("basis location {0} outside the control space")]
    BadLocation(usize),
    #[error("entry ({row},{col}) out of shape {rows}x{cols}")]
    BadIndex { row: usize, col: usize, rows: usize, cols: usize },
    #[error("entry ({row},{col}) connects points at distance {dist} > declared radius {radius}")]
    RadiusViolated { row: usize, col: usize, dist: String, radius: String },
    #[error("negative radius bound {0}")]
    NegativeRadius(String),
    #[error("source/target mismatch in {0}")]
    Mismatch(String),
    #[error("morphisms live over different rings")]
    RingMismatch,
}

/// Free module with located basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeomModule {
    pub ring: RingWithInvolution,
    pub space: Arc<ControlSpace>,
    /// Location (point index) of each basis element.
    pub points: Vec<usize>,
}

impl GeomModule {
    pub fn new(
        ring: RingWithInvolution,
        space: Arc<ControlSpace>,
        points: Vec<usize>,
    ) -> Result<Self, ModuleError> {
        if let Some(&p) = points.iter().find(|p| **p >= space.len()) {
            return Err(ModuleError::BadLocation(p));
        }
        Ok(GeomModule { ring, space, points })
    }

    pub fn zero(ring: RingWithInvolution, space: Arc<ControlSpace>) -> Self {
        GeomModule { ring, space, points: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.points.len()
    }

    pub fn is_zero(&self) -> bool {
        self.points.is_empty()
    }

    /// Direct sum; basis of `self` first.
    pub fn direct_sum(&self, other: &GeomModule) -> GeomModule {
        debug_assert_eq!(self.ring, other.ring);
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        GeomModule { ring: self.ring, space: Arc::clone(&self.space), points }
    }

    pub fn direct_sum_all(parts: &[&GeomModule]) -> GeomModule {
        assert!(!parts.is_empty());
        let mut acc = parts[0].clone();
        for p in &parts[1..] {
            acc = acc.direct_sum(p);
        }
        acc
    }

    /// Submodule generated by basis elements located in `s`, together with
    /// the indices those generators had in `self`.
    pub fn restrict_to(&self, s: &Subset) -> (GeomModule, Vec<usize>) {
        let keep: Vec<usize> =
            (0..self.rank()).filter(|&i| s.contains(self.points[i])).collect();
        let points = keep.iter().map(|&i| self.points[i]).collect();
        (GeomModule { ring: self.ring, space: Arc::clone(&self.space), points }, keep)
    }
}

/// Sparse morphism with a certified radius bound.
///
/// Equality compares source, target and the matrix only: the certified
/// radius is a certificate attribute, and "f = g" in the strict model means
/// equality as matrices.
#[derive(Debug, Clone, Eq)]
pub struct GeomMorphism {
    pub source: GeomModule,
    pub target: GeomModule,
    /// (target index, source index) -> nonzero coefficient.
    entries: BTreeMap<(usize, usize), Coeff>,
    /// Certified bound: every entry connects points at distance <= radius.
    pub radius: Rat,
}

impl PartialEq for GeomMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.entries == other.entries
    }
}

impl GeomMorphism {
    pub fn try_new(
        source: GeomModule,
        target: GeomModule,
        entries: BTreeMap<(usize, usize), Coeff>,
        radius: Rat,
    ) -> Result<Self, ModuleError> {
        if radius < rat(0) {
            return Err(ModuleError::NegativeRadius(crate::rat::format_rat(&radius)));
        }
        let ring = source.ring.ring;
        let mut clean = BTreeMap::new();
        for (&(row, col), &c) in &entries {
            if row >= target.rank() || col >= source.rank() {
                return Err(ModuleError::BadIndex {
                    row,
                    col,
                    rows: target.rank(),
                    cols: source.rank(),
                });
            }
            let c = ring.normalize(c);
            if ring.is_zero(c) {
                continue;
            }
            let d = source.space.d(source.points[col], target.points[row]);
            if d > radius {
                return Err(ModuleError::RadiusViolated {
                    row,
                    col,
                    dist: crate::rat::format_rat(&d),
                    radius: crate::rat::format_rat(&radius),
                });
            }
            clean.insert((row, col), c);
        }
        Ok(GeomMorphism { source, target, entries: clean, radius })
    }

    pub fn new(
        source: GeomModule,
        target: GeomModule,
        entries: BTreeMap<(usize, usize), Coeff>,
        radius: Rat,
    ) -> Self {
        Self::try_new(source, target, entries, radius).expect("morphism construction")
    }

    pub fn zero(source: GeomModule, target: GeomModule) -> Self {
        GeomMorphism { source, target, entries: BTreeMap::new(), radius: rat(0) }
    }

    pub fn identity(module: &GeomModule) -> Self {
        let entries = (0..module.rank()).map(|i| ((i, i), module.ring.ring.one())).collect();
        GeomMorphism {
            source: module.clone(),
            target: module.clone(),
            entries,
            radius: rat(0),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Coeff)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn entry(&self, row: usize, col: usize) -> Coeff {
        self.entries.get(&(row, col)).copied().unwrap_or(0)
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact entry-wise radius: the largest distance any nonzero entry spans.
    pub fn tight_radius(&self) -> Rat {
        let mut worst = rat(0);
        for (&(row, col), _) in &self.entries {
            let d = self.source.space.d(self.source.points[col], self.target.points[row]);
            worst = rat_max(worst, d);
        }
        worst
    }

    /// Same matrix with the certified bound replaced by `radius`.
    pub fn with_radius(&self, radius: Rat) -> Result<Self, ModuleError> {
        Self::try_new(self.source.clone(), self.target.clone(), self.entries.clone(), radius)
    }

    /// Same matrix, certified radius shrunk to the tight audit value.
    pub fn tightened(&self) -> Self {
        let r = self.tight_radius();
        self.with_radius(r).expect("tight radius always certifies")
    }

    pub fn add(&self, other: &GeomMorphism) -> GeomMorphism {
        assert_eq!(self.source, other.source, "add: source mismatch");
        assert_eq!(self.target, other.target, "add: target mismatch");
        let ring = self.source.ring.ring;
        let mut entries = self.entries.clone();
        for (&k, &v) in &other.entries {
            let s = ring.add(*entries.get(&k).unwrap_or(&0), v);
            if ring.is_zero(s) {
                entries.remove(&k);
            } else {
                entries.insert(k, s);
            }
        }
        GeomMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            entries,
            radius: rat_max(self.radius.clone(), other.radius.clone()),
        }
    }

    pub fn sub(&self, other: &GeomMorphism) -> GeomMorphism {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, c: Coeff) -> GeomMorphism {
        let ring = self.source.ring.ring;
        let mut entries = BTreeMap::new();
        for (&k, &v) in &self.entries {
            let s = ring.mul(v, c);
            if !ring.is_zero(s) {
                entries.insert(k, s);
            }
        }
        let radius = if entries.is_empty() { rat(0) } else { self.radius.clone() };
        GeomMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            entries,
            radius,
        }
    }

    pub fn neg(&self) -> GeomMorphism {
        self.scale(-1)
    }

    /// Matrix product `self . other`; certified radius adds.
    pub fn compose(&self, other: &GeomMorphism) -> GeomMorphism {
        assert_eq!(
            other.target, self.source,
            "compose: target of right factor must equal source of left factor"
        );
        let ring = self.source.ring.ring;
        // Bucket the right factor's entries by row for the sparse product.
        let mut by_row: BTreeMap<usize, Vec<(usize, Coeff)>> = BTreeMap::new();
        for (&(r, c), &v) in &other.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut entries: BTreeMap<(usize, usize), Coeff> = BTreeMap::new();
        for (&(r, mid), &v) in &self.entries {
            if let Some(cols) = by_row.get(&mid) {
                for &(c, w) in cols {
                    let add = ring.mul(v, w);
                    let s = ring.add(*entries.get(&(r, c)).unwrap_or(&0), add);
                    if ring.is_zero(s) {
                        entries.remove(&(r, c));
                    } else {
                        entries.insert((r, c), s);
                    }
                }
            }
        }
        let radius = if entries.is_empty() {
            rat(0)
        } else {
            self.radius.clone() + other.radius.clone()
        };
        GeomMorphism {
            source: other.source.clone(),
            target: self.target.clone(),
            entries,
            radius,
        }
    }

    /// Transpose with involuted coefficients; the certified radius carries over.
    pub fn dual(&self) -> GeomMorphism {
        let rwi = self.source.ring;
        let entries = self
            .entries
            .iter()
            .map(|(&(r, c), &v)| ((c, r), rwi.conj(v)))
            .filter(|(_, v)| !rwi.ring.is_zero(*v))
            .collect();
        GeomMorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            entries,
            radius: self.radius.clone(),
        }
    }

    /// Keeps exactly the entries whose source basis location lies in `s`.
    pub fn restrict(&self, s: &Subset) -> GeomMorphism {
        let entries = self
            .entries
            .iter()
            .filter(|(&(_, c), _)| s.contains(self.source.points[c]))
            .map(|(&k, &v)| (k, v))
            .collect();
        GeomMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            entries,
            radius: self.radius.clone(),
        }
    }

    /// True when every entry restricted to columns over `s` vanishes.
    pub fn is_zero_over(&self, s: &Subset) -> bool {
        self.restrict(s).is_zero()
    }

    /// Compression onto selected target rows and source columns, as a map
    /// between the corresponding restricted modules.
    pub fn compress(
        &self,
        target_sel: &[usize],
        source_sel: &[usize],
        new_target: GeomModule,
        new_source: GeomModule,
    ) -> GeomMorphism {
        let row_pos: BTreeMap<usize, usize> =
            target_sel.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let col_pos: BTreeMap<usize, usize> =
            source_sel.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let entries = self
            .entries
            .iter()
            .filter_map(|(&(r, c), &v)| {
                match (row_pos.get(&r), col_pos.get(&c)) {
                    (Some(&nr), Some(&nc)) => Some(((nr, nc), v)),
                    _ => None,
                }
            })
            .collect();
        GeomMorphism {
            source: new_source,
            target: new_target,
            entries,
            radius: self.radius.clone(),
        }
    }
}

/// Projective module: a geometric module with an exact idempotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectiveModule {
    pub module: GeomModule,
    pub idem: GeomMorphism,
}

impl ProjectiveModule {
    pub fn try_new(module: GeomModule, idem: GeomMorphism) -> Result<Self, ModuleError> {
        if idem.source != module || idem.target != module {
            return Err(ModuleError::Mismatch("projective idempotent endomorphism".into()));
        }
        if idem.compose(&idem) != idem {
            return Err(ModuleError::Mismatch("idempotent must satisfy p.p = p exactly".into()));
        }
        Ok(ProjectiveModule { module, idem })
    }

    pub fn free(module: GeomModule) -> Self {
        let idem = GeomMorphism::identity(&module);
        ProjectiveModule { module, idem }
    }
}

/// Builder for block morphisms between direct sums.
pub struct BlockMatrix {
    pub target_parts: Vec<GeomModule>,
    pub source_parts: Vec<GeomModule>,
    blocks: BTreeMap<(usize, usize), GeomMorphism>,
}

impl BlockMatrix {
    pub fn new(target_parts: Vec<GeomModule>, source_parts: Vec<GeomModule>) -> Self {
        BlockMatrix { target_parts, source_parts, blocks: BTreeMap::new() }
    }

    /// Installs `block` at block position (i, j), scaled by `scalar`.
    pub fn set(&mut self, i: usize, j: usize, block: &GeomMorphism, scalar: Coeff) -> &mut Self {
        assert_eq!(block.target, self.target_parts[i], "block target mismatch at ({i},{j})");
        assert_eq!(block.source, self.source_parts[j], "block source mismatch at ({i},{j})");
        let scaled = block.scale(scalar);
        if !scaled.is_zero() {
            self.blocks.insert((i, j), scaled);
        }
        self
    }

    pub fn assemble(&self) -> GeomMorphism {
        let target = GeomModule::direct_sum_all(&self.target_parts.iter().collect::<Vec<_>>());
        let source = GeomModule::direct_sum_all(&self.source_parts.iter().collect::<Vec<_>>());
        let row_off: Vec<usize> = self
            .target_parts
            .iter()
            .scan(0, |acc, m| {
                let v = *acc;
                *acc += m.rank();
                Some(v)
            })
            .collect();
        let col_off: Vec<usize> = self
            .source_parts
            .iter()
            .scan(0, |acc, m| {
                let v = *acc;
                *acc += m.rank();
                Some(v)
            })
            .collect();
        let mut entries = BTreeMap::new();
        let mut radius = rat(0);
        for (&(bi, bj), block) in &self.blocks {
            radius = rat_max(radius, block.radius.clone());
            for (r, c, v) in block.entries() {
                entries.insert((row_off[bi] + r, col_off[bj] + c), v);
            }
        }
        GeomMorphism { source, target, entries, radius }
    }
}

/// Point map between control spaces with a certified expansion bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    pub source: Arc<ControlSpace>,
    pub target: Arc<ControlSpace>,
    pub map: Vec<usize>,
    /// Certified Lipschitz constant.
    pub expansion: Rat,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PointMapError {
    #[error("map must assign every source point, got {got} of {need}")]
    Incomplete { got: usize, need: usize },
    #[error("image point {0} outside target space")]
    BadImage(usize),
    #[error("expansion bound violated: d(f(x{i}),f(x{j})) > {lam} * d(x{i},x{j})")]
    ExpansionViolated { i: usize, j: usize, lam: String },
}

impl PointMap {
    pub fn new(
        source: Arc<ControlSpace>,
        target: Arc<ControlSpace>,
        map: Vec<usize>,
        expansion: Rat,
    ) -> Result<Self, PointMapError> {
        if map.len() != source.len() {
            return Err(PointMapError::Incomplete { got: map.len(), need: source.len() });
        }
        if let Some(&p) = map.iter().find(|p| **p >= target.len()) {
            return Err(PointMapError::BadImage(p));
        }
        for i in 0..source.len() {
            for j in 0..source.len() {
                if target.d(map[i], map[j]) > expansion.clone() * source.d(i, j) {
                    return Err(PointMapError::ExpansionViolated {
                        i,
                        j,
                        lam: crate::rat::format_rat(&expansion),
                    });
                }
            }
        }
        Ok(PointMap { source, target, map, expansion })
    }

    pub fn identity(space: &Arc<ControlSpace>) -> Self {
        PointMap {
            source: Arc::clone(space),
            target: Arc::clone(space),
            map: (0..space.len()).collect(),
            expansion: rat(1),
        }
    }

    /// Relabels basis locations through the map.
    pub fn push_module(&self, m: &GeomModule) -> GeomModule {
        assert!(m.space == self.source);
        GeomModule {
            ring: m.ring,
            space: Arc::clone(&self.target),
            points: m.points.iter().map(|&p| self.map[p]).collect(),
        }
    }

    /// Relabels a morphism; the certified radius scales by the expansion bound.
    pub fn push_morphism(&self, f: &GeomMorphism) -> GeomMorphism {
        let source = self.push_module(&f.source);
        let target = self.push_module(&f.target);
        GeomMorphism {
            source,
            target,
            entries: f.entries.clone(),
            radius: self.expansion.clone() * f.radius.clone(),
        }
    }
}

impl PointMap {
    /// Relabels a whole complex; every differential's certified radius
    /// scales by the expansion bound.
    pub fn push_complex(
        &self,
        c: &crate::complex::ControlledComplex,
    ) -> crate::complex::ControlledComplex {
        if c.is_empty_complex() {
            return crate::complex::ControlledComplex::empty(c.ring, Arc::clone(&self.target));
        }
        let modules = c.degrees().map(|r| self.push_module(&c.module_at(r))).collect();
        let diffs = c
            .degrees()
            .skip(1)
            .map(|r| self.push_morphism(&c.diff_at(r)))
            .collect();
        let idems = if c.is_projective() {
            Some(c.degrees().map(|r| self.push_morphism(&c.idem_at(r))).collect())
        } else {
            None
        };
        crate::complex::ControlledComplex::new(
            c.ring,
            Arc::clone(&self.target),
            c.lo(),
            modules,
            diffs,
            idems,
            self.expansion.clone() * c.radius.clone(),
        )
    }

    /// Relabels a quadratic structure; the certified radius scales by the
    /// expansion bound.
    pub fn push_structure(
        &self,
        q: &crate::quad::QuadStructure,
    ) -> crate::quad::QuadStructure {
        let carrier = self.push_complex(&q.carrier);
        let psis = q
            .psis
            .iter()
            .map(|level| level.iter().map(|(&r, m)| (r, self.push_morphism(m))).collect())
            .collect();
        crate::quad::QuadStructure {
            n: q.n,
            carrier,
            psis,
            radius: self.expansion.clone() * q.radius.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Ring, RingWithInvolution};

    fn rwi() -> RingWithInvolution {
        RingWithInvolution::new(Ring::Int)
    }

    fn line3_module(points: &[usize]) -> GeomModule {
        let sp = ControlSpace::line(3, rat(1));
        GeomModule::new(rwi(), sp, points.to_vec()).unwrap()
    }

    fn single(src: &GeomModule, tgt: &GeomModule, r: usize, c: usize, v: Coeff, rad: Rat) -> GeomMorphism {
        GeomMorphism::new(src.clone(), tgt.clone(), [((r, c), v)].into(), rad)
    }

    #[test]
    fn radius_certification_rejects_long_entries() {
        let m = line3_module(&[0, 2]);
        let err = GeomMorphism::try_new(m.clone(), m.clone(), [((0, 1), 1)].into(), rat(1))
            .unwrap_err();
        assert!(matches!(err, ModuleError::RadiusViolated { .. }));
    }

    #[test]
    fn dual_preserves_radius_and_is_an_involution() {
        let src = line3_module(&[0]);
        let tgt = line3_module(&[2]);
        let f = single(&src, &tgt, 0, 0, 3, rat(2));
        let d = f.dual();
        assert_eq!(d.radius, rat(2));
        assert_eq!(d.entry(0, 0), 3);
        assert_eq!(d.source, tgt);
        assert_eq!(d.dual(), f);
    }

    #[test]
    fn compose_adds_radius_and_identity_is_neutral() {
        let a = line3_module(&[0]);
        let b = line3_module(&[1]);
        let c = line3_module(&[2]);
        let f = single(&a, &b, 0, 0, 2, rat(1));
        let g = single(&b, &c, 0, 0, 5, rat(1));
        let gf = g.compose(&f);
        assert_eq!(gf.entry(0, 0), 10);
        assert_eq!(gf.radius, rat(2));
        assert_eq!(gf.tight_radius(), rat(2));
        let id = GeomMorphism::identity(&a);
        assert_eq!(f.compose(&id), f);
        let zero = GeomMorphism::zero(c.clone(), a.clone());
        let z = f.compose(&zero.compose(&g));
        assert!(z.is_zero());
        assert_eq!(z.radius, rat(0));
    }

    #[test]
    fn dual_reverses_composition() {
        let a = line3_module(&[0, 1]);
        let b = line3_module(&[1, 2]);
        let c = line3_module(&[0, 2]);
        let f = GeomMorphism::new(a.clone(), b.clone(), [((0, 0), 2), ((1, 1), -1)].into(), rat(1));
        let g = GeomMorphism::new(b.clone(), c.clone(), [((0, 1), 3), ((1, 0), 4)].into(), rat(2));
        assert_eq!(g.compose(&f).dual(), f.dual().compose(&g.dual()));
    }

    #[test]
    fn restrict_partitions_the_matrix() {
        let m = line3_module(&[0, 1, 2]);
        let f = GeomMorphism::new(
            m.clone(),
            m.clone(),
            [((0, 0), 1), ((1, 1), 2), ((2, 2), 3), ((0, 1), 4)].into(),
            rat(1),
        );
        let sp = Arc::clone(&m.space);
        let y = sp.subset_of(&[0]);
        let inside = f.restrict(&y);
        let outside = f.restrict(&y.complement());
        assert_eq!(inside.add(&outside), f);
        assert_eq!(f.restrict(&sp.full_subset()), f);
        assert!(f.restrict(&sp.empty_subset()).is_zero());
    }

    #[test]
    fn direct_image_scales_radius() {
        let sp = ControlSpace::line(3, rat(1));
        let doubled = ControlSpace::line(3, rat(2));
        let m = GeomModule::new(rwi(), Arc::clone(&sp), vec![0, 1]).unwrap();
        let f = GeomMorphism::new(m.clone(), m.clone(), [((1, 0), 1)].into(), rat(1));
        let map = PointMap::new(sp, doubled, vec![0, 1, 2], rat(2)).unwrap();
        let pushed = map.push_morphism(&f);
        assert_eq!(pushed.radius, rat(2));
        assert_eq!(pushed.tight_radius(), rat(2));

        let collapse = PointMap::new(
            Arc::clone(&f.source.space),
            ControlSpace::point(),
            vec![0, 0, 0],
            rat(0),
        )
        .unwrap();
        let collapsed = collapse.push_morphism(&f);
        assert_eq!(collapsed.radius, rat(0));
    }

    #[test]
    fn direct_image_respects_composition() {
        let sp = ControlSpace::line(4, rat(1));
        let tgt = ControlSpace::line(4, rat(2));
        let map = PointMap::new(Arc::clone(&sp), tgt, vec![0, 1, 2, 3], rat(2)).unwrap();
        let a = GeomModule::new(rwi(), Arc::clone(&sp), vec![0, 1]).unwrap();
        let b = GeomModule::new(rwi(), Arc::clone(&sp), vec![1, 2]).unwrap();
        let c = GeomModule::new(rwi(), Arc::clone(&sp), vec![2, 3]).unwrap();
        let f = GeomMorphism::new(a, b.clone(), [((0, 0), 2), ((1, 1), 3)].into(), rat(1));
        let g = GeomMorphism::new(b, c, [((0, 0), -1), ((1, 0), 5)].into(), rat(2));
        let lhs = map.push_morphism(&g.compose(&f));
        let rhs = map.push_morphism(&g).compose(&map.push_morphism(&f));
        assert_eq!(lhs.entries, rhs.entries);
        assert_eq!(lhs.source, rhs.source);
        assert_eq!(lhs.target, rhs.target);
    }

    #[test]
    fn direct_image_of_structures_preserves_the_relation() {
        // Doubling map on a line: the pushed structure still satisfies the
        // relation and its certified radius doubles.
        let sp = ControlSpace::line(3, rat(1));
        let tgt = ControlSpace::line(3, rat(2));
        let map = PointMap::new(Arc::clone(&sp), tgt, vec![0, 1, 2], rat(2)).unwrap();
        let mut rng = crate::fixtures::Rng::new(42);
        let params = crate::fixtures::FixtureParams::default();
        let q = crate::fixtures::random_poincare(&mut rng, &params, &sp);
        let pushed = map.push_structure(&q);
        pushed.check().unwrap();
        assert_eq!(pushed.radius, rat(2) * q.radius.clone());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix() -> impl Strategy<Value = Vec<(usize, usize, i128)>> {
            proptest::collection::vec(
                ((0usize..4), (0usize..4), (-3i128..=3)),
                0..8,
            )
        }

        fn module4() -> GeomModule {
            let sp = ControlSpace::line(4, rat(1));
            GeomModule::new(rwi(), sp, vec![0, 1, 2, 3]).unwrap()
        }

        fn build(entries: &[(usize, usize, i128)]) -> GeomMorphism {
            let m = module4();
            let mut map = BTreeMap::new();
            for &(r, c, v) in entries {
                if v != 0 {
                    map.insert((r, c), v);
                }
            }
            GeomMorphism::new(m.clone(), m, map, rat(3))
        }

        proptest! {
            #[test]
            fn dual_is_an_involution_preserving_radius(entries in small_matrix()) {
                let f = build(&entries);
                let d = f.dual();
                prop_assert_eq!(d.radius.clone(), f.radius.clone());
                prop_assert_eq!(d.dual(), f);
            }

            #[test]
            fn restriction_partitions_the_matrix(entries in small_matrix(), mask in 0u8..16) {
                let f = build(&entries);
                let members: Vec<usize> =
                    (0..4).filter(|i| mask & (1 << i) != 0).collect();
                let y = f.source.space.subset_of(&members);
                let inside = f.restrict(&y);
                let outside = f.restrict(&y.complement());
                prop_assert_eq!(inside.add(&outside), f);
            }

            #[test]
            fn dual_reverses_products(a in small_matrix(), b in small_matrix()) {
                let f = build(&a);
                let g = build(&b);
                prop_assert_eq!(g.compose(&f).dual(), f.dual().compose(&g.dual()));
            }
        }
    }

    #[test]
    fn exact_idempotents_only() {
        let m = line3_module(&[0, 0]);
        let p = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), 1)].into(), rat(0));
        assert!(ProjectiveModule::try_new(m.clone(), p).is_ok());
        let not_idem = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), 2)].into(), rat(0));
        assert!(ProjectiveModule::try_new(m, not_idem).is_err());
    }
}
