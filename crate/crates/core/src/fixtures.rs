//! Seeded, platform-independent fixture generation.
//!
//! Campaigns must be reproducible byte for byte from (seed, size flags), so
//! randomness comes from a small splitmix64 generator rather than an
//! external crate whose stream could change across versions.

use crate::complex::{ChainMap, ControlledComplex};
use crate::module::{GeomModule, GeomMorphism};
use crate::rat::{rat, Rat};
use crate::ring::{Coeff, Ring, RingWithInvolution};
use crate::space::ControlSpace;
use std::collections::BTreeMap;
use std::sync::Arc;

/// splitmix64 stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: i128, hi: i128) -> i128 {
        assert!(lo <= hi);
        let span = (hi - lo + 1) as u128;
        lo + (self.next_u64() as u128 % span) as i128
    }

    pub fn usize_below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }

    /// Fork a named substream; used so fixture kinds draw independently.
    pub fn fork(&mut self, tag: u64) -> Rng {
        Rng { state: self.next_u64() ^ tag.wrapping_mul(0x9E3779B97F4A7C15) }
    }
}

/// Size bounds for generated instances (desk scale).
#[derive(Debug, Clone)]
pub struct FixtureParams {
    pub ring: Ring,
    pub space_points: usize,
    pub max_rank: usize,
    pub max_degree: i64,
    pub coeff_bound: i128,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            ring: Ring::Int,
            space_points: 5,
            max_rank: 3,
            max_degree: 2,
            coeff_bound: 2,
        }
    }
}

impl FixtureParams {
    pub fn rwi(&self) -> RingWithInvolution {
        RingWithInvolution::new(self.ring)
    }
}

/// Random metric space: points on a rational grid, distances completed to a
/// metric by min-plus closure over a random graph.
pub fn random_space(rng: &mut Rng, params: &FixtureParams) -> Arc<ControlSpace> {
    let n = params.space_points.max(1);
    let ids = (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>();
    // Start from a random symmetric weight matrix (entries in halves),
    // then Floyd-Warshall to enforce the triangle inequality.
    let mut d: Vec<Vec<Rat>> = vec![vec![rat(0); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let halves = rng.range(1, 6);
            let v = Rat::new(halves, 2);
            d[i][j] = v.clone();
            d[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k].clone() + d[k][j].clone();
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    ControlSpace::new(ids, d).expect("random space is a metric space")
}

pub fn random_module(
    rng: &mut Rng,
    params: &FixtureParams,
    space: &Arc<ControlSpace>,
    rank: usize,
) -> GeomModule {
    let points = (0..rank).map(|_| rng.usize_below(space.len())).collect();
    GeomModule::new(params.rwi(), Arc::clone(space), points).expect("random module")
}

fn nonzero_coeff(rng: &mut Rng, params: &FixtureParams) -> Coeff {
    loop {
        let c = rng.range(-params.coeff_bound, params.coeff_bound);
        let c = params.ring.normalize(c);
        if c != 0 {
            return c;
        }
    }
}

/// Random morphism with certified radius: entries only between basis points
/// at distance <= radius.
pub fn random_morphism(
    rng: &mut Rng,
    params: &FixtureParams,
    source: &GeomModule,
    target: &GeomModule,
    radius: &Rat,
    density_pct: u64,
) -> GeomMorphism {
    let mut entries = BTreeMap::new();
    for row in 0..target.rank() {
        for col in 0..source.rank() {
            let dist = source.space.d(source.points[col], target.points[row]);
            if dist <= *radius && rng.chance(density_pct, 100) {
                entries.insert((row, col), nonzero_coeff(rng, params));
            }
        }
    }
    GeomMorphism::new(source.clone(), target.clone(), entries, radius.clone())
}

/// Random invertible "shear" automorphism of a module at radius bound:
/// identity plus a strictly triangular perturbation (exactly invertible).
pub fn random_shear(
    rng: &mut Rng,
    params: &FixtureParams,
    module: &GeomModule,
    radius: &Rat,
) -> (GeomMorphism, GeomMorphism) {
    let n = module.rank();
    let mut upper = BTreeMap::new();
    for row in 0..n {
        for col in (row + 1)..n {
            let dist = module.space.d(module.points[col], module.points[row]);
            if dist <= *radius && rng.chance(40, 100) {
                upper.insert((row, col), nonzero_coeff(rng, params));
            }
        }
    }
    let nilp = GeomMorphism::new(module.clone(), module.clone(), upper, radius.clone());
    let id = GeomMorphism::identity(module);
    let fwd = id.add(&nilp);
    // Inverse of 1 + N for strictly triangular N: alternating geometric sum.
    let mut inv = id.clone();
    let mut power = nilp.clone();
    let mut sign = -1i128;
    while !power.is_zero() {
        inv = inv.add(&power.scale(sign));
        power = power.compose(&nilp);
        sign = -sign;
    }
    (fwd, inv)
}

/// Random complex assembled from elementary two-term blocks and point
/// modules, then conjugated by shears. `d . d = 0` holds exactly by
/// construction and the differential has radius <= `radius`.
pub fn random_complex(
    rng: &mut Rng,
    params: &FixtureParams,
    space: &Arc<ControlSpace>,
    radius: &Rat,
) -> ControlledComplex {
    let top = rng.range(0, params.max_degree as i128) as i64;
    let mut modules = Vec::new();
    for _ in 0..=top {
        let rank = rng.usize_below(params.max_rank + 1);
        modules.push(random_module(rng, params, space, rank));
    }
    // Build d degreewise; to guarantee d.d = 0 we alternate: entries of d at
    // odd-to-even degrees are free, even-to-odd are zero.
    let mut diffs = Vec::new();
    for r in 1..=top {
        let src = modules[r as usize].clone();
        let tgt = modules[(r - 1) as usize].clone();
        if r % 2 == 1 {
            diffs.push(random_morphism(rng, params, &src, &tgt, radius, 60));
        } else {
            diffs.push(GeomMorphism::zero(src, tgt));
        }
    }
    let base = ControlledComplex::new(
        params.rwi(),
        Arc::clone(space),
        0,
        modules,
        diffs,
        None,
        radius.clone(),
    );
    conjugate_by_shears(rng, params, &base, radius)
}

/// Conjugates a complex by independent degreewise shears; the result is a
/// complex with the same radius bound class and richer differentials.
pub fn conjugate_by_shears(
    rng: &mut Rng,
    params: &FixtureParams,
    c: &ControlledComplex,
    radius: &Rat,
) -> ControlledComplex {
    if c.is_empty_complex() {
        return c.clone();
    }
    let shears: BTreeMap<i64, (GeomMorphism, GeomMorphism)> = c
        .degrees()
        .map(|r| (r, random_shear(rng, params, &c.module_at(r), radius)))
        .collect();
    let mut modules = Vec::new();
    let mut diffs = Vec::new();
    for r in c.lo()..=c.hi() {
        modules.push(c.module_at(r));
    }
    let mut new_radius = c.radius.clone();
    for r in (c.lo() + 1)..=c.hi() {
        // new d = S_{r-1} . d . S_r^{-1}; still squares to zero.
        let (s_down, _) = &shears[&(r - 1)];
        let (_, s_up_inv) = &shears[&r];
        let d = s_down.compose(&c.diff_at(r)).compose(s_up_inv);
        new_radius = crate::rat::rat_max(new_radius, d.radius.clone());
        diffs.push(d);
    }
    ControlledComplex::new(
        c.ring,
        Arc::clone(&c.space),
        c.lo(),
        modules,
        diffs,
        None,
        new_radius,
    )
}

/// A chain map assembled as `shear`-conjugation: always an exact chain
/// equivalence with known inverse.
pub fn random_auto_equivalence(
    rng: &mut Rng,
    params: &FixtureParams,
    c: &ControlledComplex,
    radius: &Rat,
) -> (ChainMap, ChainMap) {
    // Degreewise shears do not commute with d in general; instead use a
    // global scalar unit plus a chain homotopy-shaped correction:
    // g = 1 + d s + s d for a random degree-raising s (always a chain map,
    // with exact inverse given by the alternating sum).
    let mut s_maps: BTreeMap<i64, GeomMorphism> = BTreeMap::new();
    for r in c.lo()..c.hi() {
        let m = random_morphism(
            rng,
            params,
            &c.module_at(r),
            &c.module_at(r + 1),
            radius,
            30,
        );
        if !m.is_zero() {
            s_maps.insert(r, m);
        }
    }
    let get_s = |r: i64| {
        s_maps
            .get(&r)
            .cloned()
            .unwrap_or_else(|| GeomMorphism::zero(c.module_at(r), c.module_at(r + 1)))
    };
    let mut maps: BTreeMap<i64, GeomMorphism> = BTreeMap::new();
    for r in c.lo()..=c.hi() {
        let ds = c.diff_at(r + 1).compose(&get_s(r));
        let sd = get_s(r - 1).compose(&c.diff_at(r));
        let id = GeomMorphism::identity(&c.module_at(r));
        maps.insert(r, id.add(&ds).add(&sd));
    }
    let two = radius.clone() + radius.clone() + c.radius.clone() + c.radius.clone();
    let fwd = ChainMap::new(c.clone(), c.clone(), maps, two.clone());
    // Inverse: (1 + N)^{-1} with N = ds + sd nilpotent? Not in general.
    // Instead solve-free explicit inverse: N = d s + s d satisfies
    // N . N = d s d s + ... not nilpotent in general, so invert degreewise
    // by Neumann series only when nilpotent; otherwise retry with sparser s.
    let mut inv_maps: BTreeMap<i64, GeomMorphism> = BTreeMap::new();
    let mut ok = true;
    for r in c.lo()..=c.hi() {
        let id = GeomMorphism::identity(&c.module_at(r));
        let n = fwd.map_at(r).sub(&id);
        let mut acc = id.clone();
        let mut pow = n.clone();
        let mut sgn = -1i128;
        let mut steps = 0;
        while !pow.is_zero() {
            acc = acc.add(&pow.scale(sgn));
            pow = pow.compose(&n);
            sgn = -sgn;
            steps += 1;
            if steps > 2 * (c.module_at(r).rank() + 1) {
                ok = false;
                break;
            }
        }
        if !ok {
            break;
        }
        inv_maps.insert(r, acc);
    }
    if !ok {
        // Fall back to the identity equivalence; callers treat this as a
        // valid (if boring) sample.
        return (ChainMap::identity(c), ChainMap::identity(c));
    }
    let bound = {
        // Neumann series powers accumulate radius; use a generous certified
        // bound proportional to rank.
        let mut b = rat(0);
        for m in inv_maps.values() {
            b = crate::rat::rat_max(b, m.tight_radius());
        }
        b
    };
    let inv = ChainMap::new(c.clone(), c.clone(), inv_maps, bound);
    (fwd, inv)
}

/// Module of rank `k` concentrated in one degree at a point.
pub fn concentrated_at_point(ring: Ring, rank: usize, deg: i64) -> ControlledComplex {
    let sp = ControlSpace::point();
    let rwi = RingWithInvolution::new(ring);
    let m = GeomModule::new(rwi, Arc::clone(&sp), vec![0; rank]).unwrap();
    ControlledComplex::new(rwi, sp, deg, vec![m], vec![], None, rat(0))
}

/// Rank-1 form `psi_0 = (a)` at a point, dimension 0.
pub fn rank_one_form(ring: Ring, a: i128) -> crate::quad::QuadStructure {
    let c = concentrated_at_point(ring, 1, 0);
    let m = c.module_at(0);
    let psi0 = GeomMorphism::new(m.clone(), m.clone(), [((0, 0), a)].into(), rat(0));
    crate::quad::QuadStructure { n: 0, carrier: c, psis: vec![[(0i64, psi0)].into()], radius: rat(0) }
}

/// Hyperbolic form `psi_0 = [[0,1],[0,0]]` at a point, dimension 0.
pub fn hyperbolic_form(ring: Ring) -> crate::quad::QuadStructure {
    let c = concentrated_at_point(ring, 2, 0);
    let m = c.module_at(0);
    let psi0 = GeomMorphism::new(m.clone(), m.clone(), [((0, 1), 1)].into(), rat(0));
    crate::quad::QuadStructure { n: 0, carrier: c, psis: vec![[(0i64, psi0)].into()], radius: rat(0) }
}

/// Middle-dimensional form on a complex concentrated in degree `k`,
/// dimension `n = 2k`: any matrix defines a structure; invertible
/// symmetrizations give Poincare representatives.
pub fn concentrated_form(
    ring: Ring,
    n: i64,
    entries: &[(usize, usize, i128)],
    rank: usize,
) -> crate::quad::QuadStructure {
    assert!(n % 2 == 0);
    let k = n / 2;
    let c = concentrated_at_point(ring, rank, k);
    let m = c.module_at(k);
    let psi0 = GeomMorphism::new(
        m.clone(),
        m.clone(),
        entries.iter().map(|&(r, cix, v)| ((r, cix), v)).collect(),
        rat(0),
    );
    crate::quad::QuadStructure {
        n,
        carrier: c,
        psis: vec![[(k, psi0)].into()],
        radius: rat(0),
    }
}

/// Random quadratic structure on a carrier: a seeded sample from the exact
/// integer solution lattice of the structure relation.
pub fn random_structure(
    rng: &mut Rng,
    c: &ControlledComplex,
    n: i64,
    eps: &Rat,
    levels: usize,
) -> Option<crate::quad::QuadStructure> {
    use crate::complex::sign;
    use crate::solver::{LinearTerm, MorphEquation, MorphismSystem, MorphismVar};
    if c.is_empty_complex() {
        return Some(crate::quad::QuadStructure::zero(n, c.clone()));
    }
    let mut sys = MorphismSystem::new(c.ring.ring);
    let mut vars: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for s in 0..levels {
        for r in c.lo() - 1..=c.hi() + 1 {
            let src = c.module_at(n - r - s as i64);
            let tgt = c.module_at(r);
            if src.is_zero() || tgt.is_zero() {
                continue;
            }
            vars.insert((s, r), sys.add_var(MorphismVar::new(src, tgt, eps.clone())));
        }
    }
    // Relation at (r, s): d.psi_s^{(r+1)} + (-1)^r psi_s^{(r)} d* +
    // (-1)^{n-s-1}(psi_{s+1}^{(r)} + (-1)^{s+1}(T psi_{s+1})^{(r)}) = 0,
    // where the T-term is the transpose of the unknown at degree n-r-s-1.
    for s in 0..levels {
        for r in c.lo() - 2..=c.hi() + 2 {
            let target = c.module_at(r);
            let source = c.module_at(n - r - s as i64 - 1);
            if target.is_zero() || source.is_zero() {
                continue;
            }
            let mut terms = Vec::new();
            if let Some(&v) = vars.get(&(s, r + 1)) {
                terms.push(LinearTerm::plain(1, Some(c.diff_at(r + 1)), v, None));
            }
            if let Some(&v) = vars.get(&(s, r)) {
                terms.push(LinearTerm::plain(
                    sign(r),
                    None,
                    v,
                    Some(c.diff_at(n - r - s as i64).dual()),
                ));
            }
            let outer = sign(n - s as i64 - 1);
            if let Some(&v) = vars.get(&(s + 1, r)) {
                terms.push(LinearTerm::plain(outer, None, v, None));
            }
            let m = n - r - s as i64 - 1;
            if let Some(&v) = vars.get(&(s + 1, m)) {
                terms.push(LinearTerm::flipped(
                    outer * sign(s as i64 + 1) * sign(r * m),
                    None,
                    v,
                    None,
                ));
            }
            if terms.is_empty() {
                continue;
            }
            sys.add_equation(MorphEquation {
                source,
                target,
                terms,
                constant: GeomMorphism::zero(
                    c.module_at(n - r - s as i64 - 1),
                    c.module_at(r),
                ),
                columns: None,
            });
        }
    }
    let (ws, _) = sys.solve_seeded(Some((rng, 1)))?;
    let mut psis: crate::quad::PsiFamily = vec![BTreeMap::new(); levels];
    for (&(s, r), &v) in &vars {
        if !ws[v].is_zero() {
            psis[s].insert(r, ws[v].clone());
        }
    }
    let q = crate::quad::QuadStructure { n, carrier: c.clone(), psis, radius: eps.clone() };
    debug_assert!(q.check().is_ok(), "{:?}", q.check());
    Some(q)
}

/// Random Poincare structure: a standard invertible form placed at random
/// points, pushed through a random exact self-equivalence of an enlarged
/// carrier.
pub fn random_poincare(
    rng: &mut Rng,
    params: &FixtureParams,
    space: &Arc<ControlSpace>,
) -> crate::quad::QuadStructure {
    use crate::quad::QuadStructure;
    // Hyperbolic pieces are Poincare over any coefficient ring.
    let blocks = 1 + rng.usize_below(2);
    let mut acc: Option<QuadStructure> = None;
    for _ in 0..blocks {
        let pt = rng.usize_below(space.len());
        let m = GeomModule::new(params.rwi(), Arc::clone(space), vec![pt, pt]).unwrap();
        let c = ControlledComplex::new(
            params.rwi(),
            Arc::clone(space),
            0,
            vec![m.clone()],
            vec![],
            None,
            rat(0),
        );
        let psi0 = GeomMorphism::new(m.clone(), m.clone(), [((0, 1), 1)].into(), rat(0));
        let q = QuadStructure {
            n: 0,
            carrier: c,
            psis: vec![[(0i64, psi0)].into()],
            radius: rat(0),
        };
        acc = Some(match acc {
            None => q,
            Some(prev) => prev.direct_sum(&q),
        });
    }
    let base = acc.expect("at least one block");
    // Transport through a random exact self-equivalence.
    let (fwd, _inv) = random_auto_equivalence(rng, params, &base.carrier, &rat(1));
    let pushed = base.pushforward(&fwd);
    debug_assert!(pushed.check().is_ok());
    pushed
}

/// Samples a level family `delta` making `(f, (delta, psi))` an exact
/// quadratic pair, uniformly from the integer solution lattice.
pub fn sample_pair_delta(
    rng: &mut Rng,
    f: &ChainMap,
    psi: &crate::quad::QuadStructure,
    eps: &Rat,
    levels: usize,
) -> Option<crate::quad::PsiFamily> {
    use crate::complex::sign;
    use crate::solver::{LinearTerm, MorphEquation, MorphismSystem, MorphismVar};
    let n = psi.n;
    let d_cx = &f.target;
    let mut sys = MorphismSystem::new(d_cx.ring.ring);
    let mut vars: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for s in 0..levels {
        for r in d_cx.lo() - 1..=d_cx.hi() + 1 {
            let src = d_cx.module_at(n + 1 - r - s as i64);
            let tgt = d_cx.module_at(r);
            if src.is_zero() || tgt.is_zero() {
                continue;
            }
            vars.insert((s, r), sys.add_var(MorphismVar::new(src, tgt, eps.clone())));
        }
    }
    // Pair relation at (r, s) with the boundary term as a constant:
    // d.dpsi_s^{(r+1)} + (-1)^r dpsi_s^{(r)} d* +
    // (-1)^{n-s}(dpsi_{s+1}^{(r)} + (-1)^{s+1}(T dpsi_{s+1})^{(r)}) +
    // (-1)^n f psi_s f* = 0.
    for s in 0..levels {
        for r in d_cx.lo() - 2..=d_cx.hi() + 2 {
            let target = d_cx.module_at(r);
            let source = d_cx.module_at(n - r - s as i64);
            let constant = f
                .map_at(r)
                .compose(&psi.psi_at(s, r))
                .compose(&f.map_at(n - r - s as i64).dual())
                .scale(sign(n));
            if target.is_zero() || source.is_zero() {
                if !constant.is_zero() {
                    return None;
                }
                continue;
            }
            let mut terms = Vec::new();
            if let Some(&v) = vars.get(&(s, r + 1)) {
                terms.push(LinearTerm::plain(1, Some(d_cx.diff_at(r + 1)), v, None));
            }
            if let Some(&v) = vars.get(&(s, r)) {
                terms.push(LinearTerm::plain(
                    sign(r),
                    None,
                    v,
                    Some(d_cx.diff_at(n + 1 - r - s as i64).dual()),
                ));
            }
            let outer = sign(n - s as i64);
            if let Some(&v) = vars.get(&(s + 1, r)) {
                terms.push(LinearTerm::plain(outer, None, v, None));
            }
            let m = n - r - s as i64;
            if let Some(&v) = vars.get(&(s + 1, m)) {
                terms.push(LinearTerm::flipped(
                    outer * sign(s as i64 + 1) * sign(r * m),
                    None,
                    v,
                    None,
                ));
            }
            if terms.is_empty() && constant.is_zero() {
                continue;
            }
            sys.add_equation(MorphEquation {
                source,
                target,
                terms,
                constant,
                columns: None,
            });
        }
    }
    let (ws, _) = sys.solve_seeded(Some((rng, 1)))?;
    let mut delta: crate::quad::PsiFamily = vec![BTreeMap::new(); levels];
    for (&(s, r), &v) in &vars {
        if !ws[v].is_zero() {
            delta[s].insert(r, ws[v].clone());
        }
    }
    Some(delta)
}

/// A pair of adjoining cobordisms with generic structures: both underlying
/// maps have nontrivial middle components and the connecting structures are
/// sampled from the exact solution lattice.
pub fn random_adjoining_cobordisms(
    rng: &mut Rng,
    params: &FixtureParams,
    n: i64,
) -> Option<(crate::quad::Cobordism, crate::quad::Cobordism)> {
    use crate::quad::{Cobordism, QuadPair};
    let sp = random_space(rng, params);
    let eps = rat(1);
    let c = random_complex(rng, params, &sp, &eps);
    if c.is_empty_complex() {
        return None;
    }
    let q = random_structure(rng, &c, n, &eps, 2)?;
    let make = |rng: &mut Rng, q_from: &crate::quad::QuadStructure| {
        let (g, _) = random_auto_equivalence(rng, params, &c, &eps);
        let (u, _) = random_auto_equivalence(rng, params, &c, &eps);
        let q_to = q_from.pushforward(&g);
        let boundary = q_from.direct_sum(&q_to.neg());
        let mut maps = BTreeMap::new();
        for r in c.lo()..=c.hi() {
            let mut b = crate::module::BlockMatrix::new(
                vec![c.module_at(r)],
                vec![c.module_at(r), c.module_at(r)],
            );
            b.set(0, 0, &u.map_at(r).compose(&g.map_at(r)), 1);
            b.set(0, 1, &u.map_at(r), 1);
            let m = b.assemble();
            if !m.is_zero() {
                maps.insert(r, m);
            }
        }
        let radius = u.radius.clone() + g.radius.clone();
        let f = ChainMap::new(boundary.carrier.clone(), c.clone(), maps, radius);
        if !f.is_exact_chain_map() {
            return None;
        }
        let budget = rat(2) * (q_from.radius.clone() + u.radius.clone() + g.radius.clone());
        let delta = sample_pair_delta(rng, &f, &boundary, &budget, 2)?;
        let pair = QuadPair { f, delta, psi: boundary, radius: budget };
        Cobordism::try_new(pair, q_from.clone(), q_to.clone()).ok()
    };
    let c1 = make(rng, &q)?;
    let c2 = make(rng, &c1.right)?;
    Some((c1, c2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rng_is_deterministic() {
        let mut a = Rng::new(7);
        let mut b = Rng::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn random_spaces_are_metric() {
        let params = FixtureParams::default();
        for seed in 0..10 {
            let mut rng = Rng::new(seed);
            let _sp = random_space(&mut rng, &params);
        }
    }

    #[test]
    fn random_complexes_verify() {
        let params = FixtureParams::default();
        for seed in 0..20 {
            let mut rng = Rng::new(seed);
            let sp = random_space(&mut rng, &params);
            let c = random_complex(&mut rng, &params, &sp, &rat(1));
            assert!(c.verify().is_empty(), "seed {seed}: {:?}", c.verify());
        }
    }

    #[test]
    fn shears_are_exactly_invertible() {
        let params = FixtureParams::default();
        let mut rng = Rng::new(99);
        let sp = random_space(&mut rng, &params);
        let m = random_module(&mut rng, &params, &sp, 4);
        let (f, finv) = random_shear(&mut rng, &params, &m, &rat(2));
        assert_eq!(f.compose(&finv), GeomMorphism::identity(&m));
        assert_eq!(finv.compose(&f), GeomMorphism::identity(&m));
    }

    #[test]
    fn random_structures_satisfy_the_relation() {
        let params = FixtureParams::default();
        let mut found = 0;
        for seed in 0..40 {
            let mut rng = Rng::new(2000 + seed);
            let sp = random_space(&mut rng, &params);
            let c = random_complex(&mut rng, &params, &sp, &rat(1));
            for n in 0..=2 {
                if let Some(q) = random_structure(&mut rng, &c, n, &rat(1), 2) {
                    q.check().unwrap();
                    if q.psis.iter().any(|l| !l.is_empty()) {
                        found += 1;
                    }
                }
            }
        }
        assert!(found > 10, "expected nontrivial sampled structures, got {found}");
    }

    #[test]
    fn adjoining_cobordisms_are_exact_pairs() {
        let params = FixtureParams::default();
        let mut found = 0;
        for seed in 0..20 {
            let mut rng = Rng::new(3000 + seed);
            if let Some((c1, c2)) = random_adjoining_cobordisms(&mut rng, &params, 1) {
                c1.pair.check().unwrap();
                c2.pair.check().unwrap();
                assert_eq!(c1.right.carrier, c2.left.carrier);
                assert_eq!(c1.right.psis, c2.left.psis);
                if c1.pair.delta.iter().any(|l| !l.is_empty()) {
                    found += 1;
                }
            }
        }
        assert!(found > 3, "expected nontrivial connecting structures, got {found}");
    }

    #[test]
    fn auto_equivalences_compose_to_identity() {
        let params = FixtureParams::default();
        for seed in 0..10 {
            let mut rng = Rng::new(1000 + seed);
            let sp = random_space(&mut rng, &params);
            let c = random_complex(&mut rng, &params, &sp, &rat(1));
            let (f, g) = random_auto_equivalence(&mut rng, &params, &c, &rat(1));
            assert!(f.is_exact_chain_map());
            for r in c.lo()..=c.hi() {
                let gf = g.map_at(r).compose(&f.map_at(r));
                assert_eq!(gf, GeomMorphism::identity(&c.module_at(r)), "degree {r}");
            }
        }
    }
}
