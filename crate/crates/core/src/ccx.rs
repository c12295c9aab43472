//! The CCX text format: a line-oriented, exact-literal serialization of
//! spaces, modules, morphisms, complexes, structures, pairs, cobordisms,
//! certificates and decorated representatives, with position-annotated
//! parse errors, resolved cross-references, and a canonical emitter such
//! that parse . emit is the identity on documents.

use crate::complex::{ChainMap, ControlledComplex};
use crate::homotopy::{ContractionCert, ConnectivityCert, EquivalenceCert};
use crate::ltheory::{Decorations, LClassRep};
use crate::module::{GeomModule, GeomMorphism};
use crate::quad::{Cobordism, PsiFamily, QuadPair, QuadStructure};
use crate::rat::{format_rat, parse_rat, rat, Rat};
use crate::ring::{Ring, RingWithInvolution};
use crate::space::{ControlSpace, Subset};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CcxError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unresolved reference `{name}` in {context}")]
    Dangling { line: usize, name: String, context: String },
    #[error("document invariant violated: {0}")]
    Invariant(String),
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, CcxError> {
    Err(CcxError::Parse { line, msg: msg.into() })
}

/// Certificate payloads addressable from the document.
#[derive(Debug, Clone, PartialEq)]
pub enum CertBlock {
    /// Contraction of a named complex or of the duality cone of a named
    /// structure.
    Contraction { target: CertTarget, cert: ContractionCert },
    Connectivity { target: CertTarget, cert: ConnectivityCert },
    Equivalence { map: String, cert: EquivalenceCert },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertTarget {
    Complex(String),
    DualityCone(String),
    PairCone(String),
}

/// A parsed, materialized document: named blocks with all references
/// resolved.
#[derive(Debug, Clone, Default)]
pub struct CcxDocument {
    pub ring: Option<RingWithInvolution>,
    pub spaces: BTreeMap<String, Arc<ControlSpace>>,
    pub subsets: BTreeMap<String, Subset>,
    pub modules: BTreeMap<String, GeomModule>,
    pub morphisms: BTreeMap<String, (String, String, GeomMorphism)>,
    pub complexes: BTreeMap<String, ControlledComplex>,
    pub chainmaps: BTreeMap<String, (String, String, ChainMap)>,
    pub structures: BTreeMap<String, (String, QuadStructure)>,
    pub pairs: BTreeMap<String, (String, String, QuadPair)>,
    pub cobordisms: BTreeMap<String, (String, String, String, Cobordism)>,
    pub certificates: BTreeMap<String, CertBlock>,
    pub reps: BTreeMap<String, RepBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepBlock {
    pub structure: String,
    pub dec_n: i64,
    pub delta: Rat,
    pub eps: Rat,
    pub zone: String,
    pub poincare: Option<String>,
    pub connectivity: Option<String>,
}

impl CcxDocument {
    pub fn ring(&self) -> RingWithInvolution {
        self.ring.unwrap_or(RingWithInvolution::new(Ring::Int))
    }

    pub fn structure(&self, name: &str) -> Option<&QuadStructure> {
        self.structures.get(name).map(|(_, q)| q)
    }

    /// Materializes a representative from a rep block.
    pub fn rep(&self, name: &str) -> Result<LClassRep, CcxError> {
        let block = self
            .reps
            .get(name)
            .ok_or_else(|| CcxError::Invariant(format!("no rep `{name}`")))?;
        let (_, structure) = self
            .structures
            .get(&block.structure)
            .ok_or_else(|| CcxError::Invariant(format!("rep `{name}` references missing structure")))?;
        let zone = self
            .subsets
            .get(&block.zone)
            .ok_or_else(|| CcxError::Invariant(format!("rep `{name}` references missing subset")))?;
        let poincare = match &block.poincare {
            None => None,
            Some(c) => match self.certificates.get(c) {
                Some(CertBlock::Contraction { cert, .. }) => Some(cert.clone()),
                _ => {
                    return Err(CcxError::Invariant(format!(
                        "rep `{name}` references missing contraction `{c}`"
                    )))
                }
            },
        };
        let connectivity = match &block.connectivity {
            None => None,
            Some(c) => match self.certificates.get(c) {
                Some(CertBlock::Connectivity { cert, .. }) => Some(cert.clone()),
                _ => {
                    return Err(CcxError::Invariant(format!(
                        "rep `{name}` references missing connectivity `{c}`"
                    )))
                }
            },
        };
        Ok(LClassRep {
            structure: structure.clone(),
            dec: Decorations {
                n: block.dec_n,
                delta: block.delta.clone(),
                eps: block.eps.clone(),
                zone: zone.clone(),
                family: Vec::new(),
            },
            connectivity,
            poincare,
            k0_witnesses: Vec::new(),
        })
    }

    /// Replays every certificate block with matrix arithmetic only.
    pub fn replay_all(&self) -> Vec<(String, Result<(), String>)> {
        let mut out = Vec::new();
        for (name, cert) in &self.certificates {
            let res = self.replay_one(cert).map_err(|e| e.to_string());
            out.push((name.clone(), res));
        }
        out
    }

    fn replay_one(&self, cert: &CertBlock) -> Result<(), CcxError> {
        let resolve_cone = |target: &CertTarget| -> Result<ControlledComplex, CcxError> {
            match target {
                CertTarget::Complex(name) => self
                    .complexes
                    .get(name)
                    .cloned()
                    .ok_or_else(|| CcxError::Invariant(format!("missing complex `{name}`"))),
                CertTarget::DualityCone(name) => {
                    let (_, q) = self
                        .structures
                        .get(name)
                        .ok_or_else(|| CcxError::Invariant(format!("missing structure `{name}`")))?;
                    Ok(crate::complex::mapping_cone(&q.duality_map()))
                }
                CertTarget::PairCone(name) => {
                    let (_, _, p) = self
                        .pairs
                        .get(name)
                        .ok_or_else(|| CcxError::Invariant(format!("missing pair `{name}`")))?;
                    Ok(crate::complex::mapping_cone(&p.duality_into_cone()))
                }
            }
        };
        match cert {
            CertBlock::Contraction { target, cert } => {
                let cx = resolve_cone(target)?;
                crate::homotopy::replay_contraction(&cx, cert)
                    .map_err(|e| CcxError::Invariant(e.to_string()))
            }
            CertBlock::Connectivity { target, cert } => {
                let cx = resolve_cone(target)?;
                crate::homotopy::replay_connectivity(&cx, cert)
                    .map_err(|e| CcxError::Invariant(e.to_string()))
            }
            CertBlock::Equivalence { map, cert } => {
                let (_, _, f) = self
                    .chainmaps
                    .get(map)
                    .ok_or_else(|| CcxError::Invariant(format!("missing chain map `{map}`")))?;
                crate::homotopy::replay_equivalence(f, cert)
                    .map_err(|e| CcxError::Invariant(e.to_string()))
            }
        }
    }

    /// Structural checks on every block: complexes verify, structures and
    /// pairs satisfy their relations, declared radii dominate the audits.
    pub fn check_all(&self) -> Vec<(String, Result<(), String>)> {
        let mut out = Vec::new();
        for (name, c) in &self.complexes {
            let defects = c.verify();
            out.push((
                format!("complex {name}"),
                if defects.is_empty() {
                    Ok(())
                } else {
                    Err(format!("{defects:?}"))
                },
            ));
        }
        for (name, (_, _, f)) in &self.chainmaps {
            let defects = f.verify();
            out.push((
                format!("chainmap {name}"),
                if defects.is_empty() {
                    Ok(())
                } else {
                    Err(format!("{defects:?}"))
                },
            ));
        }
        for (name, (_, q)) in &self.structures {
            out.push((
                format!("structure {name}"),
                q.check().map_err(|e| format!("{e:?}")),
            ));
        }
        for (name, (_, _, p)) in &self.pairs {
            out.push((format!("pair {name}"), p.check().map_err(|e| format!("{e:?}"))));
        }
        for (name, (_, _, _, w)) in &self.cobordisms {
            out.push((
                format!("cobordism {name}"),
                w.pair.check().map_err(|e| format!("{e:?}")),
            ));
        }
        for (name, cert) in &self.certificates {
            out.push((
                format!("certificate {name}"),
                self.replay_one(cert).map_err(|e| e.to_string()),
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------
// Tokenizer.

struct Lines<'a> {
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            items.push((i + 1, line.split_whitespace().collect()));
        }
        Lines { items, pos: 0 }
    }
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        let item = self.items.get(self.pos).cloned();
        self.pos += 1;
        item
    }
}

fn expect_end(line: usize, toks: &[&str], n: usize) -> Result<(), CcxError> {
    if toks.len() != n {
        return perr(line, format!("expected {n} tokens, got {}", toks.len()));
    }
    Ok(())
}

fn parse_entries(
    lines: &mut Lines,
    ring: Ring,
) -> Result<BTreeMap<(usize, usize), i128>, CcxError> {
    let mut out = BTreeMap::new();
    loop {
        let Some((line, toks)) = lines.next() else {
            return perr(0, "unexpected end of input inside a block");
        };
        match toks[0] {
            "}" => break,
            "entry" => {
                expect_end(line, &toks, 4)?;
                let r: usize = toks[1].parse().map_err(|_| CcxError::Parse {
                    line,
                    msg: "bad row index".into(),
                })?;
                let c: usize = toks[2].parse().map_err(|_| CcxError::Parse {
                    line,
                    msg: "bad column index".into(),
                })?;
                let v: i128 = toks[3].parse().map_err(|_| CcxError::Parse {
                    line,
                    msg: "bad coefficient".into(),
                })?;
                let v = ring.normalize(v);
                if v != 0 {
                    out.insert((r, c), v);
                }
            }
            other => return perr(line, format!("unexpected token `{other}` in entry block")),
        }
    }
    Ok(out)
}

/// Parses a document.
pub fn parse_ccx(text: &str) -> Result<CcxDocument, CcxError> {
    let mut doc = CcxDocument::default();
    let mut lines = Lines::new(text);
    // Header.
    match lines.next() {
        Some((line, toks)) if toks[0] == "ccx" => {
            if toks.get(1) != Some(&"1") {
                return perr(line, "unsupported format version");
            }
        }
        Some((line, _)) => return perr(line, "expected `ccx 1` header"),
        None => return Ok(doc),
    }
    while let Some((line, toks)) = lines.next() {
        match toks[0] {
            "ring" => {
                doc.ring = Some(match toks.get(1) {
                    Some(&"z") => RingWithInvolution::new(Ring::Int),
                    Some(&"zmod") => {
                        let m: u64 = toks
                            .get(2)
                            .and_then(|t| t.parse().ok())
                            .ok_or(CcxError::Parse { line, msg: "bad modulus".into() })?;
                        RingWithInvolution::new(Ring::Mod(m))
                    }
                    _ => return perr(line, "expected `ring z` or `ring zmod <m>`"),
                });
            }
            "space" => {
                let name = toks.get(1).ok_or(CcxError::Parse {
                    line,
                    msg: "space needs a name".into(),
                })?;
                let mut ids: Vec<String> = Vec::new();
                let mut rows: Vec<(usize, Vec<Rat>)> = Vec::new();
                let mut subsets: Vec<(usize, String, Vec<String>)> = Vec::new();
                loop {
                    let Some((l2, t2)) = lines.next() else {
                        return perr(line, "unterminated space block");
                    };
                    match t2[0] {
                        "}" => break,
                        "points" => {
                            ids = t2[1..].iter().map(|s| s.to_string()).collect();
                        }
                        "row" => {
                            let vals = t2[2..]
                                .iter()
                                .map(|t| parse_rat(t))
                                .collect::<Result<Vec<_>, _>>()
                                .map_err(|e| CcxError::Parse { line: l2, msg: e.to_string() })?;
                            rows.push((l2, vals));
                        }
                        "subset" => {
                            let sname = t2.get(1).ok_or(CcxError::Parse {
                                line: l2,
                                msg: "subset needs a name".into(),
                            })?;
                            subsets.push((
                                l2,
                                sname.to_string(),
                                t2[2..].iter().map(|s| s.to_string()).collect(),
                            ));
                        }
                        other => return perr(l2, format!("unexpected `{other}` in space")),
                    }
                }
                if rows.len() != ids.len() {
                    return perr(line, "distance rows must match the point count");
                }
                let matrix: Vec<Vec<Rat>> = rows.iter().map(|(_, v)| v.clone()).collect();
                let space = ControlSpace::new(ids.clone(), matrix)
                    .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                for (l2, sname, members) in subsets {
                    let mut idx = Vec::new();
                    for m in &members {
                        let Some(i) = space.index_of(m) else {
                            return Err(CcxError::Dangling {
                                line: l2,
                                name: m.clone(),
                                context: format!("subset {sname}"),
                            });
                        };
                        idx.push(i);
                    }
                    doc.subsets.insert(sname, space.subset_of(&idx));
                }
                doc.spaces.insert(name.to_string(), space);
            }
            "module" => {
                // module M over X { basis a b b }
                expect_end(line, &toks, 5).or(expect_end(line, &toks, 5))?;
                let name = toks[1];
                if toks[2] != "over" {
                    return perr(line, "expected `module <name> over <space> {`");
                }
                let space = doc.spaces.get(toks[3]).ok_or(CcxError::Dangling {
                    line,
                    name: toks[3].into(),
                    context: format!("module {name}"),
                })?;
                let mut points = Vec::new();
                loop {
                    let Some((l2, t2)) = lines.next() else {
                        return perr(line, "unterminated module block");
                    };
                    match t2[0] {
                        "}" => break,
                        "basis" => {
                            for id in &t2[1..] {
                                let Some(i) = space.index_of(id) else {
                                    return Err(CcxError::Dangling {
                                        line: l2,
                                        name: id.to_string(),
                                        context: format!("module {name}"),
                                    });
                                };
                                points.push(i);
                            }
                        }
                        other => return perr(l2, format!("unexpected `{other}` in module")),
                    }
                }
                let m = GeomModule::new(doc.ring(), Arc::clone(space), points)
                    .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                doc.modules.insert(name.to_string(), m);
            }
            "morphism" => {
                // morphism f from M to N radius R {
                expect_end(line, &toks, 9)?;
                let name = toks[1];
                let src = doc.modules.get(toks[3]).ok_or(CcxError::Dangling {
                    line,
                    name: toks[3].into(),
                    context: format!("morphism {name}"),
                })?;
                let tgt = doc.modules.get(toks[5]).ok_or(CcxError::Dangling {
                    line,
                    name: toks[5].into(),
                    context: format!("morphism {name}"),
                })?;
                let radius = parse_rat(toks[7])
                    .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                let entries = parse_entries(&mut lines, doc.ring().ring)?;
                let m = GeomMorphism::try_new(src.clone(), tgt.clone(), entries, radius)
                    .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                doc.morphisms
                    .insert(name.to_string(), (toks[3].into(), toks[5].into(), m));
            }
            "complex" => {
                let name = toks[1];
                if toks[2] != "over" {
                    return perr(line, "expected `complex <name> over <space> {`");
                }
                let space = doc.spaces.get(toks[3]).ok_or(CcxError::Dangling {
                    line,
                    name: toks[3].into(),
                    context: format!("complex {name}"),
                })?;
                let mut degrees: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
                let mut diffs: BTreeMap<i64, (Rat, BTreeMap<(usize, usize), i128>)> =
                    BTreeMap::new();
                let mut idems: BTreeMap<i64, (Rat, BTreeMap<(usize, usize), i128>)> =
                    BTreeMap::new();
                let mut radius = rat(0);
                loop {
                    let Some((l2, t2)) = lines.next() else {
                        return perr(line, "unterminated complex block");
                    };
                    match t2[0] {
                        "}" => break,
                        "radius" => {
                            radius = parse_rat(t2[1])
                                .map_err(|e| CcxError::Parse { line: l2, msg: e.to_string() })?;
                        }
                        "degree" => {
                            let d: i64 = t2[1].parse().map_err(|_| CcxError::Parse {
                                line: l2,
                                msg: "bad degree".into(),
                            })?;
                            if t2.get(2) != Some(&"basis") {
                                return perr(l2, "expected `degree <d> basis <points...>`");
                            }
                            let mut pts = Vec::new();
                            for id in &t2[3..] {
                                let Some(i) = space.index_of(id) else {
                                    return Err(CcxError::Dangling {
                                        line: l2,
                                        name: id.to_string(),
                                        context: format!("complex {name}"),
                                    });
                                };
                                pts.push(i);
                            }
                            degrees.insert(d, pts);
                        }
                        "d" | "idem" => {
                            let is_diff = t2[0] == "d";
                            let d: i64 = t2[1].parse().map_err(|_| CcxError::Parse {
                                line: l2,
                                msg: "bad degree".into(),
                            })?;
                            if t2.get(2) != Some(&"radius") {
                                return perr(l2, "expected `... radius <r> {`");
                            }
                            let r = parse_rat(t2[3])
                                .map_err(|e| CcxError::Parse { line: l2, msg: e.to_string() })?;
                            let entries = parse_entries(&mut lines, doc.ring().ring)?;
                            if is_diff {
                                diffs.insert(d, (r, entries));
                            } else {
                                idems.insert(d, (r, entries));
                            }
                        }
                        other => return perr(l2, format!("unexpected `{other}` in complex")),
                    }
                }
                if degrees.is_empty() {
                    doc.complexes.insert(
                        name.to_string(),
                        ControlledComplex::empty(doc.ring(), Arc::clone(space)),
                    );
                    continue;
                }
                let lo = *degrees.keys().min().unwrap();
                let hi = *degrees.keys().max().unwrap();
                let mut modules = Vec::new();
                for d in lo..=hi {
                    let pts = degrees.get(&d).cloned().unwrap_or_default();
                    modules.push(
                        GeomModule::new(doc.ring(), Arc::clone(space), pts)
                            .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?,
                    );
                }
                let mut dmaps = Vec::new();
                for d in (lo + 1)..=hi {
                    let (r, entries) = diffs.get(&d).cloned().unwrap_or((rat(0), BTreeMap::new()));
                    let src = modules[(d - lo) as usize].clone();
                    let tgt = modules[(d - 1 - lo) as usize].clone();
                    dmaps.push(
                        GeomMorphism::try_new(src, tgt, entries, r)
                            .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?,
                    );
                }
                let idem_vec = if idems.is_empty() {
                    None
                } else {
                    let mut v = Vec::new();
                    for d in lo..=hi {
                        let m = modules[(d - lo) as usize].clone();
                        let (r, entries) = idems
                            .get(&d)
                            .cloned()
                            .unwrap_or((rat(0), BTreeMap::new()));
                        v.push(
                            GeomMorphism::try_new(m.clone(), m, entries, r)
                                .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?,
                        );
                    }
                    Some(v)
                };
                let cx = ControlledComplex::new(
                    doc.ring(),
                    Arc::clone(space),
                    lo,
                    modules,
                    dmaps,
                    idem_vec,
                    radius,
                );
                doc.complexes.insert(name.to_string(), cx);
            }
            "chainmap" => {
                // chainmap f from C to D radius R {
                expect_end(line, &toks, 9)?;
                let name = toks[1];
                let src = doc.complexes.get(toks[3]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[3].into(),
                    context: format!("chainmap {name}"),
                })?;
                let tgt = doc.complexes.get(toks[5]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[5].into(),
                    context: format!("chainmap {name}"),
                })?;
                let radius = parse_rat(toks[7])
                    .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                let maps = parse_degree_maps(&mut lines, &src, &tgt, doc.ring().ring, 0)?;
                let f = ChainMap::new(src, tgt, maps, radius);
                doc.chainmaps
                    .insert(name.to_string(), (toks[3].into(), toks[5].into(), f));
            }
            "structure" => {
                // structure psi on C dim N radius R {
                expect_end(line, &toks, 9)?;
                let name = toks[1];
                let carrier = doc.complexes.get(toks[3]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[3].into(),
                    context: format!("structure {name}"),
                })?;
                let n: i64 = toks[5].parse().map_err(|_| CcxError::Parse {
                    line,
                    msg: "bad dimension".into(),
                })?;
                let radius = parse_rat(toks[7])
                    .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                let psis = parse_levels(&mut lines, &carrier, n, doc.ring().ring)?;
                let q = QuadStructure { n, carrier, psis, radius };
                doc.structures.insert(name.to_string(), (toks[3].into(), q));
            }
            "pair" => {
                // pair P map f boundary psi radius R {  (delta levels inside)
                expect_end(line, &toks, 9)?;
                let name = toks[1];
                let (_, _, f) = doc.chainmaps.get(toks[3]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[3].into(),
                    context: format!("pair {name}"),
                })?;
                let (_, psi) = doc.structures.get(toks[5]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[5].into(),
                    context: format!("pair {name}"),
                })?;
                let radius = parse_rat(toks[7])
                    .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                let delta = parse_levels(&mut lines, &f.target, psi.n + 1, doc.ring().ring)?;
                let p = QuadPair { f, delta, psi, radius };
                doc.pairs
                    .insert(name.to_string(), (toks[3].into(), toks[5].into(), p));
            }
            "cobordism" => {
                // cobordism W pair P left psiL right psiR
                expect_end(line, &toks, 8)?;
                let name = toks[1];
                let (_, _, p) = doc.pairs.get(toks[3]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[3].into(),
                    context: format!("cobordism {name}"),
                })?;
                let (_, l) = doc.structures.get(toks[5]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[5].into(),
                    context: format!("cobordism {name}"),
                })?;
                let (_, r) = doc.structures.get(toks[7]).cloned().ok_or(CcxError::Dangling {
                    line,
                    name: toks[7].into(),
                    context: format!("cobordism {name}"),
                })?;
                let w = Cobordism::try_new(p, l, r)
                    .map_err(|e| CcxError::Parse { line, msg: format!("{e:?}") })?;
                doc.cobordisms.insert(
                    name.to_string(),
                    (toks[3].into(), toks[5].into(), toks[7].into(), w),
                );
            }
            "certificate" => {
                // certificate <name> contraction for <kind> <target> radius R over <subset> {
                // certificate <name> connectivity for <kind> <target> radius R {
                // certificate <name> equivalence for map <f> radius R over <subset> weak 0|1 {
                let name = toks[1];
                match toks.get(2) {
                    Some(&"contraction") => {
                        let target = parse_cert_target(line, &toks[3..6])?;
                        let radius = parse_rat(toks[7])
                            .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                        let over = doc.subsets.get(toks[9]).cloned().ok_or(CcxError::Dangling {
                            line,
                            name: toks[9].into(),
                            context: format!("certificate {name}"),
                        })?;
                        let cx = match &target {
                            CertTarget::Complex(n) => {
                                doc.complexes.get(n).cloned().ok_or(CcxError::Dangling {
                                    line,
                                    name: n.clone(),
                                    context: format!("certificate {name}"),
                                })?
                            }
                            CertTarget::DualityCone(n) => {
                                let (_, q) =
                                    doc.structures.get(n).ok_or(CcxError::Dangling {
                                        line,
                                        name: n.clone(),
                                        context: format!("certificate {name}"),
                                    })?;
                                crate::complex::mapping_cone(&q.duality_map())
                            }
                            CertTarget::PairCone(n) => {
                                let (_, _, p) = doc.pairs.get(n).ok_or(CcxError::Dangling {
                                    line,
                                    name: n.clone(),
                                    context: format!("certificate {name}"),
                                })?;
                                crate::complex::mapping_cone(&p.duality_into_cone())
                            }
                        };
                        let gamma =
                            parse_degree_maps(&mut lines, &cx, &cx, doc.ring().ring, 1)?;
                        doc.certificates.insert(
                            name.to_string(),
                            CertBlock::Contraction {
                                target,
                                cert: ContractionCert { gamma, radius, over },
                            },
                        );
                    }
                    Some(&"connectivity") => {
                        let target = parse_cert_target(line, &toks[3..6])?;
                        let radius = parse_rat(toks[7])
                            .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                        let cx = match &target {
                            CertTarget::Complex(n) => {
                                doc.complexes.get(n).cloned().ok_or(CcxError::Dangling {
                                    line,
                                    name: n.clone(),
                                    context: format!("certificate {name}"),
                                })?
                            }
                            CertTarget::DualityCone(n) => {
                                let (_, q) =
                                    doc.structures.get(n).ok_or(CcxError::Dangling {
                                        line,
                                        name: n.clone(),
                                        context: format!("certificate {name}"),
                                    })?;
                                crate::complex::mapping_cone(&q.duality_map())
                            }
                            CertTarget::PairCone(n) => {
                                let (_, _, p) = doc.pairs.get(n).ok_or(CcxError::Dangling {
                                    line,
                                    name: n.clone(),
                                    context: format!("certificate {name}"),
                                })?;
                                crate::complex::mapping_cone(&p.duality_into_cone())
                            }
                        };
                        let entries = parse_entries(&mut lines, doc.ring().ring)?;
                        let h = GeomMorphism::try_new(
                            cx.module_at(0),
                            cx.module_at(1),
                            entries,
                            radius.clone(),
                        )
                        .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                        doc.certificates.insert(
                            name.to_string(),
                            CertBlock::Connectivity {
                                target,
                                cert: ConnectivityCert { h, radius },
                            },
                        );
                    }
                    Some(&"equivalence") => {
                        // certificate g equivalence for map f radius R over S weak W {
                        let map_name = toks[5].to_string();
                        let (_, _, f) =
                            doc.chainmaps.get(&map_name).cloned().ok_or(CcxError::Dangling {
                                line,
                                name: map_name.clone(),
                                context: format!("certificate {name}"),
                            })?;
                        let radius = parse_rat(toks[7])
                            .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?;
                        let over =
                            doc.subsets.get(toks[9]).cloned().ok_or(CcxError::Dangling {
                                line,
                                name: toks[9].into(),
                                context: format!("certificate {name}"),
                            })?;
                        let weak = toks.get(11) == Some(&"1");
                        let mut inverse = BTreeMap::new();
                        let mut h = BTreeMap::new();
                        let mut k = BTreeMap::new();
                        loop {
                            let Some((l2, t2)) = lines.next() else {
                                return perr(line, "unterminated certificate block");
                            };
                            match t2[0] {
                                "}" => break,
                                "inverse" | "homotopy-source" | "homotopy-target" => {
                                    let deg: i64 =
                                        t2[2].parse().map_err(|_| CcxError::Parse {
                                            line: l2,
                                            msg: "bad degree".into(),
                                        })?;
                                    let entries =
                                        parse_entries(&mut lines, doc.ring().ring)?;
                                    let (src, tgt) = match t2[0] {
                                        "inverse" => {
                                            (f.target.module_at(deg), f.source.module_at(deg))
                                        }
                                        "homotopy-source" => (
                                            f.source.module_at(deg),
                                            f.source.module_at(deg + 1),
                                        ),
                                        _ => (
                                            f.target.module_at(deg),
                                            f.target.module_at(deg + 1),
                                        ),
                                    };
                                    let budget = radius.clone() + radius.clone();
                                    let m = GeomMorphism::try_new(src, tgt, entries, budget)
                                        .map_err(|e| CcxError::Parse {
                                            line: l2,
                                            msg: e.to_string(),
                                        })?;
                                    match t2[0] {
                                        "inverse" => inverse.insert(deg, m),
                                        "homotopy-source" => h.insert(deg, m),
                                        _ => k.insert(deg, m),
                                    };
                                }
                                other => {
                                    return perr(l2, format!("unexpected `{other}` in certificate"))
                                }
                            }
                        }
                        doc.certificates.insert(
                            name.to_string(),
                            CertBlock::Equivalence {
                                map: map_name,
                                cert: EquivalenceCert { inverse, h, k, radius, over, weak },
                            },
                        );
                    }
                    _ => return perr(line, "unknown certificate kind"),
                }
            }
            "rep" => {
                // rep R structure psi n N delta D eps E zone S [poincare c1] [connectivity c2]
                let name = toks[1];
                let mut it = toks[2..].iter();
                let mut structure = None;
                let mut dec_n = 0i64;
                let mut delta = rat(0);
                let mut eps = rat(0);
                let mut zone = None;
                let mut poincare = None;
                let mut connectivity = None;
                while let Some(key) = it.next() {
                    let val = it.next().ok_or(CcxError::Parse {
                        line,
                        msg: format!("rep key `{key}` needs a value"),
                    })?;
                    match *key {
                        "structure" => structure = Some(val.to_string()),
                        "n" => {
                            dec_n = val.parse().map_err(|_| CcxError::Parse {
                                line,
                                msg: "bad n".into(),
                            })?
                        }
                        "delta" => {
                            delta = parse_rat(val)
                                .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?
                        }
                        "eps" => {
                            eps = parse_rat(val)
                                .map_err(|e| CcxError::Parse { line, msg: e.to_string() })?
                        }
                        "zone" => zone = Some(val.to_string()),
                        "poincare" => poincare = Some(val.to_string()),
                        "connectivity" => connectivity = Some(val.to_string()),
                        other => return perr(line, format!("unknown rep key `{other}`")),
                    }
                }
                let structure = structure.ok_or(CcxError::Parse {
                    line,
                    msg: "rep needs a structure".into(),
                })?;
                if !doc.structures.contains_key(&structure) {
                    return Err(CcxError::Dangling {
                        line,
                        name: structure,
                        context: format!("rep {name}"),
                    });
                }
                let zone = zone.ok_or(CcxError::Parse { line, msg: "rep needs a zone".into() })?;
                if !doc.subsets.contains_key(&zone) {
                    return Err(CcxError::Dangling {
                        line,
                        name: zone,
                        context: format!("rep {name}"),
                    });
                }
                doc.reps.insert(
                    name.to_string(),
                    RepBlock { structure, dec_n, delta, eps, zone, poincare, connectivity },
                );
            }
            other => return perr(line, format!("unknown block `{other}`")),
        }
    }
    Ok(doc)
}

fn parse_cert_target(line: usize, toks: &[&str]) -> Result<CertTarget, CcxError> {
    if toks.len() < 3 || toks[0] != "for" {
        return perr(line, "expected `for <kind> <name>`");
    }
    match toks[1] {
        "complex" => Ok(CertTarget::Complex(toks[2].to_string())),
        "duality" => Ok(CertTarget::DualityCone(toks[2].to_string())),
        "pair-duality" => Ok(CertTarget::PairCone(toks[2].to_string())),
        other => perr(line, format!("unknown certificate target `{other}`")),
    }
}

/// Parses `degree <d> radius <r> { entry... }` blocks; `shift` is the
/// degree offset of the target (1 for contraction witnesses).
fn parse_degree_maps(
    lines: &mut Lines,
    src: &ControlledComplex,
    tgt: &ControlledComplex,
    ring: Ring,
    shift: i64,
) -> Result<BTreeMap<i64, GeomMorphism>, CcxError> {
    let mut out = BTreeMap::new();
    loop {
        let Some((l2, t2)) = lines.next() else {
            return perr(0, "unterminated block");
        };
        match t2[0] {
            "}" => break,
            "degree" => {
                let d: i64 = t2[1].parse().map_err(|_| CcxError::Parse {
                    line: l2,
                    msg: "bad degree".into(),
                })?;
                if t2.get(2) != Some(&"radius") {
                    return perr(l2, "expected `degree <d> radius <r> {`");
                }
                let r = parse_rat(t2[3])
                    .map_err(|e| CcxError::Parse { line: l2, msg: e.to_string() })?;
                let entries = parse_entries(lines, ring)?;
                let m = GeomMorphism::try_new(
                    src.module_at(d),
                    tgt.module_at(d + shift),
                    entries,
                    r,
                )
                .map_err(|e| CcxError::Parse { line: l2, msg: e.to_string() })?;
                if !m.is_zero() {
                    out.insert(d, m);
                }
            }
            other => return perr(l2, format!("unexpected `{other}` in map block")),
        }
    }
    Ok(out)
}

fn parse_levels(
    lines: &mut Lines,
    carrier: &ControlledComplex,
    dim: i64,
    ring: Ring,
) -> Result<PsiFamily, CcxError> {
    let mut levels: BTreeMap<usize, BTreeMap<i64, GeomMorphism>> = BTreeMap::new();
    loop {
        let Some((l2, t2)) = lines.next() else {
            return perr(0, "unterminated structure block");
        };
        match t2[0] {
            "}" => break,
            "level" => {
                // level <s> degree <r> radius <rad> { entries }
                let s: usize = t2[1].parse().map_err(|_| CcxError::Parse {
                    line: l2,
                    msg: "bad level".into(),
                })?;
                let r: i64 = t2[3].parse().map_err(|_| CcxError::Parse {
                    line: l2,
                    msg: "bad degree".into(),
                })?;
                let rad = parse_rat(t2[5])
                    .map_err(|e| CcxError::Parse { line: l2, msg: e.to_string() })?;
                let entries = parse_entries(lines, ring)?;
                let m = GeomMorphism::try_new(
                    carrier.module_at(dim - r - s as i64),
                    carrier.module_at(r),
                    entries,
                    rad,
                )
                .map_err(|e| CcxError::Parse { line: l2, msg: e.to_string() })?;
                if !m.is_zero() {
                    levels.entry(s).or_default().insert(r, m);
                }
            }
            other => return perr(l2, format!("unexpected `{other}` in structure")),
        }
    }
    let max_level = levels.keys().max().copied().unwrap_or(0);
    let mut out: PsiFamily = Vec::new();
    for s in 0..=max_level {
        out.push(levels.remove(&s).unwrap_or_default());
    }
    while out.last().is_some_and(|l| l.is_empty()) && out.len() > 1 {
        out.pop();
    }
    if out.len() == 1 && out[0].is_empty() {
        out.clear();
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Canonical emitter.

fn emit_entries(out: &mut String, m: &GeomMorphism, indent: &str) {
    for (r, c, v) in m.entries() {
        out.push_str(&format!("{indent}entry {r} {c} {v}\n"));
    }
}

pub fn emit_ccx(doc: &CcxDocument) -> String {
    let mut out = String::from("ccx 1\n");
    if let Some(r) = doc.ring {
        match r.ring {
            Ring::Int => out.push_str("ring z\n"),
            Ring::Mod(m) => out.push_str(&format!("ring zmod {m}\n")),
        }
    }
    for (name, space) in &doc.spaces {
        out.push_str(&format!("space {name} {{\n"));
        out.push_str(&format!("  points {}\n", space.ids.join(" ")));
        for i in 0..space.len() {
            let row: Vec<String> = (0..space.len()).map(|j| format_rat(&space.d(i, j))).collect();
            out.push_str(&format!("  row {} {}\n", space.ids[i], row.join(" ")));
        }
        for (sname, subset) in &doc.subsets {
            if subset.space == *space {
                let members: Vec<&str> =
                    subset.members().map(|i| space.ids[i].as_str()).collect();
                out.push_str(&format!("  subset {sname} {}\n", members.join(" ")));
            }
        }
        out.push_str("}\n");
    }
    for (name, m) in &doc.modules {
        let space_name = doc
            .spaces
            .iter()
            .find(|(_, s)| **s == m.space)
            .map(|(n, _)| n.as_str())
            .unwrap_or("?");
        out.push_str(&format!("module {name} over {space_name} {{\n"));
        let ids: Vec<&str> = m.points.iter().map(|&p| m.space.ids[p].as_str()).collect();
        out.push_str(&format!("  basis {}\n", ids.join(" ")));
        out.push_str("}\n");
    }
    for (name, (src, tgt, m)) in &doc.morphisms {
        out.push_str(&format!(
            "morphism {name} from {src} to {tgt} radius {} {{\n",
            format_rat(&m.radius)
        ));
        emit_entries(&mut out, m, "  ");
        out.push_str("}\n");
    }
    for (name, c) in &doc.complexes {
        let space_name = doc
            .spaces
            .iter()
            .find(|(_, s)| **s == c.space)
            .map(|(n, _)| n.as_str())
            .unwrap_or("?");
        out.push_str(&format!("complex {name} over {space_name} {{\n"));
        out.push_str(&format!("  radius {}\n", format_rat(&c.radius)));
        for d in c.degrees() {
            let m = c.module_at(d);
            let ids: Vec<&str> = m.points.iter().map(|&p| c.space.ids[p].as_str()).collect();
            out.push_str(&format!("  degree {d} basis {}\n", ids.join(" ")));
        }
        for d in c.degrees().skip(1) {
            let diff = c.diff_at(d);
            if diff.is_zero() {
                continue;
            }
            out.push_str(&format!("  d {d} radius {} {{\n", format_rat(&diff.radius)));
            emit_entries(&mut out, &diff, "    ");
            out.push_str("  }\n");
        }
        if c.is_projective() {
            for d in c.degrees() {
                let q = c.idem_at(d);
                if q.is_zero() {
                    continue;
                }
                out.push_str(&format!("  idem {d} radius {} {{\n", format_rat(&q.radius)));
                emit_entries(&mut out, &q, "    ");
                out.push_str("  }\n");
            }
        }
        out.push_str("}\n");
    }
    for (name, (src, tgt, f)) in &doc.chainmaps {
        out.push_str(&format!(
            "chainmap {name} from {src} to {tgt} radius {} {{\n",
            format_rat(&f.radius)
        ));
        for d in f.degrees() {
            let m = f.map_at(d);
            out.push_str(&format!("  degree {d} radius {} {{\n", format_rat(&m.radius)));
            emit_entries(&mut out, &m, "    ");
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    for (name, (carrier, q)) in &doc.structures {
        out.push_str(&format!(
            "structure {name} on {carrier} dim {} radius {} {{\n",
            q.n,
            format_rat(&q.radius)
        ));
        for (s, level) in q.psis.iter().enumerate() {
            for (r, m) in level {
                out.push_str(&format!(
                    "  level {s} degree {r} radius {} {{\n",
                    format_rat(&m.radius)
                ));
                emit_entries(&mut out, m, "    ");
                out.push_str("  }\n");
            }
        }
        out.push_str("}\n");
    }
    for (name, (map, boundary, p)) in &doc.pairs {
        out.push_str(&format!(
            "pair {name} map {map} boundary {boundary} radius {} {{\n",
            format_rat(&p.radius)
        ));
        for (s, level) in p.delta.iter().enumerate() {
            for (r, m) in level {
                out.push_str(&format!(
                    "  level {s} degree {r} radius {} {{\n",
                    format_rat(&m.radius)
                ));
                emit_entries(&mut out, m, "    ");
                out.push_str("  }\n");
            }
        }
        out.push_str("}\n");
    }
    for (name, (pair, left, right, _)) in &doc.cobordisms {
        out.push_str(&format!("cobordism {name} pair {pair} left {left} right {right}\n"));
    }
    for (name, cert) in &doc.certificates {
        match cert {
            CertBlock::Contraction { target, cert } => {
                let (kind, tname) = target_parts(target);
                let over_name = subset_name(doc, &cert.over);
                out.push_str(&format!(
                    "certificate {name} contraction for {kind} {tname} radius {} over {over_name} {{\n",
                    format_rat(&cert.radius)
                ));
                for (d, m) in &cert.gamma {
                    out.push_str(&format!(
                        "  degree {d} radius {} {{\n",
                        format_rat(&m.radius)
                    ));
                    emit_entries(&mut out, m, "    ");
                    out.push_str("  }\n");
                }
                out.push_str("}\n");
            }
            CertBlock::Connectivity { target, cert } => {
                let (kind, tname) = target_parts(target);
                out.push_str(&format!(
                    "certificate {name} connectivity for {kind} {tname} radius {} {{\n",
                    format_rat(&cert.radius)
                ));
                emit_entries(&mut out, &cert.h, "  ");
                out.push_str("}\n");
            }
            CertBlock::Equivalence { map, cert } => {
                let over_name = subset_name(doc, &cert.over);
                out.push_str(&format!(
                    "certificate {name} equivalence for map {map} radius {} over {over_name} weak {} {{\n",
                    format_rat(&cert.radius),
                    if cert.weak { 1 } else { 0 }
                ));
                for (d, m) in &cert.inverse {
                    out.push_str(&format!("  inverse degree {d} {{\n"));
                    emit_entries(&mut out, m, "    ");
                    out.push_str("  }\n");
                }
                for (d, m) in &cert.h {
                    out.push_str(&format!("  homotopy-source degree {d} {{\n"));
                    emit_entries(&mut out, m, "    ");
                    out.push_str("  }\n");
                }
                for (d, m) in &cert.k {
                    out.push_str(&format!("  homotopy-target degree {d} {{\n"));
                    emit_entries(&mut out, m, "    ");
                    out.push_str("  }\n");
                }
                out.push_str("}\n");
            }
        }
    }
    for (name, rep) in &doc.reps {
        out.push_str(&format!(
            "rep {name} structure {} n {} delta {} eps {} zone {}",
            rep.structure,
            rep.dec_n,
            format_rat(&rep.delta),
            format_rat(&rep.eps),
            rep.zone
        ));
        if let Some(p) = &rep.poincare {
            out.push_str(&format!(" poincare {p}"));
        }
        if let Some(c) = &rep.connectivity {
            out.push_str(&format!(" connectivity {c}"));
        }
        out.push('\n');
    }
    out
}

fn target_parts(t: &CertTarget) -> (&'static str, &str) {
    match t {
        CertTarget::Complex(n) => ("complex", n),
        CertTarget::DualityCone(n) => ("duality", n),
        CertTarget::PairCone(n) => ("pair-duality", n),
    }
}

fn subset_name<'a>(doc: &'a CcxDocument, s: &Subset) -> &'a str {
    doc.subsets
        .iter()
        .find(|(_, v)| *v == s)
        .map(|(n, _)| n.as_str())
        .unwrap_or("?")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
ccx 1
ring z
space X {
  points a b c
  row a 0 1 2
  row b 1 0 1
  row c 2 1 0
  subset Y a
}
module M over X {
  basis a b
}
morphism f from M to M radius 1 {
  entry 0 0 2
  entry 1 0 -1
}
complex C over X {
  radius 1
  degree 0 basis a b
  degree 1 basis b
  d 1 radius 1 {
    entry 0 0 3
  }
}
structure psi on C dim 1 radius 1 {
  level 0 degree 1 radius 1 {
    entry 0 0 1
  }
  level 0 degree 0 radius 1 {
    entry 0 0 -1
  }
}
";

    #[test]
    fn parse_and_check_sample() {
        let doc = parse_ccx(SAMPLE).unwrap();
        assert_eq!(doc.spaces.len(), 1);
        assert_eq!(doc.modules["M"].rank(), 2);
        assert_eq!(doc.morphisms["f"].2.entry(1, 0), -1);
        assert!(doc.complexes["C"].verify().is_empty());
        let results = doc.check_all();
        assert!(results.iter().all(|(_, r)| r.is_ok()), "{results:?}");
    }

    #[test]
    fn roundtrip_is_canonical() {
        let doc = parse_ccx(SAMPLE).unwrap();
        let emitted = emit_ccx(&doc);
        let doc2 = parse_ccx(&emitted).unwrap();
        let emitted2 = emit_ccx(&doc2);
        assert_eq!(emitted, emitted2, "second emission must be byte-identical");
    }

    #[test]
    fn empty_document_roundtrips() {
        let doc = parse_ccx("").unwrap();
        assert_eq!(emit_ccx(&doc), "ccx 1\n");
        let doc2 = parse_ccx(&emit_ccx(&doc)).unwrap();
        assert_eq!(emit_ccx(&doc2), "ccx 1\n");
    }

    #[test]
    fn dangling_reference_names_the_block() {
        let bad = "ccx 1\nring z\nmodule M over NOPE {\n  basis a\n}\n";
        match parse_ccx(bad) {
            Err(CcxError::Dangling { name, context, .. }) => {
                assert_eq!(name, "NOPE");
                assert!(context.contains("module M"));
            }
            other => panic!("expected dangling error, got {other:?}"),
        }
    }

    #[test]
    fn decimal_distances_parse_exactly() {
        let text = "\
ccx 1
ring z
space X {
  points a b
  row a 0 1.5
  row b 1.5 0
}
";
        let doc = parse_ccx(text).unwrap();
        let sp = &doc.spaces["X"];
        assert_eq!(sp.d(0, 1), crate::rat::ratio(3, 2));
    }
}
