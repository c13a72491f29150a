//! Subgroups of the congruence quotients as stabilizer chains.
//!
//! Every group here lies in the Sylow p-subgroup of `Sym(p^n)` that preserves
//! the tree. Let `N_i` be the set of portraits whose labels vanish at the
//! first `i` vertices in breadth-first order. Then `N_{i+1}` is the kernel of
//! the homomorphism `N_i -> F_p` reading the label at vertex `i`, so the
//! `N_i` form a subnormal series with factors of order p. A subgroup `H` is
//! stored by at most one element `T_i` per vertex `i`, with leading label 1,
//! such that `H ∩ N_i = <T_i> (H ∩ N_{i+1})`. Sifting an element against the
//! table decides membership, and `|H| = p^(number of entries)`.
//!
//! Seen as permutations of all tree vertices, this is a stabilizer chain whose
//! base points are the first children of the table vertices and whose basic
//! orbits all have length p.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::datum::NumericalDatum;
use crate::error::{Error, Result};
use crate::fp;
use crate::tree::{level_offset, level_width, mul_into, Perm, Portrait, Vertex};

/// Default bound on the number of leaves `p^n` of a quotient.
pub const DEFAULT_DEGREE_GUARD: u64 = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    /// Breadth-first index of the leading vertex.
    index: usize,
    /// `powers[e] = T^e` for `e = 0..p`.
    powers: Vec<Vec<u8>>,
}

#[derive(Debug, Clone)]
pub struct SubgroupChain {
    p: u32,
    depth: u32,
    gens: Vec<Portrait>,
    /// Sorted by leading index.
    entries: Vec<Entry>,
    /// Vertex index to entry position plus one; zero when empty.
    slot: Vec<u32>,
}

struct Scratch {
    tmp: Vec<u8>,
    img: Vec<u32>,
}

impl Scratch {
    fn new(len: usize) -> Self {
        Scratch { tmp: vec![0; len], img: vec![0; len] }
    }
}

impl SubgroupChain {
    pub fn trivial(p: u32, depth: u32) -> Self {
        SubgroupChain {
            p,
            depth,
            gens: Vec::new(),
            entries: Vec::new(),
            slot: vec![0; level_offset(p, depth)],
        }
    }

    /// The subgroup generated by `gens`.
    pub fn generate(p: u32, depth: u32, gens: &[Portrait]) -> Self {
        Self::closure(p, depth, gens, &[], gens.to_vec())
    }

    /// The normal closure of `elements` under conjugation by `normalizers`.
    pub fn normal_closure(p: u32, depth: u32, elements: &[Portrait], normalizers: &[Portrait]) -> Self {
        let mut chain = Self::closure(p, depth, elements, normalizers, Vec::new());
        chain.gens = chain.entries();
        chain
    }

    fn closure(p: u32, depth: u32, elements: &[Portrait], normalizers: &[Portrait], gens: Vec<Portrait>) -> Self {
        let mut chain = SubgroupChain::trivial(p, depth);
        chain.gens = gens;
        chain.extend(elements, normalizers);
        chain
    }

    /// Adds `elements` and closes under products and conjugation by
    /// `normalizers`.
    fn extend(&mut self, elements: &[Portrait], normalizers: &[Portrait]) {
        let len = self.slot.len();
        let mut scratch = Scratch::new(len);
        let mut queue: VecDeque<Vec<u8>> = elements.iter().map(|g| g.labels().to_vec()).collect();
        while let Some(mut x) = queue.pop_front() {
            let Some(lead) = self.sift_raw(&mut x, &mut scratch) else { continue };
            let pos = self.insert_unsorted(x, lead, &mut scratch);
            let t = self.portrait_of(pos, 1);
            // p-th power
            let tp = t.pow(self.p as u64);
            if !tp.is_identity() {
                queue.push_back(tp.labels().to_vec());
            }
            for other in 0..self.entries.len() {
                if other == pos {
                    continue;
                }
                let u = self.portrait_of(other, 1);
                let c = t.commutator(&u);
                if !c.is_identity() {
                    queue.push_back(c.labels().to_vec());
                }
            }
            for g in normalizers {
                let c = t.conj(g);
                queue.push_back(c.labels().to_vec());
            }
        }
        self.sort_entries();
    }

    fn portrait_of(&self, pos: usize, e: usize) -> Portrait {
        Portrait::from_labels(self.p, self.depth, self.entries[pos].powers[e].clone()).expect("table entry")
    }

    fn sort_entries(&mut self) {
        self.entries.sort_by_key(|e| e.index);
        self.slot.iter_mut().for_each(|s| *s = 0);
        for (i, e) in self.entries.iter().enumerate() {
            self.slot[e.index] = i as u32 + 1;
        }
    }

    /// Sifts `x` in place; returns the leading index of the remainder, or
    /// `None` if it sifted to the identity.
    fn sift_raw(&self, x: &mut Vec<u8>, s: &mut Scratch) -> Option<usize> {
        let p = self.p as u8;
        let mut i = 0usize;
        loop {
            while i < x.len() && x[i] == 0 {
                i += 1;
            }
            if i == x.len() {
                return None;
            }
            let slot = self.slot[i];
            if slot == 0 {
                return Some(i);
            }
            let c = x[i];
            let t = &self.entries[slot as usize - 1].powers[(p - c) as usize];
            mul_into(self.p, self.depth, x, t, &mut s.tmp, &mut s.img);
            std::mem::swap(x, &mut s.tmp);
            i += 1;
        }
    }

    fn insert_unsorted(&mut self, x: Vec<u8>, lead: usize, s: &mut Scratch) -> usize {
        let p = self.p;
        let c = x[lead] as u32;
        let k = fp::inv(c, p) as u64;
        let base = Portrait::from_labels(p, self.depth, x).expect("sifted element");
        let t = base.pow(k);
        let mut powers = Vec::with_capacity(p as usize);
        let mut cur = vec![0u8; self.slot.len()];
        powers.push(cur.clone());
        for _ in 1..p {
            let mut next = vec![0u8; cur.len()];
            mul_into(p, self.depth, &cur, t.labels(), &mut next, &mut s.img);
            cur = next;
            powers.push(cur.clone());
        }
        debug_assert_eq!(powers[1][lead], 1);
        self.entries.push(Entry { index: lead, powers });
        let pos = self.entries.len() - 1;
        self.slot[lead] = pos as u32 + 1;
        pos
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of leaves acted on.
    pub fn degree(&self) -> usize {
        level_width(self.p, self.depth)
    }

    pub fn generators(&self) -> &[Portrait] {
        &self.gens
    }

    /// The table elements `T_i`, in increasing leading index.
    pub fn entries(&self) -> Vec<Portrait> {
        (0..self.entries.len()).map(|i| self.portrait_of(i, 1)).collect()
    }

    pub fn leading_indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    /// `log_p |H|`.
    pub fn log_order(&self) -> usize {
        self.entries.len()
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.entries.len() as u32)
    }

    pub fn is_trivial(&self) -> bool {
        self.entries.is_empty()
    }

    /// Base points: the first child of every table vertex.
    pub fn base(&self) -> Vec<Vertex> {
        self.entries
            .iter()
            .map(|e| Vertex::from_index(self.p, e.index).child(1).expect("child"))
            .collect()
    }

    /// Basic orbit lengths, all equal to p.
    pub fn orbit_lengths(&self) -> Vec<u32> {
        vec![self.p; self.entries.len()]
    }

    pub fn contains(&self, g: &Portrait) -> bool {
        if g.p() != self.p || g.depth() != self.depth {
            return false;
        }
        let mut x = g.labels().to_vec();
        let mut s = Scratch::new(x.len());
        self.sift_raw(&mut x, &mut s).is_none()
    }

    pub fn contains_perm(&self, perm: &Perm) -> bool {
        match Portrait::from_leaf_permutation(self.p, self.depth, perm) {
            Ok(g) => self.contains(&g),
            Err(_) => false,
        }
    }

    /// Whether every element of `other` lies in `self`.
    pub fn contains_chain(&self, other: &SubgroupChain) -> bool {
        self.p == other.p
            && self.depth == other.depth
            && (0..other.entries.len()).all(|i| self.contains(&other.portrait_of(i, 1)))
    }

    /// First table element of `other` outside `self`.
    pub fn first_missing(&self, other: &SubgroupChain) -> Option<Portrait> {
        other.entries().into_iter().find(|g| !self.contains(g))
    }

    pub fn same_group(&self, other: &SubgroupChain) -> bool {
        self.entries.len() == other.entries.len() && self.contains_chain(other)
    }

    /// Generating set used for commutator subgroups: the original generators
    /// when known, otherwise the table.
    fn working_gens(&self) -> Vec<Portrait> {
        if self.gens.is_empty() {
            self.entries()
        } else {
            self.gens.clone()
        }
    }

    pub fn derived(&self) -> SubgroupChain {
        let gens = self.working_gens();
        let mut comms = Vec::new();
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                let c = gens[i].commutator(&gens[j]);
                if !c.is_identity() {
                    comms.push(c);
                }
            }
        }
        SubgroupChain::normal_closure(self.p, self.depth, &comms, &gens)
    }

    /// `[N, H]` for a normal subgroup `N` of `self`.
    pub fn commutator_with(&self, normal: &SubgroupChain) -> SubgroupChain {
        let gens = self.working_gens();
        let mut comms = Vec::new();
        for x in normal.entries() {
            for g in &gens {
                let c = x.commutator(g);
                if !c.is_identity() {
                    comms.push(c);
                }
            }
        }
        SubgroupChain::normal_closure(self.p, self.depth, &comms, &gens)
    }

    pub fn gamma3(&self) -> SubgroupChain {
        self.commutator_with(&self.derived())
    }

    pub fn second_derived(&self) -> SubgroupChain {
        self.derived().derived()
    }

    /// Normal closure of `elements` in `self`.
    pub fn normal_closure_of(&self, elements: &[Portrait]) -> SubgroupChain {
        SubgroupChain::normal_closure(self.p, self.depth, elements, &self.working_gens())
    }

    /// Elements fixing every vertex of level `k`.
    pub fn level_kernel(&self, k: u32) -> SubgroupChain {
        let start = level_offset(self.p, k.min(self.depth));
        let entries: Vec<Entry> = self.entries.iter().filter(|e| e.index >= start).cloned().collect();
        let mut chain = SubgroupChain::trivial(self.p, self.depth);
        chain.entries = entries;
        chain.sort_entries();
        chain.gens = chain.entries();
        chain
    }

    /// Image under truncation to depth `m`.
    pub fn project(&self, m: u32) -> SubgroupChain {
        let gens: Vec<Portrait> = self.working_gens().iter().map(|g| g.truncate(m)).collect();
        SubgroupChain::generate(self.p, m.min(self.depth), &gens)
    }

    /// Stabilizer of the vertex `u`.
    pub fn stabilizer(&self, u: &Vertex) -> SubgroupChain {
        let (stab, _) = self.orbit_stabilizer(u);
        SubgroupChain::generate(self.p, self.depth, &stab)
    }

    /// Orbit of `u` (as level positions) with stabilizer generators.
    fn orbit_stabilizer(&self, u: &Vertex) -> (Vec<Portrait>, Vec<usize>) {
        let level = u.len() as u32;
        let mut orbit: Vec<usize> = vec![u.position()];
        let mut trans: HashMap<usize, Portrait> = HashMap::new();
        trans.insert(u.position(), Portrait::identity(self.p, self.depth));
        let mut stab = Vec::new();
        for pos in (0..self.entries.len()).rev() {
            let t = self.portrait_of(pos, 1);
            let y = image_position(&t, level, u.position());
            if let Some(tr) = trans.get(&y) {
                let s = t.mul(&tr.invert());
                if !s.is_identity() {
                    stab.push(s);
                }
            } else {
                let old = orbit.clone();
                for e in 1..self.p as usize {
                    let te = self.portrait_of(pos, e);
                    for &w in &old {
                        let w2 = image_position(&te, level, w);
                        let tr = trans[&w].mul(&te);
                        trans.insert(w2, tr);
                        orbit.push(w2);
                    }
                }
            }
        }
        orbit.sort_unstable();
        (stab, orbit)
    }

    /// Orbit of `u` as sorted level positions.
    pub fn orbit(&self, u: &Vertex) -> Vec<usize> {
        self.orbit_stabilizer(u).1
    }

    /// Sections at `u` of the stabilizer of `u`, one level set per call.
    pub fn section_image(&self, u: &Vertex) -> SubgroupChain {
        let level = u.len() as u32;
        let (stab, _) = self.orbit_stabilizer(u);
        let secs: Vec<Portrait> = stab.iter().map(|g| g.section_unchecked(level, u.position())).collect();
        SubgroupChain::generate(self.p, self.depth - level, &secs)
    }

    /// All elements, for small groups.
    pub fn elements(&self) -> Vec<Portrait> {
        let mut out = vec![Portrait::identity(self.p, self.depth)];
        for pos in (0..self.entries.len()).rev() {
            let mut next = Vec::with_capacity(out.len() * self.p as usize);
            for e in 0..self.p as usize {
                let te = self.portrait_of(pos, e);
                for x in &out {
                    next.push(te.mul(x));
                }
            }
            out = next;
        }
        out
    }

    /// Leaf permutations of the table elements.
    pub fn entry_permutations(&self) -> Vec<Perm> {
        self.entries().iter().map(|g| g.leaf_permutation()).collect()
    }

    /// Rebuilds a chain from its table elements. With `verify`, also checks
    /// that the table is closed under powers and commutators.
    pub fn from_entries(p: u32, depth: u32, entries: &[Portrait], gens: Vec<Portrait>, verify: bool) -> Result<Self> {
        let mut chain = SubgroupChain::trivial(p, depth);
        let mut s = Scratch::new(chain.slot.len());
        for t in entries {
            let lead = t
                .labels()
                .iter()
                .position(|&x| x != 0)
                .ok_or_else(|| Error::Cache("identity table entry".into()))?;
            if t.labels()[lead] != 1 || chain.slot[lead] != 0 {
                return Err(Error::Cache("malformed table entry".into()));
            }
            chain.insert_unsorted(t.labels().to_vec(), lead, &mut s);
        }
        chain.sort_entries();
        let ts = chain.entries();
        for (i, t) in ts.iter().enumerate().filter(|_| verify) {
            if !chain.contains(&t.pow(p as u64)) {
                return Err(Error::Cache("table not closed under powers".into()));
            }
            for u in &ts[i + 1..] {
                if !chain.contains(&t.commutator(u)) {
                    return Err(Error::Cache("table not closed under commutators".into()));
                }
            }
        }
        chain.gens = if gens.is_empty() { ts } else { gens };
        Ok(chain)
    }
}

/// Position on level `level` of the image of the vertex at `pos`.
pub fn image_position(f: &Portrait, level: u32, pos: usize) -> usize {
    let p = f.p() as usize;
    let labels = f.labels();
    let mut digits = Vec::with_capacity(level as usize);
    let mut q = pos;
    for _ in 0..level {
        digits.push(q % p);
        q /= p;
    }
    digits.reverse();
    let mut src = 0usize;
    let mut out = 0usize;
    for (k, &d) in digits.iter().enumerate() {
        let l = labels[level_offset(f.p(), k as u32) + src] as usize;
        out = out * p + (d + l) % p;
        src = src * p + d;
    }
    out
}

/// The congruence quotient `G / St_G(n)`.
#[derive(Debug, Clone)]
pub struct FiniteQuotient {
    datum: NumericalDatum,
    level: u32,
    /// `a` first, then `b_i^(j)` in generator label order.
    generators: Vec<Portrait>,
    chain: SubgroupChain,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LayerRow {
    pub level: u32,
    /// `log_p |G / St_G(level)|`.
    pub log_order: usize,
    /// `log_p |St_G(level-1) / St_G(level)|`.
    pub layer: usize,
}

impl LayerRow {
    /// `|G / St_G(level)|`.
    pub fn order(&self, p: u32) -> BigUint {
        BigUint::from(p).pow(self.log_order as u32)
    }
}

impl FiniteQuotient {
    pub fn new(datum: &NumericalDatum, n: u32, degree_guard: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::LevelOutOfRange(0));
        }
        let degree = (datum.p() as u64).checked_pow(n).unwrap_or(u64::MAX);
        if degree > degree_guard {
            return Err(Error::DegreeGuard { degree, guard: degree_guard });
        }
        let generators = generator_portraits(datum, n);
        let chain = SubgroupChain::generate(datum.p(), n, &generators);
        Ok(FiniteQuotient { datum: datum.clone(), level: n, generators, chain })
    }

    pub fn with_chain(datum: &NumericalDatum, n: u32, chain: SubgroupChain) -> Self {
        FiniteQuotient { datum: datum.clone(), level: n, generators: generator_portraits(datum, n), chain }
    }

    pub fn datum(&self) -> &NumericalDatum {
        &self.datum
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn p(&self) -> u32 {
        self.datum.p()
    }

    pub fn degree(&self) -> usize {
        level_width(self.datum.p(), self.level)
    }

    pub fn generators(&self) -> &[Portrait] {
        &self.generators
    }

    pub fn generator_permutations(&self) -> Vec<Perm> {
        self.generators.iter().map(|g| g.leaf_permutation()).collect()
    }

    pub fn chain(&self) -> &SubgroupChain {
        &self.chain
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    pub fn log_order(&self) -> usize {
        self.chain.log_order()
    }

    pub fn level_kernel(&self, k: u32) -> Result<SubgroupChain> {
        if k > self.level {
            return Err(Error::LevelOutOfRange(k));
        }
        Ok(self.chain.level_kernel(k))
    }

    pub fn derived(&self) -> SubgroupChain {
        self.chain.derived()
    }

    pub fn gamma3(&self) -> SubgroupChain {
        self.chain.gamma3()
    }

    pub fn second_derived(&self) -> SubgroupChain {
        self.chain.second_derived()
    }

    pub fn normal_closure(&self, elements: &[Portrait]) -> SubgroupChain {
        self.chain.normal_closure_of(elements)
    }

    /// Normal closure in the whole quotient of a subgroup.
    pub fn normal_closure_of_chain(&self, h: &SubgroupChain) -> SubgroupChain {
        self.chain.normal_closure_of(&h.entries())
    }

    /// Image of `St_H(u)` under the section map at `u`.
    pub fn section_image(&self, h: &SubgroupChain, u: &Vertex) -> SubgroupChain {
        h.section_image(u)
    }

    /// For every first level coordinate, whether the section image of the
    /// first level stabilizer of `h` is the whole quotient one level down.
    pub fn joint_image_subdirect(&self, h: &SubgroupChain) -> Result<Vec<bool>> {
        if self.level < 2 {
            return Err(Error::LevelOutOfRange(self.level));
        }
        let below = FiniteQuotient::new(&self.datum, self.level - 1, u64::MAX)?;
        let k1 = h.level_kernel(1);
        Ok(Vertex::level(self.p(), 1)
            .map(|u| {
                let img = k1.section_image(&u);
                img.same_group(below.chain())
            })
            .collect())
    }

    /// Orders of `G/St_G(k)` for `k = 1..=level` by projecting this quotient.
    pub fn layer_table(&self) -> Vec<LayerRow> {
        let mut rows = Vec::new();
        let mut prev = 0usize;
        for k in 1..=self.level {
            let kernel = self.chain.level_kernel(k).log_order();
            let log_order = self.chain.log_order() - kernel;
            rows.push(LayerRow { level: k, log_order, layer: log_order - prev });
            prev = log_order;
        }
        rows
    }

    /// Portrait of a word at this level.
    pub fn image(&self, w: &crate::word::GroupWord) -> Result<Portrait> {
        w.evaluate(&self.datum, self.level)
    }
}

/// `a` followed by every directed generator, truncated to depth `n`.
pub fn generator_portraits(datum: &NumericalDatum, n: u32) -> Vec<Portrait> {
    let mut gens = vec![Portrait::rooted(datum.p(), n, 1)];
    for (j, i) in datum.generator_labels() {
        gens.push(datum.generator_portrait(j, i, n).expect("generator"));
    }
    gens
}
