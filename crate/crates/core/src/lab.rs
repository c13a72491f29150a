//! Finite-level checks of branch, congruence and normal closure statements.
//!
//! Every check works in a congruence quotient `Q_n = G / St_G(n)`. A
//! containment verified in `Q_n` is a necessary consequence of the
//! corresponding statement about `G`; a non-containment in `Q_n` refutes it.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cache::ChainCache;
use crate::chain::{generator_portraits, FiniteQuotient, SubgroupChain, DEFAULT_DEGREE_GUARD};
use crate::datum::{CspStatus, NumericalDatum};
use crate::error::{Error, Result};
use crate::fp;
use crate::tree::{level_width, Portrait, Vertex};
use crate::word::{BranchElement, GroupWord, Guards};

pub const FINITE_LEVEL_NOTE: &str =
    "containment in a finite quotient is a necessary consequence only; non-containment is a rigorous refutation";

pub const DEFAULT_SEARCH_DEPTH: u32 = 4;
pub const DEFAULT_STAR_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    RefutedByWitness,
    GuardExceeded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "verified",
            Verdict::RefutedByWitness => "refuted",
            Verdict::GuardExceeded => "guard-exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub statement: String,
    pub datum: String,
    pub datum_hash: String,
    pub level: u32,
    pub verdict: Verdict,
    /// What the infinite statement predicts at this level, if anything.
    pub predicted: Option<Verdict>,
    pub certificates: Vec<Certificate>,
    /// Re-checkable element or vertex behind the verdict.
    pub witness: Option<String>,
    pub note: String,
    pub seed: Option<u64>,
}

impl CheckReport {
    fn new(statement: &str, d: &NumericalDatum, level: u32, predicted: Option<Verdict>) -> Self {
        CheckReport {
            statement: statement.to_string(),
            datum: d.short(),
            datum_hash: d.hash(),
            level,
            verdict: Verdict::Verified,
            predicted,
            certificates: Vec::new(),
            witness: None,
            note: FINITE_LEVEL_NOTE.to_string(),
            seed: None,
        }
    }

    fn certify(&mut self, name: impl Into<String>, holds: bool, detail: impl Into<String>) {
        self.certificates.push(Certificate { name: name.into(), holds, detail: detail.into() });
    }

    fn close(mut self) -> Self {
        if self.verdict != Verdict::GuardExceeded {
            self.verdict = if self.certificates.iter().all(|c| c.holds) {
                Verdict::Verified
            } else {
                Verdict::RefutedByWitness
            };
        }
        self
    }

    /// A refutation where verification was predicted.
    pub fn is_failure(&self) -> bool {
        self.verdict == Verdict::RefutedByWitness && self.predicted == Some(Verdict::Verified)
    }

    pub fn matches_prediction(&self) -> bool {
        self.predicted.is_none_or(|p| p == self.verdict)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("statement: {}\n", self.statement));
        out.push_str(&format!("datum: {} [{}]\n", self.datum, &self.datum_hash[..16]));
        out.push_str(&format!("level: {}\n", self.level));
        match self.predicted {
            Some(p) => out.push_str(&format!("verdict: {} (predicted {p})\n", self.verdict)),
            None => out.push_str(&format!("verdict: {}\n", self.verdict)),
        }
        for c in &self.certificates {
            let mark = if c.holds { "ok  " } else { "FAIL" };
            out.push_str(&format!("  {mark} {}: {}\n", c.name, c.detail));
        }
        if let Some(w) = &self.witness {
            out.push_str("witness:\n");
            for line in w.lines() {
                out.push_str(&format!("  {line}\n"));
            }
        }
        out.push_str(&format!("note: {}\n", self.note));
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed: {seed}\n"));
        }
        out
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Subgroups of a congruence quotient that the lab caches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Group,
    Derived,
    Gamma3,
    SecondDerived,
}

impl Part {
    pub fn descriptor(self) -> &'static str {
        match self {
            Part::Group => "group",
            Part::Derived => "derived",
            Part::Gamma3 => "gamma3",
            Part::SecondDerived => "second-derived",
        }
    }
}

type MemoKey = (String, u32, Part);

/// Runs checks, sharing quotient chains between them.
#[derive(Debug)]
pub struct Lab {
    guard: u64,
    cache: Option<ChainCache>,
    memo: Mutex<HashMap<MemoKey, Arc<SubgroupChain>>>,
}

impl Default for Lab {
    fn default() -> Self {
        Lab::new(DEFAULT_DEGREE_GUARD)
    }
}

impl Lab {
    pub fn new(guard: u64) -> Self {
        Lab { guard, cache: None, memo: Mutex::new(HashMap::new()) }
    }

    pub fn with_cache(mut self, cache: ChainCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn guard(&self) -> u64 {
        self.guard
    }

    pub fn part(&self, d: &NumericalDatum, n: u32, part: Part) -> Result<Arc<SubgroupChain>> {
        if n == 0 {
            return Err(Error::LevelOutOfRange(0));
        }
        let degree = (d.p() as u64).checked_pow(n).unwrap_or(u64::MAX);
        if degree > self.guard {
            return Err(Error::DegreeGuard { degree, guard: self.guard });
        }
        let hash = d.hash();
        let key = (hash.clone(), n, part);
        if let Some(c) = self.memo.lock().expect("memo").get(&key) {
            return Ok(c.clone());
        }
        let loaded = match &self.cache {
            Some(cache) => cache.load(&hash, n, part.descriptor())?,
            None => None,
        };
        let chain = match loaded {
            Some(c) => c,
            None => {
                let c = match part {
                    Part::Group => SubgroupChain::generate(d.p(), n, &generator_portraits(d, n)),
                    Part::Derived => self.part(d, n, Part::Group)?.derived(),
                    Part::Gamma3 => self.part(d, n, Part::Group)?.commutator_with(&*self.part(d, n, Part::Derived)?),
                    Part::SecondDerived => self.part(d, n, Part::Derived)?.derived(),
                };
                if let Some(cache) = &self.cache {
                    cache.store(&hash, n, part.descriptor(), &c)?;
                }
                c
            }
        };
        let chain = Arc::new(chain);
        self.memo.lock().expect("memo").insert(key, chain.clone());
        Ok(chain)
    }

    pub fn quotient(&self, d: &NumericalDatum, n: u32) -> Result<FiniteQuotient> {
        Ok(FiniteQuotient::with_chain(d, n, (*self.part(d, n, Part::Group)?).clone()))
    }

    /// `G' x 1 x ... x 1` inside `psi_1(St_G(1)')`.
    pub fn check_branch_over_derived(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        need_level(n, 3)?;
        let cls = d.classify();
        let predicted = if cls.branch_over_derived { Verdict::Verified } else { Verdict::RefutedByWitness };
        let target = self.part(d, n, Part::Group)?.level_kernel(1).derived();
        let below = self.part(d, n - 1, Part::Derived)?;
        let mut report = CheckReport::new("branch-derived", d, n, Some(predicted));
        let missing = first_outside(d, n, &basic_commutators(d, false), &below.entries(), &target)?;
        report.certify(
            "G' x 1 x ... x 1 inside psi(St(1)')",
            missing.is_none(),
            format!("log_p |G'| at level {} = {}, log_p |St(1)'| = {}", n - 1, below.log_order(), target.log_order()),
        );
        report.witness = missing;
        Ok(report.close())
    }

    /// `gamma_3(G) x 1 x ... x 1` inside `psi_1(gamma_3(St_G(1)))`.
    pub fn check_branch_over_gamma3(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        need_level(n, 3)?;
        exclude_constant(d)?;
        let target = self.part(d, n, Part::Group)?.level_kernel(1).gamma3();
        let below = self.part(d, n - 1, Part::Gamma3)?;
        let mut report = CheckReport::new("branch-gamma3", d, n, Some(Verdict::Verified));
        let missing = first_outside(d, n, &basic_commutators(d, true), &below.entries(), &target)?;
        report.certify(
            "gamma3 x 1 x ... x 1 inside psi(gamma3(St(1)))",
            missing.is_none(),
            format!(
                "log_p |gamma3| at level {} = {}, log_p |gamma3(St(1))| = {}",
                n - 1,
                below.log_order(),
                target.log_order()
            ),
        );
        report.witness = missing;
        Ok(report.close())
    }

    /// `St_G(1)'` inside `gamma_3(G)`, with a level search for the
    /// exceptional commutator.
    pub fn check_key(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        need_level(n, 3)?;
        exclude_constant(d)?;
        let pair = d.exceptional_pair();
        let predicted = if pair.is_some() { Verdict::RefutedByWitness } else { Verdict::Verified };
        let st1 = self.part(d, n, Part::Group)?.level_kernel(1).derived();
        let g3 = self.part(d, n, Part::Gamma3)?;
        let mut report = CheckReport::new("key", d, n, Some(predicted));
        let missing = g3.first_missing(&st1);
        report.certify(
            "St(1)' inside gamma3",
            missing.is_none(),
            format!("log_p |St(1)'| = {}, log_p |gamma3| = {}", st1.log_order(), g3.log_order()),
        );
        report.witness = missing.map(|g| g.to_text());
        if let Some(pair) = pair {
            let w = GroupWord::b(d, pair.j, 1, 1)?.commutator(&GroupWord::b(d, pair.k, 1, 1)?);
            let name = format!("[b[{},1],b[{},1]]", pair.j, pair.k);
            let mut found = None;
            for level in 2..=n {
                if !self.part(d, level, Part::Gamma3)?.contains(&w.evaluate(d, level)?) {
                    found = Some(level);
                    break;
                }
            }
            let detail = match found {
                Some(level) => format!("first refuting level {level}"),
                None => format!("no level in 2..={n} separates it from gamma3"),
            };
            report.certify(format!("{name} inside gamma3 at levels 2..={n}"), found.is_none(), detail);
            if let Some(level) = found {
                report.witness = Some(format!("{name} at level {level}"));
            }
        }
        Ok(report.close())
    }

    /// Section images of the first level stabilizer of `G'` (or `gamma_3`)
    /// are full at every first level vertex.
    pub fn check_subdirect(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        need_level(n, 2)?;
        exclude_constant(d)?;
        let cls = d.classify();
        let (part, name) = if cls.branch_over_derived { (Part::Derived, "G'") } else { (Part::Gamma3, "gamma3") };
        let h = self.part(d, n, part)?.level_kernel(1);
        let below = self.part(d, n - 1, Part::Group)?;
        let mut report = CheckReport::new("subdirect", d, n, Some(Verdict::Verified));
        for u in Vertex::level(d.p(), 1) {
            let img = h.section_image(&u);
            let full = img.same_group(&below);
            report.certify(
                format!("{name} projects onto G at {u}"),
                full,
                format!("log_p image = {} of {}", img.log_order(), below.log_order()),
            );
            if !full && report.witness.is_none() {
                report.witness = Some(format!("vertex {u}"));
            }
        }
        Ok(report.close())
    }

    /// `gamma_3(G) x 1 x ... x 1` inside `psi_1(G'')`.
    pub fn check_second_derived(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        need_level(n, 3)?;
        if !d.classify().branch_over_derived {
            return Err(Error::Excluded("the datum is not regular branch over G'".into()));
        }
        let target = self.part(d, n, Part::SecondDerived)?;
        let below = self.part(d, n - 1, Part::Gamma3)?;
        let mut report = CheckReport::new("second-derived", d, n, Some(Verdict::Verified));
        let missing = first_outside(d, n, &basic_commutators(d, true), &below.entries(), &target)?;
        report.certify(
            "gamma3 x 1 x ... x 1 inside psi(G'')",
            missing.is_none(),
            format!("log_p |gamma3| at level {} = {}, log_p |G''| = {}", n - 1, below.log_order(), target.log_order()),
        );
        report.witness = missing;
        Ok(report.close())
    }

    /// Level `k` kernel of `Q_n` inside `G'` or `gamma_3` of `Q_n`.
    pub fn check_kernel_containment(&self, d: &NumericalDatum, n: u32, k: u32, part: Part) -> Result<CheckReport> {
        if k == 0 || k > n {
            return Err(Error::LevelOutOfRange(k));
        }
        let statement = format!("kernel-in-{}", part.descriptor());
        let mut report = CheckReport::new(&statement, d, n, None);
        self.kernel_certificate(&mut report, d, n, k, part)?;
        Ok(report.close())
    }

    fn kernel_certificate(&self, report: &mut CheckReport, d: &NumericalDatum, n: u32, k: u32, part: Part) -> Result<()> {
        let kernel = self.part(d, n, Part::Group)?.level_kernel(k);
        let target = self.part(d, n, part)?;
        let missing = target.first_missing(&kernel);
        report.certify(
            format!("level {k} kernel inside {}", part.descriptor()),
            missing.is_none(),
            format!("log_p kernel = {}, log_p {} = {}", kernel.log_order(), part.descriptor(), target.log_order()),
        );
        report.witness = missing.map(|g| g.to_text());
        Ok(())
    }

    /// A level stabilizer inside `G'` (or `gamma_3`) for data with the
    /// congruence subgroup property.
    pub fn check_csp_positive(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        let cls = d.classify();
        if cls.csp != CspStatus::HasCSP {
            return Err(Error::Excluded(format!("statement does not apply: classified {}", cls.csp)));
        }
        let (k, part) = if cls.branch_over_derived { (d.r() as u32 + 1, Part::Derived) } else { (5, Part::Gamma3) };
        need_level(n, k + 1)?;
        let mut report = CheckReport::new("csp-positive", d, n, Some(Verdict::Verified));
        self.kernel_certificate(&mut report, d, n, k, part)?;
        Ok(report.close())
    }

    /// Elements `t_n` in `St(n)` congruent to a dependent generator modulo
    /// a level stabilizer but not modulo `G'`.
    pub fn csp_witness_dependent(&self, d: &NumericalDatum, n: u32, m: u32) -> Result<CheckReport> {
        let (c, t1, tn) = dependent_elements(d, n)?;
        if m <= n {
            return Err(Error::Precondition(format!("quotient level {m} must exceed {n}")));
        }
        let mut report = CheckReport::new("no-csp", d, m, Some(Verdict::Verified));
        let p = d.p();
        let exact = c.evaluate(d, n)?.invert().mul(&tn.evaluate(d, n)?);
        report.certify("c^-1 t_n trivial to depth n", exact.is_identity(), format!("c = {c}, n = {n}"));

        let derived = self.part(d, m, Part::Derived)?;
        let t1_m = t1.evaluate(d, m)?;
        let tn_m = tn.evaluate(d, m)?;
        let ab_t = t1.abelianization(d);
        let ab_c = c.abelianization(d);
        report.certify(
            "abelianization of t_1 differs from c",
            ab_t != ab_c,
            format!("{ab_t:?} vs {ab_c:?}"),
        );
        report.certify(
            "t_n in t_1 G'",
            derived.contains(&t1_m.invert().mul(&tn_m)),
            format!("t_1 = {t1}, sifted at level {m}"),
        );

        let x = c.evaluate(d, m)?.invert().mul(&tn_m);
        let in_kernel = x.labels()[..crate::tree::level_offset(p, n)].iter().all(|&l| l == 0);
        report.certify("c^-1 t_n in level n kernel", in_kernel, format!("level {m}"));
        let outside = !derived.contains(&x);
        report.certify(
            "c^-1 t_n outside G'",
            outside,
            if outside {
                format!("c^-1 t_n does not sift into G' at level {m}")
            } else {
                format!("c^-1 t_n sifts into G' at level {m}")
            },
        );
        report.witness = Some(format!("t_{n} = {tn}\nc^-1 t_{n} at level {m}:\n{}", x.to_text()));
        Ok(report.close())
    }

    /// The exceptional elements `t_n` in `St(n)` congruent to
    /// `[B_j, B_k]` modulo `gamma_3`.
    pub fn csp_witness_exceptional(&self, d: &NumericalDatum, n: u32, m: u32) -> Result<CheckReport> {
        let (name, c, tn) = exceptional_elements(d, n)?;
        if m <= n {
            return Err(Error::Precondition(format!("quotient level {m} must exceed {n}")));
        }
        let mut report = CheckReport::new("exceptional", d, m, Some(Verdict::Verified));
        let stab = tn.evaluate(d, n)?.is_identity();
        report.certify(format!("t_{n} fixes level {n}"), stab, "exact portrait evaluation");
        let g3 = self.part(d, m, Part::Gamma3)?;
        let tn_m = tn.evaluate(d, m)?;
        report.certify(
            format!("t_{n} in {name} gamma3"),
            g3.contains(&c.evaluate(d, m)?.invert().mul(&tn_m)),
            format!("sifted at level {m}"),
        );
        let kernel = self.part(d, m, Part::Group)?.level_kernel(n);
        let missing = g3.first_missing(&kernel);
        let t_inside = g3.contains(&tn_m);
        report.certify(
            format!("level {n} kernel not inside gamma3"),
            missing.is_some(),
            format!(
                "log_p kernel = {}, log_p gamma3 = {}, t_{n} inside gamma3: {}",
                kernel.log_order(),
                g3.log_order(),
                if t_inside { "yes" } else { "no" }
            ),
        );
        let mut witness = format!("t_{n} = {tn}");
        if let Some(g) = missing {
            witness.push_str(&format!("\nkernel element outside gamma3 at level {m}:\n{}", g.to_text()));
        }
        report.witness = Some(witness);
        Ok(report.close())
    }

    /// Section images of level stabilizers are the whole quotient one level
    /// down.
    pub fn check_fractality(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        need_level(n, 2)?;
        let predicted = if d.in_g_class() { Verdict::RefutedByWitness } else { Verdict::Verified };
        let q = self.part(d, n, Part::Group)?;
        let mut report = CheckReport::new("fractality", d, n, Some(predicted));
        for k in 1..n {
            let kernel = q.level_kernel(k);
            let full = self.part(d, n - k, Part::Group)?;
            let mut defect = None;
            for u in Vertex::level(d.p(), k) {
                let img = kernel.section_image(&u);
                if !img.same_group(&full) {
                    defect = Some((u, full.log_order() - img.log_order()));
                    break;
                }
            }
            let detail = match &defect {
                Some((u, e)) => format!("defect at {u}: index p^{e}"),
                None => format!("all {} vertices full", level_width(d.p(), k)),
            };
            report.certify(format!("depth {k} section images full"), defect.is_none(), detail);
            if let (Some((u, e)), None) = (&defect, &report.witness) {
                report.witness = Some(format!("vertex {u} at depth {k}, index {}", (d.p() as u64).pow(*e as u32)));
            }
        }
        Ok(report.close())
    }

    /// First vertex, in breadth-first order, where the stabilizer of the
    /// normal closure of `x` has full section image.
    pub fn find_full_section_vertex(
        &self,
        d: &NumericalDatum,
        x: &GroupWord,
        depth_bound: u32,
        m: u32,
    ) -> Result<CheckReport> {
        let img = nontrivial_image(d, x, m)?;
        let closure = self.part(d, m, Part::Group)?.normal_closure_of(&[img]);
        let predicted = if d.in_g_class() { None } else { Some(Verdict::Verified) };
        let mut report = CheckReport::new("full-section", d, m, predicted);
        for k in 0..=depth_bound.min(m - 1) {
            let full = self.part(d, m - k, Part::Group)?;
            for u in Vertex::level(d.p(), k) {
                let sec = if k == 0 { closure.clone() } else { closure.section_image(&u) };
                if sec.same_group(&full) {
                    report.certify(format!("section image at {u} is full"), true, format!("x = {x}"));
                    report.witness = Some(format!("vertex {u}"));
                    return Ok(report.close());
                }
            }
        }
        report.certify(
            format!("vertex with full section image within depth {depth_bound}"),
            false,
            "search bound exhausted",
        );
        report.verdict = Verdict::GuardExceeded;
        Ok(report)
    }

    /// Smallest `n` such that the normal closure of `x` in `Q_m` contains
    /// every `gamma_3` block (and, outside the exceptional class, every `G'`
    /// block) at level `n`.
    pub fn check_normal_closure(&self, d: &NumericalDatum, x: &GroupWord, m: u32) -> Result<CheckReport> {
        let cls = d.classify();
        if !cls.branch_over_derived {
            return Err(Error::Excluded("the datum is not regular branch over G'".into()));
        }
        let img = nontrivial_image(d, x, m)?;
        let closure = self.part(d, m, Part::Group)?.normal_closure_of(&[img]);
        let mut report = CheckReport::new("normal-closure", d, m, Some(Verdict::Verified));
        let mut parts = vec![(Part::Gamma3, "gamma3")];
        if !cls.in_e_class {
            parts.push((Part::Derived, "G'"));
        }
        let mut exhausted = false;
        for (part, name) in parts {
            let mut found = None;
            for n in 1..m {
                let blocks = self.part(d, m - n, part)?;
                if blocks.is_trivial() {
                    continue;
                }
                if blocks_inside(&closure, &blocks, n) {
                    found = Some(n);
                    break;
                }
            }
            match found {
                Some(n) => report.certify(
                    format!("{name} blocks at level {n} inside the normal closure of {x}"),
                    true,
                    format!("log_p closure = {}", closure.log_order()),
                ),
                None => {
                    report.certify(format!("{name} blocks inside the normal closure of {x}"), false, "no level found");
                    exhausted = true;
                }
            }
        }
        let mut report = report.close();
        if exhausted {
            report.verdict = Verdict::GuardExceeded;
        }
        Ok(report)
    }

    /// `St_G(n)'` inside `K_n`: sections at level `n` of `St(n)'` lie in `G'`.
    pub fn check_weak_csp(&self, d: &NumericalDatum, n: u32) -> Result<CheckReport> {
        if n == 0 {
            return Err(Error::LevelOutOfRange(0));
        }
        exclude_constant(d)?;
        let m = n + 2;
        let st = self.part(d, m, Part::Group)?.level_kernel(n).derived();
        let below = self.part(d, m - n, Part::Derived)?;
        let mut report = CheckReport::new("weak-csp", d, m, Some(Verdict::Verified));
        let mut missing = None;
        'outer: for h in st.entries() {
            for pos in 0..level_width(d.p(), n) {
                if !below.contains(&h.section_unchecked(n, pos)) {
                    missing = Some(h.to_text());
                    break 'outer;
                }
            }
        }
        report.certify(
            format!("St({n})' inside K_{n}"),
            missing.is_none(),
            format!("log_p |St({n})'| = {}", st.log_order()),
        );
        report.witness = missing;
        Ok(report.close())
    }

    /// Structure of the subgroup `K` generated by `b^(j) a^-1` for constant
    /// defining vectors.
    pub fn constant_vector_analysis(&self, d: &NumericalDatum, n: u32, seed: u64, samples: usize) -> Result<CheckReport> {
        let fams = d.nonempty_families();
        if !d.in_g_class() || fams.len() < 2 {
            return Err(Error::Excluded("needs at least two families of constant vectors".into()));
        }
        need_level(n, 2)?;
        let p = d.p();
        let a = Portrait::rooted(p, n, 1);
        let a_inv = a.invert();
        let normalized = |depth: u32| -> Result<Vec<Portrait>> {
            fams.iter()
                .map(|&j| {
                    let s = fp::inv(d.family(j)[0].e(1), p) as u64;
                    Ok(d.generator_portrait(j, 1, depth)?.pow(s))
                })
                .collect()
        };
        let bs = normalized(n)?;
        let g = self.part(d, n, Part::Group)?;
        let k_gens: Vec<Portrait> = bs.iter().map(|b| b.mul(&a_inv)).collect();
        let k = g.normal_closure_of(&k_gens);
        let mut report = CheckReport::new("constant-vector", d, n, Some(Verdict::Verified));
        report.seed = Some(seed);

        let index = g.log_order() - k.log_order();
        report.certify("K has index p", index == 1, format!("log_p |Q : K| = {index}"));
        let derived = self.part(d, n, Part::Derived)?;
        report.certify("G' inside K", k.contains_chain(&derived), format!("log_p |G'| = {}", derived.log_order()));
        let diffs_inside = bs.windows(2).all(|w| k.contains(&w[0].mul(&w[1].invert())));
        report.certify("b^(j) (b^(k))^-1 inside K", diffs_inside, "consecutive families");

        let kd = k.derived();
        let bs_below = normalized(n - 1)?;
        let a_below = Portrait::rooted(p, n - 1, 1);
        let ys: Vec<Vec<Portrait>> = bs_below
            .iter()
            .map(|b| {
                let y0 = b.mul(&a_below.invert());
                (0..p as u64).map(|i| y0.conj(&a_below.pow(i))).collect()
            })
            .collect();
        let mut bad = None;
        let mut count = 0usize;
        'outer: for yj in &ys {
            for yk in &ys {
                for yi in yj {
                    for yl in yk {
                        count += 1;
                        let e = in_first_coordinate(p, &yi.commutator(yl));
                        if !kd.contains(&e) {
                            bad = Some(e.to_text());
                            break 'outer;
                        }
                    }
                }
            }
        }
        report.certify("([y, y'], 1, ..., 1) inside K'", bad.is_none(), format!("{count} elements sifted"));
        report.witness = bad;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (&j, b) in fams.iter().zip(&bs) {
            let kj = SubgroupChain::normal_closure(p, n, &[b.mul(&a_inv)], &[a.clone(), b.clone()]);
            let kjd = kj.derived();
            let table = kj.entries();
            let mut ok = true;
            let mut picks = vec![b.mul(&a_inv)];
            for _ in 0..samples {
                let mut x = Portrait::identity(p, n);
                for t in &table {
                    x = x.mul(&t.pow(rng.gen_range(0..p) as u64));
                }
                picks.push(x);
            }
            for x in &picks {
                let mut prod = Portrait::identity(p, n);
                for i in 0..p as u64 {
                    prod = prod.mul(&x.conj(&a.pow(i)));
                }
                if !kjd.contains(&prod) {
                    ok = false;
                    if report.witness.is_none() {
                        report.witness = Some(x.to_text());
                    }
                }
            }
            report.certify(
                format!("star products inside K_{j}'"),
                ok,
                format!("{} elements of K_{j} (b^({j}) a^-1 and {samples} samples)", picks.len()),
            );
            if n == 2 {
                let inter = kd.elements().iter().filter(|x| kj.contains(x)).count();
                let kjd_size = kjd.elements().len();
                report.certify(
                    format!("K' meet K_{j} equals K_{j}'"),
                    inter == kjd_size && kd.contains_chain(&kjd),
                    format!("enumerated at level 2: {inter} vs {kjd_size} elements"),
                );
            } else {
                report.certify(
                    format!("K_{j}' inside K' meet K_{j}"),
                    kd.contains_chain(&kjd) && kj.contains_chain(&kjd),
                    "inclusion only; equality is enumerated at level 2 only",
                );
            }
        }
        Ok(report.close())
    }
}

/// The dependent generator `c`, `t_1` and `t_n` for a datum with a linearly
/// dependent joint family.
pub fn dependent_elements(d: &NumericalDatum, n: u32) -> Result<(GroupWord, GroupWord, BranchElement)> {
    let dep = d
        .dependency()
        .ok_or_else(|| Error::Precondition("the joint family is linearly independent".into()))?;
    if n == 0 {
        return Err(Error::LevelOutOfRange(0));
    }
    let p = d.p();
    let j = dep.family;
    let c = GroupWord::family(d, j, &dep.target)?;
    let mut t1 = GroupWord::identity(p);
    for (i, exps) in &dep.terms {
        t1 = t1.mul(&GroupWord::family(d, *i, exps)?);
    }
    let vec = d.family_vector(j, &dep.target);
    let directed = d.directed_coordinate(j);
    let mut t = BranchElement::leaf(t1.clone());
    for _ in 1..n {
        let children = (1..=p)
            .map(|x| {
                if x == directed {
                    t.clone()
                } else {
                    let k = (x as usize - 1 + j) % p as usize;
                    BranchElement::leaf(GroupWord::a(p, vec[k - 1] as i64))
                }
            })
            .collect();
        t = BranchElement::from_children(0, children);
    }
    Ok((c, t1, t))
}

/// `[B_j, B_k]` and `t_n` for an exceptional datum, with `B_j`, `B_k` the
/// scaled generators whose vectors are complementary 0/1 patterns.
pub fn exceptional_elements(d: &NumericalDatum, n: u32) -> Result<(String, GroupWord, BranchElement)> {
    let p = d.p();
    if p == 3 {
        return Err(Error::Excluded("the exceptional class is empty for p = 3".into()));
    }
    let pair = d.exceptional_pair().ok_or_else(|| Error::Excluded("the datum is not exceptional".into()))?;
    if n == 0 {
        return Err(Error::LevelOutOfRange(0));
    }
    let bj = GroupWord::family(d, pair.j, &[pair.lambda])?;
    let bk = GroupWord::family(d, pair.k, &[pair.mu])?;
    let shift = GroupWord::a(p, pair.j as i64 - pair.k as i64);
    let w = bj.conj(&shift).commutator(&bk);
    let mut t = BranchElement::leaf(w);
    for _ in 2..n {
        t = BranchElement::at_coordinate(p, d.directed_coordinate(pair.k), t);
    }
    Ok((format!("[{bj},{bk}]"), bj.commutator(&bk), t))
}

fn need_level(n: u32, min: u32) -> Result<()> {
    if n < min {
        return Err(Error::Precondition(format!("level {n} is below {min} for this statement")));
    }
    Ok(())
}

fn exclude_constant(d: &NumericalDatum) -> Result<()> {
    if d.in_g_class() {
        return Err(Error::Excluded("every nonempty family is one constant vector".into()));
    }
    Ok(())
}

fn nontrivial_image(d: &NumericalDatum, x: &GroupWord, m: u32) -> Result<Portrait> {
    if let Ok(true) = x.is_trivial(d, Guards::default()) {
        return Err(Error::Precondition(format!("{x} is trivial")));
    }
    let img = x.evaluate(d, m)?;
    if img.is_identity() {
        return Err(Error::Precondition(format!("{x} acts trivially at level {m}")));
    }
    Ok(img)
}

/// `[a, b]` for every generator `b` and `[b, b']` for generator pairs;
/// with `triple`, the commutators `[a, b, a]` and `[a, b, b]` instead. Each
/// comes with its name in the word grammar.
fn basic_commutators(d: &NumericalDatum, triple: bool) -> Vec<(String, GroupWord)> {
    let p = d.p();
    let a = GroupWord::a(p, 1);
    let bs: Vec<GroupWord> =
        d.generator_labels().iter().map(|&(j, i)| GroupWord::b(d, j, i, 1).expect("generator")).collect();
    let mut out = Vec::new();
    for (x, b) in bs.iter().enumerate() {
        let ab = a.commutator(b);
        if triple {
            out.push((format!("[a,{b},a]"), ab.commutator(&a)));
            out.push((format!("[a,{b},{b}]"), ab.commutator(b)));
        } else {
            out.push((format!("[a,{b}]"), ab));
            for c in &bs[x + 1..] {
                out.push((format!("[{b},{c}]"), b.commutator(c)));
            }
        }
    }
    out
}

fn in_first_coordinate(p: u32, g: &Portrait) -> Portrait {
    let mut children = vec![Portrait::identity(p, g.depth()); p as usize];
    children[0] = g.clone();
    Portrait::from_children(p, 0, &children).expect("children")
}

/// First element `psi_1^-1((g, 1, ..., 1))`, with `g` from `named` (at level
/// `n - 1`) then `table`, that lies outside `target`.
fn first_outside(
    d: &NumericalDatum,
    n: u32,
    named: &[(String, GroupWord)],
    table: &[Portrait],
    target: &SubgroupChain,
) -> Result<Option<String>> {
    let p = d.p();
    for (name, w) in named {
        let g = w.evaluate(d, n - 1)?;
        if !target.contains(&in_first_coordinate(p, &g)) {
            return Ok(Some(format!("psi({name}{})", ", 1".repeat(p as usize - 1))));
        }
    }
    for g in table {
        let x = in_first_coordinate(p, g);
        if !target.contains(&x) {
            return Ok(Some(x.to_text()));
        }
    }
    Ok(None)
}

/// Whether every table element of `blocks`, placed at every vertex of level
/// `n`, lies in `closure`.
fn blocks_inside(closure: &SubgroupChain, blocks: &SubgroupChain, n: u32) -> bool {
    let p = closure.p();
    let depth = closure.depth();
    blocks.entries().iter().all(|g| {
        (0..level_width(p, n)).all(|pos| {
            let mut f = Portrait::identity(p, depth);
            f.set_subtree(n, pos, g);
            closure.contains(&f)
        })
    })
}
