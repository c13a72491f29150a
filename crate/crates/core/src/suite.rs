//! The reproducible check matrix and its criterion summary.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::ChainCache;
use crate::chain::DEFAULT_DEGREE_GUARD;
use crate::datum::NumericalDatum;
use crate::error::Result;
use crate::lab::{exceptional_elements, CheckReport, Lab, Part, Verdict};
use crate::word::{sample_word, GroupWord, Guards, OrderResult};

pub const DEFAULT_SEED: u64 = 20240601;

/// Depth of the permutation order oracle for p = 3 words.
pub const ORACLE_DEPTH: u32 = 13;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub guard: u64,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: DEFAULT_SEED, guard: DEFAULT_DEGREE_GUARD, cache_dir: None }
    }
}

/// Named data used by the suite.
pub fn suite_data() -> Vec<(&'static str, NumericalDatum)> {
    let d = |p: u32, pairs: &[(usize, &[&[u32]])]| NumericalDatum::from_pairs(p, pairs).expect("suite datum");
    vec![
        ("p3-12", d(3, &[(1, &[&[1, 2]])])),
        ("p3-21", d(3, &[(1, &[&[2, 1]])])),
        ("p3-10", d(3, &[(1, &[&[1, 0]])])),
        ("p3-01", d(3, &[(1, &[&[0, 1]])])),
        ("p3-20", d(3, &[(1, &[&[2, 0]])])),
        ("p3-02", d(3, &[(1, &[&[0, 2]])])),
        ("p3-11", d(3, &[(1, &[&[1, 1]])])),
        ("p3-22", d(3, &[(1, &[&[2, 2]])])),
        ("p3-const-pair", d(3, &[(1, &[&[1, 1]]), (2, &[&[1, 1]])])),
        ("p3-dependent", d(3, &[(1, &[&[1, 2]]), (2, &[&[1, 2]])])),
        ("p3-torsion-pair", d(3, &[(1, &[&[1, 2]]), (2, &[&[2, 1]])])),
        ("p3-independent-pair", d(3, &[(1, &[&[1, 0]]), (2, &[&[0, 1]])])),
        ("p3-multi", d(3, &[(1, &[&[1, 2], &[1, 0]])])),
        ("p3-mixed", d(3, &[(1, &[&[1, 2]]), (3, &[&[1, 0]])])),
        ("p5-exceptional", d(5, &[(1, &[&[1, 0, 0, 1]]), (2, &[&[0, 1, 1, 0]])])),
        ("p5-symmetric", d(5, &[(1, &[&[1, 2, 2, 1]])])),
        ("p5-1234", d(5, &[(1, &[&[1, 2, 3, 4]])])),
    ]
}

pub fn suite_datum(name: &str) -> Option<NumericalDatum> {
    suite_data().into_iter().find(|(n, _)| *n == name).map(|(_, d)| d)
}

#[derive(Debug, Clone)]
enum Job {
    BranchDerived(u32),
    BranchGamma3(u32),
    Key(u32),
    Subdirect(u32),
    SecondDerived(u32),
    CspPositive(u32),
    KernelGamma3(u32, u32),
    NoCsp(u32, u32),
    Exceptional(u32, u32),
    Fractality(u32),
    FullSection(&'static str, u32, u32),
    NormalClosure(&'static str, u32),
    WeakCsp(u32),
    ConstantVector(u32),
}

fn run_job(lab: &Lab, d: &NumericalDatum, job: &Job, seed: u64) -> Result<CheckReport> {
    match *job {
        Job::BranchDerived(n) => lab.check_branch_over_derived(d, n),
        Job::BranchGamma3(n) => lab.check_branch_over_gamma3(d, n),
        Job::Key(n) => lab.check_key(d, n),
        Job::Subdirect(n) => lab.check_subdirect(d, n),
        Job::SecondDerived(n) => lab.check_second_derived(d, n),
        Job::CspPositive(n) => lab.check_csp_positive(d, n),
        Job::KernelGamma3(n, k) => lab.check_kernel_containment(d, n, k, Part::Gamma3),
        Job::NoCsp(n, m) => lab.csp_witness_dependent(d, n, m),
        Job::Exceptional(n, m) => lab.csp_witness_exceptional(d, n, m),
        Job::Fractality(n) => lab.check_fractality(d, n),
        Job::FullSection(x, depth, m) => lab.find_full_section_vertex(d, &GroupWord::parse(x, d)?, depth, m),
        Job::NormalClosure(x, m) => lab.check_normal_closure(d, &GroupWord::parse(x, d)?, m),
        Job::WeakCsp(n) => lab.check_weak_csp(d, n),
        Job::ConstantVector(n) => lab.constant_vector_analysis(d, n, seed, crate::lab::DEFAULT_STAR_SAMPLES),
    }
}

/// Default levels: branch checks at 3, key at 4 for p = 3, CSP-positive at
/// `r + 2`, fractality at 3.
fn jobs() -> Vec<(&'static str, Job)> {
    let mut out = Vec::new();
    for (name, d) in suite_data() {
        let cls = d.classify();
        let small = d.p() == 3;
        out.push((name, Job::BranchDerived(3)));
        out.push((name, Job::Fractality(3)));
        if cls.not_branch {
            continue;
        }
        out.push((name, Job::BranchGamma3(if small { 4 } else { 3 })));
        out.push((name, Job::Key(if small || cls.in_e_class { 4 } else { 3 })));
        out.push((name, Job::Subdirect(3)));
        if cls.branch_over_derived {
            out.push((name, Job::SecondDerived(3)));
        }
        if cls.csp == crate::datum::CspStatus::HasCSP && cls.branch_over_derived {
            out.push((name, Job::CspPositive(d.r() as u32 + 2)));
        }
        if small {
            out.push((name, Job::WeakCsp(1)));
            out.push((name, Job::WeakCsp(2)));
        }
        if d.dependency().is_some() {
            out.push((name, Job::NoCsp(3, 5)));
        }
    }
    out.push(("p3-22", Job::KernelGamma3(6, 5)));
    out.push(("p3-12", Job::CspPositive(4)));
    out.push(("p3-const-pair", Job::Fractality(4)));
    out.push(("p3-const-pair", Job::ConstantVector(2)));
    out.push(("p3-const-pair", Job::ConstantVector(3)));
    out.push(("p5-exceptional", Job::Exceptional(2, 4)));
    out.push(("p3-12", Job::FullSection("a", 4, 6)));
    out.push(("p3-independent-pair", Job::FullSection("b[1,1]", 4, 6)));
    out.push(("p3-12", Job::NormalClosure("a", 5)));
    out.push(("p5-exceptional", Job::NormalClosure("[a,b[1,1]]", 4)));
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobOutcome {
    pub datum_name: String,
    pub report: std::result::Result<CheckReport, String>,
}

impl JobOutcome {
    fn sort_key(&self) -> (String, String, u32, String) {
        match &self.report {
            Ok(r) => (r.statement.clone(), self.datum_name.clone(), r.level, r.to_text()),
            Err(e) => ("error".into(), self.datum_name.clone(), 0, e.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionLine {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub outcomes: Vec<JobOutcome>,
    pub criteria: Vec<CriterionLine>,
}

impl SuiteReport {
    /// Checks refuted where verification was predicted, and errors.
    pub fn failed_checks(&self) -> Vec<&JobOutcome> {
        self.outcomes.iter().filter(|o| o.report.as_ref().map_or(true, |r| r.is_failure())).collect()
    }

    pub fn failed_criteria(&self) -> Vec<&CriterionLine> {
        self.criteria.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite seed {}\n\n", self.seed);
        for o in &self.outcomes {
            match &o.report {
                Ok(r) => {
                    out.push_str(&format!("[{}]\n", o.datum_name));
                    out.push_str(&r.to_text());
                }
                Err(e) => out.push_str(&format!("[{}]\nerror: {e}\n", o.datum_name)),
            }
            out.push('\n');
        }
        out.push_str("criteria\n");
        for c in &self.criteria {
            out.push_str(&format!("  {} {}: {} ({})\n", if c.pass { "PASS" } else { "FAIL" }, c.id, c.title, c.detail));
        }
        let failed: Vec<String> = self.failed_checks().iter().map(|o| o.datum_name.clone()).collect();
        out.push_str(&format!("failed checks: {}\n", if failed.is_empty() { "none".into() } else { failed.join(", ") }));
        out
    }
}

pub fn run(config: &SuiteConfig) -> Result<SuiteReport> {
    let mut lab = Lab::new(config.guard);
    if let Some(dir) = &config.cache_dir {
        lab = lab.with_cache(ChainCache::new(dir)?);
    }
    let data = suite_data();
    let find = |name: &str| data.iter().find(|(n, _)| *n == name).map(|(_, d)| d).expect("suite datum");
    let mut outcomes: Vec<JobOutcome> = jobs()
        .par_iter()
        .map(|(name, job)| JobOutcome {
            datum_name: name.to_string(),
            report: run_job(&lab, find(name), job, config.seed).map_err(|e| e.to_string()),
        })
        .collect();
    outcomes.sort_by_key(|o| o.sort_key());
    let criteria = criteria(&lab, config.seed)?;
    Ok(SuiteReport { seed: config.seed, outcomes, criteria })
}

fn criteria(lab: &Lab, seed: u64) -> Result<Vec<CriterionLine>> {
    let data = suite_data();
    let get = |name: &str| data.iter().find(|(n, _)| *n == name).map(|(_, d)| d.clone()).expect("suite datum");
    let mut out = Vec::new();
    let mut line = |id: u32, title: &str, pass: bool, detail: String| {
        out.push(CriterionLine { id, title: title.to_string(), pass, detail })
    };

    // 1
    let g2 = get("p3-const-pair");
    let q1 = lab.part(&g2, 1, Part::Group)?.log_order();
    let q2 = lab.part(&g2, 2, Part::Group)?.log_order();
    let q4 = lab.part(&g2, 4, Part::Group)?;
    let index = q4.log_order() - q4.level_kernel(1).derived().log_order();
    line(
        1,
        "quotient orders",
        q1 == 1 && q2 == 4 && index == 7,
        format!("log_3 |Q_1| = {q1}, log_3 |Q_2| = {q2}, log_3 |Q_4 : St(1)'| = {index}"),
    );

    // 2
    let mut bad = Vec::new();
    for (name, d) in &data {
        let q = lab.part(d, 3, Part::Group)?;
        let ab = q.log_order() - lab.part(d, 3, Part::Derived)?.log_order();
        if ab != 1 + d.r() {
            bad.push(format!("{name}: p^{ab} instead of p^{}", 1 + d.r()));
        }
    }
    line(2, "abelianization of Q_3", bad.is_empty(), if bad.is_empty() { "all data".into() } else { bad.join("; ") });

    // 3
    let mut disagree = Vec::new();
    for v in [[1, 0], [2, 0], [0, 1], [0, 2], [1, 1], [1, 2], [2, 1], [2, 2]] {
        let d = NumericalDatum::from_pairs(3, &[(1, &[&v])])?;
        let r = lab.check_branch_over_derived(&d, 3)?;
        if (r.verdict == Verdict::Verified) != d.classify().branch_over_derived {
            disagree.push(format!("{v:?}"));
        }
    }
    line(3, "classification sweep", disagree.is_empty(), format!("disagreements: {}", disagree.len()));

    // 4
    let gs = get("p3-12");
    let s22 = get("p3-22");
    let a = lab.check_kernel_containment(&gs, 4, 2, Part::Derived)?.verdict == Verdict::Verified;
    let b = lab.check_kernel_containment(&s22, 6, 5, Part::Gamma3)?.verdict == Verdict::Verified;
    line(4, "level stabilizers in G' and gamma3", a && b, format!("(1,2) level 4: {a}, (2,2) level 6: {b}"));

    // 5
    let dep = lab.csp_witness_dependent(&get("p3-dependent"), 3, 5)?;
    let failed: Vec<&str> = dep.certificates.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect();
    let e5 = get("p5-exceptional");
    let (_, _, t2) = exceptional_elements(&e5, 2)?;
    let exact = t2.evaluate(&e5, 2)?.is_identity();
    let outside = !lab.part(&e5, 4, Part::Gamma3)?.contains(&t2.evaluate(&e5, 4)?);
    let key = lab.check_key(&e5, 4)?;
    let level_found = key.certificates.iter().any(|c| c.name.starts_with("[b") && !c.holds);
    line(
        5,
        "congruence negative witnesses",
        failed.is_empty() && exact && outside == level_found,
        format!(
            "dependent: failed certificates {failed:?}; exceptional: t_2 in St(2) {exact}, outside gamma3(Q_4) {outside}, refuting level found {level_found}"
        ),
    );

    // 6
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let mut total = 0;
    for name in ["p3-12", "p3-torsion-pair"] {
        let d = get(name);
        for k in 0..100 {
            let w = sample_word(&d, &mut rng, 1 + k % 6);
            total += 1;
            let rec = w.order(&d, 3u64.pow(12), Guards::default());
            if stable_permutation_order(&d, &w, ORACLE_DEPTH)?.map(OrderResult::Order) != Some(rec) {
                mismatches += 1;
            }
        }
    }
    let ab = GroupWord::parse("a b[1,1]", &g2)?.order(&g2, 3u64.pow(6), Guards::default());
    line(
        6,
        "torsion orders",
        mismatches == 0 && ab == OrderResult::ExceedsCap,
        format!("{mismatches} of {total} mismatched; constant pair order(a b) = {ab:?}"),
    );

    // 7
    let mut verified = 0;
    let mut considered = 0;
    for (_, d) in data.iter().filter(|(_, d)| d.p() == 3 && !d.in_g_class()) {
        considered += 1;
        if lab.check_fractality(d, 3)?.verdict == Verdict::Verified {
            verified += 1;
        }
    }
    let g = lab.check_fractality(&g2, 3)?;
    let refuted = g.verdict == Verdict::RefutedByWitness
        && g.certificates.iter().any(|c| c.name.starts_with("depth 2") && !c.holds && c.detail.contains("p^1"));
    line(
        7,
        "fractality",
        verified == considered && considered >= 10 && refuted,
        format!("{verified} of {considered} verified; constant pair refuted at depth 2 with index 3: {refuted}"),
    );

    // 8
    let cv = lab.constant_vector_analysis(&g2, 3, seed, 20)?;
    let index = cv.certificates.iter().any(|c| c.name == "K has index p" && c.holds);
    let star = cv.certificates.iter().filter(|c| c.name.starts_with("star")).all(|c| c.holds);
    line(8, "constant vector structure", index && star, format!("index p: {index}, star products: {star}"));

    Ok(out)
}

/// Order of the leaf permutation of `w` at depth `max_depth`, provided it
/// agrees over the last four depths.
pub fn stable_permutation_order(d: &NumericalDatum, w: &GroupWord, max_depth: u32) -> Result<Option<u64>> {
    let full = w.evaluate(d, max_depth)?;
    let orders: Vec<u64> = (max_depth.saturating_sub(3).max(1)..=max_depth)
        .map(|depth| full.truncate(depth).leaf_permutation().order())
        .collect();
    let last = *orders.last().expect("nonempty");
    Ok(if orders.len() == 4 && orders.iter().all(|&o| o == last) { Some(last) } else { None })
}
