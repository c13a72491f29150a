//! Numerical data of multi-EGS groups, generator portraits and
//! classification.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fp;
use crate::tree::{level_offset, level_width, Portrait};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefiningVector(pub Vec<u32>);

impl DefiningVector {
    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// 1-based entry `e_k`.
    pub fn e(&self, k: usize) -> u32 {
        self.0[k - 1]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.0.len();
        (0..n).all(|i| self.0[i] == self.0[n - 1 - i])
    }

    /// All entries equal and nonzero, so that a scalar multiple is `(1,…,1)`.
    pub fn is_constant(&self) -> bool {
        match self.0.first() {
            Some(&x) => x != 0 && self.0.iter().all(|&y| y == x),
            None => false,
        }
    }

    pub fn scaled(&self, s: u32, p: u32) -> DefiningVector {
        DefiningVector(self.0.iter().map(|&x| fp::mul(x, s, p)).collect())
    }

    pub fn sum(&self, p: u32) -> u32 {
        self.0.iter().fold(0, |acc, &x| fp::add(acc, x, p))
    }
}

impl fmt::Display for DefiningVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NumericalDatum {
    p: u32,
    /// `families[j - 1]` is the family `E^(j)`.
    families: Vec<Vec<DefiningVector>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CspStatus {
    HasCSP,
    NoCSP,
    OutsideTheoremScope,
}

impl fmt::Display for CspStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CspStatus::HasCSP => "HasCSP",
            CspStatus::NoCSP => "NoCSP",
            CspStatus::OutsideTheoremScope => "OutsideTheoremScope",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub in_g_class: bool,
    pub in_s_class: bool,
    pub in_e_class: bool,
    pub branch_over_derived: bool,
    pub branch_over_gamma3_only: bool,
    pub not_branch: bool,
    pub dim_v: usize,
    pub torsion: bool,
    pub csp: CspStatus,
    /// Which clauses fired, in evaluation order.
    pub reasons: Vec<String>,
}

/// A pair of singleton symmetric families whose vectors, after scaling by
/// `lambda` and `mu`, are complementary 0/1 patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalPair {
    pub j: usize,
    pub k: usize,
    pub lambda: u32,
    pub mu: u32,
}

/// A directed generator `c` of family `family`, written as a product of
/// generators of other families, each conjugated by `a^(i - family)`, modulo
/// the second level stabilizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub family: usize,
    /// Exponents of `c` in the generators of its family.
    pub target: Vec<u32>,
    /// `(family, exponents)` of the factors, in increasing family order.
    pub terms: Vec<(usize, Vec<u32>)>,
}

impl NumericalDatum {
    /// Builds and validates a datum. `families` must have exactly `p` entries.
    pub fn new(p: u32, families: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let datum = NumericalDatum {
            p,
            families: families
                .into_iter()
                .map(|fam| fam.into_iter().map(DefiningVector).collect())
                .collect(),
        };
        let violations = datum.validate();
        if violations.is_empty() {
            Ok(datum)
        } else {
            Err(Error::InvalidDatum(violations.join("; ")))
        }
    }

    /// Convenience constructor from `(family, vectors)` pairs.
    pub fn from_pairs(p: u32, pairs: &[(usize, &[&[u32]])]) -> Result<Self> {
        let mut families = vec![Vec::new(); p as usize];
        for &(j, vecs) in pairs {
            if j == 0 || j > p as usize {
                return Err(Error::InvalidDatum(format!("family index {j} out of range")));
            }
            families[j - 1] = vecs.iter().map(|v| v.to_vec()).collect();
        }
        NumericalDatum::new(p, families)
    }

    /// Every violated invariant, empty when the datum is valid.
    pub fn validate(&self) -> Vec<String> {
        let p = self.p;
        let mut out = Vec::new();
        if p == 2 || !fp::is_prime(p) || p > 251 {
            out.push(format!("p = {p} is not an odd prime below 256"));
            return out;
        }
        if self.families.len() != p as usize {
            out.push(format!("expected {p} families, found {}", self.families.len()));
            return out;
        }
        let mut any = false;
        for (j, fam) in self.families.iter().enumerate() {
            let j = j + 1;
            if fam.len() > p as usize - 1 {
                out.push(format!("family {j} has {} vectors, at most {} allowed", fam.len(), p - 1));
            }
            any |= !fam.is_empty();
            let mut shape_ok = true;
            for (i, v) in fam.iter().enumerate() {
                if v.0.len() != p as usize - 1 {
                    out.push(format!("vector {} of family {j} has length {}, expected {}", i + 1, v.0.len(), p - 1));
                    shape_ok = false;
                } else if v.0.iter().any(|&x| x >= p) {
                    out.push(format!("vector {} of family {j} has entries outside 0..{}", i + 1, p - 1));
                    shape_ok = false;
                }
            }
            if shape_ok && !fam.is_empty() {
                let rows: Vec<Vec<u32>> = fam.iter().map(|v| v.0.clone()).collect();
                if !fp::is_independent(&rows, p) {
                    out.push(format!("family {j} is linearly dependent"));
                }
            }
        }
        if !any {
            out.push("some r_j != 0 required".to_string());
        }
        out
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Family `j` (1-based).
    pub fn family(&self, j: usize) -> &[DefiningVector] {
        &self.families[j - 1]
    }

    pub fn families(&self) -> &[Vec<DefiningVector>] {
        &self.families
    }

    pub fn r_j(&self, j: usize) -> usize {
        self.families[j - 1].len()
    }

    pub fn r(&self) -> usize {
        self.families.iter().map(|f| f.len()).sum()
    }

    pub fn nonempty_families(&self) -> Vec<usize> {
        (1..=self.p as usize).filter(|&j| self.r_j(j) > 0).collect()
    }

    /// `(family, index)` of every directed generator in the fixed order used
    /// by abelianization vectors.
    pub fn generator_labels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 1..=self.p as usize {
            for i in 1..=self.r_j(j) {
                out.push((j, i));
            }
        }
        out
    }

    /// All defining vectors, family by family.
    pub fn joint_family(&self) -> Vec<Vec<u32>> {
        self.families.iter().flatten().map(|v| v.0.clone()).collect()
    }

    pub fn dim_v(&self) -> usize {
        fp::rank(&self.joint_family(), self.p)
    }

    pub fn is_torsion(&self) -> bool {
        self.families.iter().flatten().all(|v| v.sum(self.p) == 0)
    }

    /// Exponent of `a` at coordinate `x` (1-based) of the first level
    /// decomposition of `b_i^(j)`; `None` marks the coordinate carrying the
    /// generator itself.
    pub fn coordinate_exponent(&self, j: usize, i: usize, x: u32) -> Option<u32> {
        let k = (x as usize + j - 1) % self.p as usize;
        if k == 0 {
            None
        } else {
            Some(self.families[j - 1][i - 1].e(k))
        }
    }

    /// Coordinate (1-based) at which directed generators of family `j`
    /// reproduce themselves.
    pub fn directed_coordinate(&self, j: usize) -> u32 {
        self.p - j as u32 + 1
    }

    /// Truncation to depth `depth` of `b_i^(j)`.
    pub fn generator_portrait(&self, j: usize, i: usize, depth: u32) -> Result<Portrait> {
        if j == 0 || j > self.p as usize || i == 0 || i > self.r_j(j) {
            return Err(Error::NoSuchGenerator { family: j, index: i });
        }
        Ok(self.directed_portrait(j, &unit(self.r_j(j), i), depth))
    }

    /// Truncation of the product of family `j` generators with exponents
    /// `exps`.
    pub fn directed_portrait(&self, j: usize, exps: &[u32], depth: u32) -> Portrait {
        let p = self.p;
        let mut f = Portrait::identity(p, depth);
        let c = self.directed_coordinate(j) as usize - 1;
        let mut vec = vec![0u32; p as usize - 1];
        for (v, &s) in self.families[j - 1].iter().zip(exps) {
            for (acc, &x) in vec.iter_mut().zip(&v.0) {
                *acc = fp::add(*acc, fp::mul(x, s, p), p);
            }
        }
        let labels = f.labels_mut();
        // position of the directed path vertex on each level
        let mut pos = 0usize;
        for level in 1..depth {
            let off = level_offset(p, level);
            for x in 0..p as usize {
                if x == c {
                    continue;
                }
                let k = (x + j) % p as usize;
                labels[off + pos * p as usize + x] = vec[k - 1] as u8;
            }
            pos = pos * p as usize + c;
            debug_assert!(pos < level_width(p, level));
        }
        f
    }

    /// Exponent vector of `a` at the non-directed coordinates of a family
    /// product, indexed by `k = 1..p-1`.
    pub fn family_vector(&self, j: usize, exps: &[u32]) -> Vec<u32> {
        let p = self.p;
        let mut vec = vec![0u32; p as usize - 1];
        for (v, &s) in self.families[j - 1].iter().zip(exps) {
            for (acc, &x) in vec.iter_mut().zip(&v.0) {
                *acc = fp::add(*acc, fp::mul(x, s, p), p);
            }
        }
        vec
    }

    pub fn in_g_class(&self) -> bool {
        self.families.iter().all(|f| f.is_empty() || (f.len() == 1 && f[0].is_constant()))
    }

    pub fn in_s_class(&self) -> bool {
        self.families.iter().all(|f| f.len() <= 1 && f.iter().all(|v| v.is_symmetric()))
    }

    pub fn exceptional_pair(&self) -> Option<ExceptionalPair> {
        let p = self.p;
        let nonempty = self.nonempty_families();
        if nonempty.len() != 2 {
            return None;
        }
        let (j, k) = (nonempty[0], nonempty[1]);
        if self.r_j(j) != 1 || self.r_j(k) != 1 {
            return None;
        }
        let e = &self.families[j - 1][0];
        let f = &self.families[k - 1][0];
        if !e.is_symmetric() || !f.is_symmetric() {
            return None;
        }
        if fp::rank(&[e.0.clone(), f.0.clone()], p) != 2 {
            return None;
        }
        for lambda in 1..p {
            let le = e.scaled(lambda, p);
            if le.0.iter().any(|&x| x > 1) {
                continue;
            }
            for mu in 1..p {
                let mf = f.scaled(mu, p);
                if mf.0.iter().zip(&le.0).all(|(&y, &x)| y <= 1 && x != y) {
                    return Some(ExceptionalPair { j, k, lambda, mu });
                }
            }
        }
        None
    }

    pub fn classify(&self) -> Classification {
        let mut reasons = Vec::new();
        let dim_v = self.dim_v();
        let non_symmetric = self.families.iter().flatten().any(|v| !v.is_symmetric());
        let in_g = self.in_g_class();
        let in_s = self.in_s_class();
        let in_e = self.exceptional_pair().is_some();
        let branch_over_derived = non_symmetric || dim_v >= 2;
        if non_symmetric {
            reasons.push("some defining vector is not symmetric".to_string());
        }
        if dim_v >= 2 {
            reasons.push(format!("dim V = {dim_v} >= 2"));
        }
        let not_branch = in_g;
        let branch_over_gamma3_only = !branch_over_derived && !in_g;
        if in_g {
            reasons.push("every nonempty family is one constant vector".to_string());
        } else if branch_over_gamma3_only {
            reasons.push("all vectors symmetric, dim V = 1, some vector not constant".to_string());
        }
        if in_e {
            reasons.push("two complementary 0/1 symmetric vectors after scaling".to_string());
        }
        let joint_independent = dim_v == self.r();
        let csp = if not_branch {
            CspStatus::OutsideTheoremScope
        } else if branch_over_gamma3_only {
            CspStatus::HasCSP
        } else if in_e {
            CspStatus::NoCSP
        } else if joint_independent {
            reasons.push("joint family linearly independent".to_string());
            CspStatus::HasCSP
        } else {
            reasons.push("joint family linearly dependent".to_string());
            CspStatus::NoCSP
        };
        let torsion = self.is_torsion();
        Classification {
            in_g_class: in_g,
            in_s_class: in_s,
            in_e_class: in_e,
            branch_over_derived,
            branch_over_gamma3_only,
            not_branch,
            dim_v,
            torsion,
            csp,
            reasons,
        }
    }

    pub fn dependency(&self) -> Option<Dependency> {
        let p = self.p;
        let labels = self.generator_labels();
        let rows = self.joint_family();
        let ech = fp::echelon(&rows, p);
        let mut comb = ech.null_combinations.into_iter().next()?;
        let first = comb.iter().position(|&x| x != 0)?;
        let family = labels[first].0;
        // normalize: the first nonzero exponent of the target becomes 1
        let s = fp::inv(comb[first], p);
        for x in comb.iter_mut() {
            *x = fp::mul(*x, s, p);
        }
        let mut target = vec![0u32; self.r_j(family)];
        let mut terms: Vec<(usize, Vec<u32>)> = Vec::new();
        for (idx, &(j, i)) in labels.iter().enumerate() {
            if j == family {
                target[i - 1] = comb[idx];
            } else if comb[idx] != 0 {
                if terms.last().map(|t| t.0) != Some(j) {
                    terms.push((j, vec![0; self.r_j(j)]));
                }
                terms.last_mut().unwrap().1[i - 1] = fp::neg(comb[idx], p);
            }
        }
        Some(Dependency { family, target, terms })
    }

    /// Strict text form, see [`NumericalDatum::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("p: {}\n", self.p);
        for (j, fam) in self.families.iter().enumerate() {
            let vecs: Vec<String> = fam
                .iter()
                .map(|v| v.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                .collect();
            if vecs.is_empty() {
                out.push_str(&format!("family {}:\n", j + 1));
            } else {
                out.push_str(&format!("family {}: {}\n", j + 1, vecs.join(" ; ")));
            }
        }
        out
    }

    /// Parses the datum file grammar:
    ///
    /// ```text
    /// # comment
    /// p: 3
    /// family 1: 1,2
    /// family 2:
    /// family 3: 1,1 ; 0,1
    /// ```
    ///
    /// The `p:` line comes first, followed by exactly `p` family lines in
    /// increasing order. Vectors are separated by `;`, entries by `,`.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut p: Option<u32> = None;
        let mut families: Vec<Vec<Vec<u32>>> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| err(line_no, "expected `key: value`".to_string()))?;
            let key = key.trim();
            match p {
                None => {
                    if key != "p" {
                        return Err(err(line_no, "first entry must be `p: <prime>`".to_string()));
                    }
                    let value: u32 = rest
                        .trim()
                        .parse()
                        .map_err(|_| err(line_no, format!("invalid prime `{}`", rest.trim())))?;
                    if value == 2 || !fp::is_prime(value) || value > 251 {
                        return Err(err(line_no, format!("{value} is not an odd prime below 256")));
                    }
                    p = Some(value);
                }
                Some(pv) => {
                    let idx = key
                        .strip_prefix("family")
                        .map(str::trim)
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| err(line_no, format!("expected `family <j>:`, found `{key}`")))?;
                    if idx != families.len() + 1 {
                        return Err(err(line_no, format!("expected family {}, found family {idx}", families.len() + 1)));
                    }
                    if idx > pv as usize {
                        return Err(err(line_no, format!("more than p = {pv} families")));
                    }
                    let mut fam = Vec::new();
                    let rest = rest.trim();
                    if !rest.is_empty() {
                        for part in rest.split(';') {
                            let mut vec = Vec::new();
                            for tok in part.split(',') {
                                let tok = tok.trim();
                                let x: i64 = tok
                                    .parse()
                                    .map_err(|_| err(line_no, format!("invalid entry `{tok}`")))?;
                                if x < 0 || x >= pv as i64 {
                                    return Err(err(line_no, format!("entry {x} is not a residue mod {pv}")));
                                }
                                vec.push(x as u32);
                            }
                            if vec.len() != pv as usize - 1 {
                                return Err(err(
                                    line_no,
                                    format!("vector has {} entries, expected {}", vec.len(), pv - 1),
                                ));
                            }
                            fam.push(vec);
                        }
                    }
                    families.push(fam);
                }
            }
        }
        let p = p.ok_or_else(|| err(last_line.max(1), "missing `p:` line".to_string()))?;
        if families.len() != p as usize {
            return Err(err(last_line.max(1), format!("expected {p} families, found {}", families.len())));
        }
        NumericalDatum::new(p, families)
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        hex::encode(digest)
    }

    /// Compact one-line form, e.g. `p=3 E1={(1,2)} E2={(2,1)}`.
    pub fn short(&self) -> String {
        let mut parts = vec![format!("p={}", self.p)];
        for (j, fam) in self.families.iter().enumerate() {
            if !fam.is_empty() {
                let vs: Vec<String> = fam.iter().map(|v| v.to_string()).collect();
                parts.push(format!("E{}={{{}}}", j + 1, vs.join(",")));
            }
        }
        parts.join(" ")
    }
}

impl fmt::Display for NumericalDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short())
    }
}

fn unit(len: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; len];
    v[i - 1] = 1;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs() -> NumericalDatum {
        NumericalDatum::from_pairs(3, &[(1, &[&[1, 2]])]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(NumericalDatum::from_pairs(3, &[(1, &[&[1, 2], &[2, 1]])]).is_err());
        let v = NumericalDatum { p: 3, families: vec![vec![]; 3] }.validate();
        assert_eq!(v, vec!["some r_j != 0 required".to_string()]);
        assert!(NumericalDatum::from_pairs(3, &[(1, &[&[1, 2, 0]])]).is_err());
        assert!(NumericalDatum::new(4, vec![vec![]; 4]).is_err());
    }

    #[test]
    fn generator_level_one_labels() {
        let b = gs().generator_portrait(1, 1, 2).unwrap();
        assert_eq!(b.labels(), &[0, 1, 2, 0]);
        let d = NumericalDatum::from_pairs(5, &[(2, &[&[1, 0, 0, 1]])]).unwrap();
        let b = d.generator_portrait(2, 1, 2).unwrap();
        assert_eq!(&b.labels()[1..], &[0, 0, 1, 0, 1]);
        assert!(d.generator_portrait(1, 1, 2).is_err());
    }

    #[test]
    fn generator_truncations_agree() {
        let d = NumericalDatum::from_pairs(5, &[(2, &[&[1, 0, 3, 1], &[0, 2, 0, 0]]), (4, &[&[1, 1, 1, 1]])]).unwrap();
        for (j, i) in d.generator_labels() {
            let deep = d.generator_portrait(j, i, 4).unwrap();
            assert_eq!(deep.truncate(3), d.generator_portrait(j, i, 3).unwrap());
            assert_eq!(deep.labels()[0], 0);
        }
    }

    #[test]
    fn predicates() {
        let v = DefiningVector(vec![1, 1]);
        assert!(v.is_symmetric() && v.is_constant());
        assert!(!DefiningVector(vec![1, 2]).is_symmetric());
        let w = DefiningVector(vec![1, 0, 0, 1]);
        assert!(w.is_symmetric() && !w.is_constant());
    }

    #[test]
    fn torsion() {
        assert!(gs().is_torsion());
        assert!(!NumericalDatum::from_pairs(3, &[(1, &[&[1, 1]])]).unwrap().is_torsion());
        let e = NumericalDatum::from_pairs(5, &[(1, &[&[1, 0, 0, 1]]), (2, &[&[0, 1, 1, 0]])]).unwrap();
        assert!(!e.is_torsion());
    }

    #[test]
    fn classification_examples() {
        let c = gs().classify();
        assert!(c.branch_over_derived && c.torsion);
        assert_eq!(c.csp, CspStatus::HasCSP);

        let g = NumericalDatum::from_pairs(3, &[(1, &[&[1, 1]]), (3, &[&[1, 1]])]).unwrap().classify();
        assert!(g.in_g_class && g.not_branch && !g.branch_over_derived);
        assert_eq!(g.csp, CspStatus::OutsideTheoremScope);

        let e = NumericalDatum::from_pairs(5, &[(1, &[&[1, 0, 0, 1]]), (2, &[&[0, 1, 1, 0]])]).unwrap().classify();
        assert!(e.in_e_class && e.branch_over_derived);
        assert_eq!(e.csp, CspStatus::NoCSP);

        // scaled copies of the complementary pattern are still exceptional
        let e2 = NumericalDatum::from_pairs(5, &[(1, &[&[3, 0, 0, 3]]), (4, &[&[0, 2, 2, 0]])]).unwrap();
        assert_eq!(e2.exceptional_pair(), Some(ExceptionalPair { j: 1, k: 4, lambda: 2, mu: 3 }));

        let c3 = NumericalDatum::from_pairs(5, &[(1, &[&[1, 2, 2, 1]])]).unwrap().classify();
        assert!(c3.branch_over_gamma3_only && !c3.not_branch);
        assert_eq!(c3.csp, CspStatus::HasCSP);

        let dep = NumericalDatum::from_pairs(3, &[(1, &[&[1, 2]]), (2, &[&[1, 2]])]).unwrap().classify();
        assert_eq!(dep.csp, CspStatus::NoCSP);

        // p = 3 symmetric vectors are constant
        let s = NumericalDatum::from_pairs(3, &[(1, &[&[2, 2]])]).unwrap().classify();
        assert!(s.in_g_class);
    }

    #[test]
    fn exceptional_needs_p_above_three() {
        for a in 1..3 {
            for b in 1..3 {
                let d = NumericalDatum::from_pairs(3, &[(1, &[&[a, a]]), (2, &[&[b, b]])]).unwrap();
                assert!(!d.classify().in_e_class);
            }
        }
    }

    #[test]
    fn dependencies() {
        let d = NumericalDatum::from_pairs(3, &[(1, &[&[1, 2]]), (2, &[&[1, 2]])]).unwrap();
        let dep = d.dependency().unwrap();
        assert_eq!(dep, Dependency { family: 1, target: vec![1], terms: vec![(2, vec![1])] });
        let d = NumericalDatum::from_pairs(3, &[(1, &[&[1, 2]]), (2, &[&[2, 1]])]).unwrap();
        let dep = d.dependency().unwrap();
        assert_eq!(dep, Dependency { family: 1, target: vec![1], terms: vec![(2, vec![2])] });
        assert!(gs().dependency().is_none());
    }

    #[test]
    fn parse_round_trip() {
        let text = "# GS\np: 3\nfamily 1: 1,2\nfamily 2:\nfamily 3: 1,1 ; 0,1\n";
        let d = NumericalDatum::parse(text).unwrap();
        assert_eq!(d.r(), 3);
        assert_eq!(NumericalDatum::parse(&d.to_text()).unwrap(), d);
        assert_eq!(d.hash().len(), 64);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = NumericalDatum::parse("p: 3\nfamily 1: 1,2\nfamily 3: 1,1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = NumericalDatum::parse("p: 3\nfamily 1: 1,3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = NumericalDatum::parse("family 1: 1,2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(NumericalDatum::parse("p: 3\nfamily 1: 1,2\n").is_err());
    }
}
