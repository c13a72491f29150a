//! Words in the generators `a` and `b_i^(j)`, their reduced form in the free
//! product of `<a>` with the elementary abelian families, first level
//! rewriting, the word problem and element orders.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::datum::NumericalDatum;
use crate::error::{Error, Result};
use crate::fp;
use crate::tree::Portrait;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Syllable {
    /// `a^k`.
    A(u32),
    /// `∏_i (b_i^(family))^(exps[i])`.
    B { family: usize, exps: Vec<u32> },
}

impl Syllable {
    fn is_zero(&self) -> bool {
        match self {
            Syllable::A(k) => *k == 0,
            Syllable::B { exps, .. } => exps.iter().all(|&x| x == 0),
        }
    }

    fn mergeable(&self, other: &Syllable) -> bool {
        match (self, other) {
            (Syllable::A(_), Syllable::A(_)) => true,
            (Syllable::B { family: f, .. }, Syllable::B { family: g, .. }) => f == g,
            _ => false,
        }
    }

    fn merge(&self, other: &Syllable, p: u32) -> Syllable {
        match (self, other) {
            (Syllable::A(x), Syllable::A(y)) => Syllable::A(fp::add(*x, *y, p)),
            (Syllable::B { family, exps: x }, Syllable::B { exps: y, .. }) => Syllable::B {
                family: *family,
                exps: x.iter().zip(y).map(|(&u, &v)| fp::add(u, v, p)).collect(),
            },
            _ => unreachable!("merge of unlike syllables"),
        }
    }

    fn inverse(&self, p: u32) -> Syllable {
        match self {
            Syllable::A(k) => Syllable::A(fp::neg(*k, p)),
            Syllable::B { family, exps } => Syllable::B {
                family: *family,
                exps: exps.iter().map(|&x| fp::neg(x, p)).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupWord {
    p: u32,
    syllables: Vec<Syllable>,
}

/// Bounds on recursive rewriting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guards {
    pub depth: u32,
    pub syllables: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards { depth: 30, syllables: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ThisError, Serialize, Deserialize)]
#[error("recursion guard exceeded")]
pub struct GuardExceeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderResult {
    /// The exact order, a power of p.
    Order(u64),
    ExceedsCap,
    GuardExceeded,
}

impl GroupWord {
    pub fn identity(p: u32) -> Self {
        GroupWord { p, syllables: Vec::new() }
    }

    pub fn a(p: u32, k: i64) -> Self {
        GroupWord::from_syllables(p, vec![Syllable::A(fp::reduce(k, p))])
    }

    /// `(b_i^(j))^k`.
    pub fn b(datum: &NumericalDatum, j: usize, i: usize, k: i64) -> Result<Self> {
        if j == 0 || j > datum.p() as usize || i == 0 || i > datum.r_j(j) {
            return Err(Error::NoSuchGenerator { family: j, index: i });
        }
        let mut exps = vec![0; datum.r_j(j)];
        exps[i - 1] = fp::reduce(k, datum.p());
        Ok(GroupWord::from_syllables(datum.p(), vec![Syllable::B { family: j, exps }]))
    }

    /// A family syllable with the given exponent vector.
    pub fn family(datum: &NumericalDatum, j: usize, exps: &[u32]) -> Result<Self> {
        if j == 0 || j > datum.p() as usize || exps.len() != datum.r_j(j) || datum.r_j(j) == 0 {
            return Err(Error::NoSuchGenerator { family: j, index: exps.len() });
        }
        let p = datum.p();
        let exps = exps.iter().map(|&x| x % p).collect();
        Ok(GroupWord::from_syllables(p, vec![Syllable::B { family: j, exps }]))
    }

    pub fn from_syllables(p: u32, syllables: Vec<Syllable>) -> Self {
        GroupWord { p, syllables }.reduce()
    }

    /// Keeps the syllables exactly as given, without reduction.
    pub fn raw(p: u32, syllables: Vec<Syllable>) -> Self {
        GroupWord { p, syllables }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Reduced form in the free product.
    pub fn reduce(&self) -> GroupWord {
        let mut out: Vec<Syllable> = Vec::with_capacity(self.syllables.len());
        for s in &self.syllables {
            if s.is_zero() {
                continue;
            }
            match out.last() {
                Some(top) if top.mergeable(s) => {
                    let merged = top.merge(s, self.p);
                    out.pop();
                    if !merged.is_zero() {
                        out.push(merged);
                    }
                }
                _ => out.push(s.clone()),
            }
        }
        GroupWord { p: self.p, syllables: out }
    }

    pub fn is_reduced(&self) -> bool {
        self.reduce().syllables == self.syllables
    }

    /// Number of family syllables of the reduced representative.
    pub fn length(&self) -> usize {
        self.reduce().syllables.iter().filter(|s| matches!(s, Syllable::B { .. })).count()
    }

    pub fn a_sum(&self) -> u32 {
        self.syllables.iter().fold(0, |acc, s| match s {
            Syllable::A(k) => fp::add(acc, *k, self.p),
            _ => acc,
        })
    }

    pub fn mul(&self, other: &GroupWord) -> GroupWord {
        let mut syl = self.syllables.clone();
        syl.extend(other.syllables.iter().cloned());
        GroupWord { p: self.p, syllables: syl }.reduce()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            p: self.p,
            syllables: self.syllables.iter().rev().map(|s| s.inverse(self.p)).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> GroupWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut syl = Vec::with_capacity(base.syllables.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            syl.extend(base.syllables.iter().cloned());
        }
        GroupWord { p: self.p, syllables: syl }.reduce()
    }

    /// `self^g = g^-1 self g`.
    pub fn conj(&self, g: &GroupWord) -> GroupWord {
        g.inverse().mul(self).mul(g)
    }

    /// `[self, g] = self^-1 g^-1 self g`.
    pub fn commutator(&self, g: &GroupWord) -> GroupWord {
        self.inverse().mul(&g.inverse()).mul(self).mul(g)
    }

    /// A conjugate whose reduced form cannot be shortened by conjugation.
    pub fn cyclic_reduce(&self) -> GroupWord {
        let mut w = self.reduce();
        while w.syllables.len() >= 2 && w.syllables[0].mergeable(w.syllables.last().unwrap()) {
            let last = w.syllables.pop().unwrap();
            w.syllables.insert(0, last);
            w = w.reduce();
        }
        w
    }

    pub fn evaluate(&self, datum: &NumericalDatum, depth: u32) -> Result<Portrait> {
        let p = datum.p();
        let mut acc = Portrait::identity(p, depth);
        for s in &self.syllables {
            let f = match s {
                Syllable::A(k) => Portrait::rooted(p, depth, *k),
                Syllable::B { family, exps } => {
                    if *family == 0 || *family > p as usize || datum.r_j(*family) != exps.len() || exps.is_empty() {
                        return Err(Error::NoSuchGenerator { family: *family, index: exps.len() });
                    }
                    datum.directed_portrait(*family, exps, depth)
                }
            };
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    /// Writes `self = psi_1^-1(sections) * a^root`; returns `(sections,
    /// root)` with sections in coordinate order `1..=p`.
    pub fn decompose(&self, datum: &NumericalDatum) -> (Vec<GroupWord>, u32) {
        let p = self.p;
        let mut sections: Vec<Vec<Syllable>> = vec![Vec::new(); p as usize];
        let mut shift = 0u32;
        for s in &self.syllables {
            match s {
                Syllable::A(k) => shift = fp::add(shift, *k, p),
                Syllable::B { family, exps } => {
                    let vec = datum.family_vector(*family, exps);
                    for (x, sec) in sections.iter_mut().enumerate() {
                        // coordinate x + 1 of the product takes coordinate
                        // x + 1 + shift of this syllable
                        let z = (x as u32 + shift) % p + 1;
                        let k = (z as usize + family - 1) % p as usize;
                        if k == 0 {
                            sec.push(s.clone());
                        } else if vec[k - 1] != 0 {
                            sec.push(Syllable::A(vec[k - 1]));
                        }
                    }
                }
            }
        }
        let sections = sections.into_iter().map(|syl| GroupWord { p, syllables: syl }.reduce()).collect();
        (sections, shift)
    }

    pub fn first_level_sections(&self, datum: &NumericalDatum) -> Result<Vec<GroupWord>> {
        if self.a_sum() != 0 {
            return Err(Error::NotInStabilizer);
        }
        Ok(self.decompose(datum).0)
    }

    pub fn is_trivial(&self, datum: &NumericalDatum, guards: Guards) -> std::result::Result<bool, GuardExceeded> {
        trivial_rec(&self.reduce(), datum, guards, 0)
    }

    pub fn order(&self, datum: &NumericalDatum, cap: u64, guards: Guards) -> OrderResult {
        order_rec(&self.reduce(), datum, cap, guards, 0)
    }

    /// Exponent sums: `a` first, then `b_i^(j)` for `j = 1..=p`, `i = 1..=r_j`.
    pub fn abelianization(&self, datum: &NumericalDatum) -> Vec<u32> {
        let p = datum.p();
        let labels = datum.generator_labels();
        let mut out = vec![0u32; 1 + labels.len()];
        let mut starts = vec![0usize; p as usize + 2];
        for j in 1..=p as usize {
            starts[j + 1] = starts[j] + datum.r_j(j);
        }
        for s in &self.syllables {
            match s {
                Syllable::A(k) => out[0] = fp::add(out[0], *k, p),
                Syllable::B { family, exps } => {
                    for (i, &e) in exps.iter().enumerate() {
                        let slot = 1 + starts[*family] + i;
                        out[slot] = fp::add(out[slot], e, p);
                    }
                }
            }
        }
        out
    }

    /// Parses the word grammar against a datum.
    ///
    /// ```text
    /// word   := factor*
    /// factor := atom ('^' integer)?
    /// atom   := 'a' | '1' | 'b[' j ',' i ']' | '(' word ')' | '[' word ',' word (',' word)* ']'
    /// ```
    ///
    /// Whitespace is ignored. `[x,y] = x^-1 y^-1 x y` and `[x,y,z] = [[x,y],z]`.
    pub fn parse(text: &str, datum: &NumericalDatum) -> Result<GroupWord> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parser = Parser { chars: &chars, pos: 0, datum };
        let w = parser.word()?;
        if parser.pos != chars.len() {
            return Err(parser.err("unexpected trailing input"));
        }
        Ok(w)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.reduce();
        if w.syllables.is_empty() {
            return f.write_str("1");
        }
        let mut tokens = Vec::new();
        for s in &w.syllables {
            match s {
                Syllable::A(1) => tokens.push("a".to_string()),
                Syllable::A(k) => tokens.push(format!("a^{k}")),
                Syllable::B { family, exps } => {
                    for (i, &e) in exps.iter().enumerate() {
                        match e {
                            0 => {}
                            1 => tokens.push(format!("b[{},{}]", family, i + 1)),
                            e => tokens.push(format!("b[{},{}]^{}", family, i + 1, e)),
                        }
                    }
                }
            }
        }
        f.write_str(&tokens.join(" "))
    }
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
    datum: &'a NumericalDatum,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { line: 1, msg: format!("{msg} at column {}", self.pos + 1) }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn integer(&mut self) -> Result<i64> {
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| {
            self.pos = start;
            self.err("expected integer")
        })
    }

    fn word(&mut self) -> Result<GroupWord> {
        let p = self.datum.p();
        let mut acc = GroupWord::identity(p);
        while let Some(c) = self.peek() {
            if c == ')' || c == ',' || c == ']' {
                break;
            }
            let f = self.factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GroupWord> {
        let atom = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let k = self.integer()?;
            Ok(atom.pow(k))
        } else {
            Ok(atom)
        }
    }

    fn atom(&mut self) -> Result<GroupWord> {
        let p = self.datum.p();
        match self.peek() {
            Some('a') => {
                self.pos += 1;
                Ok(GroupWord::a(p, 1))
            }
            Some('1') => {
                self.pos += 1;
                Ok(GroupWord::identity(p))
            }
            Some('b') => {
                self.pos += 1;
                self.expect('[')?;
                let j = self.integer()?;
                self.expect(',')?;
                let i = self.integer()?;
                self.expect(']')?;
                if j <= 0 || i <= 0 {
                    return Err(self.err("generator indices are positive"));
                }
                GroupWord::b(self.datum, j as usize, i as usize, 1).map_err(|e| self.err(&e.to_string()))
            }
            Some('(') => {
                self.pos += 1;
                let w = self.word()?;
                self.expect(')')?;
                Ok(w)
            }
            Some('[') => {
                self.pos += 1;
                let mut acc = self.word()?;
                let mut count = 1;
                while self.peek() == Some(',') {
                    self.pos += 1;
                    let next = self.word()?;
                    acc = acc.commutator(&next);
                    count += 1;
                }
                self.expect(']')?;
                if count < 2 {
                    return Err(self.err("commutator needs at least two entries"));
                }
                Ok(acc)
            }
            _ => Err(self.err("expected a generator, `(` or `[`")),
        }
    }
}

fn trivial_rec(
    w: &GroupWord,
    datum: &NumericalDatum,
    guards: Guards,
    depth: u32,
) -> std::result::Result<bool, GuardExceeded> {
    let w = w.reduce();
    if w.is_empty() {
        return Ok(true);
    }
    if w.length() <= 1 || w.a_sum() != 0 {
        return Ok(false);
    }
    if depth >= guards.depth || w.syllables.len() > guards.syllables {
        return Err(GuardExceeded);
    }
    for section in w.decompose(datum).0 {
        if !trivial_rec(&section, datum, guards, depth + 1)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn order_rec(w: &GroupWord, datum: &NumericalDatum, cap: u64, guards: Guards, depth: u32) -> OrderResult {
    let p = datum.p() as u64;
    let w = w.cyclic_reduce();
    if w.is_empty() {
        return OrderResult::Order(1);
    }
    if w.syllables.len() > guards.syllables {
        return OrderResult::GuardExceeded;
    }
    let len = w.length();
    // a^k, or a single family syllable
    if len == 0 || (len == 1 && w.a_sum() == 0) {
        return if cap >= p { OrderResult::Order(p) } else { OrderResult::ExceedsCap };
    }
    if w.a_sum() != 0 {
        if cap < p {
            return OrderResult::ExceedsCap;
        }
        return match order_rec(&w.pow(p as i64), datum, cap / p, guards, depth) {
            OrderResult::Order(k) => OrderResult::Order(k * p),
            other => other,
        };
    }
    if depth >= guards.depth {
        return OrderResult::GuardExceeded;
    }
    let mut best = 1;
    for section in w.decompose(datum).0 {
        match order_rec(&section, datum, cap, guards, depth + 1) {
            OrderResult::Order(k) => best = best.max(k),
            other => return other,
        }
    }
    OrderResult::Order(best)
}

/// A random word with `length` family syllables, each followed by a random
/// power of `a`, starting with a random power of `a`.
pub fn sample_word<R: Rng>(datum: &NumericalDatum, rng: &mut R, length: usize) -> GroupWord {
    let p = datum.p();
    let fams = datum.nonempty_families();
    let mut syl = vec![Syllable::A(rng.gen_range(0..p))];
    for _ in 0..length {
        let j = fams[rng.gen_range(0..fams.len())];
        let mut exps: Vec<u32> = (0..datum.r_j(j)).map(|_| rng.gen_range(0..p)).collect();
        if exps.iter().all(|&x| x == 0) {
            let i = rng.gen_range(0..exps.len());
            exps[i] = rng.gen_range(1..p);
        }
        syl.push(Syllable::B { family: j, exps });
        syl.push(Syllable::A(rng.gen_range(0..p)));
    }
    GroupWord::raw(p, syl)
}

/// An element given by a finite-depth decomposition whose leaves are words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchElement {
    Leaf(GroupWord),
    /// `psi_1^-1(children) * a^label`.
    Node { label: u32, children: Vec<BranchElement> },
}

impl BranchElement {
    pub fn leaf(w: GroupWord) -> Self {
        BranchElement::Leaf(w)
    }

    pub fn from_children(label: u32, children: Vec<BranchElement>) -> Self {
        BranchElement::Node { label, children }
    }

    /// `psi_1^-1` of a tuple that is trivial except at coordinate `x`
    /// (1-based).
    pub fn at_coordinate(p: u32, x: u32, inner: BranchElement) -> Self {
        let children = (1..=p)
            .map(|y| if y == x { inner.clone() } else { BranchElement::Leaf(GroupWord::identity(p)) })
            .collect();
        BranchElement::Node { label: 0, children }
    }

    /// Decomposition depth.
    pub fn depth(&self) -> u32 {
        match self {
            BranchElement::Leaf(_) => 0,
            BranchElement::Node { children, .. } => 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    pub fn evaluate(&self, datum: &NumericalDatum, depth: u32) -> Result<Portrait> {
        match self {
            BranchElement::Leaf(w) => w.evaluate(datum, depth),
            BranchElement::Node { label, children } => {
                let p = datum.p();
                if children.len() != p as usize {
                    return Err(Error::Precondition(format!("a node needs {p} children")));
                }
                if depth == 0 {
                    return Ok(Portrait::identity(p, 0));
                }
                let subs = children
                    .iter()
                    .map(|c| c.evaluate(datum, depth - 1))
                    .collect::<Result<Vec<_>>>()?;
                Portrait::from_children(p, *label, &subs)
            }
        }
    }
}

impl fmt::Display for BranchElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchElement::Leaf(w) => write!(f, "{w}"),
            BranchElement::Node { label, children } => {
                let parts: Vec<String> = children.iter().map(|c| c.to_string()).collect();
                write!(f, "psi({})", parts.join(", "))?;
                if *label != 0 {
                    write!(f, " a^{label}")?;
                }
                Ok(())
            }
        }
    }
}
