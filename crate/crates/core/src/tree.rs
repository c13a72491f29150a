//! Vertices of the p-adic tree and finite truncations of automorphisms in
//! the Sylow pro-p subgroup.
//!
//! Automorphisms act on the right: `v^(fg) = (v^f)^g`. A portrait of depth
//! `n` stores one residue per vertex of depth `< n`, breadth-first, each the
//! exponent of the p-cycle applied to the children of that vertex. Leaves are
//! ordered lexicographically.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of vertices of depth `< k`, which is also the breadth-first index of
/// the first vertex on level `k`.
#[inline]
pub fn level_offset(p: u32, k: u32) -> usize {
    let mut total = 0usize;
    let mut width = 1usize;
    for _ in 0..k {
        total += width;
        width *= p as usize;
    }
    total
}

#[inline]
pub fn level_width(p: u32, k: u32) -> usize {
    (p as usize).pow(k)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    p: u32,
    letters: Vec<u32>,
}

impl Vertex {
    pub fn root(p: u32) -> Self {
        Vertex { p, letters: Vec::new() }
    }

    /// Letters are taken from `1..=p`.
    pub fn new(p: u32, letters: Vec<u32>) -> Result<Self> {
        if let Some(&letter) = letters.iter().find(|&&x| x == 0 || x > p) {
            return Err(Error::BadLetter { letter, p });
        }
        Ok(Vertex { p, letters })
    }

    /// Vertex on level `k` at lexicographic position `pos`.
    pub fn from_position(p: u32, k: u32, mut pos: usize) -> Self {
        let mut letters = vec![0; k as usize];
        for slot in letters.iter_mut().rev() {
            *slot = (pos % p as usize) as u32 + 1;
            pos /= p as usize;
        }
        Vertex { p, letters }
    }

    pub fn from_index(p: u32, index: usize) -> Self {
        let mut k = 0;
        while level_offset(p, k + 1) <= index {
            k += 1;
        }
        Self::from_position(p, k, index - level_offset(p, k))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn child(&self, x: u32) -> Result<Self> {
        let mut letters = self.letters.clone();
        letters.push(x);
        Vertex::new(self.p, letters)
    }

    pub fn prefix(&self, k: usize) -> Self {
        Vertex { p: self.p, letters: self.letters[..k].to_vec() }
    }

    /// Lexicographic position among the vertices of the same level.
    pub fn position(&self) -> usize {
        self.letters
            .iter()
            .fold(0usize, |acc, &x| acc * self.p as usize + (x - 1) as usize)
    }

    /// Breadth-first index.
    pub fn index(&self) -> usize {
        level_offset(self.p, self.len() as u32) + self.position()
    }

    /// All vertices of level `k` in lexicographic order.
    pub fn level(p: u32, k: u32) -> impl Iterator<Item = Vertex> {
        (0..level_width(p, k)).map(move |pos| Vertex::from_position(p, k, pos))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.letters.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A permutation of `0..degree` in image-list form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Perm(pub Vec<u32>);

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm((0..degree as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    /// Order as a permutation (lcm of cycle lengths).
    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.0.len()];
        let mut acc = 1u64;
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x] as usize;
                len += 1;
            }
            acc = lcm(acc, len);
        }
        acc
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Portrait {
    p: u32,
    depth: u32,
    labels: Vec<u8>,
}

impl Portrait {
    pub fn identity(p: u32, depth: u32) -> Self {
        Portrait { p, depth, labels: vec![0; level_offset(p, depth)] }
    }

    /// The rooted automorphism `a^k`.
    pub fn rooted(p: u32, depth: u32, k: u32) -> Self {
        let mut f = Self::identity(p, depth);
        if depth > 0 {
            f.labels[0] = (k % p) as u8;
        }
        f
    }

    pub fn from_labels(p: u32, depth: u32, labels: Vec<u8>) -> Result<Self> {
        let expected = level_offset(p, depth);
        if labels.len() != expected {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {expected} labels, found {}", labels.len()),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&x| x as u32 >= p) {
            return Err(Error::Parse { line: 0, msg: format!("label {bad} is not a residue mod {p}") });
        }
        Ok(Portrait { p, depth, labels })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    pub fn label(&self, v: &Vertex) -> u32 {
        self.labels[v.index()] as u32
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&x| x == 0)
    }

    /// Breadth-first index of the image of every internal vertex.
    pub fn vertex_images(&self) -> Vec<u32> {
        let mut img = vec![0u32; self.labels.len()];
        vertex_images_into(self.p, self.depth, &self.labels, &mut img);
        img
    }

    pub fn act(&self, v: &Vertex) -> Result<Vertex> {
        if v.len() > self.depth as usize {
            return Err(Error::VertexTooDeep { len: v.len(), depth: self.depth });
        }
        let p = self.p;
        let mut out = Vec::with_capacity(v.len());
        let mut pos = 0usize;
        for (k, &x) in v.letters.iter().enumerate() {
            let idx = level_offset(p, k as u32) + pos;
            let shift = self.labels[idx] as u32;
            out.push((x - 1 + shift) % p + 1);
            pos = pos * p as usize + (x - 1) as usize;
        }
        Ok(Vertex { p, letters: out })
    }

    fn check_compatible(&self, other: &Portrait) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.depth != other.depth {
            return Err(Error::DepthMismatch(self.depth, other.depth));
        }
        Ok(())
    }

    /// The product `self * other`: first `self`, then `other`.
    pub fn compose(&self, other: &Portrait) -> Result<Portrait> {
        self.check_compatible(other)?;
        Ok(self.mul(other))
    }

    /// Unchecked product; both portraits must share `p` and depth.
    pub fn mul(&self, other: &Portrait) -> Portrait {
        let mut out = vec![0u8; self.labels.len()];
        let mut scratch = vec![0u32; self.labels.len()];
        mul_into(self.p, self.depth, &self.labels, &other.labels, &mut out, &mut scratch);
        Portrait { p: self.p, depth: self.depth, labels: out }
    }

    pub fn invert(&self) -> Portrait {
        let img = self.vertex_images();
        let p = self.p as u8;
        let mut out = vec![0u8; self.labels.len()];
        for (v, &w) in img.iter().enumerate() {
            out[w as usize] = (p - self.labels[v]) % p;
        }
        Portrait { p: self.p, depth: self.depth, labels: out }
    }

    pub fn pow(&self, mut e: u64) -> Portrait {
        let mut acc = Portrait::identity(self.p, self.depth);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `self^g = g^-1 self g`.
    pub fn conj(&self, g: &Portrait) -> Portrait {
        g.invert().mul(self).mul(g)
    }

    /// `[self, g] = self^-1 g^-1 self g`.
    pub fn commutator(&self, g: &Portrait) -> Portrait {
        self.invert().mul(&g.invert()).mul(self).mul(g)
    }

    /// The section at a vertex fixed by `self`.
    pub fn section(&self, u: &Vertex) -> Result<Portrait> {
        if u.len() > self.depth as usize {
            return Err(Error::VertexTooDeep { len: u.len(), depth: self.depth });
        }
        if self.act(u)? != *u {
            return Err(Error::VertexMoved(u.to_string()));
        }
        Ok(self.section_unchecked(u.len() as u32, u.position()))
    }

    /// Labels of the subtree below the vertex at `(level, pos)`, without
    /// checking that the vertex is fixed.
    pub fn section_unchecked(&self, level: u32, pos: usize) -> Portrait {
        let p = self.p;
        let depth = self.depth - level;
        let mut labels = Vec::with_capacity(level_offset(p, depth));
        for k in 0..depth {
            let w = level_width(p, k);
            let start = level_offset(p, level + k) + pos * w;
            labels.extend_from_slice(&self.labels[start..start + w]);
        }
        Portrait { p, depth, labels }
    }

    /// Writes `sub` as the subtree below the vertex at `(level, pos)`.
    pub fn set_subtree(&mut self, level: u32, pos: usize, sub: &Portrait) {
        let p = self.p;
        let depth = (self.depth - level).min(sub.depth);
        for k in 0..depth {
            let w = level_width(p, k);
            let start = level_offset(p, level + k) + pos * w;
            let src = level_offset(p, k);
            self.labels[start..start + w].copy_from_slice(&sub.labels[src..src + w]);
        }
    }

    /// Assembles `psi_1^-1(children) * a^root_label`.
    pub fn from_children(p: u32, root_label: u32, children: &[Portrait]) -> Result<Portrait> {
        if children.len() != p as usize {
            return Err(Error::Precondition(format!("expected {p} children")));
        }
        let d = children[0].depth;
        for c in children {
            if c.p != p {
                return Err(Error::PrimeMismatch(p, c.p));
            }
            if c.depth != d {
                return Err(Error::DepthMismatch(d, c.depth));
            }
        }
        let mut f = Portrait::identity(p, d + 1);
        f.labels[0] = (root_label % p) as u8;
        for (x, c) in children.iter().enumerate() {
            f.set_subtree(1, x, c);
        }
        Ok(f)
    }

    pub fn truncate(&self, m: u32) -> Portrait {
        let m = m.min(self.depth);
        Portrait { p: self.p, depth: m, labels: self.labels[..level_offset(self.p, m)].to_vec() }
    }

    /// Action on the lexicographically ordered leaves of depth `depth`.
    pub fn leaf_permutation(&self) -> Perm {
        let p = self.p as usize;
        let n = self.depth;
        // positions of images, level by level
        let mut cur = vec![0u32; 1];
        for k in 0..n {
            let off = level_offset(self.p, k);
            let mut next = vec![0u32; cur.len() * p];
            for (q, &qi) in cur.iter().enumerate() {
                let l = self.labels[off + q] as usize;
                for x in 0..p {
                    next[q * p + x] = (qi as usize * p + (x + l) % p) as u32;
                }
            }
            cur = next;
        }
        Perm(cur)
    }

    /// Reads a portrait from a leaf permutation that lies in the Sylow
    /// subgroup.
    pub fn from_leaf_permutation(p: u32, depth: u32, perm: &Perm) -> Result<Portrait> {
        if perm.degree() != level_width(p, depth) {
            return Err(Error::Precondition("permutation degree is not p^depth".into()));
        }
        let mut f = Portrait::identity(p, depth);
        for k in 0..depth {
            let off = level_offset(p, k);
            let block = level_width(p, depth - k - 1);
            for q in 0..level_width(p, k) {
                // first leaf below child 0 of this vertex
                let leaf = q * p as usize * block;
                let img = perm.image(leaf as u32) as usize;
                f.labels[off + q] = ((img / block) % p as usize) as u8;
            }
        }
        if f.leaf_permutation() != *perm {
            return Err(Error::Precondition("permutation is not a tree automorphism in the Sylow subgroup".into()));
        }
        Ok(f)
    }

    /// Text form: a header line `p n` followed by the labels.
    pub fn to_text(&self) -> String {
        let labels: Vec<String> = self.labels.iter().map(|x| x.to_string()).collect();
        format!("{} {}\n{}\n", self.p, self.depth, labels.join(" "))
    }

    pub fn from_text(text: &str) -> Result<Portrait> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let nums: Vec<&str> = header.split_whitespace().collect();
        let bad = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        if nums.len() != 2 {
            return Err(bad(hline, "header must be `p n`"));
        }
        let p: u32 = nums[0].parse().map_err(|_| bad(hline, "bad prime"))?;
        let depth: u32 = nums[1].parse().map_err(|_| bad(hline, "bad depth"))?;
        let mut labels = Vec::new();
        for (i, line) in lines {
            for tok in line.split_whitespace() {
                let x: u32 = tok.parse().map_err(|_| bad(i, "bad label"))?;
                if x >= p {
                    return Err(bad(i, "label out of range"));
                }
                labels.push(x as u8);
            }
        }
        Portrait::from_labels(p, depth, labels)
    }
}

/// Fills `img` with the breadth-first image index of every internal vertex.
#[inline]
pub fn vertex_images_into(p: u32, depth: u32, labels: &[u8], img: &mut [u32]) {
    if depth == 0 {
        return;
    }
    img[0] = 0;
    let pu = p as usize;
    let mut off = 0usize;
    let mut width = 1usize;
    for _ in 0..depth.saturating_sub(1) {
        let next_off = off + width;
        for q in 0..width {
            let v = off + q;
            let qi = img[v] as usize - off;
            let l = labels[v] as usize;
            let base = next_off + q * pu;
            let ibase = next_off + qi * pu;
            for x in 0..pu {
                let mut y = x + l;
                if y >= pu {
                    y -= pu;
                }
                img[base + x] = (ibase + y) as u32;
            }
        }
        off = next_off;
        width *= pu;
    }
}

/// `out = f * g` on raw label arrays; `scratch` receives the vertex images of
/// `f`.
#[inline]
pub fn mul_into(p: u32, depth: u32, f: &[u8], g: &[u8], out: &mut [u8], scratch: &mut [u32]) {
    vertex_images_into(p, depth, f, scratch);
    let p8 = p as u8;
    for v in 0..f.len() {
        let s = f[v] + g[scratch[v] as usize];
        out[v] = if s >= p8 { s - p8 } else { s };
    }
}

impl fmt::Display for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text().trim_end())
    }
}
