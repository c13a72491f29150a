//! Brute-force oracle: generators act on leaf words letter by letter, groups
//! are enumerated element by element.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

pub type P = Vec<u32>;

#[derive(Debug, Clone)]
pub struct Oracle {
    pub p: u32,
    /// `families[j - 1][i - 1]` is the defining vector of `b_i^(j)`.
    pub families: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gen {
    A,
    B(usize, usize),
}

impl Oracle {
    pub fn new(p: u32, families: Vec<Vec<Vec<u32>>>) -> Self {
        Oracle { p, families }
    }

    pub fn gens(&self) -> Vec<Gen> {
        let mut out = vec![Gen::A];
        for (j, fam) in self.families.iter().enumerate() {
            for i in 0..fam.len() {
                out.push(Gen::B(j + 1, i + 1));
            }
        }
        out
    }

    /// Image of a leaf word (letters `0..p`) under a generator.
    fn act(&self, g: Gen, word: &mut [u32]) {
        let p = self.p;
        match g {
            Gen::A => {
                if let Some(x) = word.first_mut() {
                    *x = (*x + 1) % p;
                }
            }
            Gen::B(j, i) => {
                let e = &self.families[j - 1][i - 1];
                let mut pos = 0;
                while pos + 1 < word.len() {
                    // 1-based coordinate x carries a^(e_k), k = x + j - 1 mod p
                    let x = word[pos] as usize + 1;
                    let k = (x + j - 1) % p as usize;
                    if k == 0 {
                        pos += 1;
                        continue;
                    }
                    word[pos + 1] = (word[pos + 1] + e[k - 1]) % p;
                    return;
                }
            }
        }
    }

    pub fn perm(&self, g: Gen, depth: u32) -> P {
        let p = self.p;
        let n = p.pow(depth) as usize;
        let mut out = vec![0; n];
        let mut word = vec![0u32; depth as usize];
        for (leaf, slot) in out.iter_mut().enumerate() {
            let mut r = leaf;
            for x in word.iter_mut().rev() {
                *x = (r % p as usize) as u32;
                r /= p as usize;
            }
            self.act(g, &mut word);
            *slot = word.iter().fold(0u32, |acc, &x| acc * p + x);
        }
        out
    }

    pub fn gen_perms(&self, depth: u32) -> Vec<P> {
        self.gens().into_iter().map(|g| self.perm(g, depth)).collect()
    }
}

/// Right action: `x^(fg) = (x^f)^g`.
pub fn mul(f: &P, g: &P) -> P {
    f.iter().map(|&x| g[x as usize]).collect()
}

pub fn inv(f: &P) -> P {
    let mut out = vec![0; f.len()];
    for (x, &y) in f.iter().enumerate() {
        out[y as usize] = x as u32;
    }
    out
}

pub fn identity(n: usize) -> P {
    (0..n as u32).collect()
}

pub fn comm(f: &P, g: &P) -> P {
    mul(&mul(&inv(f), &inv(g)), &mul(f, g))
}

pub fn order(f: &P) -> u64 {
    let mut seen = vec![false; f.len()];
    let mut l = 1u64;
    for s in 0..f.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0u64;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = f[x] as usize;
            len += 1;
        }
        l = l / gcd(l, len) * len;
    }
    l
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// All elements of `<gens>`.
pub fn closure(gens: &[P], n: usize) -> HashSet<P> {
    normal_closure(gens, &[], n)
}

/// All elements of the subgroup generated by `gens` and their conjugates under
/// `conj`.
pub fn normal_closure(gens: &[P], conj: &[P], n: usize) -> HashSet<P> {
    let mut set = HashSet::new();
    let mut queue = VecDeque::new();
    let mut gens: Vec<P> = gens.to_vec();
    let mut seen_gens: HashSet<P> = gens.iter().cloned().collect();
    let id = identity(n);
    set.insert(id.clone());
    queue.push_back(id);
    loop {
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = mul(&x, g);
                if set.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let mut added = false;
        let current = gens.clone();
        for g in &current {
            for h in conj {
                let c = mul(&mul(&inv(h), g), h);
                if !set.contains(&c) && seen_gens.insert(c.clone()) {
                    gens.push(c);
                    added = true;
                }
            }
        }
        if !added {
            return set;
        }
        queue.extend(set.iter().cloned());
    }
}

pub fn log_p(size: usize, p: u32) -> u32 {
    let mut k = 0;
    let mut s = size;
    while s > 1 {
        assert_eq!(s % p as usize, 0, "order {size} is not a power of {p}");
        s /= p as usize;
        k += 1;
    }
    k
}

pub struct Quotient {
    pub p: u32,
    pub depth: u32,
    pub gens: Vec<P>,
}

impl Quotient {
    pub fn new(o: &Oracle, depth: u32) -> Self {
        Quotient { p: o.p, depth, gens: o.gen_perms(depth) }
    }

    pub fn degree(&self) -> usize {
        self.p.pow(self.depth) as usize
    }

    pub fn group(&self) -> HashSet<P> {
        closure(&self.gens, self.degree())
    }

    pub fn derived_gens(&self) -> Vec<P> {
        let mut out = Vec::new();
        for (i, f) in self.gens.iter().enumerate() {
            for g in &self.gens[i + 1..] {
                out.push(comm(f, g));
            }
        }
        out
    }

    pub fn derived(&self) -> HashSet<P> {
        normal_closure(&self.derived_gens(), &self.gens, self.degree())
    }

    pub fn gamma3(&self) -> HashSet<P> {
        let mut out = Vec::new();
        for c in self.derived_gens() {
            for g in &self.gens {
                out.push(comm(&c, g));
            }
        }
        normal_closure(&out, &self.gens, self.degree())
    }

    /// Elements fixing every vertex of level `k`.
    pub fn level_kernel(&self, group: &HashSet<P>, k: u32) -> usize {
        let block = self.p.pow(self.depth - k) as usize;
        group.iter().filter(|f| f.iter().enumerate().all(|(x, &y)| x / block == y as usize / block)).count()
    }
}
