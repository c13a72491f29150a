//! On-disk cache of subgroup chains.
//!
//! One file per `(datum hash, level, descriptor)`. The format is plain text:
//!
//! ```text
//! chain p <p> depth <n>
//! base <leading vertex indices>
//! orders <basic orbit lengths>
//! generators <count>
//! <generators, then table elements, one per line as leaf image lists>
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::chain::SubgroupChain;
use crate::error::{Error, Result};
use crate::tree::{Perm, Portrait};

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

#[derive(Debug, Clone)]
pub struct ChainCache {
    dir: PathBuf,
}

impl ChainCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        Ok(ChainCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, hash: &str, level: u32, descriptor: &str) -> PathBuf {
        self.dir.join(format!("{hash}-{level}-{descriptor}.chain"))
    }

    pub fn load(&self, hash: &str, level: u32, descriptor: &str) -> Result<Option<SubgroupChain>> {
        let path = self.path(hash, level, descriptor);
        let Ok(text) = fs::read_to_string(&path) else { return Ok(None) };
        decode(&text).map(Some)
    }

    pub fn store(&self, hash: &str, level: u32, descriptor: &str, chain: &SubgroupChain) -> Result<()> {
        let path = self.path(hash, level, descriptor);
        let tmp = path.with_extension(format!("tmp{}", TMP_COUNTER.fetch_add(1, Ordering::Relaxed)));
        fs::write(&tmp, encode(chain)).map_err(|e| Error::Cache(e.to_string()))?;
        fs::rename(&tmp, &path).map_err(|e| Error::Cache(e.to_string()))
    }
}

pub fn encode(chain: &SubgroupChain) -> String {
    let join = |xs: Vec<String>| xs.join(" ");
    let mut out = format!("chain p {} depth {}\n", chain.p(), chain.depth());
    out.push_str(&format!("base {}\n", join(chain.leading_indices().iter().map(|x| x.to_string()).collect())));
    out.push_str(&format!("orders {}\n", join(chain.orbit_lengths().iter().map(|x| x.to_string()).collect())));
    out.push_str(&format!("generators {}\n", chain.generators().len()));
    let gens = chain.generators().iter().map(|g| g.leaf_permutation());
    for perm in gens.chain(chain.entry_permutations()) {
        out.push_str(&join(perm.0.iter().map(|x| x.to_string()).collect()));
        out.push('\n');
    }
    out
}

pub fn decode(text: &str) -> Result<SubgroupChain> {
    let bad = |msg: &str| Error::Cache(msg.to_string());
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file"))?.split_whitespace().collect();
    if header.len() != 5 || header[0] != "chain" || header[1] != "p" || header[3] != "depth" {
        return Err(bad("bad header"));
    }
    let p: u32 = header[2].parse().map_err(|_| bad("bad prime"))?;
    let depth: u32 = header[4].parse().map_err(|_| bad("bad depth"))?;
    let base: Vec<usize> = parse_list(lines.next().and_then(|l| l.strip_prefix("base")).ok_or_else(|| bad("missing base"))?)?;
    let orders: Vec<u32> =
        parse_list(lines.next().and_then(|l| l.strip_prefix("orders")).ok_or_else(|| bad("missing orders"))?)?;
    let count: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("generators"))
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| bad("missing generator count"))?;
    let mut entries = Vec::new();
    for line in lines {
        let perm = Perm(parse_list(line)?);
        entries.push(Portrait::from_leaf_permutation(p, depth, &perm).map_err(|_| bad("bad permutation"))?);
    }
    if entries.len() < count {
        return Err(bad("truncated file"));
    }
    let gens = entries;
    let entries = gens[count..].to_vec();
    let gens = gens[..count].to_vec();
    if entries.len() != base.len() || orders.len() != base.len() || orders.iter().any(|&o| o != p) {
        return Err(bad("inconsistent table"));
    }
    let chain = SubgroupChain::from_entries(p, depth, &entries, gens, false)?;
    if chain.leading_indices() != base {
        return Err(bad("base does not match table"));
    }
    Ok(chain)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Cache(format!("bad number `{t}`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::FiniteQuotient;
    use crate::datum::NumericalDatum;

    #[test]
    fn encode_decode() {
        let d = NumericalDatum::from_pairs(3, &[(1, &[&[1, 2]])]).unwrap();
        let q = FiniteQuotient::new(&d, 3, 100).unwrap();
        let back = decode(&encode(q.chain())).unwrap();
        assert!(back.same_group(q.chain()));
        assert_eq!(back.leading_indices(), q.chain().leading_indices());
        assert!(decode("chain p 3 depth 2\nbase 0\norders 3\ngenerators 0\n").is_err());
        assert_eq!(back.generators().len(), q.chain().generators().len());
    }

    #[test]
    fn store_and_load() {
        let dir = std::env::temp_dir().join(format!("multiegs-cache-test-{}", std::process::id()));
        let cache = ChainCache::new(&dir).unwrap();
        let d = NumericalDatum::from_pairs(3, &[(1, &[&[1, 1]]), (2, &[&[1, 1]])]).unwrap();
        let q = FiniteQuotient::new(&d, 3, 100).unwrap();
        assert!(cache.load(&d.hash(), 3, "group").unwrap().is_none());
        cache.store(&d.hash(), 3, "group", q.chain()).unwrap();
        let back = cache.load(&d.hash(), 3, "group").unwrap().unwrap();
        assert!(back.same_group(q.chain()));
        fs::remove_dir_all(&dir).unwrap();
    }
}
