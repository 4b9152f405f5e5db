use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// One agglomeration. Leaves are `0..n`; merge `i` gets id `n + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeNode {
    pub id: usize,
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDendrogram")]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<MergeNode>,
}

#[derive(Deserialize)]
struct RawDendrogram {
    n_leaves: usize,
    merges: Vec<MergeNode>,
}

impl TryFrom<RawDendrogram> for Dendrogram {
    type Error = Error;

    fn try_from(raw: RawDendrogram) -> Result<Self> {
        Dendrogram::new(raw.n_leaves, raw.merges)
    }
}

impl Dendrogram {
    /// Checks ids, child usage, sizes and height monotonicity.
    pub fn new(n_leaves: usize, merges: Vec<MergeNode>) -> Result<Self> {
        if n_leaves < 1 {
            return Err(Error::Invalid("dendrogram needs at least one leaf".into()));
        }
        if merges.len() != n_leaves - 1 {
            return Err(Error::Invalid(format!(
                "{} merges for {n_leaves} leaves",
                merges.len()
            )));
        }
        let mut size = vec![1usize; n_leaves];
        size.resize(2 * n_leaves - 1, 0);
        let mut used = vec![false; 2 * n_leaves - 1];
        let mut prev = f64::NEG_INFINITY;
        for (i, m) in merges.iter().enumerate() {
            let id = n_leaves + i;
            if m.id != id {
                return Err(Error::Invalid(format!("merge {i} has id {} (expected {id})", m.id)));
            }
            for child in [m.left, m.right] {
                if child >= id {
                    return Err(Error::Invalid(format!("merge {id} references later node {child}")));
                }
                if std::mem::replace(&mut used[child], true) {
                    return Err(Error::Invalid(format!("node {child} merged twice")));
                }
            }
            if m.left == m.right {
                return Err(Error::Invalid(format!("merge {id} joins {} with itself", m.left)));
            }
            if m.size != size[m.left] + size[m.right] {
                return Err(Error::Invalid(format!("merge {id} has inconsistent size {}", m.size)));
            }
            if !m.height.is_finite() || m.height < 0.0 {
                return Err(Error::Invalid(format!("merge {id} has invalid height {}", m.height)));
            }
            if m.height < prev {
                return Err(Error::Invalid(format!("merge heights decrease at {id}")));
            }
            prev = m.height;
            size[id] = m.size;
        }
        Ok(Self { n_leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[MergeNode] {
        &self.merges
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    pub fn root(&self) -> usize {
        2 * self.n_leaves - 2
    }

    /// Leaves beneath `node`, in ascending order.
    pub fn leaves_of(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < self.n_leaves {
                out.push(x);
            } else {
                let m = &self.merges[x - self.n_leaves];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        jsonl::read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        serde_json::to_writer(&mut w, self).map_err(|e| Error::parse(path, 0, e))?;
        std::io::Write::write_all(&mut w, b"\n").map_err(|e| Error::io(path, e))
    }
}
