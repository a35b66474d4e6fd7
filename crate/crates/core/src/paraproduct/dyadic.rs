use crate::error::{param, LabError, Result};
use crate::rng::{self, LabRng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Anisotropy exponents: rectangles of scale `k` are `2^{ak} x 2^{bk}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGeometry {
    pub alpha: u32,
    pub beta: u32,
}

impl Default for DyadicGeometry {
    fn default() -> Self {
        Self { alpha: 1, beta: 2 }
    }
}

/// `[i1 2^{ak}, (i1 + 1) 2^{ak}) x [i2 2^{bk}, (i2 + 1) 2^{bk})` inside the
/// unit square, so `k <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicRectangle {
    pub k: i32,
    pub i1: i64,
    pub i2: i64,
}

/// Deepest supported scale; keeps index arithmetic inside `i64`.
pub const MIN_SCALE: i32 = -20;

impl DyadicGeometry {
    pub fn new(alpha: u32, beta: u32) -> Result<Self> {
        if alpha == 0 || beta == 0 || alpha > 3 || beta > 3 {
            return Err(param("alpha/beta", "exponents must lie in 1..=3"));
        }
        Ok(Self { alpha, beta })
    }

    fn counts(&self, k: i32) -> (i64, i64) {
        (
            1i64 << (self.alpha as i64 * -k as i64),
            1i64 << (self.beta as i64 * -k as i64),
        )
    }

    pub fn check(&self, q: &DyadicRectangle) -> Result<()> {
        if q.k > 0 || q.k < MIN_SCALE {
            return Err(param(
                "rectangle",
                format!("scale {} outside {MIN_SCALE}..=0", q.k),
            ));
        }
        let (c1, c2) = self.counts(q.k);
        if !(0..c1).contains(&q.i1) || !(0..c2).contains(&q.i2) {
            return Err(param("rectangle", format!("{q:?} leaves the unit square")));
        }
        Ok(())
    }

    pub fn x_interval(&self, q: &DyadicRectangle) -> (f64, f64) {
        let len = 2f64.powi(self.alpha as i32 * q.k);
        (q.i1 as f64 * len, (q.i1 + 1) as f64 * len)
    }

    pub fn y_interval(&self, q: &DyadicRectangle) -> (f64, f64) {
        let len = 2f64.powi(self.beta as i32 * q.k);
        (q.i2 as f64 * len, (q.i2 + 1) as f64 * len)
    }

    /// `ell(Q) = 2^k`.
    pub fn ell(&self, q: &DyadicRectangle) -> f64 {
        2f64.powi(q.k)
    }

    pub fn area(&self, q: &DyadicRectangle) -> f64 {
        2f64.powi((self.alpha + self.beta) as i32 * q.k)
    }

    pub fn center(&self, q: &DyadicRectangle) -> (f64, f64) {
        let (a, b) = self.x_interval(q);
        let (c, d) = self.y_interval(q);
        (0.5 * (a + b), 0.5 * (c + d))
    }

    pub fn contains(&self, outer: &DyadicRectangle, inner: &DyadicRectangle) -> bool {
        if outer.k < inner.k {
            return false;
        }
        let d = (outer.k - inner.k) as u32;
        inner.i1 >> (self.alpha * d) == outer.i1 && inner.i2 >> (self.beta * d) == outer.i2
    }

    pub fn parent(&self, q: &DyadicRectangle) -> Option<DyadicRectangle> {
        (q.k < 0).then(|| DyadicRectangle {
            k: q.k + 1,
            i1: q.i1 >> self.alpha,
            i2: q.i2 >> self.beta,
        })
    }

    /// The `2^{a + b}` children, in lexicographic order.
    pub fn children(&self, q: &DyadicRectangle) -> Vec<DyadicRectangle> {
        let (na, nb) = (1i64 << self.alpha, 1i64 << self.beta);
        let mut out = Vec::with_capacity((na * nb) as usize);
        for a in 0..na {
            for b in 0..nb {
                out.push(DyadicRectangle {
                    k: q.k - 1,
                    i1: (q.i1 << self.alpha) + a,
                    i2: (q.i2 << self.beta) + b,
                });
            }
        }
        out
    }

    /// Every rectangle of the unit square with scale in `k_lo ..= k_hi`.
    pub fn all_rectangles(&self, k_lo: i32, k_hi: i32) -> Result<Vec<DyadicRectangle>> {
        if k_hi > 0 || k_lo > k_hi || k_lo < MIN_SCALE {
            return Err(param(
                "scales",
                format!("need {MIN_SCALE} <= k_lo <= k_hi <= 0"),
            ));
        }
        let mut out = Vec::new();
        for k in (k_lo..=k_hi).rev() {
            let (c1, c2) = self.counts(k);
            for i1 in 0..c1 {
                for i2 in 0..c2 {
                    out.push(DyadicRectangle { k, i1, i2 });
                }
            }
        }
        Ok(out)
    }
}

/// A finite collection with a root containing every member.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub geometry: DyadicGeometry,
    pub root: DyadicRectangle,
    pub rects: BTreeSet<DyadicRectangle>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    alpha: u32,
    beta: u32,
    rects: Vec<DyadicRectangle>,
}

impl Tree {
    pub fn new(
        geometry: DyadicGeometry,
        rects: impl IntoIterator<Item = DyadicRectangle>,
    ) -> Result<Self> {
        let rects: BTreeSet<DyadicRectangle> = rects.into_iter().collect();
        for q in &rects {
            geometry.check(q)?;
        }
        let top = rects
            .iter()
            .max_by_key(|q| q.k)
            .copied()
            .ok_or_else(|| LabError::NotConvex("empty collection".into()))?;
        if let Some(q) = rects.iter().find(|q| !geometry.contains(&top, q)) {
            return Err(LabError::NotConvex(format!(
                "{q:?} is not inside {top:?}; no root"
            )));
        }
        Ok(Self {
            geometry,
            root: top,
            rects,
        })
    }

    /// Convex iff every non-root member has its parent in the tree, since the
    /// rectangles between a member and the root are exactly its ancestors.
    pub fn is_convex(&self) -> bool {
        self.rects.iter().filter(|q| **q != self.root).all(|q| {
            self.geometry
                .parent(q)
                .is_some_and(|p| self.rects.contains(&p))
        })
    }

    pub fn require_convex(&self) -> Result<()> {
        if self.is_convex() {
            Ok(())
        } else {
            Err(LabError::NotConvex(format!(
                "tree rooted at {:?} has a gap",
                self.root
            )))
        }
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn depth(&self) -> i32 {
        self.root.k - self.rects.iter().map(|q| q.k).min().unwrap_or(self.root.k)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let j = TreeJson {
            alpha: self.geometry.alpha,
            beta: self.geometry.beta,
            rects: self.rects.iter().copied().collect(),
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: TreeJson = serde_json::from_str(s)?;
        Tree::new(DyadicGeometry::new(j.alpha, j.beta)?, j.rects)
    }
}

/// Rectangles outside the tree whose parent is inside it.
pub fn tree_leaves(t: &Tree) -> Result<Vec<DyadicRectangle>> {
    t.require_convex()?;
    let mut out = Vec::new();
    for q in &t.rects {
        for c in t.geometry.children(q) {
            if !t.rects.contains(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Random convex tree: a root of scale `root_k` at a random position, where
/// each child of a member above `root_k - max_depth` joins with probability
/// `p_child`.
pub fn random_convex_tree(
    geometry: DyadicGeometry,
    root_k: i32,
    max_depth: i32,
    p_child: f64,
    rng: &mut LabRng,
) -> Result<Tree> {
    if root_k > 0 || root_k - max_depth < MIN_SCALE || max_depth < 0 {
        return Err(param("tree", "scales must stay within the unit square"));
    }
    let (c1, c2) = geometry.counts(root_k);
    let root = DyadicRectangle {
        k: root_k,
        i1: rng.gen_range(0..c1),
        i2: rng.gen_range(0..c2),
    };
    let mut rects = vec![root];
    let mut frontier = vec![root];
    while let Some(q) = frontier.pop() {
        if root_k - q.k >= max_depth {
            continue;
        }
        for c in geometry.children(&q) {
            if rng::uniform(rng, 0.0, 1.0) < p_child {
                rects.push(c);
                frontier.push(c);
            }
        }
    }
    Tree::new(geometry, rects)
}
