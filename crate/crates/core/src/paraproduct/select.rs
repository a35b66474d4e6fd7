//! Grouping a collection of rectangles into trees by the dyadic size of the
//! localized maximal function along ancestor chains.

use super::dyadic::{DyadicGeometry, DyadicRectangle, Tree};
use super::kernels::local_max;
use crate::error::{LabError, Result};
use crate::torus::GridFunction2D;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectedTree {
    /// `2^{n_j - 1} < sup_{Q' in q0, Q' contains Q} M_{Q'}(f_j) <= 2^{n_j}`.
    pub n: [i32; 3],
    #[serde(serialize_with = "tree_json")]
    pub tree: Tree,
}

fn tree_json<S: serde::Serializer>(t: &Tree, s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: serde_json::Value =
        serde_json::from_str(&t.to_json_string().map_err(serde::ser::Error::custom)?)
            .map_err(serde::ser::Error::custom)?;
    v.serialize(s)
}

fn dyadic_exponent(s: f64) -> i32 {
    let mut k = s.log2().ceil() as i32;
    // Guard the rounding of log2 at exact powers of two.
    while 2f64.powi(k - 1) >= s {
        k -= 1;
    }
    while 2f64.powi(k) < s {
        k += 1;
    }
    k
}

/// Ancestors of `q` strictly between `q` and the top of the square.
fn ancestors(geo: &DyadicGeometry, q: &DyadicRectangle) -> Vec<DyadicRectangle> {
    std::iter::successors(geo.parent(q), |p| geo.parent(p)).collect()
}

/// Partition `q0` into convex trees, one per maximal rectangle of each class
/// of exponent triples. `q0` must be closed under intermediate containment.
pub fn tree_select(
    q0: &[DyadicRectangle],
    geometry: &DyadicGeometry,
    fs: [&GridFunction2D; 3],
) -> Result<Vec<SelectedTree>> {
    if q0.is_empty() {
        return Ok(Vec::new());
    }
    for (j, f) in fs.iter().enumerate() {
        if f.is_zero() {
            return Err(LabError::ZeroInput(["f1", "f2", "f3"][j]));
        }
    }
    let set: BTreeSet<DyadicRectangle> = q0.iter().copied().collect();
    for q in &set {
        geometry.check(q)?;
        let chain = ancestors(geometry, q);
        if let Some(top) = chain.iter().rposition(|a| set.contains(a)) {
            if let Some(gap) = chain[..top].iter().find(|a| !set.contains(a)) {
                return Err(LabError::NotConvex(format!(
                    "{gap:?} lies between members of q0 but is missing"
                )));
            }
        }
    }
    let mut own: BTreeMap<DyadicRectangle, [f64; 3]> = BTreeMap::new();
    for q in &set {
        let mut m = [0.0; 3];
        for j in 0..3 {
            m[j] = local_max(fs[j], geometry, &[*q])?;
        }
        own.insert(*q, m);
    }
    let mut class: BTreeMap<[i32; 3], BTreeSet<DyadicRectangle>> = BTreeMap::new();
    for q in &set {
        let mut s = own[q];
        for a in ancestors(geometry, q) {
            if let Some(m) = own.get(&a) {
                for j in 0..3 {
                    s[j] = s[j].max(m[j]);
                }
            }
        }
        if s.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(LabError::ZeroInput("maximal function underflows on q0"));
        }
        class.entry(s.map(dyadic_exponent)).or_default().insert(*q);
    }
    let mut out = Vec::new();
    for (n, members) in class {
        let maximal: Vec<DyadicRectangle> = members
            .iter()
            .filter(|q| !ancestors(geometry, q).iter().any(|a| members.contains(a)))
            .copied()
            .collect();
        for top in maximal {
            let rects = members
                .iter()
                .filter(|q| geometry.contains(&top, q))
                .copied();
            let tree = Tree::new(*geometry, rects)?;
            tree.require_convex()?;
            out.push(SelectedTree { n, tree });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn exhaustive_check(q0: &[DyadicRectangle], geo: &DyadicGeometry, sel: &[SelectedTree]) {
        let mut seen = BTreeSet::new();
        for s in sel {
            // Every rectangle between a member and the root is an ancestor of
            // that member; all of them must be members.
            for c in &s.tree.rects {
                for b in ancestors(geo, c)
                    .iter()
                    .filter(|b| geo.contains(&s.tree.root, b))
                {
                    assert!(s.tree.rects.contains(b));
                }
                assert!(geo.contains(&s.tree.root, c));
            }
            for q in &s.tree.rects {
                assert!(seen.insert(*q), "{q:?} in two trees");
            }
        }
        let all: BTreeSet<_> = q0.iter().copied().collect();
        assert_eq!(seen, all);
    }

    #[test]
    fn constants_form_one_class() {
        let geo = DyadicGeometry::default();
        let one = GridFunction2D::constant(16, 1.0).unwrap();
        let q0 = geo.all_rectangles(-3, 0).unwrap();
        let sel = tree_select(&q0, &geo, [&one; 3]).unwrap();
        assert_eq!(sel.len(), 1);
        // 2/9 lies in (1/8, 1/4].
        assert_eq!(sel[0].n, [-2, -2, -2]);
        exhaustive_check(&q0, &geo, &sel);
    }

    #[test]
    fn single_rectangle_gives_single_tree() {
        let geo = DyadicGeometry::default();
        let one = GridFunction2D::constant(8, 3.0).unwrap();
        let q = DyadicRectangle {
            k: -1,
            i1: 1,
            i2: 3,
        };
        let sel = tree_select(&[q], &geo, [&one; 3]).unwrap();
        assert_eq!(sel.len(), 1);
        assert_eq!(sel[0].tree.rects.len(), 1);
        assert_eq!(sel[0].tree.root, q);
    }

    #[test]
    fn random_inputs_partition_into_convex_trees() {
        let geo = DyadicGeometry::default();
        let n = 32;
        let mut r = rng::stream(5, &[112]);
        let fs: Vec<GridFunction2D> = (0..3)
            .map(|_| GridFunction2D::from_real_fn(n, |_, _| rng::normal(&mut r).powi(3)).unwrap())
            .collect();
        let q0 = geo.all_rectangles(-2, 0).unwrap();
        let sel = tree_select(&q0, &geo, [&fs[0], &fs[1], &fs[2]]).unwrap();
        assert!(sel.len() > 1);
        exhaustive_check(&q0, &geo, &sel);
    }

    #[test]
    fn rejects_zero_input_and_gaps() {
        let geo = DyadicGeometry::default();
        let one = GridFunction2D::constant(8, 1.0).unwrap();
        let zero = GridFunction2D::zeros(8).unwrap();
        let q0 = geo.all_rectangles(-1, 0).unwrap();
        assert!(matches!(
            tree_select(&q0, &geo, [&one, &zero, &one]),
            Err(LabError::ZeroInput(_))
        ));
        let gap = [
            DyadicRectangle { k: 0, i1: 0, i2: 0 },
            DyadicRectangle {
                k: -2,
                i1: 0,
                i2: 0,
            },
        ];
        assert!(matches!(
            tree_select(&gap, &geo, [&one; 3]),
            Err(LabError::NotConvex(_))
        ));
    }

    #[test]
    fn exponent_brackets_value() {
        for &s in &[0.25, 0.3, 1.0, 3.0, 2.0 / 9.0, 1e-5] {
            let k = dyadic_exponent(s);
            assert!(2f64.powi(k - 1) < s && s <= 2f64.powi(k), "{s} {k}");
        }
    }
}
