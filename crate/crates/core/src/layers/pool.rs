//! Dynamic pooling: per feature map, keep the `J` largest values inside the
//! previous active set and zero everything else. Values are not moved, so
//! the pooled maps still live on the original grid graph.

use crate::error::{Error, Result};

/// Active vertices after a pooling layer: one set per feature map and
/// their union. All sets are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveNodeSet {
    num_vertices: usize,
    omega: Vec<usize>,
    per_map: Vec<Vec<usize>>,
}

impl ActiveNodeSet {
    /// Every vertex active, no per-map sets: the state before any pooling.
    pub fn all(num_vertices: usize) -> Self {
        Self {
            num_vertices,
            omega: (0..num_vertices).collect(),
            per_map: Vec::new(),
        }
    }

    /// Builds from per-map sets; the union is computed here.
    pub fn from_sets(num_vertices: usize, mut per_map: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; num_vertices];
        for set in per_map.iter_mut() {
            set.sort_unstable();
            set.dedup();
            for &v in set.iter() {
                if v >= num_vertices {
                    return Err(Error::OutOfBounds(format!(
                        "vertex {v} in a graph of {num_vertices}"
                    )));
                }
                seen[v] = true;
            }
        }
        let omega = (0..num_vertices).filter(|&v| seen[v]).collect();
        Ok(Self {
            num_vertices,
            omega,
            per_map,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn per_map(&self) -> &[Vec<usize>] {
        &self.per_map
    }

    pub fn is_all(&self) -> bool {
        self.omega.len() == self.num_vertices
    }

    /// `self ⊇ other`.
    pub fn contains_all(&self, other: &ActiveNodeSet) -> bool {
        other
            .omega
            .iter()
            .all(|v| self.omega.binary_search(v).is_ok())
    }
}

#[derive(Debug, Clone, Default)]
pub struct PoolTape {
    selected: Vec<Vec<usize>>,
    num_vertices: usize,
}

/// Greedy top-`j` per map within `prev.omega()`; ties go to the lower vertex
/// index. Returns the pooled maps and the new active sets.
pub fn dynamic_pool(
    maps: &[Vec<f64>],
    prev: &ActiveNodeSet,
    j: usize,
    tape: &mut PoolTape,
) -> Result<(Vec<Vec<f64>>, ActiveNodeSet)> {
    if j == 0 {
        return Err(Error::InvalidArgument(
            "pooling must keep at least one vertex".into(),
        ));
    }
    if prev.omega.is_empty() {
        return Err(Error::State("previous active set is empty".into()));
    }
    let n = prev.num_vertices;
    let keep = j.min(prev.omega.len());
    let mut pooled = Vec::with_capacity(maps.len());
    let mut sets = Vec::with_capacity(maps.len());
    for z in maps {
        if z.len() != n {
            return Err(Error::Shape(format!(
                "map has {} values, graph has {n}",
                z.len()
            )));
        }
        let mut cand = prev.omega.clone();
        cand.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
        cand.truncate(keep);
        cand.sort_unstable();
        let mut out = vec![0.0; n];
        for &v in &cand {
            out[v] = z[v];
        }
        pooled.push(out);
        sets.push(cand);
    }
    tape.selected = sets.clone();
    tape.num_vertices = n;
    let active = ActiveNodeSet::from_sets(n, sets)?;
    Ok((pooled, active))
}

/// Gradient flows through the selected vertices only.
pub fn dynamic_pool_backward(tape: &PoolTape, grad_pooled: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if grad_pooled.len() != tape.selected.len() {
        return Err(Error::Shape(format!(
            "{} gradients for {} pooled maps",
            grad_pooled.len(),
            tape.selected.len()
        )));
    }
    Ok(tape
        .selected
        .iter()
        .zip(grad_pooled)
        .map(|(set, g)| {
            let mut out = vec![0.0; tape.num_vertices];
            for &v in set {
                out[v] = g[v];
            }
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_two() {
        let mut tape = PoolTape::default();
        let (p, a) = dynamic_pool(
            &[vec![5.0, 1.0, 3.0, 2.0]],
            &ActiveNodeSet::all(4),
            2,
            &mut tape,
        )
        .unwrap();
        assert_eq!(a.per_map()[0], vec![0, 2]);
        assert_eq!(p[0], vec![5.0, 0.0, 3.0, 0.0]);
    }

    #[test]
    fn keep_everything() {
        let mut tape = PoolTape::default();
        let z = vec![0.1, -2.0, 3.0, 0.5];
        let (p, a) = dynamic_pool(
            std::slice::from_ref(&z),
            &ActiveNodeSet::all(4),
            9,
            &mut tape,
        )
        .unwrap();
        assert_eq!(a.omega(), &[0, 1, 2, 3]);
        assert_eq!(p[0], z);
    }

    #[test]
    fn union_of_per_map_sets() {
        let mut tape = PoolTape::default();
        let maps = [vec![9.0, 0.0, 0.0, 1.0], vec![0.0, 9.0, 1.0, 0.0]];
        let (_, a) = dynamic_pool(&maps, &ActiveNodeSet::all(4), 1, &mut tape).unwrap();
        assert_eq!(a.per_map(), &[vec![0], vec![1]]);
        assert_eq!(a.omega(), &[0, 1]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let mut tape = PoolTape::default();
        let (_, a) = dynamic_pool(
            &[vec![1.0, 2.0, 2.0, 2.0]],
            &ActiveNodeSet::all(4),
            2,
            &mut tape,
        )
        .unwrap();
        assert_eq!(a.per_map()[0], vec![1, 2]);
    }

    #[test]
    fn selection_stays_inside_previous_set() {
        let mut tape = PoolTape::default();
        let prev = ActiveNodeSet::from_sets(5, vec![vec![1, 3]]).unwrap();
        let (p, a) =
            dynamic_pool(&[vec![10.0, 1.0, 10.0, 2.0, 10.0]], &prev, 1, &mut tape).unwrap();
        assert_eq!(a.omega(), &[3]);
        assert_eq!(p[0], vec![0.0, 0.0, 0.0, 2.0, 0.0]);
        assert!(prev.contains_all(&a));
    }

    #[test]
    fn empty_previous_set() {
        let mut tape = PoolTape::default();
        let prev = ActiveNodeSet::from_sets(3, vec![vec![]]).unwrap();
        assert!(matches!(
            dynamic_pool(&[vec![0.0; 3]], &prev, 1, &mut tape),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn backward_masks() {
        let mut tape = PoolTape::default();
        dynamic_pool(
            &[vec![5.0, 1.0, 3.0, 2.0]],
            &ActiveNodeSet::all(4),
            2,
            &mut tape,
        )
        .unwrap();
        let g = dynamic_pool_backward(&tape, &[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        assert_eq!(g[0], vec![1.0, 0.0, 3.0, 0.0]);
        let g = dynamic_pool_backward(&tape, &[vec![0.0, 2.0, 0.0, 4.0]]).unwrap();
        assert_eq!(g[0], vec![0.0; 4]);

        dynamic_pool(
            &[vec![5.0, 1.0, 3.0, 2.0]],
            &ActiveNodeSet::all(4),
            4,
            &mut tape,
        )
        .unwrap();
        let up = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(
            dynamic_pool_backward(&tape, std::slice::from_ref(&up)).unwrap()[0],
            up
        );
    }
}
