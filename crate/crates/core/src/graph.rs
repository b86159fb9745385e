//! Pixel grid graphs and their normalized Laplacian.
//!
//! Pixel `(r, c)` of an `height x width` image is vertex `r * width + c`.
//! Every pixel is joined to its (up to) eight nearest neighbours with weight
//! one, so degrees are 3 at corners, 5 along borders and 8 inside.

use crate::error::{Error, Result};

/// Compressed-row sparse matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets
            .iter()
            .find(|&&(r, c, _)| r >= n_rows || c >= n_cols)
        {
            return Err(Error::OutOfBounds(format!(
                "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
            )));
        }
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        for (i, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *o = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols
            && (0..self.n_rows).all(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i) == v)
            })
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_rows * self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * self.n_cols + j] = v;
            }
        }
        d
    }
}

/// Grid graph of an image with unit-weight 8-neighbour adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    height: usize,
    width: usize,
    adjacency: CsrMatrix,
    degrees: Vec<f64>,
}

impl GridGraph {
    /// 8-neighbour grid with unit weights, row-major vertex order.
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height < 1 || width < 1 || height * width < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid must have positive sides and at least two pixels, got {height}x{width}"
            )));
        }
        let mut triplets = Vec::with_capacity(8 * height * width);
        for r in 0..height {
            for c in 0..width {
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                        if nr < 0 || nc < 0 || nr >= height as i64 || nc >= width as i64 {
                            continue;
                        }
                        triplets.push((r * width + c, nr as usize * width + nc as usize, 1.0));
                    }
                }
            }
        }
        let n = height * width;
        let adjacency = CsrMatrix::from_triplets(n, n, triplets)?;
        let degrees = (0..n).map(|i| adjacency.row(i).1.iter().sum()).collect();
        Ok(Self {
            height,
            width,
            adjacency,
            degrees,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_vertices(&self) -> usize {
        self.height * self.width
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    pub fn laplacian(&self) -> Result<NormalizedLaplacian> {
        NormalizedLaplacian::new(self)
    }
}

/// `L = I - D^{-1/2} A D^{-1/2}`; symmetric PSD with spectrum in `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedLaplacian {
    matrix: CsrMatrix,
    sqrt_degrees: Vec<f64>,
}

impl NormalizedLaplacian {
    pub const SPECTRUM_BOUND: f64 = 2.0;

    pub fn new(graph: &GridGraph) -> Result<Self> {
        Self::from_adjacency(graph.adjacency())
    }

    /// Works for any symmetric nonnegative adjacency without isolated vertices.
    pub fn from_adjacency(adjacency: &CsrMatrix) -> Result<Self> {
        let n = adjacency.n_rows();
        if adjacency.n_cols() != n {
            return Err(Error::Shape("adjacency must be square".into()));
        }
        let degrees: Vec<f64> = (0..n).map(|i| adjacency.row(i).1.iter().sum()).collect();
        if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
            return Err(Error::Graph(format!("vertex {i} is isolated (degree 0)")));
        }
        let sqrt_degrees: Vec<f64> = degrees.iter().map(|d| d.sqrt()).collect();
        let mut triplets = Vec::with_capacity(adjacency.nnz() + n);
        for i in 0..n {
            triplets.push((i, i, 1.0));
            let (cols, vals) = adjacency.row(i);
            for (&j, &a) in cols.iter().zip(vals) {
                if j != i {
                    triplets.push((i, j, -a / (sqrt_degrees[i] * sqrt_degrees[j])));
                }
            }
        }
        Ok(Self {
            matrix: CsrMatrix::from_triplets(n, n, triplets)?,
            sqrt_degrees,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `D^{1/2} 1`, which spans the nullspace on a connected graph.
    pub fn sqrt_degrees(&self) -> &[f64] {
        &self.sqrt_degrees
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.matvec_into(x, out);
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    /// `out = (L - I) x`, the operator with spectrum in `[-1, 1]`.
    pub fn apply_shifted_into(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.matvec_into(x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o -= xi;
        }
    }
}

/// Symmetries of the grid used to test invariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AutomorphismKind {
    Identity,
    /// Quarter turn clockwise.
    Rot90,
    Rot180,
    /// Quarter turn counter-clockwise.
    Rot270,
    /// Mirror left-right.
    FlipH,
    /// Mirror top-bottom.
    FlipV,
    /// Reflection about the main diagonal.
    Transpose,
    /// Reflection about the anti-diagonal.
    AntiTranspose,
    /// Move content by `dr` rows and `dc` columns.
    Shift(i64, i64),
}

impl AutomorphismKind {
    /// The eight symmetries of the square.
    pub const DIHEDRAL: [AutomorphismKind; 8] = [
        AutomorphismKind::Identity,
        AutomorphismKind::Rot90,
        AutomorphismKind::Rot180,
        AutomorphismKind::Rot270,
        AutomorphismKind::FlipH,
        AutomorphismKind::FlipV,
        AutomorphismKind::Transpose,
        AutomorphismKind::AntiTranspose,
    ];
}

/// A vertex map of a `height x width` grid. `map[i]` is where vertex `i`
/// goes, `None` when a shift pushes it off the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridAutomorphism {
    kind: AutomorphismKind,
    height: usize,
    width: usize,
    map: Vec<Option<usize>>,
}

impl GridAutomorphism {
    pub fn new(kind: AutomorphismKind, height: usize, width: usize) -> Result<Self> {
        use AutomorphismKind::*;
        let needs_square = matches!(kind, Rot90 | Rot270 | Transpose | AntiTranspose);
        if needs_square && height != width {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} needs a square grid, got {height}x{width}"
            )));
        }
        let (h, w) = (height as i64, width as i64);
        let map = (0..height * width)
            .map(|i| {
                let (r, c) = ((i / width) as i64, (i % width) as i64);
                let (nr, nc) = match kind {
                    Identity => (r, c),
                    Rot90 => (c, h - 1 - r),
                    Rot180 => (h - 1 - r, w - 1 - c),
                    Rot270 => (w - 1 - c, r),
                    FlipH => (r, w - 1 - c),
                    FlipV => (h - 1 - r, c),
                    Transpose => (c, r),
                    AntiTranspose => (w - 1 - c, h - 1 - r),
                    Shift(dr, dc) => (r + dr, c + dc),
                };
                (nr >= 0 && nc >= 0 && nr < h && nc < w).then(|| (nr * w + nc) as usize)
            })
            .collect();
        Ok(Self {
            kind,
            height,
            width,
            map,
        })
    }

    pub fn kind(&self) -> AutomorphismKind {
        self.kind
    }

    /// Image of vertex `i`.
    pub fn map(&self, i: usize) -> Option<usize> {
        self.map[i]
    }

    /// `out[p(i)] = y[i]`. Shifts fail if they would drop nonzero values.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.map.len() {
            return Err(Error::Shape(format!(
                "signal has {} values, grid has {}",
                y.len(),
                self.map.len()
            )));
        }
        let mut out = vec![0.0; y.len()];
        for (i, &v) in y.iter().enumerate() {
            match self.map[i] {
                Some(j) => out[j] = v,
                None if v != 0.0 => {
                    let (r, c) = (i / self.width, i % self.width);
                    return Err(Error::OutOfBounds(format!(
                        "{:?} moves nonzero pixel ({r}, {c}) off the {}x{} grid",
                        self.kind, self.height, self.width
                    )));
                }
                None => {}
            }
        }
        Ok(out)
    }

    /// Maps a vertex set; vertices that leave the grid are an error.
    pub fn apply_to_set(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut out = set
            .iter()
            .map(|&i| {
                self.map[i].ok_or_else(|| {
                    Error::OutOfBounds(format!("vertex {i} leaves the grid under {:?}", self.kind))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        Ok(out)
    }
}
