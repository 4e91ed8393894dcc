//! Symmetric-normalized adjacency with self-loops, stored CSR:
//! A_hat = D_tilde^{-1/2} (A + I) D_tilde^{-1/2}.

use crate::error::{GlanceError, Result};
use crate::graph::TextAttributedGraph;
use crate::nn::DenseMatrix;

#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    n: usize,
    row_offsets: Vec<usize>,
    col_ids: Vec<u32>,
    values: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_ids.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_ids[span.clone()], &self.values[span])
    }

    /// Sparse product `A_hat * x`.
    pub fn spmm(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.n {
            return Err(GlanceError::Dim(format!(
                "adjacency over {} nodes applied to {} rows",
                self.n,
                x.rows()
            )));
        }
        let mut out = DenseMatrix::zeros(self.n, x.cols());
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let out_row = out.row_mut(r);
            for (&c, &w) in cols.iter().zip(vals) {
                let x_row = x.row(c as usize);
                for (o, &xv) in out_row.iter_mut().zip(x_row) {
                    *o += w * xv;
                }
            }
        }
        Ok(out)
    }
}

pub fn normalize_adjacency(g: &TextAttributedGraph) -> NormalizedAdjacency {
    let n = g.num_nodes();
    // degree of A + I
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt())
        .collect();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_ids = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for v in 0..n {
        // neighbor lists are sorted; merge the self-loop in id order
        let mut inserted_self = false;
        for &u in g.neighbors(v) {
            if !inserted_self && (u as usize) > v {
                col_ids.push(v as u32);
                values.push(inv_sqrt[v] * inv_sqrt[v]);
                inserted_self = true;
            }
            col_ids.push(u);
            values.push(inv_sqrt[v] * inv_sqrt[u as usize]);
        }
        if !inserted_self {
            col_ids.push(v as u32);
            values.push(inv_sqrt[v] * inv_sqrt[v]);
        }
        row_offsets.push(col_ids.len());
    }
    NormalizedAdjacency {
        n,
        row_offsets,
        col_ids,
        values,
    }
}
