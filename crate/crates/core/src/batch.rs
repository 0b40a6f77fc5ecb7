//! Crate-internal batched grid synthesis: (samples × modes) · (modes × nodes)
//! as one GEMM per block, which is what keeps the Monte Carlo L^p evaluations
//! compute-bound.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2};

pub(crate) const BATCH_ROWS: usize = 128;

pub(crate) struct BatchSynth {
    coeff: Array2<f64>,
    fields: Array2<f64>,
}

impl BatchSynth {
    pub fn new(n_modes: usize, grid_len: usize) -> Self {
        BatchSynth {
            coeff: Array2::zeros((BATCH_ROWS, n_modes)),
            fields: Array2::zeros((BATCH_ROWS, grid_len)),
        }
    }

    pub fn capacity(&self) -> usize {
        BATCH_ROWS
    }

    pub fn coeff_row_slice_mut(&mut self, row: usize) -> &mut [f64] {
        self.coeff
            .slice_mut(s![row, ..])
            .into_slice_memory_order()
            .expect("contiguous row")
    }

    /// Multiply the first `rows` coefficient rows against the mode values and
    /// return the synthesized fields (rows × grid nodes).
    pub fn synthesize(&mut self, values: &ArrayView2<'_, f64>, rows: usize) -> ArrayView2<'_, f64> {
        debug_assert_eq!(self.coeff.ncols(), values.nrows());
        if rows > 0 {
            let a = self.coeff.slice(s![0..rows, ..]);
            let mut c = self.fields.slice_mut(s![0..rows, ..]);
            general_mat_mul(1.0, &a, values, 0.0, &mut c);
        }
        self.fields.slice(s![0..rows, ..])
    }
}
