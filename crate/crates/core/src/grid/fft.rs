//! Cubic 3-D complex transforms built from 1-D rustfft plans.
//!
//! Storage is x-fastest: index = i + n*(j + n*k). Transforms are unnormalized;
//! the field layer applies the 1/n³ factor on the forward side.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Lines gathered per strided batch.
const LINE_BATCH: usize = 8;

#[derive(Clone)]
pub(crate) struct Fft3d {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl Fft3d {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3d {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn size(&self) -> usize {
        self.n
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, Direction::Forward);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, Direction::Inverse);
    }

    fn plan(&self, dir: Direction) -> &Arc<dyn Fft<f64>> {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        }
    }

    fn run(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.n;
        let slab = n * n;
        assert_eq!(data.len(), slab * n, "buffer does not match transform size");
        let fft = self.plan(dir);
        let width = LINE_BATCH.min(n);

        // x lines are contiguous; y lines are gathered in small batches per plane.
        data.par_chunks_mut(slab).for_each(|plane| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(plane, &mut scratch);
            let mut buf = vec![Complex64::default(); width * n];
            for i0 in (0..n).step_by(width) {
                let w = width.min(n - i0);
                for j in 0..n {
                    for b in 0..w {
                        buf[b * n + j] = plane[i0 + b + n * j];
                    }
                }
                fft.process_with_scratch(&mut buf[..w * n], &mut scratch);
                for j in 0..n {
                    for b in 0..w {
                        plane[i0 + b + n * j] = buf[b * n + j];
                    }
                }
            }
        });

        // z lines: each batch of adjacent columns owns its row segment in every plane.
        let mut batches: Vec<Vec<&mut [Complex64]>> =
            (0..slab.div_ceil(width)).map(|_| Vec::with_capacity(n)).collect();
        for plane in data.chunks_mut(slab) {
            for (b, seg) in plane.chunks_mut(width).enumerate() {
                batches[b].push(seg);
            }
        }
        batches.into_par_iter().for_each(|mut rows| {
            let w = rows[0].len();
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            let mut buf = vec![Complex64::default(); w * n];
            for (k, row) in rows.iter().enumerate() {
                for b in 0..w {
                    buf[b * n + k] = row[b];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, row) in rows.iter_mut().enumerate() {
                for b in 0..w {
                    row[b] = buf[b * n + k];
                }
            }
        });
    }
}

impl std::fmt::Debug for Fft3d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3d").field("n", &self.n).finish()
    }
}
