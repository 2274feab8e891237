//! Worker pool for sweeps. Results are always assembled in index order, so the
//! number of workers never changes an output.

use rayon::prelude::*;
use texel_core::fabric::BlockOutput;

use crate::error::{Error, Result};

pub struct Context {
    pub seed: u64,
    pub jobs: usize,
    pool: rayon::ThreadPool,
}

impl Context {
    /// `jobs = 0` uses every available core.
    pub fn new(seed: u64, jobs: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { seed, jobs: pool.current_num_threads(), pool })
    }

    /// `f(0..n)` in index order.
    pub fn map<T, E, F>(&self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        if self.jobs == 1 {
            return (0..n).map(f).collect();
        }
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    /// Block evaluator for [`texel_core::fabric::run_with`].
    #[allow(clippy::type_complexity)]
    pub fn blocks(
        &self,
    ) -> impl FnOnce(usize, &(dyn Fn(usize) -> texel_core::Result<BlockOutput> + Sync)) -> texel_core::Result<Vec<BlockOutput>> + '_
    {
        move |n, f| self.map(n, f)
    }

    /// Row evaluator for [`texel_core::memdevice::compatibility_sweep`].
    #[allow(clippy::type_complexity)]
    pub fn rows(
        &self,
    ) -> impl FnOnce(&[f64], &(dyn Fn(f64) -> texel_core::Result<Vec<f64>> + Sync)) -> texel_core::Result<Vec<Vec<f64>>> + '_
    {
        move |ys, f| self.map(ys.len(), |k| f(ys[k]))
    }
}
