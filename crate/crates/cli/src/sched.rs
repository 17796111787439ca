//! Job scheduling on a fixed-size worker pool.
//!
//! Jobs share nothing and carry their own seeds, so results are independent
//! of the worker count. Results come back in job order for a single writer.

use std::panic::{catch_unwind, AssertUnwindSafe};

use crate::error::{CliError, CliResult};
use rayon::prelude::*;

pub struct JobResult<R> {
    pub value: R,
    pub attempts: u32,
}

/// Runs `f` on every job, retrying a failed job once. A job that fails
/// twice aborts the run.
pub fn run_jobs<J, R, F>(pool: &rayon::ThreadPool, jobs: &[J], f: F) -> CliResult<Vec<JobResult<R>>>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> CliResult<R> + Sync,
{
    pool.install(|| {
        jobs.par_iter()
            .enumerate()
            .map(|(i, job)| {
                let mut last = None;
                for attempt in 1..=2 {
                    match catch_unwind(AssertUnwindSafe(|| f(job))) {
                        Ok(Ok(value)) => {
                            return Ok(JobResult {
                                value,
                                attempts: attempt,
                            })
                        }
                        // User errors are deterministic; retrying cannot help.
                        Ok(Err(e @ CliError::User(_))) => return Err(e),
                        Ok(Err(e)) => last = Some(e.to_string()),
                        Err(panic) => last = Some(panic_message(&panic)),
                    }
                }
                Err(CliError::Internal(format!(
                    "job {i} failed twice: {}",
                    last.unwrap_or_default()
                )))
            })
            .collect()
    })
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".into()
    }
}

pub fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}
