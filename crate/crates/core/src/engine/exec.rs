use alloc::vec::Vec;

/// Runs `f` over every job and returns the results in job order.
///
/// With the `std` feature and `threads > 1`, jobs are pulled from a shared
/// queue by scoped worker threads. Without `std` the jobs run serially.
#[cfg(feature = "std")]
pub(crate) fn run_jobs<J, R, F>(jobs: Vec<J>, threads: usize, f: F) -> Vec<R>
where
    J: Send,
    R: Send,
    F: Fn(J) -> R + Sync,
{
    use std::sync::Mutex;

    let n = jobs.len();
    if threads <= 1 || n <= 1 {
        return jobs.into_iter().map(f).collect();
    }
    let queue = Mutex::new(jobs.into_iter().enumerate());
    let results = Mutex::new(Vec::with_capacity(n));
    std::thread::scope(|scope| {
        for _ in 0..threads.min(n) {
            scope.spawn(|| loop {
                let next = queue.lock().expect("job queue poisoned").next();
                let Some((idx, job)) = next else { break };
                let r = f(job);
                results.lock().expect("result list poisoned").push((idx, r));
            });
        }
    });
    let mut results = results.into_inner().expect("result list poisoned");
    results.sort_unstable_by_key(|(idx, _)| *idx);
    results.into_iter().map(|(_, r)| r).collect()
}

#[cfg(not(feature = "std"))]
pub(crate) fn run_jobs<J, R, F>(jobs: Vec<J>, _threads: usize, f: F) -> Vec<R>
where
    F: Fn(J) -> R,
{
    jobs.into_iter().map(f).collect()
}
