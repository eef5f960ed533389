use std::sync::OnceLock;

/// Environment variable capping the number of worker threads (0 = auto).
pub const THREADS_ENV: &str = "NCVEM_THREADS";

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

/// Shared worker pool, sized from `NCVEM_THREADS` on first use.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .thread_name(|i| format!("ncvem-worker-{i}"))
            .build()
            .expect("failed to build worker pool")
    })
}
