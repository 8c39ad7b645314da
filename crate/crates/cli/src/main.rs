fn main() {
    if let Some(n) = std::env::var("RT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .expect("thread pool is configured once");
        }
    }
    std::process::exit(abel_radon_cli::run(std::env::args_os()));
}
