use renormlab::map::{CircleMap, PrecisionPolicy};
use renormlab::rotation::rotation_number;

fn main() {
    let policy = PrecisionPolicy::default();
    let map = CircleMap::sine(0.606661063470114);
    for depth in [10, 15, 20, 25, 29] {
        let t0 = std::time::Instant::now();
        match rotation_number(&map, depth, &policy) {
            Ok((cf, data)) => println!(
                "depth {depth}: quots ok={} backend={} steps={} in {:.1?}",
                cf.quotients.iter().all(|&a| a == 1),
                data.backend,
                data.orbit_steps,
                t0.elapsed()
            ),
            Err(e) => println!("depth {depth}: {e}"),
        }
    }
}
