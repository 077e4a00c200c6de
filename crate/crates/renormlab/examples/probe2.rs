use renormlab::map::{CircleMap, PrecisionPolicy};
use renormlab::rotation::rotation_number;

fn main() {
    let policy = PrecisionPolicy::default();
    let map = CircleMap::sine(0.418864986418970);
    for depth in [12, 14, 16] {
        let t0 = std::time::Instant::now();
        match rotation_number(&map, depth, &policy) {
            Ok((cf, data)) => println!(
                "depth {depth}: ok={} backend={} steps={} in {:.1?}",
                cf.quotients.iter().all(|&a| a == 2),
                data.backend, data.orbit_steps, t0.elapsed()
            ),
            Err(e) => println!("depth {depth}: {e}"),
        }
    }
}
