use renormlab::map::{CircleMap, PrecisionPolicy};
use renormlab::rotation::{tune_parameter, MapFamily, RotationTarget};

fn main() {
    let policy = PrecisionPolicy::default();
    // raw step throughput
    let map = CircleMap::sine(0.6066610634701);
    let t0 = std::time::Instant::now();
    let mut x = 0.0f64;
    let n = 5_000_000u64;
    for _ in 0..n {
        x = map.step(x).unwrap().0;
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("raw step: {:.1} ns/step (sink {x:.3})", dt / n as f64 * 1e9);

    for (name, target) in [("golden", RotationTarget::golden()), ("silver", RotationTarget::silver())] {
        let t0 = std::time::Instant::now();
        let omega = tune_parameter(MapFamily::Sine, &target, 1e-12, &policy).unwrap();
        println!("{name}: omega={omega:.15} in {:.2?}", t0.elapsed());
    }
}
