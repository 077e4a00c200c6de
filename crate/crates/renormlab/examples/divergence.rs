use renormlab::map::CircleMap;
use renormlab::real::{Dd, Real};

fn main() {
    for (name, omega, n) in [
        ("silver", 0.418864986418970_f64, 6_000_000u64),
        ("golden", 0.606661063470114, 4_400_000),
    ] {
        let map = CircleMap::sine(omega);
        let mut xf = 0.0f64;
        let mut xd = Dd::from_f64(0.0);
        let mut worst: f64 = 0.0;
        let mut at = 0u64;
        for k in 0..n {
            xf = map.step(xf).unwrap().0;
            xd = map.step(xd).unwrap().0;
            let d = (xf - xd.to_f64()).abs();
            let d = d.min(1.0 - d); // circle distance
            if d > worst {
                worst = d;
                at = k;
            }
        }
        println!("{name}: max |f64 - dd| over {n} steps = {worst:.3e} (at step {at})");
    }
}
