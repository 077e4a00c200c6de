use renormlab::map::CircleMap;
use renormlab::real::{Dd, Real};

fn main() {
    let map = CircleMap::sine(0.41886498);
    let t0 = std::time::Instant::now();
    let mut x = Dd::from_f64(0.0);
    let n = 2_000_000u64;
    for _ in 0..n {
        x = map.step(x).unwrap().0;
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("dd step: {:.1} ns/step (sink {:.3})", dt / n as f64 * 1e9, x.to_f64());

    // where does it go: bare sin_cos
    let t0 = std::time::Instant::now();
    let mut acc = Dd::from_f64(0.3);
    for _ in 0..n {
        let (s, _) = acc.sin_cos_2pi();
        acc = s.mul_f64(0.124).add(Dd::from_f64(0.41886498)).add(acc).wrap_unit();
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("bare sin_cos loop: {:.1} ns (sink {:.3})", dt / n as f64 * 1e9, acc.to_f64());
}
