use renormlab::map::{CircleMap, PrecisionPolicy};

fn main() {
    // replicate the walker's error recursion on the raw orbit
    let map = CircleMap::sine(0.606661063470114);
    let policy = PrecisionPolicy::default();
    let orbit = map.orbit(2_000_000, &policy);
    match orbit {
        Ok(o) => println!("orbit fine, err={:.3e}", o.err),
        Err(e) => println!("orbit: {e}"),
    }
    let mut x = 0.0f64;
    let mut err = 0.0f64;
    let mut worst = 0.0f64;
    for k in 0..2_000_000u64 {
        let (y, s) = map.step(x).unwrap();
        err = err * s.abs() + 4.0 * f64::EPSILON;
        if err > worst {
            worst = err;
            if k % 1 == 0 && (worst > 1e-10) && k < 200_000 {
            }
        }
        x = y;
    }
    println!("err after 2M steps: {err:.3e}, worst seen {worst:.3e}");
}
