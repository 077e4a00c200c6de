fn main() {
    let policy = renormlab::map::PrecisionPolicy::default();
    for k in 0..14 {
        let omega = 0.25 + 0.05 * k as f64;
        let map = renormlab::map::CircleMap::sine(omega);
        match renormlab::rotation::rotation_number(&map, 4, &policy) {
            Ok((cf, data)) => println!("omega={omega:.3} quots={:?} value={:.9} backend={}", cf.quotients, cf.value(), data.backend),
            Err(e) => println!("omega={omega:.3} err={e}"),
        }
    }
}
