use std::time::Instant;
fn main() {
    let ch = onebit::channels::make_prevedel();
    let opts = onebit::radius::SolverOptions { restarts: 64, ..Default::default() };
    let t0 = Instant::now();
    let r = onebit::assist::succ_qn(&ch, 2, &opts).unwrap();
    let dt = t0.elapsed();
    let expected = 2.0/3.0 + 1.0/(3.0*std::f64::consts::SQRT_2);
    println!("succ_q2(prevedel) = {:.9} (expected {:.9}, err {:.2e}) in {:.1?}", r.value, expected, (r.value-expected).abs(), dt);
    let t0 = Instant::now();
    let red = onebit::assist::succ_q2_prevedel_reduced(&opts);
    println!("reduced = {:.9} (err {:.2e}) in {:.1?}", red, (red-expected).abs(), t0.elapsed());
}
