use comfact::mat::{opnorm, random_zero_diag};
use comfact::factor::{factor_claim1, choose_schedule};

#[test]
fn profile_pieces() {
    for m in [64usize, 256, 512] {
        let a = random_zero_diag(m, 1).unwrap();
        let t = std::time::Instant::now();
        let r = opnorm(&a, 1e-8, 20_000).unwrap();
        println!("opnorm m={m}: {:?} iters={} conv={}", t.elapsed(), r.iterations, r.converged);
    }
    for m in [64usize, 256] {
        let a = random_zero_diag(m, 1).unwrap();
        let sched = choose_schedule(m).unwrap();
        let t = std::time::Instant::now();
        let f = factor_claim1(&a, &sched).unwrap();
        println!("claim1 m={m}: {:?} residual={:.2e}", t.elapsed(), f.residual);
        let t = std::time::Instant::now();
        let r = opnorm(&f.c, 1e-8, 20_000).unwrap();
        println!("  opnorm(C) m={m}: {:?} iters={} conv={}", t.elapsed(), r.iterations, r.converged);
    }
}
