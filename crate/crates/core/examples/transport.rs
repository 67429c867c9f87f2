//! The quantitative law: optimal couplings of a mix of predicates with a
//! distribution, and the law probes.

use condtrace::transport::{
    check_quantale_laws, optimal_coupling_value, pq_unit, Dist, Omega, OmegaPredicate, QuantaleProbes,
};

fn main() {
    let p = OmegaPredicate::new(vec![Omega::ratio(0, 1), Omega::ratio(1, 2), Omega::one()]);
    let q = OmegaPredicate::new(vec![Omega::one(), Omega::ratio(1, 4), Omega::zero()]);
    let m = Dist::new([(p, condtrace::transport::rational(1, 2)), (q, condtrace::transport::rational(1, 2))]).unwrap();
    let mu = Dist::uniform(3);
    let c = optimal_coupling_value(&m, &mu).unwrap();
    println!("vartheta(M)(mu) = {}", c.value);
    for ((pred, x), w) in c.coupling.support() {
        println!("  {pred} at {x}: {w}");
    }

    // the unit triangle holds at point masses but not in general
    let nu = Dist::point(0);
    let unit = nu.map(|&x| pq_unit(2, x));
    println!("\nvartheta(D eta(nu))(uniform) = {}", optimal_coupling_value(&unit, &Dist::uniform(2)).unwrap().value);
    println!("\n{}", check_quantale_laws(&QuantaleProbes::seeded(2, 8, 0)).unwrap());
}
