//! Airy functions and their Wronskian across the oscillatory and decaying
//! sides, plus the exponentially scaled form used far from the turning point.

use qsource::specfun::{airy, airy_scaled, WRONSKIAN};

fn main() -> qsource::Result<()> {
    println!("{:>8} {:>14} {:>14} {:>14} {:>14} {:>10}", "x", "Ai", "Ai'", "Bi", "Bi'", "W*pi - 1");
    for x in [-50.0, -10.0, -2.338_107_410_46, -1.0, 0.0, 1.0, 5.0, 20.0] {
        let a = airy(x)?;
        println!(
            "{x:>8.3} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.1e}",
            a.ai,
            a.ai_prime,
            a.bi,
            a.bi_prime,
            a.wronskian() / WRONSKIAN - 1.0
        );
    }
    // Ai(500) underflows; the scaled pair keeps the digits
    let s = airy_scaled(500.0)?;
    println!("Ai(500) = {:.6e} * exp({:.3})", s.ai, -s.zeta);
    Ok(())
}
