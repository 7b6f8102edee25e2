//! p-derivations on Z_p and on an unramified extension.

use deltacalc::{PadicCtx, Result};

fn main() -> Result<()> {
    let ctx = PadicCtx::new(5, 10)?;
    for a in [0i64, 1, 2, 3, -1, 10] {
        let x = ctx.from_i64(a);
        println!("delta({a}) = {}", x.fermat_quotient()?);
    }

    // Teichmüller lifts are the fixed points of x -> x^p, so delta kills them.
    let t = ctx.teichmuller_int(2);
    println!("teichmuller(2) = {t}, delta = {}", t.fermat_quotient()?);

    let jet = ctx.from_i64(2).jet(3)?;
    let shown: Vec<String> = jet.iter().map(|x| format!("{x} (mod 5^{})", x.prec())).collect();
    println!("jet of 2: {}", shown.join(", "));

    // W(F_9): Frobenius acts on the generator.
    let ext = PadicCtx::with_extension(3, 6, 2, None)?;
    let g = ext.generator();
    println!("in W(F_9): g = {g}, phi(g) = {}, delta(g) = {}", g.frobenius(), g.fermat_quotient()?);
    Ok(())
}
