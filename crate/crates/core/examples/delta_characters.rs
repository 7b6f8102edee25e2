//! delta-characters of G_m and of an elliptic curve, and kernel group laws.

use deltacalc::groups::{
    elliptic_delta_character, gm_delta_character, kernel_law, x011_short, EllipticCurveData, FormalGroupData,
};
use deltacalc::text::print_poly;
use deltacalc::{PadicCtx, Result};

fn main() -> Result<()> {
    let psi = gm_delta_character(3, 6)?;
    println!("G_m, p = 3: {}", psi.to_text());
    let ctx = PadicCtx::new(3, 10)?;
    let (a, b) = (ctx.from_i64(2), ctx.from_i64(7));
    let lhs = psi.eval_gm(&a.mul(&b))?;
    let rhs = psi.eval_gm(&a)?.add(&psi.eval_gm(&b)?);
    println!("psi(2*7) = {lhs}, psi(2) + psi(7) = {rhs} (mod 3^{})", lhs.prec().min(rhs.prec()));

    let (a4, a6) = x011_short();
    let e = EllipticCurveData::new(7, a4.clone(), a6.clone())?;
    println!("X0(11) at p = 7: a_p = {}", e.a_p);
    let psi = elliptic_delta_character(&e, 4, 8)?;
    println!("psi = {}", psi.to_text());

    let fg = FormalGroupData::multiplicative(3, 5)?;
    let vars = fg.vars.with_order(2);
    for (j, l) in kernel_law(&fg, 2, 5)?.iter().enumerate() {
        println!("kernel law of G_m, component {}: {}", j + 1, print_poly(&vars, l));
    }
    let fg = FormalGroupData::elliptic(7, &a4, &a6, 5)?;
    let vars = fg.vars.with_order(1);
    println!("kernel law of X0(11) at 7: {}", print_poly(&vars, &kernel_law(&fg, 1, 5)?[0]));
    Ok(())
}
