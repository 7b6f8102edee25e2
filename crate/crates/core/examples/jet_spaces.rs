//! Jet spaces of mu_2 over Z_2, jets of points and ideal membership mod p.

use deltacalc::deltapoly::DeltaPoly;
use deltacalc::jetspace::{build_jet, eval_jet_relations, ideal_membership_mod_p, jet_of_point, SchemePresentation};
use deltacalc::{PadicCtx, Result};

fn main() -> Result<()> {
    let mu2 = SchemePresentation::new(2, &["x"], &["x^2 - 1"], "mu2")?;
    for n in 1..=2 {
        let j = build_jet(&mu2, n)?;
        println!("J^{n}(mu2):");
        for r in j.relations() {
            println!("  {r}");
        }
    }

    let j = build_jet(&mu2, 2)?;
    let ctx = PadicCtx::new(2, 10)?;
    let jet = jet_of_point(&mu2, 2, &[ctx.from_i64(-1)])?;
    let values = eval_jet_relations(&j, &ctx, &jet)?;
    println!("jet of -1: {:?}", jet[0]);
    println!("relations vanish on it: {}", values.iter().all(|v| v.is_zero()));

    for g in ["x^2*x' + x'", "x^4 - 1", "x'", "x''"] {
        let poly = DeltaPoly::parse(j.vars(), g)?;
        println!("{g} in the ideal mod 2: {}", ideal_membership_mod_p(&poly, &j)?);
    }
    Ok(())
}
