//! delta-series: f^1, the series f# attached to the newform of X0(11), and
//! the delta-Hecke operator pT_0(p).

use deltacalc::dseries::{f1_series, fsharp_expansion, hecke_p_tm, x011_newform, HeckeOptions, ModSeries, SeriesCaps};
use deltacalc::groups::{x011_short, EllipticCurveData};
use deltacalc::poly::ModRing;
use deltacalc::Result;

fn main() -> Result<()> {
    let caps = SeriesCaps::new(20, 4, 2)?;
    let f1 = f1_series(3, caps)?;
    println!("f^1 at p = 3: {f1}");
    println!("delta(f^1) = {}", f1.delta()?.truncate(-10));

    let (a4, a6) = x011_short();
    let e = EllipticCurveData::new(7, a4, a6)?;
    let f = x011_newform(40);
    let r = fsharp_expansion(&e, &f, SeriesCaps::new(20, 8, 2)?)?;
    println!("f# mod 7 (closed form): {}", r.formula);
    println!("agrees with the construction through q^20: {}", r.congruent());

    let q = ModSeries::q(5, ModRing::new(5, 1), caps);
    println!("pT_0(5) q = {}", hecke_p_tm(&q, 0, &HeckeOptions::default())?);
    let g = q.add(&q.pow(5)?.scale(&3))?;
    println!("U({g}) = {}", g.u_operator());
    Ok(())
}
