//! delta-linear equations, the arithmetic logarithmic derivative and a
//! finite-precision delta-Galois group.

use deltacalc::dlinear::{
    check_flow_compatibility, delta_galois_group, delta_linear_residual, ldelta, solve_delta_linear, DeltaFlow,
    DeltaMatrix, FlowCheckOptions, GaloisSearch, QuadraticMapData, SubRing,
};
use deltacalc::{PadicCtx, Result};

fn main() -> Result<()> {
    let ctx = PadicCtx::new(7, 8)?;
    let alpha = DeltaMatrix::from_i64(&ctx, 2, &[1, 2, 0, 3])?;
    let u0 = DeltaMatrix::identity(&ctx, 2);
    let u = solve_delta_linear(&alpha, &u0, 8)?;
    println!("u = {u}");
    println!("residual = {}", delta_linear_residual(&alpha, &u)?);

    let flow = DeltaFlow::canonical(7, 2);
    let l = ldelta(&u, &flow)?;
    println!("l_delta(u) = {l}  (alpha = {alpha})");

    let g = delta_galois_group(&u.reduce_to(3), &SubRing::Zp, &GaloisSearch::default())?;
    println!("delta-Galois group mod 7^{}: {} elements, closed: {}", g.precision, g.len(), g.is_closed());

    for name in ["gl2", "so3", "sp2"] {
        let h = QuadraticMapData::from_name(name)?;
        let opts = FlowCheckOptions { samples: 5, ..Default::default() };
        let r = check_flow_compatibility(&DeltaFlow::canonical(3, h.n), &h, &opts)?;
        println!("{name}: horizontal {}, symmetric {}", r.horizontal.exact, r.symmetric.exact);
    }
    Ok(())
}
