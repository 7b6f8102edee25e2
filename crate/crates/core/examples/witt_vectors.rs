//! Witt vector arithmetic, ghost components, the comonad map and a presentation of W_2.

use deltacalc::witt::{w1_hom_check, witt_presentation, WittVector};
use deltacalc::{PadicCtx, Result};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn w(p: u64, v: &[i64]) -> Result<WittVector<BigInt>> {
    WittVector::new(p, v.iter().map(|&x| BigInt::from(x)).collect())
}

fn main() -> Result<()> {
    let v1 = w(2, &[0, 1])?;
    println!("v1 * v1 = {} at p = 2", v1.mul(&v1)?);
    let (a, b) = (w(3, &[1, 2, 0])?, w(3, &[2, 0, 1])?);
    let s = a.add(&b)?;
    println!("{a} + {b} = {s}, ghost {:?}", s.ghost());
    println!("F({s}) = {}, V({s}) = {}", s.frobenius()?, s.verschiebung());

    let c = w(2, &[1, 1, 0])?.comonad_map(1, 1)?;
    println!("W_2 -> W_1(W_1): {c}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pres = witt_presentation(2, 2, 30, &mut rng)?;
    println!("W_2(R) at p = 2:");
    for r in pres.scheme.relations() {
        println!("  {r}");
    }

    let ctx = PadicCtx::new(5, 6)?;
    let sample: Vec<_> = (0..8).map(|_| ctx.random(&mut rng)).collect();
    println!("a -> (a, delta a) is a ring map into W_1: {}", w1_hom_check(&sample)?.holds());
    Ok(())
}
