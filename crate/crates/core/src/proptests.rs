//! Randomized invariants across modules.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use crate::cli::files::{parse_elem, MatrixFile};
use crate::deltapoly::{DeltaPoly, JetVarSet};
use crate::dlinear::DeltaMatrix;
use crate::dseries::{min_opt, parse_series, SeriesCaps};
use crate::padic::PadicCtx;
use crate::poly::Rationals;
use crate::witt::WittVector;

fn prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(2u64), Just(3), Just(5), Just(7)]
}

fn join_terms(parts: impl Iterator<Item = (i64, String)>) -> String {
    let mut out = String::from("0");
    for (c, m) in parts {
        let sign = if c < 0 { '-' } else { '+' };
        out.push_str(&format!(" {sign} {}*{m}", c.abs()));
    }
    out
}

fn series_text(terms: &[(i64, u32, u32)]) -> String {
    join_terms(terms.iter().map(|&(c, e, j)| (c, format!("q^{e}*q'^{j}"))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn padic_delta_axioms(p in prime(), a in any::<i64>(), b in any::<i64>()) {
        let ctx = PadicCtx::new(p, 10).unwrap();
        let (a, b) = (ctx.from_i64(a), ctx.from_i64(b));
        let (da, db) = (a.fermat_quotient().unwrap(), b.fermat_quotient().unwrap());
        let cp = a.pow(p).add(&b.pow(p)).sub(&a.add(&b).pow(p)).div_p().unwrap();
        prop_assert_eq!(a.add(&b).fermat_quotient().unwrap(), da.add(&db).add(&cp));
        let rhs = a.pow(p).mul(&db).add(&b.pow(p).mul(&da)).add(&da.mul(&db).mul_p_pow(1));
        prop_assert_eq!(a.mul(&b).fermat_quotient().unwrap(), rhs);
    }

    #[test]
    fn padic_text_round_trip(p in prime(), n in 1u32..20, a in any::<i64>(), d in 1i64..1000) {
        let ctx = PadicCtx::new(p, n).unwrap();
        if let Ok(x) = ctx.from_rational(&BigRational::new(a.into(), d.into())) {
            prop_assert_eq!(parse_elem(&ctx, &x.to_string()).unwrap().reduce_to(x.prec()), x);
        }
    }

    #[test]
    fn witt_ghost_is_a_ring_map(p in prime(), u in prop::collection::vec(-60i64..60, 1..4), seed in any::<u64>()) {
        let len = u.len();
        let v: Vec<i64> = (0..len).map(|i| ((seed >> (8 * i)) & 0x7f) as i64 - 64).collect();
        let u = WittVector::new(p, u.into_iter().map(BigInt::from).collect()).unwrap();
        let v = WittVector::new(p, v.into_iter().map(BigInt::from).collect()).unwrap();
        let sum: Vec<BigInt> = u.ghost().iter().zip(v.ghost()).map(|(x, y)| x + y).collect();
        let prod: Vec<BigInt> = u.ghost().iter().zip(v.ghost()).map(|(x, y)| x * y).collect();
        prop_assert_eq!(u.add(&v).unwrap().ghost(), sum);
        prop_assert_eq!(u.mul(&v).unwrap().ghost(), prod);
        prop_assert_eq!(WittVector::<BigInt>::parse(p, &u.to_string()).unwrap(), u);
    }

    #[test]
    fn delta_poly_text_round_trip(terms in prop::collection::vec((-9i64..10, 0u32..3, 0u32..3, 0u32..3), 0..5)) {
        let vs = JetVarSet::new(&["x", "y"], 1, 3).unwrap();
        let text = join_terms(terms.iter().map(|&(c, a, b, e)| (c, format!("x^{a}*y^{b}*x'^{e}"))));
        let f = DeltaPoly::parse(&vs, &text).unwrap();
        prop_assert_eq!(DeltaPoly::parse(&vs, &f.to_string()).unwrap(), f);
    }

    #[test]
    fn matrix_file_round_trip(p in prime(), n in 1usize..4, seed in any::<u64>()) {
        use rand::SeedableRng;
        let ctx = PadicCtx::new(p, 9).unwrap();
        let a = DeltaMatrix::random(&ctx, n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let json = serde_json::to_string(&MatrixFile::of(&a)).unwrap();
        let back: MatrixFile = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.to_matrix(&ctx).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn series_delta_axioms(
        p in prop_oneof![Just(2u64), Just(3)],
        a in prop::collection::vec((-4i64..5, 1u32..4, 0u32..2), 1..3),
        b in prop::collection::vec((-4i64..5, 0u32..4, 0u32..2), 1..3),
    ) {
        let c = SeriesCaps { q_degree: 10, jet_degree: 6, order: 2 };
        let a = parse_series(p, Rationals, c, &series_text(&a)).unwrap();
        let b = parse_series(p, Rationals, c, &series_text(&b)).unwrap();
        let (da, db) = (a.delta().unwrap(), b.delta().unwrap());
        let mut cp = a.pow(p).unwrap().add(&b.pow(p).unwrap()).unwrap();
        cp = cp.sub(&a.add(&b).unwrap().pow(p).unwrap()).unwrap();
        let inv_p = BigRational::new(1.into(), (p as i64).into());
        let lhs = a.add(&b).unwrap().delta().unwrap();
        let rhs = da.add(&db).unwrap().add(&cp.scale(&inv_p)).unwrap();
        let m = min_opt(lhs.valid_to(), rhs.valid_to()).unwrap_or(10);
        prop_assert!(lhs.agrees_through(&rhs, m));
        let lhs = a.mul(&b).unwrap().delta().unwrap();
        let rhs = a.pow(p).unwrap().mul(&db).unwrap()
            .add(&b.pow(p).unwrap().mul(&da).unwrap()).unwrap()
            .add(&da.mul(&db).unwrap().scale_int(p as i64)).unwrap();
        let m = min_opt(lhs.valid_to(), rhs.valid_to()).unwrap_or(10);
        prop_assert!(lhs.agrees_through(&rhs, m));
    }
}
