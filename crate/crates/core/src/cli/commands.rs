use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::Params;
use super::files::{parse_elem, split_list, ElemValue, JetFile, MatrixFile};
use super::{Command, Session, WittCommand, WittPair};
use crate::deltapoly::DeltaPoly;
use crate::dlinear::{
    check_flow_compatibility, delta_galois_group, ldelta, solve_delta_linear, DeltaFlow, DeltaMatrix, DiagramCheck,
    GaloisSearch, QuadraticMapData, SubRing,
};
use crate::dseries::{f1_series, fsharp_expansion, hecke_p_tm, HeckeOptions, NewformData, SeriesFile};
use crate::error::{Error, Result};
use crate::groups::curve::count_points;
use crate::groups::{
    count_points_ap, elliptic_delta_character, gm_delta_character, kernel_law, CurveFile, EllipticCurveData,
    FormalGroupData,
};
use crate::jetspace::{
    build_jet, eval_jet_relations, ideal_membership_mod_p, jet_of_point, SchemeFile, SchemePresentation,
};
use crate::padic::{PadicCtx, PadicElem};
use crate::text::print_poly;
use crate::witt::{w1_hom_check, witt_presentation, WittVector};

/// Text for the terminal and the JSON result.
pub struct Outcome {
    pub text: String,
    pub result: Value,
}

fn outcome(text: impl Into<String>, result: Value) -> Result<Outcome> {
    Ok(Outcome { text: text.into(), result })
}

fn ctx(params: &Params) -> Result<Arc<PadicCtx>> {
    PadicCtx::with_extension(params.p, params.n, params.ext_degree, None)
}

fn load_scheme(session: &mut Session, path: &Path, params: &Params) -> Result<SchemePresentation> {
    let file: SchemeFile = session.read_json(path)?;
    if file.prime != params.p {
        return Err(Error::InvalidArgument(format!(
            "scheme file is over p = {}, run uses p = {}",
            file.prime, params.p
        )));
    }
    SchemePresentation::from_file(&file)
}

fn load_curve(session: &mut Session, path: &Path, p: u64) -> Result<(CurveFile, EllipticCurveData)> {
    let file: CurveFile = session.read_json(path)?;
    let (a4, a6) = file.coefficients()?;
    let e = match (file.p, file.a_p) {
        (Some(fp), Some(ap)) if fp == p => EllipticCurveData::with_ap(p, a4, a6, ap)?,
        _ => EllipticCurveData::new(p, a4, a6)?,
    };
    Ok((file, e))
}

fn load_matrix(session: &mut Session, path: &Path, params: &Params) -> Result<DeltaMatrix> {
    let file: MatrixFile = session.read_json(path)?;
    file.to_matrix(&ctx(params)?)
}

fn load_series(session: &mut Session, path: &Path) -> Result<SeriesFile> {
    session.read_json(path)
}

fn elem_list(ctx: &Arc<PadicCtx>, s: &str) -> Result<Vec<PadicElem>> {
    split_list(s).iter().map(|x| parse_elem(ctx, x)).collect()
}

fn elems_json(v: &[PadicElem]) -> Value {
    json!(v.iter().map(ElemValue::of).collect::<Vec<_>>())
}

fn elems_text(v: &[PadicElem]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn check_json(c: &DiagramCheck) -> Value {
    json!({ "exact": c.exact, "holds_mod": c.holds_mod, "witness": c.witness })
}

pub fn dispatch(cmd: &Command, params: &Params, session: &mut Session) -> Result<Outcome> {
    match cmd {
        Command::Delta { value } => {
            let ctx = ctx(params)?;
            let d = parse_elem(&ctx, value)?.fermat_quotient()?;
            outcome(d.to_string(), json!(ElemValue::of(&d)))
        }
        Command::Teich { residue } => {
            let ctx = ctx(params)?;
            let r = split_list(residue)
                .iter()
                .map(|s| s.parse::<i64>().map(|v| v.rem_euclid(params.p as i64) as u64))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse { pos: 0, msg: format!("bad residue {residue:?}") })?;
            if r.len() > params.ext_degree as usize {
                return Err(Error::InvalidArgument("residue has more coordinates than the extension degree".into()));
            }
            let t = ctx.teichmuller(&r);
            outcome(t.to_string(), json!(ElemValue::of(&t)))
        }
        Command::Jet { scheme } => {
            let x = load_scheme(session, scheme, params)?;
            let j = build_jet(&x, params.r)?;
            let file = JetFile::of(&j);
            let mut text = format!("# J^{}({}) over p = {}: {}", j.order(), x.label(), file.prime, file.vars.join(" "));
            for r in &file.relations {
                text.push('\n');
                text.push_str(r);
            }
            outcome(text, json!(file))
        }
        Command::JetPoint { scheme, point } => {
            let x = load_scheme(session, scheme, params)?;
            let ctx = ctx(params)?;
            let alpha = elem_list(&ctx, point)?;
            let jet = jet_of_point(&x, params.r, &alpha)?;
            let j = build_jet(&x, params.r)?;
            let values = eval_jet_relations(&j, &ctx, &jet)?;
            let vanish = values.iter().all(|v| v.is_zero());
            let text = jet
                .iter()
                .zip(x.vars().names())
                .map(|(js, name)| format!("{name}: {}", elems_text(js)))
                .chain(std::iter::once(format!("relations vanish: {vanish}")))
                .collect::<Vec<_>>()
                .join("\n");
            outcome(
                text,
                json!({
                    "jets": jet.iter().map(|js| elems_json(js)).collect::<Vec<_>>(),
                    "relation_values": elems_json(&values),
                    "relations_vanish": vanish,
                }),
            )
        }
        Command::Member { scheme, poly } => {
            let x = load_scheme(session, scheme, params)?;
            let j = build_jet(&x, params.r)?;
            let g = DeltaPoly::parse(j.vars(), poly)?;
            let member = ideal_membership_mod_p(&g, &j)?;
            outcome(member.to_string(), json!({ "member_mod_p": member, "order": params.r }))
        }
        Command::KernelLaw { group, curve, degree } => {
            let degree = degree.unwrap_or(params.d);
            let fg = match group.as_str() {
                "additive" => FormalGroupData::additive(params.p, degree)?,
                "multiplicative" => FormalGroupData::multiplicative(params.p, degree)?,
                "elliptic" => {
                    let path = curve.as_ref().ok_or(Error::InvalidArgument("elliptic needs --curve".into()))?;
                    let file: CurveFile = session.read_json(path)?;
                    let (a4, a6) = file.coefficients()?;
                    FormalGroupData::elliptic(params.p, &a4, &a6, degree)?
                }
                other => return Err(Error::InvalidArgument(format!("unknown group {other:?}"))),
            };
            let law = kernel_law(&fg, params.r, degree)?;
            let vars = fg.vars.with_order(params.r);
            let lines: Vec<String> = law.iter().map(|f| print_poly(&vars, f)).collect();
            let text = lines.iter().enumerate().map(|(j, l)| format!("L{}: {l}", j + 1)).collect::<Vec<_>>().join("\n");
            outcome(text, json!({ "degree": degree, "order": params.r, "components": lines }))
        }
        Command::Ap { curve } => {
            let file: CurveFile = session.read_json(curve)?;
            let (a4, a6) = file.coefficients()?;
            let ap = count_points_ap(&a4, &a6, params.p)?;
            let n = count_points(&a4, &a6, params.p)?;
            outcome(ap.to_string(), json!({ "a_p": ap, "points": n, "ordinary": ap.rem_euclid(params.p as i64) != 0 }))
        }
        Command::Psi { curve, group, degree } => {
            let degree = degree.unwrap_or(params.d);
            let psi = match group.as_str() {
                "gm" => gm_delta_character(params.p, degree)?,
                "elliptic" => {
                    let path = curve.as_ref().ok_or(Error::InvalidArgument("elliptic needs --curve".into()))?;
                    let (_, e) = load_curve(session, path, params.p)?;
                    elliptic_delta_character(&e, degree, params.n)?
                }
                other => return Err(Error::InvalidArgument(format!("unknown group {other:?}"))),
            };
            let text = psi.to_text();
            outcome(
                text.clone(),
                json!({ "order": psi.order, "degree": psi.degree, "a_p": psi.a_p, "series": print_poly(&psi.vars, &psi.series) }),
            )
        }
        Command::PsiEval { curve, group, degree, value, t } => {
            let degree = degree.unwrap_or(params.d);
            let ctx = ctx(params)?;
            let v = match group.as_str() {
                "gm" => {
                    let s = value.as_ref().ok_or(Error::InvalidArgument("gm needs --value".into()))?;
                    gm_delta_character(params.p, degree)?.eval_gm(&parse_elem(&ctx, s)?)?
                }
                "elliptic" => {
                    let path = curve.as_ref().ok_or(Error::InvalidArgument("elliptic needs --curve".into()))?;
                    let s = t.as_ref().ok_or(Error::InvalidArgument("elliptic needs --t".into()))?;
                    let (_, e) = load_curve(session, path, params.p)?;
                    let psi = elliptic_delta_character(&e, degree, params.n)?;
                    psi.eval_jet(&parse_elem(&ctx, s)?.jet(2)?)?
                }
                other => return Err(Error::InvalidArgument(format!("unknown group {other:?}"))),
            };
            outcome(v.to_string(), json!(ElemValue::of(&v)))
        }
        Command::F1 => {
            let f = f1_series(params.p, params.caps()?)?;
            outcome(f.to_string(), json!(f.to_file()))
        }
        Command::Fsharp { curve } => {
            let (file, e) = load_curve(session, curve, params.p)?;
            let f = NewformData::from_curve_file(&file)?
                .ok_or(Error::InvalidArgument("curve file has no newform coefficients".into()))?;
            let r = fsharp_expansion(&e, &f, params.caps()?)?;
            let p = params.p as i64;
            let max_diff = r
                .difference
                .terms()
                .map(|(_, _, &c)| {
                    let c = c as i64;
                    c.min(p - c)
                })
                .max()
                .unwrap_or(0);
            let text = format!(
                "a_p = {}\nformula: {}\nconstruction: {}\ncongruent mod {} through q^{}: {} (max |difference| = {})",
                r.a_p,
                r.formula,
                r.construction,
                params.p,
                r.compared_through().map_or("inf".to_string(), |m| m.to_string()),
                r.congruent(),
                max_diff
            );
            outcome(
                text,
                json!({
                    "a_p": r.a_p,
                    "formula": r.formula.to_file(),
                    "construction": r.construction.to_file(),
                    "difference": r.difference.to_file(),
                    "max_abs_difference": max_diff,
                    "congruent": r.congruent(),
                    "compared_through": r.compared_through(),
                    "construction_order": r.construction_order(),
                }),
            )
        }
        Command::Ldelta { a } => {
            let a = load_matrix(session, a, params)?;
            let l = ldelta(&a, &DeltaFlow::canonical(params.p, a.size()))?;
            outcome(l.to_string(), json!(MatrixFile::of(&l)))
        }
        Command::SolveLinear { alpha, n, u0, target } => {
            let alpha = load_matrix(session, alpha, params)?;
            if let Some(n) = n {
                if *n != alpha.size() {
                    return Err(Error::LengthMismatch(*n, alpha.size()));
                }
            }
            let ctx = alpha.ctx().clone();
            let entries = elem_list(&ctx, u0)?;
            if entries.len() != alpha.size() * alpha.size() {
                return Err(Error::LengthMismatch(alpha.size() * alpha.size(), entries.len()));
            }
            let u0 = DeltaMatrix::new(&ctx, alpha.size(), entries)?;
            let u = solve_delta_linear(&alpha, &u0, target.unwrap_or(alpha.prec()))?;
            outcome(format!("u = {u}"), json!(MatrixFile::of(&u)))
        }
        Command::Galois { u, subring, degree, max_candidates } => {
            let u = load_matrix(session, u, params)?;
            let o = if subring == "zp" {
                SubRing::Zp
            } else if let Some(d) = subring.strip_prefix("unramified:") {
                let degree = d.parse().map_err(|_| Error::Parse { pos: 11, msg: format!("bad degree {d:?}") })?;
                SubRing::Unramified { degree }
            } else {
                return Err(Error::InvalidArgument(format!("unknown subring {subring:?}")));
            };
            let search = GaloisSearch { degree: *degree, max_candidates: *max_candidates, ..GaloisSearch::default() };
            let g = delta_galois_group(&u, &o, &search)?;
            let elements: Vec<MatrixFile> = g.elements.iter().map(MatrixFile::of).collect();
            let text = format!(
                "{} elements at precision {} (degree bound {}), closed: {}\n{}",
                g.len(),
                g.precision,
                g.degree,
                g.is_closed(),
                g.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
            );
            outcome(
                text,
                json!({
                    "elements": elements,
                    "precision": g.precision,
                    "degree": g.degree,
                    "candidates_checked": g.candidates_checked,
                    "closed": g.is_closed(),
                }),
            )
        }
        Command::FlowCheck { group, samples } => {
            let h = QuadraticMapData::from_name(group)?;
            let flow = DeltaFlow::canonical(params.p, h.n);
            let opts = crate::dlinear::FlowCheckOptions { samples: *samples, seed: params.seed, ..Default::default() };
            let r = check_flow_compatibility(&flow, &h, &opts)?;
            let text = format!(
                "{:?}: horizontal exact {}, symmetric exact {}, S-horizontal mod p^{}",
                r.group, r.horizontal.exact, r.symmetric.exact, r.s_horizontal_mod
            );
            outcome(
                text,
                json!({
                    "group": format!("{:?}", r.group),
                    "det_power": r.det_power,
                    "horizontal": check_json(&r.horizontal),
                    "symmetric": check_json(&r.symmetric),
                    "s_horizontal_mod": r.s_horizontal_mod,
                    "samples": r.samples,
                    "precision": r.precision,
                }),
            )
        }
        Command::Witt(w) => witt(w, params),
        Command::HeckeP { series, m } => {
            let f = load_series(session, series)?.to_mod()?;
            let opts = HeckeOptions { degree_bound: params.d, ..HeckeOptions::default() };
            let g = hecke_p_tm(&f, *m, &opts)?;
            outcome(g.to_string(), json!(g.to_file()))
        }
        Command::UOp { series } => {
            let file = load_series(session, series)?;
            if file.mode == "rational" {
                let g = file.to_rational()?.u_operator();
                outcome(g.to_string(), json!(g.to_file()))
            } else {
                let g = file.to_mod()?.u_operator();
                outcome(g.to_string(), json!(g.to_file()))
            }
        }
    }
}

fn witt_vec(p: u64, s: &str, len: Option<usize>) -> Result<WittVector<BigInt>> {
    let v = WittVector::parse(p, s)?;
    match len {
        Some(l) if l != v.len() => Err(Error::LengthMismatch(l, v.len())),
        _ => Ok(v),
    }
}

fn witt_pair(pair: &WittPair, p: u64) -> Result<(WittVector<BigInt>, WittVector<BigInt>)> {
    Ok((witt_vec(p, &pair.u, pair.len)?, witt_vec(p, &pair.v, pair.len)?))
}

fn witt(cmd: &WittCommand, params: &Params) -> Result<Outcome> {
    let p = params.p;
    match cmd {
        WittCommand::Add(pair) => {
            let (u, v) = witt_pair(pair, p)?;
            let s = u.add(&v)?;
            outcome(s.to_string(), json!(s.to_file()))
        }
        WittCommand::Mul(pair) => {
            let (u, v) = witt_pair(pair, p)?;
            let s = u.mul(&v)?;
            outcome(s.to_string(), json!(s.to_file()))
        }
        WittCommand::Ghost { len, u } => {
            let u = witt_vec(p, u, *len)?;
            let g: Vec<String> = u.ghost().iter().map(|x| x.to_string()).collect();
            outcome(format!("[{}]", g.join(", ")), json!({ "p": p, "ghost": g }))
        }
        WittCommand::Present { len, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let w = witt_presentation(p, *len, *samples, &mut rng)?;
            let file = w.scheme.to_file();
            let text =
                format!("W_{}(R) over p = {} on {}\n{}", w.m, p, file.vars.join(", "), file.relations.join("\n"));
            outcome(text, json!({ "scheme": file, "spanning_samples": w.spanning_samples }))
        }
        WittCommand::Comonad { u, m1, m2 } => {
            let u = WittVector::parse(p, u)?;
            let c = u.comonad_map(*m1, *m2)?;
            let comps: Vec<Vec<String>> =
                c.components().iter().map(|w| w.components().iter().map(|x| x.to_string()).collect()).collect();
            outcome(c.to_string(), json!({ "p": p, "m1": m1, "m2": m2, "components": comps }))
        }
        WittCommand::W1check { samples } => {
            let ctx = ctx(params)?;
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let sample: Vec<PadicElem> = (0..*samples).map(|_| ctx.random(&mut rng)).collect();
            let r = w1_hom_check(&sample)?;
            outcome(
                format!(
                    "{} pairs, {} sum failures, {} product failures, holds: {}",
                    r.pairs,
                    r.add_failures,
                    r.mul_failures,
                    r.holds()
                ),
                json!(r),
            )
        }
    }
}
