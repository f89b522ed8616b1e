//! One function per subcommand. Each writes its CSV/JSON files into the output directory.

use crate::checkpoint::Scan;
use crate::config::*;
use crate::failure::Failure;
use crate::output::{Field, OutputDir};
use filament_core::evolver::*;
use filament_core::gauss::{rho_angle, RationalTime};
use filament_core::momentum::*;
use filament_core::polygon::*;
use filament_core::selfsimilar::*;
use filament_core::spectral::*;
use filament_core::Vec3;
use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn vec_fields(v: &Vec3) -> [Field; 3] {
    [v.x.into(), v.y.into(), v.z.into()]
}

fn row<const A: usize, const B: usize>(head: Vec<Field>, a: [Field; A], b: [Field; B]) -> Vec<Field> {
    head.into_iter().chain(a).chain(b).collect()
}

const XT_HEADER: [&str; 6] = ["x1", "x2", "x3", "t1", "t2", "t3"];

fn header(lead: &[&'static str], rest: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(rest).copied().collect()
}

pub fn one_corner(out: &mut OutputDir, p: &OneCornerParams) -> Result<(), Failure> {
    if p.every == 0 {
        return Err(Failure::Usage("every must be at least 1".into()));
    }
    let c0 = match (p.c0, p.sides) {
        (Some(c), None) => c,
        (None, Some(m)) => c0_from_sides(m)?,
        (Some(_), Some(_)) => return Err(Failure::Usage("give c0 or M, not both".into())),
        (None, None) => return Err(Failure::Usage("one-corner needs c0 or M".into())),
    };
    let raw = integrate_frame(c0, p.t, p.s_max, p.ds)?;
    let a = a_vector(c0)?;
    let (minus, plus) = raw.tail_means(0.1);
    let frame = match (p.rotate, p.sides) {
        (true, Some(m)) => rotate_to_polygon(&raw, m)?,
        (true, None) => return Err(Failure::Usage("rotate needs M".into())),
        (false, _) => raw.clone(),
    };
    let rows = (0..frame.s.len())
        .step_by(p.every)
        .map(|i| row(vec![frame.s[i].into()], vec_fields(&frame.x[i]), vec_fields(&frame.tangent[i])));
    out.write_csv("one_corner.csv", &header(&["s"], &XT_HEADER), rows)?;
    out.write_json(
        "summary.json",
        &json!({
            "c0": c0,
            "t": p.t,
            "rotated": p.rotate,
            "a_vector": [a.a1, a.a2, a.a3],
            "tangent_limit_plus": [plus.x, plus.y, plus.z],
            "tangent_limit_minus": [minus.x, minus.y, minus.z],
            "limit_deviation_plus": (plus - a.plus()).norm(),
            "limit_deviation_minus": (minus - a.minus()).norm(),
            "max_gram_defect": raw.max_gram_defect,
        }),
    )
}

pub fn polygon(out: &mut OutputDir, p: &PolygonParams) -> Result<(), Failure> {
    let time = RationalTime::new(p.sides, p.p, p.q)?;
    let pg = build_polygon(time)?;
    let rows = (0..pg.n_sides).map(|j| {
        row(vec![j.into(), pg.vertex_s(j).into()], vec_fields(&pg.vertices[j]), vec_fields(&pg.tangents[j]))
    });
    out.write_csv("polygon.csv", &header(&["j", "s"], &XT_HEADER), rows)?;
    let mom = total_momentum(&pg);
    out.write_json(
        "summary.json",
        &json!({
            "M": p.sides, "p": p.p, "q": p.q,
            "t": time.value(),
            "n_sides": pg.n_sides,
            "rho": rho_angle(p.sides, p.q)?,
            "side_length": pg.side_length,
            "closure_residual": closure_check(p.sides, p.p, p.q)?,
            "total_momentum": [mom.x, mom.y, mom.z],
        }),
    )
}

pub fn compare(out: &mut OutputDir, p: &CompareParams) -> Result<(), Failure> {
    let mut samples = Vec::new();
    let mut maxima = Vec::new();
    let mut curvature = Vec::new();
    let mut results = Vec::new();
    let c0 = c0_from_sides(p.sides)?;
    for &q in &p.qs {
        let cmp = compare_to_selfsimilar(p.sides, q)?;
        for (s, d) in cmp.s.iter().zip(&cmp.distance) {
            samples.push(vec![q.into(), (*s).into(), (*d).into()]);
        }
        maxima.push(vec![q.into(), cmp.max.into()]);
        results.push(json!({ "q": q, "max_distance": cmp.max }));
        if q % 4 == 2 {
            let est = corner_curvature_estimate(p.sides, q)?;
            let closed = corner_curvature_closed_form(p.sides, q)?;
            curvature.push(vec![q.into(), est.into(), closed.into(), (c0 - est).into()]);
        }
    }
    out.write_csv("compare.csv", &["q", "s", "distance"], samples)?;
    out.write_csv("compare_max.csv", &["q", "max_distance"], maxima)?;
    out.write_csv("curvature.csv", &["q", "estimate", "closed_form", "c0_error"], curvature)?;
    out.write_json("summary.json", &json!({ "M": p.sides, "c0": c0, "results": results }))
}

pub fn hrot(out: &mut OutputDir, p: &HrotParams) -> Result<(), Failure> {
    let sides = p.sides()?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut profile = Vec::new();
    let mut worst: f64 = 0.0;
    for &m in &sides {
        let est = integrate_hrot(m, p.s_max, p.ds)?;
        let closed = hrot_limit(m);
        worst = worst.max((est - closed).abs());
        rows.push(vec![m.into(), est.into(), closed.into(), (est - closed).into()]);
        results.push(json!({ "M": m, "estimate": est, "closed_form": closed, "deviation": est - closed }));
        if p.profile_every > 0 {
            for (s, h) in hrot_profile_c0(c0_from_sides(m)?, p.s_max, p.ds, p.profile_every)? {
                profile.push(vec![m.into(), s.into(), h.into()]);
            }
        }
    }
    out.write_csv("hrot.csv", &["M", "estimate", "closed_form", "deviation"], rows)?;
    if p.profile_every > 0 {
        out.write_csv("hrot_profile.csv", &["M", "s", "hrot"], profile)?;
    }
    let mut summary = json!({ "s_max": p.s_max, "ds": p.ds, "results": results, "max_deviation": worst });
    if let [only] = results.as_slice() {
        summary["estimate"] = only["estimate"].clone();
        summary["closed_form"] = only["closed_form"].clone();
    }
    out.write_json("summary.json", &summary)
}

pub fn evolve(out: &mut OutputDir, p: &EvolveParams) -> Result<(), Failure> {
    if p.steps == 0 || p.snapshots == 0 || p.steps % p.snapshots != 0 {
        return Err(Failure::Usage("steps must be a positive multiple of snapshots".into()));
    }
    let mut state = match p.datum {
        Datum::Polygon => init_regular_polygon(p.sides as usize, p.n)?,
        Datum::Quadrilateral => init_piecewise_tangents(&quadrilateral_datum(), p.n)?,
    };
    let t_end = p.t_end();
    if !(t_end > 0.0) {
        return Err(Failure::Usage("t_end must be positive".into()));
    }
    let dt = t_end / p.steps as f64;
    let update = match p.update {
        Update::FromTangent => PositionUpdate::FromTangent,
        Update::Binormal => PositionUpdate::Binormal,
    };
    let len0 = state.polygonal_length();
    let snap = |s: &FilamentState| {
        vec![
            s.t.into(),
            s.steps.into(),
            s.mean_position().z.into(),
            s.polygonal_length().into(),
            s.tangent_energy().into(),
            s.max_norm_drift.into(),
        ]
    };
    let mut series = vec![snap(&state)];
    let mut ev = Evolver::new(&state, update);
    for _ in 0..p.snapshots {
        ev.run(&mut state, dt, p.steps / p.snapshots)?;
        series.push(snap(&state));
    }
    out.write_csv("evolve_series.csv", &["t", "steps", "mean_x3", "length", "energy", "max_norm_drift"], series)?;
    let (x, t) = (state.full_positions(), state.full_tangents());
    let rows = (0..x.len()).map(|j| row(vec![j.into(), state.s(j).into()], vec_fields(&x[j]), vec_fields(&t[j])));
    out.write_csv("evolve.csv", &header(&["j", "s"], &XT_HEADER), rows)?;
    let mean = state.mean_position();
    let mut summary = json!({
        "N": p.n,
        "fold": state.fold,
        "steps": state.steps,
        "dt": dt,
        "t": state.t,
        "mean_position": [mean.x, mean.y, mean.z],
        "length_change": (state.polygonal_length() - len0) / len0,
        "max_norm_drift": state.max_norm_drift,
    });
    if p.datum == Datum::Polygon {
        summary["vertical_speed"] = json!(mean.z / state.t);
        summary["cm_closed_form"] = json!(cm_closed_form(p.sides)?);
    }
    out.write_json("summary.json", &summary)
}

fn chunk_size() -> usize {
    rayon::current_num_threads().max(1)
}

pub fn cm_table(out: &mut OutputDir, p: &CmTableParams, scan: &mut Scan) -> Result<(), Failure> {
    let mut keys = Vec::new();
    for &m in &p.sides {
        for &r in &p.n_over_m {
            let scaled = p.nt_base as u128 * (r * r) as u128;
            if r == 0 || scaled % (512 * 512) != 0 {
                return Err(Failure::Usage(format!("nt_base·(N/M)²/512² is not an integer for N/M = {r}")));
            }
            keys.push(vec![m as u64, r as u64]);
        }
    }
    let nt = |r: u64| (p.nt_base as u128 * (r * r) as u128 / (512 * 512)) as u64;
    let vals = scan.run(&keys, 5, chunk_size(), |ks| {
        ks.par_iter()
            .map(|k| {
                let c = measure_cm(k[0] as usize, (k[0] * k[1]) as usize, nt(k[1]))?;
                Ok(vec![c.estimate, c.closed_form, c.error, c.max_norm_drift, c.length_change])
            })
            .collect()
    })?;
    let rows = keys.iter().zip(&vals).map(|(k, v)| {
        let mut r: Vec<Field> = vec![k[0].into(), k[1].into(), nt(k[1]).into()];
        r.extend(v.iter().map(|&x| Field::from(x)));
        r
    });
    out.write_csv(
        "cm_table.csv",
        &["M", "N_over_M", "Nt", "estimate", "closed_form", "error", "max_norm_drift", "length_change"],
        rows,
    )?;
    let mut ratios = BTreeMap::new();
    for &m in &p.sides {
        let errs: Vec<f64> = keys.iter().zip(&vals).filter(|(k, _)| k[0] == m as u64).map(|(_, v)| v[2]).collect();
        ratios.insert(m.to_string(), errs.windows(2).map(|w| w[0] / w[1]).collect::<Vec<_>>());
    }
    out.write_json("summary.json", &json!({ "cells": keys.len(), "error_ratios": ratios }))
}

pub fn energy_scan(out: &mut OutputDir, p: &EnergyScanParams, scan: &mut Scan) -> Result<(), Failure> {
    let ps = p.p.clone().unwrap_or_else(|| (0..=p.q).collect());
    let keys: Vec<Vec<u64>> = ps.iter().map(|&x| vec![x]).collect();
    let vals = scan.run(&keys, 5, 64 * chunk_size(), |ks| {
        let chunk: Vec<u64> = ks.iter().map(|k| k[0]).collect();
        Ok(scan_over_p(p.sides, p.q, &chunk)?
            .iter()
            .map(|r| {
                vec![
                    r.first_component_max,
                    r.first_argmax_k as f64,
                    r.third_component_max,
                    r.third_argmax_k as f64,
                    r.overall_max,
                ]
            })
            .collect())
    })?;
    let rows = ps.iter().zip(&vals).map(|(&pp, v)| {
        vec![
            pp.into(),
            v[0].into(),
            (v[1] as i64).into(),
            v[2].into(),
            (v[3] as i64).into(),
            v[4].into(),
        ]
    });
    out.write_csv(
        "energy_scan.csv",
        &["p", "first_component_max", "first_argmax_k", "third_component_max", "third_argmax_k", "overall_max"],
        rows,
    )?;
    let arg = |c: usize| {
        vals.iter()
            .zip(&ps)
            .fold((0u64, f64::NEG_INFINITY), |acc, (v, &pp)| if v[c] > acc.1 { (pp, v[c]) } else { acc })
    };
    let (fp, fv) = arg(0);
    let (tp, tv) = arg(2);
    out.write_json(
        "summary.json",
        &json!({ "M": p.sides, "q": p.q, "points": ps.len(),
                 "first_max": fv, "first_arg_p": fp, "third_max": tv, "third_arg_p": tp }),
    )
}

pub fn energy_fit(out: &mut OutputDir, p: &EnergyFitParams, scan: &mut Scan) -> Result<(), Failure> {
    let qs: Vec<u64> = primes_between(p.q_min.div_ceil(2), p.q_max / 2).iter().map(|x| 2 * x).collect();
    if qs.len() < 2 {
        return Err(Failure::Usage("the q = 2·prime ladder needs at least two points".into()));
    }
    let keys: Vec<Vec<u64>> = qs.iter().map(|&q| vec![q]).collect();
    let vals = scan.run(&keys, 4, 1, |ks| {
        ks.iter()
            .map(|k| {
                let g = match p.search {
                    Search::Exhaustive => exhaustive_max(p.sides, k[0])?,
                    Search::Restricted => global_max(p.sides, k[0], false)?,
                };
                Ok(vec![g.first_max, g.first_arg_p as f64, g.third_max, g.third_arg_p as f64])
            })
            .collect()
    })?;
    let resid = |q: u64, v: f64| v - (p.a * (q as f64).ln() + p.b);
    let rows = qs.iter().zip(&vals).map(|(&q, v)| {
        vec![
            q.into(),
            v[0].into(),
            (v[1] as u64).into(),
            v[2].into(),
            (v[3] as u64).into(),
            resid(q, v[0]).into(),
        ]
    });
    out.write_csv(
        "energy_fit.csv",
        &["q", "first_max", "first_arg_p", "third_max", "third_arg_p", "fit_residual"],
        rows,
    )?;
    let mut arg_counts: BTreeMap<String, u64> = BTreeMap::new();
    for v in &vals {
        *arg_counts.entry((v[1] as u64).to_string()).or_default() += 1;
    }
    let worst = qs.iter().zip(&vals).map(|(&q, v)| resid(q, v[0]).abs()).fold(0.0, f64::max);
    let n = qs.len() - 1;
    let (a, b) = log_fit((qs[0] as f64, vals[0][0]), (qs[n] as f64, vals[n][0]))?;
    let dominated = vals.iter().filter(|v| v[0] > v[2]).count();
    out.write_json(
        "summary.json",
        &json!({
            "M": p.sides,
            "points": qs.len(),
            "first_arg_p_counts": arg_counts,
            "reference_fit": { "a": p.a, "b": p.b },
            "max_abs_residual": worst,
            "endpoint_fit": { "a": a, "b": b },
            "first_exceeds_third": dominated,
        }),
    )
}

pub fn momentum(out: &mut OutputDir, p: &MomentumParams, scan: &mut Scan) -> Result<(), Failure> {
    let keys: Vec<Vec<u64>> = (0..=p.q).map(|x| vec![x]).collect();
    let vals = scan.run(&keys, 3, 64 * chunk_size(), |ks| {
        ks.par_iter()
            .map(|k| {
                let v = momentum_at(p.sides, k[0], p.q)?;
                Ok(vec![v.x, v.y, v.z])
            })
            .collect()
    })?;
    let vecs: Vec<Vec3> = vals.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect();
    let series = series_from_vectors(p.sides, p.q, &vecs)?;
    let coeffs = sine_coefficients(&series, p.k_max)?;
    let dom = square_dominance(&coeffs);
    let phi: Vec<f64> = (0..=p.q).map(|pp| -riemann_phi(2.0 * pp as f64 / p.q as f64, p.phi_terms)).collect();
    let corr = correlation(&series.values, &phi);
    let rows = (0..=p.q as usize).map(|i| {
        vec![
            i.into(),
            (i as f64 / p.q as f64).into(),
            vals[i][0].into(),
            vals[i][1].into(),
            vals[i][2].into(),
            phi[i].into(),
        ]
    });
    out.write_csv("momentum.csv", &["p", "p_over_q", "m1", "m2", "m3", "minus_phi_2x"], rows)?;
    let crows = coeffs.iter().enumerate().map(|(i, &c)| {
        let k = (i + 1) as u64;
        vec![k.into(), c.into(), (c * k as f64).into(), is_square(k).into()]
    });
    out.write_csv("momentum_coefficients.csv", &["k", "c_k", "k_c_k", "square"], crows)?;
    out.write_json(
        "summary.json",
        &json!({
            "M": p.sides,
            "q": p.q,
            "total_third": total_momentum_third(p.sides),
            "truncated_third": truncated_momentum_third(p.sides),
            "first_max_abs": series.first_max_abs,
            "third_max_dev": series.third_max_dev,
            "square_dominance": dom,
            "correlation_with_minus_phi_2x": corr,
        }),
    )
}

pub fn riemann(out: &mut OutputDir, p: &RiemannParams) -> Result<(), Failure> {
    if p.points < 2 || !(p.x_max > p.x_min) {
        return Err(Failure::Usage("riemann needs points >= 2 and x_max > x_min".into()));
    }
    let h = (p.x_max - p.x_min) / (p.points - 1) as f64;
    let rows = (0..p.points).map(|i| {
        let x = p.x_min + i as f64 * h;
        vec![x.into(), riemann_phi(x, p.n_max).into()]
    });
    out.write_csv("riemann.csv", &["x", "phi"], rows)?;
    out.write_json("summary.json", &json!({ "n_max": p.n_max, "points": p.points }))
}

pub fn conservation(out: &mut OutputDir, p: &ConservationParams) -> Result<(), Failure> {
    if !(p.dt_divisor > 0.0) {
        return Err(Failure::Usage("dt_divisor must be positive".into()));
    }
    let datum = quadrilateral_datum();
    let mut state = init_piecewise_tangents(&datum, p.n)?;
    let tangents: Vec<Vec3> = datum.iter().map(|s| s.0).collect();
    let p0 = product_of_tangents(&tangents);
    let target = 7.0 / 65.0;
    let dt0 = PI / p.dt_divisor * (3072.0 / p.n as f64).powi(2);
    let mut times: Vec<[u64; 3]> = p.times.clone();
    if times.iter().any(|t| t[1] == 0) {
        return Err(Failure::Usage("time denominators must be positive".into()));
    }
    times.sort_by(|a, b| (a[0] as f64 / a[1] as f64).total_cmp(&(b[0] as f64 / b[1] as f64)));
    let mut ev = Evolver::new(&state, PositionUpdate::default());
    let mut rows = vec![vec![0.0.into(), 0u64.into(), 1u64.into(), 4u64.into(), 0u64.into(), p0.into(), (p0 - target).into()]];
    let mut results = Vec::new();
    let mut steps_done = 0u64;
    for [num, den, sides] in times {
        let t = num as f64 * PI / den as f64;
        let span = t - state.t;
        let steps = (span / dt0 - 1e-9).ceil().max(0.0) as u64;
        if steps > 0 {
            ev.run(&mut state, span / steps as f64, steps)?;
        }
        steps_done += steps;
        let pt = conservation_product(&state, sides as usize)?;
        rows.push(vec![t.into(), num.into(), den.into(), sides.into(), steps_done.into(), pt.into(), (pt - target).into()]);
        results.push(json!({ "t": t, "num": num, "den": den, "sides": sides, "P": pt, "error": pt - target }));
    }
    out.write_csv("conservation.csv", &["t", "num", "den", "sides", "steps", "P", "error"], rows)?;
    out.write_json(
        "summary.json",
        &json!({ "N": p.n, "dt": dt0, "P0": p0, "P0_error": p0 - target, "target": target, "results": results,
                 "max_norm_drift": state.max_norm_drift }),
    )
}
