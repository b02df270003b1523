use crate::diffusion::SpiderModel;
use crate::error::{invalid, Result};
use crate::function::{LegFunction, Side};

use super::region::StoppingRegion;

/// One piece of the value function on a leg.
#[derive(Debug, Clone, Copy)]
enum Piece {
    /// Inside the stopping region: the payoff.
    Stop,
    /// `alpha psi_killed(x) + beta phi(x)`.
    Harmonic { alpha: f64, beta: f64 },
    /// `v * phi(x) / phi(a)` above the last stopping point `a`.
    Decay { a: f64, v: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    piece: Piece,
}

fn eval_piece(model: &SpiderModel, payoff: &LegFunction, piece: Piece, x: f64, leg: usize) -> f64 {
    match piece {
        Piece::Stop => payoff.at(x, leg),
        Piece::Harmonic { alpha, beta } => {
            let h = beta * model.phi(x);
            if alpha == 0.0 {
                h
            } else {
                alpha * model.psi_killed(x) + h
            }
        }
        Piece::Decay { a, v } => v * (model.ln_phi(x) - model.ln_phi(a)).exp(),
    }
}

fn slope_piece(model: &SpiderModel, payoff: &LegFunction, piece: Piece, x: f64, leg: usize, side: Side) -> f64 {
    match piece {
        Piece::Stop => payoff.dx(x, leg, side),
        Piece::Harmonic { alpha, beta } => alpha * model.psi_killed_dx(x) + beta * model.phi_dx(x),
        Piece::Decay { a, v } => v * model.phi_dx(x) / model.phi(a),
    }
}

/// Coefficients of `alpha psi_killed + beta phi` through `(a, ga)` and `(b, gb)`.
fn two_point(model: &SpiderModel, a: f64, ga: f64, b: f64, gb: f64) -> Piece {
    let (pa, fa) = (model.psi_killed(a), model.phi(a));
    let (pb, fb) = (model.psi_killed(b), model.phi(b));
    let det = pa * fb - pb * fa;
    Piece::Harmonic {
        alpha: (ga * fb - gb * fa) / det,
        beta: (pa * gb - pb * ga) / det,
    }
}

/// `E_x[exp(-r H) g(X_H)]` with `H` the first entry time into `region`,
/// built from harmonic pieces between stopping points.
pub fn assemble_value(model: &SpiderModel, region: &StoppingRegion, payoff: &LegFunction) -> Result<LegFunction> {
    payoff.check_compatible(model)?;
    if region.n() != model.n() {
        return invalid(format!("region has {} legs, model has {}", region.n(), model.n()));
    }
    if region.is_empty() {
        return invalid("stopping region is empty");
    }
    let n = model.n();
    let g0 = payoff.at_vertex();

    // Vertex component when the vertex continues.
    let (vertex_beta, vertex_alpha) = if region.vertex_included() {
        (g0, vec![0.0; n])
    } else {
        let mut num = 0.0;
        let mut den = model.c_r();
        for leg in 1..=n {
            if let Some(b) = region.first_entry(leg) {
                let ps = model.psi_killed(b);
                num += model.p(leg) * payoff.at(b, leg) / ps;
                den += model.p(leg) * model.phi(b) / ps;
            }
        }
        let beta = num / den;
        let alpha = (1..=n)
            .map(|leg| match region.first_entry(leg) {
                Some(b) => (payoff.at(b, leg) - beta * model.phi(b)) / model.psi_killed(b),
                None => 0.0,
            })
            .collect();
        (beta, alpha)
    };

    let mut legs: Vec<Vec<Segment>> = Vec::with_capacity(n);
    for leg in 1..=n {
        let ivs = region.intervals(leg);
        let mut segs = Vec::new();
        let mut cursor = 0.0;
        // value at the left end of the current gap, None for the vertex component
        let mut left: Option<f64> = if region.vertex_included() { Some(g0) } else { None };
        for &(a, b) in ivs {
            if a > cursor {
                let piece = match left {
                    Some(gl) => two_point(model, cursor, gl, a, payoff.at(a, leg)),
                    None => Piece::Harmonic {
                        alpha: vertex_alpha[leg - 1],
                        beta: vertex_beta,
                    },
                };
                segs.push(Segment { a: cursor, b: a, piece });
            }
            segs.push(Segment {
                a,
                b,
                piece: Piece::Stop,
            });
            cursor = b;
            left = Some(payoff.at(b, leg));
        }
        if cursor.is_finite() {
            let piece = match left {
                Some(gl) if cursor > 0.0 => Piece::Decay { a: cursor, v: gl },
                Some(gl) => Piece::Harmonic { alpha: 0.0, beta: gl },
                None => Piece::Harmonic {
                    alpha: 0.0,
                    beta: vertex_beta,
                },
            };
            segs.push(Segment {
                a: cursor,
                b: f64::INFINITY,
                piece,
            });
        }
        legs.push(segs);
    }

    let find = |segs: &[Segment], x: f64, side: Side| -> Segment {
        let idx = match side {
            Side::Left => segs.iter().position(|s| x > s.a && x <= s.b),
            Side::Right => segs.iter().position(|s| x >= s.a && x < s.b),
        };
        segs[idx.unwrap_or(if x <= 0.0 { 0 } else { segs.len() - 1 })]
    };

    let (m1, g1, l1) = (model.clone(), payoff.clone(), legs.clone());
    let (m2, g2, l2) = (model.clone(), payoff.clone(), legs.clone());
    let mut value = LegFunction::new(n, move |x, leg| {
        let seg = find(&l1[leg - 1], x, Side::Right);
        eval_piece(&m1, &g1, seg.piece, x, leg)
    })
    .with_slope(move |x, leg, side| {
        let seg = find(&l2[leg - 1], x, side);
        slope_piece(&m2, &g2, seg.piece, x, leg, side)
    });
    for leg in 1..=n {
        let mut kinks: Vec<f64> = legs[leg - 1].iter().map(|s| s.a).collect();
        kinks.extend_from_slice(payoff.kinks(leg));
        value = value.with_kinks(leg, kinks);
    }
    Ok(value)
}
