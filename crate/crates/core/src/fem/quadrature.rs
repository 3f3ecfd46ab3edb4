//! Tensor-product Gauss-Legendre rules on the reference square `[-1, 1]^2`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub xi: [f64; 2],
    pub weight: f64,
}

fn gauss_1d(points: usize) -> Option<(&'static [f64], &'static [f64])> {
    const P2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
    const W2: [f64; 2] = [1.0, 1.0];
    const P3: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W3: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    const P4: [f64; 4] =
        [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const W4: [f64; 4] =
        [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    const P5: [f64; 5] =
        [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W5: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    match points {
        2 => Some((&P2, &W2)),
        3 => Some((&P3, &W3)),
        4 => Some((&P4, &W4)),
        5 => Some((&P5, &W5)),
        _ => None,
    }
}

/// `points x points` Gauss rule; supported orders are 2 to 5.
pub fn gauss_rule(points: usize) -> Result<Vec<QuadPoint>> {
    let (p, w) = gauss_1d(points)
        .ok_or_else(|| Error::validation("quadratureOrder", format!("unsupported Gauss order {points} (2..=5)")))?;
    let mut rule = Vec::with_capacity(points * points);
    for (b, wb) in p.iter().zip(w) {
        for (a, wa) in p.iter().zip(w) {
            rule.push(QuadPoint { xi: [*a, *b], weight: wa * wb });
        }
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        // exact integral of x^p y^q over [-1,1]^2
        let exact = |p: i32, q: i32| {
            let one = |k: i32| if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            one(p) * one(q)
        };
        for points in 2..=5 {
            let rule = gauss_rule(points).unwrap();
            let deg = 2 * points as i32 - 1;
            for p in 0..=deg {
                for q in 0..=deg {
                    let s: f64 = rule.iter().map(|qp| qp.weight * qp.xi[0].powi(p) * qp.xi[1].powi(q)).sum();
                    assert!((s - exact(p, q)).abs() < 1e-13, "order {points}, x^{p} y^{q}");
                }
            }
        }
    }

    #[test]
    fn unsupported_order_is_rejected() {
        assert!(gauss_rule(1).is_err());
        assert!(gauss_rule(9).is_err());
    }
}
