use serde::Serialize;

/// `lambda = -1` selects the monotone table, `+1` the antitone one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    Monotone,
    Antitone,
}

impl Orientation {
    pub fn sign(self) -> i8 {
        match self {
            Orientation::Monotone => -1,
            Orientation::Antitone => 1,
        }
    }

    pub fn from_sign(sign: i8) -> Self {
        if sign > 0 {
            Orientation::Antitone
        } else {
            Orientation::Monotone
        }
    }
}

/// Sign of `c00 + c11 - c01 - c10`, with ties sent to the monotone table.
pub fn lambda_from_costs(c00: f64, c01: f64, c10: f64, c11: f64) -> Orientation {
    if (c00 + c11) - (c01 + c10) > 0.0 {
        Orientation::Antitone
    } else {
        Orientation::Monotone
    }
}

/// Joint law of `(xi, eta)`; `q[a][b] = P(xi = a, eta = b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coupling2x2 {
    pub q: [[f64; 2]; 2],
    pub p_x0: f64,
    pub p_y0: f64,
    pub orientation: Orientation,
}

impl Coupling2x2 {
    pub fn q00(&self) -> f64 {
        self.q[0][0]
    }
    pub fn q01(&self) -> f64 {
        self.q[0][1]
    }
    pub fn q10(&self) -> f64 {
        self.q[1][0]
    }
    pub fn q11(&self) -> f64 {
        self.q[1][1]
    }

    /// `sum_{a,b} q[a][b] cost[a][b]`.
    pub fn expect(&self, cost: [[f64; 2]; 2]) -> f64 {
        self.q[0][0] * cost[0][0] + self.q[0][1] * cost[0][1] + self.q[1][0] * cost[1][0] + self.q[1][1] * cost[1][1]
    }

    /// Feasible range of the free parameter `t = q00` over all couplings.
    pub fn family_range(p_x0: f64, p_y0: f64) -> (f64, f64) {
        ((p_x0 + p_y0 - 1.0).max(0.0), p_x0.min(p_y0))
    }

    /// The coupling with `q00 = t`.
    pub fn from_overlap(p_x0: f64, p_y0: f64, t: f64) -> [[f64; 2]; 2] {
        [[t, p_x0 - t], [p_y0 - t, 1.0 - p_x0 - p_y0 + t]]
    }
}

/// The extremal coupling of the two Bernoulli laws picked by `orientation`.
pub fn optimal_coupling(p_x0: f64, p_y0: f64, orientation: Orientation) -> Coupling2x2 {
    let (p_x1, p_y1) = (1.0 - p_x0, 1.0 - p_y0);
    let q = match orientation {
        Orientation::Monotone => [
            [p_x0.min(p_y0), (p_x0 - p_y0).max(0.0)],
            [(p_x1 - p_y1).max(0.0), p_x1.min(p_y1)],
        ],
        Orientation::Antitone => [
            [(p_x0 - p_y1).max(0.0), p_x0.min(p_y1)],
            [p_x1.min(p_y0), (p_x1 - p_y0).max(0.0)],
        ],
    };
    Coupling2x2 {
        q,
        p_x0,
        p_y0,
        orientation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: [[f64; 2]; 2], b: [f64; 4]) -> bool {
        let flat = [a[0][0], a[0][1], a[1][0], a[1][1]];
        flat.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn table_examples() {
        assert!(close(optimal_coupling(0.7, 0.4, Orientation::Monotone).q, [0.4, 0.3, 0.0, 0.3]));
        assert!(close(optimal_coupling(0.7, 0.4, Orientation::Antitone).q, [0.1, 0.6, 0.3, 0.0]));
        let d = optimal_coupling(0.35, 0.35, Orientation::Monotone);
        assert_eq!(d.q01(), 0.0);
        assert_eq!(d.q10(), 0.0);
    }

    #[test]
    fn orientation_rule() {
        assert_eq!(lambda_from_costs(1.0, 0.0, 0.0, 1.0), Orientation::Antitone);
        assert_eq!(lambda_from_costs(0.0, 1.0, 1.0, 0.0), Orientation::Monotone);
        assert_eq!(lambda_from_costs(0.5, 0.5, 0.5, 0.5), Orientation::Monotone);
        assert_eq!(Orientation::from_sign(0), Orientation::Monotone);
        assert_eq!(Orientation::Antitone.sign(), 1);
    }

    proptest! {
        #[test]
        fn marginals_are_exact(px in 1e-6f64..1.0 - 1e-6, py in 1e-6f64..1.0 - 1e-6, anti in any::<bool>()) {
            let o = if anti { Orientation::Antitone } else { Orientation::Monotone };
            let c = optimal_coupling(px, py, o);
            prop_assert!(c.q.iter().flatten().all(|&q| q >= 0.0));
            prop_assert!((c.q00() + c.q01() - px).abs() < 1e-12);
            prop_assert!((c.q00() + c.q10() - py).abs() < 1e-12);
            prop_assert!((c.q.iter().flatten().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn chosen_table_is_an_endpoint(px in 1e-6f64..1.0 - 1e-6, py in 1e-6f64..1.0 - 1e-6) {
            let (lo, hi) = Coupling2x2::family_range(px, py);
            prop_assert!((optimal_coupling(px, py, Orientation::Monotone).q00() - hi).abs() < 1e-15);
            prop_assert!((optimal_coupling(px, py, Orientation::Antitone).q00() - lo).abs() < 1e-15);
        }
    }
}
