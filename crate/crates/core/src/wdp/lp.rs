//! Lower bounds from the covering relaxation `min p·x, A x ≥ 1, x ≥ 0`.
//!
//! A dual simplex started from the all-surplus basis keeps the duals
//! feasible at every step, so it can stop as soon as the bound is good
//! enough to prune. The duals are clamped and scaled back into the feasible
//! region before use, which keeps the bound valid despite rounding.

use crate::model::MAX_REQUESTS;

const EPS: f64 = 1e-9;

/// Valid lower bound with the dual prices that certify it.
pub(super) struct DualBound {
    pub value: f64,
    /// Indexed by request id; zero outside the rows.
    pub duals: [f64; MAX_REQUESTS],
}

impl DualBound {
    pub fn reduced_cost(&self, mask: u64, price: u64) -> f64 {
        price as f64 - bits(mask).map(|r| self.duals[r]).sum::<f64>()
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let r = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            r
        })
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Var {
    Surplus(usize),
    Column(usize),
}

/// `columns` are `(mask, price)` with masks inside `rows`, every row covered.
/// Stops early once the bound exceeds `stop_above`.
pub(super) fn covering_bound(rows: u64, columns: &[(u64, u64)], stop_above: f64) -> DualBound {
    let row_ids: Vec<usize> = bits(rows).collect();
    let k = row_ids.len();
    let mut pos = [usize::MAX; MAX_REQUESTS];
    for (i, &r) in row_ids.iter().enumerate() {
        pos[r] = i;
    }
    // Column masks in row positions.
    let cols: Vec<(Vec<usize>, f64)> = columns
        .iter()
        .map(|&(mask, price)| (bits(mask).map(|r| pos[r]).collect(), price as f64))
        .collect();

    // Basis inverse, row-major; the surplus basis is -I.
    let mut binv = vec![0.0; k * k];
    for i in 0..k {
        binv[i * k + i] = -1.0;
    }
    let mut basis: Vec<Var> = (0..k).map(Var::Surplus).collect();
    let mut basic_col = vec![false; cols.len()];
    let mut basic_surplus = vec![true; k];
    let mut cost_b = vec![0.0; k];

    let mut best = DualBound {
        value: 0.0,
        duals: [0.0; MAX_REQUESTS],
    };
    let mut y: Vec<f64> = vec![0.0; k];
    let mut col_y = vec![0.0; cols.len()];
    let max_iterations = 20 * k + 50;

    for _ in 0..=max_iterations {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = (0..k).map(|i| cost_b[i] * binv[i * k + j]).sum();
        }
        // Safe bound: clamp, then scale so that no column is overpriced.
        let mut scale: f64 = 1.0;
        for (c, (rows_of, price)) in cols.iter().enumerate() {
            let load: f64 = rows_of.iter().map(|&i| y[i].max(0.0)).sum();
            col_y[c] = rows_of.iter().map(|&i| y[i]).sum();
            if load > *price {
                scale = scale.min(price / load);
            }
        }
        let value: f64 = y.iter().map(|v| v.max(0.0) * scale).sum();
        if value > best.value {
            best.value = value;
            for (i, &r) in row_ids.iter().enumerate() {
                best.duals[r] = y[i].max(0.0) * scale;
            }
        }
        if best.value > stop_above {
            break;
        }

        // Leaving row: most negative basic value.
        let x_b: Vec<f64> = (0..k)
            .map(|i| binv[i * k..(i + 1) * k].iter().sum())
            .collect();
        let (leave, &x_min) = x_b
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least one row");
        if x_min >= -EPS {
            break;
        }
        let rho = &binv[leave * k..(leave + 1) * k];

        // Ratio test over non-basic variables.
        let mut entering: Option<(Var, f64, f64)> = None;
        let mut consider = |var: Var, alpha: f64, reduced: f64| {
            if alpha >= -EPS {
                return;
            }
            let ratio = reduced.max(0.0) / -alpha;
            let better = match entering {
                None => true,
                Some((_, r, a)) => ratio < r - EPS || (ratio <= r + EPS && -alpha > -a + EPS),
            };
            if better {
                entering = Some((var, ratio, alpha));
            }
        };
        for (c, (rows_of, price)) in cols.iter().enumerate() {
            if !basic_col[c] {
                let alpha: f64 = rows_of.iter().map(|&i| rho[i]).sum();
                consider(Var::Column(c), alpha, price - col_y[c]);
            }
        }
        for i in 0..k {
            if !basic_surplus[i] {
                consider(Var::Surplus(i), -rho[i], y[i]);
            }
        }
        let Some((var, _, _)) = entering else { break };

        // Pivot.
        let u: Vec<f64> = match var {
            Var::Column(c) => (0..k)
                .map(|i| cols[c].0.iter().map(|&r| binv[i * k + r]).sum())
                .collect(),
            Var::Surplus(s) => (0..k).map(|i| -binv[i * k + s]).collect(),
        };
        let pivot = u[leave];
        for v in &mut binv[leave * k..(leave + 1) * k] {
            *v /= pivot;
        }
        for i in 0..k {
            if i != leave && u[i] != 0.0 {
                for j in 0..k {
                    binv[i * k + j] -= u[i] * binv[leave * k + j];
                }
            }
        }
        match basis[leave] {
            Var::Column(c) => basic_col[c] = false,
            Var::Surplus(s) => basic_surplus[s] = false,
        }
        match var {
            Var::Column(c) => {
                basic_col[c] = true;
                cost_b[leave] = cols[c].1;
            }
            Var::Surplus(s) => {
                basic_surplus[s] = true;
                cost_b[leave] = 0.0;
            }
        }
        basis[leave] = var;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractional_triangle() {
        // Three pairs over three requests at price 2: the LP takes each at 1/2.
        let b = covering_bound(0b111, &[(0b011, 2), (0b110, 2), (0b101, 2)], f64::INFINITY);
        assert!((b.value - 3.0).abs() < 1e-9, "{}", b.value);
    }

    #[test]
    fn singletons_sum_up() {
        let b = covering_bound(
            0b1011,
            &[(0b0001, 4), (0b0010, 7), (0b1000, 1), (0b0011, 20)],
            f64::INFINITY,
        );
        assert!((b.value - 12.0).abs() < 1e-9);
        assert!(b.reduced_cost(0b0011, 20) >= 9.0 - 1e-9);
    }

    #[test]
    fn duals_are_feasible() {
        let cols = [
            (0b0011, 5),
            (0b0110, 4),
            (0b1100, 6),
            (0b1001, 3),
            (0b1111, 9),
            (0b0100, 2),
        ];
        let b = covering_bound(0b1111, &cols, f64::INFINITY);
        for &(m, p) in &cols {
            assert!(b.reduced_cost(m, p) >= -1e-9);
        }
        // {1,2}@4 + {0,3}@3 is integral and optimal.
        assert!((b.value - 7.0).abs() < 1e-9, "{}", b.value);
    }

    #[test]
    fn early_stop_still_valid() {
        let b = covering_bound(0b111, &[(0b011, 2), (0b110, 2), (0b101, 2)], 0.5);
        assert!(b.value > 0.5 && b.value <= 3.0 + 1e-9);
    }
}
