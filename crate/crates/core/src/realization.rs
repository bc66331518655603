//! Ho-Kalman realization of a state-space model from Markov parameters.
//!
//! With `l = floor(L / 2)`, the blocks `G_1..G_{2l}` fill the `l x (l+1)`
//! block Hankel matrix `H` (block `(i, j)` is `G_{i+j+1}`). `H-` is its first
//! `l` block columns and `H+` its last `l`. For the rank-`n` truncated SVD
//! `H- ~ W S V'`:
//!
//! ```text
//! O    = W S^{1/2}        (observability factor)
//! Ctrl = S^{1/2} V'       (controllability factor)
//! C    = first p rows of O
//! B    = first m columns of Ctrl
//! A    = O^+ H+ Ctrl^+ = S^{-1/2} W' H+ V S^{-1/2}
//! D    = G_0
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lti::{hankel_from_markov, impulse_response_distance, Horizon, MarkovBlock, StateSpaceModel};

/// `sigma_n(H-) / sigma_1(H-)` below this rejects order `n`.
pub const ORDER_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RealizationReport {
    pub model: StateSpaceModel,
    /// Singular values of `H-`, non-increasing.
    pub hankel_sv: Vec<f64>,
    /// `sigma_n(H-)`.
    pub sigma_n: f64,
    /// Whether the recovered `A` is strictly stable.
    pub stable: bool,
    pub observability: DMatrix<f64>,
    pub controllability: DMatrix<f64>,
}

pub fn ho_kalman(g: &MarkovBlock, order: usize) -> Result<RealizationReport> {
    if order == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if g.horizon() < 2 * order + 1 {
        return Err(Error::Horizon(format!(
            "order {order} needs horizon at least {}, got {}",
            2 * order + 1,
            g.horizon()
        )));
    }
    let (p, m) = (g.output_dim(), g.input_dim());
    let half = g.horizon() / 2;
    let hankel = hankel_from_markov(g, half, half + 1)?;
    let h_minus = hankel.columns(0, m * half).into_owned();
    let h_plus = hankel.columns(m, m * half).into_owned();

    let svd = h_minus.svd(true, true);
    let hankel_sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    if order > hankel_sv.len() {
        return Err(Error::RankDeficient { order, ratio: 0.0 });
    }
    let sigma_1 = hankel_sv[0];
    let sigma_n = hankel_sv[order - 1];
    let ratio = if sigma_1 > 0.0 { sigma_n / sigma_1 } else { 0.0 };
    if !(ratio >= ORDER_TOL) {
        return Err(Error::RankDeficient { order, ratio });
    }

    let left = svd.u.as_ref().expect("left singular vectors requested").columns(0, order);
    let right_t = svd.v_t.as_ref().expect("right singular vectors requested").rows(0, order);
    let root = DVector::from_iterator(order, hankel_sv[..order].iter().map(|s| s.sqrt()));
    let inv_root = root.map(|r| 1.0 / r);

    let observability = left * DMatrix::from_diagonal(&root);
    let controllability = DMatrix::from_diagonal(&root) * right_t;
    let a = DMatrix::from_diagonal(&inv_root)
        * left.transpose()
        * &h_plus
        * right_t.transpose()
        * DMatrix::from_diagonal(&inv_root);
    let c = observability.rows(0, p).into_owned();
    let b = controllability.columns(0, m).into_owned();
    let d = g.block(0).into_owned();

    let model = StateSpaceModel::new(a, b, c, d)?;
    let stable = model.is_stable();
    Ok(RealizationReport {
        model,
        hankel_sv,
        sigma_n,
        stable,
        observability,
        controllability,
    })
}

/// Impulse-response distance over `G_0..G_L`; invariant under similarity, so
/// it compares realizations without aligning their state coordinates.
pub fn realization_error(truth: &StateSpaceModel, estimate: &StateSpaceModel, horizon: usize) -> Result<f64> {
    impulse_response_distance(truth, estimate, Horizon::Fixed(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{markov_parameters, random_stable_model};
    use approx::assert_abs_diff_eq;

    fn scalar(a: f64, b: f64, c: f64, d: f64) -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, d),
        )
        .unwrap()
    }

    #[test]
    fn scalar_recovery() {
        let g = markov_parameters(&scalar(0.5, 1.0, 1.0, 0.3), 3);
        let report = ho_kalman(&g, 1).unwrap();
        let back = markov_parameters(&report.model, 3);
        for (x, y) in back.data().iter().zip([0.3, 1.0, 0.5, 0.25]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-10);
        }
        assert!(report.stable);
    }

    #[test]
    fn feedthrough_is_copied_bitwise() {
        let model = random_stable_model(2, 2, 2, (0.6, 0.9), 3).unwrap();
        let g = markov_parameters(&model, 5);
        let report = ho_kalman(&g, 2).unwrap();
        assert_eq!(report.model.d(), &g.block(0).into_owned());
    }

    #[test]
    fn order_three_round_trip() {
        let model = random_stable_model(3, 1, 1, (0.6, 0.9), 8).unwrap();
        let g = markov_parameters(&model, 7);
        let report = ho_kalman(&g, 3).unwrap();
        let back = markov_parameters(&report.model, 7);
        let rel = (back.data() - g.data()).norm() / g.data().norm();
        assert!(rel < 1e-8, "relative error {rel}");
        assert!(realization_error(&model, &report.model, 7).unwrap() <= 1e-8);
    }

    #[test]
    fn balanced_factors() {
        let model = random_stable_model(3, 2, 2, (0.6, 0.9), 12).unwrap();
        let report = ho_kalman(&markov_parameters(&model, 7), 3).unwrap();
        let obs = report.observability.transpose() * &report.observability;
        let ctrl = &report.controllability * report.controllability.transpose();
        assert!((&obs - &ctrl).norm() <= 1e-8 * obs.norm());
        for k in 0..3 {
            assert_abs_diff_eq!(obs[(k, k)], report.hankel_sv[k], epsilon = 1e-10);
        }
        assert!(report.hankel_sv.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn short_horizon_is_rejected() {
        let g = markov_parameters(&random_stable_model(3, 1, 1, (0.6, 0.9), 1).unwrap(), 6);
        assert!(matches!(ho_kalman(&g, 3), Err(Error::Horizon(_))));
    }

    #[test]
    fn overstated_order_is_rejected() {
        let g = markov_parameters(&random_stable_model(1, 1, 1, (0.6, 0.9), 1).unwrap(), 9);
        assert!(matches!(ho_kalman(&g, 3), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn error_is_zero_under_similarity() {
        let model = random_stable_model(3, 2, 1, (0.6, 0.9), 4).unwrap();
        assert_eq!(realization_error(&model, &model, 10).unwrap(), 0.0);
        let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, -0.3, 1.0, 0.5, 0.0, 0.2, 0.7]);
        let other = model.similarity_transform(&q).unwrap();
        assert!(realization_error(&model, &other, 10).unwrap() < 1e-10);
    }
}
