//! Model fixtures shared by the benchmarks.

use drig_core::{GroupSizeLaw, Model, WeightModel};

/// `n` individuals of weight 1 with every group of size 2.
pub fn pairs(n: usize, t: f64) -> Model {
    Model::new(WeightModel::constant(n, 1.0).expect("n >= 2"), GroupSizeLaw::fixed(2).expect("k >= 2"), t)
        .expect("t >= 0")
}

/// `n` individuals of weight 1 with power-law group sizes.
pub fn heavy(n: usize, alpha: f64, t: f64) -> Model {
    Model::new(WeightModel::constant(n, 1.0).expect("n >= 2"), GroupSizeLaw::power_law(alpha).expect("alpha > 2"), t)
        .expect("t >= 0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(pairs(10, 1.0).n(), 10);
        assert_eq!(heavy(10, 3.5, 0.0).sizes.alpha(), Some(3.5));
    }
}
