mod common;

use common::gauge_grid_oracle;

#[test]
fn grid_oracle_unit_vector() {
    for m in [1.0, 2.0, 5.0] {
        let g = gauge_grid_oracle(&[1.0], 1.5, 2.5, m, false);
        assert!((g - 1.0 / (m + 1.0 / m)).abs() < 1e-10);
        let g2 = gauge_grid_oracle(&[1.0], 1.5, 2.5, m, true);
        assert!((g2 - 1.0 / (m * m + 1.0 / (m * m)).sqrt()).abs() < 1e-10);
    }
}

#[test]
fn grid_oracle_flat_pair() {
    // 1_2: closed form 1/(m·2^{-1/q} + 2^{-1/p}/m)
    let (q, p, m) = (1.0, 2.0, 3.0);
    let want = 1.0 / (m * 2f64.powf(-1.0 / q) + 2f64.powf(-1.0 / p) / m);
    let got = gauge_grid_oracle(&[1.0, 1.0], q, p, m, false);
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
}
