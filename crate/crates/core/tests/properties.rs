//! Randomized invariants for the expression layer.

use phaseplane::Expr;
use proptest::prelude::*;

/// Random well-formed expression source text over x and v.
fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("v".to_string()),
        (0.0..100.0_f64).prop_map(|c| format!("{c:.4}")),
        (0u32..30).prop_map(|n| n.to_string()),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})+({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})-({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/({b})")),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp({a})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.prop_map(|a| format!("sqrt({a})")),
        ]
    })
}

proptest! {
    /// Printing and reparsing is a fixed point of the parser.
    #[test]
    fn print_parse_round_trip(src in expr_source()) {
        let parsed = Expr::parse(&src).unwrap();
        let printed = parsed.to_string();
        let reparsed = Expr::parse(&printed)
            .unwrap_or_else(|e| panic!("`{printed}` failed to reparse: {e}"));
        prop_assert_eq!(parsed, reparsed);
    }

    /// First partials agree with central finite differences wherever the
    /// expression is smooth and tame.
    #[test]
    fn derivatives_match_finite_differences(
        src in expr_source(),
        x in -2.0..2.0_f64,
        v in -2.0..2.0_f64,
    ) {
        let expr = Expr::parse(&src).unwrap();
        let Ok(full) = expr.eval_full(x, v) else { return Ok(()) };
        let h = 1e-6;
        let stencil: Option<Vec<f64>> = [
            (x + h, v), (x - h, v), (x, v + h), (x, v - h),
        ]
        .iter()
        .map(|&(sx, sv)| expr.eval(sx, sv).ok().filter(|y| y.is_finite()))
        .collect();
        let Some(s) = stencil else { return Ok(()) };
        let magnitude = s.iter().fold(full.value.abs(), |m, y| m.max(y.abs()));
        // Near-singular points make the FD stencil meaningless.
        prop_assume!(full.value.is_finite() && magnitude < 1e4);
        prop_assume!(full.d_x.abs() < 1e4 && full.d_v.abs() < 1e4);
        prop_assume!(full.d_xx.abs() < 1e4 && full.d_vv.abs() < 1e4);
        let fd_x = (s[0] - s[1]) / (2.0 * h);
        let fd_v = (s[2] - s[3]) / (2.0 * h);
        let tol = 1e-5 * (1.0 + magnitude);
        prop_assert!(
            (full.d_x - fd_x).abs() <= tol * (1.0 + full.d_x.abs()),
            "d_x {} vs FD {} for `{}` at ({}, {})", full.d_x, fd_x, expr, x, v
        );
        prop_assert!(
            (full.d_v - fd_v).abs() <= tol * (1.0 + full.d_v.abs()),
            "d_v {} vs FD {} for `{}` at ({}, {})", full.d_v, fd_v, expr, x, v
        );
    }

    /// Evaluation is deterministic: identical inputs, identical bits.
    #[test]
    fn evaluation_is_deterministic(
        src in expr_source(),
        x in -2.0..2.0_f64,
        v in -2.0..2.0_f64,
    ) {
        let expr = Expr::parse(&src).unwrap();
        let first = expr.eval(x, v);
        let second = Expr::parse(&src).unwrap().eval(x, v);
        match (first, second) {
            (Ok(a), Ok(b)) => prop_assert!(a.to_bits() == b.to_bits()),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "divergent outcomes: {a:?} vs {b:?}"),
        }
    }
}
