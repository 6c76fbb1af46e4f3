use super::{Expr, ExprError, Func};

impl Expr {
    /// Exact partial derivative with respect to the variable at position `index`.
    pub fn derivative(&self, index: usize) -> Expr {
        if !self.depends_on(index) {
            return Expr::zero();
        }
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => {
                if v.index == index {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Neg(a) => Expr::negate(a.derivative(index)),
            Expr::Add(a, b) => Expr::sum(a.derivative(index), b.derivative(index)),
            Expr::Sub(a, b) => Expr::difference(a.derivative(index), b.derivative(index)),
            Expr::Mul(a, b) => Expr::sum(
                Expr::product(a.derivative(index), (**b).clone()),
                Expr::product((**a).clone(), b.derivative(index)),
            ),
            Expr::Div(a, b) => {
                let num = Expr::difference(
                    Expr::product(a.derivative(index), (**b).clone()),
                    Expr::product((**a).clone(), b.derivative(index)),
                );
                Expr::quotient(num, Expr::power((**b).clone(), Expr::constant(2.0)))
            }
            Expr::Pow(a, b) => {
                let da = a.derivative(index);
                if !b.depends_on(index) {
                    let lowered = match b.as_const() {
                        Some(c) => Expr::constant(c - 1.0),
                        None => Expr::difference((**b).clone(), Expr::one()),
                    };
                    Expr::product(
                        Expr::product((**b).clone(), Expr::power((**a).clone(), lowered)),
                        da,
                    )
                } else {
                    // d(a^b) = a^b (b' ln a + b a'/a)
                    let log_term = Expr::product(
                        b.derivative(index),
                        Expr::apply(Func::Log, (**a).clone()),
                    );
                    let ratio_term = Expr::quotient(Expr::product((**b).clone(), da), (**a).clone());
                    Expr::product(self.clone(), Expr::sum(log_term, ratio_term))
                }
            }
            Expr::Func(f, a) => {
                let da = a.derivative(index);
                let arg = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::apply(Func::Cos, arg),
                    Func::Cos => Expr::negate(Expr::apply(Func::Sin, arg)),
                    Func::Tan => Expr::sum(
                        Expr::one(),
                        Expr::power(Expr::apply(Func::Tan, arg), Expr::constant(2.0)),
                    ),
                    Func::Exp => Expr::apply(Func::Exp, arg),
                    Func::Log => return Expr::quotient(da, arg),
                    Func::Sqrt => {
                        return Expr::quotient(
                            da,
                            Expr::product(Expr::constant(2.0), Expr::apply(Func::Sqrt, arg)),
                        )
                    }
                };
                Expr::product(outer, da)
            }
        }
    }

    /// Derivative with respect to a variable given by name within `variables`.
    pub fn derivative_by_name<S: AsRef<str>>(
        &self,
        name: &str,
        variables: &[S],
    ) -> Result<Expr, ExprError> {
        let index = variables
            .iter()
            .position(|v| v.as_ref() == name)
            .ok_or_else(|| ExprError::UnknownVariable(name.to_string()))?;
        Ok(self.derivative(index))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn check(src: &str, vars: &[&str], wrt: &str, expected: &str, points: &[&[f64]]) {
        let e = parse(src, vars).unwrap();
        let d = e.derivative_by_name(wrt, vars).unwrap();
        let x = parse(expected, vars).unwrap();
        for pt in points {
            let got = d.eval(pt).unwrap();
            let want = x.eval(pt).unwrap();
            assert!((got - want).abs() <= 1e-14 * (1.0 + want.abs()), "{src} d/d{wrt} at {pt:?}: {got} vs {want}");
        }
    }

    #[test]
    fn power_rule() {
        check("x1^2", &["t1", "x1"], "x1", "2*x1", &[&[0.0, 3.0], &[1.0, -0.5]]);
    }

    #[test]
    fn absent_variable_folds_to_zero() {
        let e = parse("x1^2", &["t1", "x1"]).unwrap();
        assert_eq!(e.derivative(0), Expr::zero());
    }

    #[test]
    fn product_and_chain() {
        check(
            "sin(x1)*x2",
            &["x1", "x2"],
            "x1",
            "cos(x1)*x2",
            &[&[0.3, 2.0], &[-1.2, 0.7]],
        );
    }

    #[test]
    fn variable_exponent() {
        check("x^y", &["x", "y"], "y", "x^y*log(x)", &[&[2.0, 3.0], &[0.5, 1.5]]);
        check("x^y", &["x", "y"], "x", "y*x^(y-1)", &[&[2.0, 3.0], &[0.5, 1.5]]);
    }

    #[test]
    fn third_derivative_of_sine_square() {
        let e = parse("sin(x)^2", &["x"]).unwrap();
        let d3 = e.derivative(0).derivative(0).derivative(0);
        for x in [0.1, 0.7, 2.0] {
            let want = -4.0 * (2.0 * x as f64).sin();
            assert!((d3.eval(&[x]).unwrap() - want).abs() < 1e-13);
        }
    }
}
