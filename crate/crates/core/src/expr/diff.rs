use super::{Expr, Func};

pub(super) fn diff(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Pi | Expr::Param(_) => Expr::Num(0.0),
        Expr::X => Expr::Num(1.0),
        Expr::Neg(a) => Expr::neg(diff(a)),
        Expr::Add(a, b) => Expr::add(diff(a), diff(b)),
        Expr::Sub(a, b) => Expr::sub(diff(a), diff(b)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(diff(a), (**b).clone()),
            Expr::mul((**a).clone(), diff(b)),
        ),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(
                Expr::mul(diff(a), (**b).clone()),
                Expr::mul((**a).clone(), diff(b)),
            ),
            Expr::pow((**b).clone(), 2),
        ),
        Expr::Pow(a, n) => match n {
            0 => Expr::Num(0.0),
            1 => diff(a),
            _ => Expr::mul(
                Expr::mul(Expr::Num(*n as f64), Expr::pow((**a).clone(), n - 1)),
                diff(a),
            ),
        },
        Expr::Call(f, a) => {
            let inner = diff(a);
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, (**a).clone()),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, (**a).clone())),
                Func::Exp => Expr::call(Func::Exp, (**a).clone()),
            };
            Expr::mul(outer, inner)
        }
    }
}
