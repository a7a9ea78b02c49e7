//! List-DSL functions and the lambdas passed to higher-order ones.

use std::fmt;

use super::value::Type;

/// `int -> int` lambdas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntFn {
    Inc,
    Dec,
    Mul2,
    Div2,
    Neg,
    Square,
    Mul3,
    Div3,
    Mul4,
    Div4,
}

/// `int -> bool` lambdas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredFn {
    Positive,
    Negative,
    Even,
    Odd,
}

/// `int -> int -> int` lambdas for ZIPWITH and SCANL1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinFn {
    Add,
    Sub,
    Mul,
    Min,
    Max,
}

impl IntFn {
    pub const ALL: [IntFn; 10] = [
        IntFn::Inc,
        IntFn::Dec,
        IntFn::Mul2,
        IntFn::Div2,
        IntFn::Neg,
        IntFn::Square,
        IntFn::Mul3,
        IntFn::Div3,
        IntFn::Mul4,
        IntFn::Div4,
    ];

    /// Unclamped result; division truncates toward zero.
    pub fn apply(self, x: i32) -> i64 {
        let x = i64::from(x);
        match self {
            IntFn::Inc => x + 1,
            IntFn::Dec => x - 1,
            IntFn::Mul2 => x * 2,
            IntFn::Div2 => x / 2,
            IntFn::Neg => -x,
            IntFn::Square => x * x,
            IntFn::Mul3 => x * 3,
            IntFn::Div3 => x / 3,
            IntFn::Mul4 => x * 4,
            IntFn::Div4 => x / 4,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            IntFn::Inc => "(+1)",
            IntFn::Dec => "(-1)",
            IntFn::Mul2 => "(*2)",
            IntFn::Div2 => "(/2)",
            IntFn::Neg => "(*-1)",
            IntFn::Square => "(**2)",
            IntFn::Mul3 => "(*3)",
            IntFn::Div3 => "(/3)",
            IntFn::Mul4 => "(*4)",
            IntFn::Div4 => "(/4)",
        }
    }
}

impl PredFn {
    pub const ALL: [PredFn; 4] = [PredFn::Positive, PredFn::Negative, PredFn::Even, PredFn::Odd];

    pub fn apply(self, x: i32) -> bool {
        match self {
            PredFn::Positive => x > 0,
            PredFn::Negative => x < 0,
            PredFn::Even => x.rem_euclid(2) == 0,
            PredFn::Odd => x.rem_euclid(2) == 1,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            PredFn::Positive => "(>0)",
            PredFn::Negative => "(<0)",
            PredFn::Even => "(%2==0)",
            PredFn::Odd => "(%2==1)",
        }
    }
}

impl BinFn {
    pub const ALL: [BinFn; 5] = [BinFn::Add, BinFn::Sub, BinFn::Mul, BinFn::Min, BinFn::Max];

    pub fn apply(self, a: i32, b: i32) -> i64 {
        let (a, b) = (i64::from(a), i64::from(b));
        match self {
            BinFn::Add => a + b,
            BinFn::Sub => a - b,
            BinFn::Mul => a * b,
            BinFn::Min => a.min(b),
            BinFn::Max => a.max(b),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            BinFn::Add => "(+)",
            BinFn::Sub => "(-)",
            BinFn::Mul => "(*)",
            BinFn::Min => "(MIN)",
            BinFn::Max => "(MAX)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Head,
    Last,
    Take,
    Drop,
    Access,
    Minimum,
    Maximum,
    Reverse,
    Sort,
    Sum,
    Map(IntFn),
    Filter(PredFn),
    Count(PredFn),
    ZipWith(BinFn),
    Scanl1(BinFn),
}

impl Func {
    /// Every function with every admissible lambda, in enumeration order.
    pub fn all() -> Vec<Func> {
        let mut out = vec![
            Func::Head,
            Func::Last,
            Func::Take,
            Func::Drop,
            Func::Access,
            Func::Minimum,
            Func::Maximum,
            Func::Reverse,
            Func::Sort,
            Func::Sum,
        ];
        out.extend(IntFn::ALL.map(Func::Map));
        out.extend(PredFn::ALL.map(Func::Filter));
        out.extend(PredFn::ALL.map(Func::Count));
        out.extend(BinFn::ALL.map(Func::ZipWith));
        out.extend(BinFn::ALL.map(Func::Scanl1));
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Head => "HEAD",
            Func::Last => "LAST",
            Func::Take => "TAKE",
            Func::Drop => "DROP",
            Func::Access => "ACCESS",
            Func::Minimum => "MINIMUM",
            Func::Maximum => "MAXIMUM",
            Func::Reverse => "REVERSE",
            Func::Sort => "SORT",
            Func::Sum => "SUM",
            Func::Map(_) => "MAP",
            Func::Filter(_) => "FILTER",
            Func::Count(_) => "COUNT",
            Func::ZipWith(_) => "ZIPWITH",
            Func::Scanl1(_) => "SCANL1",
        }
    }

    pub fn lambda_token(self) -> Option<&'static str> {
        match self {
            Func::Map(f) => Some(f.token()),
            Func::Filter(p) | Func::Count(p) => Some(p.token()),
            Func::ZipWith(b) | Func::Scanl1(b) => Some(b.token()),
            _ => None,
        }
    }

    pub fn arg_types(self) -> &'static [Type] {
        match self {
            Func::Take | Func::Drop | Func::Access => &[Type::Int, Type::List],
            Func::ZipWith(_) => &[Type::List, Type::List],
            _ => &[Type::List],
        }
    }

    pub fn ret_type(self) -> Type {
        match self {
            Func::Head
            | Func::Last
            | Func::Access
            | Func::Minimum
            | Func::Maximum
            | Func::Sum
            | Func::Count(_) => Type::Int,
            _ => Type::List,
        }
    }

    /// Parse `NAME` plus an optional lambda token.
    pub fn from_tokens(name: &str, lambda: Option<&str>) -> Option<Func> {
        let plain = match name {
            "HEAD" => Some(Func::Head),
            "LAST" => Some(Func::Last),
            "TAKE" => Some(Func::Take),
            "DROP" => Some(Func::Drop),
            "ACCESS" => Some(Func::Access),
            "MINIMUM" => Some(Func::Minimum),
            "MAXIMUM" => Some(Func::Maximum),
            "REVERSE" => Some(Func::Reverse),
            "SORT" => Some(Func::Sort),
            "SUM" => Some(Func::Sum),
            _ => None,
        };
        if let Some(f) = plain {
            return lambda.is_none().then_some(f);
        }
        let lambda = lambda?;
        let int_fn = || IntFn::ALL.into_iter().find(|f| f.token() == lambda);
        // `(%2)` is accepted as a spelling of the even predicate.
        let pred = || {
            if lambda == "(%2)" {
                Some(PredFn::Even)
            } else {
                PredFn::ALL.into_iter().find(|p| p.token() == lambda)
            }
        };
        let bin = || BinFn::ALL.into_iter().find(|b| b.token() == lambda);
        match name {
            "MAP" => int_fn().map(Func::Map),
            "FILTER" => pred().map(Func::Filter),
            "COUNT" => pred().map(Func::Count),
            "ZIPWITH" => bin().map(Func::ZipWith),
            "SCANL1" => bin().map(Func::Scanl1),
            _ => None,
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lambda_token() {
            Some(l) => write!(f, "{} {}", self.name(), l),
            None => f.write_str(self.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_parse_back() {
        for f in Func::all() {
            assert_eq!(Func::from_tokens(f.name(), f.lambda_token()), Some(f));
        }
        assert_eq!(Func::from_tokens("MAP", None), None);
        assert_eq!(Func::from_tokens("HEAD", Some("(+1)")), None);
        assert_eq!(
            Func::from_tokens("FILTER", Some("(%2)")),
            Some(Func::Filter(PredFn::Even))
        );
    }

    #[test]
    fn division_truncates_toward_zero() {
        assert_eq!(IntFn::Div2.apply(-3), -1);
        assert_eq!(IntFn::Div3.apply(-7), -2);
        assert_eq!(IntFn::Div4.apply(7), 1);
    }

    #[test]
    fn parity_of_negatives() {
        assert!(PredFn::Odd.apply(-3));
        assert!(PredFn::Even.apply(-4));
        assert!(!PredFn::Even.apply(-3));
    }
}
