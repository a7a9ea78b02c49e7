use std::fmt;
use std::str::FromStr;

use super::exec::apply;
use super::func::Func;
use super::value::{Type, Value};
use super::ListError;

/// `v{k} = FUNC [lambda] args...`; argument indices refer to earlier variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub func: Func,
    pub args: Vec<usize>,
}

/// A straight-line program. Variables `v0..v{n-1}` are the inputs; statement
/// `i` defines `v{n+i}`. The last statement's variable is the output.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ListProgram {
    inputs: Vec<Type>,
    stmts: Vec<Statement>,
}

impl ListProgram {
    /// Build a program, checking arity, argument types and that there is at
    /// least one statement.
    pub fn new(inputs: Vec<Type>, stmts: Vec<Statement>) -> Result<Self, ListError> {
        if inputs.is_empty() || inputs.len() > 3 {
            return Err(ListError::BadSignature(inputs.len()));
        }
        if stmts.is_empty() {
            return Err(ListError::EmptyProgram);
        }
        let mut types = inputs.clone();
        for (i, st) in stmts.iter().enumerate() {
            let want = st.func.arg_types();
            if want.len() != st.args.len() {
                return Err(ListError::Arity {
                    stmt: i,
                    expected: want.len(),
                    got: st.args.len(),
                });
            }
            for (&arg, &ty) in st.args.iter().zip(want) {
                match types.get(arg) {
                    None => return Err(ListError::UnboundVar { stmt: i, var: arg }),
                    Some(&t) if t != ty => {
                        return Err(ListError::ArgType {
                            stmt: i,
                            var: arg,
                            expected: ty,
                            got: t,
                        })
                    }
                    Some(_) => {}
                }
            }
            types.push(st.func.ret_type());
        }
        Ok(ListProgram { inputs, stmts })
    }

    pub fn inputs(&self) -> &[Type] {
        &self.inputs
    }

    pub fn statements(&self) -> &[Statement] {
        &self.stmts
    }

    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    pub fn output_type(&self) -> Type {
        self.stmts.last().expect("non-empty").func.ret_type()
    }

    /// Type of every variable, inputs first.
    pub fn var_types(&self) -> Vec<Type> {
        let mut t = self.inputs.clone();
        t.extend(self.stmts.iter().map(|s| s.func.ret_type()));
        t
    }

    /// Drop statements that do not feed the output, renumbering variables.
    pub fn prune(&self) -> ListProgram {
        let n_in = self.inputs.len();
        let total = n_in + self.stmts.len();
        let mut live = vec![false; total];
        live[total - 1] = true;
        for (i, st) in self.stmts.iter().enumerate().rev() {
            if live[n_in + i] {
                for &a in &st.args {
                    live[a] = true;
                }
            }
        }
        let mut remap: Vec<usize> = (0..n_in).collect();
        remap.resize(total, usize::MAX);
        let mut stmts = Vec::new();
        for (i, st) in self.stmts.iter().enumerate() {
            if live[n_in + i] {
                remap[n_in + i] = n_in + stmts.len();
                stmts.push(Statement {
                    func: st.func,
                    args: st.args.iter().map(|&a| remap[a]).collect(),
                });
            }
        }
        ListProgram {
            inputs: self.inputs.clone(),
            stmts,
        }
    }

    /// Canonical tokens: function names, lambdas and variable references.
    pub fn tokens(&self) -> Vec<String> {
        let mut out: Vec<String> = self.inputs.iter().map(|t| t.keyword().to_string()).collect();
        for st in &self.stmts {
            out.push(st.func.name().to_string());
            if let Some(l) = st.func.lambda_token() {
                out.push(l.to_string());
            }
            out.extend(st.args.iter().map(|a| format!("v{a}")));
            out.push(";".to_string());
        }
        out
    }

    /// Run the program on `input`. Slots accept a value of their declared
    /// type or `Null`; anything else is a type error.
    pub fn execute(&self, input: &[Value]) -> Result<Value, ListError> {
        if input.len() != self.inputs.len() {
            return Err(ListError::InputArity {
                expected: self.inputs.len(),
                got: input.len(),
            });
        }
        for (slot, (v, &t)) in input.iter().zip(&self.inputs).enumerate() {
            if let Some(vt) = v.ty() {
                if vt != t {
                    return Err(ListError::InputType {
                        slot,
                        expected: t,
                        got: vt,
                    });
                }
            }
        }
        let mut vars: Vec<Value> = input.to_vec();
        for st in &self.stmts {
            let v = apply(st.func, &st.args.iter().map(|&a| &vars[a]).collect::<Vec<_>>());
            vars.push(v);
        }
        Ok(vars.pop().expect("non-empty"))
    }
}

impl fmt::Display for ListProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.inputs.iter().enumerate() {
            writeln!(f, "v{i} = INPUT {t}")?;
        }
        let n = self.inputs.len();
        for (i, st) in self.stmts.iter().enumerate() {
            write!(f, "v{} = {}", n + i, st.func)?;
            for a in &st.args {
                write!(f, " v{a}")?;
            }
            if i + 1 < self.stmts.len() {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

fn parse_var(tok: &str, line: usize) -> Result<usize, ListError> {
    tok.strip_prefix('v')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| ListError::Syntax {
            line,
            msg: format!("expected variable, found {tok:?}"),
        })
}

impl FromStr for ListProgram {
    type Err = ListError;

    /// One statement per line (`;` also separates statements).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut inputs = Vec::new();
        let mut stmts = Vec::new();
        let lines = s
            .split(['\n', ';'])
            .map(str::trim)
            .filter(|l| !l.is_empty());
        for (line, text) in lines.enumerate() {
            let syntax = |msg: String| ListError::Syntax { line, msg };
            let (lhs, rhs) = text
                .split_once('=')
                .ok_or_else(|| syntax(format!("missing '=' in {text:?}")))?;
            let var = parse_var(lhs.trim(), line)?;
            if var != inputs.len() + stmts.len() {
                return Err(syntax(format!("variables must be numbered in order, got v{var}")));
            }
            let toks: Vec<&str> = rhs.split_whitespace().collect();
            match toks.as_slice() {
                ["INPUT", ty] => {
                    if !stmts.is_empty() {
                        return Err(syntax("inputs must precede statements".into()));
                    }
                    inputs.push(match *ty {
                        "INT" => Type::Int,
                        "LIST" => Type::List,
                        other => return Err(syntax(format!("unknown type {other:?}"))),
                    });
                }
                [name, rest @ ..] => {
                    let (lambda, args) = match rest.first() {
                        Some(t) if t.starts_with('(') => (Some(*t), &rest[1..]),
                        _ => (None, rest),
                    };
                    let func = Func::from_tokens(name, lambda)
                        .ok_or_else(|| syntax(format!("unknown function {rhs:?}")))?;
                    let args = args
                        .iter()
                        .map(|a| parse_var(a, line))
                        .collect::<Result<Vec<_>, _>>()?;
                    stmts.push(Statement { func, args });
                }
                [] => return Err(syntax("empty right-hand side".into())),
            }
        }
        ListProgram::new(inputs, stmts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::listproc::func::{BinFn, IntFn};

    #[test]
    fn text_round_trip() {
        let src = "v0 = INPUT LIST\nv1 = INPUT INT\nv2 = TAKE v1 v0\nv3 = MAP (+1) v2\nv4 = ZIPWITH (+) v2 v3";
        let p: ListProgram = src.parse().unwrap();
        assert_eq!(p.to_string(), src);
        assert_eq!(p.statements()[1].func, Func::Map(IntFn::Inc));
        assert_eq!(p.statements()[2].func, Func::ZipWith(BinFn::Add));
        let semi: ListProgram = "v0 = INPUT LIST; v1 = SORT v0".parse().unwrap();
        assert_eq!(semi.len(), 1);
    }

    #[test]
    fn type_errors_are_reported() {
        let e = "v0 = INPUT INT\nv1 = SORT v0".parse::<ListProgram>().unwrap_err();
        assert!(matches!(e, ListError::ArgType { stmt: 0, var: 0, .. }));
        let e = "v0 = INPUT LIST\nv1 = SORT v3".parse::<ListProgram>().unwrap_err();
        assert!(matches!(e, ListError::UnboundVar { var: 3, .. }));
        let e = "v0 = INPUT LIST\nv2 = SORT v0".parse::<ListProgram>().unwrap_err();
        assert!(matches!(e, ListError::Syntax { .. }));
        let e = "v0 = INPUT LIST".parse::<ListProgram>().unwrap_err();
        assert_eq!(e, ListError::EmptyProgram);
    }

    #[test]
    fn input_type_mismatch_is_the_only_error() {
        let p: ListProgram = "v0 = INPUT LIST\nv1 = HEAD v0".parse().unwrap();
        assert!(matches!(
            p.execute(&[Value::Int(1)]),
            Err(ListError::InputType { slot: 0, .. })
        ));
        assert!(matches!(p.execute(&[]), Err(ListError::InputArity { .. })));
        assert_eq!(p.execute(&[Value::Null]).unwrap(), Value::Null);
    }

    #[test]
    fn prune_removes_dead_statements() {
        let p: ListProgram = "v0 = INPUT LIST\nv1 = SORT v0\nv2 = REVERSE v0\nv3 = MAP (*2) v2"
            .parse()
            .unwrap();
        let q = p.prune();
        assert_eq!(q.to_string(), "v0 = INPUT LIST\nv1 = REVERSE v0\nv2 = MAP (*2) v1");
        let x = [Value::List(vec![1, 2, 3])];
        assert_eq!(p.execute(&x).unwrap(), q.execute(&x).unwrap());
    }
}
