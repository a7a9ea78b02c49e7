use super::func::Func;
use super::program::ListProgram;
use super::value::{clamp, Value};
use super::ListError;

/// Run `prog` on `input`; see [`ListProgram::execute`].
pub fn execute_list(prog: &ListProgram, input: &[Value]) -> Result<Value, ListError> {
    prog.execute(input)
}

fn list_arg(v: &Value) -> Option<&[i32]> {
    match v {
        Value::List(xs) => Some(xs),
        _ => None,
    }
}

fn int_arg(v: &Value) -> Option<i32> {
    match v {
        Value::Int(x) => Some(*x),
        _ => None,
    }
}

fn index(n: i32, len: usize, inclusive: bool) -> Option<usize> {
    let n = usize::try_from(n).ok()?;
    if n < len || (inclusive && n == len) {
        Some(n)
    } else {
        None
    }
}

fn eval(func: Func, args: &[&Value]) -> Option<Value> {
    let v = match func {
        Func::Head => Value::Int(*list_arg(args[0])?.first()?),
        Func::Last => Value::Int(*list_arg(args[0])?.last()?),
        Func::Take => {
            let xs = list_arg(args[1])?;
            Value::List(xs[..index(int_arg(args[0])?, xs.len(), true)?].to_vec())
        }
        Func::Drop => {
            let xs = list_arg(args[1])?;
            Value::List(xs[index(int_arg(args[0])?, xs.len(), true)?..].to_vec())
        }
        Func::Access => {
            let xs = list_arg(args[1])?;
            Value::Int(xs[index(int_arg(args[0])?, xs.len(), false)?])
        }
        Func::Minimum => Value::Int(*list_arg(args[0])?.iter().min()?),
        Func::Maximum => Value::Int(*list_arg(args[0])?.iter().max()?),
        Func::Reverse => Value::List(list_arg(args[0])?.iter().rev().copied().collect()),
        Func::Sort => {
            let mut xs = list_arg(args[0])?.to_vec();
            xs.sort_unstable();
            Value::List(xs)
        }
        Func::Sum => {
            let xs = list_arg(args[0])?;
            if xs.is_empty() {
                return None;
            }
            Value::int(xs.iter().map(|&x| i64::from(x)).sum())
        }
        Func::Map(f) => Value::List(list_arg(args[0])?.iter().map(|&x| clamp(f.apply(x))).collect()),
        Func::Filter(p) => Value::List(list_arg(args[0])?.iter().copied().filter(|&x| p.apply(x)).collect()),
        Func::Count(p) => Value::Int(list_arg(args[0])?.iter().filter(|&&x| p.apply(x)).count() as i32),
        Func::ZipWith(b) => {
            let (xs, ys) = (list_arg(args[0])?, list_arg(args[1])?);
            Value::List(xs.iter().zip(ys).map(|(&x, &y)| clamp(b.apply(x, y))).collect())
        }
        Func::Scanl1(b) => {
            let xs = list_arg(args[0])?;
            let mut out = Vec::with_capacity(xs.len());
            for &x in xs {
                let next = match out.last() {
                    None => x,
                    Some(&acc) => clamp(b.apply(acc, x)),
                };
                out.push(next);
            }
            Value::List(out)
        }
    };
    Some(v)
}

/// Apply one function. Any `Null` or ill-typed argument, and any partial
/// function outside its domain, yields `Null`.
pub fn apply(func: Func, args: &[&Value]) -> Value {
    if args.len() != func.arg_types().len() {
        return Value::Null;
    }
    eval(func, args).unwrap_or(Value::Null)
}
