use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ListError;

/// Smallest representable integer.
pub const INT_MIN: i32 = -256;
/// Largest representable integer.
pub const INT_MAX: i32 = 255;
/// Longest representable list.
pub const MAX_LIST_LEN: usize = 20;

pub fn clamp(v: i64) -> i32 {
    v.clamp(i64::from(INT_MIN), i64::from(INT_MAX)) as i32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Int,
    List,
}

impl Type {
    pub fn keyword(self) -> &'static str {
        match self {
            Type::Int => "INT",
            Type::List => "LIST",
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A runtime value. Integers are always within `[INT_MIN, INT_MAX]` and
/// lists hold at most `MAX_LIST_LEN` elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i32),
    List(Vec<i32>),
    Null,
}

impl Value {
    /// Integer value, clamped into range.
    pub fn int(v: i64) -> Value {
        Value::Int(clamp(v))
    }

    /// List value with every element clamped. Fails on lists longer than 20.
    pub fn list<I: IntoIterator<Item = i64>>(items: I) -> Result<Value, ListError> {
        let v: Vec<i32> = items.into_iter().map(clamp).collect();
        if v.len() > MAX_LIST_LEN {
            return Err(ListError::ListTooLong(v.len()));
        }
        Ok(Value::List(v))
    }

    pub fn ty(&self) -> Option<Type> {
        match self {
            Value::Int(_) => Some(Type::Int),
            Value::List(_) => Some(Type::List),
            Value::Null => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// True iff the value respects the integer range and list-length bounds.
    pub fn in_range(&self) -> bool {
        let ok = |x: &i32| (INT_MIN..=INT_MAX).contains(x);
        match self {
            Value::Int(x) => ok(x),
            Value::List(xs) => xs.len() <= MAX_LIST_LEN && xs.iter().all(ok),
            Value::Null => true,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::Null => f.write_str("NULL"),
            Value::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl FromStr for Value {
    type Err = ListError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "NULL" {
            return Ok(Value::Null);
        }
        let bad = || ListError::BadValue(s.to_string());
        let in_range = |x: i64| {
            if (i64::from(INT_MIN)..=i64::from(INT_MAX)).contains(&x) {
                Ok(x)
            } else {
                Err(bad())
            }
        };
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let inner = inner.trim();
            if inner.is_empty() {
                return Ok(Value::List(Vec::new()));
            }
            let items = inner
                .split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|_| bad()).and_then(in_range))
                .collect::<Result<Vec<_>, _>>()?;
            return Value::list(items);
        }
        let x = s.parse::<i64>().map_err(|_| bad())?;
        Ok(Value::Int(in_range(x)? as i32))
    }
}

/// Render an input tuple as space-separated values.
pub fn format_tuple(values: &[Value]) -> String {
    values
        .iter()
        .map(Value::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_tuple(text: &str) -> Result<Vec<Value>, ListError> {
    text.split_whitespace().map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_forms() {
        assert_eq!(Value::Null.to_string(), "NULL");
        assert_eq!(Value::List(vec![1, -2, 3]).to_string(), "[1,-2,3]");
        assert_eq!("[1, -2,3]".parse::<Value>().unwrap(), Value::List(vec![1, -2, 3]));
        assert_eq!("[]".parse::<Value>().unwrap(), Value::List(vec![]));
        assert_eq!("-256".parse::<Value>().unwrap(), Value::Int(-256));
        assert!("256".parse::<Value>().is_err());
        assert!("[1,x]".parse::<Value>().is_err());
        let long = format!("[{}]", vec!["0"; 21].join(","));
        assert!(matches!(long.parse::<Value>(), Err(ListError::ListTooLong(21))));
    }

    #[test]
    fn tuple_round_trip() {
        let t = vec![Value::List(vec![3, 1]), Value::Int(2), Value::Null];
        assert_eq!(parse_tuple(&format_tuple(&t)).unwrap(), t);
    }

    #[test]
    fn constructors_clamp() {
        assert_eq!(Value::int(400), Value::Int(255));
        assert_eq!(Value::list([-1000, 7]).unwrap(), Value::List(vec![-256, 7]));
    }
}
