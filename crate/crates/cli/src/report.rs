use serde_json::{Map, Value};

/// A failed run: exit status and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<tnkit::Error> for Failure {
    fn from(e: tnkit::Error) -> Self {
        let code = if e.is_numerical() { 2 } else { 1 };
        Failure { code, message: e.to_string() }
    }
}

pub type Outcome = Result<(), Failure>;

/// One JSON object per run. `serde_json::Map` keeps keys sorted, so equal
/// runs print identical lines.
pub struct RunReport {
    fields: Map<String, Value>,
}

impl RunReport {
    pub fn new(args: &[String]) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), Value::from(args.to_vec()));
        RunReport { fields }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    /// Serializes any `Serialize` value into the report.
    pub fn set_json(&mut self, key: &str, value: &impl serde::Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.fields.insert(key.to_string(), v);
    }

    pub fn to_line(&self) -> String {
        Value::Object(self.fields.clone()).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted() {
        let mut r = RunReport::new(&["norm".to_string()]);
        r.set("zeta", 1);
        r.set("alpha", 2);
        assert_eq!(r.to_line(), r#"{"alpha":2,"command":["norm"],"zeta":1}"#);
    }

    #[test]
    fn numerical_errors_exit_with_two() {
        let f: Failure = tnkit::Error::Numerical("x".into()).into();
        assert_eq!(f.code, 2);
        let f: Failure = tnkit::Error::Validation("x".into()).into();
        assert_eq!(f.code, 1);
    }
}
