use std::collections::{BTreeMap, BTreeSet};

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn digits_after(name: &str, prefix: &str) -> bool {
    name.strip_prefix(prefix).is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit()))
}

/// Names the translation itself uses for rule variables, or that the
/// program syntax gives a meaning.
fn is_reserved(name: &str) -> bool {
    matches!(name, "D" | "HasResult" | "null" | "true" | "false" | "not" | "filter")
        || digits_after(name, "ID")
        || digits_after(name, "G")
        || name.starts_with("v1_")
        || name.starts_with("v2_")
        || (name.starts_with('z') && name[1..].starts_with(|c: char| c.is_ascii_digit()))
}

fn sanitize(name: &str) -> String {
    let body: String = name.chars().map(|c| if c.is_alphanumeric() || c == '_' { c } else { '_' }).collect();
    format!("q_{body}")
}

/// Injective map from query variable names to rule variable names. Names
/// that are valid and unreserved map to themselves.
#[derive(Clone, Debug, Default)]
pub(crate) struct VarNames {
    map: BTreeMap<String, String>,
}

impl VarNames {
    pub(crate) fn new<'a>(vars: impl IntoIterator<Item = &'a String>) -> VarNames {
        let all: BTreeSet<&String> = vars.into_iter().collect();
        let mut taken = BTreeSet::new();
        let mut map = BTreeMap::new();
        for v in &all {
            if is_identifier(v) && !is_reserved(v) {
                taken.insert(v.to_string());
                map.insert(v.to_string(), v.to_string());
            }
        }
        for v in &all {
            if map.contains_key(*v) {
                continue;
            }
            let mut name = sanitize(v);
            while taken.contains(&name) {
                name.push('_');
            }
            taken.insert(name.clone());
            map.insert(v.to_string(), name);
        }
        VarNames { map }
    }

    pub(crate) fn get(&self, var: &str) -> String {
        match self.map.get(var) {
            Some(n) => n.clone(),
            None => {
                if is_identifier(var) && !is_reserved(var) {
                    var.to_string()
                } else {
                    sanitize(var)
                }
            }
        }
    }
}
