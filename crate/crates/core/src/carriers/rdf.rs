//! RDF triples.

/// Object position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RdfObject {
    Resource(String),
    Literal(String),
}

impl RdfObject {
    pub fn is_literal(&self) -> bool {
        matches!(self, RdfObject::Literal(_))
    }

    pub fn as_str(&self) -> &str {
        match self {
            RdfObject::Resource(s) | RdfObject::Literal(s) => s,
        }
    }
}

/// A subject-predicate-object statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RdfTriple {
    pub subject: String,
    pub predicate: String,
    pub object: RdfObject,
}

impl RdfTriple {
    pub fn resource(subject: &str, predicate: &str, object: &str) -> Self {
        RdfTriple {
            subject: subject.to_string(),
            predicate: predicate.to_string(),
            object: RdfObject::Resource(object.to_string()),
        }
    }

    pub fn literal(subject: &str, predicate: &str, object: &str) -> Self {
        RdfTriple {
            subject: subject.to_string(),
            predicate: predicate.to_string(),
            object: RdfObject::Literal(object.to_string()),
        }
    }
}
