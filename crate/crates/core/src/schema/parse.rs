use super::model::TaskTypeSchema;
use super::validate::validate_schema;
use super::SchemaError;

/// Error codes from [`validate_schema`] that make a document unparseable
/// rather than merely invalid.
const STRUCTURAL: [&str; 3] = ["invalid_version", "duplicate_id", "dangling_reference"];

/// Parses a schema document. Unknown fields are rejected; the result is in
/// canonical order.
pub fn parse_schema(text: &str) -> Result<TaskTypeSchema, SchemaError> {
    let mut schema: TaskTypeSchema =
        serde_json::from_str(text).map_err(|e| SchemaError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    schema.canonicalize();

    let report = validate_schema(&schema);
    if let Some(f) = report
        .errors
        .iter()
        .find(|f| STRUCTURAL.contains(&f.code.as_str()))
    {
        return Err(match f.code.as_str() {
            "duplicate_id" => SchemaError::DuplicateId(f.subject.clone()),
            "dangling_reference" => SchemaError::DanglingReference {
                edge: f.subject.clone(),
                message: f.message.clone(),
            },
            _ => SchemaError::InvalidVersion(schema.version),
        });
    }
    Ok(schema)
}

/// Canonical serialization: sorted keys, node sets sorted by id, edge lists
/// sorted by their fields, two-space indentation, trailing newline.
pub fn serialize_schema(schema: &TaskTypeSchema) -> String {
    let mut canonical = schema.clone();
    canonical.canonicalize();
    crate::canonical::to_pretty(&canonical)
}
