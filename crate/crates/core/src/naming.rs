//! Name sanitization shared by port derivation, code generation and BPMN ids.

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "null", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "void", "volatile", "while", "var", "record", "yield",
];

/// Joins the ASCII alphanumeric words of `text` in camel case.
///
/// The first word keeps its case, every following word gets an upper-case
/// first letter: `"raw material"` becomes `rawMaterial`,
/// `"Manu-WBFForManufacturing"` becomes `ManuWBFForManufacturing`.
pub fn camel_case(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, word) in text
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .enumerate()
    {
        if i == 0 {
            out.push_str(word);
        } else {
            let mut chars = word.chars();
            if let Some(first) = chars.next() {
                out.push(first.to_ascii_uppercase());
                out.push_str(chars.as_str());
            }
        }
    }
    out
}

/// Letters, digits and underscores, not starting with a digit.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Sanitizes `text` into a legal Java identifier, or `None` when nothing usable remains.
pub fn java_identifier(text: &str) -> Option<String> {
    let mut ident = camel_case(text);
    if ident.is_empty() {
        return None;
    }
    if ident.starts_with(|c: char| c.is_ascii_digit()) {
        ident.insert(0, '_');
    }
    if JAVA_KEYWORDS.contains(&ident.as_str()) {
        ident.push('_');
    }
    Some(ident)
}

/// Builds an XML NCName of the form `<sanitized text>_<ordinal>`.
///
/// Only ASCII letters, digits and underscores survive sanitization. Because the
/// ordinal never contains an underscore it can always be recovered from the
/// suffix, so distinct ordinals give distinct ids.
pub fn ncname_with_ordinal(text: &str, ordinal: usize) -> String {
    let mut base: String = text
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    if base.is_empty() {
        base.push_str("node");
    } else if base.starts_with(|c: char| c.is_ascii_digit()) {
        base.insert(0, '_');
    }
    format!("{base}_{ordinal}")
}

/// XML 1.0 NCName check restricted to the ASCII range plus alphabetic unicode.
pub fn is_ncname(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}
