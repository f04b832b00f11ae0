use crate::error::{FtaError, Result};

/// Pulls the first `@startuml` ... `@enduml` block out of free-form text
/// such as a chat reply. Code-fence lines around or inside the block are
/// dropped; the delimiters themselves are kept.
pub fn extract_uml_block(text: &str) -> Result<String> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| l.trim_start().starts_with("@startuml"))
        .ok_or(FtaError::NoUmlBlock)?;
    let end = lines[start + 1..]
        .iter()
        .position(|l| l.trim_start().starts_with("@enduml"))
        .map(|i| start + 1 + i)
        .ok_or(FtaError::NoUmlBlock)?;
    let mut out = String::new();
    for line in &lines[start..=end] {
        if line.trim_start().starts_with("```") {
            continue;
        }
        out.push_str(line.trim_start_matches('\u{feff}'));
        out.push('\n');
    }
    Ok(out)
}
