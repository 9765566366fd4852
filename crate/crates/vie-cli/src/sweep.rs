//! Sweep-flag parsing: a single value, a comma list, or an `a:b:step` range
//! (inclusive on both ends).

/// Parses a sweep specification into a list of values.
///
/// Accepted forms: `"25"`, `"11,12,13"`, `"14:26:2"`.
pub fn parse_sweep(text: &str) -> Result<Vec<usize>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty sweep specification".into());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{text}` must have the form a:b:step"));
        }
        let start: usize = parse_item(parts[0])?;
        let end: usize = parse_item(parts[1])?;
        let step: usize = parse_item(parts[2])?;
        if step == 0 {
            return Err(format!("range `{text}` has step 0"));
        }
        if end < start {
            return Err(format!("range `{text}` is descending"));
        }
        return Ok((start..=end).step_by(step).collect());
    }
    text.split(',').map(parse_item).collect()
}

fn parse_item(item: &str) -> Result<usize, String> {
    item.trim()
        .parse::<usize>()
        .map_err(|_| format!("`{item}` is not a non-negative integer"))
}

/// Checks the invariant every sweep list must satisfy: non-empty and
/// strictly increasing.
pub fn validate_sweep(name: &str, values: &[usize]) -> Result<(), String> {
    if values.is_empty() {
        return Err(format!("sweep `{name}` is empty"));
    }
    for pair in values.windows(2) {
        if pair[1] <= pair[0] {
            return Err(format!(
                "sweep `{name}` must be strictly increasing, got {} then {}",
                pair[0], pair[1]
            ));
        }
    }
    Ok(())
}
