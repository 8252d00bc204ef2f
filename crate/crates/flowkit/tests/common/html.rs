//! Well-formedness check for the generated report: every element closed in
//! order, attributes quoted, entities known. Stricter than HTML requires.

const VOID: [&str; 6] = ["meta", "br", "img", "hr", "link", "input"];
const RAW_TEXT: [&str; 2] = ["style", "script"];
const ENTITIES: [&str; 5] = ["amp", "lt", "gt", "quot", "#39"];

fn check_text(text: &str, at: usize) -> Result<(), String> {
    let mut rest = text;
    while let Some(k) = rest.find('&') {
        let tail = &rest[k + 1..];
        let end = tail.find(';').ok_or_else(|| format!("bare & near byte {at}"))?;
        let name = &tail[..end];
        let numeric = name.strip_prefix('#').is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()));
        if !ENTITIES.contains(&name) && !numeric {
            return Err(format!("unknown entity &{name}; near byte {at}"));
        }
        rest = &tail[end + 1..];
    }
    if text.contains('>') {
        return Err(format!("stray > in text near byte {at}"));
    }
    Ok(())
}

fn check_attrs(attrs: &str, at: usize) -> Result<(), String> {
    let mut rest = attrs.trim();
    while !rest.is_empty() {
        let name_end = rest.find(|c: char| c == '=' || c.is_whitespace()).unwrap_or(rest.len());
        let name = &rest[..name_end];
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_:".contains(c)) {
            return Err(format!("bad attribute name `{name}` near byte {at}"));
        }
        rest = rest[name_end..].trim_start();
        if let Some(value) = rest.strip_prefix('=') {
            let value = value.trim_start();
            let value = value
                .strip_prefix('"')
                .ok_or_else(|| format!("unquoted value for {name} near byte {at}"))?;
            let close = value.find('"').ok_or_else(|| format!("unterminated value near byte {at}"))?;
            check_text(&value[..close], at)?;
            if value[..close].contains('<') {
                return Err(format!("< inside attribute near byte {at}"));
            }
            rest = value[close + 1..].trim_start();
        }
    }
    Ok(())
}

/// Returns the element names in document order when the text is well formed.
pub fn check(doc: &str) -> Result<Vec<String>, String> {
    let body = doc
        .strip_prefix("<!DOCTYPE html>")
        .ok_or("missing doctype")?;
    let offset = doc.len() - body.len();
    let mut open: Vec<String> = Vec::new();
    let mut seen = Vec::new();
    let mut pos = 0;
    while pos < body.len() {
        let rest = &body[pos..];
        let Some(lt) = rest.find('<') else {
            check_text(rest, offset + pos)?;
            break;
        };
        let text = &rest[..lt];
        if open.last().is_some_and(|t| RAW_TEXT.contains(&t.as_str())) {
            if text.contains("</") {
                return Err("unexpected close inside raw text".into());
            }
        } else {
            check_text(text, offset + pos)?;
        }
        let tag_start = pos + lt;
        let gt = body[tag_start..].find('>').ok_or("unterminated tag")? + tag_start;
        let inner = &body[tag_start + 1..gt];
        if inner.contains('<') {
            return Err(format!("< inside tag near byte {}", offset + tag_start));
        }
        if let Some(name) = inner.strip_prefix('/') {
            match open.pop() {
                Some(top) if top == name => {}
                other => return Err(format!("</{name}> closes {other:?} near byte {}", offset + tag_start)),
            }
        } else {
            let self_closing = inner.ends_with('/');
            let inner = inner.trim_end_matches('/');
            let name_end = inner.find(char::is_whitespace).unwrap_or(inner.len());
            let name = &inner[..name_end];
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(format!("bad tag name `{name}` near byte {}", offset + tag_start));
            }
            check_attrs(&inner[name_end..], offset + tag_start)?;
            seen.push(name.to_string());
            if !self_closing && !VOID.contains(&name) {
                open.push(name.to_string());
            }
        }
        pos = gt + 1;
    }
    if !open.is_empty() {
        return Err(format!("unclosed elements {open:?}"));
    }
    if seen.first().map(String::as_str) != Some("html") {
        return Err("root element is not html".into());
    }
    Ok(seen)
}

/// Text between `<td class="{class}">` and the next `</td>`, in order.
pub fn cells(doc: &str, class: &str) -> Vec<String> {
    let open = format!("<td class=\"{class}\">");
    doc.match_indices(&open)
        .map(|(k, _)| {
            let from = k + open.len();
            let to = doc[from..].find("</td>").map_or(doc.len(), |e| from + e);
            doc[from..to].to_string()
        })
        .collect()
}
