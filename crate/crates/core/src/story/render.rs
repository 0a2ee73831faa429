use std::fmt::Write;

use super::compose::{Cell, StoryDocument, StorySection};
use super::config::ViewKind;
use crate::mapping::percent_encode;

/// Where the viewer bundle is served from.
pub const VIEWER_SCRIPT: &str = "/assets/viewer.js";

/// Foreground/background pairs of the default stylesheet.
pub const THEME: &[(&str, &str, &str)] = &[
    ("text", "#1A1A1A", "#FFFFFF"),
    ("muted", "#4D4D4D", "#FFFFFF"),
    ("link", "#0B57D0", "#FFFFFF"),
    ("table-header", "#1A1A1A", "#EDEDED"),
    ("notice", "#1A1A1A", "#F3F3F3"),
    ("error", "#8A1C1C", "#FDECEC"),
];

/// Canonical JSON of the document: fixed key order, no insignificant
/// whitespace, and `<` escaped so the text can sit inside a script element.
pub fn render_json(doc: &StoryDocument) -> String {
    let json = serde_json::to_string(doc).expect("story documents always serialize");
    json.replace('<', "\\u003c")
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// `/story` link for a related object, keeping the current config.
pub fn story_link(object: &str, config: &str) -> String {
    format!("/story?object={}&config={}", percent_encode(object), percent_encode(config))
}

fn stylesheet() -> String {
    let color = |name: &str| THEME.iter().find(|(n, _, _)| *n == name).expect("theme entry");
    let (_, text, bg) = color("text");
    let (_, muted, _) = color("muted");
    let (_, link, _) = color("link");
    let (_, th, th_bg) = color("table-header");
    let (_, notice, notice_bg) = color("notice");
    let (_, error, error_bg) = color("error");
    format!(
        "body{{margin:0;font:16px/1.5 system-ui,sans-serif;color:{text};background:{bg}}}\n\
         main{{max-width:60rem;margin:0 auto;padding:1rem}}\n\
         .story-section{{margin:2rem 0}}\n\
         .muted,dt{{color:{muted}}}\n\
         a{{color:{link}}}\n\
         table{{border-collapse:collapse}}\n\
         th{{color:{th};background:{th_bg};text-align:left}}\n\
         th,td{{padding:.25rem .5rem;border-bottom:1px solid #BDBDBD}}\n\
         .notice{{color:{notice};background:{notice_bg};padding:.5rem}}\n\
         .error{{color:{error};background:{error_bg};padding:.5rem}}\n"
    )
}

fn cell_html(cell: Option<&Cell>, config: &str, as_story_link: bool) -> String {
    match cell {
        None => String::new(),
        Some(c) if c.is_iri() && as_story_link => {
            format!("<a href=\"{}\">{}</a>", esc(&story_link(&c.value, config)), esc(&c.value))
        }
        Some(c) if c.is_iri() => format!("<a href=\"{0}\">{0}</a>", esc(&c.value)),
        Some(c) => esc(&c.value),
    }
}

fn fallback(out: &mut String, s: &StorySection, config: &str) {
    if let Some(text) = &s.text {
        for para in text.split("\n\n").filter(|p| !p.trim().is_empty()) {
            let _ = writeln!(out, "<p>{}</p>", esc(para.trim()));
        }
    }
    if let Some(e) = &s.error {
        let _ = writeln!(out, "<p class=\"error\" role=\"alert\">{}</p>", esc(e));
    }
    if let Some(n) = &s.notice {
        let _ = writeln!(out, "<p class=\"notice\">{}</p>", esc(n));
    }
    if s.rows.is_empty() {
        return;
    }
    match s.view {
        ViewKind::Facts => {
            out.push_str("<dl>\n");
            for row in &s.rows {
                let _ = writeln!(
                    out,
                    "<dt>{}</dt><dd>{}</dd>",
                    cell_html(row.first().and_then(Option::as_ref), config, false),
                    cell_html(row.get(1).and_then(Option::as_ref), config, false)
                );
            }
            out.push_str("</dl>\n");
        }
        ViewKind::RelatedLinks => {
            let label_col = s.columns.iter().position(|c| c == "label");
            out.push_str("<ul>\n");
            for row in &s.rows {
                let Some(Some(link)) = row.first() else { continue };
                let label = label_col
                    .and_then(|i| row.get(i).and_then(Option::as_ref))
                    .map_or(link.value.as_str(), |c| c.value.as_str());
                if link.is_iri() {
                    let _ = writeln!(
                        out,
                        "<li><a href=\"{}\">{}</a></li>",
                        esc(&story_link(&link.value, config)),
                        esc(label)
                    );
                } else {
                    let _ = writeln!(out, "<li>{}</li>", esc(label));
                }
            }
            out.push_str("</ul>\n");
        }
        ViewKind::Image => {
            let caption_col = s.columns.iter().position(|c| c == "caption");
            for row in &s.rows {
                let Some(Some(src)) = row.first() else { continue };
                let caption = caption_col.and_then(|i| row.get(i).and_then(Option::as_ref));
                let alt = caption.map_or("", |c| c.value.as_str());
                let _ = write!(out, "<figure><img src=\"{}\" alt=\"{}\">", esc(&src.value), esc(alt));
                if caption.is_some() {
                    let _ = write!(out, "<figcaption>{}</figcaption>", esc(alt));
                }
                out.push_str("</figure>\n");
            }
        }
        _ => {
            out.push_str("<table>\n<thead><tr>");
            for c in &s.columns {
                let _ = write!(out, "<th scope=\"col\">{}</th>", esc(c));
            }
            out.push_str("</tr></thead>\n<tbody>\n");
            for row in &s.rows {
                out.push_str("<tr>");
                for cell in row {
                    let _ = write!(out, "<td>{}</td>", cell_html(cell.as_ref(), config, false));
                }
                out.push_str("</tr>\n");
            }
            out.push_str("</tbody>\n</table>\n");
        }
    }
}

/// A self-contained HTML5 page: static fallbacks per section, the document
/// as embedded JSON, and the viewer script.
pub fn render_html(doc: &StoryDocument) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    out.push_str("<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n");
    let _ = writeln!(out, "<title>{}</title>", esc(&doc.title));
    let _ = write!(out, "<style>\n{}</style>\n", stylesheet());
    out.push_str("</head>\n<body>\n");
    let _ = writeln!(
        out,
        "<main id=\"story\" data-object=\"{}\" data-config=\"{}\">",
        esc(&doc.object),
        esc(&doc.config)
    );
    let _ = writeln!(out, "<h1>{}</h1>", esc(&doc.title));
    let _ = writeln!(out, "<p class=\"muted\">{}</p>", esc(&doc.object));
    for s in &doc.sections {
        let _ = writeln!(
            out,
            "<section id=\"section-{}\" class=\"story-section\" data-view=\"{}\">",
            esc(&s.id),
            s.view
        );
        let _ = writeln!(out, "<h2>{}</h2>", esc(&s.heading));
        fallback(&mut out, s, &doc.config);
        out.push_str("</section>\n");
    }
    out.push_str("</main>\n");
    let _ = writeln!(out, "<script id=\"story-data\" type=\"application/json\">{}</script>", render_json(doc));
    let _ = writeln!(out, "<script src=\"{VIEWER_SCRIPT}\" defer></script>");
    out.push_str("</body>\n</html>\n");
    out
}

fn channel(c: u8) -> f64 {
    let c = f64::from(c) / 255.0;
    if c <= 0.03928 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn parse_hex(color: &str) -> Option<[u8; 3]> {
    let hex = color.strip_prefix('#')?;
    if hex.len() != 6 || !hex.is_ascii() {
        return None;
    }
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    Some([byte(0)?, byte(2)?, byte(4)?])
}

/// Relative luminance of a `#RRGGBB` color.
pub fn relative_luminance(color: &str) -> Option<f64> {
    let [r, g, b] = parse_hex(color)?;
    Some(0.2126 * channel(r) + 0.7152 * channel(g) + 0.0722 * channel(b))
}

/// Contrast ratio between two `#RRGGBB` colors, from 1 to 21.
pub fn contrast_ratio(a: &str, b: &str) -> Option<f64> {
    let (la, lb) = (relative_luminance(a)?, relative_luminance(b)?);
    let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
    Some((hi + 0.05) / (lo + 0.05))
}
