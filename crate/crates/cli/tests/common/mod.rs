#![allow(dead_code)]

pub mod enumerate;
pub mod http;

use std::path::{Path, PathBuf};

pub const OBJ001: &str = "http://example.org/heritage/object/OBJ001";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            if entry.file_name() != "out" {
                copy_dir(&entry.path(), &target);
            }
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// A scratch copy of the fixture tree, so builds never touch the originals.
pub fn fixture_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixtures(), dir.path());
    dir
}

/// Text between `<script id="story-data" ...>` and its closing tag.
pub fn embedded_json(html: &str) -> &str {
    let open = "<script id=\"story-data\" type=\"application/json\">";
    let start = html.find(open).expect("story-data element") + open.len();
    let end = start + html[start..].find("</script>").expect("closing script tag");
    &html[start..end]
}
