//! Changed-file extraction from unified diffs, for deriving ground truth
//! from fixing patches.

use std::collections::HashSet;

/// Paths touched by a unified diff, in first-seen order, with `a/`, `b/`,
/// `./`, and leading `/` prefixes stripped. Deleted files report their old
/// path.
pub fn changed_files(patch: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut old_path: Option<String> = None;
    for line in patch.lines() {
        if let Some(rest) = line.strip_prefix("--- ") {
            old_path = Some(header_path(rest));
        } else if let Some(rest) = line.strip_prefix("+++ ") {
            let new_path = header_path(rest);
            let chosen = if new_path == "/dev/null" {
                old_path.take()
            } else {
                Some(new_path)
            };
            let Some(chosen) = chosen else { continue };
            let normalized = strip_prefixes(&chosen);
            if normalized.is_empty() || normalized == "dev/null" {
                continue;
            }
            if seen.insert(normalized.clone()) {
                out.push(normalized);
            }
        }
    }
    out
}

/// The path portion of a `---`/`+++` header: everything before the first tab.
fn header_path(rest: &str) -> String {
    rest.split('\t').next().unwrap_or("").trim().to_string()
}

fn strip_prefixes(path: &str) -> String {
    let mut p = path;
    if let Some(rest) = p.strip_prefix("a/").or_else(|| p.strip_prefix("b/")) {
        p = rest;
    }
    loop {
        if let Some(rest) = p.strip_prefix("./") {
            p = rest;
        } else if let Some(rest) = p.strip_prefix('/') {
            p = rest;
        } else {
            break;
        }
    }
    p.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn git_style_patch() {
        let patch = "\
diff --git a/Makefile b/Makefile
index 1111111..2222222 100644
--- a/Makefile
+++ b/Makefile
@@ -10,1 +10,1 @@
-\tgzip doc.txt
+\tgzip -n doc.txt
diff --git a/debian/rules b/debian/rules
--- a/debian/rules
+++ b/debian/rules
@@ -1 +1 @@
-old
+new
";
        assert_eq!(changed_files(patch), vec!["Makefile", "debian/rules"]);
    }

    #[test]
    fn deleted_file_keeps_old_path() {
        let patch = "--- a/stamp.txt\n+++ /dev/null\n@@ -1 +0,0 @@\n-gone\n";
        assert_eq!(changed_files(patch), vec!["stamp.txt"]);
    }

    #[test]
    fn timestamped_headers_and_duplicates() {
        let patch = "\
--- src/x.c\t2017-08-01 10:00:00.000000000 +0000
+++ src/x.c\t2017-08-02 10:00:00.000000000 +0000
@@ -1 +1 @@
-a
+b
--- src/x.c
+++ src/x.c
@@ -2 +2 @@
-c
+d
";
        assert_eq!(changed_files(patch), vec!["src/x.c"]);
    }

    #[test]
    fn empty_patch() {
        assert!(changed_files("").is_empty());
        assert!(changed_files("just prose\n").is_empty());
    }
}
