use primlib::PrimitiveMeta;

/// Left-aligned columns separated by two spaces.
pub fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let s: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}", w = *w)).collect();
        s.join("  ").trim_end().to_string()
    };
    let mut out = line(&mut header.iter().copied());
    out.push('\n');
    for r in rows {
        out.push_str(&line(&mut r.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

pub fn primitives(list: &[&PrimitiveMeta]) -> String {
    let rows: Vec<Vec<String>> = list
        .iter()
        .map(|p| {
            vec![
                p.id.clone(),
                p.source_demo.clone(),
                p.segment_index.to_string(),
                p.sample_count.to_string(),
                p.cluster_id.map(|c| c.to_string()).unwrap_or_else(|| "-".into()),
                p.label.clone().unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    render(&["id", "source_demo", "segment", "samples", "cluster", "label"], &rows)
}
