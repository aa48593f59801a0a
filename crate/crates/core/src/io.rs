//! Readers and writers for the supported file formats.
//!
//! Edge list: one edge per line, two whitespace-separated labels, lines
//! starting with `#` are comments. Pajek .net: a `*Vertices n` section
//! followed by `*Edges`/`*Arcs` pairs with 1-based indices. Cluster file:
//! one cluster per line as whitespace-separated labels, plus a
//! `# orphans: ...` trailer line when orphans exist.

use std::io::{BufRead, Write};

use crate::clustering::Clustering;
use crate::graph::{Graph, GraphBuilder, GraphError, LoadStats};

/// Reads an edge-list stream. Duplicate edges and self-loops are dropped and
/// counted; directed input collapses to undirected edges.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<(Graph, LoadStats), GraphError> {
    let mut builder = GraphBuilder::new();
    let mut saw_edge = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let a = tokens.next();
        let b = tokens.next();
        let extra = tokens.next();
        match (a, b, extra) {
            (Some(a), Some(b), None) => {
                builder.add_edge(a, b);
                saw_edge = true;
            }
            _ => {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected two labels, got {trimmed:?}"),
                });
            }
        }
    }
    if !saw_edge {
        return Err(GraphError::EmptyInput);
    }
    Ok(builder.build())
}

/// Writes the graph as an edge list, one edge per line, ordered by label so
/// output is independent of internal id assignment.
pub fn write_edge_list<W: Write>(writer: &mut W, graph: &Graph) -> std::io::Result<()> {
    let mut lines: Vec<(&str, &str)> = graph
        .edges()
        .map(|(u, v)| {
            let (a, b) = (graph.label(u), graph.label(v));
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    lines.sort_unstable();
    for (a, b) in lines {
        writeln!(writer, "{a} {b}")?;
    }
    Ok(())
}

/// Reads a Pajek .net stream: `*Vertices n`, optional vertex label lines,
/// then `*Edges` and/or `*Arcs` sections. Arcs are symmetrized.
pub fn read_pajek<R: BufRead>(reader: R) -> Result<(Graph, LoadStats), GraphError> {
    let mut builder = GraphBuilder::new();
    let mut n: Option<usize> = None;
    let mut labeled = Vec::new();

    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Vertices,
        Links,
    }
    let mut section = Section::Preamble;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        if lower.starts_with("*vertices") {
            let count: usize = lower
                .split_whitespace()
                .nth(1)
                .and_then(|t| t.parse().ok())
                .ok_or(GraphError::Parse {
                    line: line_no,
                    message: "malformed *Vertices header".into(),
                })?;
            n = Some(count);
            labeled = vec![false; count];
            section = Section::Vertices;
            continue;
        }
        if lower.starts_with("*edges") || lower.starts_with("*arcs") {
            n.ok_or(GraphError::MissingVerticesHeader)?;
            if section == Section::Vertices {
                intern_unlabeled(&mut builder, &labeled);
            }
            section = Section::Links;
            continue;
        }
        if lower.starts_with('*') {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("unsupported section {trimmed:?}"),
            });
        }
        match section {
            Section::Preamble => {
                return Err(GraphError::MissingVerticesHeader);
            }
            Section::Vertices => {
                let count = n.unwrap();
                let mut tokens = trimmed.split_whitespace();
                let index: i64 =
                    tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or(GraphError::Parse {
                            line: line_no,
                            message: "expected vertex index".into(),
                        })?;
                if index < 1 || index as usize > count {
                    return Err(GraphError::VertexIndexOutOfRange {
                        line: line_no,
                        index,
                        n: count,
                    });
                }
                let rest = trimmed[trimmed.find(char::is_whitespace).unwrap_or(trimmed.len())..]
                    .trim()
                    .trim_matches('"');
                let label = if rest.is_empty() {
                    index.to_string()
                } else {
                    rest.to_string()
                };
                // Vertex lines must arrive in index order for dense ids.
                let expect = builder.node_count() + 1;
                if index as usize != expect {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: format!(
                            "vertex lines out of order: expected {expect}, got {index}"
                        ),
                    });
                }
                if builder.node_count() != builder.intern(&label) as usize {
                    return Err(GraphError::DuplicateLabel {
                        line: line_no,
                        label,
                    });
                }
                labeled[index as usize - 1] = true;
            }
            Section::Links => {
                let count = n.unwrap();
                let mut tokens = trimmed.split_whitespace();
                let endpoint = |text: Option<&str>| -> Result<u32, GraphError> {
                    let value: i64 =
                        text.and_then(|t| t.parse().ok()).ok_or(GraphError::Parse {
                            line: line_no,
                            message: format!("expected vertex pair, got {trimmed:?}"),
                        })?;
                    if value < 1 || value as usize > count {
                        return Err(GraphError::VertexIndexOutOfRange {
                            line: line_no,
                            index: value,
                            n: count,
                        });
                    }
                    Ok(value as u32 - 1)
                };
                let u = endpoint(tokens.next())?;
                let v = endpoint(tokens.next())?;
                // Trailing weight tokens are ignored.
                builder.add_edge_ids(u, v);
            }
        }
    }

    n.ok_or(GraphError::MissingVerticesHeader)?;
    if section == Section::Vertices {
        intern_unlabeled(&mut builder, &labeled);
    }
    Ok(builder.build())
}

/// Vertices without an explicit label line default to their 1-based index.
fn intern_unlabeled(builder: &mut GraphBuilder, labeled: &[bool]) {
    for (i, &has_label) in labeled.iter().enumerate() {
        if !has_label {
            builder.intern(&(i + 1).to_string());
        }
    }
}

/// Writes a clustering: one cluster per line with label-sorted members, and a
/// `# orphans:` trailer only when the orphan set is nonempty.
pub fn write_clusters<W: Write>(
    writer: &mut W,
    graph: &Graph,
    clustering: &Clustering,
) -> std::io::Result<()> {
    for cluster in clustering.clusters() {
        let mut labels: Vec<&str> = cluster.members().iter().map(|&v| graph.label(v)).collect();
        labels.sort_unstable();
        writeln!(writer, "{}", labels.join(" "))?;
    }
    let orphans = clustering.orphans();
    if !orphans.is_empty() {
        let mut labels: Vec<&str> = orphans.iter().map(|&v| graph.label(v)).collect();
        labels.sort_unstable();
        writeln!(writer, "# orphans: {}", labels.join(" "))?;
    }
    Ok(())
}

/// Reads a cluster file against a graph's label map. The orphan trailer is
/// informational; orphans are re-derived from the clusters.
pub fn read_clusters<R: BufRead>(reader: R, graph: &Graph) -> Result<Clustering, GraphError> {
    let mut clustering = Clustering::new(graph.node_count());
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut members = Vec::new();
        for token in trimmed.split_whitespace() {
            let id = graph
                .node_by_label(token)
                .ok_or_else(|| GraphError::Parse {
                    line: line_no,
                    message: format!("unknown node label {token:?}"),
                })?;
            members.push(id);
        }
        clustering.push_cluster(members);
    }
    Ok(clustering)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn edge_list_path_of_three() {
        let (g, stats) = read_edge_list(Cursor::new("a b\nb c")).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(stats.total_dropped(), 0);
    }

    #[test]
    fn edge_list_dedup_and_self_loop() {
        let (g, stats) = read_edge_list(Cursor::new("a b\nb a\na a")).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(stats.total_dropped(), 2);
    }

    #[test]
    fn edge_list_rejects_malformed_line() {
        let err = read_edge_list(Cursor::new("a b\nc\n")).unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn edge_list_rejects_empty_input() {
        assert!(matches!(
            read_edge_list(Cursor::new("# only a comment\n")),
            Err(GraphError::EmptyInput)
        ));
    }

    #[test]
    fn edge_list_comments_ignored() {
        let (g, _) = read_edge_list(Cursor::new("# header\na b\n\n# mid\nb c\n")).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    /// Format check sized like a real crawl: 955 nodes, 5620 edge lines.
    #[test]
    fn edge_list_crawl_sized_stand_in() {
        let n = 955u64;
        let mut lines = Vec::new();
        // Ring to touch every node, then deterministic chords up to 5620 edges.
        let mut seen = std::collections::HashSet::new();
        for i in 0..n {
            let j = (i + 1) % n;
            seen.insert((i.min(j), i.max(j)));
            lines.push(format!("v{} v{}", i, j));
        }
        let mut x = 12345u64;
        while lines.len() < 5620 {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let u = (x >> 33) % n;
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let v = (x >> 33) % n;
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                continue;
            }
            lines.push(format!("v{} v{}", u, v));
        }
        let text = lines.join("\n");
        assert_eq!(text.lines().count(), 5620);
        let (g, stats) = read_edge_list(Cursor::new(text)).unwrap();
        assert_eq!(g.node_count(), 955);
        assert_eq!(g.edge_count(), 5620);
        assert_eq!(stats.total_dropped(), 0);
    }

    #[test]
    fn pajek_basic() {
        let net = "*Vertices 3\n1 \"a\"\n2 \"b\"\n3 \"c\"\n*Edges\n1 2\n2 3\n";
        let (g, _) = read_pajek(Cursor::new(net)).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.label(0), "a");
    }

    #[test]
    fn pajek_arcs_symmetrize() {
        let net = "*Vertices 2\n*Arcs\n1 2\n2 1\n";
        let (g, stats) = read_pajek(Cursor::new(net)).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(stats.duplicate_edges, 1);
    }

    #[test]
    fn pajek_isolated_vertex_counted() {
        let net = "*Vertices 3\n*Edges\n1 2\n";
        let (g, _) = read_pajek(Cursor::new(net)).unwrap();
        assert_eq!(g.node_count(), 3);
        let isolated = g.node_by_label("3").unwrap();
        assert_eq!(g.degree(isolated), 0);
    }

    #[test]
    fn pajek_missing_header() {
        assert!(matches!(
            read_pajek(Cursor::new("*Edges\n1 2\n")),
            Err(GraphError::MissingVerticesHeader)
        ));
    }

    #[test]
    fn pajek_index_out_of_range() {
        let err = read_pajek(Cursor::new("*Vertices 2\n*Edges\n1 5\n")).unwrap_err();
        assert!(matches!(
            err,
            GraphError::VertexIndexOutOfRange { index: 5, .. }
        ));
    }

    #[test]
    fn edge_list_round_trip_is_order_independent() {
        let (g1, _) = read_edge_list(Cursor::new("a b\nb c\nc a\n")).unwrap();
        let (g2, _) = read_edge_list(Cursor::new("c a\na b\nb c\n")).unwrap();
        let mut out1 = Vec::new();
        let mut out2 = Vec::new();
        write_edge_list(&mut out1, &g1).unwrap();
        write_edge_list(&mut out2, &g2).unwrap();
        assert_eq!(out1, out2);
    }

    #[test]
    fn cluster_file_round_trip_with_orphans() {
        let (g, _) = read_edge_list(Cursor::new("a b\nb c\nc d\n")).unwrap();
        let clustering = Clustering::from_member_sets(g.node_count(), vec![vec![0, 1], vec![1, 2]]);
        let mut out = Vec::new();
        write_clusters(&mut out, &g, &clustering).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert!(text.lines().any(|l| l.starts_with("# orphans: d")));

        let reloaded = read_clusters(Cursor::new(&out[..]), &g).unwrap();
        assert_eq!(reloaded.member_sets(), clustering.member_sets());
        let mut rewritten = Vec::new();
        write_clusters(&mut rewritten, &g, &reloaded).unwrap();
        assert_eq!(rewritten, out);
    }
}
