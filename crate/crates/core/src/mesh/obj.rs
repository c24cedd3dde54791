//! ASCII triangle-soup reader and writer.
//!
//! Supported lines: `v x y z`, `f i j k` (1-based or negative indices,
//! `i/t/n` forms accepted), `g name` / `o name`, comments and blank lines.
//! `vn`, `vt`, `s`, `usemtl` and `mtllib` are ignored. Anything else is a
//! parse error.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::MeshError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub indices: [usize; 3],
    pub group: usize,
}

/// Vertices, triangles and group names as read from disk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleSoup {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Face>,
    pub groups: Vec<String>,
}

impl TriangleSoup {
    /// Returns the index of `name`, adding it if new.
    pub fn group(&mut self, name: &str) -> usize {
        match self.groups.iter().position(|g| g == name) {
            Some(i) => i,
            None => {
                self.groups.push(name.to_string());
                self.groups.len() - 1
            }
        }
    }

    pub fn vertex(&mut self, p: [f64; 3]) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    pub fn face(&mut self, indices: [usize; 3], group: usize) {
        self.faces.push(Face { indices, group });
    }

    /// Applies `f` to every vertex.
    pub fn map_vertices(&mut self, f: impl Fn([f64; 3]) -> [f64; 3]) {
        for v in &mut self.vertices {
            *v = f(*v);
        }
    }

    pub fn faces_in_group(&self, name: &str) -> usize {
        match self.groups.iter().position(|g| g == name) {
            Some(g) => self.faces.iter().filter(|f| f.group == g).count(),
            None => 0,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.9} {:.9} {:.9}", v[0], v[1], v[2]);
        }
        let mut current = None;
        for f in &self.faces {
            if current != Some(f.group) {
                let _ = writeln!(out, "g {}", self.groups[f.group]);
                current = Some(f.group);
            }
            let [a, b, c] = f.indices;
            let _ = writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), MeshError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(self.to_text().as_bytes())?;
        file.flush()?;
        Ok(())
    }
}

pub fn read(path: &Path) -> Result<TriangleSoup, MeshError> {
    let file = std::fs::File::open(path)?;
    parse(BufReader::new(file), &path.display().to_string())
}

pub fn parse_str(text: &str) -> Result<TriangleSoup, MeshError> {
    parse(text.as_bytes(), "<memory>")
}

pub fn parse<R: BufRead>(reader: R, origin: &str) -> Result<TriangleSoup, MeshError> {
    let mut soup = TriangleSoup::default();
    let mut group = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let err = |message: String| MeshError::Parse {
            path: origin.to_string(),
            line: lineno,
            message,
        };
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or("");
        let args: Vec<&str> = tokens.collect();
        match keyword {
            "v" => {
                if args.len() < 3 {
                    return Err(err(format!("vertex needs 3 coordinates, got {}", args.len())));
                }
                let mut p = [0.0; 3];
                for (k, a) in args.iter().take(3).enumerate() {
                    p[k] = a
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| err(format!("bad coordinate '{a}'")))?;
                }
                soup.vertices.push(p);
            }
            "f" => {
                if args.len() != 3 {
                    return Err(err(format!(
                        "only triangles are supported, face has {} vertices",
                        args.len()
                    )));
                }
                let mut idx = [0usize; 3];
                for (k, a) in args.iter().enumerate() {
                    let first = a.split('/').next().unwrap_or("");
                    let raw: i64 = first
                        .parse()
                        .map_err(|_| err(format!("bad vertex index '{a}'")))?;
                    let n = soup.vertices.len() as i64;
                    let resolved = if raw > 0 { raw - 1 } else { n + raw };
                    if raw == 0 || resolved < 0 || resolved >= n {
                        return Err(err(format!("vertex index {raw} out of range (have {n})")));
                    }
                    idx[k] = resolved as usize;
                }
                let g = match group {
                    Some(g) => g,
                    None => {
                        let g = soup.group("default");
                        group = Some(g);
                        g
                    }
                };
                soup.faces.push(Face { indices: idx, group: g });
            }
            "g" | "o" => {
                let name = if args.is_empty() { "default".to_string() } else { args.join(" ") };
                group = Some(soup.group(&name));
            }
            "vn" | "vt" | "s" | "usemtl" | "mtllib" => {}
            other => return Err(err(format!("unsupported directive '{other}'"))),
        }
    }
    Ok(soup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_groups_and_index_forms() {
        let text = "# test\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\ng body\nf 1 2 3\ng wheel_a\nf 1/1/1 -1 2\n";
        let soup = parse_str(text).unwrap();
        assert_eq!(soup.vertices.len(), 4);
        assert_eq!(soup.faces.len(), 2);
        assert_eq!(soup.faces[1].indices, [0, 3, 1]);
        assert_eq!(soup.groups, vec!["body", "wheel_a"]);
        assert_eq!(soup.faces_in_group("wheel_a"), 1);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 x\n";
        match parse_str(text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        let quad = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 4 3\n";
        match parse_str(quad) {
            Err(MeshError::Parse { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("triangles"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_str("v 0 0 0\nf 1 2 3\n") {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn text_roundtrip() {
        let mut soup = TriangleSoup::default();
        let g = soup.group("a");
        let h = soup.group("b");
        let v: Vec<usize> = (0..4).map(|i| soup.vertex([i as f64, (i * i) as f64, 0.5])).collect();
        soup.face([v[0], v[1], v[2]], g);
        soup.face([v[1], v[2], v[3]], h);
        let back = parse_str(&soup.to_text()).unwrap();
        assert_eq!(back, soup);
    }
}
