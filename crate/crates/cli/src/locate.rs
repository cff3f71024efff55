//! Maps a path inside a JSON document (`analysis[2].kmax`) back to the line
//! it starts on, so config errors can point at the source text.

/// One step of a document path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Key(String),
    Index(usize),
}

/// 1-based line of the deepest node along `path` that exists in `text`.
/// Keys are located at the key itself, elements at their first byte.
pub fn line_of(text: &str, path: &[Step]) -> usize {
    let bytes = text.as_bytes();
    let mut scanner = Scanner { bytes, pos: 0 };
    let offset = scanner.descend(path).min(bytes.len());
    1 + bytes[..offset].iter().filter(|&&b| b == b'\n').count()
}

pub fn render(path: &[Step]) -> String {
    let mut out = String::new();
    for step in path {
        match step {
            Step::Key(k) if out.is_empty() => out.push_str(k),
            Step::Key(k) => {
                out.push('.');
                out.push_str(k);
            }
            Step::Index(i) => out.push_str(&format!("[{i}]")),
        }
    }
    out
}

pub fn from_serde_path(path: &serde_path_to_error::Path) -> Vec<Step> {
    use serde_path_to_error::Segment;
    path.iter()
        .filter_map(|seg| match seg {
            Segment::Seq { index } => Some(Step::Index(*index)),
            Segment::Map { key } => Some(Step::Key(key.clone())),
            Segment::Enum { .. } | Segment::Unknown => None,
        })
        .collect()
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Offset of the deepest node along `path`, starting from the value at
    /// `pos`. A missing step stops at its container.
    fn descend(&mut self, path: &[Step]) -> usize {
        self.skip_ws();
        let start = self.pos;
        let Some((step, rest)) = path.split_first() else {
            return start;
        };
        let found = match (self.peek(), step) {
            (Some(b'{'), Step::Key(want)) => self.find_key(want),
            (Some(b'['), Step::Index(want)) => self.find_index(*want),
            _ => None,
        };
        match found {
            // a key with nothing left to resolve points at the key itself
            Some(at) if rest.is_empty() => at,
            Some(_) => self.descend(rest),
            None => start,
        }
    }

    /// Leaves `pos` at the value of `want` and returns the key offset.
    fn find_key(&mut self, want: &str) -> Option<usize> {
        self.pos += 1;
        loop {
            self.skip_ws();
            if self.peek()? != b'"' {
                return None;
            }
            let key_pos = self.pos;
            let key = self.string()?;
            self.skip_ws();
            self.pos += 1; // ':'
            if key == want {
                self.skip_ws();
                return Some(key_pos);
            }
            self.skip_value()?;
            self.skip_ws();
            if self.peek()? != b',' {
                return None;
            }
            self.pos += 1;
        }
    }

    /// Leaves `pos` at element `want` and returns its offset.
    fn find_index(&mut self, want: usize) -> Option<usize> {
        self.pos += 1;
        for _ in 0..want {
            self.skip_ws();
            if self.peek()? == b']' {
                return None;
            }
            self.skip_value()?;
            self.skip_ws();
            if self.peek()? != b',' {
                return None;
            }
            self.pos += 1;
        }
        self.skip_ws();
        (self.peek()? != b']').then_some(self.pos)
    }

    fn string(&mut self) -> Option<String> {
        // assumes the opening quote at `pos`
        self.pos += 1;
        let begin = self.pos;
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'\\' => self.pos += 2,
                b'"' => {
                    let raw = &self.bytes[begin..self.pos];
                    self.pos += 1;
                    return Some(String::from_utf8_lossy(raw).into_owned());
                }
                _ => self.pos += 1,
            }
        }
        None
    }

    fn skip_value(&mut self) -> Option<()> {
        self.skip_ws();
        match self.peek()? {
            b'"' => {
                self.string()?;
            }
            b'{' | b'[' => {
                let mut depth = 0usize;
                while self.pos < self.bytes.len() {
                    match self.bytes[self.pos] {
                        b'"' => {
                            self.string()?;
                            continue;
                        }
                        b'{' | b'[' => depth += 1,
                        b'}' | b']' => {
                            depth -= 1;
                            if depth == 0 {
                                self.pos += 1;
                                return Some(());
                            }
                        }
                        _ => {}
                    }
                    self.pos += 1;
                }
                return None;
            }
            _ => {
                while self.pos < self.bytes.len()
                    && !matches!(self.bytes[self.pos], b',' | b'}' | b']')
                {
                    self.pos += 1;
                }
            }
        }
        Some(())
    }
}
