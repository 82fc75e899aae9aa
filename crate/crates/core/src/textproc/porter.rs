//! The Porter stemming algorithm (1980), including the two departures that
//! the canonical reference implementation ships (`bli -> ble` instead of
//! `abli -> able` in step 2, and the `logi -> log` rule).
//!
//! The algorithm is defined over lowercase English letters. Tokens with any
//! other character, and tokens of one or two letters, pass through untouched.

/// Stems one lowercase token.
pub fn stem(token: &str) -> String {
    if token.len() <= 2 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_owned();
    }
    let mut w = Word {
        b: token.as_bytes().to_vec(),
        len: token.len(),
        stem: 0,
    };
    w.step1ab();
    w.step1c();
    w.step2();
    w.step3();
    w.step4();
    w.step5();
    w.b.truncate(w.len);
    String::from_utf8(w.b).expect("ascii in, ascii out")
}

struct Word {
    b: Vec<u8>,
    /// Current word length; bytes past `len` are stale.
    len: usize,
    /// Stem length set by the last successful `ends` call; conditions such
    /// as the measure are evaluated against `b[..stem]`.
    stem: usize,
}

impl Word {
    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// The measure m of `b[..stem]`: the number of VC sequences in the
    /// pattern [C](VC)^m[V].
    fn m(&self) -> usize {
        let mut n = 0;
        let mut i = 0;
        while i < self.stem && self.cons(i) {
            i += 1;
        }
        loop {
            while i < self.stem && !self.cons(i) {
                i += 1;
            }
            if i == self.stem {
                return n;
            }
            n += 1;
            while i < self.stem && self.cons(i) {
                i += 1;
            }
            if i == self.stem {
                return n;
            }
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..self.stem).any(|i| !self.cons(i))
    }

    /// True when the word ends with a doubled consonant.
    fn double_ended(&self) -> bool {
        self.len >= 2 && self.b[self.len - 1] == self.b[self.len - 2] && self.cons(self.len - 1)
    }

    /// consonant-vowel-consonant ending at `i` where the final consonant is
    /// not w, x or y; marks short stems like "hop" that restore an "e".
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], b'w' | b'x' | b'y')
    }

    /// When the word ends with `suffix`, records the stem length and
    /// returns true.
    fn ends(&mut self, suffix: &[u8]) -> bool {
        if suffix.len() > self.len {
            return false;
        }
        if &self.b[self.len - suffix.len()..self.len] != suffix {
            return false;
        }
        self.stem = self.len - suffix.len();
        true
    }

    /// Replaces the current suffix (everything past the stem) with `s`.
    fn setto(&mut self, s: &[u8]) {
        self.b.truncate(self.stem);
        self.b.extend_from_slice(s);
        self.len = self.b.len();
    }

    /// Applies `setto` when the stem has a positive measure.
    fn r(&mut self, s: &[u8]) {
        if self.m() > 0 {
            self.setto(s);
        }
    }

    // Plurals and -ed / -ing. caresses -> caress, ponies -> poni,
    // hopping -> hop, filing -> file.
    fn step1ab(&mut self) {
        if self.b[self.len - 1] == b's' {
            if self.ends(b"sses") {
                self.len -= 2;
            } else if self.ends(b"ies") {
                self.setto(b"i");
            } else if self.len >= 2 && self.b[self.len - 2] != b's' {
                self.len -= 1;
            }
        }
        if self.ends(b"eed") {
            if self.m() > 0 {
                self.len -= 1;
            }
        } else if (self.ends(b"ed") || self.ends(b"ing")) && self.vowel_in_stem() {
            self.len = self.stem;
            if self.ends(b"at") {
                self.setto(b"ate");
            } else if self.ends(b"bl") {
                self.setto(b"ble");
            } else if self.ends(b"iz") {
                self.setto(b"ize");
            } else if self.double_ended() {
                self.len -= 1;
                if matches!(self.b[self.len - 1], b'l' | b's' | b'z') {
                    self.len += 1;
                }
            } else {
                // Here the whole remaining word is the stem.
                self.stem = self.len;
                if self.m() == 1 && self.cvc(self.len - 1) {
                    self.setto(b"e");
                }
            }
        }
    }

    // Terminal y -> i when there is another vowel in the stem.
    fn step1c(&mut self) {
        if self.ends(b"y") && self.vowel_in_stem() {
            self.b[self.len - 1] = b'i';
        }
    }

    // Double suffixes mapped to single ones when m > 0, keyed on the
    // penultimate letter. relational -> relate.
    fn step2(&mut self) {
        if self.len < 2 {
            return;
        }
        let key = self.b[self.len - 2];
        match key {
            b'a' => {
                if self.ends(b"ational") {
                    self.r(b"ate");
                } else if self.ends(b"tional") {
                    self.r(b"tion");
                }
            }
            b'c' => {
                if self.ends(b"enci") {
                    self.r(b"ence");
                } else if self.ends(b"anci") {
                    self.r(b"ance");
                }
            }
            b'e' => {
                if self.ends(b"izer") {
                    self.r(b"ize");
                }
            }
            b'l' => {
                if self.ends(b"bli") {
                    self.r(b"ble");
                } else if self.ends(b"alli") {
                    self.r(b"al");
                } else if self.ends(b"entli") {
                    self.r(b"ent");
                } else if self.ends(b"eli") {
                    self.r(b"e");
                } else if self.ends(b"ousli") {
                    self.r(b"ous");
                }
            }
            b'o' => {
                if self.ends(b"ization") {
                    self.r(b"ize");
                } else if self.ends(b"ation") || self.ends(b"ator") {
                    self.r(b"ate");
                }
            }
            b's' => {
                if self.ends(b"alism") {
                    self.r(b"al");
                } else if self.ends(b"iveness") {
                    self.r(b"ive");
                } else if self.ends(b"fulness") {
                    self.r(b"ful");
                } else if self.ends(b"ousness") {
                    self.r(b"ous");
                }
            }
            b't' => {
                if self.ends(b"aliti") {
                    self.r(b"al");
                } else if self.ends(b"iviti") {
                    self.r(b"ive");
                } else if self.ends(b"biliti") {
                    self.r(b"ble");
                }
            }
            b'g' if self.ends(b"logi") => self.r(b"log"),
            _ => {}
        }
    }

    // -ic-, -full, -ness and friends. electriciti -> electric.
    fn step3(&mut self) {
        let key = self.b[self.len - 1];
        match key {
            b'e' => {
                if self.ends(b"icate") {
                    self.r(b"ic");
                } else if self.ends(b"ative") {
                    self.r(b"");
                } else if self.ends(b"alize") {
                    self.r(b"al");
                }
            }
            b'i' => {
                if self.ends(b"iciti") {
                    self.r(b"ic");
                }
            }
            b'l' => {
                if self.ends(b"ical") {
                    self.r(b"ic");
                } else if self.ends(b"ful") {
                    self.r(b"");
                }
            }
            b's' if self.ends(b"ness") => self.r(b""),
            _ => {}
        }
    }

    // Drop -ant, -ence and friends when m > 1.
    fn step4(&mut self) {
        if self.len < 2 {
            return;
        }
        match self.b[self.len - 2] {
            b'a' => {
                if !self.ends(b"al") {
                    return;
                }
            }
            b'c' => {
                if !self.ends(b"ance") && !self.ends(b"ence") {
                    return;
                }
            }
            b'e' => {
                if !self.ends(b"er") {
                    return;
                }
            }
            b'i' => {
                if !self.ends(b"ic") {
                    return;
                }
            }
            b'l' => {
                if !self.ends(b"able") && !self.ends(b"ible") {
                    return;
                }
            }
            b'n' => {
                if !self.ends(b"ant")
                    && !self.ends(b"ement")
                    && !self.ends(b"ment")
                    && !self.ends(b"ent")
                {
                    return;
                }
            }
            b'o' => {
                let ion = self.ends(b"ion")
                    && self.stem >= 1
                    && matches!(self.b[self.stem - 1], b's' | b't');
                if !ion && !self.ends(b"ou") {
                    return;
                }
            }
            b's' => {
                if !self.ends(b"ism") {
                    return;
                }
            }
            b't' => {
                if !self.ends(b"ate") && !self.ends(b"iti") {
                    return;
                }
            }
            b'u' => {
                if !self.ends(b"ous") {
                    return;
                }
            }
            b'v' => {
                if !self.ends(b"ive") {
                    return;
                }
            }
            b'z' => {
                if !self.ends(b"ize") {
                    return;
                }
            }
            _ => return,
        }
        if self.m() > 1 {
            self.len = self.stem;
        }
    }

    // Tidy up a final -e and a doubled -ll on long words. The measure is
    // taken against the word as it stood on entry, exactly like the
    // reference implementation.
    fn step5(&mut self) {
        self.stem = self.len;
        if self.b[self.len - 1] == b'e' {
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.len - 2)) {
                self.len -= 1;
            }
        }
        if self.b[self.len - 1] == b'l' && self.double_ended() && self.m() > 1 {
            self.len -= 1;
        }
    }
}
