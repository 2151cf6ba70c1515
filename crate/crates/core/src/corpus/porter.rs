//! The original Porter (1980) suffix-stripping stemmer.
//!
//! This follows the published algorithm rather than the later reference C
//! implementation: step 2 uses `abli -> able` and has no `logi` rule, and
//! step 1c rewrites a final `y` whenever the stem contains a vowel.
//! Characters that are not `a e i o u` (or a vowel-position `y`) count as
//! consonants, so digits and hyphens pass through unchanged.

/// Stems one lowercase word.
pub fn stem(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    step1a(&mut w);
    step1b(&mut w);
    step1c(&mut w);
    step2(&mut w);
    step3(&mut w);
    step4(&mut w);
    step5a(&mut w);
    step5b(&mut w);
    w.into_iter().collect()
}

fn is_consonant(w: &[char], i: usize) -> bool {
    match w[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => false,
        'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// The `m` in `[C](VC){m}[V]`.
fn measure(w: &[char]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let c = is_consonant(w, i);
        if c && prev_vowel {
            m += 1;
        }
        prev_vowel = !c;
    }
    m
}

fn contains_vowel(w: &[char]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[char]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// `*o`: stem ends consonant-vowel-consonant, last not w, x or y.
fn ends_cvc(w: &[char]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], 'w' | 'x' | 'y')
}

fn ends_with(w: &[char], suffix: &str) -> bool {
    let n = suffix.chars().count();
    w.len() >= n && w[w.len() - n..].iter().copied().eq(suffix.chars())
}

fn stem_len(w: &[char], suffix: &str) -> usize {
    w.len() - suffix.chars().count()
}

fn replace_suffix(w: &mut Vec<char>, suffix: &str, replacement: &str) {
    let keep = stem_len(w, suffix);
    w.truncate(keep);
    w.extend(replacement.chars());
}

/// Applies the first rule whose suffix matches. A matching rule whose
/// condition fails ends the step without trying shorter suffixes.
fn apply_rules(w: &mut Vec<char>, rules: &[(&str, &str)], cond: impl Fn(&[char]) -> bool) -> bool {
    for (suffix, replacement) in rules {
        if ends_with(w, suffix) {
            let keep = stem_len(w, suffix);
            if cond(&w[..keep]) {
                replace_suffix(w, suffix, replacement);
                return true;
            }
            return false;
        }
    }
    false
}

fn step1a(w: &mut Vec<char>) {
    apply_rules(
        w,
        &[("sses", "ss"), ("ies", "i"), ("ss", "ss"), ("s", "")],
        |_| true,
    );
}

fn step1b(w: &mut Vec<char>) {
    if ends_with(w, "eed") {
        if measure(&w[..stem_len(w, "eed")]) > 0 {
            w.pop();
        }
        return;
    }
    let mut stripped = false;
    for suffix in ["ed", "ing"] {
        if ends_with(w, suffix) && contains_vowel(&w[..stem_len(w, suffix)]) {
            let keep = stem_len(w, suffix);
            w.truncate(keep);
            stripped = true;
            break;
        }
    }
    if !stripped {
        return;
    }
    if ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz") {
        w.push('e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], 'l' | 's' | 'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push('e');
    }
}

fn step1c(w: &mut [char]) {
    if ends_with(w, "y") && contains_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = 'i';
    }
}

fn step2(w: &mut Vec<char>) {
    apply_rules(
        w,
        &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ],
        |s| measure(s) > 0,
    );
}

fn step3(w: &mut Vec<char>) {
    apply_rules(
        w,
        &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ],
        |s| measure(s) > 0,
    );
}

fn step4(w: &mut Vec<char>) {
    const SUFFIXES: [&str; 19] = [
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion",
        "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    ];
    for suffix in SUFFIXES {
        if ends_with(w, suffix) {
            let keep = stem_len(w, suffix);
            let s = &w[..keep];
            let ok = measure(s) > 1
                && (suffix != "ion" || matches!(s.last(), Some('s') | Some('t')));
            if ok {
                w.truncate(keep);
            }
            return;
        }
    }
}

fn step5a(w: &mut Vec<char>) {
    if ends_with(w, "e") {
        let s = &w[..w.len() - 1];
        let m = measure(s);
        if m > 1 || (m == 1 && !ends_cvc(s)) {
            w.pop();
        }
    }
}

fn step5b(w: &mut Vec<char>) {
    if ends_with(w, "ll") && measure(&w[..w.len() - 1]) > 1 {
        w.pop();
    }
}
