//! Test texts: Thue–Morse and Fibonacci prefixes, seeded random strings.

use crate::text::Text;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Length-`n` prefix of the Thue–Morse word over {a, b}.
pub fn thue_morse(n: usize) -> Vec<u8> {
    (0..n).map(|i| if i.count_ones() % 2 == 0 { b'a' } else { b'b' }).collect()
}

/// Length-`n` prefix of the Fibonacci word over {a, b}.
pub fn fibonacci_word(n: usize) -> Vec<u8> {
    let (mut prev, mut cur) = (b"b".to_vec(), b"a".to_vec());
    while cur.len() < n {
        let next = [cur.as_slice(), prev.as_slice()].concat();
        prev = cur;
        cur = next;
    }
    cur.truncate(n);
    cur
}

/// Uniform string of length `n` over the first `sigma` lowercase letters.
pub fn random_body(rng: &mut ChaCha8Rng, n: usize, sigma: u8) -> Vec<u8> {
    assert!((1..=26).contains(&sigma));
    (0..n).map(|_| b'a' + rng.gen_range(0..sigma)).collect()
}

pub fn random_text(seed: u64, n: usize, sigma: u8) -> Text {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Text::from_body(&random_body(&mut rng, n, sigma)).expect("letters are not the sentinel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_prefixes() {
        assert_eq!(thue_morse(8), b"abbabaab");
        assert_eq!(fibonacci_word(8), b"abaababa");
        assert_eq!(random_text(3, 10, 2), random_text(3, 10, 2));
    }
}
