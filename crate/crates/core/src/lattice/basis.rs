//! Coframe multi-indices. A basis k-form `e^I` is a 4-bit mask (bit `mu` set
//! when `e^mu` is a factor); components of each degree are stored in
//! lexicographic order, e.g. degree 2 is `01, 02, 03, 12, 13, 23`.

use std::sync::OnceLock;

pub const MASKS: [&[u8]; 5] = [
    &[0b0000],
    &[0b0001, 0b0010, 0b0100, 0b1000],
    &[0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100],
    &[0b0111, 0b1011, 0b1101, 0b1110],
    &[0b1111],
];

/// Component indices of the degree-2 basis.
pub const E01: usize = 0;
pub const E02: usize = 1;
pub const E03: usize = 2;
pub const E12: usize = 3;
pub const E13: usize = 4;
pub const E23: usize = 5;

#[inline]
pub fn ncomp(degree: usize) -> usize {
    MASKS[degree].len()
}

pub fn index_of(degree: usize, mask: u8) -> Option<usize> {
    MASKS[degree].iter().position(|&m| m == mask)
}

/// Sign of `e^I ^ e^J` relative to `e^{I u J}` (zero when they overlap).
pub fn wedge_sign(a: u8, b: u8) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut inversions = 0;
    for i in 0..4 {
        if a & (1 << i) == 0 {
            continue;
        }
        for j in 0..i {
            if b & (1 << j) != 0 {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A sparse signed map between component indices: `out[dst] += sign * in[src]`.
pub type SignedMap = Vec<(usize, usize, f64)>;

pub struct Tables {
    /// `ext[k][mu]`: `e^mu ^ . : Omega^k -> Omega^{k+1}`.
    pub ext: Vec<[SignedMap; 4]>,
    /// `hodge[k]`: `* : Omega^k -> Omega^{4-k}`.
    pub hodge: Vec<SignedMap>,
    /// `lomega[k]`: `omega ^ . : Omega^k -> Omega^{k+2}`.
    pub lomega: Vec<SignedMap>,
}

fn build() -> Tables {
    let mut ext = Vec::new();
    for k in 0..4 {
        let maps = [0, 1, 2, 3].map(|mu| {
            let e = 1u8 << mu;
            MASKS[k]
                .iter()
                .enumerate()
                .filter_map(|(src, &m)| {
                    let s = wedge_sign(e, m);
                    (s != 0.0).then(|| (src, index_of(k + 1, e | m).unwrap(), s))
                })
                .collect()
        });
        ext.push(maps);
    }
    let hodge = (0..5)
        .map(|k| {
            MASKS[k]
                .iter()
                .enumerate()
                .map(|(src, &m)| {
                    let c = !m & 0b1111;
                    (src, index_of(4 - k, c).unwrap(), wedge_sign(m, c))
                })
                .collect()
        })
        .collect();
    let omega = [0b0011u8, 0b1100u8];
    let lomega = (0..3)
        .map(|k| {
            let mut map = Vec::new();
            for (src, &m) in MASKS[k].iter().enumerate() {
                for w in omega {
                    let s = wedge_sign(w, m);
                    if s != 0.0 {
                        map.push((src, index_of(k + 2, w | m).unwrap(), s));
                    }
                }
            }
            map
        })
        .collect();
    Tables { ext, hodge, lomega }
}

pub fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_binomial() {
        assert_eq!((0..5).map(ncomp).collect::<Vec<_>>(), vec![1, 4, 6, 4, 1]);
    }

    #[test]
    fn hodge_signs_on_two_forms() {
        let t = tables();
        let star: Vec<(usize, f64)> = {
            let mut v = vec![(0, 0.0); 6];
            for &(s, d, sg) in &t.hodge[2] {
                v[s] = (d, sg);
            }
            v
        };
        assert_eq!(star[E01], (E23, 1.0));
        assert_eq!(star[E02], (E13, -1.0));
        assert_eq!(star[E03], (E12, 1.0));
        assert_eq!(star[E13], (E02, -1.0));
    }

    #[test]
    fn omega_wedge_omega_is_twice_volume() {
        let t = tables();
        // omega as a 2-form, then omega ^ omega through the L_omega table.
        let mut w = [0.0; 6];
        w[E01] = 1.0;
        w[E23] = 1.0;
        let mut vol = 0.0;
        for &(s, d, sg) in &t.lomega[2] {
            assert_eq!(d, 0);
            vol += sg * w[s];
        }
        assert_eq!(vol, 2.0);
    }
}
