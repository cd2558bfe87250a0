use rand::Rng;

use super::TannerGraph;

/// Systematic encoder for a parity-check graph, from a reduced row-echelon
/// form of `H` over GF(2).
///
/// Free (non-pivot) columns carry the information bits; each pivot bit is
/// the XOR of the free bits selected by its reduced row. Dense elimination
/// costs `O(m² n / 64)`, which is fine up to block lengths around 10^4.
#[derive(Debug, Clone)]
pub struct LdpcEncoder {
    n: usize,
    words: usize,
    free: Vec<usize>,
    pivots: Vec<usize>,
    rows: Vec<Vec<u64>>,
}

impl LdpcEncoder {
    pub fn new(g: &TannerGraph) -> Self {
        let n = g.n_var();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = (0..g.n_chk())
            .map(|c| {
                let mut r = vec![0u64; words];
                for &v in g.check_vars(c) {
                    r[v as usize / 64] ^= 1 << (v % 64);
                }
                r
            })
            .collect();

        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let (w, bit) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows.truncate(rank);
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free = (0..n).filter(|&c| !is_pivot[c]).collect();
        LdpcEncoder {
            n,
            words,
            free,
            pivots,
            rows,
        }
    }

    /// Dimension of the code.
    pub fn k(&self) -> usize {
        self.free.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        assert_eq!(info.len(), self.k(), "information length");
        let mut word = vec![0u64; self.words];
        let mut out = vec![0u8; self.n];
        for (&col, &b) in self.free.iter().zip(info) {
            if b & 1 == 1 {
                word[col / 64] |= 1 << (col % 64);
                out[col] = 1;
            }
        }
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            // Row = pivot + free columns; pivot bit equals parity of the free part.
            let parity = row.iter().zip(&word).map(|(a, b)| (a & b).count_ones()).sum::<u32>() & 1;
            out[p] = parity as u8;
        }
        out
    }

    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let info: Vec<u8> = (0..self.k()).map(|_| rng.random::<bool>() as u8).collect();
        self.encode(&info)
    }
}
