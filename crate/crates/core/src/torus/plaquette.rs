// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::TorusLattice;

/// The positively oriented boundary of grid cell `(i, j)`.
///
/// Corners run `(i, j) → (i+1, j) → (i+1, j+1) → (i, j+1)` in lattice
/// indices, which is counter-clockwise because the lattice basis is oriented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plaquette {
    pub i: usize,
    pub j: usize,
    /// Corner sites, wrapped into the grid.
    pub corners: [(usize, usize); 4],
    /// Corner positions in ℂ (unwrapped, so the loop closes geometrically).
    pub points: [Complex64; 4],
}

impl Plaquette {
    /// Segments as `(start, displacement)` pairs.
    pub fn segments(&self) -> [(Complex64, Complex64); 4] {
        let p = self.points;
        [(p[0], p[1] - p[0]), (p[1], p[2] - p[1]), (p[2], p[3] - p[2]), (p[3], p[0] - p[3])]
    }
}

/// All `n1 · n2` elementary loops of the grid.
pub fn plaquettes(lattice: &TorusLattice) -> impl Iterator<Item = Plaquette> + '_ {
    let (n1, n2) = (lattice.n1, lattice.n2);
    (0..n1).flat_map(move |i| {
        (0..n2).map(move |j| {
            let (ii, jj) = (i as isize, j as isize);
            Plaquette {
                i,
                j,
                corners: [(i, j), ((i + 1) % n1, j), ((i + 1) % n1, (j + 1) % n2), (i, (j + 1) % n2)],
                points: [
                    lattice.site(ii, jj),
                    lattice.site(ii + 1, jj),
                    lattice.site(ii + 1, jj + 1),
                    lattice.site(ii, jj + 1),
                ],
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_and_tiling() {
        let l = TorusLattice::unit_square(8).unwrap();
        let loops: Vec<_> = plaquettes(&l).collect();
        assert_eq!(loops.len(), 64);
        let mut seen = vec![0; 64];
        let mut area = 0.0;
        for p in &loops {
            seen[p.i * 8 + p.j] += 1;
            assert_eq!(p.segments().len(), 4);
            // Shoelace formula: positive orientation.
            let a: f64 = (0..4)
                .map(|k| {
                    let (u, v) = (p.points[k], p.points[(k + 1) % 4]);
                    u.re * v.im - v.re * u.im
                })
                .sum::<f64>()
                / 2.0;
            assert!(a > 0.0);
            area += a;
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert!((area - l.area()).abs() < 1e-12);
    }
}
