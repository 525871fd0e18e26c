//! Counter-based random numbers (Philox-4x32-10) and the scalar draw
//! primitives built on them.
//!
//! Every Monte-Carlo sample owns a private stream keyed by `(seed, sample
//! index)`: the index is the high part of the 128-bit counter and a per-sample
//! block counter is the low part. Draws therefore depend only on the global
//! sample index, never on which worker produced them or how the budget was
//! partitioned — the foundation of the bit-identical reproducibility contract.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// One 10-round Philox-4x32 block.
#[inline]
pub fn philox4x32_10(key: [u32; 2], ctr: [u32; 4]) -> [u32; 4] {
    let mut k = key;
    let mut c = ctr;
    for _ in 0..10 {
        let p0 = u64::from(PHILOX_M0) * u64::from(c[0]);
        let p1 = u64::from(PHILOX_M1) * u64::from(c[2]);
        c = [
            (p1 >> 32) as u32 ^ c[1] ^ k[0],
            p1 as u32,
            (p0 >> 32) as u32 ^ c[3] ^ k[1],
            p0 as u32,
        ];
        k[0] = k[0].wrapping_add(PHILOX_W0);
        k[1] = k[1].wrapping_add(PHILOX_W1);
    }
    c
}

/// Deterministic per-sample stream: counter = (sample index, block index).
#[derive(Debug, Clone)]
pub struct SampleRng {
    key: [u32; 2],
    index: u64,
    block: u32,
    buf: [u32; 4],
    pos: u8,
    spare_normal: Option<f64>,
}

impl SampleRng {
    pub fn new(seed: u64, sample_index: u64) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
            index: sample_index,
            block: 0,
            buf: [0; 4],
            pos: 4,
            spare_normal: None,
        }
    }

    #[inline]
    fn refill(&mut self) {
        self.buf = philox4x32_10(
            self.key,
            [
                self.index as u32,
                (self.index >> 32) as u32,
                self.block,
                0,
            ],
        );
        self.block = self.block.wrapping_add(1);
        self.pos = 0;
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.pos == 4 {
            self.refill();
        }
        let v = self.buf[self.pos as usize];
        self.pos += 1;
        v
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        (u64::from(self.next_u32()) << 32) | u64::from(self.next_u32())
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution, never 0 or 1.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via Box-Muller (pairs cached).
    #[inline]
    pub fn normal(&mut self) -> f64 {
        if let Some(s) = self.spare_normal.take() {
            return s;
        }
        let r = (-2.0 * self.uniform().ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * self.uniform()).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    /// Gamma(shape, scale 1) via Marsaglia-Tsang squeeze, with the
    /// `U^(1/alpha)` boost for shape < 1.
    pub fn gamma(&mut self, g: &GammaShape) -> f64 {
        let dv = loop {
            let x = self.normal();
            let t = 1.0 + g.c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                break g.d * v;
            }
            if u.ln() < 0.5 * x2 + g.d * (1.0 - v + v.ln()) {
                break g.d * v;
            }
        };
        if g.boost_exp > 0.0 {
            dv * self.uniform().powf(g.boost_exp)
        } else {
            dv
        }
    }

    /// Unscaled Student-t with `dof` degrees of freedom:
    /// `z * sqrt(dof / chi2_dof)`, `chi2_dof = 2 * Gamma(dof/2)`.
    #[inline]
    pub fn student_t(&mut self, half_dof: &GammaShape) -> f64 {
        let chi2 = 2.0 * self.gamma(half_dof);
        self.normal() * (2.0 * half_dof.alpha / chi2).sqrt()
    }
}

/// Precomputed Marsaglia-Tsang constants for a gamma shape.
#[derive(Debug, Clone, Copy)]
pub struct GammaShape {
    pub alpha: f64,
    d: f64,
    c: f64,
    boost_exp: f64,
}

impl GammaShape {
    /// `alpha` must be positive and finite.
    pub fn new(alpha: f64) -> Self {
        debug_assert!(alpha > 0.0 && alpha.is_finite());
        let eff = if alpha < 1.0 { alpha + 1.0 } else { alpha };
        let d = eff - 1.0 / 3.0;
        Self {
            alpha,
            d,
            c: 1.0 / (3.0 * d.sqrt()),
            boost_exp: if alpha < 1.0 { 1.0 / alpha } else { 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Known-answer vectors for Philox-4x32-10 (counter words c0..c3, key
    /// words k0..k1, expected output words).
    #[test]
    fn philox_known_answers() {
        let cases: [([u32; 4], [u32; 2], [u32; 4]); 3] = [
            (
                [0, 0, 0, 0],
                [0, 0],
                [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8],
            ),
            (
                [0xffff_ffff; 4],
                [0xffff_ffff; 2],
                [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd],
            ),
            (
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0],
                [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1],
            ),
        ];
        for (ctr, key, expect) in cases {
            assert_eq!(philox4x32_10(key, ctr), expect);
        }
    }

    #[test]
    fn streams_are_deterministic_and_separated() {
        let mut a1 = SampleRng::new(42, 7);
        let mut a2 = SampleRng::new(42, 7);
        let mut b = SampleRng::new(42, 8);
        let mut c = SampleRng::new(43, 7);
        let xs1: Vec<u32> = (0..64).map(|_| a1.next_u32()).collect();
        let xs2: Vec<u32> = (0..64).map(|_| a2.next_u32()).collect();
        let ys: Vec<u32> = (0..64).map(|_| b.next_u32()).collect();
        let zs: Vec<u32> = (0..64).map(|_| c.next_u32()).collect();
        assert_eq!(xs1, xs2);
        assert_ne!(xs1, ys);
        assert_ne!(xs1, zs);
    }

    #[test]
    fn uniform_is_strictly_inside_unit_interval() {
        let mut rng = SampleRng::new(1, 0);
        let mut lo = 1.0f64;
        let mut hi = 0.0f64;
        for _ in 0..100_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
            lo = lo.min(u);
            hi = hi.max(u);
        }
        assert!(lo < 0.01 && hi > 0.99);
    }

    #[test]
    fn normal_moments() {
        let mut rng = SampleRng::new(2, 0);
        let n = 200_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = rng.normal();
            m1 += x;
            m2 += x * x;
        }
        m1 /= n as f64;
        m2 /= n as f64;
        assert!(m1.abs() < 0.01, "normal mean {m1}");
        assert!((m2 - 1.0).abs() < 0.02, "normal second moment {m2}");
    }

    #[test]
    fn gamma_moments() {
        for &alpha in &[0.4, 1.0, 2.5, 7.0] {
            let g = GammaShape::new(alpha);
            let mut rng = SampleRng::new(3, alpha.to_bits());
            let n = 200_000;
            let (mut m1, mut m2) = (0.0, 0.0);
            for _ in 0..n {
                let x = rng.gamma(&g);
                assert!(x > 0.0);
                m1 += x;
                m2 += x * x;
            }
            m1 /= n as f64;
            m2 /= n as f64;
            let var = m2 - m1 * m1;
            assert!(
                (m1 - alpha).abs() < 0.03 * (1.0 + alpha),
                "gamma({alpha}) mean {m1}"
            );
            assert!(
                (var - alpha).abs() < 0.06 * (1.0 + alpha),
                "gamma({alpha}) var {var}"
            );
        }
    }

    #[test]
    fn student_t_is_symmetric_with_heavy_tails() {
        let half = GammaShape::new(2.5); // dof = 5
        let mut rng = SampleRng::new(4, 0);
        let n = 200_000;
        let mut mean = 0.0;
        let mut var = 0.0;
        for _ in 0..n {
            let x = rng.student_t(&half);
            mean += x;
            var += x * x;
        }
        mean /= n as f64;
        var /= n as f64;
        // t_5: mean 0, variance 5/3.
        assert!(mean.abs() < 0.02, "t mean {mean}");
        assert!((var - 5.0 / 3.0).abs() < 0.1, "t var {var}");
    }
}
