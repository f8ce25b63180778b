//! Periodic square spin lattice with heat-bath dynamics.
//!
//! Each spin feels the ferromagnetic pull of its four neighbours and a
//! minority-seeking term proportional to the absolute magnetization:
//! `h_i = J * sum_nn(S_j) - alpha * S_i * |M|`. A heat-bath update sets the
//! spin up with probability `1 / (1 + exp(-2 beta h_i))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Site visiting order within one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// `n` updates at uniformly drawn sites.
    #[default]
    Random,
    /// Sites `0..n` in row-major order.
    Sequential,
}

/// When the `|M|` entering the local field is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// Current magnetization at every single-site update.
    #[default]
    PerUpdate,
    /// Magnetization frozen at the start of each sweep.
    PerSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeParams {
    pub side: usize,
    pub coupling: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sweep_order: SweepOrder,
    pub field_mode: FieldMode,
}

impl LatticeParams {
    pub fn new(side: usize, coupling: f64, alpha: f64, beta: f64) -> Self {
        LatticeParams {
            side,
            coupling,
            alpha,
            beta,
            sweep_order: SweepOrder::Random,
            field_mode: FieldMode::PerUpdate,
        }
    }
}

/// Probability that a heat-bath update sets the spin to +1.
pub fn up_probability(beta: f64, field: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * beta * field).exp())
}

#[derive(Debug, Clone)]
pub struct SpinLattice {
    params: LatticeParams,
    spins: Vec<i8>,
    m_sum: i64,
}

impl SpinLattice {
    /// Builds a lattice from explicit spins (row-major). Panics on a size
    /// mismatch or a spin other than +-1.
    pub fn from_spins(params: LatticeParams, spins: Vec<i8>) -> Self {
        assert_eq!(spins.len(), params.side * params.side, "spin count must be side^2");
        assert!(spins.iter().all(|&s| s == 1 || s == -1), "spins must be +-1");
        let m_sum = spins.iter().map(|&s| s as i64).sum();
        SpinLattice { params, spins, m_sum }
    }

    pub fn uniform(params: LatticeParams, spin: i8) -> Self {
        Self::from_spins(params, vec![spin; params.side * params.side])
    }

    /// I.i.d. uniform +-1 spins.
    pub fn random<R: Rng + ?Sized>(params: LatticeParams, rng: &mut R) -> Self {
        let n = params.side * params.side;
        let spins = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        Self::from_spins(params, spins)
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn side(&self) -> usize {
        self.params.side
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, site: usize) -> i8 {
        self.spins[site]
    }

    /// Cached sum of all spins, `n * M`.
    pub fn spin_sum(&self) -> i64 {
        self.m_sum
    }

    pub fn magnetization(&self) -> f64 {
        if self.spins.is_empty() {
            return 0.0;
        }
        self.m_sum as f64 / self.spins.len() as f64
    }

    /// The four periodic nearest neighbours (right, left, down, up).
    pub fn neighbors(&self, site: usize) -> [usize; 4] {
        let l = self.params.side;
        let (row, col) = (site / l, site % l);
        [
            row * l + (col + 1) % l,
            row * l + (col + l - 1) % l,
            ((row + 1) % l) * l + col,
            ((row + l - 1) % l) * l + col,
        ]
    }

    fn neighbor_sum(&self, site: usize) -> i32 {
        self.neighbors(site)
            .iter()
            .map(|&j| self.spins[j] as i32)
            .sum()
    }

    pub fn local_field(&self, site: usize) -> f64 {
        self.local_field_with(site, self.magnetization().abs())
    }

    fn local_field_with(&self, site: usize, abs_m: f64) -> f64 {
        self.params.coupling * self.neighbor_sum(site) as f64
            - self.params.alpha * self.spins[site] as f64 * abs_m
    }

    /// Heat-bath update of one site with uniform variate `u` in `[0, 1)`.
    /// Returns the new spin.
    pub fn heat_bath_update(&mut self, site: usize, u: f64) -> i8 {
        let abs_m = self.magnetization().abs();
        self.update_with(site, u, abs_m)
    }

    /// One heat-bath update of a uniformly chosen site, drawing the site and
    /// then the variate from `rng` exactly as a random-order sweep does.
    /// Returns the site.
    pub fn random_site_update<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let site = rng.random_range(0..self.spins.len());
        let u: f64 = rng.random();
        self.heat_bath_update(site, u);
        site
    }

    fn update_with(&mut self, site: usize, u: f64, abs_m: f64) -> i8 {
        let q = up_probability(self.params.beta, self.local_field_with(site, abs_m));
        let new = if u < q { 1 } else { -1 };
        let old = std::mem::replace(&mut self.spins[site], new);
        self.m_sum += (new - old) as i64;
        new
    }

    /// One sweep of `n` single-site updates. Returns the number of updates.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let n = self.spins.len();
        let frozen = match self.params.field_mode {
            FieldMode::PerSweep => Some(self.magnetization().abs()),
            FieldMode::PerUpdate => None,
        };
        for k in 0..n {
            let site = match self.params.sweep_order {
                SweepOrder::Random => rng.random_range(0..n),
                SweepOrder::Sequential => k,
            };
            let u: f64 = rng.random();
            let abs_m = frozen.unwrap_or_else(|| self.magnetization().abs());
            self.update_with(site, u, abs_m);
        }
        n
    }

    /// Row-major text dump, one lattice row per line.
    pub fn snapshot(&self) -> String {
        let mut out = String::with_capacity(self.spins.len() * 3);
        for row in self.spins.chunks(self.params.side.max(1)) {
            let line: Vec<&str> = row
                .iter()
                .map(|&s| if s > 0 { "+1" } else { "-1" })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn standard(side: usize) -> LatticeParams {
        LatticeParams::new(side, 1.0, 4.0, 1.45)
    }

    #[test]
    fn magnetization_counts() {
        let up = SpinLattice::uniform(standard(12), 1);
        assert_eq!(up.magnetization(), 1.0);

        let half: Vec<i8> = (0..144).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        assert_eq!(SpinLattice::from_spins(standard(12), half).magnetization(), 0.0);

        let mixed: Vec<i8> = (0..144).map(|i| if i < 100 { 1 } else { -1 }).collect();
        let lat = SpinLattice::from_spins(standard(12), mixed);
        assert_eq!(lat.spin_sum(), 56);
        assert!((lat.magnetization() - 56.0 / 144.0).abs() < 1e-15);
    }

    #[test]
    fn local_field_examples() {
        let up = SpinLattice::uniform(standard(12), 1);
        assert_eq!(up.local_field(0), 0.0);

        // site 5 on a 4x4 lattice: neighbours 6, 4, 9, 1
        let mut spins = vec![1i8; 16];
        spins[4] = -1;
        spins[1] = -1;
        let lat = SpinLattice::from_spins(LatticeParams::new(4, 1.0, 0.0, 1.0), spins);
        assert_eq!(lat.neighbors(5), [6, 4, 9, 1]);
        assert_eq!(lat.local_field(5), 0.0);

        // S_i = -1 with all neighbours up and |M| = 0.5: 4 + 4*0.5 = 6
        let mut spins = vec![1i8; 16];
        for s in [5usize, 0, 2, 15] {
            spins[s] = -1;
        }
        let lat = SpinLattice::from_spins(standard(4), spins);
        assert_eq!(lat.magnetization(), 0.5);
        assert_eq!(lat.local_field(5), 6.0);
    }

    #[test]
    fn up_probability_values() {
        assert_eq!(up_probability(1.45, 0.0), 0.5);
        let q = up_probability(1.45, 1.0);
        assert!((q - 1.0 / (1.0 + (-2.9f64).exp())).abs() < 1e-15);
        assert!((q - 0.947_846_437_4).abs() < 1e-9);
        assert!(up_probability(1e6, 0.5) > 1.0 - 1e-12);
    }

    #[test]
    fn heat_bath_respects_threshold() {
        let mut lat = SpinLattice::uniform(LatticeParams::new(4, 1.0, 0.0, 1.45), -1);
        // h = -4 so q is tiny; u = 0 still sets +1 since 0 < q
        assert_eq!(lat.heat_bath_update(0, 0.0), 1);
        assert_eq!(lat.spin_sum(), -14);
        assert_eq!(lat.heat_bath_update(0, 0.999), -1);
        assert_eq!(lat.spin_sum(), -16);
    }

    #[test]
    fn sweep_counts_updates_and_is_reproducible() {
        let mut a = SpinLattice::random(standard(12), &mut ChaCha8Rng::seed_from_u64(5));
        let mut b = a.clone();
        let mut ra = ChaCha8Rng::seed_from_u64(9);
        let mut rb = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(a.sweep(&mut ra), 144);
        b.sweep(&mut rb);
        assert_eq!(a.spins(), b.spins());
    }

    #[test]
    fn random_sweep_is_n_single_updates() {
        let mut a = SpinLattice::random(standard(6), &mut ChaCha8Rng::seed_from_u64(5));
        let mut b = a.clone();
        let mut ra = ChaCha8Rng::seed_from_u64(11);
        let mut rb = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..7 {
            a.sweep(&mut ra);
            for _ in 0..36 {
                b.random_site_update(&mut rb);
            }
            assert_eq!(a.spins(), b.spins());
        }
    }

    #[test]
    fn ordered_lattice_stays_ordered_without_global_term() {
        let params = LatticeParams::new(12, 1.0, 0.0, 50.0);
        let mut lat = SpinLattice::uniform(params, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            lat.sweep(&mut rng);
        }
        assert_eq!(lat.spin_sum(), 144);
    }

    #[test]
    fn sequential_per_sweep_mode_runs() {
        let mut params = standard(6);
        params.sweep_order = SweepOrder::Sequential;
        params.field_mode = FieldMode::PerSweep;
        let mut lat = SpinLattice::random(params, &mut ChaCha8Rng::seed_from_u64(2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            lat.sweep(&mut rng);
        }
        let exact: i64 = lat.spins().iter().map(|&s| s as i64).sum();
        assert_eq!(exact, lat.spin_sum());
    }

    #[test]
    fn snapshot_layout() {
        let spins = vec![1, -1, -1, 1];
        let lat = SpinLattice::from_spins(standard(2), spins);
        assert_eq!(lat.snapshot(), "+1 -1\n-1 +1\n");
    }

    proptest! {
        #[test]
        fn cache_stays_coherent(seed in any::<u64>(), side in 2usize..9, sweeps in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut lat = SpinLattice::random(standard(side), &mut rng);
            for _ in 0..sweeps {
                lat.sweep(&mut rng);
                let exact: i64 = lat.spins().iter().map(|&s| s as i64).sum();
                prop_assert_eq!(exact, lat.spin_sum());
            }
        }

        #[test]
        fn global_flip_negates_field(seed in any::<u64>(), side in 2usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lat = SpinLattice::random(standard(side), &mut rng);
            let flipped = SpinLattice::from_spins(
                *lat.params(),
                lat.spins().iter().map(|s| -s).collect(),
            );
            for site in 0..lat.len() {
                let h = lat.local_field(site);
                prop_assert_eq!(flipped.local_field(site), -h);
                let q = up_probability(1.45, h);
                let qf = up_probability(1.45, -h);
                prop_assert!((qf - (1.0 - q)).abs() < 1e-12);
            }
        }
    }
}
