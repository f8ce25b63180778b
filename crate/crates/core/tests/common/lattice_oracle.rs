//! Brute-force heat-bath chain on a 2x2 periodic lattice. State `s` has
//! spin +1 at site `i` iff bit `i` is set; sites are row-major.

pub const SITES: usize = 4;
pub const STATES: usize = 1 << SITES;

pub fn spin(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn state_index(spins: &[i8]) -> usize {
    spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(i, _)| 1 << i)
        .sum()
}

/// The four neighbour slots of a site with periodic wrap. On a 2x2 lattice
/// left and right are the same site, as are up and down.
fn neighbour_slots(site: usize) -> [usize; 4] {
    let (r, c) = (site / 2, site % 2);
    let at = |r: usize, c: usize| (r % 2) * 2 + c % 2;
    [at(r, c + 1), at(r, c + 1), at(r + 1, c), at(r + 1, c)]
}

fn field(state: usize, site: usize, j: f64, alpha: f64) -> f64 {
    let nn: f64 = neighbour_slots(site).iter().map(|&k| spin(state, k)).sum();
    let m = (0..SITES).map(|k| spin(state, k)).sum::<f64>() / SITES as f64;
    j * nn - alpha * spin(state, site) * m.abs()
}

/// Transition matrix of one random-site heat-bath update.
pub fn transition(j: f64, alpha: f64, beta: f64) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; STATES]; STATES];
    for s in 0..STATES {
        for site in 0..SITES {
            let up = 1.0 / (1.0 + (-2.0 * beta * field(s, site, j, alpha)).exp());
            let with_up = s | 1 << site;
            let with_down = s & !(1 << site);
            p[s][with_up] += up / SITES as f64;
            p[s][with_down] += (1.0 - up) / SITES as f64;
        }
    }
    p
}

fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Stationary distribution by repeated squaring of `p`.
pub fn stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let mut m = p.to_vec();
    for _ in 0..60 {
        m = mul(&m, &m);
    }
    let row = m[0].clone();
    let total: f64 = row.iter().sum();
    row.iter().map(|x| x / total).collect()
}

fn power(p: &[Vec<f64>], mut k: usize) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut acc: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut base = p.to_vec();
    while k > 0 {
        if k & 1 == 1 {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        k >>= 1;
    }
    acc
}

/// Worst-case total variation between a row of `p^k` and `pi`.
pub fn distance(p: &[Vec<f64>], pi: &[f64], k: usize) -> f64 {
    power(p, k)
        .iter()
        .map(|row| 0.5 * row.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest `k` for which every row of `p^k` is within `tol` total
/// variation of `pi`. The distance is non-increasing in `k`, so bisect.
pub fn mixing_spacing(p: &[Vec<f64>], pi: &[f64], tol: f64) -> usize {
    let mut hi = 1usize;
    while distance(p, pi, hi) >= tol {
        hi *= 2;
        assert!(hi < 1 << 40, "chain does not mix");
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if distance(p, pi, mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.max(1)
}

/// Boltzmann weights `exp(-beta E)` with `E = -J/2 sum_i S_i sum_slots S_j`.
pub fn boltzmann(j: f64, beta: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..STATES)
        .map(|s| {
            let pair: f64 = (0..SITES)
                .map(|i| spin(s, i) * neighbour_slots(i).iter().map(|&k| spin(s, k)).sum::<f64>())
                .sum();
            (0.5 * beta * j * pair).exp()
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}
