//! Straight-line reference implementation of one run, written against the
//! model equations without any of the engine's helpers. It shares only the
//! random-number conventions: ChaCha8 seeded with `seed_from_u64(seed)`,
//! stream 1 for the arbitrary profile and stream 0 for everything else.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct OracleInput {
    pub i0: Vec<f64>,
    pub targets: Vec<f64>,
    /// `a[j][i]`: spillover from issue j to issue i.
    pub a: Vec<Vec<f64>>,
    pub budget: f64,
    pub gamma: f64,
    pub rol: usize,
    pub coc: usize,
    pub max_periods: usize,
    pub tol: f64,
    pub strict: bool,
    /// `None` draws a fresh arbitrary profile from the seed.
    pub profile: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct OracleStep {
    pub p: Vec<f64>,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub theta: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct OracleRun {
    pub l: f64,
    pub periods: usize,
    pub converged: bool,
    pub steps: Vec<OracleStep>,
}

impl OracleRun {
    pub fn mean_allocation(&self) -> Vec<f64> {
        let n = self.steps[0].p.len();
        let mut m = vec![0.0; n];
        for s in &self.steps {
            for k in 0..n {
                m[k] += s.p[k];
            }
        }
        m.iter().map(|x| x / self.steps.len() as f64).collect()
    }
}

fn fmap(x: f64) -> f64 {
    x / (1.0 - x).exp()
}

fn done(ind: &[f64], targets: &[f64], tol: f64) -> bool {
    let mut all = true;
    for k in 0..ind.len() {
        if ind[k] < targets[k] - tol {
            all = false;
        }
    }
    all
}

pub fn oracle_run(inp: &OracleInput, seed: u64) -> OracleRun {
    let n = inp.i0.len();
    let b = inp.budget;

    let profile = match &inp.profile {
        Some(p) => p.clone(),
        None => {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(1);
            let mut e = Vec::new();
            for _ in 0..n {
                let u: f64 = r.random();
                e.push(-(1.0 - u).ln());
            }
            let s: f64 = e.iter().sum();
            e.iter().map(|x| b * x / s).collect()
        }
    };

    if done(&inp.i0, &inp.targets, inp.tol) {
        return OracleRun {
            l: 0.0,
            periods: 0,
            converged: true,
            steps: Vec::new(),
        };
    }

    let mut out_deg = vec![0usize; n];
    for k in 0..n {
        for j in 0..n {
            if inp.a[k][j] != 0.0 {
                out_deg[k] += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // two lag periods under the profile and the initial indicators
    let fr0 = fmap(inp.i0[inp.rol]);
    let fc0 = fmap(inp.i0[inp.coc]);
    let mut lag_c = Vec::new();
    let mut lag_f = Vec::new();
    let mut lag_theta = Vec::new();
    for _ in 0..2 {
        let mut c = vec![0.0; n];
        for k in 0..n {
            let u: f64 = rng.random();
            c[k] = u * profile[k];
        }
        let mut total_d = 0.0;
        for k in 0..n {
            total_d += profile[k] - c[k];
        }
        let mut theta = vec![false; n];
        for k in 0..n {
            let prob = if total_d > 0.0 {
                fc0 * (profile[k] - c[k]) / total_d
            } else {
                0.0
            };
            let u: f64 = rng.random();
            theta[k] = u < prob;
        }
        let mut f = vec![0.0; n];
        for k in 0..n {
            let pun = if theta[k] { fr0 } else { 0.0 };
            f[k] = (inp.i0[k] + (profile[k] - c[k])) * (1.0 - pun);
        }
        lag_c.push(c);
        lag_f.push(f);
        lag_theta.push(theta);
    }
    let mut c2 = lag_c[0].clone();
    let mut c1 = lag_c[1].clone();
    let mut f2 = lag_f[0].clone();
    let mut f1 = lag_f[1].clone();
    let mut theta_prev = lag_theta[1].clone();
    let mut ind = inp.i0.clone();

    let mut l = 0.0;
    let mut steps = Vec::new();
    let mut converged = false;
    for t in 0..inp.max_periods {
        let fr = fmap(ind[inp.rol]);
        let fc = fmap(ind[inp.coc]);

        let p: Vec<f64> = if inp.strict || t == 0 {
            profile.clone()
        } else {
            let mut q = vec![0.0; n];
            for k in 0..n {
                let mut gap = inp.targets[k] - ind[k];
                if gap < 0.0 {
                    gap = 0.0;
                }
                let pun = if theta_prev[k] { fr } else { 0.0 };
                q[k] = gap * (out_deg[k] as f64 + 1.0) * (1.0 - pun);
            }
            let s: f64 = q.iter().sum();
            if s > 0.0 {
                q.iter().map(|x| b * x / s).collect()
            } else {
                vec![b / n as f64; n]
            }
        };

        let mut c = vec![0.0; n];
        for k in 0..n {
            let df = f1[k] - f2[k];
            let dc = c1[k] - c2[k];
            let prod = df * dc;
            let d = if prod > 0.0 {
                1.0
            } else if prod < 0.0 {
                -1.0
            } else {
                0.0
            };
            let mut raw = c1[k] + d * df.abs() * (c1[k] + c2[k]) / 2.0;
            if raw < 0.0 {
                raw = 0.0;
            }
            c[k] = if raw < p[k] { raw } else { p[k] };
        }

        let mut total_d = 0.0;
        for k in 0..n {
            total_d += p[k] - c[k];
        }
        let mut theta = vec![false; n];
        for k in 0..n {
            let prob = if total_d > 0.0 {
                fc * (p[k] - c[k]) / total_d
            } else {
                0.0
            };
            let u: f64 = rng.random();
            theta[k] = u < prob;
        }

        let mut new_ind = vec![0.0; n];
        for k in 0..n {
            let mut spill = 0.0;
            for j in 0..n {
                spill += c[j] * inp.a[j][k];
            }
            let mut gap = inp.targets[k] - ind[k];
            if gap < 0.0 {
                gap = 0.0;
            }
            new_ind[k] = (ind[k] + inp.gamma * gap * (c[k] + spill)).clamp(0.0, 1.0);
        }

        let mut f = vec![0.0; n];
        for k in 0..n {
            let pun = if theta[k] { fr } else { 0.0 };
            f[k] = (new_ind[k] + (p[k] - c[k])) * (1.0 - pun);
        }

        let mut div = 0.0;
        for k in 0..n {
            div += p[k] - c[k];
        }
        l += div / b;

        steps.push(OracleStep {
            p: p.clone(),
            c: c.clone(),
            f: f.clone(),
            i: new_ind.clone(),
            theta: theta.clone(),
        });

        c2 = c1;
        c1 = c;
        f2 = f1;
        f1 = f;
        theta_prev = theta;
        ind = new_ind;
        if done(&ind, &inp.targets, inp.tol) {
            converged = true;
            break;
        }
    }

    OracleRun {
        l,
        periods: steps.len(),
        converged,
        steps,
    }
}
