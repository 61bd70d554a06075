use lvwave::kpp::{kpp_residual, KppSpec};
use lvwave::numerics::{discrete_roots, discrete_symbol, solve_tridiagonal, Grid};

fn main() {
    let spec = KppSpec::logistic(0.5, 1.0).unwrap();
    let c = 2.0;
    let (l, h) = (40.0, 0.04);
    let grid = Grid::with_spacing(l, h).unwrap();
    let n = grid.len();
    let lam = (c - (c * c - 4.0 * spec.d1).sqrt()) / 2.0;
    let beta = spec.d1 + 1.0;
    let (mu, _) = discrete_roots(h, c, spec.d1);
    let (nu, _) = discrete_roots(h, c, -spec.d2);
    let c2r = -(spec.d1 / spec.b) / discrete_symbol(nu * nu, h, c, -spec.d2);
    println!("mu={mu} nu={nu} c2r={c2r}");

    let a_l = 1.0 / (h * h) + c / (2.0 * h);
    let a_r = 1.0 / (h * h) - c / (2.0 * h);
    let a_d = -2.0 / (h * h) - beta;
    let mut lower = vec![a_l; n - 1];
    let mut diag = vec![a_d; n];
    let mut upper = vec![a_r; n - 1];
    diag[0] = 1.0;
    upper[0] = -1.0 / mu;
    diag[n - 1] = 1.0;
    lower[n - 2] = -nu;

    let mut w: Vec<f64> = grid
        .nodes()
        .map(|x| spec.b / (1.0 + (-lam * x).exp()))
        .collect();

    for it in 0..30001 {
        let mut rhs = vec![0.0; n];
        rhs[0] = 0.0;
        for i in 1..n - 1 {
            rhs[i] = -beta * w[i] - spec.f(w[i]);
        }
        let gap = spec.b - w[n - 2];
        rhs[n - 1] = spec.b * (1.0 - nu) - c2r * nu * (nu - 1.0) * gap * gap;
        let wn = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        let diff = wn
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let idiff = (0..n)
            .max_by(|&i, &j| {
                (wn[i] - w[i])
                    .abs()
                    .partial_cmp(&(wn[j] - w[j]).abs())
                    .unwrap()
            })
            .unwrap();
        w = wn;
        if it % 2000 == 0 {
            let res = kpp_residual(&spec, c, &grid, &w);
            let hh = h;
            let mut rmax = 0.0;
            let mut ri = 0;
            for i in 1..n - 1 {
                let lap = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (hh * hh);
                let adv = c * (w[i + 1] - w[i - 1]) / (2.0 * hh);
                let r = (lap - adv + spec.f(w[i])).abs();
                if r > rmax {
                    rmax = r;
                    ri = i;
                }
            }
            // front location
            let fi = (0..n).find(|&i| w[i] >= 0.5).unwrap_or(0);
            println!(
                "it={it} diff={diff:.2e}@{:.1} res={res:.2e}@xi={:.2} front={:.2} w[n-1]={:.6} w[n-2]={:.6}",
                grid.node(idiff),
                grid.node(ri),
                grid.node(fi),
                w[n - 1],
                w[n - 2]
            );
        }
    }
}
