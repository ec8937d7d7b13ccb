// Compares Monte Carlo transition times with the Kramers-law prediction on a small problem.
#include <cstdio>

#include "kramers_spde/kramers.hpp"
#include "kramers_spde/simulate.hpp"

int main() {
    using namespace kspde;
    SimConfig cfg;
    cfg.L = 1.0;
    cfg.d = 7;
    cfg.dt = 2e-3;
    cfg.seed = 2024;
    std::printf("%6s %12s %12s %10s %8s\n", "eps", "mc_mean", "predicted", "ratio", "stderr");
    for (double eps : {0.125, 0.1, 0.08}) {
        cfg.eps = eps;
        const auto st = mc_stats(cfg, 64);
        const auto p = predict_time(cfg.pot, cfg.L, cfg.bc, eps, cfg.d);
        std::printf("%6.3f %12.4g %12.4g %10.3f %8.3g\n", eps, st.mean, p.expected_time, st.mean / p.expected_time,
                    st.stderr_ / p.expected_time);
    }
    return 0;
}
