// Prints the optimal pair-amplitude ratio and NOON fidelity for N = 2..8,
// then the ideal five-photon fringe with its fitted visibility.
#include <cstdio>

#include "noonlab/noonlab.hpp"

using namespace noonlab;

int main()
{
    std::printf("%3s %10s %10s\n", "N", "gamma*", "F_N");
    for (int n = 2; n <= 8; ++n)
    {
        const auto opt = noon::optimal_gamma(n, 0.1, std::numbers::pi);
        std::printf("%3d %10.5f %10.5f\n", n, opt.gamma_star, opt.fidelity_star);
    }

    fock::SourceSpec source;
    source.gamma = noon::optimal_gamma(5, source.r, source.phi_cs).gamma_star;
    const detection::DetectorSpec ideal{64, 1.0};
    const auto phases = detection::uniform_phases(120);
    const auto curve = detection::coincidence_scan(source, {}, ideal, ideal, {3, 2}, phases);
    const auto fit = analysis::fit_trig(curve.phases, curve.rates, analysis::uniform_weights(phases.size()), 5,
                                        analysis::ErrorModel::residual_scaled);
    std::printf("\n(3,2) fringe: dominant frequency %d, V_5 = %.4f\n", fit.dominant_frequency(), fit.visibility);
    for (std::size_t i = 0; i < phases.size(); i += 6)
        std::printf("%8.4f %.6e\n", phases[i], curve.rates[i]);
    return 0;
}
