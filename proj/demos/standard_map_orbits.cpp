// Rotation numbers of standard-map orbits with non-monotone rotation across
// the shearless region u = 1/(2 beta).
// usage: standard_map_orbits [a] [beta] (defaults 0.05 0.25)

#include <cstdio>
#include <algorithm>
#include <cstdlib>

#include "degres/cylinder_map.hpp"

int main(int argc, char** argv)
{
    using namespace degres;
    const double a = argc > 1 ? std::atof(argv[1]) : 0.05;
    const double beta = argc > 2 ? std::atof(argv[2]) : 0.25;
    const StandardMap map{a, beta};

    std::printf("standard map a=%g beta=%g, shearless u=%g\n", a, beta, 1.0 / (2.0 * beta));
    std::printf("%8s %14s %12s %10s\n", "u0", "rotation", "tail", "u range");
    for (int i = 0; i <= 16; ++i) {
        const double u0 = 2.0 * i / 16.0 / (2.0 * beta);
        try {
            const auto rho = rotation_number(map, {u0, 0.0}, 20000);
            const auto orbit = iterate_orbit(map, {u0, 0.0}, 2000);
            double lo = u0, hi = u0;
            for (const auto& s : orbit.states) {
                lo = std::min(lo, s.u);
                hi = std::max(hi, s.u);
            }
            std::printf("%8.4f %14.10f %12.3g %10.4f\n", u0, rho.value, rho.tail_estimate, hi - lo);
        } catch (const Error& e) {
            std::printf("%8.4f  %s\n", u0, e.what());
        }
    }

    std::printf("\nfixed points\n");
    for (const auto& f : standard_fixed_points(map))
        std::printf("  u=%.6f v=%.6f trace=%.6f %s\n", f.state.u, f.state.v, f.trace, f.saddle ? "saddle" : "elliptic");
    return 0;
}
