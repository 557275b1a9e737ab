// Prints the equilibria of the zone system along a line in the parameter plane.
// usage: equilibria_table [mu2] (default 2)

#include <cstdio>
#include <cstdlib>

#include "degres/equilibria.hpp"
#include "degres/reconnection.hpp"

int main(int argc, char** argv)
{
    using namespace degres;
    const double mu2 = argc > 1 ? std::atof(argv[1]) : 2.0;
    const ZoneParameters base{2.0, 1.0, 1, 0.0, mu2};

    std::printf("a=%g b=%g p=%d mu2=%g\n", base.a, base.b, base.p, mu2);
    std::printf("%7s  %-5s %10s %10s %-6s %12s\n", "mu1", "label", "u", "v", "kind", "energy");
    for (int i = 0; i <= 12; ++i) {
        const double mu1 = -3.0 + 0.5 * i;
        const auto z = base.with_mu(mu1, mu2);
        for (const auto& e : closed_form_equilibria(z))
            std::printf("%7.2f  %-5s %10.6f %10.6f %-6s %12.6f\n", mu1, std::string(to_string(e.label)).c_str(), e.state.u, e.state.v,
                        std::string(to_string(e.kind)).c_str(), e.energy);
        if (const auto s = try_region_signature(z)) std::printf("%7s  region %s\n", "", s->key().c_str());
    }
    return 0;
}
