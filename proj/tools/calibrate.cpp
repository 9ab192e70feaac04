// Offline fitting tool for the connectivity generator's beta table.
//
// For each connectivity target c it bisects the Poisson rate beta until the
// median unconstrained min-fill width over a fixed set of pilot structures
// (N variables, shared seeds across all beta probes) lands on c.  The output
// is a C++ initializer ready to paste into netgen.hpp, plus the achieved
// medians so the fit quality is visible.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include <mapsearch/graph.hpp>
#include <mapsearch/netgen.hpp>
#include <mapsearch/rng.hpp>

namespace {

using namespace mapsearch;

// lower median of the pilot widths, so the statistic stays integral
int median_width(int n, double beta, int pilots, std::uint64_t seed) {
    std::vector<int> widths;
    widths.reserve(static_cast<std::size_t>(pilots));
    for (int i = 0; i < pilots; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        const Dag dag = gen_structure_parent_sampled(n, beta, rng);
        const InteractionGraph g = moral_graph_of(dag.n, dag.parents);
        const EliminationOrder order = min_fill_order(g);
        widths.push_back(order_width(g, order));
    }
    std::sort(widths.begin(), widths.end());
    return widths[widths.size() / 2 - (widths.size() % 2 == 0 ? 1 : 0)];
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fit the connectivity generator's beta table"};
    int n = 100;
    int pilots = 50;
    int c_min = 1;
    int c_max = 20;
    std::uint64_t seed = 20260816;
    app.add_option("-n,--variables", n, "pilot network size");
    app.add_option("--pilots", pilots, "structures per beta probe");
    app.add_option("--c-min", c_min, "first connectivity target");
    app.add_option("--c-max", c_max, "last connectivity target");
    app.add_option("--seed", seed, "pilot seed base");
    CLI11_PARSE(app, argc, argv);

    std::vector<double> betas;
    std::vector<int> medians;
    for (int c = c_min; c <= c_max; ++c) {
        // median width grows with beta; bisect for the left edge of the
        // region where it reaches c, then keep the midpoint
        double lo = 0.005, hi = 8.0;
        for (int it = 0; it < 22; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (median_width(n, mid, pilots, seed) >= c)
                hi = mid;
            else
                lo = mid;
        }
        const double beta = 0.5 * (lo + hi);
        const int med = median_width(n, beta, pilots, seed);
        betas.push_back(beta);
        medians.push_back(med);
        std::cerr << "c=" << c << " beta=" << beta << " median_width=" << med << "\n";
    }

    std::cout << "// fitted so the median unconstrained min-fill width of " << pilots
              << " pilot structures\n// at N=" << n << " matches the index-1 connectivity target"
              << " (seed " << seed << ")\n";
    std::cout << "inline constexpr double kConnectivityBeta[" << (c_max - c_min + 1) << "] = {\n";
    for (std::size_t i = 0; i < betas.size(); ++i) {
        std::cout << "    " << betas[i] << ",  // c=" << (c_min + static_cast<int>(i))
                  << " -> median width " << medians[i] << "\n";
    }
    std::cout << "};\n";
    return 0;
}
