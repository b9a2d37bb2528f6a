// Monte Carlo null distribution of the sliced matching term when the features
// are themselves i.i.d. draws from the target. Prints the quantiles used as a
// frozen threshold by the tests.

#include "rgg/distributions.hpp"
#include "rgg/slicing.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

int main(int argc, char** argv)
{
   CLI::App app{"null calibration for the sliced matching loss"};
   std::size_t batch = 4096;
   std::size_t dim = 16;
   std::size_t n_proj = 1024;
   std::size_t seeds = 100;
   double p = 2.0;
   double mu = 0.0;
   double sigma = 1.0;
   app.add_option("--batch", batch);
   app.add_option("--dim", dim);
   app.add_option("--projections", n_proj);
   app.add_option("--seeds", seeds);
   app.add_option("--p", p);
   app.add_option("--mu", mu);
   app.add_option("--sigma", sigma);
   CLI11_PARSE(app, argc, argv);

   const rgg::RGGParams target{p, mu, sigma};
   std::vector<double> stats;
   for (std::size_t s = 0; s < seeds; ++s) {
      rgg::Rng rng(1'000'000 + s);
      const auto z = rgg::sample_rgn(target, batch, dim, rng);
      const auto proj = rgg::sample_sphere_projections(n_proj, dim, rng);
      const auto loss = rgg::rdmreg_loss(z, z, target, proj, 0.0, 1.0, rng.split());
      stats.push_back(loss.rdmreg_view1);
   }
   std::sort(stats.begin(), stats.end());
   auto quantile = [&](double q) {
      // linear interpolation between order statistics
      const double pos = q * static_cast<double>(stats.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, stats.size() - 1);
      return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
   };
   std::printf("seeds=%zu B=%zu D=%zu N=%zu p=%g mu=%g sigma=%g\n", seeds, batch, dim, n_proj, p, mu, sigma);
   std::printf("min=%.10g median=%.10g q99=%.10g max=%.10g\n", stats.front(), quantile(0.5), quantile(0.99),
               stats.back());
   return 0;
}
