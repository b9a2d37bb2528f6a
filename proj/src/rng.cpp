#include "rgg/rng.hpp"

#include "rgg/errors.hpp"

#include <cmath>
#include <limits>

namespace rgg {

double Rng::uniform()
{
   // 53 random mantissa bits, offset by half a step to stay off 0 and 1
   return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal()
{
   if (has_spare_) {
      has_spare_ = false;
      return spare_normal_;
   }
   double u = 0.0;
   double v = 0.0;
   double s = 0.0;
   do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
   } while (s >= 1.0 || s == 0.0);
   const double factor = std::sqrt(-2.0 * std::log(s) / s);
   spare_normal_ = v * factor;
   has_spare_ = true;
   return u * factor;
}

double Rng::gamma(double shape)
{
   if (!(shape > 0.0) || !std::isfinite(shape)) {
      throw DomainError("gamma variate: shape must be positive");
   }
   if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::exp(std::log(uniform()) / shape);
   }
   const double d = shape - 1.0 / 3.0;
   const double c = 1.0 / std::sqrt(9.0 * d);
   while (true) {
      double x = 0.0;
      double v = 0.0;
      do {
         x = normal();
         v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) {
         return d * v;
      }
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
         return d * v;
      }
   }
}

double Rng::sign()
{
   return (engine_() >> 63) != 0 ? 1.0 : -1.0;
}

std::uint64_t Rng::below(std::uint64_t n)
{
   // rejection keeps the draw exactly uniform
   const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
      - std::numeric_limits<std::uint64_t>::max() % n;
   std::uint64_t r = 0;
   do {
      r = engine_();
   } while (r >= limit);
   return r % n;
}

} // namespace rgg
