#ifndef RGG_RNG_HPP
#define RGG_RNG_HPP

#include <cstdint>
#include <random>

namespace rgg {

/**
 * Seeded random stream.
 *
 * Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
 * derives uniforms, normals and gamma variates with in-house transforms so a
 * seed reproduces the same draws on every standard library.
 */
class Rng {
public:
   explicit Rng(std::uint64_t seed) : engine_(seed) {}

   /// Uniform on the open interval (0, 1).
   double uniform();

   /// Standard normal (Marsaglia polar method).
   double normal();

   /// Gamma(shape, rate = 1) via Marsaglia-Tsang; shape < 1 uses the
   /// U^{1/shape} boost from Gamma(shape + 1).
   double gamma(double shape);

   /// +1 or -1 with equal probability.
   double sign();

   /// Uniform integer in [0, n).
   std::uint64_t below(std::uint64_t n);

   /// Seed for an independent child stream.
   std::uint64_t split() { return engine_(); }

private:
   std::mt19937_64 engine_;
   double spare_normal_ = 0.0;
   bool has_spare_ = false;
};

} // namespace rgg

#endif
