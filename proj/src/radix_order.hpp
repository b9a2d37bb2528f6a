#ifndef RGG_SRC_RADIX_ORDER_HPP
#define RGG_SRC_RADIX_ORDER_HPP

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace rgg::detail {

// Maps floats to unsigned keys with the same order. -0.0 and +0.0 share a
// key, as they compare equal.
inline std::uint32_t order_key(float v)
{
   const std::uint32_t bits = std::bit_cast<std::uint32_t>(v + 0.0f);
   return (bits >> 31) != 0 ? ~bits : (bits | 0x80000000U);
}

// Stable ascending permutation of a column of doubles, the one
// std::stable_sort with operator< would give. Two LSD radix passes over the
// top 16 bits of the float-rounded value (sign, exponent and 7 mantissa
// bits) leave every element within one bucket of its place, with ties in
// index order; rounding is monotone, so this never inverts distinct buckets.
// An insertion pass with exact double comparisons then finishes the job.
// Equal doubles are never swapped, so stability carries through. Scratch
// buffers are reused between calls.
class RadixOrder {
public:
   void sort(const double* v, std::size_t n)
   {
      keys_.resize(n);
      spare_keys_.resize(n);
      order_.resize(n);
      spare_order_.resize(n);
      std::array<std::array<std::uint32_t, 256>, 2> counts{};
      for (std::size_t i = 0; i < n; ++i) {
         const std::uint32_t k = order_key(static_cast<float>(v[i]));
         keys_[i] = k;
         order_[i] = static_cast<std::uint32_t>(i);
         for (unsigned pass = 0; pass < 2; ++pass) {
            ++counts[pass][(k >> (16 + 8 * pass)) & 0xFF];
         }
      }
      for (unsigned pass = 0; pass < 2 && n > 0; ++pass) {
         auto& c = counts[pass];
         const unsigned shift = 16 + 8 * pass;
         if (c[(keys_[0] >> shift) & 0xFF] == n) {
            continue; // every key has the same digit
         }
         std::uint32_t offset = 0;
         for (auto& slot : c) {
            const std::uint32_t here = slot;
            slot = offset;
            offset += here;
         }
         for (std::size_t i = 0; i < n; ++i) {
            const std::uint32_t dst = c[(keys_[i] >> shift) & 0xFF]++;
            spare_keys_[dst] = keys_[i];
            spare_order_[dst] = order_[i];
         }
         keys_.swap(spare_keys_);
         order_.swap(spare_order_);
      }
      for (std::size_t i = 1; i < n; ++i) {
         const std::uint32_t cur = order_[i];
         std::size_t j = i;
         while (j > 0 && v[order_[j - 1]] > v[cur]) {
            order_[j] = order_[j - 1];
            --j;
         }
         order_[j] = cur;
      }
   }

   const std::vector<std::uint32_t>& order() const { return order_; }

private:
   std::vector<std::uint32_t> keys_;
   std::vector<std::uint32_t> spare_keys_;
   std::vector<std::uint32_t> order_;
   std::vector<std::uint32_t> spare_order_;
};

} // namespace rgg::detail

#endif
