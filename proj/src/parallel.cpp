#include "rgg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace rgg {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned n)
{
   g_threads.store(std::max(1u, n));
}

unsigned thread_count()
{
   return g_threads.load();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body)
{
   const std::size_t workers = std::min<std::size_t>(thread_count(), n);
   if (workers <= 1) {
      if (n > 0) {
         body(0, n);
      }
      return;
   }

   std::vector<std::thread> pool;
   std::vector<std::exception_ptr> errors(workers);
   const std::size_t chunk = (n + workers - 1) / workers;
   for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) {
         break;
      }
      pool.emplace_back([&, w, begin, end] {
         try {
            body(begin, end);
         } catch (...) {
            errors[w] = std::current_exception();
         }
      });
   }
   for (auto& t : pool) {
      t.join();
   }
   for (auto& e : errors) {
      if (e) {
         std::rethrow_exception(e);
      }
   }
}

} // namespace rgg
