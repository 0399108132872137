#include "fft_detail.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace fbmbt::detail {

namespace {

std::mutex g_planner_mutex;

fftw_plan plan_for(std::size_t n, bool inverse) {
  // Plans are created once per (n, direction) with FFTW_UNALIGNED so they can
  // execute on any caller buffer, and cached for the process lifetime.
  static std::map<std::pair<std::size_t, bool>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_planner_mutex);
  auto it = cache.find({n, inverse});
  if (it != cache.end()) return it->second;

  fftw_complex* scratch = fftw_alloc_complex(n);
  if (scratch == nullptr) throw std::bad_alloc();
  fftw_plan plan =
      fftw_plan_dft_1d(int(n), scratch, scratch,
                       inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  if (plan == nullptr) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(std::make_pair(n, inverse), plan);
  return plan;
}

}  // namespace

void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
  if (data.empty()) return;
  fftw_plan plan = plan_for(data.size(), inverse);
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, raw, raw);
}

}  // namespace fbmbt::detail
