#include "dcpl/gridfft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace dcpl {

GridSpec make_grid(std::uint64_t R, int sigma) {
  if (R < 256 || (R & (R - 1)) != 0)
    throw std::invalid_argument("make_grid: R must be a power of two >= 256");
  if (sigma < 4 || (sigma & (sigma - 1)) != 0)
    throw std::invalid_argument("make_grid: sigma must be a power of two >= 4");
  GridSpec g;
  g.R = R;
  g.sigma = sigma;
  g.M = static_cast<std::int64_t>(R) * sigma;
  return g;
}

namespace {

class PlanCache {
 public:
  fftw_plan get2d(std::int64_t rows, std::int64_t cols, int sign) {
    std::lock_guard<std::mutex> lk(mu_);
    auto key = std::make_tuple(rows, cols, sign, 2);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    auto* buf = fftw_alloc_complex(static_cast<size_t>(rows) * cols);
    if (!buf) throw std::runtime_error("fftw_alloc_complex failed");
    fftw_plan p = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                                   sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("fftw_plan_dft_2d failed");
    plans_[key] = p;
    return p;
  }

  fftw_plan get1d(std::int64_t n, int sign) {
    std::lock_guard<std::mutex> lk(mu_);
    auto key = std::make_tuple(n, std::int64_t(0), sign, 1);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    auto* buf = fftw_alloc_complex(static_cast<size_t>(n));
    if (!buf) throw std::runtime_error("fftw_alloc_complex failed");
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("fftw_plan_dft_1d failed");
    plans_[key] = p;
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<std::int64_t, std::int64_t, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft2_inplace(CArray& a, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("fft2_inplace: sign must be +-1");
  fftw_plan p = cache().get2d(a.rows(), a.cols(), sign == -1 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* d = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(p, d, d);
}

CArray fft2(const CArray& a, int sign) {
  CArray out = a;
  fft2_inplace(out, sign);
  return out;
}

void fft_line_inplace(std::complex<double>* data, std::int64_t n, int sign) {
  fftw_plan p = cache().get1d(n, sign == -1 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, d, d);
}

}  // namespace dcpl
