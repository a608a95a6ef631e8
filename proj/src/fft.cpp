#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace vortex::detail {
namespace {

// The FFTW planner is not reentrant; execution of a finished plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan {
 public:
  template <class MakePlan>
  explicit Plan(MakePlan&& make) {
    std::lock_guard lock(planner_mutex());
    plan_ = make();
    if (!plan_) throw std::runtime_error("FFTW failed to create a plan");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

fftw_complex* as_fftw(cvec& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

int sign_of(FftDirection dir) { return dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD; }

void check_size(const cvec& data, int nx, int ny) {
  if (nx <= 0 || ny <= 0 || data.size() != static_cast<std::size_t>(nx) * ny)
    throw std::invalid_argument("fft: buffer does not match the grid shape");
}

}  // namespace

void fft_2d(cvec& data, int nx, int ny, FftDirection dir) {
  check_size(data, nx, ny);
  auto* p = as_fftw(data);
  Plan plan([&] { return fftw_plan_dft_2d(ny, nx, p, p, sign_of(dir), FFTW_ESTIMATE); });
  plan.execute();
}

void fft_rows(cvec& data, int nx, int ny, FftDirection dir) {
  check_size(data, nx, ny);
  auto* p = as_fftw(data);
  int n[] = {nx};
  Plan plan([&] {
    return fftw_plan_many_dft(1, n, ny, p, nullptr, 1, nx, p, nullptr, 1, nx, sign_of(dir),
                              FFTW_ESTIMATE);
  });
  plan.execute();
}

void fft_columns(cvec& data, int nx, int ny, FftDirection dir) {
  check_size(data, nx, ny);
  auto* p = as_fftw(data);
  int n[] = {ny};
  Plan plan([&] {
    return fftw_plan_many_dft(1, n, nx, p, nullptr, nx, 1, p, nullptr, nx, 1, sign_of(dir),
                              FFTW_ESTIMATE);
  });
  plan.execute();
}

void fft_1d(cvec& data, FftDirection dir) {
  const int n = static_cast<int>(data.size());
  check_size(data, n, 1);
  auto* p = as_fftw(data);
  Plan plan([&] { return fftw_plan_dft_1d(n, p, p, sign_of(dir), FFTW_ESTIMATE); });
  plan.execute();
}

}  // namespace vortex::detail
