#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace tc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

// Thrown when a certified construction fails its own certificate.
// `witness` carries the offending sample location.
class construction_error : public std::runtime_error {
public:
  construction_error(const std::string& what, double witness)
      : std::runtime_error(what), witness_(witness) {}
  double witness() const { return witness_; }

private:
  double witness_ = std::numeric_limits<double>::quiet_NaN();
};

// Thrown when an input violates a documented precondition. `clause`
// names the condition that failed.
class validation_error : public std::runtime_error {
public:
  validation_error(const std::string& clause, const std::string& detail)
      : std::runtime_error(clause + ": " + detail), clause_(clause) {}
  const std::string& clause() const { return clause_; }

private:
  std::string clause_;
};

inline double sq(double x) { return x * x; }
inline double cube(double x) { return x * x * x; }

// Worker count: TWOCONVEX_THREADS caps it, default = hardware concurrency.
std::size_t worker_count();

// Deterministic parallel map-reduce over [0, n): chunks are processed by
// workers but merged in index order, so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn);

// Small deterministic RNG (splitmix64) for tests and sampling; avoids
// platform variation in std distributions.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0,1)
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::uint64_t state_;
};

}  // namespace tc
