// vnet/common.h

// Copyright 2026  The vnet Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VNET_COMMON_H_
#define VNET_COMMON_H_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace vnet {

using StateId = int32_t;
using ArcId = int32_t;
using Label = int32_t;  // symbol id; 0 is <eps>

// Log-domain zero. A large negative sentinel instead of -inf so that
// saturating arithmetic never produces NaN.
constexpr double kLogZero = -1.0e30;
constexpr double kLogZeroThreshold = -1.0e29;

inline bool IsLogZero(double v) { return v <= kLogZeroThreshold; }

// Log-domain product: adds scores, saturating at kLogZero.
inline double LogMul(double a, double b) {
  if (IsLogZero(a) || IsLogZero(b)) return kLogZero;
  return a + b;
}

inline double LogMul(double a, double b, double c) {
  return LogMul(LogMul(a, b), c);
}

inline double LogMul(double a, double b, double c, double d) {
  return LogMul(LogMul(a, b), LogMul(c, d));
}

// Errors raised while reading text inputs (bad syntax, bad field counts).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string &msg) : std::runtime_error(msg) {}
};

// Errors raised by semantic validation of otherwise well-formed data.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

// An utterance admits no complete path through the graph.
class NoPathError : public std::runtime_error {
 public:
  explicit NoPathError(const std::string &msg) : std::runtime_error(msg) {}
};

// Broken internal invariant; callers are not expected to recover.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string &msg) : std::logic_error(msg) {}
};

#define VNET_ASSERT(cond)                                                  \
  do {                                                                     \
    if (!(cond))                                                           \
      throw ::vnet::InternalError(std::string("assertion failed: " #cond  \
                                              " at ") +                   \
                                  __FILE__ + ":" + std::to_string(__LINE__)); \
  } while (0)

// Row-major dense matrix of doubles.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double &operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  double *Row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double *Row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  bool SameShape(const Mat &o) const { return rows == o.rows && cols == o.cols; }
};

// Deterministic PRNG (splitmix64). Distribution helpers are hand-rolled so
// streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed = 1) : state_(seed) {}

  uint64_t Next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double Uniform() { return (Next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n).
  int UniformInt(int n) { return static_cast<int>(Next() % static_cast<uint64_t>(n)); }

  // Box-Muller.
  double Gaussian() {
    double u1 = Uniform();
    double u2 = Uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  uint64_t state_;
};

// Exact decimal form: %.17g round-trips doubles bit-exactly.
inline std::string FormatDouble(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ReadFileToString(const std::string &path);
void WriteStringToFile(const std::string &path, const std::string &content);

// Splits on spaces/tabs, skipping runs of separators.
std::vector<std::string> SplitFields(const std::string &line);

// strtod with full-token validation.
double ParseDoubleStrict(const std::string &tok, const std::string &context);
int64_t ParseIntStrict(const std::string &tok, const std::string &context);

}  // namespace vnet

#endif  // VNET_COMMON_H_
