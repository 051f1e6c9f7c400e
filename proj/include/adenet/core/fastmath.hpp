#ifndef ADENET_CORE_FASTMATH_HPP
#define ADENET_CORE_FASTMATH_HPP

#include <cmath>
#include <cstdint>
#include <cstring>

namespace adenet {

// Cephes-style expf, ~1 ulp, branch-light so the hot softmax/sigmoid loops
// vectorize. Double falls through to std::exp (test paths stay reference
// precision).
inline float fast_exp(float x) {
  constexpr float kLog2e = 1.44269504088896341f;
  constexpr float kC1 = 0.693359375f;
  constexpr float kC2 = -2.12194440e-4f;
  x = x > 88.3762626647950f ? 88.3762626647950f : x;
  x = x < -88.3762626647949f ? -88.3762626647949f : x;
  float z = std::floor(kLog2e * x + 0.5f);
  x -= z * kC1;
  x -= z * kC2;
  const int32_t n = int32_t(z);
  float y = 1.9875691500e-4f;
  y = y * x + 1.3981999507e-3f;
  y = y * x + 8.3334519073e-3f;
  y = y * x + 4.1665795894e-2f;
  y = y * x + 1.6666665459e-1f;
  y = y * x + 5.0000001201e-1f;
  y = y * x * x + x + 1.0f;
  int32_t bits;
  std::memcpy(&bits, &y, 4);
  bits += n << 23;
  std::memcpy(&y, &bits, 4);
  return y;
}

inline double fast_exp(double x) { return std::exp(x); }

// Reductions with eight fixed accumulator lanes: vectorizable without
// -ffast-math and bit-deterministic (lane order never depends on thread
// count or data).
template <class S>
double vsum(const S* p, int64_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) acc[l] += double(p[i + l]);
  double tail = 0;
  for (; i < n; ++i) tail += double(p[i]);
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

template <class S>
double vdot(const S* a, const S* b, int64_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) acc[l] += double(a[i + l]) * double(b[i + l]);
  double tail = 0;
  for (; i < n; ++i) tail += double(a[i]) * double(b[i]);
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

template <class S>
double vdot3(const S* a, const S* b, const S* c, int64_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l)
      acc[l] += double(a[i + l]) * double(b[i + l]) * double(c[i + l]);
  double tail = 0;
  for (; i < n; ++i) tail += double(a[i]) * double(b[i]) * double(c[i]);
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

// sum of (p - mean)^2
template <class S>
double vvar_sum(const S* p, int64_t n, double mean) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) {
      const double d = double(p[i + l]) - mean;
      acc[l] += d * d;
    }
  double tail = 0;
  for (; i < n; ++i) {
    const double d = double(p[i]) - mean;
    tail += d * d;
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

}  // namespace adenet

#endif  // ADENET_CORE_FASTMATH_HPP
