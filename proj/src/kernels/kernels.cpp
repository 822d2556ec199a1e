//
// Copyright 2026 The mialab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "mialab/kernels/kernels.hpp"

#include <cmath>

namespace mialab::kernels {

namespace generic {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double l2_sq(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double l1(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

double linf(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace generic

namespace {

bool cpu_has_avx2() {
#if defined(MIALAB_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

ReduceFn pick_dot() {
#if defined(MIALAB_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2::dot;
#endif
  return generic::dot;
}

ReduceFn pick_l2_sq() {
#if defined(MIALAB_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2::l2_sq;
#endif
  return generic::l2_sq;
}

ReduceFn pick_l1() {
#if defined(MIALAB_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2::l1;
#endif
  return generic::l1;
}

ReduceFn pick_linf() {
#if defined(MIALAB_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2::linf;
#endif
  return generic::linf;
}

AxpyFn pick_axpy() {
#if defined(MIALAB_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2::axpy;
#endif
  return generic::axpy;
}

}  // namespace

ReduceFn dot = pick_dot();
ReduceFn l2_sq = pick_l2_sq();
ReduceFn l1 = pick_l1();
ReduceFn linf = pick_linf();
AxpyFn axpy = pick_axpy();

const char* active_backend() { return cpu_has_avx2() ? "avx2" : "generic"; }

}  // namespace mialab::kernels
