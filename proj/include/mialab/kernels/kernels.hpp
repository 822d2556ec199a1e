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

#ifndef MIALAB_KERNELS_KERNELS_HPP
#define MIALAB_KERNELS_KERNELS_HPP

#include <cstddef>

// Dense double-precision kernels behind the distance scans and the
// linear-model training loops. Scalar reference implementations live in
// kernels::generic; AVX2 variants in kernels::avx2 (compiled only when the
// toolchain supports it). The exported function pointers are bound once at
// startup from runtime CPU detection, vsag-style. Tests call both
// namespaces directly and check equivalence.

namespace mialab::kernels {

using ReduceFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);

namespace generic {
double dot(const double* a, const double* b, std::size_t n);
double l2_sq(const double* a, const double* b, std::size_t n);
double l1(const double* a, const double* b, std::size_t n);
double linf(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace generic

#if defined(MIALAB_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double l2_sq(const double* a, const double* b, std::size_t n);
double l1(const double* a, const double* b, std::size_t n);
double linf(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

extern ReduceFn dot;
extern ReduceFn l2_sq;
extern ReduceFn l1;
extern ReduceFn linf;
extern AxpyFn axpy;

/// Name of the backend bound at startup: "avx2" or "generic".
const char* active_backend();

}  // namespace mialab::kernels

#endif  // MIALAB_KERNELS_KERNELS_HPP
