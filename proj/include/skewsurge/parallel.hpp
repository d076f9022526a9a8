#pragma once

// Reduction kernels shared by the likelihood and annual-maximum code.
//
// Every hot loop in the library has two forms: a plain left-to-right serial
// reference, and an OpenMP form. The OpenMP form splits the index range into
// fixed-size chunks, reduces each chunk serially, and combines the chunk
// partials in index order. The chunking does not depend on the thread count,
// so the parallel result is bit-identical across runs and machines.

#include <algorithm>
#include <cstddef>
#include <vector>

#include <omp.h>

namespace skewsurge {

enum class Exec { serial, parallel };

inline constexpr std::size_t kReductionChunk = 2048;

template <class Term>
double serial_sum(std::size_t n, Term&& term) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += term(i);
  return acc;
}

template <class Term>
double chunked_sum(std::size_t n, Term&& term) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(chunks, 0.0);
  const auto nchunks = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < nchunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t hi = std::min(n, lo + kReductionChunk);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <class Term>
double reduce_sum(Exec exec, std::size_t n, Term&& term) {
  return exec == Exec::serial ? serial_sum(n, term) : chunked_sum(n, term);
}

// Vector-valued variant: term(i, acc) adds into acc (length dim). Partials are
// combined in chunk order, like chunked_sum.
template <class Term>
void reduce_vector(Exec exec, std::size_t n, std::size_t dim, std::vector<double>& out,
                   Term&& term) {
  out.assign(dim, 0.0);
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) term(i, out.data());
    return;
  }
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(chunks * dim, 0.0);
  const auto nchunks = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < nchunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t hi = std::min(n, lo + kReductionChunk);
    double* acc = partial.data() + static_cast<std::size_t>(c) * dim;
    for (std::size_t i = lo; i < hi; ++i) term(i, acc);
  }
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t k = 0; k < dim; ++k) out[k] += partial[c * dim + k];
}

// Element-wise map with results written by index; order independent.
template <class Fn>
void parallel_for(Exec exec, std::size_t n, Fn&& fn) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto nn = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < nn; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace skewsurge
