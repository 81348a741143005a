// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
#include <immintrin.h>

#include <cstring>
#include <limits>

#include "capassign/simd/kernels.hpp"

namespace capassign::simd::detail {
namespace {

constexpr std::size_t kLanes = 4;

// Lane mask (all ones) for columns whose `used` byte is zero.
inline __m256d unused_mask(const std::uint8_t* used) {
  std::int32_t bytes;
  std::memcpy(&bytes, used, sizeof(bytes));
  const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(bytes));
  return _mm256_castsi256_pd(_mm256_cmpeq_epi64(wide, _mm256_setzero_si256()));
}

void pairwise_distance_avx2(const double* a, std::size_t n, const double* b_soa,
                            std::size_t m, std::size_t dim, double exponent, double* out) {
  const std::size_t vec_end = m - m % kLanes;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * dim;
    double* row = out + i * m;
    std::size_t j = 0;
    for (; j < vec_end; j += kLanes) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < dim; ++k) {
        const __m256d diff =
            _mm256_sub_pd(_mm256_loadu_pd(b_soa + k * m + j), _mm256_set1_pd(ai[k]));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
      }
      if (exponent == 2.0) {
        _mm256_storeu_pd(row + j, acc);
      } else if (exponent == 1.0) {
        _mm256_storeu_pd(row + j, _mm256_sqrt_pd(acc));
      } else {
        alignas(32) double sq[kLanes];
        _mm256_store_pd(sq, acc);
        for (std::size_t l = 0; l < kLanes; ++l) row[j + l] = distance_power(sq[l], exponent);
      }
    }
    for (; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = b_soa[k * m + j] - ai[k];
        acc = acc + diff * diff;
      }
      row[j] = distance_power(acc, exponent);
    }
  }
}

void bilinear_cost_avx2(const double* x, const double* row_terms, std::size_t n,
                        const double* w_soa, const double* col_terms, std::size_t m,
                        std::size_t dim, double* out) {
  const std::size_t vec_end = m - m % kLanes;
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * dim;
    double* row = out + i * m;
    const __m256d base = _mm256_set1_pd(row_terms[i]);
    std::size_t j = 0;
    for (; j < vec_end; j += kLanes) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < dim; ++k) {
        acc = _mm256_add_pd(
            acc, _mm256_mul_pd(_mm256_set1_pd(xi[k]), _mm256_loadu_pd(w_soa + k * m + j)));
      }
      const __m256d sum = _mm256_add_pd(base, _mm256_loadu_pd(col_terms + j));
      _mm256_storeu_pd(row + j, _mm256_add_pd(sum, _mm256_mul_pd(two, acc)));
    }
    for (; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc = acc + xi[k] * w_soa[k * m + j];
      row[j] = (row_terms[i] + col_terms[j]) + 2.0 * acc;
    }
  }
}

RowScan relax_row_avx2(const double* cost_row, double row_potential,
                       const double* col_potential, const std::uint8_t* used,
                       double* min_slack, std::int32_t* predecessor, std::int32_t from,
                       std::size_t m) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t vec_end = m - m % kLanes;
  const __m256d u = _mm256_set1_pd(row_potential);
  const __m256d vinf = _mm256_set1_pd(inf);
  __m256d vmin = vinf;
  std::size_t j = 0;
  for (; j < vec_end; j += kLanes) {
    const __m256d open = unused_mask(used + j);
    const __m256d slack = _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(cost_row + j), u),
                                        _mm256_loadu_pd(col_potential + j));
    __m256d current = _mm256_loadu_pd(min_slack + j);
    const __m256d better = _mm256_and_pd(_mm256_cmp_pd(slack, current, _CMP_LT_OQ), open);
    int bits = _mm256_movemask_pd(better);
    if (bits != 0) {
      current = _mm256_blendv_pd(current, slack, better);
      _mm256_storeu_pd(min_slack + j, current);
      while (bits != 0) {
        const int lane = __builtin_ctz(static_cast<unsigned>(bits));
        predecessor[j + lane] = from;
        bits &= bits - 1;
      }
    }
    vmin = _mm256_min_pd(vmin, _mm256_blendv_pd(vinf, current, open));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, vmin);
  double delta = inf;
  for (double v : lanes) delta = v < delta ? v : delta;

  for (; j < m; ++j) {
    if (used[j]) continue;
    const double slack = (cost_row[j] - row_potential) - col_potential[j];
    if (slack < min_slack[j]) {
      min_slack[j] = slack;
      predecessor[j] = from;
    }
    if (min_slack[j] < delta) delta = min_slack[j];
  }

  RowScan best{delta, m};
  if (delta < inf) {
    for (std::size_t c = 0; c < m; ++c) {
      if (!used[c] && min_slack[c] == delta) {
        best.column = c;
        break;
      }
    }
  }
  return best;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{pairwise_distance_avx2, bilinear_cost_avx2,
                                 relax_row_avx2};
  return table;
}

}  // namespace capassign::simd::detail
