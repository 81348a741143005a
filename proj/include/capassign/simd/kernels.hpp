#pragma once

// Data-parallel inner loops of cost-matrix construction and of the
// assignment solver. Every kernel has a scalar reference and, on x86-64, an
// AVX2 variant selected at runtime. The variants perform the same floating
// point operations in the same order, so their outputs are bit-identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace capassign::simd {

enum class Level { Scalar, Avx2 };

std::string_view to_string(Level level);

/// True when the variant is compiled in and the CPU can run it.
bool supported(Level level);

/// Best supported level, unless overridden by CAPASSIGN_SIMD=scalar|avx2.
Level active_level();

/// Squared-distance based costs:
///   out[i*m + j] = ||a_i - b_j||^exponent
/// `a` is n x dim row-major; `b_soa` is dim x m (one row per component).
void pairwise_distance(Level level, std::span<const double> a, std::size_t n,
                       std::span<const double> b_soa, std::size_t m, std::size_t dim,
                       double exponent, std::span<double> out);

/// Rank-dim bilinear cost:
///   out[i*m + j] = (row_terms[i] + col_terms[j]) + 2 * sum_k x[i*dim+k] * w_soa[k*m+j]
void bilinear_cost(Level level, std::span<const double> x, std::span<const double> row_terms,
                   std::size_t n, std::span<const double> w_soa,
                   std::span<const double> col_terms, std::size_t m, std::size_t dim,
                   std::span<double> out);

struct RowScan {
  double delta;        // smallest slack among unused columns
  std::size_t column;  // first unused column attaining it (m if none)
};

/// One relaxation step of the shortest augmenting path search. For every
/// column j with used[j] == 0:
///   slack = (cost_row[j] - row_potential) - col_potential[j]
///   if slack < min_slack[j]: min_slack[j] = slack, predecessor[j] = from
/// then returns the minimum of min_slack over unused columns.
RowScan relax_row(Level level, std::span<const double> cost_row, double row_potential,
                  std::span<const double> col_potential,
                  std::span<const std::uint8_t> used, std::span<double> min_slack,
                  std::span<std::int32_t> predecessor, std::int32_t from);

namespace detail {

struct KernelTable {
  void (*pairwise_distance)(const double*, std::size_t, const double*, std::size_t,
                            std::size_t, double, double*);
  void (*bilinear_cost)(const double*, const double*, std::size_t, const double*,
                        const double*, std::size_t, std::size_t, double*);
  RowScan (*relax_row)(const double*, double, const double*, const std::uint8_t*,
                       double*, std::int32_t*, std::int32_t, std::size_t);
};

const KernelTable& scalar_kernels();
#if defined(CAPASSIGN_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

/// Applies the exponent to a squared distance; shared by every variant.
double distance_power(double squared, double exponent);

}  // namespace detail
}  // namespace capassign::simd
