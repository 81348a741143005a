#include <cmath>
#include <limits>

#include "capassign/simd/kernels.hpp"

namespace capassign::simd::detail {
namespace {

void pairwise_distance_scalar(const double* a, std::size_t n, const double* b_soa,
                              std::size_t m, std::size_t dim, double exponent,
                              double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * dim;
    double* row = out + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = b_soa[k * m + j] - ai[k];
        acc = acc + diff * diff;
      }
      row[j] = distance_power(acc, exponent);
    }
  }
}

void bilinear_cost_scalar(const double* x, const double* row_terms, std::size_t n,
                          const double* w_soa, const double* col_terms, std::size_t m,
                          std::size_t dim, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * dim;
    double* row = out + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc = acc + xi[k] * w_soa[k * m + j];
      row[j] = (row_terms[i] + col_terms[j]) + 2.0 * acc;
    }
  }
}

RowScan relax_row_scalar(const double* cost_row, double row_potential,
                         const double* col_potential, const std::uint8_t* used,
                         double* min_slack, std::int32_t* predecessor, std::int32_t from,
                         std::size_t m) {
  RowScan best{std::numeric_limits<double>::infinity(), m};
  for (std::size_t j = 0; j < m; ++j) {
    if (used[j]) continue;
    const double slack = (cost_row[j] - row_potential) - col_potential[j];
    if (slack < min_slack[j]) {
      min_slack[j] = slack;
      predecessor[j] = from;
    }
    if (min_slack[j] < best.delta) {
      best.delta = min_slack[j];
      best.column = j;
    }
  }
  return best;
}

}  // namespace

double distance_power(double squared, double exponent) {
  if (exponent == 2.0) return squared;
  const double dist = std::sqrt(squared);
  if (exponent == 1.0) return dist;
  return std::pow(dist, exponent);
}

const KernelTable& scalar_kernels() {
  static const KernelTable table{pairwise_distance_scalar, bilinear_cost_scalar,
                                 relax_row_scalar};
  return table;
}

}  // namespace capassign::simd::detail
