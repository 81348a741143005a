#include <cstdlib>
#include <string>

#include "capassign/error.hpp"
#include "capassign/simd/kernels.hpp"

namespace capassign::simd {
namespace {

const detail::KernelTable& table_for(Level level) {
  switch (level) {
    case Level::Scalar:
      return detail::scalar_kernels();
    case Level::Avx2:
#if defined(CAPASSIGN_HAVE_AVX2)
      if (supported(Level::Avx2)) return detail::avx2_kernels();
#endif
      break;
  }
  throw Error(ErrorCode::InvalidParameter,
              "SIMD level '" + std::string(to_string(level)) + "' is not available");
}

Level detect_level() {
  if (const char* env = std::getenv("CAPASSIGN_SIMD")) {
    const std::string value(env);
    if (value == "scalar") return Level::Scalar;
    if (value == "avx2" && supported(Level::Avx2)) return Level::Avx2;
  }
  return supported(Level::Avx2) ? Level::Avx2 : Level::Scalar;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Scalar: return "scalar";
    case Level::Avx2: return "avx2";
  }
  return "unknown";
}

bool supported(Level level) {
  switch (level) {
    case Level::Scalar:
      return true;
    case Level::Avx2:
#if defined(CAPASSIGN_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Level active_level() {
  static const Level level = detect_level();
  return level;
}

void pairwise_distance(Level level, std::span<const double> a, std::size_t n,
                       std::span<const double> b_soa, std::size_t m, std::size_t dim,
                       double exponent, std::span<double> out) {
  require(a.size() >= n * dim && b_soa.size() >= m * dim && out.size() >= n * m,
          "pairwise_distance buffers too small");
  table_for(level).pairwise_distance(a.data(), n, b_soa.data(), m, dim, exponent,
                                     out.data());
}

void bilinear_cost(Level level, std::span<const double> x, std::span<const double> row_terms,
                   std::size_t n, std::span<const double> w_soa,
                   std::span<const double> col_terms, std::size_t m, std::size_t dim,
                   std::span<double> out) {
  require(x.size() >= n * dim && row_terms.size() >= n && w_soa.size() >= m * dim &&
              col_terms.size() >= m && out.size() >= n * m,
          "bilinear_cost buffers too small");
  table_for(level).bilinear_cost(x.data(), row_terms.data(), n, w_soa.data(),
                                 col_terms.data(), m, dim, out.data());
}

RowScan relax_row(Level level, std::span<const double> cost_row, double row_potential,
                  std::span<const double> col_potential,
                  std::span<const std::uint8_t> used, std::span<double> min_slack,
                  std::span<std::int32_t> predecessor, std::int32_t from) {
  const std::size_t m = cost_row.size();
  require(col_potential.size() >= m && used.size() >= m && min_slack.size() >= m &&
              predecessor.size() >= m,
          "relax_row buffers too small");
  return table_for(level).relax_row(cost_row.data(), row_potential, col_potential.data(),
                                    used.data(), min_slack.data(), predecessor.data(), from,
                                    m);
}

}  // namespace capassign::simd
