#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cvpc {

enum class ExpansionScheme { TotalOrder, TensorProduct };

std::string_view to_string(ExpansionScheme scheme);
ExpansionScheme parse_scheme(std::string_view text);

/// Orthonormal probabilists' Hermite polynomial He_n(z) / sqrt(n!).
double hermite(unsigned n, double z);

/// E[h_a h_b h_c] under the standard normal measure for the orthonormal h.
/// Zero unless a+b+c is even and each index is at most the sum of the other two.
double hermite_triple(unsigned a, unsigned b, unsigned c);

/// Number of multi-indices (including the constant term).
std::size_t term_count(std::size_t n_zeta, unsigned degree, ExpansionScheme scheme);

/// Multivariate orthonormal Hermite basis over n_zeta independent standard normals.
///
/// Multi-indices are ordered by ascending total degree; within one total degree,
/// lexicographically with larger leading entries first, so that for two dimensions
/// the order is 1, z1, z2, z1^2-1, z1 z2, z2^2-1.
class MultiIndexBasis {
 public:
  static constexpr std::size_t kDefaultMaxTerms = 1'000'000;

  static MultiIndexBasis build(std::size_t n_zeta, unsigned degree, ExpansionScheme scheme,
                               std::size_t max_terms = kDefaultMaxTerms);

  std::size_t n_zeta() const noexcept { return n_zeta_; }
  unsigned degree() const noexcept { return degree_; }
  ExpansionScheme scheme() const noexcept { return scheme_; }
  std::size_t size() const noexcept { return size_; }

  std::span<const unsigned> index(std::size_t i) const {
    return {entries_.data() + i * n_zeta_, n_zeta_};
  }
  unsigned total_degree(std::size_t i) const;

  std::optional<std::size_t> find(std::span<const unsigned> multi_index) const;
  /// Position of the degree-one term in dimension d (Phi = zeta_d), if present.
  std::optional<std::size_t> linear_term(std::size_t d) const;

  void evaluate(std::span<const double> zeta, std::span<double> out) const;
  std::vector<double> evaluate(std::span<const double> zeta) const;

 private:
  MultiIndexBasis() = default;

  std::size_t n_zeta_ = 0;
  unsigned degree_ = 0;
  ExpansionScheme scheme_ = ExpansionScheme::TotalOrder;
  std::size_t size_ = 0;
  std::vector<unsigned> entries_;  // size_ x n_zeta_, row-major
};

struct ContractionEntry {
  std::uint32_t j;
  std::uint32_t l;
  double value;
};

struct PairEntry {
  std::uint32_t j;
  double value;
};

/// Inner products <Phi_i Phi_j Phi_k> and <zeta_d Phi_i Phi_j> of a basis.
///
/// Triples are stored once per sorted key (i <= j <= k); for the Galerkin
/// contraction each row i also lists every ordered pair (j, l) with a nonzero value.
class InnerProductTensors {
 public:
  static InnerProductTensors build(const MultiIndexBasis& basis);

  std::size_t size() const noexcept { return size_; }
  std::span<const double> norms() const noexcept { return norms_; }

  double triple(std::size_t i, std::size_t j, std::size_t k) const;
  std::size_t unique_triples() const noexcept { return triples_.size(); }

  std::span<const ContractionEntry> row(std::size_t i) const {
    return {row_entries_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::size_t contraction_nonzeros() const noexcept { return row_entries_.size(); }

  /// Nonzeros of <zeta_d Phi_i Phi_j> for fixed d and i.
  std::span<const PairEntry> linear_row(std::size_t d, std::size_t i) const {
    const auto& offs = linear_offsets_[d];
    return {linear_entries_[d].data() + offs[i], offs[i + 1] - offs[i]};
  }

 private:
  std::uint64_t key(std::size_t i, std::size_t j, std::size_t k) const;

  std::size_t size_ = 0;
  std::vector<double> norms_;
  std::unordered_map<std::uint64_t, double> triples_;
  std::vector<std::size_t> row_offsets_;
  std::vector<ContractionEntry> row_entries_;
  std::vector<std::vector<std::size_t>> linear_offsets_;
  std::vector<std::vector<PairEntry>> linear_entries_;
};

}  // namespace cvpc
