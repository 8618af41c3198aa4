#include "cvpc/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cvpc/error.hpp"

namespace cvpc {

namespace {

bool index_less(std::span<const unsigned> a, std::span<const unsigned> b) {
  const auto da = std::accumulate(a.begin(), a.end(), 0U);
  const auto db = std::accumulate(b.begin(), b.end(), 0U);
  if (da != db) return da < db;
  // Same total degree: larger leading entries come first.
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

void enumerate(std::size_t dim, std::size_t n_zeta, unsigned degree, ExpansionScheme scheme,
               unsigned used, std::vector<unsigned>& current, std::vector<unsigned>& out) {
  if (dim == n_zeta) {
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  const unsigned limit = scheme == ExpansionScheme::TotalOrder ? degree - used : degree;
  for (unsigned m = 0; m <= limit; ++m) {
    current[dim] = m;
    enumerate(dim + 1, n_zeta, degree, scheme, used + m, current, out);
  }
  current[dim] = 0;
}

}  // namespace

std::string_view to_string(ExpansionScheme scheme) {
  return scheme == ExpansionScheme::TotalOrder ? "total_order" : "tensor_product";
}

ExpansionScheme parse_scheme(std::string_view text) {
  if (text == "total_order") return ExpansionScheme::TotalOrder;
  if (text == "tensor_product") return ExpansionScheme::TensorProduct;
  throw std::invalid_argument("unknown expansion scheme '" + std::string(text) + "'");
}

double hermite(unsigned n, double z) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = z;
  for (unsigned k = 1; k < n; ++k) {
    const double next = (z * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_triple(unsigned a, unsigned b, unsigned c) {
  const unsigned sum = a + b + c;
  if (sum % 2 != 0) return 0.0;
  const unsigned s = sum / 2;
  if (s < a || s < b || s < c) return 0.0;
  auto lf = [](unsigned n) { return std::lgamma(static_cast<double>(n) + 1.0); };
  const double log_value =
      0.5 * (lf(a) + lf(b) + lf(c)) - lf(s - a) - lf(s - b) - lf(s - c);
  return std::exp(log_value);
}

std::size_t term_count(std::size_t n_zeta, unsigned degree, ExpansionScheme scheme) {
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  if (scheme == ExpansionScheme::TensorProduct) {
    std::size_t m = 1;
    for (std::size_t d = 0; d < n_zeta; ++d) {
      if (m > kMax / (degree + 1)) return kMax;
      m *= degree + 1;
    }
    return m;
  }
  // C(p + n, n) built up as a running product; each partial result is itself a binomial.
  std::size_t m = 1;
  for (std::size_t k = 1; k <= n_zeta; ++k) {
    const std::size_t factor = degree + k;
    if (m > kMax / factor) return kMax;
    m = m * factor / k;
  }
  return m;
}

MultiIndexBasis MultiIndexBasis::build(std::size_t n_zeta, unsigned degree, ExpansionScheme scheme,
                                       std::size_t max_terms) {
  if (n_zeta == 0) throw std::invalid_argument("basis dimension must be at least 1");
  const std::size_t m = term_count(n_zeta, degree, scheme);
  if (m > max_terms) {
    throw std::length_error("basis with " + std::to_string(m) + " terms exceeds the cap of " +
                            std::to_string(max_terms));
  }

  MultiIndexBasis basis;
  basis.n_zeta_ = n_zeta;
  basis.degree_ = degree;
  basis.scheme_ = scheme;
  basis.size_ = m;

  std::vector<unsigned> raw;
  raw.reserve(m * n_zeta);
  std::vector<unsigned> current(n_zeta, 0);
  enumerate(0, n_zeta, degree, scheme, 0, current, raw);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t i) { return std::span<const unsigned>(raw.data() + i * n_zeta, n_zeta); };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return index_less(row(a), row(b)); });

  basis.entries_.resize(m * n_zeta);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(raw.data() + order[i] * n_zeta, n_zeta, basis.entries_.data() + i * n_zeta);
  }
  return basis;
}

unsigned MultiIndexBasis::total_degree(std::size_t i) const {
  const auto idx = index(i);
  return std::accumulate(idx.begin(), idx.end(), 0U);
}

std::optional<std::size_t> MultiIndexBasis::find(std::span<const unsigned> multi_index) const {
  if (multi_index.size() != n_zeta_) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = size_;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (index_less(index(mid), multi_index)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size_ && std::ranges::equal(index(lo), multi_index)) return lo;
  return std::nullopt;
}

std::optional<std::size_t> MultiIndexBasis::linear_term(std::size_t d) const {
  if (d >= n_zeta_) return std::nullopt;
  std::vector<unsigned> unit(n_zeta_, 0);
  unit[d] = 1;
  return find(unit);
}

void MultiIndexBasis::evaluate(std::span<const double> zeta, std::span<double> out) const {
  if (zeta.size() != n_zeta_) {
    throw DimensionMismatch("basis expects " + std::to_string(n_zeta_) + " inputs, got " +
                            std::to_string(zeta.size()));
  }
  if (out.size() != size_) throw DimensionMismatch("output span does not match basis size");

  // Univariate tables per dimension, then products.
  const std::size_t stride = degree_ + 1;
  std::vector<double> table(n_zeta_ * stride);
  for (std::size_t d = 0; d < n_zeta_; ++d) {
    double* h = table.data() + d * stride;
    h[0] = 1.0;
    if (degree_ >= 1) h[1] = zeta[d];
    for (unsigned k = 1; k < degree_; ++k) {
      h[k + 1] = (zeta[d] * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
    }
  }
  for (std::size_t i = 0; i < size_; ++i) {
    const auto idx = index(i);
    double value = 1.0;
    for (std::size_t d = 0; d < n_zeta_; ++d) value *= table[d * stride + idx[d]];
    out[i] = value;
  }
}

std::vector<double> MultiIndexBasis::evaluate(std::span<const double> zeta) const {
  std::vector<double> out(size_);
  evaluate(zeta, out);
  return out;
}

std::uint64_t InnerProductTensors::key(std::size_t i, std::size_t j, std::size_t k) const {
  std::size_t s[3] = {i, j, k};
  std::sort(s, s + 3);
  const auto m = static_cast<std::uint64_t>(size_);
  return (s[0] * m + s[1]) * m + s[2];
}

InnerProductTensors InnerProductTensors::build(const MultiIndexBasis& basis) {
  InnerProductTensors t;
  const std::size_t m = basis.size();
  const std::size_t n = basis.n_zeta();
  const unsigned p = basis.degree();
  t.size_ = m;
  t.norms_.assign(m, 1.0);

  const std::size_t s = p + 1;
  std::vector<double> uni(s * s * s);
  for (unsigned a = 0; a <= p; ++a)
    for (unsigned b = 0; b <= p; ++b)
      for (unsigned c = 0; c <= p; ++c) uni[(a * s + b) * s + c] = hermite_triple(a, b, c);

  std::vector<unsigned> degrees(m);
  for (std::size_t i = 0; i < m; ++i) degrees[i] = basis.total_degree(i);

  t.row_offsets_.assign(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = basis.index(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = basis.index(j);
      for (std::size_t l = 0; l < m; ++l) {
        const unsigned di = degrees[i], dj = degrees[j], dl = degrees[l];
        if ((di + dj + dl) % 2 != 0 || dl > di + dj || di > dj + dl || dj > di + dl) continue;
        const auto ll = basis.index(l);
        double value = 1.0;
        for (std::size_t d = 0; d < n && value != 0.0; ++d) value *= uni[(ii[d] * s + jj[d]) * s + ll[d]];
        if (value == 0.0) continue;
        t.row_entries_.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(l), value});
        if (i <= j && j <= l) t.triples_.emplace(t.key(i, j, l), value);
      }
    }
    t.row_offsets_[i + 1] = t.row_entries_.size();
  }

  t.linear_offsets_.assign(n, std::vector<std::size_t>(m + 1, 0));
  t.linear_entries_.assign(n, {});
  std::vector<unsigned> probe(n);
  for (std::size_t d = 0; d < n; ++d) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = basis.index(i);
      std::copy(ii.begin(), ii.end(), probe.begin());
      // <zeta_d h_a h_b> is nonzero only for b = a +/- 1, with value sqrt(max(a, b)).
      for (int delta : {-1, +1}) {
        if (delta < 0 && ii[d] == 0) continue;
        probe[d] = ii[d] + delta;
        if (auto j = basis.find(probe)) {
          const double value = std::sqrt(static_cast<double>(std::max(ii[d], probe[d])));
          t.linear_entries_[d].push_back({static_cast<std::uint32_t>(*j), value});
        }
      }
      t.linear_offsets_[d][i + 1] = t.linear_entries_[d].size();
    }
  }
  return t;
}

double InnerProductTensors::triple(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= size_ || j >= size_ || k >= size_) throw std::out_of_range("triple index out of range");
  const auto it = triples_.find(key(i, j, k));
  return it == triples_.end() ? 0.0 : it->second;
}

}  // namespace cvpc
