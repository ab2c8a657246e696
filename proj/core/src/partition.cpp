#include "spd/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "spd/errors.hpp"

namespace spd {

namespace {

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(pos, end - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '"')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '"' || tok.back() == '\r')) tok.remove_suffix(1);
    if (tok.empty()) throw DomainError("empty entry in integer list '" + std::string(text) + "'");
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw DomainError("bad integer '" + std::string(tok) + "'");
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

std::string join(std::span<const int> values, int offset) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(values[i] + offset);
  }
  return s;
}

// Contingency table between two canonical partitions.
std::vector<std::vector<double>> contingency(const Partition& p, const Partition& q) {
  if (p.size() != q.size()) throw DomainError("partition size mismatch");
  std::vector<std::vector<double>> table(p.num_clusters(), std::vector<double>(q.num_clusters(), 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) table[p[i] - 1][q[i] - 1] += 1.0;
  return table;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

Partition Partition::from_labels(std::span<const int> raw_labels) {
  if (raw_labels.empty()) throw DomainError("cannot canonicalize an empty label vector");
  Partition p;
  p.labels_.resize(raw_labels.size());
  std::unordered_map<int, int> relabel;
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    auto [it, inserted] = relabel.try_emplace(raw_labels[i], static_cast<int>(relabel.size()) + 1);
    p.labels_[i] = it->second;
  }
  p.num_clusters_ = static_cast<int>(relabel.size());
  return p;
}

Partition Partition::parse(std::string_view text) { return from_labels(parse_int_list(text)); }

Partition Partition::single_cluster(std::size_t n) {
  std::vector<int> l(n, 1);
  return from_labels(l);
}

Partition Partition::singletons(std::size_t n) {
  std::vector<int> l(n);
  std::iota(l.begin(), l.end(), 1);
  return from_labels(l);
}

std::vector<int> Partition::cluster_sizes() const {
  std::vector<int> sizes(num_clusters_, 0);
  for (int l : labels_) ++sizes[l - 1];
  return sizes;
}

std::string Partition::to_string() const { return join(labels_, 0); }

Partition canonicalize(std::span<const int> raw_labels) { return Partition::from_labels(raw_labels); }

Permutation::Permutation(std::vector<int> order) : order_(std::move(order)) {
  std::vector<char> seen(order_.size(), 0);
  for (int v : order_) {
    if (v < 0 || static_cast<std::size_t>(v) >= order_.size() || seen[v])
      throw DomainError("permutation is not a bijection on the item set");
    seen[v] = 1;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> o(n);
  std::iota(o.begin(), o.end(), 0);
  return Permutation(std::move(o));
}

Permutation Permutation::random(std::size_t n, Rng& rng) {
  Permutation p = identity(n);
  // Fisher-Yates with our own uniform draws so results do not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(p.order_[i - 1], p.order_[j]);
  }
  return p;
}

Permutation Permutation::parse(std::string_view text) {
  std::vector<int> o = parse_int_list(text);
  for (int& v : o) --v;
  return Permutation(std::move(o));
}

std::vector<int> Permutation::positions() const {
  std::vector<int> pos(order_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) pos[order_[k]] = static_cast<int>(k);
  return pos;
}

void Permutation::swap_steps(std::size_t a, std::size_t b) { std::swap(order_[a], order_[b]); }

std::string Permutation::to_string() const { return join(order_, 1); }

void for_each_partition(std::size_t n, const std::function<void(const Partition&)>& visit) {
  if (n == 0) throw DomainError("partitions need at least one item");
  if (n > kEnumerationCap)
    throw CapacityError("enumeration capped at n = " + std::to_string(kEnumerationCap));
  // Restricted growth strings: a[0] = 1, a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> a(n, 1);
  std::vector<int> prefix_max(n, 1);
  while (true) {
    visit(Partition::from_labels(a));
    std::size_t i = n - 1;
    while (i > 0 && a[i] > prefix_max[i - 1]) --i;
    if (i == 0) return;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 1;
      prefix_max[j] = prefix_max[i];
    }
  }
}

std::vector<Partition> enumerate_partitions(std::size_t n) {
  std::vector<Partition> out;
  for_each_partition(n, [&](const Partition& p) { out.push_back(p); });
  return out;
}

void for_each_permutation(std::size_t n, const std::function<void(const Permutation&)>& visit) {
  std::vector<int> o(n);
  std::iota(o.begin(), o.end(), 0);
  do {
    visit(Permutation(o));
  } while (std::next_permutation(o.begin(), o.end()));
}

double adjusted_rand_index(const Partition& p, const Partition& q) {
  const auto table = contingency(p, q);
  const double n = static_cast<double>(p.size());
  double index = 0.0;
  std::vector<double> rows(p.num_clusters(), 0.0), cols(q.num_clusters(), 0.0);
  for (std::size_t a = 0; a < table.size(); ++a) {
    for (std::size_t b = 0; b < table[a].size(); ++b) {
      index += choose2(table[a][b]);
      rows[a] += table[a][b];
      cols[b] += table[a][b];
    }
  }
  double sum_rows = 0.0, sum_cols = 0.0;
  for (double r : rows) sum_rows += choose2(r);
  for (double c : cols) sum_cols += choose2(c);
  const double total = choose2(n);
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  const double denom = max_index - expected;
  // Both partitions all-singletons or both one cluster (or n = 1).
  if (denom == 0.0) return index == expected && p == q ? 1.0 : 0.0;
  return (index - expected) / denom;
}

double binder_distance(const Partition& p, const Partition& q) {
  if (p.size() != q.size()) throw DomainError("partition size mismatch");
  // pairs together in p + pairs together in q - 2 * pairs together in both
  const auto table = contingency(p, q);
  double both = 0.0;
  for (const auto& row : table)
    for (double v : row) both += choose2(v);
  double in_p = 0.0, in_q = 0.0;
  for (int s : p.cluster_sizes()) in_p += choose2(s);
  for (int s : q.cluster_sizes()) in_q += choose2(s);
  return in_p + in_q - 2.0 * both;
}

double vi_distance(const Partition& p, const Partition& q) {
  const auto table = contingency(p, q);
  const double n = static_cast<double>(p.size());
  auto entropy = [n](const std::vector<int>& sizes) {
    double h = 0.0;
    for (int s : sizes)
      if (s > 0) h -= (s / n) * std::log(s / n);
    return h;
  };
  const auto ps = p.cluster_sizes();
  const auto qs = q.cluster_sizes();
  double mutual = 0.0;
  for (std::size_t a = 0; a < table.size(); ++a) {
    for (std::size_t b = 0; b < table[a].size(); ++b) {
      const double nab = table[a][b];
      if (nab > 0.0) mutual += (nab / n) * std::log(nab * n / (static_cast<double>(ps[a]) * qs[b]));
    }
  }
  return std::max(0.0, entropy(ps) + entropy(qs) - 2.0 * mutual);
}

}  // namespace spd
