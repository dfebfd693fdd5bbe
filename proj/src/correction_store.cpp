#include "pintlab/correction_store.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "pintlab/rng.hpp"

namespace pintlab {

namespace {

struct Candidate {
  double dist_sq;
  std::uint64_t key;
  std::size_t index;

  bool operator<(const Candidate& o) const {
    return std::tie(dist_sq, key, index) < std::tie(o.dist_sq, o.key, o.index);
  }
};

std::vector<Neighbor> to_neighbors(std::vector<Candidate>& best) {
  std::sort(best.begin(), best.end());
  std::vector<Neighbor> out;
  out.reserve(best.size());
  for (const auto& c : best) out.push_back({c.index, c.dist_sq});
  return out;
}

}  // namespace

SubsetStrategy parse_subset_strategy(const std::string& tag) {
  if (tag == "nearest" || tag == "nn") return SubsetStrategy::nearest;
  if (tag == "col_rnd") return SubsetStrategy::col_rnd;
  if (tag == "col_only") return SubsetStrategy::col_only;
  if (tag == "row_col") return SubsetStrategy::row_col;
  if (tag == "row_major") return SubsetStrategy::row_major;
  if (tag == "col_major") return SubsetStrategy::col_major;
  throw std::invalid_argument("unknown subset strategy '" + tag + "'");
}

std::string to_string(SubsetStrategy strategy) {
  switch (strategy) {
    case SubsetStrategy::nearest: return "nearest";
    case SubsetStrategy::col_rnd: return "col_rnd";
    case SubsetStrategy::col_only: return "col_only";
    case SubsetStrategy::row_col: return "row_col";
    case SubsetStrategy::row_major: return "row_major";
    case SubsetStrategy::col_major: return "col_major";
  }
  return "?";
}

std::uint64_t tie_key(std::uint64_t tie_seed, std::size_t index) {
  return mix64(tie_seed ^ mix64(static_cast<std::uint64_t>(index) + 0x632be59bd9b4e019ULL));
}

CorrectionStore::CorrectionStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("correction store dimension must be positive");
}

void CorrectionStore::insert_batch(std::vector<CorrectionRecord> records) {
  for (const auto& r : records) {
    if (r.input.size() != dim_ || r.output.size() != dim_) {
      throw std::invalid_argument("correction record dimension mismatch");
    }
  }
  records_.reserve(records_.size() + records.size());
  for (auto& r : records) {
    const std::size_t index = records_.size();
    points_.insert(points_.end(), r.input.begin(), r.input.end());
    records_.push_back(std::move(r));
    insert_point(index);
  }
}

void CorrectionStore::insert_point(std::size_t index) {
  const double* p = points_.data() + index * dim_;
  Node node;
  if (index == 0) {
    nodes_.push_back(node);
    return;
  }
  std::size_t cur = 0;
  for (;;) {
    const Node& n = nodes_[cur];
    const double split = points_[cur * dim_ + n.axis];
    const bool go_left = p[n.axis] < split;
    const std::int32_t child = go_left ? n.left : n.right;
    if (child < 0) {
      node.axis = static_cast<std::uint32_t>((n.axis + 1) % dim_);
      if (go_left) {
        nodes_[cur].left = static_cast<std::int32_t>(index);
      } else {
        nodes_[cur].right = static_cast<std::int32_t>(index);
      }
      nodes_.push_back(node);
      return;
    }
    cur = static_cast<std::size_t>(child);
  }
}

double CorrectionStore::dist_sq(std::span<const double> query, std::size_t index) const {
  const double* p = points_.data() + index * dim_;
  double s = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double diff = query[j] - p[j];
    s += diff * diff;
  }
  return s;
}

std::vector<Neighbor> CorrectionStore::query_m_nearest(std::span<const double> query,
                                                       std::size_t m,
                                                       std::uint64_t tie_seed) const {
  if (records_.empty()) throw std::logic_error("nearest-neighbour query on an empty store");
  if (m == 0) throw std::invalid_argument("m must be at least 1");
  if (query.size() != dim_) throw std::invalid_argument("query dimension mismatch");
  m = std::min(m, records_.size());

  std::vector<Candidate> heap;
  heap.reserve(m + 1);
  struct Pending {
    std::size_t node;
    double bound;
  };
  std::vector<Pending> stack;
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Pending item = stack.back();
    stack.pop_back();
    if (heap.size() == m && item.bound > heap.front().dist_sq) continue;
    const std::size_t cur = item.node;
    const Candidate c{dist_sq(query, cur), tie_key(tie_seed, cur), cur};
    if (heap.size() < m) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
    const Node& n = nodes_[cur];
    const double diff = query[n.axis] - points_[cur * dim_ + n.axis];
    const std::int32_t near = diff < 0.0 ? n.left : n.right;
    const std::int32_t far = diff < 0.0 ? n.right : n.left;
    if (far >= 0) stack.push_back({static_cast<std::size_t>(far), diff * diff});
    if (near >= 0) stack.push_back({static_cast<std::size_t>(near), item.bound});
  }
  return to_neighbors(heap);
}

std::vector<Neighbor> CorrectionStore::query_m_nearest_bruteforce(std::span<const double> query,
                                                                  std::size_t m,
                                                                  std::uint64_t tie_seed) const {
  if (records_.empty()) throw std::logic_error("nearest-neighbour query on an empty store");
  if (m == 0) throw std::invalid_argument("m must be at least 1");
  if (query.size() != dim_) throw std::invalid_argument("query dimension mismatch");
  std::vector<Candidate> all(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    all[i] = {dist_sq(query, i), tie_key(tie_seed, i), i};
  }
  m = std::min(m, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end());
  all.resize(m);
  return to_neighbors(all);
}

std::vector<std::size_t> CorrectionStore::select_subset(SubsetStrategy strategy,
                                                        std::span<const double> query,
                                                        int interval, int iteration,
                                                        std::size_t m,
                                                        std::uint64_t tie_seed) const {
  if (records_.empty()) throw std::logic_error("subset selection on an empty store");
  if (m == 0) throw std::invalid_argument("m must be at least 1");
  std::vector<std::size_t> out;

  if (strategy == SubsetStrategy::nearest) {
    for (const auto& nb : query_m_nearest(query, m, tie_seed)) out.push_back(nb.index);
    return out;
  }

  if (strategy == SubsetStrategy::col_rnd || strategy == SubsetStrategy::col_only) {
    std::vector<std::size_t> column;
    for (std::size_t r = 0; r < records_.size(); ++r) {
      if (records_[r].interval == interval) column.push_back(r);
    }
    std::stable_sort(column.begin(), column.end(), [&](std::size_t a, std::size_t b) {
      return records_[a].iteration < records_[b].iteration;
    });
    if (column.size() > m) column.resize(m);
    out = column;
    if (strategy == SubsetStrategy::col_rnd && out.size() < m) {
      std::vector<std::size_t> rest;
      for (std::size_t r = 0; r < records_.size(); ++r) {
        if (records_[r].interval != interval) rest.push_back(r);
      }
      SplitMix64 rng(tie_seed);
      const std::size_t want = std::min(m - out.size(), rest.size());
      for (std::size_t j = 0; j < want; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.below(rest.size() - j));
        std::swap(rest[j], rest[pick]);
        out.push_back(rest[j]);
      }
    }
    return out;
  }

  // Grid strategies: distance from the query cell (iteration, interval) in the table.
  struct Cell {
    long primary;
    long secondary;
    std::uint64_t key;
    std::size_t index;
    bool operator<(const Cell& o) const {
      return std::tie(primary, secondary, key, index) <
             std::tie(o.primary, o.secondary, o.key, o.index);
    }
  };
  std::vector<Cell> cells(records_.size());
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const long row = std::labs(static_cast<long>(iteration) - records_[r].iteration);
    const long col = std::labs(static_cast<long>(interval) - records_[r].interval);
    long primary = 0;
    long secondary = 0;
    switch (strategy) {
      case SubsetStrategy::row_col:
        primary = row + col;
        secondary = row;
        break;
      case SubsetStrategy::row_major:
        primary = row;
        secondary = col;
        break;
      default:
        primary = col;
        secondary = row;
        break;
    }
    cells[r] = {primary, secondary, tie_key(tie_seed, r), r};
  }
  const std::size_t take = std::min(m, cells.size());
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(take),
                    cells.end());
  for (std::size_t j = 0; j < take; ++j) out.push_back(cells[j].index);
  return out;
}

std::size_t CorrectionStore::tree_depth() const {
  if (nodes_.empty()) return 0;
  std::size_t depth = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 1}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    if (nodes_[n].left >= 0) stack.push_back({nodes_[n].left, d + 1});
    if (nodes_[n].right >= 0) stack.push_back({nodes_[n].right, d + 1});
  }
  return depth;
}

void CorrectionStore::write_csv(std::ostream& os) const {
  for (std::size_t j = 0; j < dim_; ++j) os << "in_" << j << ',';
  for (std::size_t j = 0; j < dim_; ++j) os << "out_" << j << ',';
  os << "interval,iteration\n";
  const auto old = os.precision(17);
  for (const auto& r : records_) {
    for (double v : r.input) os << v << ',';
    for (double v : r.output) os << v << ',';
    os << r.interval << ',' << r.iteration << '\n';
  }
  os.precision(old);
}

}  // namespace pintlab
