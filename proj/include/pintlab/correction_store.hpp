#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pintlab/integrators.hpp"

namespace pintlab {

/// One evaluated correction: `output` = (F - G)(`input`), where `input` is the start
/// value of interval `interval` (1-based) as known at Parareal iteration `iteration`.
struct CorrectionRecord {
  State input;
  State output;
  int interval = 0;
  int iteration = 0;
};

enum class SubsetStrategy { nearest, col_rnd, col_only, row_col, row_major, col_major };

SubsetStrategy parse_subset_strategy(const std::string& tag);
std::string to_string(SubsetStrategy strategy);

/// Neighbour returned by a query; `index` refers to the store's record list.
struct Neighbor {
  std::size_t index = 0;
  double dist_sq = 0.0;
};

/// Append-only dataset of correction records with an incrementally built kd-tree over
/// the inputs. Queries are const and may run concurrently; inserts may not overlap
/// queries.
///
/// Equal distances are ordered by a per-record key derived from `tie_seed`, so any
/// two search paths given the same seed agree exactly.
class CorrectionStore {
 public:
  explicit CorrectionStore(std::size_t dim);

  void insert_batch(std::vector<CorrectionRecord> records);

  std::size_t size() const { return records_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return records_.empty(); }
  const CorrectionRecord& record(std::size_t i) const { return records_[i]; }
  const std::vector<CorrectionRecord>& records() const { return records_; }

  /// Up to m nearest records by Euclidean distance, nearest first.
  std::vector<Neighbor> query_m_nearest(std::span<const double> query, std::size_t m,
                                        std::uint64_t tie_seed) const;

  /// Same contract as query_m_nearest via a full sort.
  std::vector<Neighbor> query_m_nearest_bruteforce(std::span<const double> query,
                                                   std::size_t m,
                                                   std::uint64_t tie_seed) const;

  /// Training subset for predicting at the start of interval `interval` in iteration
  /// `iteration`. Grid strategies view the data as a table whose row is the record's
  /// iteration and whose column is its interval.
  std::vector<std::size_t> select_subset(SubsetStrategy strategy, std::span<const double> query,
                                         int interval, int iteration, std::size_t m,
                                         std::uint64_t tie_seed) const;

  /// Depth of the kd-tree; diagnostic only.
  std::size_t tree_depth() const;

  /// CSV with columns in_0..in_{d-1}, out_0..out_{d-1}, interval, iteration.
  void write_csv(std::ostream& os) const;

 private:
  struct Node {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t axis = 0;
  };

  double dist_sq(std::span<const double> query, std::size_t index) const;
  void insert_point(std::size_t index);

  std::size_t dim_;
  std::vector<CorrectionRecord> records_;
  std::vector<double> points_;
  std::vector<Node> nodes_;
};

/// Tie-break key of record `index` under `tie_seed`.
std::uint64_t tie_key(std::uint64_t tie_seed, std::size_t index);

}  // namespace pintlab
