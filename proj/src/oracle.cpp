#include "kiwi/oracle.hpp"

#include <limits>
#include <string>

namespace kiwi {

InstanceTooLarge::InstanceTooLarge(std::uint64_t t, std::uint64_t limit)
    : std::runtime_error("oracle refuses instance: " + std::to_string(t) +
                         " ordered column tuples exceed the limit of " + std::to_string(limit)),
      tuples(t) {}

std::uint64_t ordered_tuple_count(std::size_t m, std::size_t min_cols) {
  constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  std::uint64_t falling = 1;  // m!/(m-l)!
  for (std::size_t l = 1; l <= m; ++l) {
    const std::uint64_t factor = m - l + 1;
    if (falling > cap / factor) return cap;
    falling *= factor;
    if (l >= min_cols) {
      if (total > cap - falling) return cap;
      total += falling;
    }
  }
  return total;
}

namespace {

class Enumerator {
public:
  Enumerator(const SequenceDatabase& db, const MiningParams& params, std::vector<Cluster>& out)
      : db_(db), params_(params), used_(db.cols(), false), out_(out) {}

  void run() {
    for (std::size_t length = params_.min_cols; length <= db_.cols(); ++length) {
      target_ = length;
      extend();
    }
  }

private:
  // Tuples of the current length in lexicographic order.
  void extend() {
    if (tuple_.size() == target_) {
      evaluate();
      return;
    }
    for (ColumnIndex c = 0; c < db_.cols(); ++c) {
      if (used_[c]) continue;
      used_[c] = true;
      tuple_.push_back(c);
      extend();
      tuple_.pop_back();
      used_[c] = false;
    }
  }

  void evaluate() {
    const bool both = params_.direction == Direction::both;
    if (both && !is_canonical(tuple_)) return;
    Cluster cluster;
    cluster.pattern = tuple_;
    for (RowIndex r = 0; r < db_.rows(); ++r) {
      if (auto f = support_check(tuple_, r, db_, params_.w, Orientation::forward)) {
        cluster.supporters.push_back({r, Orientation::forward, *f});
      } else if (both) {
        if (auto b = support_check(tuple_, r, db_, params_.w, Orientation::backward)) {
          cluster.supporters.push_back({r, Orientation::backward, *b});
        }
      }
    }
    if (cluster.support() >= params_.min_rows) out_.push_back(std::move(cluster));
  }

  const SequenceDatabase& db_;
  const MiningParams& params_;
  std::vector<bool> used_;
  Pattern tuple_;
  std::size_t target_ = 0;
  std::vector<Cluster>& out_;
};

}  // namespace

std::vector<Cluster> exact_mine(const SequenceDatabase& db, const MiningParams& params,
                                std::uint64_t limit) {
  params.validate(db.cols());
  const std::uint64_t tuples = ordered_tuple_count(db.cols(), params.min_cols);
  if (tuples > limit) throw InstanceTooLarge(tuples, limit);
  std::vector<Cluster> clusters;
  Enumerator(db, params, clusters).run();
  clusters = redundancy_filter(std::move(clusters), params.direction);
  finalize_clusters(clusters);
  return clusters;
}

}  // namespace kiwi
