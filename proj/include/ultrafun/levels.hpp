#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ultrafun {

/// Library-wide error with a coarse category; the C layer maps the category
/// onto its status codes.
class Error : public std::runtime_error {
 public:
  enum Code {
    invalid_argument = 1,
    config = 2,
    domain = 3,
    numeric = 4,
    nonconverged = 5,
    io = 6,
  };

  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Strictly increasing chain of subspace dimensions theta_1 < ... < theta_K.
/// Every level-indexed computation in the library runs along one such chain;
/// limits are always read off the tail of the chain.
struct LevelSchedule {
  std::vector<int> dims;
  std::string description;

  explicit LevelSchedule(std::vector<int> dims_, std::string description_ = {});

  int levels() const noexcept { return static_cast<int>(dims.size()); }
  int dim(int level) const;
  bool same_dims(const LevelSchedule& other) const noexcept { return dims == other.dims; }
};

/// Geometric schedule: dims_k = floor(base * growth^k) for k = 0..levels-1.
/// Requires base >= 1, growth >= 2 and at least two levels.
LevelSchedule make_schedule(int base, double growth, int levels);

struct Level {
  int index;  // 0-based position in the schedule
  int dim;    // subspace dimension at that position
};

/// Level-indexed scalar net with a write-once value cache.
///
/// The evaluation callback must be deterministic: evaluating the same level
/// twice must produce bit-identical values. Distinct levels may be evaluated
/// concurrently; whichever thread finishes first populates the cache.
class LambdaNet {
 public:
  LambdaNet(LevelSchedule schedule, std::function<double(Level)> eval);

  const LevelSchedule& schedule() const noexcept { return state_->schedule; }
  int levels() const noexcept { return state_->schedule.levels(); }

  /// Value at a 0-based level, computed on first use and cached.
  double at(int level) const;

  /// All level values, in schedule order.
  std::vector<double> values() const;

 private:
  struct State {
    LevelSchedule schedule;
    std::function<double(Level)> eval;
    mutable std::mutex mutex;
    mutable std::vector<std::optional<double>> cache;

    State(LevelSchedule s, std::function<double(Level)> e)
        : schedule(std::move(s)), eval(std::move(e)), cache(schedule.dims.size()) {}
  };

  std::shared_ptr<const State> state_;
};

enum class NumTag { infinitesimal, finite, infinite, undetermined };

const char* to_string(NumTag tag);

/// Classification of a net: the tag plus its extrapolated standard part.
/// shadow is 0 for infinitesimal nets, +/-infinity for infinite ones and
/// empty when undetermined.
struct NumClass {
  NumTag tag = NumTag::undetermined;
  std::optional<double> shadow;
};

/// Net that takes the value `value` at every level.
LambdaNet net_const(double value, LevelSchedule schedule);

/// Per-level sum / difference / product. Both nets must share the same dims.
LambdaNet net_add(const LambdaNet& a, const LambdaNet& b);
LambdaNet net_sub(const LambdaNet& a, const LambdaNet& b);
LambdaNet net_mul(const LambdaNet& a, const LambdaNet& b);

/// Classify a net from the tail of its schedule.
///
/// Rules, applied in order to the last three values (v1,v2,v3 with
/// differences d1 = v2-v1, d2 = v3-v2):
///   - exact constant tail: finite with that value as shadow (infinitesimal
///     when it is exactly zero);
///   - monotone tail with non-shrinking increments and growing magnitude:
///     infinite, shadow +/-infinity by sign;
///   - shrinking increments: Aitken delta-squared extrapolation; within tol
///     of zero -> infinitesimal, successive extrapolants within tol of each
///     other -> finite with the extrapolant as shadow;
///   - anything else: undetermined (always an admissible outcome).
NumClass classify(const LambdaNet& net, double tol);

/// True iff a - b classifies as infinitesimal at the given tolerance.
bool infinitely_close(const LambdaNet& a, const LambdaNet& b, double tol);

/// Net whose level-k value is the exact (left-to-right) sum of the finite
/// list produced for that level.
LambdaNet hyperfinite_sum(std::function<std::vector<double>(Level)> terms,
                          LevelSchedule schedule);

}  // namespace ultrafun
