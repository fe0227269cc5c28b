#include "ultrafun/levels.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace ultrafun {

namespace {

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) {
    throw Error(Error::invalid_argument, "LevelSchedule: need at least two levels");
  }
  int prev = 0;
  for (int d : dims) {
    if (d < 1) throw Error(Error::invalid_argument, "LevelSchedule: dimensions must be >= 1");
    if (d <= prev) throw Error(Error::invalid_argument, "LevelSchedule: dimensions must be strictly increasing");
    prev = d;
  }
}

}  // namespace

LevelSchedule::LevelSchedule(std::vector<int> dims_, std::string description_)
    : dims(std::move(dims_)), description(std::move(description_)) {
  check_dims(dims);
}

int LevelSchedule::dim(int level) const {
  if (level < 0 || level >= levels()) {
    throw Error(Error::invalid_argument, "LevelSchedule: level index out of range");
  }
  return dims[static_cast<std::size_t>(level)];
}

LevelSchedule make_schedule(int base, double growth, int levels) {
  if (base < 1) throw Error(Error::invalid_argument, "make_schedule: base must be >= 1");
  if (levels < 2) throw Error(Error::invalid_argument, "make_schedule: need at least two levels for extrapolation");
  if (growth < 2.0) throw Error(Error::invalid_argument, "make_schedule: growth must be >= 2");
  std::vector<int> dims(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    dims[static_cast<std::size_t>(k)] =
        static_cast<int>(std::floor(static_cast<double>(base) * std::pow(growth, k)));
  }
  return LevelSchedule(std::move(dims), "geometric");
}

LambdaNet::LambdaNet(LevelSchedule schedule, std::function<double(Level)> eval)
    : state_(std::make_shared<State>(std::move(schedule), std::move(eval))) {
  if (!state_->eval) throw Error(Error::invalid_argument, "LambdaNet: missing evaluation function");
}

double LambdaNet::at(int level) const {
  if (level < 0 || level >= levels()) {
    throw Error(Error::invalid_argument, "LambdaNet: level index out of range");
  }
  const auto idx = static_cast<std::size_t>(level);
  {
    std::lock_guard<std::mutex> lock(state_->mutex);
    if (state_->cache[idx]) return *state_->cache[idx];
  }
  // Evaluation runs unlocked; the callback is pure and deterministic, so a
  // racing thread computes the same value and the first store wins.
  double value = state_->eval(Level{level, state_->schedule.dims[idx]});
  std::lock_guard<std::mutex> lock(state_->mutex);
  if (!state_->cache[idx]) state_->cache[idx] = value;
  return *state_->cache[idx];
}

std::vector<double> LambdaNet::values() const {
  std::vector<double> v(static_cast<std::size_t>(levels()));
  for (int k = 0; k < levels(); ++k) v[static_cast<std::size_t>(k)] = at(k);
  return v;
}

const char* to_string(NumTag tag) {
  switch (tag) {
    case NumTag::infinitesimal: return "infinitesimal";
    case NumTag::finite: return "finite";
    case NumTag::infinite: return "infinite";
    case NumTag::undetermined: return "undetermined";
  }
  return "undetermined";
}

LambdaNet net_const(double value, LevelSchedule schedule) {
  return LambdaNet(std::move(schedule), [value](Level) { return value; });
}

namespace {

LambdaNet combine(const LambdaNet& a, const LambdaNet& b, double (*op)(double, double),
                  const char* name) {
  if (!a.schedule().same_dims(b.schedule())) {
    throw Error(Error::invalid_argument, std::string(name) + ": schedule mismatch");
  }
  return LambdaNet(a.schedule(), [a, b, op](Level l) { return op(a.at(l.index), b.at(l.index)); });
}

}  // namespace

LambdaNet net_add(const LambdaNet& a, const LambdaNet& b) {
  return combine(a, b, [](double x, double y) { return x + y; }, "net_add");
}

LambdaNet net_sub(const LambdaNet& a, const LambdaNet& b) {
  return combine(a, b, [](double x, double y) { return x - y; }, "net_sub");
}

LambdaNet net_mul(const LambdaNet& a, const LambdaNet& b) {
  return combine(a, b, [](double x, double y) { return x * y; }, "net_mul");
}

namespace {

// Aitken delta-squared step on three consecutive values; falls back to the
// last value when the denominator is numerically degenerate.
double aitken(double x0, double x1, double x2) {
  const double d1 = x1 - x0;
  const double d2 = x2 - x1;
  const double den = d2 - d1;
  const double scale = std::max({std::abs(x2), std::abs(d1), std::abs(d2), 1.0});
  if (std::abs(den) < 1e-14 * scale) return x2;
  return x2 - d2 * d2 / den;
}

NumClass make_infinite(double sign) {
  const double inf = std::numeric_limits<double>::infinity();
  return NumClass{NumTag::infinite, sign > 0 ? inf : -inf};
}

}  // namespace

NumClass classify(const LambdaNet& net, double tol) {
  if (!(tol > 0.0)) throw Error(Error::invalid_argument, "classify: tol must be positive");
  const std::vector<double> v = net.values();
  const int K = static_cast<int>(v.size());

  for (double x : v) {
    if (!std::isfinite(x)) {
      // A non-finite value anywhere forces the divergent reading.
      return make_infinite(x > 0 ? 1.0 : -1.0);
    }
  }

  const double last = v[static_cast<std::size_t>(K - 1)];
  const double prev = v[static_cast<std::size_t>(K - 2)];

  // Exact constant tails keep their value as shadow, bit for bit.
  const bool const_tail =
      (K >= 3) ? (last == prev && prev == v[static_cast<std::size_t>(K - 3)]) : (last == prev);
  if (const_tail) {
    if (last == 0.0) return NumClass{NumTag::infinitesimal, 0.0};
    return NumClass{NumTag::finite, last};
  }

  if (K == 2) {
    // Too short to extrapolate; settle only the clear-cut cases.
    if (std::abs(last) > std::abs(prev) && std::abs(last) >= 1.0 / tol) {
      return make_infinite(last);
    }
    if (std::abs(last) <= tol && std::abs(last) <= std::abs(prev)) {
      return NumClass{NumTag::infinitesimal, 0.0};
    }
    if (std::abs(last - prev) <= tol) return NumClass{NumTag::finite, last};
    return NumClass{};
  }

  const double a = v[static_cast<std::size_t>(K - 3)];
  const double d1 = prev - a;
  const double d2 = last - prev;

  // A tail that is flat within tol has converged; without this guard,
  // rounding jitter on a settled net could read as monotone growth.
  if (std::abs(d1) <= tol && std::abs(d2) <= tol) {
    if (std::abs(last) <= tol) return NumClass{NumTag::infinitesimal, 0.0};
    return NumClass{NumTag::finite, last};
  }

  // Monotone tail whose increments do not shrink: the net is escaping.
  if (std::abs(d2) >= std::abs(d1) && d1 * d2 > 0.0 && std::abs(last) > std::abs(prev)) {
    return make_infinite(last);
  }

  if (std::abs(d2) < std::abs(d1)) {
    const double s = aitken(a, prev, last);
    const double s_prev = (K >= 4) ? aitken(v[static_cast<std::size_t>(K - 4)], a, prev) : last;
    if (std::abs(s) <= tol) return NumClass{NumTag::infinitesimal, 0.0};
    if (std::abs(s - s_prev) <= tol) return NumClass{NumTag::finite, s};
  }

  return NumClass{};
}

bool infinitely_close(const LambdaNet& a, const LambdaNet& b, double tol) {
  return classify(net_sub(a, b), tol).tag == NumTag::infinitesimal;
}

LambdaNet hyperfinite_sum(std::function<std::vector<double>(Level)> terms,
                          LevelSchedule schedule) {
  if (!terms) throw Error(Error::invalid_argument, "hyperfinite_sum: missing term function");
  return LambdaNet(std::move(schedule), [terms](Level l) {
    const std::vector<double> list = terms(l);
    return std::accumulate(list.begin(), list.end(), 0.0);
  });
}

}  // namespace ultrafun
