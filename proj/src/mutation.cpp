#include "cotrans/mutation.hpp"

#include "cotrans/errors.hpp"

#include <atomic>

namespace cotrans {

namespace {
std::atomic<int> g_mutation{0};

constexpr struct {
  Mutation m;
  const char *name;
} kNames[] = {
    {Mutation::None, "none"},
    {Mutation::PayloadGravity, "payload-gravity"},
    {Mutation::PayloadGyroscopic, "payload-gyroscopic"},
    {Mutation::InertiaParallelAxis, "inertia-parallel-axis"},
    {Mutation::EkfDrag, "ekf-drag"},
    {Mutation::AnalysisDrag, "analysis-drag"},
    {Mutation::AttitudeDamping, "attitude-damping"},
};
} // namespace

const char *to_string(Mutation m) {
  for (const auto &e : kNames)
    if (e.m == m)
      return e.name;
  return "none";
}

Mutation mutation_from_string(const std::string &s) {
  for (const auto &e : kNames)
    if (s == e.name)
      return e.m;
  throw ConfigError("unknown mutation '" + s + "'");
}

std::vector<Mutation> all_mutations() {
  std::vector<Mutation> out;
  for (const auto &e : kNames)
    if (e.m != Mutation::None)
      out.push_back(e.m);
  return out;
}

void set_mutation(Mutation m) { g_mutation.store(static_cast<int>(m)); }

Mutation active_mutation() { return static_cast<Mutation>(g_mutation.load()); }

double mutation_sign(Mutation m) {
  return g_mutation.load(std::memory_order_relaxed) == static_cast<int>(m) ? -1.0 : 1.0;
}

} // namespace cotrans
