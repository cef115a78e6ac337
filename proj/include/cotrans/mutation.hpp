#pragma once

#include <string>
#include <vector>

namespace cotrans {

// Deliberate sign errors injected into dynamics code to check that the
// oracle suite notices them. Process-wide; only tests and the CLI set it.
enum class Mutation {
  None,
  PayloadGravity,
  PayloadGyroscopic,
  InertiaParallelAxis,
  EkfDrag,
  AnalysisDrag,
  AttitudeDamping,
};

const char *to_string(Mutation m);
Mutation mutation_from_string(const std::string &s);
std::vector<Mutation> all_mutations();

void set_mutation(Mutation m);
Mutation active_mutation();

// -1 when `m` is active, +1 otherwise.
double mutation_sign(Mutation m);

class MutationScope {
public:
  explicit MutationScope(Mutation m) : previous_(active_mutation()) { set_mutation(m); }
  ~MutationScope() { set_mutation(previous_); }
  MutationScope(const MutationScope &) = delete;
  MutationScope &operator=(const MutationScope &) = delete;

private:
  Mutation previous_;
};

} // namespace cotrans
