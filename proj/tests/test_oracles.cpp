#include "cotrans/mutation.hpp"
#include "cotrans/oracles.hpp"

#include <gtest/gtest.h>

using namespace cotrans;

TEST(Oracles, SuitePassesOnCleanBuild) {
  const OracleReport r = oracle_suite();
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_EQ(r.failures(), 0);
  EXPECT_LT(r.max_jacobian_error, 1e-4);
  EXPECT_GE(r.results.size(), 10u);
}

TEST(Oracles, SuiteIsDeterministic) {
  EXPECT_EQ(oracle_suite().text(), oracle_suite().text());
}

class MutationKill : public ::testing::TestWithParam<Mutation> {};

TEST_P(MutationKill, AtLeastOneOracleFails) {
  const MutationScope scope(GetParam());
  const OracleReport r = oracle_suite();
  EXPECT_GE(r.failures(), 1) << to_string(GetParam()) << "\n" << r.text();
}

INSTANTIATE_TEST_SUITE_P(All, MutationKill, ::testing::ValuesIn(all_mutations()),
                         [](const auto &info) {
                           std::string s = to_string(info.param);
                           for (char &c : s)
                             if (c == '-')
                               c = '_';
                           return s;
                         });

TEST(Mutation, ScopeRestoresPrevious) {
  EXPECT_EQ(active_mutation(), Mutation::None);
  {
    const MutationScope a(Mutation::EkfDrag);
    EXPECT_EQ(active_mutation(), Mutation::EkfDrag);
  }
  EXPECT_EQ(active_mutation(), Mutation::None);
  for (Mutation m : all_mutations())
    EXPECT_EQ(mutation_from_string(to_string(m)), m);
}

TEST(JacobianError, RelativeToReference) {
  Eigen::MatrixXd a(1, 2), b(1, 2);
  a << 1.0, 2.0;
  b << 1.0, 2.0;
  EXPECT_EQ(jacobian_error(a, b), 0.0);
  a(0, 1) = 2.002;
  EXPECT_NEAR(jacobian_error(a, b), 1e-3, 1e-4);
}
