//
// Copyright 2026 The mialab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <numeric>

#include "mialab/defense/audit.hpp"

using namespace mialab;

namespace {

double total_prob(const SubsetDistribution& dist) {
  return std::accumulate(dist.probs.begin(), dist.probs.end(), 0.0);
}

}  // namespace

TEST_CASE("subset distributions normalize and agree at m = 1") {
  const std::vector<double> u = {-0.2, -0.9, -1.4, -0.6, -1.9};
  for (double eps : {0.5, 1.0, 4.0}) {
    const auto em = subset_distribution(u, 1, eps, 2.0, SamplerMode::exact_em);
    const auto pl = subset_distribution(u, 1, eps, 2.0, SamplerMode::gumbel);
    CHECK(total_prob(em) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(total_prob(pl) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < em.probs.size(); ++i)
      CHECK(std::fabs(em.probs[i] - pl.probs[i]) <= 1e-12);
  }
}

TEST_CASE("equal utilities make both modes uniform over subsets") {
  const std::vector<double> u = {-0.7, -0.7, -0.7, -0.7};
  for (auto mode : {SamplerMode::exact_em, SamplerMode::gumbel}) {
    const auto dist = subset_distribution(u, 2, 3.0, 2.0, mode);
    CHECK(dist.subsets.size() == 6);
    for (double p : dist.probs) CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }
}

TEST_CASE("plackett-luce marginal matches the closed form on three candidates") {
  // softmax weights w = (0.5, 0.3, 0.2) arise from logits ln(w); derived by
  // hand: P({0,1}) = w0 w1 (1/(1-w0) + 1/(1-w1)) etc.
  const std::vector<double> w = {0.5, 0.3, 0.2};
  std::vector<double> u(3);
  // invert logits: phi = eps*u/(2 delta_u) with eps=2, delta_u=1 -> phi = u
  for (std::size_t i = 0; i < 3; ++i) u[i] = std::log(w[i]);
  const auto pl = subset_distribution(u, 2, 2.0, 1.0, SamplerMode::gumbel);

  const double p01 = 0.5 * 0.3 / 0.5 + 0.3 * 0.5 / 0.7;
  const double p02 = 0.5 * 0.2 / 0.5 + 0.2 * 0.5 / 0.8;
  const double p12 = 0.3 * 0.2 / 0.7 + 0.2 * 0.3 / 0.8;
  CHECK(pl.prob_of(std::vector<std::size_t>{0, 1}) == doctest::Approx(p01).epsilon(1e-12));
  CHECK(pl.prob_of(std::vector<std::size_t>{0, 2}) == doctest::Approx(p02).epsilon(1e-12));
  CHECK(pl.prob_of(std::vector<std::size_t>{1, 2}) == doctest::Approx(p12).epsilon(1e-12));
  CHECK(p01 + p02 + p12 == doctest::Approx(1.0).epsilon(1e-12));

  // the exponential-mechanism set distribution differs for m > 1: the
  // set-level identity is not literal, which is why the gumbel ratio is
  // only a diagnostic
  const auto em = subset_distribution(u, 2, 2.0, 1.0, SamplerMode::exact_em);
  const double em01 = 0.5 * 0.3 / (0.5 * 0.3 + 0.5 * 0.2 + 0.3 * 0.2);
  CHECK(em.prob_of(std::vector<std::size_t>{0, 1}) == doctest::Approx(em01).epsilon(1e-12));
  CHECK(std::fabs(em.probs[0] - pl.probs[0]) > 1e-3);
}

TEST_CASE("gumbel draws converge to the plackett-luce marginal") {
  // the spec's |S|=4, m=2 instance at eps=4, delta_u=2
  const std::vector<double> u = {0.0, -0.5, -1.0, -1.5};
  const auto marginal = subset_distribution(u, 2, 4.0, 2.0, SamplerMode::gumbel);
  std::map<std::vector<std::size_t>, std::size_t> position;
  for (std::size_t i = 0; i < marginal.subsets.size(); ++i)
    position[marginal.subsets[i]] = i;

  const auto phi = logits(u, 4.0, 2.0);
  Rng rng(2026);
  const std::size_t draws = 200000;
  std::vector<double> counts(marginal.subsets.size(), 0.0);
  for (std::size_t d = 0; d < draws; ++d)
    counts[position.at(gumbel_top_m(phi, 2, rng))] += 1.0;

  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    tv += std::fabs(counts[i] / static_cast<double>(draws) - marginal.probs[i]);
  tv *= 0.5;
  CHECK(tv <= 0.01);
}

TEST_CASE("privacy ratio audit") {
  const std::vector<double> u = {-0.3, -1.2, -0.8, -1.9};

  SUBCASE("identical substitution gives ratio zero") {
    CHECK(privacy_ratio_audit(u, 1, -1.2, 2, 1.0, 2.0, SamplerMode::exact_em) ==
          doctest::Approx(0.0));
  }

  SUBCASE("epsilon zero gives ratio zero in both modes") {
    CHECK(privacy_ratio_audit(u, 0, -2.0, 2, 0.0, 2.0, SamplerMode::exact_em) ==
          doctest::Approx(0.0));
    CHECK(privacy_ratio_audit(u, 0, -2.0, 2, 0.0, 2.0, SamplerMode::gumbel) ==
          doctest::Approx(0.0));
  }

  SUBCASE("exact_em mode satisfies the epsilon bound on randomized instances") {
    Rng rng(31);
    for (int inst = 0; inst < 60; ++inst) {
      const std::size_t n = 3 + rng.next_below(4);
      std::vector<double> utilities(n);
      for (double& v : utilities) v = -2.0 * rng.uniform01();
      const std::size_t m = 1 + rng.next_below(std::min<std::size_t>(3, n));
      const auto idx = static_cast<std::size_t>(rng.next_below(n));
      const double new_u = -2.0 * rng.uniform01();
      for (double eps : {0.5, 1.0, 4.0}) {
        const double ratio =
            privacy_ratio_audit(utilities, idx, new_u, m, eps, 2.0, SamplerMode::exact_em);
        CHECK(ratio <= eps + 1e-9);
      }
    }
  }

  SUBCASE("substituted utilities are clipped to the feasible range") {
    // a wildly out-of-range substitution behaves like the clipped one
    const double clipped =
        privacy_ratio_audit(u, 0, -2.0, 1, 1.0, 2.0, SamplerMode::exact_em);
    const double wild = privacy_ratio_audit(u, 0, -50.0, 1, 1.0, 2.0, SamplerMode::exact_em);
    CHECK(clipped == doctest::Approx(wild));
  }
}

TEST_CASE("utility tail audit obeys the exponential-mechanism bound") {
  const std::vector<double> u = {-0.1, -0.7, -1.3, -0.4, -1.8};
  Rng rng(11);

  SUBCASE("observed frequency stays within the bound plus binomial slack") {
    for (double t : {1.0, 2.0, 3.0}) {
      Rng draw_rng(derive_seed(11, "tail", static_cast<std::uint64_t>(t)));
      const auto result = utility_tail_audit(u, 2, 1.0, 2.0, t, 50000, draw_rng);
      const double slack = 3.0 * std::sqrt(result.bound * (1.0 - result.bound) / 50000.0);
      CHECK(result.observed_frequency <= result.bound + slack);
      CHECK(result.opt == doctest::Approx(-0.5));  // two largest: -0.1 + -0.4
    }
  }

  SUBCASE("threshold below the minimum possible utility gives frequency zero") {
    // t = 50 pushes the threshold far below the worst subset utility
    const auto result = utility_tail_audit(u, 2, 1.0, 2.0, 50.0, 2000, rng);
    CHECK(result.threshold < -3.1);  // min possible U(I)
    CHECK(result.observed_frequency == 0.0);
  }

  SUBCASE("infinite epsilon always samples the optimum") {
    const auto result = utility_tail_audit(u, 2, kEpsilonInf, 2.0, 1.0, 1000, rng);
    CHECK(result.observed_frequency == 0.0);
  }
}

TEST_CASE("subset enumeration caps are enforced") {
  std::vector<double> u(64, -1.0);
  CHECK_THROWS_AS(subset_distribution(u, 4, 1.0, 2.0, SamplerMode::exact_em, 1000),
                  EnumerationCapExceeded);
}
