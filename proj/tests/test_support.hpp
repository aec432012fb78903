#pragma once

#include <set>
#include <vector>

#include "formline/graph.hpp"
#include "formline/rng.hpp"
#include "formline/types.hpp"

namespace formline::testing {

struct MatchSpec {
    int week = 0;
    int home = 0;
    int away = 0;
    int home_goals = 0;
    int away_goals = 0;
};

// Schedule built directly (no CSV round trip): one bucket per listed week,
// dates seven days apart, presence rebuilt from the matches.
Schedule make_schedule(int num_teams, int num_weeks, const std::vector<MatchSpec>& matches,
                       const std::set<int>& boundaries = {});

// Match-free schedule whose presence covers every week for every team
// (disconnected chains; used for pure chain-propagation checks).
Schedule chain_only_schedule(int num_teams, int num_weeks, const std::set<int>& boundaries = {});

// Valid random parameters; emission CPTs are projected to monotone expected
// goals unless asked otherwise.
ModelParams random_params(Rng& rng, const Cardinalities& card, bool monotone_emissions = true);

// The three-team round robin from the model's factor-graph illustration:
// week 0: 0 (home) vs 1, week 1: 0 vs 2, week 2: 1 vs 2. Loopy.
Schedule round_robin_schedule(Rng& rng, int num_goal_states);

// Random small instance whose latent graph is a forest and whose joint state
// space stays below ~1e6 configurations at S=2.
Schedule random_forest_schedule(Rng& rng, int num_goal_states);

// League skeleton: every team plays every week (random pairings, goals zero);
// optional season boundary every season_length weeks.
Schedule league_skeleton(Rng& rng, int num_teams, int num_weeks, int season_length = 0);

// Largest absolute difference across all gamma entries.
double max_gamma_diff(const Posterior& a, const Posterior& b);
// Largest absolute difference across gammas, xis, and zetas.
double max_posterior_diff(const Posterior& a, const Posterior& b);

// Test-only oracle: maximize sum_i weights[i] * ln p[i] over the simplex by
// long-run softmax gradient ascent (independent of the closed-form updates).
Vec numeric_simplex_max(const Vec& weights, int iters = 20000);

}  // namespace formline::testing
