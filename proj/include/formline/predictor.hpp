#pragma once

#include <string>
#include <vector>

#include "formline/types.hpp"

namespace formline {

// Joint scoreline distribution; entry (g_home, g_away).
struct ScorelineDistribution {
    Mat joint;  // G x G

    std::vector<std::string> validate() const;
};

enum class Role { kOffense, kDefense };

// Propagates the team's latest posterior marginal forward to target_week:
// one between-season transition per season boundary crossed, otherwise a
// single within-season step (mirroring how build_graph would bridge the gap).
Vec predictive_state(int team, Role role, const Posterior& posterior, const ModelParams& params,
                     int target_week, const std::set<int>& season_boundaries);

// out[g] = sum_ij offense[i] * defense[j] * cpt[i][j][g], renormalized.
Vec goal_distribution(const Vec& offense_state, const Vec& defense_state, const Cpt& cpt);

// Product of the two emission goal distributions under the teams' predictive
// state marginals.
ScorelineDistribution predict_match(int home, int away, int week, const Posterior& posterior,
                                    const ModelParams& params,
                                    const std::set<int>& season_boundaries);

// Sums the joint over the win/draw/loss cells.
PredictionTriple wdl(const ScorelineDistribution& dist);

struct TimelinePoint {
    int week = 0;
    Date date;
    double strength = 0.0;  // in [0, 100]
};

// Strength expectation per played week; absent weeks produce no row.
std::vector<TimelinePoint> timeline(int team, Role role, const Posterior& posterior,
                                    const Schedule& schedule);

struct PoissonDeviationReport {
    double lambda = 0.0;          // expected goals of the CPT slice
    Vec cpt_distribution;         // the slice itself
    Vec poisson_distribution;     // Poisson(lambda) truncated to 0..G_max, renormalized
    double total_variation = 0.0;
};

PoissonDeviationReport poisson_deviation(const Cpt& cpt, int offense_state, int defense_state);

// CSV exports.
std::string timeline_csv(const std::vector<TimelinePoint>& points, const std::string& team_name,
                         Role role);
struct PredictionRow {
    Date date;
    std::string home, away;
    PredictionTriple triple;
    ScorelineDistribution scoreline;
};
std::string predictions_csv(const std::vector<PredictionRow>& rows, int num_goal_states);

}  // namespace formline
