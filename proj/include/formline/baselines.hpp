#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "formline/types.hpp"

namespace formline {

// Standard logistic Elo with an ordered-logistic win/draw/loss head.
struct EloModel {
    std::unordered_map<int, double> ratings;  // team id -> rating
    double initial_rating = 1500.0;
    double k_factor = 20.0;
    double home_advantage = 50.0;
    double threshold_lo = -0.5;  // c1 < c2; ordered-logistic cut points
    double threshold_hi = 0.5;

    double rating_of(int team) const {
        auto it = ratings.find(team);
        return it == ratings.end() ? initial_rating : it->second;
    }
};

// E = 1 / (1 + 10^(-(r_home + advantage - r_away)/400)).
double elo_expected(double r_home, double r_away, double home_advantage);

// Zero-sum rating exchange; draws count half.
void elo_update(EloModel& model, const MatchRecord& match);

// Ordered logistic over the scaled rating difference.
PredictionTriple elo_predict(const EloModel& model, int home, int away);

struct EloGrid {
    std::vector<double> k_factors = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    std::vector<double> home_advantages = {0, 25, 50, 75, 100, 125, 150};
    std::vector<double> thresholds = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

// Grid search maximizing the sequential-update log likelihood of observed
// outcomes; ties broken by smaller K, then smaller home advantage, then
// smaller cut points.
EloModel elo_fit(const std::vector<MatchRecord>& train, const EloGrid& grid = {});

// Empirical (home win, draw, away win) frequencies.
PredictionTriple naive_fit(const std::vector<MatchRecord>& train);
inline PredictionTriple naive_predict(const PredictionTriple& model) { return model; }

std::string elo_model_json(const EloModel& model, const std::vector<std::string>& team_names);
EloModel elo_model_from_json(const std::string& text, const std::vector<std::string>& team_names);

}  // namespace formline
