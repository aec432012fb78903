#include "formline/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace formline {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

PredictionTriple ordered_logistic(double x, double c1, double c2) {
    double lo = logistic(c1 - x / 400.0);
    double hi = logistic(c2 - x / 400.0);
    return {1.0 - hi, hi - lo, lo};
}

}  // namespace

double elo_expected(double r_home, double r_away, double home_advantage) {
    return 1.0 / (1.0 + std::pow(10.0, -(r_home + home_advantage - r_away) / 400.0));
}

void elo_update(EloModel& model, const MatchRecord& match) {
    double rh = model.rating_of(match.home);
    double ra = model.rating_of(match.away);
    double expected = elo_expected(rh, ra, model.home_advantage);
    int outcome = match_outcome(match);
    double score = outcome == 0 ? 1.0 : outcome == 1 ? 0.5 : 0.0;
    double delta = model.k_factor * (score - expected);
    model.ratings[match.home] = rh + delta;
    model.ratings[match.away] = ra - delta;
}

PredictionTriple elo_predict(const EloModel& model, int home, int away) {
    double x = model.rating_of(home) + model.home_advantage - model.rating_of(away);
    return ordered_logistic(x, model.threshold_lo, model.threshold_hi);
}

EloModel elo_fit(const std::vector<MatchRecord>& train, const EloGrid& grid) {
    if (train.empty()) throw std::runtime_error("elo_fit: no training matches");
    EloModel best;
    double best_ll = -std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (double k : grid.k_factors) {
        for (double ha : grid.home_advantages) {
            // The rating path depends only on (K, HA); replay once and score
            // every threshold pair against the recorded rating differences.
            std::vector<double> diffs(train.size());
            std::vector<int> outcomes(train.size());
            EloModel path;
            path.k_factor = k;
            path.home_advantage = ha;
            for (size_t i = 0; i < train.size(); ++i) {
                diffs[i] = path.rating_of(train[i].home) + ha - path.rating_of(train[i].away);
                outcomes[i] = match_outcome(train[i]);
                elo_update(path, train[i]);
            }
            for (double t_lo : grid.thresholds) {
                for (double t_hi : grid.thresholds) {
                    double c1 = -t_lo, c2 = t_hi;
                    double ll = 0.0;
                    for (size_t i = 0; i < train.size(); ++i) {
                        double p = ordered_logistic(diffs[i], c1, c2).prob_of(outcomes[i]);
                        ll += p > 0.0 ? std::log(p)
                                      : -std::numeric_limits<double>::infinity();
                    }
                    if (ll > best_ll + 1e-12 || !have_best) {
                        best_ll = ll;
                        best = path;
                        best.threshold_lo = c1;
                        best.threshold_hi = c2;
                        have_best = true;
                    }
                }
            }
        }
    }
    return best;
}

PredictionTriple naive_fit(const std::vector<MatchRecord>& train) {
    if (train.empty()) throw std::runtime_error("naive_fit: no training matches");
    double counts[3] = {0, 0, 0};
    for (const auto& m : train) counts[match_outcome(m)] += 1.0;
    double n = static_cast<double>(train.size());
    return {counts[0] / n, counts[1] / n, counts[2] / n};
}

std::string elo_model_json(const EloModel& model, const std::vector<std::string>& team_names) {
    nlohmann::ordered_json j;
    j["format"] = "formline-elo";
    j["initial_rating"] = model.initial_rating;
    j["k_factor"] = model.k_factor;
    j["home_advantage"] = model.home_advantage;
    j["threshold_lo"] = model.threshold_lo;
    j["threshold_hi"] = model.threshold_hi;
    nlohmann::ordered_json ratings = nlohmann::ordered_json::object();
    for (size_t t = 0; t < team_names.size(); ++t) {
        auto it = model.ratings.find(static_cast<int>(t));
        if (it != model.ratings.end()) ratings[team_names[t]] = it->second;
    }
    j["ratings"] = ratings;
    return j.dump(2) + "\n";
}

EloModel elo_model_from_json(const std::string& text,
                             const std::vector<std::string>& team_names) {
    auto j = nlohmann::json::parse(text);
    EloModel model;
    model.initial_rating = j.at("initial_rating").get<double>();
    model.k_factor = j.at("k_factor").get<double>();
    model.home_advantage = j.at("home_advantage").get<double>();
    model.threshold_lo = j.at("threshold_lo").get<double>();
    model.threshold_hi = j.at("threshold_hi").get<double>();
    for (size_t t = 0; t < team_names.size(); ++t) {
        auto it = j.at("ratings").find(team_names[t]);
        if (it != j.at("ratings").end())
            model.ratings[static_cast<int>(t)] = it->get<double>();
    }
    return model;
}

}  // namespace formline
