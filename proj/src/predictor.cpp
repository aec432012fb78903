#include "formline/predictor.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace formline {

std::vector<std::string> ScorelineDistribution::validate() const {
    std::vector<std::string> out;
    double sum = 0.0;
    for (double x : joint.a) {
        if (!(x >= 0.0)) out.push_back("scoreline joint has negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        out.push_back("scoreline joint sums to " + std::to_string(sum));
    return out;
}

Vec predictive_state(int team, Role role, const Posterior& posterior, const ModelParams& params,
                     int target_week, const std::set<int>& season_boundaries) {
    if (team < 0 || team >= static_cast<int>(posterior.weeks.size()) ||
        posterior.weeks[team].empty())
        throw std::runtime_error("team " + std::to_string(team) + " absent from posterior");
    const auto& weeks = posterior.weeks[team];
    // Latest presence entry strictly before target_week.
    int idx = -1;
    for (size_t p = 0; p < weeks.size(); ++p)
        if (weeks[p] < target_week) idx = static_cast<int>(p);
    if (idx < 0)
        throw std::runtime_error("team " + std::to_string(team) +
                                 " has no posterior history before week " +
                                 std::to_string(target_week));
    const int last_week = weeks[idx];
    Vec v = role == Role::kOffense ? posterior.gamma_o[team][idx]
                                   : posterior.gamma_d[team][idx];

    int boundaries_crossed = 0;
    for (int b : season_boundaries)
        if (b > last_week && b <= target_week) ++boundaries_crossed;
    const Mat& within = role == Role::kOffense ? params.omega_within : params.delta_within;
    const Mat& between = role == Role::kOffense ? params.omega_between : params.delta_between;
    const Mat& step = boundaries_crossed > 0 ? between : within;
    const int hops = boundaries_crossed > 0 ? boundaries_crossed : 1;

    const int s = static_cast<int>(v.size());
    for (int h = 0; h < hops; ++h) {
        Vec next(s, 0.0);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) next[j] += v[i] * step(i, j);
        v = std::move(next);
    }
    normalize_in_place(v);
    return v;
}

Vec goal_distribution(const Vec& offense_state, const Vec& defense_state, const Cpt& cpt) {
    Vec out(cpt.g, 0.0);
    for (int i = 0; i < cpt.s1; ++i) {
        if (offense_state[i] == 0.0) continue;
        for (int j = 0; j < cpt.s2; ++j) {
            double w = offense_state[i] * defense_state[j];
            if (w == 0.0) continue;
            for (int g = 0; g < cpt.g; ++g) out[g] += w * cpt(i, j, g);
        }
    }
    normalize_in_place(out);
    return out;
}

ScorelineDistribution predict_match(int home, int away, int week, const Posterior& posterior,
                                    const ModelParams& params,
                                    const std::set<int>& season_boundaries) {
    Vec home_off = predictive_state(home, Role::kOffense, posterior, params, week,
                                    season_boundaries);
    Vec home_def = predictive_state(home, Role::kDefense, posterior, params, week,
                                    season_boundaries);
    Vec away_off = predictive_state(away, Role::kOffense, posterior, params, week,
                                    season_boundaries);
    Vec away_def = predictive_state(away, Role::kDefense, posterior, params, week,
                                    season_boundaries);
    Vec p_home = goal_distribution(home_off, away_def, params.psi);
    Vec p_away = goal_distribution(away_off, home_def, params.gamma_cpt);
    ScorelineDistribution dist;
    dist.joint = Mat(params.card.num_goal_states, params.card.num_goal_states);
    for (int gh = 0; gh < params.card.num_goal_states; ++gh)
        for (int ga = 0; ga < params.card.num_goal_states; ++ga)
            dist.joint(gh, ga) = p_home[gh] * p_away[ga];
    return dist;
}

PredictionTriple wdl(const ScorelineDistribution& dist) {
    PredictionTriple t{0.0, 0.0, 0.0};
    for (int gh = 0; gh < dist.joint.rows; ++gh)
        for (int ga = 0; ga < dist.joint.cols; ++ga) {
            if (gh > ga) t.p_home_win += dist.joint(gh, ga);
            else if (gh == ga) t.p_draw += dist.joint(gh, ga);
            else t.p_away_win += dist.joint(gh, ga);
        }
    return t;
}

std::vector<TimelinePoint> timeline(int team, Role role, const Posterior& posterior,
                                    const Schedule& schedule) {
    if (team < 0 || team >= static_cast<int>(posterior.weeks.size()))
        throw std::runtime_error("unknown team id " + std::to_string(team));
    std::vector<TimelinePoint> out;
    for (size_t p = 0; p < posterior.weeks[team].size(); ++p) {
        if (!posterior.plays[team][p]) continue;  // bridge entries are gaps
        const Vec& gamma = role == Role::kOffense ? posterior.gamma_o[team][p]
                                                  : posterior.gamma_d[team][p];
        int week = posterior.weeks[team][p];
        out.push_back({week, schedule.week_dates[week], strength_expectation(gamma)});
    }
    return out;
}

PoissonDeviationReport poisson_deviation(const Cpt& cpt, int offense_state, int defense_state) {
    PoissonDeviationReport report;
    report.cpt_distribution.resize(cpt.g);
    for (int g = 0; g < cpt.g; ++g)
        report.cpt_distribution[g] = cpt(offense_state, defense_state, g);
    report.lambda = cpt.expected_goals(offense_state, defense_state);

    report.poisson_distribution.resize(cpt.g);
    double term = std::exp(-report.lambda);  // pmf(0)
    for (int g = 0; g < cpt.g; ++g) {
        report.poisson_distribution[g] = term;
        term *= report.lambda / (g + 1);
    }
    normalize_in_place(report.poisson_distribution);
    report.total_variation =
        total_variation(report.cpt_distribution, report.poisson_distribution);
    return report;
}

std::string timeline_csv(const std::vector<TimelinePoint>& points, const std::string& team_name,
                         Role role) {
    std::string out = "team,role,week,date,strength\n";
    char buf[64];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, ",%d,%s,%.6f\n", p.week, p.date.iso().c_str(), p.strength);
        out += team_name + (role == Role::kOffense ? ",offense" : ",defense") + buf;
    }
    return out;
}

std::string predictions_csv(const std::vector<PredictionRow>& rows, int num_goal_states) {
    std::string out = "date,home,away,p_home_win,p_draw,p_away_win";
    for (int gh = 0; gh < num_goal_states; ++gh)
        for (int ga = 0; ga < num_goal_states; ++ga)
            out += ",j_" + std::to_string(gh) + "_" + std::to_string(ga);
    out += '\n';
    char buf[64];
    for (const auto& r : rows) {
        out += r.date.iso() + "," + r.home + "," + r.away;
        std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%.10g", r.triple.p_home_win, r.triple.p_draw,
                      r.triple.p_away_win);
        out += buf;
        for (int gh = 0; gh < num_goal_states; ++gh)
            for (int ga = 0; ga < num_goal_states; ++ga) {
                std::snprintf(buf, sizeof buf, ",%.10g", r.scoreline.joint(gh, ga));
                out += buf;
            }
        out += '\n';
    }
    return out;
}

}  // namespace formline
