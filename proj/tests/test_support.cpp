#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace formline::testing {

namespace {

const Date kAnchor{2000, 1, 1};

Vec expected_sorted_projection_helper;

}  // namespace

Schedule make_schedule(int num_teams, int num_weeks, const std::vector<MatchSpec>& matches,
                       const std::set<int>& boundaries) {
    Schedule s;
    s.num_teams = num_teams;
    for (int t = 0; t < num_teams; ++t) s.team_names.push_back("T" + std::to_string(t));
    s.weeks.resize(num_weeks);
    for (int w = 0; w < num_weeks; ++w) s.week_dates.push_back(kAnchor.plus_days(7 * w));
    for (const auto& spec : matches) {
        MatchRecord m;
        m.date = s.week_dates[spec.week];
        m.home = spec.home;
        m.away = spec.away;
        m.home_goals = spec.home_goals;
        m.away_goals = spec.away_goals;
        m.raw_home_goals = spec.home_goals;
        m.raw_away_goals = spec.away_goals;
        s.weeks[spec.week].push_back(m);
    }
    s.season_boundaries = boundaries;
    s.rebuild_presence();
    return s;
}

Schedule chain_only_schedule(int num_teams, int num_weeks, const std::set<int>& boundaries) {
    Schedule s = make_schedule(num_teams, num_weeks, {}, boundaries);
    for (int t = 0; t < num_teams; ++t) {
        s.presence[t].clear();
        for (int w = 0; w < num_weeks; ++w) s.presence[t].push_back({w, true});
    }
    return s;
}

ModelParams random_params(Rng& rng, const Cardinalities& card, bool monotone_emissions) {
    const int s = card.num_strength_states;
    const int g = card.num_goal_states;
    ModelParams p;
    p.card = card;
    p.pi = rng.dirichlet_symmetric(s, 1.0);
    p.rho = rng.dirichlet_symmetric(s, 1.0);
    auto random_matrix = [&] {
        Mat m(s, s);
        for (int r = 0; r < s; ++r) {
            Vec row = rng.dirichlet_symmetric(s, 1.0);
            for (int c = 0; c < s; ++c) m(r, c) = row[c];
        }
        return m;
    };
    p.omega_within = random_matrix();
    p.omega_between = random_matrix();
    p.delta_within = random_matrix();
    p.delta_between = random_matrix();

    auto random_cpt = [&] {
        Cpt c(s, s, g);
        std::vector<std::vector<Vec>> rows(s, std::vector<Vec>(s));
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) rows[i][j] = rng.dirichlet_symmetric(g, 1.0);
        if (monotone_emissions) {
            auto expected = [&](const Vec& row) {
                double e = 0.0;
                for (int k = 0; k < g; ++k) e += k * row[k];
                return e;
            };
            for (int j = 0; j < s; ++j) {
                std::vector<Vec> col(s);
                for (int i = 0; i < s; ++i) col[i] = rows[i][j];
                std::sort(col.begin(), col.end(), [&](const Vec& a, const Vec& b) {
                    return expected(a) < expected(b);
                });
                for (int i = 0; i < s; ++i) rows[i][j] = col[i];
            }
            for (int i = 0; i < s; ++i)
                std::sort(rows[i].begin(), rows[i].end(), [&](const Vec& a, const Vec& b) {
                    return expected(a) > expected(b);
                });
        }
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                for (int k = 0; k < g; ++k) c(i, j, k) = rows[i][j][k];
        return c;
    };
    p.psi = random_cpt();
    p.gamma_cpt = random_cpt();
    return p;
}

Schedule round_robin_schedule(Rng& rng, int num_goal_states) {
    auto goal = [&] { return rng.uniform_int(0, num_goal_states - 1); };
    return make_schedule(3, 3,
                         {
                             {0, 0, 1, goal(), goal()},
                             {1, 0, 2, goal(), goal()},
                             {2, 1, 2, goal(), goal()},
                         });
}

Schedule random_forest_schedule(Rng& rng, int num_goal_states) {
    for (;;) {
        int teams = rng.uniform_int(1, 3);
        int weeks = rng.uniform_int(1, 4);
        std::vector<MatchSpec> matches;
        for (int w = 0; w < weeks; ++w) {
            if (teams < 2) break;
            if (rng.uniform() < 0.6) {
                int home = rng.uniform_int(0, teams - 1);
                int away = rng.uniform_int(0, teams - 1);
                if (home == away) continue;
                matches.push_back({w, home, away, rng.uniform_int(0, num_goal_states - 1),
                                   rng.uniform_int(0, num_goal_states - 1)});
            }
        }
        std::set<int> boundaries;
        if (weeks > 1 && rng.uniform() < 0.3) boundaries.insert(rng.uniform_int(1, weeks - 1));
        Schedule s = make_schedule(teams, weeks, matches, boundaries);
        // Keep only weeks that actually contain matches (populated windows).
        std::vector<std::vector<MatchRecord>> kept;
        std::vector<Date> kept_dates;
        std::set<int> kept_bounds;
        bool pending_boundary = false;
        for (int w = 0; w < s.num_weeks(); ++w) {
            if (s.season_boundaries.count(w)) pending_boundary = true;
            if (s.weeks[w].empty()) continue;
            if (pending_boundary && !kept.empty())
                kept_bounds.insert(static_cast<int>(kept.size()));
            pending_boundary = false;
            kept.push_back(s.weeks[w]);
            kept_dates.push_back(s.week_dates[w]);
        }
        if (kept.empty()) continue;
        s.weeks = kept;
        s.week_dates = kept_dates;
        s.season_boundaries = kept_bounds;
        s.rebuild_presence();

        int dims = 0;
        for (const auto& pres : s.presence) dims += 2 * static_cast<int>(pres.size());
        if (dims == 0 || dims > 20) continue;
        Cardinalities card{2, num_goal_states};
        if (!build_graph(s, card).is_forest) continue;
        return s;
    }
}

Schedule league_skeleton(Rng& rng, int num_teams, int num_weeks, int season_length) {
    if (num_teams % 2 != 0) throw std::runtime_error("league_skeleton: even team count required");
    Schedule s;
    s.num_teams = num_teams;
    for (int t = 0; t < num_teams; ++t) s.team_names.push_back("T" + std::to_string(t));
    s.weeks.resize(num_weeks);
    int breaks_before = 0;
    for (int w = 0; w < num_weeks; ++w) {
        if (season_length > 0 && w > 0 && w % season_length == 0) {
            ++breaks_before;
            s.season_boundaries.insert(w);
        }
        s.week_dates.push_back(kAnchor.plus_days(7 * w + 60 * breaks_before));
        std::vector<int> order(num_teams);
        for (int t = 0; t < num_teams; ++t) order[t] = t;
        // Fisher-Yates with the portable rng.
        for (int i = num_teams - 1; i > 0; --i)
            std::swap(order[i], order[rng.uniform_int(0, i)]);
        for (int i = 0; i + 1 < num_teams; i += 2) {
            MatchRecord m;
            m.date = s.week_dates[w];
            m.home = order[i];
            m.away = order[i + 1];
            s.weeks[w].push_back(m);
        }
    }
    s.rebuild_presence();
    return s;
}

double max_gamma_diff(const Posterior& a, const Posterior& b) {
    double worst = 0.0;
    for (size_t t = 0; t < a.gamma_o.size(); ++t)
        for (size_t p = 0; p < a.gamma_o[t].size(); ++p)
            for (int i = 0; i < a.num_states; ++i) {
                worst = std::max(worst, std::abs(a.gamma_o[t][p][i] - b.gamma_o[t][p][i]));
                worst = std::max(worst, std::abs(a.gamma_d[t][p][i] - b.gamma_d[t][p][i]));
            }
    return worst;
}

double max_posterior_diff(const Posterior& a, const Posterior& b) {
    double worst = max_gamma_diff(a, b);
    for (size_t t = 0; t < a.xi_o.size(); ++t)
        for (size_t e = 0; e < a.xi_o[t].size(); ++e)
            for (size_t n = 0; n < a.xi_o[t][e].a.size(); ++n) {
                worst = std::max(worst, std::abs(a.xi_o[t][e].a[n] - b.xi_o[t][e].a[n]));
                worst = std::max(worst, std::abs(a.xi_d[t][e].a[n] - b.xi_d[t][e].a[n]));
            }
    for (size_t m = 0; m < a.zeta_home.size(); ++m)
        for (size_t n = 0; n < a.zeta_home[m].a.size(); ++n) {
            worst = std::max(worst, std::abs(a.zeta_home[m].a[n] - b.zeta_home[m].a[n]));
            worst = std::max(worst, std::abs(a.zeta_away[m].a[n] - b.zeta_away[m].a[n]));
        }
    return worst;
}

Vec numeric_simplex_max(const Vec& weights, int iters) {
    const int n = static_cast<int>(weights.size());
    Vec logits(n, 0.0);
    Vec p(n, 1.0 / n);
    auto refresh = [&] {
        double mx = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            p[i] = std::exp(logits[i] - mx);
            sum += p[i];
        }
        for (int i = 0; i < n; ++i) p[i] /= sum;
    };
    double total = 0.0;
    for (double w : weights) total += w;
    double step = total > 0.0 ? 1.0 / total : 1.0;
    for (int it = 0; it < iters; ++it) {
        refresh();
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += weights[i];
        // Softmax-space gradient of sum w ln p: w_i - p_i * sum(w).
        for (int i = 0; i < n; ++i) logits[i] += step * (weights[i] - p[i] * dot);
    }
    refresh();
    return p;
}

}  // namespace formline::testing
