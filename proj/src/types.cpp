#include "formline/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace formline {

namespace {

std::string idx(int i) { return "[" + std::to_string(i) + "]"; }
std::string idx(int i, int j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void check_distribution(std::vector<std::string>& out, const Vec& v, int expected_len,
                        const std::string& name, double tol) {
    if (static_cast<int>(v.size()) != expected_len) {
        out.push_back(name + " has length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(expected_len));
        return;
    }
    double sum = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0))
            out.push_back(name + idx(static_cast<int>(i)) + " negative entry");
        sum += v[i];
    }
    if (std::abs(sum - 1.0) > tol)
        out.push_back(name + " sums to " + std::to_string(sum));
}

}  // namespace

Mat Mat::identity(int n) {
    Mat m(n, n, 0.0);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::uniform_rows(int n) { return Mat(n, n, 1.0 / n); }

double Cpt::expected_goals(int i, int j) const {
    double e = 0.0;
    for (int k = 0; k < g; ++k) e += k * (*this)(i, j, k);
    return e;
}

std::vector<std::string> Cardinalities::validate() const {
    std::vector<std::string> out;
    if (num_strength_states < 2) out.push_back("num_strength_states < 2");
    if (num_goal_states < 2) out.push_back("num_goal_states < 2");
    return out;
}

int Schedule::match_count() const {
    int n = 0;
    for (const auto& w : weeks) n += static_cast<int>(w.size());
    return n;
}

std::vector<const MatchRecord*> Schedule::matches_flat() const {
    std::vector<const MatchRecord*> out;
    out.reserve(match_count());
    for (const auto& w : weeks)
        for (const auto& m : w) out.push_back(&m);
    return out;
}

void Schedule::rebuild_presence() {
    presence.assign(num_teams, {});
    std::vector<std::vector<int>> played(num_teams);
    for (int w = 0; w < num_weeks(); ++w) {
        for (const auto& m : weeks[w]) {
            played[m.home].push_back(w);
            played[m.away].push_back(w);
        }
    }
    // Ascending boundary list for crossing counts.
    std::vector<int> bounds(season_boundaries.begin(), season_boundaries.end());
    for (int t = 0; t < num_teams; ++t) {
        auto& ws = played[t];
        std::sort(ws.begin(), ws.end());
        ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
        auto& pres = presence[t];
        for (size_t i = 0; i < ws.size(); ++i) {
            if (i > 0) {
                // Bridge entries at all but the last boundary crossed.
                std::vector<int> crossed;
                for (int b : bounds)
                    if (b > ws[i - 1] && b <= ws[i]) crossed.push_back(b);
                for (size_t c = 0; c + 1 < crossed.size(); ++c)
                    pres.push_back({crossed[c], false});
            }
            pres.push_back({ws[i], true});
        }
    }
}

Schedule Schedule::truncated(int week_count) const {
    if (week_count < 0 || week_count > num_weeks())
        throw std::runtime_error("truncation week out of range");
    Schedule out;
    out.weeks.assign(weeks.begin(), weeks.begin() + week_count);
    out.week_dates.assign(week_dates.begin(), week_dates.begin() + week_count);
    for (int b : season_boundaries)
        if (b < week_count) out.season_boundaries.insert(b);
    out.num_teams = num_teams;
    out.team_names = team_names;
    out.rebuild_presence();
    return out;
}

std::vector<std::string> Schedule::validate() const {
    std::vector<std::string> out;
    if (weeks.size() != week_dates.size())
        out.push_back("weeks and week_dates length mismatch");
    for (int w = 0; w < num_weeks(); ++w) {
        std::unordered_set<int> seen;
        for (const auto& m : weeks[w]) {
            if (m.home == m.away)
                out.push_back("match with home == away in week " + std::to_string(w));
            if (m.home < 0 || m.home >= num_teams || m.away < 0 || m.away >= num_teams)
                out.push_back("team id out of range in week " + std::to_string(w));
            for (int t : {m.home, m.away}) {
                if (!seen.insert(t).second)
                    out.push_back("team " + std::to_string(t) + " plays twice in week " +
                                  std::to_string(w));
            }
        }
        if (w > 0 && !(week_dates[w - 1] < week_dates[w]))
            out.push_back("week_dates not strictly increasing at week " + std::to_string(w));
    }
    for (int b : season_boundaries)
        if (b <= 0 || b >= num_weeks())
            out.push_back("season boundary out of range: " + std::to_string(b));
    return out;
}

ModelParams ModelParams::uniform(const Cardinalities& card) {
    const int s = card.num_strength_states;
    const int g = card.num_goal_states;
    ModelParams p;
    p.card = card;
    p.pi.assign(s, 1.0 / s);
    p.rho.assign(s, 1.0 / s);
    p.omega_within = Mat::uniform_rows(s);
    p.omega_between = Mat::uniform_rows(s);
    p.delta_within = Mat::uniform_rows(s);
    p.delta_between = Mat::uniform_rows(s);
    p.psi = Cpt(s, s, g, 1.0 / g);
    p.gamma_cpt = Cpt(s, s, g, 1.0 / g);
    return p;
}

std::vector<std::string> Hyperparams::validate() const {
    std::vector<std::string> out;
    auto check_alpha = [&](const Mat& m, const std::string& name) {
        for (int j = 0; j < m.rows; ++j) {
            for (int k = 0; k < m.cols; ++k) {
                if (!(m(j, k) >= 1.0))
                    out.push_back(name + " entry " + idx(j, k) + " below 1");
                if (k != j && !(m(j, j) > m(j, k)))
                    out.push_back(name + " row " + std::to_string(j) +
                                  " not diagonally dominant at column " + std::to_string(k));
            }
        }
    };
    check_alpha(alpha_within, "alpha_within");
    check_alpha(alpha_between, "alpha_between");
    for (size_t g = 0; g < beta.size(); ++g)
        if (!(beta[g] >= 1.0)) out.push_back("beta" + idx(static_cast<int>(g)) + " below 1");
    for (size_t g = 0; g < phi.size(); ++g)
        if (!(phi[g] >= 1.0)) out.push_back("phi" + idx(static_cast<int>(g)) + " below 1");
    return out;
}

int Posterior::presence_index(int team, int week) const {
    if (team < 0 || team >= static_cast<int>(weeks.size())) return -1;
    const auto& ws = weeks[team];
    auto it = std::lower_bound(ws.begin(), ws.end(), week);
    if (it == ws.end() || *it != week) return -1;
    return static_cast<int>(it - ws.begin());
}

std::vector<std::string> Posterior::validate() const {
    std::vector<std::string> out;
    const double tol = 1e-9;
    auto check_joint = [&](const Mat& m, const std::string& name) {
        double sum = 0.0;
        for (double x : m.a) {
            if (!(x >= 0.0)) out.push_back(name + " negative entry");
            sum += x;
        }
        if (std::abs(sum - 1.0) > tol) out.push_back(name + " sums to " + std::to_string(sum));
    };
    for (size_t t = 0; t < gamma_o.size(); ++t) {
        for (size_t p = 0; p < gamma_o[t].size(); ++p) {
            check_distribution(out, gamma_o[t][p], num_states,
                               "gamma_o[t=" + std::to_string(t) + "][" + std::to_string(p) + "]",
                               tol);
            check_distribution(out, gamma_d[t][p], num_states,
                               "gamma_d[t=" + std::to_string(t) + "][" + std::to_string(p) + "]",
                               tol);
        }
        for (size_t e = 0; e < xi_o[t].size(); ++e) {
            check_joint(xi_o[t][e], "xi_o[t=" + std::to_string(t) + "][" + std::to_string(e) + "]");
            check_joint(xi_d[t][e], "xi_d[t=" + std::to_string(t) + "][" + std::to_string(e) + "]");
        }
    }
    for (size_t m = 0; m < zeta_home.size(); ++m) {
        check_joint(zeta_home[m], "zeta_home[" + std::to_string(m) + "]");
        check_joint(zeta_away[m], "zeta_away[" + std::to_string(m) + "]");
    }
    return out;
}

double PredictionTriple::prob_of(int outcome) const {
    switch (outcome) {
        case 0: return p_home_win;
        case 1: return p_draw;
        case 2: return p_away_win;
        default: throw std::runtime_error("bad outcome index");
    }
}

std::vector<std::string> PredictionTriple::validate() const {
    std::vector<std::string> out;
    check_distribution(out, Vec{p_home_win, p_draw, p_away_win}, 3, "prediction", 1e-9);
    return out;
}

int match_outcome(const MatchRecord& m) {
    // Outcome uses raw goals so the cap cannot turn a win into a draw.
    if (m.raw_home_goals > m.raw_away_goals) return 0;
    if (m.raw_home_goals == m.raw_away_goals) return 1;
    return 2;
}

std::vector<std::string> validate_params(const ModelParams& p) {
    std::vector<std::string> out;
    const int s = p.card.num_strength_states;
    const int g = p.card.num_goal_states;
    const double tol = 1e-12;
    check_distribution(out, p.pi, s, "pi", tol);
    check_distribution(out, p.rho, s, "rho", tol);
    auto check_matrix = [&](const Mat& m, const std::string& name) {
        if (m.rows != s || m.cols != s) {
            out.push_back(name + " has wrong shape");
            return;
        }
        for (int r = 0; r < s; ++r) {
            double sum = 0.0;
            for (int c = 0; c < s; ++c) {
                if (!(m(r, c) >= 0.0)) out.push_back(name + idx(r, c) + " negative entry");
                sum += m(r, c);
            }
            if (std::abs(sum - 1.0) > tol)
                out.push_back(name + " row " + std::to_string(r) + " sums to " +
                              std::to_string(sum));
        }
    };
    check_matrix(p.omega_within, "omega_within");
    check_matrix(p.omega_between, "omega_between");
    check_matrix(p.delta_within, "delta_within");
    check_matrix(p.delta_between, "delta_between");
    auto check_cpt = [&](const Cpt& c, const std::string& name) {
        if (c.s1 != s || c.s2 != s || c.g != g) {
            out.push_back(name + " has wrong shape");
            return;
        }
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j) {
                double sum = 0.0;
                for (int k = 0; k < g; ++k) {
                    if (!(c(i, j, k) >= 0.0))
                        out.push_back(name + " row " + idx(i, j) + " negative entry");
                    sum += c(i, j, k);
                }
                if (std::abs(sum - 1.0) > tol)
                    out.push_back(name + " row " + idx(i, j) + " sums to " + std::to_string(sum));
            }
        }
        // Monotone expected goals: non-decreasing in offense, non-increasing in
        // defense. Small slack absorbs solver round-off.
        const double mono_tol = 1e-9;
        for (int j = 0; j < s; ++j)
            for (int i = 0; i + 1 < s; ++i)
                if (c.expected_goals(i + 1, j) < c.expected_goals(i, j) - mono_tol)
                    out.push_back(name + " expected goals not non-decreasing in offense at " +
                                  idx(i, j));
        for (int i = 0; i < s; ++i)
            for (int j = 0; j + 1 < s; ++j)
                if (c.expected_goals(i, j + 1) > c.expected_goals(i, j) + mono_tol)
                    out.push_back(name + " expected goals not non-increasing in defense at " +
                                  idx(i, j));
    };
    check_cpt(p.psi, "psi");
    check_cpt(p.gamma_cpt, "gamma_cpt");
    return out;
}

double strength_expectation(const Vec& dist) {
    const int s = static_cast<int>(dist.size());
    if (s < 1) throw std::runtime_error("empty distribution");
    double sum = 0.0, e = 0.0;
    for (int i = 0; i < s; ++i) {
        sum += dist[i];
        e += i * dist[i];
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::runtime_error("strength_expectation: input not normalized");
    if (s == 1) return 0.0;
    return 100.0 * e / (s - 1);
}

double vec_sum(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

bool try_normalize(Vec& v) {
    double s = vec_sum(v);
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    for (double& x : v) x /= s;
    return true;
}

void normalize_in_place(Vec& v) {
    if (!try_normalize(v)) throw std::runtime_error("cannot normalize all-zero vector");
}

void normalize_rows(Mat& m) {
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += m(r, c);
        if (!(s > 0.0)) throw std::runtime_error("cannot normalize all-zero row");
        for (int c = 0; c < m.cols; ++c) m(r, c) /= s;
    }
}

double l1_distance(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

double total_variation(const Vec& a, const Vec& b) { return 0.5 * l1_distance(a, b); }

}  // namespace formline
