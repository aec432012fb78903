#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "formline/dates.hpp"

namespace formline {

using Vec = std::vector<double>;

// Dense row-major matrix. Sized for strength-state arithmetic (S is small),
// so no linear-algebra library is pulled in.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    static Mat identity(int n);
    static Mat uniform_rows(int n);

    bool operator==(const Mat&) const = default;
};

// Conditional probability table indexed [offense state][defense state][goals].
struct Cpt {
    int s1 = 0;  // offense states
    int s2 = 0;  // defense states
    int g = 0;   // goal states
    std::vector<double> a;

    Cpt() = default;
    Cpt(int s1_, int s2_, int g_, double fill = 0.0)
        : s1(s1_), s2(s2_), g(g_), a(static_cast<size_t>(s1_) * s2_ * g_, fill) {}

    double& operator()(int i, int j, int k) {
        return a[(static_cast<size_t>(i) * s2 + j) * g + k];
    }
    double operator()(int i, int j, int k) const {
        return a[(static_cast<size_t>(i) * s2 + j) * g + k];
    }

    // Expected goals for a fixed (offense, defense) pair.
    double expected_goals(int i, int j) const;

    bool operator==(const Cpt&) const = default;
};

struct Cardinalities {
    int num_strength_states = 4;  // S
    int num_goal_states = 5;      // G = G_max + 1, goal values 0..G_max

    int goal_cap() const { return num_goal_states - 1; }
    std::vector<std::string> validate() const;

    bool operator==(const Cardinalities&) const = default;
};

struct MatchRecord {
    Date date;
    int home = -1;
    int away = -1;
    int home_goals = 0;  // capped at goal_cap
    int away_goals = 0;
    int raw_home_goals = 0;
    int raw_away_goals = 0;
    std::optional<std::array<double, 3>> odds;  // decimal home/draw/away, each > 1
    std::string season;                         // empty when the source had no season column

    bool operator==(const MatchRecord&) const = default;
};

// Match schedule bucketed into populated week windows, 0-based week indices.
struct Schedule {
    struct PresenceEntry {
        int week = 0;
        bool plays = false;  // false for a between-season bridge node
        bool operator==(const PresenceEntry&) const = default;
    };

    std::vector<std::vector<MatchRecord>> weeks;
    std::vector<Date> week_dates;      // first match date per bucket
    std::set<int> season_boundaries;   // w in set: week w-1 and w are different seasons
    int num_teams = 0;
    std::vector<std::string> team_names;  // id -> name
    std::vector<std::vector<PresenceEntry>> presence;  // per team, ascending week

    int num_weeks() const { return static_cast<int>(weeks.size()); }
    int match_count() const;
    std::vector<const MatchRecord*> matches_flat() const;  // week order, stable in-week order

    // Weeks [0, week_count) only; presence and boundaries recomputed. Team ids
    // and names are preserved so trained models keep working on the view.
    Schedule truncated(int week_count) const;

    // Recomputes presence from weeks/season_boundaries (used after construction
    // or truncation). Bridging rule: nodes at played weeks; consecutive played
    // weeks in the same season share one within-season edge; a gap that crosses
    // k season boundaries gets k between-season edges via k-1 bridge entries
    // placed at the boundary weeks.
    void rebuild_presence();

    std::vector<std::string> validate() const;
};

// theta = {pi, rho, Omega, Delta, Psi, Gamma} with within/between-season
// transition variants.
struct ModelParams {
    Cardinalities card;
    Vec pi;              // initial offense distribution, length S
    Vec rho;             // initial defense distribution, length S
    Mat omega_within;    // offense transitions, S x S row-stochastic
    Mat omega_between;
    Mat delta_within;    // defense transitions
    Mat delta_between;
    Cpt psi;             // home emission, [home offense][away defense][home goals]
    Cpt gamma_cpt;       // away emission, [away offense][home defense][away goals]

    static ModelParams uniform(const Cardinalities& card);

    bool operator==(const ModelParams&) const = default;
};

// Lambda = {A, beta, phi} plus the pseudocount totals they were built from.
struct Hyperparams {
    Mat alpha_within;   // transition Dirichlet, S x S, entries >= 1
    Mat alpha_between;
    Vec beta;           // home emission Dirichlet, length G
    Vec phi;            // away emission Dirichlet, length G
    double c_transition = 87.0;
    double c_goal = 236.0;

    std::vector<std::string> validate() const;

    bool operator==(const Hyperparams&) const = default;
};

// E-step sufficient statistics, aligned with Schedule presence:
// gamma_*[t][p] is the marginal at presence entry p of team t,
// xi_*[t][e] the joint over presence entries (e, e+1),
// zeta_*[m] the joint for match m in schedule flat order.
struct Posterior {
    int num_states = 0;
    std::vector<std::vector<int>> weeks;          // per team: presence weeks
    std::vector<std::vector<uint8_t>> plays;      // per team: 1 if the entry is a played week
    std::vector<std::vector<Vec>> gamma_o;
    std::vector<std::vector<Vec>> gamma_d;
    std::vector<std::vector<Mat>> xi_o;
    std::vector<std::vector<Mat>> xi_d;
    std::vector<std::vector<uint8_t>> edge_between;  // per team edge: 1 if between-season
    std::vector<Mat> zeta_home;  // per match: joint over (home offense, away defense)
    std::vector<Mat> zeta_away;  // per match: joint over (away offense, home defense)

    // Presence index of `week` for `team`, or -1.
    int presence_index(int team, int week) const;

    std::vector<std::string> validate() const;
};

struct PredictionTriple {
    double p_home_win = 0.0;
    double p_draw = 0.0;
    double p_away_win = 0.0;

    double prob_of(int outcome) const;  // 0 = home win, 1 = draw, 2 = away win
    std::vector<std::string> validate() const;
};

// 0 = home win, 1 = draw, 2 = away win.
int match_outcome(const MatchRecord& m);

// Empty iff all ModelParams invariants hold (including post-training
// monotone expected-goals ordering); each violation names component and index.
std::vector<std::string> validate_params(const ModelParams& params);

// 100 * E[state] / (S-1). Rejects non-normalized input (tolerance 1e-6).
double strength_expectation(const Vec& dist);

// Shared numeric helpers.
double vec_sum(const Vec& v);
void normalize_in_place(Vec& v);          // throws on all-zero
bool try_normalize(Vec& v);               // false on all-zero
void normalize_rows(Mat& m);
double l1_distance(const Vec& a, const Vec& b);
double total_variation(const Vec& a, const Vec& b);

}  // namespace formline
