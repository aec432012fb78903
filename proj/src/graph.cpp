#include "formline/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace formline {

namespace {

// Union-find for forest detection.
struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    // Returns false if x and y were already connected.
    bool unite(int x, int y) {
        int rx = find(x), ry = find(y);
        if (rx == ry) return false;
        parent[rx] = ry;
        return true;
    }
};

}  // namespace

int FactorGraph::prior_factor_count() const {
    return static_cast<int>(
        std::count_if(factors.begin(), factors.end(),
                      [](const Factor& f) { return f.kind == kPrior; }));
}

int FactorGraph::transition_factor_count() const {
    return static_cast<int>(
        std::count_if(factors.begin(), factors.end(),
                      [](const Factor& f) { return f.kind == kTransition; }));
}

int FactorGraph::emission_factor_count() const {
    return static_cast<int>(std::count_if(factors.begin(), factors.end(), [](const Factor& f) {
        return f.kind == kEmissionHome || f.kind == kEmissionAway;
    }));
}

std::string FactorGraph::var_name(int v) const {
    const Var& var = vars[v];
    return "team " + std::to_string(var.team) +
           (var.role == kOffense ? " offense" : " defense") + " week " +
           std::to_string(var.week);
}

FactorGraph build_graph(const Schedule& schedule, const Cardinalities& card) {
    FactorGraph g;
    g.card = card;
    g.num_teams = schedule.num_teams;
    g.num_weeks = schedule.num_weeks();
    g.presence_weeks.resize(g.num_teams);
    g.presence_plays.resize(g.num_teams);
    g.edge_between.resize(g.num_teams);

    // Variables: per team, per presence entry, offense then defense.
    std::vector<int> base(g.num_teams, 0);
    std::vector<std::unordered_map<int, int>> week_to_presence(g.num_teams);
    for (int t = 0; t < g.num_teams; ++t) {
        base[t] = g.var_count();
        const auto& pres = schedule.presence[t];
        for (size_t p = 0; p < pres.size(); ++p) {
            g.presence_weeks[t].push_back(pres[p].week);
            g.presence_plays[t].push_back(pres[p].plays ? 1 : 0);
            week_to_presence[t][pres[p].week] = static_cast<int>(p);
            g.vars.push_back({t, pres[p].week, static_cast<int>(p), FactorGraph::kOffense});
            g.vars.push_back({t, pres[p].week, static_cast<int>(p), FactorGraph::kDefense});
        }
    }
    auto var_id = [&](int team, int presence_idx, FactorGraph::Role role) {
        return base[team] + 2 * presence_idx + static_cast<int>(role);
    };

    g.adjacency.resize(g.var_count());
    g.transition_factors_into_week.resize(g.num_weeks);
    g.emission_factors_at_week.resize(g.num_weeks);
    auto add_factor = [&](FactorGraph::Factor f) {
        int id = static_cast<int>(g.factors.size());
        g.adjacency[f.var_a].push_back(id);
        if (f.var_b >= 0) g.adjacency[f.var_b].push_back(id);
        g.factors.push_back(f);
        return id;
    };

    // Priors at chain heads, transitions along chains.
    for (int t = 0; t < g.num_teams; ++t) {
        const auto& pres = schedule.presence[t];
        if (pres.empty()) continue;
        for (auto role : {FactorGraph::kOffense, FactorGraph::kDefense}) {
            FactorGraph::Factor prior;
            prior.kind = FactorGraph::kPrior;
            prior.var_a = var_id(t, 0, role);
            add_factor(prior);
        }
        for (size_t e = 0; e + 1 < pres.size(); ++e) {
            bool between = false;
            for (int b : schedule.season_boundaries)
                if (b > pres[e].week && b <= pres[e + 1].week) between = true;
            g.edge_between[t].push_back(between ? 1 : 0);
            for (auto role : {FactorGraph::kOffense, FactorGraph::kDefense}) {
                FactorGraph::Factor f;
                f.kind = FactorGraph::kTransition;
                f.var_a = var_id(t, static_cast<int>(e), role);
                f.var_b = var_id(t, static_cast<int>(e) + 1, role);
                f.between = between;
                f.edge_idx = static_cast<int>(e);
                int id = add_factor(f);
                g.transition_factors_into_week[pres[e + 1].week].push_back(id);
            }
        }
    }

    // Emission factors, observed goals folded in as evidence.
    for (int w = 0; w < g.num_weeks; ++w) {
        for (const auto& m : schedule.weeks[w]) {
            int match_idx = static_cast<int>(g.matches.size());
            g.matches.push_back({w, m.home, m.away, m.home_goals, m.away_goals});
            FactorGraph::Factor home;
            home.kind = FactorGraph::kEmissionHome;
            home.var_a = var_id(m.home, week_to_presence[m.home].at(w), FactorGraph::kOffense);
            home.var_b = var_id(m.away, week_to_presence[m.away].at(w), FactorGraph::kDefense);
            home.match_idx = match_idx;
            home.observed_goals = m.home_goals;
            g.emission_factors_at_week[w].push_back(add_factor(home));
            FactorGraph::Factor away;
            away.kind = FactorGraph::kEmissionAway;
            away.var_a = var_id(m.away, week_to_presence[m.away].at(w), FactorGraph::kOffense);
            away.var_b = var_id(m.home, week_to_presence[m.home].at(w), FactorGraph::kDefense);
            away.match_idx = match_idx;
            away.observed_goals = m.away_goals;
            g.emission_factors_at_week[w].push_back(add_factor(away));
        }
    }

    DisjointSet ds(g.var_count());
    g.is_forest = true;
    for (const auto& f : g.factors)
        if (f.var_b >= 0 && !ds.unite(f.var_a, f.var_b)) g.is_forest = false;
    return g;
}

Vec emission_message_to_offense(const Cpt& cpt, const Vec& defense_msg, int observed_g) {
    if (observed_g < 0 || observed_g >= cpt.g)
        throw std::runtime_error("observed goal value " + std::to_string(observed_g) +
                                 " out of range [0, " + std::to_string(cpt.g - 1) + "]");
    Vec out(cpt.s1, 0.0);
    for (int i = 0; i < cpt.s1; ++i)
        for (int j = 0; j < cpt.s2; ++j) out[i] += defense_msg[j] * cpt(i, j, observed_g);
    if (!try_normalize(out))
        throw ContradictoryEvidenceError("emission message is all-zero");
    return out;
}

Vec node_marginal(const std::vector<Vec>& incoming) {
    if (incoming.empty()) throw std::runtime_error("node_marginal: no incoming messages");
    Vec out = incoming.front();
    for (size_t m = 1; m < incoming.size(); ++m)
        for (size_t i = 0; i < out.size(); ++i) out[i] *= incoming[m][i];
    if (!try_normalize(out))
        throw ContradictoryEvidenceError("contradictory evidence: all-zero node marginal");
    return out;
}

Mat pairwise_marginal(const Vec& left_msg, const Vec& right_msg, const Mat& transition) {
    Mat out(transition.rows, transition.cols);
    double sum = 0.0;
    for (int i = 0; i < transition.rows; ++i)
        for (int j = 0; j < transition.cols; ++j) {
            out(i, j) = left_msg[i] * transition(i, j) * right_msg[j];
            sum += out(i, j);
        }
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw ContradictoryEvidenceError("contradictory evidence: all-zero pairwise marginal");
    for (double& x : out.a) x /= sum;
    return out;
}

Mat match_pair_marginal(const Vec& offense_msg, const Vec& defense_msg, const Cpt& cpt,
                        int observed_g) {
    if (observed_g < 0 || observed_g >= cpt.g)
        throw std::runtime_error("observed goal value out of range");
    Mat out(cpt.s1, cpt.s2);
    double sum = 0.0;
    for (int i = 0; i < cpt.s1; ++i)
        for (int j = 0; j < cpt.s2; ++j) {
            out(i, j) = offense_msg[i] * defense_msg[j] * cpt(i, j, observed_g);
            sum += out(i, j);
        }
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw ContradictoryEvidenceError("contradictory evidence: all-zero match marginal");
    for (double& x : out.a) x /= sum;
    return out;
}

namespace {

class BpState {
public:
    BpState(const FactorGraph& g, const ModelParams& params, const BpOptions& opts)
        : g_(g), params_(params), opts_(opts), s_(params.card.num_strength_states) {
        Vec uniform(s_, 1.0 / s_);
        to_var_.resize(g.factors.size());
        from_var_.resize(g.factors.size());
        for (size_t f = 0; f < g.factors.size(); ++f) {
            to_var_[f] = {uniform, uniform};
            from_var_[f] = {uniform, uniform};
        }
        // Prior messages are fixed for the whole run.
        for (size_t f = 0; f < g.factors.size(); ++f) {
            if (g.factors[f].kind != FactorGraph::kPrior) continue;
            const auto& var = g.vars[g.factors[f].var_a];
            to_var_[f][0] = var.role == FactorGraph::kOffense ? params.pi : params.rho;
            if (!try_normalize(to_var_[f][0]))
                throw ContradictoryEvidenceError("prior distribution is all-zero");
        }
    }

    // Max L1 change over factor->variable messages in the cycle.
    double run_cycle() {
        max_delta_ = 0.0;
        for (int w = 0; w < g_.num_weeks; ++w) {
            for (int f : g_.transition_factors_into_week[w]) {
                update_from_var(f, 0);
                update_to_var(f, 1);
            }
            for (int f : g_.emission_factors_at_week[w]) update_emission(f);
        }
        for (int w = g_.num_weeks - 1; w >= 0; --w) {
            for (int f : g_.emission_factors_at_week[w]) update_emission(f);
            for (int f : g_.transition_factors_into_week[w]) {
                update_from_var(f, 1);
                update_to_var(f, 0);
            }
        }
        return max_delta_;
    }

    Posterior extract() const {
        Posterior post;
        post.num_states = s_;
        post.weeks = g_.presence_weeks;
        post.plays = g_.presence_plays;
        post.edge_between = g_.edge_between;
        post.gamma_o.resize(g_.num_teams);
        post.gamma_d.resize(g_.num_teams);
        post.xi_o.resize(g_.num_teams);
        post.xi_d.resize(g_.num_teams);
        for (int t = 0; t < g_.num_teams; ++t) {
            size_t n = g_.presence_weeks[t].size();
            post.gamma_o[t].resize(n);
            post.gamma_d[t].resize(n);
            post.xi_o[t].resize(n >= 1 ? n - 1 : 0);
            post.xi_d[t].resize(n >= 1 ? n - 1 : 0);
        }
        post.zeta_home.resize(g_.matches.size());
        post.zeta_away.resize(g_.matches.size());

        for (int v = 0; v < g_.var_count(); ++v) {
            Vec marginal = gather(v, -1);
            if (!try_normalize(marginal))
                throw ContradictoryEvidenceError("contradictory evidence at " + g_.var_name(v));
            const auto& var = g_.vars[v];
            auto& dst = var.role == FactorGraph::kOffense ? post.gamma_o : post.gamma_d;
            dst[var.team][var.presence_idx] = std::move(marginal);
        }
        for (size_t f = 0; f < g_.factors.size(); ++f) {
            const auto& fac = g_.factors[f];
            if (fac.kind == FactorGraph::kTransition) {
                Vec left = gather(fac.var_a, static_cast<int>(f));
                Vec right = gather(fac.var_b, static_cast<int>(f));
                const auto& var = g_.vars[fac.var_a];
                Mat join = pairwise_marginal(left, right, transition_matrix(fac));
                auto& dst = var.role == FactorGraph::kOffense ? post.xi_o : post.xi_d;
                dst[var.team][fac.edge_idx] = std::move(join);
            } else if (fac.kind == FactorGraph::kEmissionHome ||
                       fac.kind == FactorGraph::kEmissionAway) {
                Vec off = gather(fac.var_a, static_cast<int>(f));
                Vec def = gather(fac.var_b, static_cast<int>(f));
                const Cpt& cpt =
                    fac.kind == FactorGraph::kEmissionHome ? params_.psi : params_.gamma_cpt;
                Mat join = match_pair_marginal(off, def, cpt, fac.observed_goals);
                auto& dst = fac.kind == FactorGraph::kEmissionHome ? post.zeta_home
                                                                   : post.zeta_away;
                dst[fac.match_idx] = std::move(join);
            }
        }
        return post;
    }

private:
    int slot_of(int f, int v) const { return g_.factors[f].var_a == v ? 0 : 1; }

    const Mat& transition_matrix(const FactorGraph::Factor& f) const {
        bool offense = g_.vars[f.var_a].role == FactorGraph::kOffense;
        if (offense) return f.between ? params_.omega_between : params_.omega_within;
        return f.between ? params_.delta_between : params_.delta_within;
    }

    double potential(const FactorGraph::Factor& f, int i, int j) const {
        switch (f.kind) {
            case FactorGraph::kTransition: return transition_matrix(f)(i, j);
            case FactorGraph::kEmissionHome: return params_.psi(i, j, f.observed_goals);
            case FactorGraph::kEmissionAway: return params_.gamma_cpt(i, j, f.observed_goals);
            default: throw std::logic_error("potential() on unary factor");
        }
    }

    // Product of factor->var messages into v, excluding factor `except`.
    Vec gather(int v, int except) const {
        Vec out(s_, 1.0);
        for (int f : g_.adjacency[v]) {
            if (f == except) continue;
            const Vec& msg = to_var_[f][slot_of(f, v)];
            for (int i = 0; i < s_; ++i) out[i] *= msg[i];
        }
        return out;
    }

    void update_from_var(int f, int slot) {
        int v = slot == 0 ? g_.factors[f].var_a : g_.factors[f].var_b;
        Vec msg = gather(v, f);
        if (!try_normalize(msg))
            throw ContradictoryEvidenceError("contradictory evidence at " + g_.var_name(v));
        from_var_[f][slot] = std::move(msg);
    }

    void update_to_var(int f, int slot) {
        const auto& fac = g_.factors[f];
        Vec msg(s_, 0.0);
        if (slot == 1) {
            const Vec& src = from_var_[f][0];
            for (int j = 0; j < s_; ++j)
                for (int i = 0; i < s_; ++i) msg[j] += potential(fac, i, j) * src[i];
        } else {
            const Vec& src = from_var_[f][1];
            for (int i = 0; i < s_; ++i)
                for (int j = 0; j < s_; ++j) msg[i] += potential(fac, i, j) * src[j];
        }
        int v = slot == 0 ? fac.var_a : fac.var_b;
        if (!try_normalize(msg))
            throw ContradictoryEvidenceError("contradictory evidence at " + g_.var_name(v));
        if (opts_.damping > 0.0) {
            const Vec& old = to_var_[f][slot];
            for (int i = 0; i < s_; ++i)
                msg[i] = (1.0 - opts_.damping) * msg[i] + opts_.damping * old[i];
        }
        for (int i = 0; i < s_; ++i) {
            if (!std::isfinite(msg[i]))
                throw std::runtime_error("non-finite message at " + g_.var_name(v));
        }
        max_delta_ = std::max(max_delta_, l1_distance(msg, to_var_[f][slot]));
        to_var_[f][slot] = std::move(msg);
    }

    void update_emission(int f) {
        update_from_var(f, 0);
        update_from_var(f, 1);
        update_to_var(f, 0);
        update_to_var(f, 1);
    }

    const FactorGraph& g_;
    const ModelParams& params_;
    const BpOptions& opts_;
    int s_;
    std::vector<std::array<Vec, 2>> to_var_, from_var_;
    double max_delta_ = 0.0;
};

}  // namespace

Posterior run_bp(const FactorGraph& graph, const ModelParams& params, const BpOptions& options) {
    if (options.cycles < 1) throw std::runtime_error("run_bp: cycles must be >= 1");
    if (options.damping < 0.0 || options.damping >= 1.0)
        throw std::runtime_error("run_bp: damping must be in [0, 1)");
    BpState state(graph, params, options);
    for (int c = 0; c < options.cycles; ++c) {
        double delta = state.run_cycle();
        if (options.early_stop && delta < options.early_stop_delta) break;
    }
    return state.extract();
}

namespace {

// weight * ln(param) with 0*ln(0) = 0; flags weight > 0 against param == 0.
double weighted_log(double weight, double param, bool& zero_flag) {
    if (weight == 0.0) return 0.0;
    if (param <= 0.0) {
        zero_flag = true;
        return -std::numeric_limits<double>::infinity();
    }
    return weight * std::log(param);
}

double entropy_of(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

}  // namespace

LogJointResult joint_log_posterior(const FactorGraph& graph, const ModelParams& params,
                                   const Hyperparams& hyper, const Posterior& posterior) {
    LogJointResult r;
    double acc = 0.0;
    bool zero = false;
    const int s = params.card.num_strength_states;

    for (int t = 0; t < graph.num_teams; ++t) {
        if (posterior.gamma_o[t].empty()) continue;
        for (int i = 0; i < s; ++i) {
            acc += weighted_log(posterior.gamma_o[t][0][i], params.pi[i], zero);
            acc += weighted_log(posterior.gamma_d[t][0][i], params.rho[i], zero);
        }
        for (size_t e = 0; e < posterior.xi_o[t].size(); ++e) {
            bool between = posterior.edge_between[t][e] != 0;
            const Mat& omega = between ? params.omega_between : params.omega_within;
            const Mat& delta = between ? params.delta_between : params.delta_within;
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j) {
                    acc += weighted_log(posterior.xi_o[t][e](i, j), omega(i, j), zero);
                    acc += weighted_log(posterior.xi_d[t][e](i, j), delta(i, j), zero);
                }
        }
    }
    for (size_t m = 0; m < graph.matches.size(); ++m) {
        const auto& match = graph.matches[m];
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                acc += weighted_log(posterior.zeta_home[m](i, j),
                                    params.psi(i, j, match.home_goals), zero);
                acc += weighted_log(posterior.zeta_away[m](i, j),
                                    params.gamma_cpt(i, j, match.away_goals), zero);
            }
    }
    // Dirichlet exponents (normalization constant dropped).
    for (int k = 0; k < s; ++k)
        for (int j = 0; j < s; ++j) {
            acc += weighted_log(hyper.alpha_within(k, j) - 1.0, params.omega_within(k, j), zero);
            acc += weighted_log(hyper.alpha_between(k, j) - 1.0, params.omega_between(k, j), zero);
            acc += weighted_log(hyper.alpha_within(k, j) - 1.0, params.delta_within(k, j), zero);
            acc += weighted_log(hyper.alpha_between(k, j) - 1.0, params.delta_between(k, j), zero);
        }
    const int gs = params.card.num_goal_states;
    for (int k = 0; k < s; ++k)
        for (int j = 0; j < s; ++j)
            for (int g = 0; g < gs; ++g) {
                acc += weighted_log(hyper.beta[g] - 1.0, params.psi(k, j, g), zero);
                acc += weighted_log(hyper.phi[g] - 1.0, params.gamma_cpt(k, j, g), zero);
            }
    r.value = acc;
    r.zero_probability_term = zero;
    return r;
}

double posterior_entropy(const FactorGraph& graph, const Posterior& posterior) {
    double h = 0.0;
    // Pairwise belief entropies.
    for (int t = 0; t < graph.num_teams; ++t)
        for (size_t e = 0; e < posterior.xi_o[t].size(); ++e)
            h += entropy_of(posterior.xi_o[t][e].a) + entropy_of(posterior.xi_d[t][e].a);
    for (size_t m = 0; m < posterior.zeta_home.size(); ++m)
        h += entropy_of(posterior.zeta_home[m].a) + entropy_of(posterior.zeta_away[m].a);
    // Node corrections: degree counts pairwise factors only.
    std::vector<int> degree(graph.var_count(), 0);
    for (const auto& f : graph.factors) {
        if (f.var_b < 0) continue;
        ++degree[f.var_a];
        ++degree[f.var_b];
    }
    for (int v = 0; v < graph.var_count(); ++v) {
        const auto& var = graph.vars[v];
        const Vec& gamma = var.role == FactorGraph::kOffense
                               ? posterior.gamma_o[var.team][var.presence_idx]
                               : posterior.gamma_d[var.team][var.presence_idx];
        h -= (degree[v] - 1) * entropy_of(gamma);
    }
    return h;
}

std::string posterior_csv(const Posterior& posterior, const Schedule& schedule) {
    std::string out = "team,week,kind";
    for (int i = 0; i < posterior.num_states; ++i) out += ",s" + std::to_string(i);
    out += '\n';
    char buf[32];
    for (size_t t = 0; t < posterior.weeks.size(); ++t) {
        for (size_t p = 0; p < posterior.weeks[t].size(); ++p) {
            for (int kind = 0; kind < 2; ++kind) {
                const Vec& v = kind == 0 ? posterior.gamma_o[t][p] : posterior.gamma_d[t][p];
                out += schedule.team_names[t] + "," + std::to_string(posterior.weeks[t][p]) +
                       (kind == 0 ? ",offense" : ",defense");
                for (double x : v) {
                    std::snprintf(buf, sizeof buf, ",%.17g", x);
                    out += buf;
                }
                out += '\n';
            }
        }
    }
    return out;
}

}  // namespace formline
