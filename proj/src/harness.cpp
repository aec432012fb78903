#include "formline/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "formline/ingest.hpp"
#include "formline/predictor.hpp"
#include "formline/rng.hpp"

namespace formline {

std::optional<double> EvalRow::ll_of(const std::string& method) const {
    if (method == "model") return ll_model;
    if (method == "elo") return ll_elo;
    if (method == "naive") return ll_naive;
    if (method == "book") return ll_book;
    throw std::runtime_error("unknown method name: " + method);
}

std::vector<EvalRow> rolling_evaluate(const Schedule& schedule, const Hyperparams& hyper,
                                      const TrainConfig& config, int split_week,
                                      const RollingOptions& options) {
    if (split_week <= 0 || split_week >= schedule.num_weeks())
        throw std::runtime_error("split week " + std::to_string(split_week) +
                                 " outside schedule range (1.." +
                                 std::to_string(schedule.num_weeks() - 1) + ")");
    if (options.weekly_iters < 1) throw std::runtime_error("weekly_iters must be >= 1");

    Cardinalities card;
    card.num_strength_states = hyper.alpha_within.rows;
    card.num_goal_states = static_cast<int>(hyper.beta.size());

    // Initial fit on the training split only.
    Schedule train_view = schedule.truncated(split_week);
    EmFitResult fit = em_fit(train_view, hyper, config);
    ModelParams params = std::move(fit.params);
    Posterior posterior = std::move(fit.posterior);

    std::vector<MatchRecord> train_matches;
    for (const auto* m : train_view.matches_flat()) train_matches.push_back(*m);
    // elo_fit returns the winning model with ratings already replayed through
    // the training matches.
    EloModel elo = elo_fit(train_matches);
    PredictionTriple naive = naive_fit(train_matches);

    BpOptions bp;
    bp.cycles = config.bp_cycles;

    std::vector<EvalRow> rows;
    for (int w = split_week; w < schedule.num_weeks(); ++w) {
        int idx_in_week = 0;
        for (const auto& m : schedule.weeks[w]) {
            EvalRow row;
            row.week = w;
            row.match_idx = idx_in_week++;
            row.date = m.date;
            row.home = m.home;
            row.away = m.away;
            row.outcome = match_outcome(m);
            auto set = [&](std::optional<double>& p_field, std::optional<double>& ll_field,
                           double p) {
                p_field = p;
                ll_field = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
            };
            // Model: needs posterior history for both teams before week w.
            try {
                auto dist = predict_match(m.home, m.away, w, posterior, params,
                                          schedule.season_boundaries);
                set(row.p_model, row.ll_model, wdl(dist).prob_of(row.outcome));
            } catch (const std::runtime_error&) {
                // no history for one of the teams: model column stays absent
            }
            set(row.p_elo, row.ll_elo, elo_predict(elo, m.home, m.away).prob_of(row.outcome));
            set(row.p_naive, row.ll_naive, naive.prob_of(row.outcome));
            if (m.odds) {
                set(row.p_book, row.ll_book,
                    implied_probabilities(*m.odds).prob_of(row.outcome));
            }
            rows.push_back(row);
        }

        // Fold week w in: warm-started EM on the extended view, then a final
        // E step so next week's predictions see the updated parameters.
        Schedule extended = schedule.truncated(w + 1);
        FactorGraph graph = build_graph(extended, card);
        for (int it = 0; it < options.weekly_iters; ++it) {
            posterior = run_bp(graph, params, bp);
            SufficientStats st = accumulate_statistics(graph, posterior);
            params = m_step_all(params, st, posterior, hyper, config);
        }
        posterior = run_bp(graph, params, bp);
        for (const auto& m : schedule.weeks[w]) elo_update(elo, m);
    }
    return rows;
}

std::vector<NetPoint> cumulative_net(const std::vector<EvalRow>& rows, const std::string& method,
                                     const std::string& baseline) {
    std::vector<NetPoint> out;
    double acc = 0.0;
    for (const auto& row : rows) {
        auto a = row.ll_of(method);
        auto b = row.ll_of(baseline);
        if (!a || !b) continue;
        acc += *a - *b;
        out.push_back({row.week, acc});
    }
    return out;
}

SimulationResult simulate(const ModelParams& params, const Schedule& skeleton, uint64_t seed) {
    auto violations = validate_params(params);
    if (!violations.empty())
        throw std::runtime_error("simulate: invalid params: " + violations.front());

    Rng rng(seed);
    SimulationResult result;
    result.schedule = skeleton;
    if (result.schedule.presence.empty() ||
        static_cast<int>(result.schedule.presence.size()) != result.schedule.num_teams)
        result.schedule.rebuild_presence();
    const Schedule& sched = result.schedule;
    const int s = params.card.num_strength_states;

    auto sample_from = [&](const Vec& dist) { return rng.discrete(dist); };
    auto sample_row = [&](const Mat& m, int row) {
        Vec w(s);
        for (int j = 0; j < s; ++j) w[j] = m(row, j);
        return rng.discrete(w);
    };

    // Latent chains in team order, offense then defense per team.
    result.latents.offense.resize(sched.num_teams);
    result.latents.defense.resize(sched.num_teams);
    std::vector<std::unordered_map<int, int>> week_to_idx(sched.num_teams);
    for (int t = 0; t < sched.num_teams; ++t) {
        const auto& pres = sched.presence[t];
        auto& off = result.latents.offense[t];
        auto& def = result.latents.defense[t];
        for (size_t p = 0; p < pres.size(); ++p) {
            week_to_idx[t][pres[p].week] = static_cast<int>(p);
            bool between = false;
            if (p > 0)
                for (int b : sched.season_boundaries)
                    if (b > pres[p - 1].week && b <= pres[p].week) between = true;
            if (p == 0) {
                off.push_back(sample_from(params.pi));
                def.push_back(sample_from(params.rho));
            } else {
                off.push_back(sample_row(between ? params.omega_between : params.omega_within,
                                         off.back()));
                def.push_back(sample_row(between ? params.delta_between : params.delta_within,
                                         def.back()));
            }
        }
    }

    // Goals in schedule order.
    const int cap = params.card.goal_cap();
    for (int w = 0; w < result.schedule.num_weeks(); ++w) {
        for (auto& m : result.schedule.weeks[w]) {
            int ho = result.latents.offense[m.home][week_to_idx[m.home].at(w)];
            int hd = result.latents.defense[m.home][week_to_idx[m.home].at(w)];
            int ao = result.latents.offense[m.away][week_to_idx[m.away].at(w)];
            int ad = result.latents.defense[m.away][week_to_idx[m.away].at(w)];
            Vec wh(params.card.num_goal_states), wa(params.card.num_goal_states);
            for (int g = 0; g < params.card.num_goal_states; ++g) {
                wh[g] = params.psi(ho, ad, g);
                wa[g] = params.gamma_cpt(ao, hd, g);
            }
            m.raw_home_goals = rng.discrete(wh);
            m.raw_away_goals = rng.discrete(wa);
            m.home_goals = std::min(m.raw_home_goals, cap);
            m.away_goals = std::min(m.raw_away_goals, cap);
        }
    }
    return result;
}

BruteForceResult brute_force_posterior(const Schedule& schedule, const ModelParams& params,
                                       double max_states) {
    const int s = params.card.num_strength_states;

    // One enumeration variable per (team, presence entry, role).
    struct VarRef {
        int team, entry, role;  // role 0 offense, 1 defense
    };
    std::vector<VarRef> vars;
    std::vector<std::vector<int>> var_of(schedule.num_teams);  // [team][2*entry+role]
    std::vector<std::unordered_map<int, int>> week_to_idx(schedule.num_teams);
    for (int t = 0; t < schedule.num_teams; ++t) {
        const auto& pres = schedule.presence[t];
        var_of[t].resize(2 * pres.size());
        for (size_t p = 0; p < pres.size(); ++p) {
            week_to_idx[t][pres[p].week] = static_cast<int>(p);
            for (int role = 0; role < 2; ++role) {
                var_of[t][2 * p + role] = static_cast<int>(vars.size());
                vars.push_back({t, static_cast<int>(p), role});
            }
        }
    }
    const int dims = static_cast<int>(vars.size());
    double total = std::pow(static_cast<double>(s), dims);
    if (total > max_states)
        throw std::runtime_error("brute_force_posterior: instance too large (" +
                                 std::to_string(total) + " states)");

    // Flattened factor list evaluated per configuration.
    struct PriorFactor { int var; const Vec* dist; };
    struct TransFactor { int va, vb; const Mat* m; int team, edge; bool offense; };
    struct EmitFactor { int va, vb; const Cpt* c; int g; int match; bool home; };
    std::vector<PriorFactor> priors;
    std::vector<TransFactor> trans;
    std::vector<EmitFactor> emits;
    for (int t = 0; t < schedule.num_teams; ++t) {
        const auto& pres = schedule.presence[t];
        if (pres.empty()) continue;
        priors.push_back({var_of[t][0], &params.pi});
        priors.push_back({var_of[t][1], &params.rho});
        for (size_t e = 0; e + 1 < pres.size(); ++e) {
            bool between = false;
            for (int b : schedule.season_boundaries)
                if (b > pres[e].week && b <= pres[e + 1].week) between = true;
            trans.push_back({var_of[t][2 * e], var_of[t][2 * e + 2],
                             between ? &params.omega_between : &params.omega_within, t,
                             static_cast<int>(e), true});
            trans.push_back({var_of[t][2 * e + 1], var_of[t][2 * e + 3],
                             between ? &params.delta_between : &params.delta_within, t,
                             static_cast<int>(e), false});
        }
    }
    int match_count = 0;
    for (int w = 0; w < schedule.num_weeks(); ++w) {
        for (const auto& m : schedule.weeks[w]) {
            int ho = var_of[m.home][2 * week_to_idx[m.home].at(w)];
            int hd = var_of[m.home][2 * week_to_idx[m.home].at(w) + 1];
            int ao = var_of[m.away][2 * week_to_idx[m.away].at(w)];
            int ad = var_of[m.away][2 * week_to_idx[m.away].at(w) + 1];
            emits.push_back({ho, ad, &params.psi, m.home_goals, match_count, true});
            emits.push_back({ao, hd, &params.gamma_cpt, m.away_goals, match_count, false});
            ++match_count;
        }
    }

    // Accumulators.
    BruteForceResult result;
    Posterior& post = result.posterior;
    post.num_states = s;
    post.weeks.resize(schedule.num_teams);
    post.plays.resize(schedule.num_teams);
    post.edge_between.resize(schedule.num_teams);
    post.gamma_o.resize(schedule.num_teams);
    post.gamma_d.resize(schedule.num_teams);
    post.xi_o.resize(schedule.num_teams);
    post.xi_d.resize(schedule.num_teams);
    for (int t = 0; t < schedule.num_teams; ++t) {
        const auto& pres = schedule.presence[t];
        for (size_t p = 0; p < pres.size(); ++p) {
            post.weeks[t].push_back(pres[p].week);
            post.plays[t].push_back(pres[p].plays ? 1 : 0);
        }
        post.gamma_o[t].assign(pres.size(), Vec(s, 0.0));
        post.gamma_d[t].assign(pres.size(), Vec(s, 0.0));
        if (!pres.empty()) {
            post.xi_o[t].assign(pres.size() - 1, Mat(s, s));
            post.xi_d[t].assign(pres.size() - 1, Mat(s, s));
            for (size_t e = 0; e + 1 < pres.size(); ++e) {
                bool between = false;
                for (int b : schedule.season_boundaries)
                    if (b > pres[e].week && b <= pres[e + 1].week) between = true;
                post.edge_between[t].push_back(between ? 1 : 0);
            }
        }
    }
    post.zeta_home.assign(match_count, Mat(s, s));
    post.zeta_away.assign(match_count, Mat(s, s));

    std::vector<int> state(dims, 0);
    double z = 0.0;
    for (;;) {
        double weight = 1.0;
        for (const auto& f : priors) weight *= (*f.dist)[state[f.var]];
        for (const auto& f : trans) weight *= (*f.m)(state[f.va], state[f.vb]);
        for (const auto& f : emits) weight *= (*f.c)(state[f.va], state[f.vb], f.g);
        if (weight != 0.0) {
            z += weight;
            for (int v = 0; v < dims; ++v) {
                const auto& ref = vars[v];
                auto& dst = ref.role == 0 ? post.gamma_o : post.gamma_d;
                dst[ref.team][ref.entry][state[v]] += weight;
            }
            for (const auto& f : trans) {
                auto& dst = f.offense ? post.xi_o : post.xi_d;
                dst[f.team][f.edge](state[f.va], state[f.vb]) += weight;
            }
            for (const auto& f : emits) {
                auto& dst = f.home ? post.zeta_home : post.zeta_away;
                dst[f.match](state[f.va], state[f.vb]) += weight;
            }
        }
        // Odometer increment.
        int d = 0;
        while (d < dims && ++state[d] == s) state[d++] = 0;
        if (d == dims) break;
    }
    if (!(z > 0.0))
        throw std::runtime_error("brute_force_posterior: zero partition function");

    for (int t = 0; t < schedule.num_teams; ++t) {
        for (auto& v : post.gamma_o[t]) for (double& x : v) x /= z;
        for (auto& v : post.gamma_d[t]) for (double& x : v) x /= z;
        for (auto& m : post.xi_o[t]) for (double& x : m.a) x /= z;
        for (auto& m : post.xi_d[t]) for (double& x : m.a) x /= z;
    }
    for (auto& m : post.zeta_home) for (double& x : m.a) x /= z;
    for (auto& m : post.zeta_away) for (double& x : m.a) x /= z;
    result.log_z = std::log(z);
    return result;
}

namespace {

double expected_goals_error(const Cpt& fitted, const Cpt& truth, const std::vector<int>& po,
                            const std::vector<int>& pd) {
    double worst = 0.0;
    for (int k = 0; k < truth.s1; ++k)
        for (int j = 0; j < truth.s2; ++j)
            worst = std::max(worst, std::abs(fitted.expected_goals(po[k], pd[j]) -
                                             truth.expected_goals(k, j)));
    return worst;
}

double frobenius_permuted(const Mat& fitted, const Mat& truth, const std::vector<int>& p) {
    double acc = 0.0;
    for (int i = 0; i < truth.rows; ++i)
        for (int j = 0; j < truth.cols; ++j) {
            double d = fitted(p[i], p[j]) - truth(i, j);
            acc += d * d;
        }
    return std::sqrt(acc);
}

}  // namespace

RecoveryReport recovery_report(const ModelParams& true_params, const LatentRecord& true_latents,
                               const ModelParams& fitted, const Posterior& posterior) {
    if (true_params.card != fitted.card)
        throw std::runtime_error("recovery_report: cardinality mismatch");
    const int s = true_params.card.num_strength_states;

    std::vector<int> base(s);
    std::iota(base.begin(), base.end(), 0);
    std::vector<std::vector<int>> perms;
    std::vector<int> p = base;
    do {
        perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));

    RecoveryReport report;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& po : perms) {
        for (const auto& pd : perms) {
            double err = std::max(expected_goals_error(fitted.psi, true_params.psi, po, pd),
                                  expected_goals_error(fitted.gamma_cpt, true_params.gamma_cpt,
                                                       po, pd));
            if (err < best) {
                best = err;
                report.offense_permutation = po;
                report.defense_permutation = pd;
            }
        }
    }
    report.max_expected_goals_error = best;
    report.omega_within_frobenius =
        frobenius_permuted(fitted.omega_within, true_params.omega_within,
                           report.offense_permutation);
    report.omega_between_frobenius =
        frobenius_permuted(fitted.omega_between, true_params.omega_between,
                           report.offense_permutation);
    report.delta_within_frobenius =
        frobenius_permuted(fitted.delta_within, true_params.delta_within,
                           report.defense_permutation);
    report.delta_between_frobenius =
        frobenius_permuted(fitted.delta_between, true_params.delta_between,
                           report.defense_permutation);

    double mass = 0.0;
    long n = 0;
    for (size_t t = 0; t < true_latents.offense.size(); ++t) {
        for (size_t e = 0; e < true_latents.offense[t].size(); ++e) {
            mass += posterior.gamma_o[t][e][report.offense_permutation[true_latents.offense[t][e]]];
            mass += posterior.gamma_d[t][e][report.defense_permutation[true_latents.defense[t][e]]];
            n += 2;
        }
    }
    report.mean_true_state_probability = n > 0 ? mass / n : 0.0;
    return report;
}

std::string eval_rows_csv(const std::vector<EvalRow>& rows, const Schedule& schedule) {
    std::string out =
        "week,date,home,away,outcome,p_model,p_elo,p_naive,p_book,"
        "ll_model,ll_elo,ll_naive,ll_book\n";
    char buf[64];
    auto cell = [&](const std::optional<double>& v) {
        if (!v) return std::string();
        std::snprintf(buf, sizeof buf, "%.10g", *v);
        return std::string(buf);
    };
    static const char* names[] = {"win", "draw", "loss"};
    for (const auto& r : rows) {
        out += std::to_string(r.week) + "," + r.date.iso() + "," +
               schedule.team_names[r.home] + "," + schedule.team_names[r.away] + "," +
               names[r.outcome];
        for (const auto* v : {&r.p_model, &r.p_elo, &r.p_naive, &r.p_book})
            out += "," + cell(*v);
        for (const auto* v : {&r.ll_model, &r.ll_elo, &r.ll_naive, &r.ll_book})
            out += "," + cell(*v);
        out += '\n';
    }
    return out;
}

std::string net_series_csv(const std::vector<EvalRow>& rows) {
    std::map<int, std::array<std::optional<double>, 3>> weekly;  // week -> cumulative values
    const std::array<std::string, 3> baselines = {"naive", "elo", "book"};
    for (int b = 0; b < 3; ++b) {
        auto series = cumulative_net(rows, "model", baselines[b]);
        for (const auto& pt : series) weekly[pt.week][b] = pt.cumulative;  // last row wins
    }
    // Carry the running value forward through weeks a pair skipped.
    std::string out = "week,cum_net_vs_naive,cum_net_vs_elo,cum_net_vs_book\n";
    std::array<std::optional<double>, 3> carry;
    char buf[64];
    for (auto& [week, vals] : weekly) {
        out += std::to_string(week);
        for (int b = 0; b < 3; ++b) {
            if (vals[b]) carry[b] = vals[b];
            if (carry[b]) {
                std::snprintf(buf, sizeof buf, ",%.10g", *carry[b]);
                out += buf;
            } else {
                out += ",";
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace formline
