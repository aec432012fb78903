#include "formline/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace formline {

std::vector<std::string> TrainConfig::validate() const {
    std::vector<std::string> out;
    if (max_iterations < 1) out.push_back("max_iterations must be positive");
    if (restarts < 1) out.push_back("restarts must be positive");
    if (bp_cycles < 1) out.push_back("bp_cycles must be positive");
    if (!(convergence_tol > 0)) out.push_back("convergence_tol must be positive");
    if (!(monotonicity_tol > 0)) out.push_back("monotonicity_tol must be positive");
    if (emission_solver_iters < 1) out.push_back("emission_solver_iters must be positive");
    if (threads < 1) out.push_back("threads must be positive");
    return out;
}

Mat make_transition_alphas(int num_states, double c, TransitionKind kind) {
    const double ratio = kind == TransitionKind::kWithin ? 8.0 : 2.0;
    Mat alpha(num_states, num_states);
    for (int j = 0; j < num_states; ++j) {
        double norm = 0.0;
        for (int k = 0; k < num_states; ++k) norm += std::pow(ratio, -std::abs(k - j));
        for (int k = 0; k < num_states; ++k)
            alpha(j, k) = 1.0 + c * std::pow(ratio, -std::abs(k - j)) / norm;
    }
    return alpha;
}

Vec make_emission_dirichlet(const Vec& goal_frequencies, double c) {
    Vec out(goal_frequencies.size());
    for (size_t g = 0; g < goal_frequencies.size(); ++g)
        out[g] = 1.0 + c * goal_frequencies[g];
    return out;
}

std::pair<Vec, Vec> empirical_goal_frequencies(const Schedule& schedule, int num_goal_states) {
    Vec home(num_goal_states, 0.0), away(num_goal_states, 0.0);
    int n = 0;
    const int cap = num_goal_states - 1;
    for (const auto& week : schedule.weeks) {
        for (const auto& m : week) {
            home[std::min(m.home_goals, cap)] += 1.0;
            away[std::min(m.away_goals, cap)] += 1.0;
            ++n;
        }
    }
    if (n == 0) {
        std::fill(home.begin(), home.end(), 1.0 / num_goal_states);
        std::fill(away.begin(), away.end(), 1.0 / num_goal_states);
    } else {
        for (double& x : home) x /= n;
        for (double& x : away) x /= n;
    }
    return {home, away};
}

Hyperparams default_hyperparams(const Schedule& schedule, const Cardinalities& card,
                                double c_transition, double c_goal) {
    Hyperparams h;
    h.c_transition = c_transition;
    h.c_goal = c_goal;
    h.alpha_within =
        make_transition_alphas(card.num_strength_states, c_transition, TransitionKind::kWithin);
    h.alpha_between =
        make_transition_alphas(card.num_strength_states, c_transition, TransitionKind::kBetween);
    auto [home_f, away_f] = empirical_goal_frequencies(schedule, card.num_goal_states);
    h.beta = make_emission_dirichlet(home_f, c_goal);
    h.phi = make_emission_dirichlet(away_f, c_goal);
    return h;
}

SufficientStats accumulate_statistics(const FactorGraph& graph, const Posterior& posterior) {
    const int s = posterior.num_states;
    const int g = graph.card.num_goal_states;
    SufficientStats st;
    st.head_gamma_o.assign(s, 0.0);
    st.head_gamma_d.assign(s, 0.0);
    st.xi_o_within = Mat(s, s);
    st.xi_o_between = Mat(s, s);
    st.xi_d_within = Mat(s, s);
    st.xi_d_between = Mat(s, s);
    st.psi_counts = Cpt(s, s, g);
    st.gamma_counts = Cpt(s, s, g);

    for (size_t t = 0; t < posterior.gamma_o.size(); ++t) {
        if (posterior.gamma_o[t].empty()) continue;
        for (int i = 0; i < s; ++i) {
            st.head_gamma_o[i] += posterior.gamma_o[t][0][i];
            st.head_gamma_d[i] += posterior.gamma_d[t][0][i];
        }
        for (size_t e = 0; e < posterior.xi_o[t].size(); ++e) {
            bool between = posterior.edge_between[t][e] != 0;
            Mat& xo = between ? st.xi_o_between : st.xi_o_within;
            Mat& xd = between ? st.xi_d_between : st.xi_d_within;
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j) {
                    xo(i, j) += posterior.xi_o[t][e](i, j);
                    xd(i, j) += posterior.xi_d[t][e](i, j);
                }
        }
    }
    for (size_t m = 0; m < graph.matches.size(); ++m) {
        const auto& match = graph.matches[m];
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                st.psi_counts(i, j, match.home_goals) += posterior.zeta_home[m](i, j);
                st.gamma_counts(i, j, match.away_goals) += posterior.zeta_away[m](i, j);
            }
    }
    return st;
}

std::pair<Vec, Vec> m_step_initial(const Posterior& posterior) {
    const int s = posterior.num_states;
    Vec pi(s, 0.0), rho(s, 0.0);
    for (size_t t = 0; t < posterior.gamma_o.size(); ++t) {
        if (posterior.gamma_o[t].empty()) continue;
        for (int i = 0; i < s; ++i) {
            pi[i] += posterior.gamma_o[t][0][i];
            rho[i] += posterior.gamma_d[t][0][i];
        }
    }
    if (!try_normalize(pi) || !try_normalize(rho))
        throw std::runtime_error("m_step_initial: no chain heads in posterior");
    return {pi, rho};
}

Mat m_step_transition(const Mat& xi_sums, const Mat& alpha) {
    const int s = xi_sums.rows;
    Mat out(s, s);
    for (int k = 0; k < s; ++k) {
        double denom = 0.0;
        for (int j = 0; j < s; ++j) {
            out(k, j) = alpha(k, j) - 1.0 + xi_sums(k, j);
            denom += out(k, j);
        }
        if (!(denom > 0.0)) {
            std::cerr << "m_step_transition: row " << k
                      << " has zero mass (flat prior, no data); using uniform\n";
            for (int j = 0; j < s; ++j) out(k, j) = 1.0 / s;
        } else {
            for (int j = 0; j < s; ++j) out(k, j) /= denom;
        }
    }
    return out;
}

double emission_objective(const Cpt& cpt, const Cpt& counts, const Vec& dirichlet) {
    double acc = 0.0;
    for (int i = 0; i < cpt.s1; ++i)
        for (int j = 0; j < cpt.s2; ++j)
            for (int g = 0; g < cpt.g; ++g) {
                double w = counts(i, j, g) + dirichlet[g] - 1.0;
                if (w == 0.0) continue;
                double p = cpt(i, j, g);
                if (p <= 0.0) return -std::numeric_limits<double>::infinity();
                acc += w * std::log(p);
            }
    return acc;
}

namespace {

bool monotone_feasible(const Cpt& cpt, double tol) {
    for (int j = 0; j < cpt.s2; ++j)
        for (int i = 0; i + 1 < cpt.s1; ++i)
            if (cpt.expected_goals(i + 1, j) < cpt.expected_goals(i, j) - tol) return false;
    for (int i = 0; i < cpt.s1; ++i)
        for (int j = 0; j + 1 < cpt.s2; ++j)
            if (cpt.expected_goals(i, j + 1) > cpt.expected_goals(i, j) + tol) return false;
    return true;
}

// Margins of the monotonicity constraints; all must stay positive inside the
// barrier solve.
void collect_margins(const Cpt& cpt, std::vector<double>& margins) {
    margins.clear();
    for (int j = 0; j < cpt.s2; ++j)
        for (int i = 0; i + 1 < cpt.s1; ++i)
            margins.push_back(cpt.expected_goals(i + 1, j) - cpt.expected_goals(i, j));
    for (int i = 0; i < cpt.s1; ++i)
        for (int j = 0; j + 1 < cpt.s2; ++j)
            margins.push_back(cpt.expected_goals(i, j) - cpt.expected_goals(i, j + 1));
}

Cpt cpt_from_logits(const Cpt& z) {
    Cpt out(z.s1, z.s2, z.g);
    for (int i = 0; i < z.s1; ++i)
        for (int j = 0; j < z.s2; ++j) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int g = 0; g < z.g; ++g) mx = std::max(mx, z(i, j, g));
            double sum = 0.0;
            for (int g = 0; g < z.g; ++g) {
                out(i, j, g) = std::exp(z(i, j, g) - mx);
                sum += out(i, j, g);
            }
            for (int g = 0; g < z.g; ++g) out(i, j, g) /= sum;
        }
    return out;
}

// Barrier objective: F(cpt) + mu * sum ln(margins); -inf when infeasible.
double barrier_value(const Cpt& cpt, const Cpt& counts, const Vec& dirichlet, double mu,
                     std::vector<double>& margins) {
    collect_margins(cpt, margins);
    double v = emission_objective(cpt, counts, dirichlet);
    for (double m : margins) {
        if (!(m > 0.0)) return -std::numeric_limits<double>::infinity();
        v += mu * std::log(m);
    }
    return v;
}

}  // namespace

Cpt m_step_emission_constrained(const Cpt& zeta_goal_counts, const Vec& dirichlet, double tol,
                                int max_iters) {
    const int s1 = zeta_goal_counts.s1, s2 = zeta_goal_counts.s2, gs = zeta_goal_counts.g;

    // Analytic MAP update; returned directly when the constraints are slack.
    Cpt analytic(s1, s2, gs);
    for (int i = 0; i < s1; ++i)
        for (int j = 0; j < s2; ++j) {
            double denom = 0.0;
            for (int g = 0; g < gs; ++g) {
                analytic(i, j, g) = zeta_goal_counts(i, j, g) + dirichlet[g] - 1.0;
                denom += analytic(i, j, g);
            }
            if (!(denom > 0.0)) {
                for (int g = 0; g < gs; ++g) analytic(i, j, g) = 1.0 / gs;
            } else {
                for (int g = 0; g < gs; ++g) analytic(i, j, g) /= denom;
            }
        }
    if (monotone_feasible(analytic, tol)) return analytic;

    // Strictly feasible start: exponential tilt of the average analytic row,
    // slope increasing in offense and decreasing in defense state.
    Vec base(gs, 0.0);
    for (int i = 0; i < s1; ++i)
        for (int j = 0; j < s2; ++j)
            for (int g = 0; g < gs; ++g) base[g] += analytic(i, j, g);
    normalize_in_place(base);
    const double floor = 1e-6;
    for (double& x : base) x = (x + floor) / (1.0 + gs * floor);
    Cpt logits(s1, s2, gs);
    const double denom_states = std::max(1, std::max(s1, s2) - 1);
    for (int i = 0; i < s1; ++i)
        for (int j = 0; j < s2; ++j) {
            double tilt = 0.25 * (i - j) / denom_states;
            for (int g = 0; g < gs; ++g) logits(i, j, g) = std::log(base[g]) + tilt * g;
        }

    std::vector<double> margins;
    double mu = 0.05;
    Cpt cpt = cpt_from_logits(logits);
    double value = barrier_value(cpt, zeta_goal_counts, dirichlet, mu, margins);

    Cpt grad(s1, s2, gs);
    for (int iter = 0; iter < max_iters; ++iter) {
        if (iter > 0 && iter % 50 == 0) {
            mu *= 0.5;
            value = barrier_value(cpt, zeta_goal_counts, dirichlet, mu, margins);
        }
        collect_margins(cpt, margins);
        // d(barrier)/d(expected goals of row (i,j)), from the four adjacent
        // monotonicity constraints.
        Mat e_coef(s1, s2, 0.0);
        {
            size_t idx = 0;
            for (int j = 0; j < s2; ++j)
                for (int i = 0; i + 1 < s1; ++i, ++idx) {
                    double inv = mu / margins[idx];
                    e_coef(i + 1, j) += inv;
                    e_coef(i, j) -= inv;
                }
            for (int i = 0; i < s1; ++i)
                for (int j = 0; j + 1 < s2; ++j, ++idx) {
                    double inv = mu / margins[idx];
                    e_coef(i, j) += inv;
                    e_coef(i, j + 1) -= inv;
                }
        }
        // Gradient in logit space (softmax chain rule per row).
        for (int i = 0; i < s1; ++i)
            for (int j = 0; j < s2; ++j) {
                double dot = 0.0;
                for (int g = 0; g < gs; ++g) {
                    double w = zeta_goal_counts(i, j, g) + dirichlet[g] - 1.0;
                    double gp = (cpt(i, j, g) > 0.0 ? w / cpt(i, j, g) : 0.0) + e_coef(i, j) * g;
                    grad(i, j, g) = gp;
                    dot += cpt(i, j, g) * gp;
                }
                for (int g = 0; g < gs; ++g)
                    grad(i, j, g) = cpt(i, j, g) * (grad(i, j, g) - dot);
            }
        double gnorm = 0.0;
        for (double x : grad.a) gnorm = std::max(gnorm, std::abs(x));
        if (gnorm < 1e-13) break;

        // Backtracking line search on the barrier objective.
        double step = 1.0 / std::max(1.0, gnorm);
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            Cpt trial = logits;
            for (size_t n = 0; n < trial.a.size(); ++n) trial.a[n] += step * grad.a[n];
            Cpt trial_cpt = cpt_from_logits(trial);
            double trial_value =
                barrier_value(trial_cpt, zeta_goal_counts, dirichlet, mu, margins);
            if (trial_value > value) {
                logits = std::move(trial);
                cpt = std::move(trial_cpt);
                value = trial_value;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // Stuck at this barrier weight; tighten it and continue.
            mu *= 0.5;
            if (mu < 1e-12) break;
            value = barrier_value(cpt, zeta_goal_counts, dirichlet, mu, margins);
        }
    }

    // Clean up row normalization drift.
    for (int i = 0; i < s1; ++i)
        for (int j = 0; j < s2; ++j) {
            double sum = 0.0;
            for (int g = 0; g < gs; ++g) sum += cpt(i, j, g);
            for (int g = 0; g < gs; ++g) cpt(i, j, g) /= sum;
        }
    return cpt;
}

ModelParams initial_params(Rng& rng, const Cardinalities& card, const Hyperparams& hyper) {
    const int s = card.num_strength_states;
    const int gs = card.num_goal_states;
    ModelParams p;
    p.card = card;
    p.pi = rng.dirichlet_symmetric(s, 1.0);
    p.rho = rng.dirichlet_symmetric(s, 1.0);

    auto random_transition = [&] {
        Mat m(s, s);
        for (int k = 0; k < s; ++k) {
            Vec row = rng.dirichlet_symmetric(s, 5.0);
            for (int j = 0; j < s; ++j) m(k, j) = 0.5 * row[j] + 0.5 * (j == k ? 1.0 : 0.0);
        }
        return m;
    };
    p.omega_within = random_transition();
    p.omega_between = random_transition();
    p.delta_within = random_transition();
    p.delta_between = random_transition();

    // Emission rows drawn around the prior shape, then made monotone by
    // sorting expected goals ascending across offense states and descending
    // across defense states (sorting a sorted-column matrix by rows keeps the
    // columns sorted).
    auto random_emission = [&](const Vec& dir) {
        Vec alpha(gs);
        double mean = vec_sum(dir) / gs;
        for (int g = 0; g < gs; ++g) alpha[g] = dir[g] / mean;
        Cpt c(s, s, gs);
        std::vector<std::vector<Vec>> rows(s, std::vector<Vec>(s));
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) rows[i][j] = rng.dirichlet(alpha);
        auto expected = [&](const Vec& row) {
            double e = 0.0;
            for (int g = 0; g < gs; ++g) e += g * row[g];
            return e;
        };
        for (int j = 0; j < s; ++j) {
            std::vector<Vec> col(s);
            for (int i = 0; i < s; ++i) col[i] = rows[i][j];
            std::sort(col.begin(), col.end(),
                      [&](const Vec& a, const Vec& b) { return expected(a) < expected(b); });
            for (int i = 0; i < s; ++i) rows[i][j] = col[i];
        }
        for (int i = 0; i < s; ++i)
            std::sort(rows[i].begin(), rows[i].end(),
                      [&](const Vec& a, const Vec& b) { return expected(a) > expected(b); });
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                for (int g = 0; g < gs; ++g) c(i, j, g) = rows[i][j][g];
        return c;
    };
    p.psi = random_emission(hyper.beta);
    p.gamma_cpt = random_emission(hyper.phi);
    return p;
}

ModelParams m_step_all(const ModelParams& current, const SufficientStats& stats,
                       const Posterior& posterior, const Hyperparams& hyper,
                       const TrainConfig& config) {
    ModelParams next = current;
    auto [pi, rho] = m_step_initial(posterior);
    next.pi = std::move(pi);
    next.rho = std::move(rho);
    next.omega_within = m_step_transition(stats.xi_o_within, hyper.alpha_within);
    next.omega_between = m_step_transition(stats.xi_o_between, hyper.alpha_between);
    next.delta_within = m_step_transition(stats.xi_d_within, hyper.alpha_within);
    next.delta_between = m_step_transition(stats.xi_d_between, hyper.alpha_between);
    Cpt psi = m_step_emission_constrained(stats.psi_counts, hyper.beta, config.monotonicity_tol,
                                          config.emission_solver_iters);
    if (emission_objective(psi, stats.psi_counts, hyper.beta) >=
        emission_objective(current.psi, stats.psi_counts, hyper.beta)) {
        next.psi = std::move(psi);
    }
    Cpt gamma = m_step_emission_constrained(stats.gamma_counts, hyper.phi,
                                            config.monotonicity_tol,
                                            config.emission_solver_iters);
    if (emission_objective(gamma, stats.gamma_counts, hyper.phi) >=
        emission_objective(current.gamma_cpt, stats.gamma_counts, hyper.phi)) {
        next.gamma_cpt = std::move(gamma);
    }
    return next;
}

namespace {

struct RestartResult {
    ModelParams params;
    Posterior posterior;
    std::vector<double> objectives;
    double final_objective = -std::numeric_limits<double>::infinity();
};

RestartResult run_restart(const FactorGraph& graph, const Schedule& schedule,
                          const Hyperparams& hyper, const TrainConfig& config, uint64_t seed) {
    (void)schedule;
    Rng rng(seed);
    RestartResult r;
    r.params = initial_params(rng, graph.card, hyper);
    BpOptions bp;
    bp.cycles = config.bp_cycles;

    double prev_obj = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        r.posterior = run_bp(graph, r.params, bp);
        double obj = joint_log_posterior(graph, r.params, hyper, r.posterior).value +
                     posterior_entropy(graph, r.posterior);
        r.objectives.push_back(obj);
        if (iter > 0 && std::abs(obj - prev_obj) <= config.convergence_tol *
                                                        (std::abs(prev_obj) + 1e-12)) {
            converged = true;
            break;
        }
        prev_obj = obj;

        SufficientStats st = accumulate_statistics(graph, r.posterior);
        r.params = m_step_all(r.params, st, r.posterior, hyper, config);
    }
    if (!converged) {
        // The last M step has not been scored yet.
        r.posterior = run_bp(graph, r.params, bp);
        double obj = joint_log_posterior(graph, r.params, hyper, r.posterior).value +
                     posterior_entropy(graph, r.posterior);
        r.objectives.push_back(obj);
    }
    r.final_objective = r.objectives.back();
    return r;
}

}  // namespace

EmFitResult em_fit(const Schedule& schedule, const Hyperparams& hyper,
                   const TrainConfig& config) {
    auto config_issues = config.validate();
    if (!config_issues.empty())
        throw std::runtime_error("invalid train config: " + config_issues.front());
    auto hyper_issues = hyper.validate();
    if (!hyper_issues.empty())
        throw std::runtime_error("invalid hyperparams: " + hyper_issues.front());

    Cardinalities card;
    card.num_strength_states = hyper.alpha_within.rows;
    card.num_goal_states = static_cast<int>(hyper.beta.size());
    FactorGraph graph = build_graph(schedule, card);

    std::vector<RestartResult> results(config.restarts);
    auto worker = [&](int r) {
        results[r] = run_restart(graph, schedule, hyper, config, config.seed + r);
    };
    if (config.threads <= 1) {
        for (int r = 0; r < config.restarts; ++r) worker(r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        int n_threads = std::min(config.threads, config.restarts);
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back([&] {
                for (int r = next++; r < config.restarts; r = next++) worker(r);
            });
        for (auto& th : pool) th.join();
    }

    EmFitResult out;
    out.trace.objectives.resize(config.restarts);
    out.trace.final_objective.resize(config.restarts);
    int best = 0;
    for (int r = 0; r < config.restarts; ++r) {
        out.trace.objectives[r] = results[r].objectives;
        out.trace.final_objective[r] = results[r].final_objective;
        if (results[r].final_objective > results[best].final_objective) best = r;
    }
    out.trace.selected_restart = best;
    out.params = std::move(results[best].params);
    out.posterior = std::move(results[best].posterior);
    out.final_objective = results[best].final_objective;

    auto violations = validate_params(out.params);
    if (!violations.empty())
        throw std::runtime_error("em_fit produced invalid parameters: " + violations.front());
    return out;
}

std::string trace_csv(const TrainTrace& trace) {
    std::string out = "restart,iteration,objective\n";
    char buf[64];
    for (size_t r = 0; r < trace.objectives.size(); ++r)
        for (size_t i = 0; i < trace.objectives[r].size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", r, i, trace.objectives[r][i]);
            out += buf;
        }
    return out;
}

}  // namespace formline
