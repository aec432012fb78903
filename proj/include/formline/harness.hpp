#pragma once

#include <optional>
#include <string>
#include <vector>

#include "formline/baselines.hpp"
#include "formline/trainer.hpp"
#include "formline/types.hpp"

namespace formline {

// One held-out match: probability each method assigned to the realized
// outcome, with its log. Methods lacking input (e.g. no posted odds) are
// absent rather than zero.
struct EvalRow {
    int week = 0;
    int match_idx = 0;  // order within the week
    Date date;
    int home = -1;
    int away = -1;
    int outcome = 1;  // 0 home win, 1 draw, 2 away win
    std::optional<double> p_model, p_elo, p_naive, p_book;
    std::optional<double> ll_model, ll_elo, ll_naive, ll_book;

    std::optional<double> ll_of(const std::string& method) const;
};

struct RollingOptions {
    int weekly_iters = 10;  // EM iterations after each incorporated week
};

// Fig-style rolling holdout: train to convergence on weeks < split_week, then
// for each later week predict every match with the model, Elo, naive, and
// bookmaker methods from data strictly before that week, record rows, fold
// the week in (warm-started EM for weekly_iters iterations; Elo rating
// updates), and continue. Leakage is prevented structurally: predictions only
// ever see a schedule truncated at the target week.
std::vector<EvalRow> rolling_evaluate(const Schedule& schedule, const Hyperparams& hyper,
                                      const TrainConfig& config, int split_week,
                                      const RollingOptions& options = {});

struct NetPoint {
    int week = 0;
    double cumulative = 0.0;
};

// Running sum of ll_method - ll_baseline ordered by (week, match); rows where
// either method is absent are skipped pairwise.
std::vector<NetPoint> cumulative_net(const std::vector<EvalRow>& rows, const std::string& method,
                                     const std::string& baseline);

// True latent trajectories recorded by simulate, aligned with presence.
struct LatentRecord {
    std::vector<std::vector<int>> offense;  // per team, per presence entry
    std::vector<std::vector<int>> defense;
};

struct SimulationResult {
    Schedule schedule;
    LatentRecord latents;
};

// Samples latent chains from pi/rho and the transition matrices (between
// matrices across season boundaries), then goals from the emission CPTs.
// Bit-reproducible for a fixed seed.
SimulationResult simulate(const ModelParams& params, const Schedule& skeleton, uint64_t seed);

struct BruteForceResult {
    Posterior posterior;
    double log_z = 0.0;  // ln sum_Z P(X, Z | theta)
};

// Exact gamma/xi/zeta by enumerating every joint latent configuration.
// Refuses instances beyond max_states (default 1e7) configurations.
BruteForceResult brute_force_posterior(const Schedule& schedule, const ModelParams& params,
                                       double max_states = 1e7);

struct RecoveryReport {
    double max_expected_goals_error = 0.0;  // after best state-permutation alignment
    double omega_within_frobenius = 0.0;
    double omega_between_frobenius = 0.0;
    double delta_within_frobenius = 0.0;
    double delta_between_frobenius = 0.0;
    double mean_true_state_probability = 0.0;
    std::vector<int> offense_permutation;  // fitted index -> true index
    std::vector<int> defense_permutation;
};

// Label-switching-aware comparison of fitted vs true parameters plus mean
// posterior mass on the true latent states.
RecoveryReport recovery_report(const ModelParams& true_params, const LatentRecord& true_latents,
                               const ModelParams& fitted, const Posterior& posterior);

// CSV exports per the evaluation interface.
std::string eval_rows_csv(const std::vector<EvalRow>& rows, const Schedule& schedule);
std::string net_series_csv(const std::vector<EvalRow>& rows);

}  // namespace formline
