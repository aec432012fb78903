#include "formline/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "formline/csv.hpp"
#include "formline/sha1.hpp"

namespace formline {

namespace {

using nlohmann::ordered_json;

ordered_json mat_to_json(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < m.rows; ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
    int rows = static_cast<int>(j.size());
    int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    return m;
}

ordered_json cpt_to_json(const Cpt& c) {
    ordered_json out = ordered_json::array();
    for (int i = 0; i < c.s1; ++i) {
        ordered_json mid = ordered_json::array();
        for (int j = 0; j < c.s2; ++j) {
            ordered_json row = ordered_json::array();
            for (int g = 0; g < c.g; ++g) row.push_back(c(i, j, g));
            mid.push_back(row);
        }
        out.push_back(mid);
    }
    return out;
}

Cpt cpt_from_json(const nlohmann::json& j) {
    int s1 = static_cast<int>(j.size());
    int s2 = s1 > 0 ? static_cast<int>(j[0].size()) : 0;
    int g = s2 > 0 ? static_cast<int>(j[0][0].size()) : 0;
    Cpt c(s1, s2, g);
    for (int i = 0; i < s1; ++i)
        for (int jj = 0; jj < s2; ++jj)
            for (int k = 0; k < g; ++k) c(i, jj, k) = j[i][jj][k].get<double>();
    return c;
}

ordered_json payload_json(const ModelFile& model) {
    ordered_json j;
    j["format"] = "formline-model";
    j["version"] = 1;
    j["cardinalities"] = {
        {"strength_states", model.params.card.num_strength_states},
        {"goal_states", model.params.card.num_goal_states},
    };
    ordered_json p;
    p["pi"] = model.params.pi;
    p["rho"] = model.params.rho;
    p["omega_within"] = mat_to_json(model.params.omega_within);
    p["omega_between"] = mat_to_json(model.params.omega_between);
    p["delta_within"] = mat_to_json(model.params.delta_within);
    p["delta_between"] = mat_to_json(model.params.delta_between);
    p["psi"] = cpt_to_json(model.params.psi);
    p["gamma"] = cpt_to_json(model.params.gamma_cpt);
    j["params"] = p;
    ordered_json h;
    h["alpha_within"] = mat_to_json(model.hyper.alpha_within);
    h["alpha_between"] = mat_to_json(model.hyper.alpha_between);
    h["beta"] = model.hyper.beta;
    h["phi"] = model.hyper.phi;
    h["c_transition"] = model.hyper.c_transition;
    h["c_goal"] = model.hyper.c_goal;
    j["hyperparams"] = h;
    ordered_json c;
    c["max_iterations"] = model.config.max_iterations;
    c["restarts"] = model.config.restarts;
    c["seed"] = model.config.seed;
    c["bp_cycles"] = model.config.bp_cycles;
    c["convergence_tol"] = model.config.convergence_tol;
    c["monotonicity_tol"] = model.config.monotonicity_tol;
    c["emission_solver_iters"] = model.config.emission_solver_iters;
    j["train_config"] = c;
    j["final_objective"] = model.final_objective;
    return j;
}

}  // namespace

std::string model_to_json(const ModelFile& model) {
    ordered_json j = payload_json(model);
    j["content_hash"] = git_blob_hash(j.dump());
    return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "formline-model")
        throw std::runtime_error("not a formline model file");
    ModelFile m;
    m.params.card.num_strength_states = j.at("cardinalities").at("strength_states").get<int>();
    m.params.card.num_goal_states = j.at("cardinalities").at("goal_states").get<int>();
    const auto& p = j.at("params");
    m.params.pi = p.at("pi").get<Vec>();
    m.params.rho = p.at("rho").get<Vec>();
    m.params.omega_within = mat_from_json(p.at("omega_within"));
    m.params.omega_between = mat_from_json(p.at("omega_between"));
    m.params.delta_within = mat_from_json(p.at("delta_within"));
    m.params.delta_between = mat_from_json(p.at("delta_between"));
    m.params.psi = cpt_from_json(p.at("psi"));
    m.params.gamma_cpt = cpt_from_json(p.at("gamma"));
    const auto& h = j.at("hyperparams");
    m.hyper.alpha_within = mat_from_json(h.at("alpha_within"));
    m.hyper.alpha_between = mat_from_json(h.at("alpha_between"));
    m.hyper.beta = h.at("beta").get<Vec>();
    m.hyper.phi = h.at("phi").get<Vec>();
    m.hyper.c_transition = h.at("c_transition").get<double>();
    m.hyper.c_goal = h.at("c_goal").get<double>();
    const auto& c = j.at("train_config");
    m.config.max_iterations = c.at("max_iterations").get<int>();
    m.config.restarts = c.at("restarts").get<int>();
    m.config.seed = c.at("seed").get<uint64_t>();
    m.config.bp_cycles = c.at("bp_cycles").get<int>();
    m.config.convergence_tol = c.at("convergence_tol").get<double>();
    m.config.monotonicity_tol = c.at("monotonicity_tol").get<double>();
    m.config.emission_solver_iters = c.at("emission_solver_iters").get<int>();
    m.final_objective = j.at("final_objective").get<double>();
    m.content_hash = j.value("content_hash", "");
    return m;
}

void save_model(const ModelFile& model, const std::string& path) {
    csv::write_file_atomic(path, model_to_json(model));
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace formline
