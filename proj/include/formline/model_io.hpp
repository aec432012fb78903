#pragma once

#include <string>

#include "formline/trainer.hpp"
#include "formline/types.hpp"

namespace formline {

struct ModelFile {
    ModelParams params;
    Hyperparams hyper;
    TrainConfig config;
    double final_objective = 0.0;
    std::string content_hash;  // git-style blob hash of the payload
};

// Doubles are serialized with shortest-round-trip precision, so
// load(save(m)) reproduces every value bit-exactly.
std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(const std::string& text);

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace formline
