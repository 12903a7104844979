#pragma once

#include <string>

#include "bulkq/bmap.hpp"
#include "bulkq/service.hpp"
#include "bulkq/simulator.hpp"

namespace bulkq {

struct SolverOptions {
    int n_max = -1;           // < 0: automatic from the tail model
    int pade_num = 6;         // Pade order for deterministic laws
    int pade_den = 7;
    double series_tail_tol = 1e-12;
};

// Parsed model specification (JSON file; see README for the schema).
struct ModelSpec {
    BmapModel model;
    ServicePolicy policy;
    SolverOptions solver;
    SimConfig sim;
    bool has_sim_block = false;
};

ModelSpec parse_model_spec(const std::string& json_text);
ModelSpec load_model_spec(const std::string& path);

}  // namespace bulkq
