#pragma once

#include <string>
#include <vector>

#include "bulkq/pipeline.hpp"
#include "bulkq/simulator.hpp"

namespace bulkq {

// A rendered-table abstraction: numeric body plus a Total row; NaN cells are
// printed empty (idle columns stop at n = a-1, mirroring the reference layout).
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::string> row_labels;
    std::vector<std::vector<double>> body;
    std::vector<double> totals;
};

Table departure_table(const Solution& sol, int display_n_max);
Table arbitrary_table(const Solution& sol, int display_n_max);
Table pre_arrival_table(const Solution& sol, int display_n_max);
Table measures_panel(const Solution& sol);
Table comparison_table(const Solution& sol, const SimEstimate& sim);

std::string render_text(const Table& table);
std::string render_csv(const Table& table);

// Display horizon: smallest n whose modeled r=b tail drops below 1e-10,
// capped at 10 b / (1 - rho).
int default_display_rows(const Solution& sol);

}  // namespace bulkq
